//! Song representation: notes on a 16th grid, scale-degree pitches, one
//! diatonic triad per bar, and the text and MIDI formats.

pub mod midi;
pub mod smf;
pub mod text;
mod types;

pub use midi::{export_midi, import_midi, AnnotationSidecar, SidecarSection, TrackMap};
pub use text::{parse_text_score, render_text_score};
pub use types::*;
