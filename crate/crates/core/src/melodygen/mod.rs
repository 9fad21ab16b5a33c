//! Note-by-note melody sampling from a product of rating functions.

pub mod contour;
pub mod plan;
pub mod ratings;
pub mod rhythm;
pub mod sampler;

pub use contour::{contour_similarity, dtw_distance, dtw_table, Frame, Reference};
pub use ratings::{MelodyStyle, RatingContext, Factors, FACTOR_NAMES};
pub use plan::{generate_melody, section_plans, section_seed, seed_references};
pub use rhythm::rhythm_similarity;
pub use sampler::{
    generate_section, sample_section_melody, score_section, CandidateMelody, MelodyConfig, NoteScore, SectionPlan,
    Step, Stepper, DEFAULT_CANDIDATES, DEFAULT_RHYTHM_THRESHOLD,
};
