//! Seed songs and general corpus shipped with the library.

use crate::corpusstats::{build_general_stats, parse_chord_annotations, CorpusItem, StatTables};
use crate::error::Result;
use crate::songmodel::{parse_text_score, Song};

macro_rules! files {
    ($dir:literal: $($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/", $dir, "/", $name)))),*]
    };
}

/// Seed songs as (file name, text score).
pub const SEED_FILES: &[(&str, &str)] = files!("seeds":
    "anthem.txt",
    "ballad.txt",
    "blues.txt",
    "lament.txt",
    "lullaby.txt",
    "march.txt",
    "reel.txt",
);

/// General corpus: text scores and chord annotation files.
pub const GENERAL_FILES: &[(&str, &str)] = files!("general":
    "anthem_1.txt",
    "anthem_2.txt",
    "anthem_3.txt",
    "ballad_1.txt",
    "ballad_2.txt",
    "ballad_3.txt",
    "blues_1.txt",
    "blues_2.txt",
    "blues_3.txt",
    "hymn_progressions.chords",
    "lament_1.txt",
    "lament_2.txt",
    "lament_3.txt",
    "lullaby_1.txt",
    "lullaby_2.txt",
    "lullaby_3.txt",
    "march_1.txt",
    "march_2.txt",
    "march_3.txt",
    "pop_progressions.chords",
    "reel_1.txt",
    "reel_2.txt",
    "reel_3.txt",
);

/// Bundled seed songs by name (file stem).
pub fn seed_songs() -> Result<Vec<(String, Song)>> {
    SEED_FILES
        .iter()
        .map(|(name, text)| Ok((name.trim_end_matches(".txt").to_string(), parse_text_score(text)?)))
        .collect()
}

pub fn seed_song(name: &str) -> Option<Song> {
    let (_, text) = SEED_FILES.iter().find(|(n, _)| n.trim_end_matches(".txt") == name)?;
    parse_text_score(text).ok()
}

pub fn general_corpus() -> Result<Vec<CorpusItem>> {
    GENERAL_FILES
        .iter()
        .map(|(name, text)| {
            if name.ends_with(".chords") {
                Ok(CorpusItem::Chords(parse_chord_annotations(text)?))
            } else {
                Ok(CorpusItem::Song(parse_text_score(text)?))
            }
        })
        .collect()
}

pub fn general_stats() -> Result<StatTables> {
    build_general_stats(&general_corpus()?)
}
