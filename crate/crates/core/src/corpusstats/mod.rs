//! Count tables for a seed song and a general corpus, and their blend.

mod blend;
mod build;
mod tables;

pub use blend::{blend, blend_dist, blend_map, BlendParam};
pub use build::{
    build_general_stats, build_seed_stats, chord_category, count_bass, load_corpus_dir,
    load_corpus_file, parse_chord_annotations, tempo_bucket, CorpusItem, GENERAL_PSEUDO,
};
pub use tables::{
    Dist, FreqMap, StatTables, Table, CATEGORIES, INTERVALS, INTERVAL_OFFSET, POOLED_ONSET,
    STATS_VERSION,
};
