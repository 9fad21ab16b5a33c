//! Likelihood of a song under a seed's melody style, and paired comparisons.

mod ttest;

pub use ttest::{ln_gamma, paired_compare, reg_inc_beta, t_two_sided_p, PairedTest};

use crate::corpusstats::StatTables;
use crate::error::Result;
use crate::melodygen::ratings::{MelodyStyle, FACTOR_NAMES};
use crate::melodygen::sampler::{score_section, NoteScore, DEFAULT_RHYTHM_THRESHOLD};
use crate::melodygen::section_plans;
use crate::songmodel::{chord_key, Song};

/// Names of the per-function breakdown columns, in order.
pub fn breakdown_names() -> Vec<&'static str> {
    FACTOR_NAMES.to_vec()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodReport {
    pub song_id: String,
    pub style_id: String,
    pub note_scores: Vec<NoteScore>,
    /// Summed log weight per entry of [`breakdown_names`].
    pub breakdown: Vec<f64>,
    pub total: f64,
    pub mean: f64,
    /// Mean per-note log weight of each section.
    pub section_means: Vec<f64>,
    /// Share of the song's chord n-grams (n = 2..=4) seen in the seed.
    pub chord_overlap: f64,
}

/// Scores every melody note of `song` with the melody rating battery of
/// `style`, comparing contours against the sections of `seed` that the
/// song's sections align to.
pub fn score_song(song: &Song, seed: &Song, style: &MelodyStyle) -> Result<LikelihoodReport> {
    let plans = section_plans(song.sections(), song.chords(), seed);
    let mut note_scores = Vec::with_capacity(song.melody().len());
    let mut section_means = Vec::with_capacity(plans.len());
    for (i, (plan, r)) in plans.iter().zip(song.melody_sections()).enumerate() {
        let s = score_section(style, plan, &song.melody()[r], DEFAULT_RHYTHM_THRESHOLD)
            .map_err(|e| e.in_module("evalharness", i))?;
        section_means.push(s.iter().map(NoteScore::total).sum::<f64>() / s.len() as f64);
        note_scores.extend(s);
    }
    let names = breakdown_names();
    let mut breakdown = vec![0.0; names.len()];
    for s in &note_scores {
        for (b, v) in breakdown.iter_mut().zip(&s.factors) {
            *b += v;
        }
    }
    let total: f64 = note_scores.iter().map(NoteScore::total).sum();
    Ok(LikelihoodReport {
        song_id: String::new(),
        style_id: String::new(),
        mean: total / note_scores.len().max(1) as f64,
        total,
        section_means,
        breakdown,
        note_scores,
        chord_overlap: chord_overlap(song, &crate::corpusstats::build_seed_stats(seed)),
    })
}

/// Fraction of chord n-grams (n = 2..=4, within sections) of `song` that
/// occur in `seed`. 1.0 when the song has none.
pub fn chord_overlap(song: &Song, seed: &StatTables) -> f64 {
    let (mut seen, mut all) = (0usize, 0usize);
    for r in song.section_bars() {
        let chords = &song.chords()[r];
        for n in 2..=4 {
            for w in chords.windows(n) {
                all += 1;
                if seed.chord_ngrams.count(&chord_key(w)) > 0.0 {
                    seen += 1;
                }
            }
        }
    }
    if all == 0 {
        1.0
    } else {
        seen as f64 / all as f64
    }
}

/// CSV with one row per song per rating function, plus the total, the
/// per-note mean and the chord overlap.
pub fn report_csv(reports: &[LikelihoodReport]) -> String {
    let mut out = String::from("song,style,function,log_weight,per_note\n");
    for r in reports {
        let n = r.note_scores.len().max(1) as f64;
        let mut row = |f: &str, v: f64, per: f64| {
            out.push_str(&format!("{},{},{},{:.6},{:.6}\n", r.song_id, r.style_id, f, v, per));
        };
        for (name, v) in breakdown_names().iter().zip(&r.breakdown) {
            row(name, *v, v / n);
        }
        row("total", r.total, r.mean);
        row("chord_ngram_overlap", r.chord_overlap, r.chord_overlap);
    }
    out
}
