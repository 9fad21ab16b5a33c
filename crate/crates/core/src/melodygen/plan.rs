//! Section plans for a whole song: which seed section each new section's
//! melody is compared against.

use crate::error::Result;
use crate::rng::derive_seed;
use crate::songmodel::{ChordSymbol, SectionSpec, Song};
use crate::structuregen::{align, Alignment, DEFAULT_MAX_DIST};

use super::ratings::MelodyStyle;
use super::sampler::{generate_section, CandidateMelody, MelodyConfig, SectionPlan};

/// Seed section aligned to each new section, following references to
/// earlier new sections back to the seed.
pub fn seed_references(new_sections: &[SectionSpec], seed_sections: &[SectionSpec]) -> Vec<Option<usize>> {
    let plan = align(new_sections, seed_sections, DEFAULT_MAX_DIST);
    let mut out: Vec<Option<usize>> = Vec::with_capacity(plan.entries.len());
    for e in &plan.entries {
        out.push(match *e {
            Alignment::SeedRef(j) => Some(j),
            Alignment::SelfRef(k) => out[k],
            Alignment::Fresh => None,
        });
    }
    out
}

/// One plan per new section, given the new song's chords (one per bar).
pub fn section_plans(sections: &[SectionSpec], chords: &[ChordSymbol], seed: &Song) -> Vec<SectionPlan> {
    let refs = seed_references(sections, seed.sections());
    let seed_ranges = seed.melody_sections();
    let mut bar = 0usize;
    sections
        .iter()
        .zip(refs)
        .map(|(s, r)| {
            let len = s.length as usize;
            let c = chords[bar..bar + len].to_vec();
            bar += len;
            SectionPlan::new(c, r.map(|j| &seed.melody()[seed_ranges[j].clone()]))
        })
        .collect()
}

/// Seed of the candidate streams for section `i`.
pub fn section_seed(run_seed: u64, i: usize) -> u64 {
    derive_seed(run_seed, &format!("melody/{i}"))
}

/// Best candidate for every section, in order.
pub fn generate_melody(style: &MelodyStyle, plans: &[SectionPlan], cfg: &MelodyConfig, run_seed: u64) -> Result<Vec<CandidateMelody>> {
    plans
        .iter()
        .enumerate()
        .map(|(i, p)| generate_section(style, p, cfg, section_seed(run_seed, i)).map_err(|e| e.in_module("melodygen", i)))
        .collect()
}
