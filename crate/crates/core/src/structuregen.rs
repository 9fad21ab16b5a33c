//! Section structure of the new song and its alignment to seed sections.

use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::songmodel::{SectionSpec, Song};

pub const W_LENGTH: f64 = 0.7;
pub const W_POSITION: f64 = 0.15;
pub const W_VARIATION: f64 = 0.15;
pub const W_FREQUENCY: f64 = 0.1;

pub const DEFAULT_MAX_DIST: f64 = 0.35;
/// Bars per section in spec and random modes.
pub const SPEC_SECTION_BARS: u32 = 8;

pub const TYPICAL_STRUCTURES: [&str; 5] = ["ABAB", "ABABB", "AABABC", "ABABCB", "AABB"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureMode {
    Copy,
    Spec(String),
    Random,
}

impl FromStr for StructureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "copy" => Ok(StructureMode::Copy),
            "random" => Ok(StructureMode::Random),
            letters => {
                validate_spec(letters)?;
                Ok(StructureMode::Spec(letters.to_string()))
            }
        }
    }
}

fn validate_spec(spec: &str) -> Result<()> {
    if spec.is_empty() {
        return Err(Error::Structure("empty structure string".into()));
    }
    if let Some((i, c)) = spec.char_indices().find(|(_, c)| !c.is_ascii_alphabetic()) {
        return Err(Error::Structure(format!(
            "`{c}` at position {} of `{spec}` is not a section letter",
            i + 1
        )));
    }
    Ok(())
}

/// Expands a letter string into 8-bar sections. Later occurrences of a letter
/// are exact repeats, except that a final section repeating the letter just
/// before it, when that letter had already appeared earlier, is a variation.
pub fn spec_sections(spec: &str) -> Result<Vec<SectionSpec>> {
    validate_spec(spec)?;
    let letters: Vec<String> = spec.chars().map(|c| c.to_string()).collect();
    let n = letters.len();
    Ok(letters
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let is_variation = n >= 3
                && i == n - 1
                && letters[n - 2] == *name
                && letters[..n - 2].contains(name);
            SectionSpec::new(name.clone(), SPEC_SECTION_BARS, is_variation)
        })
        .collect())
}

pub fn generate_structure<R: Rng>(mode: &StructureMode, seed: &Song, rng: &mut R) -> Result<Vec<SectionSpec>> {
    match mode {
        StructureMode::Copy => Ok(seed.sections().to_vec()),
        StructureMode::Spec(s) => spec_sections(s),
        StructureMode::Random => {
            let i = rng.gen_range(0..TYPICAL_STRUCTURES.len());
            spec_sections(TYPICAL_STRUCTURES[i])
        }
    }
}

/// Length, sections before, variation flag and same-name count of a section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionFeatures {
    pub l: u32,
    pub p: u32,
    pub m: u32,
    pub f: u32,
}

/// Total bars and number of sections of a song layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayoutTotals {
    pub bars: u32,
    pub sections: u32,
}

impl LayoutTotals {
    pub fn of(sections: &[SectionSpec]) -> Self {
        LayoutTotals {
            bars: sections.iter().map(|s| s.length).sum(),
            sections: sections.len() as u32,
        }
    }
}

pub fn features(sections: &[SectionSpec]) -> Vec<SectionFeatures> {
    sections
        .iter()
        .enumerate()
        .map(|(i, s)| SectionFeatures {
            l: s.length,
            p: i as u32,
            m: u32::from(s.is_variation),
            f: sections.iter().filter(|o| o.name == s.name).count() as u32,
        })
        .collect()
}

pub fn section_distance(a: SectionFeatures, ctx_a: LayoutTotals, b: SectionFeatures, ctx_b: LayoutTotals) -> f64 {
    let (ls, ps) = (ctx_a.bars as f64, ctx_a.sections as f64);
    let (ln, pn) = (ctx_b.bars as f64, ctx_b.sections as f64);
    W_LENGTH * (a.l as f64 / ls - b.l as f64 / ln).abs()
        + W_POSITION * ((a.p + 1) as f64 / ps - (b.p + 1) as f64 / pn).abs()
        + W_VARIATION * (a.m as f64 - b.m as f64).abs()
        + W_FREQUENCY * (a.f as f64 / ps - b.f as f64 / pn).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alignment {
    /// Imitate this seed section.
    SeedRef(usize),
    /// Imitate this earlier section of the new song.
    SelfRef(usize),
    Fresh,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentPlan {
    pub entries: Vec<Alignment>,
    /// Distance of each chosen match; `None` for fresh sections.
    pub distances: Vec<Option<f64>>,
}

/// Nearest seed section within `max_dist`, else nearest earlier new section
/// within `max_dist`, else fresh. Ties go to the earliest section.
pub fn align(new_sections: &[SectionSpec], seed_sections: &[SectionSpec], max_dist: f64) -> AlignmentPlan {
    let nf = features(new_sections);
    let sf = features(seed_sections);
    let nt = LayoutTotals::of(new_sections);
    let st = LayoutTotals::of(seed_sections);

    let nearest = |cands: &mut dyn Iterator<Item = (usize, f64)>| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in cands {
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.filter(|&(_, d)| d <= max_dist)
    };

    let mut entries = Vec::with_capacity(nf.len());
    let mut distances = Vec::with_capacity(nf.len());
    for (i, &f) in nf.iter().enumerate() {
        let seed_hit = nearest(&mut sf.iter().enumerate().map(|(j, &s)| (j, section_distance(s, st, f, nt))));
        let (entry, dist) = if let Some((j, d)) = seed_hit {
            (Alignment::SeedRef(j), Some(d))
        } else if let Some((j, d)) =
            nearest(&mut nf[..i].iter().enumerate().map(|(j, &p)| (j, section_distance(p, nt, f, nt))))
        {
            (Alignment::SelfRef(j), Some(d))
        } else {
            (Alignment::Fresh, None)
        };
        entries.push(entry);
        distances.push(dist);
    }
    AlignmentPlan { entries, distances }
}

/// Index of the earlier section this one repeats exactly, if any.
pub fn exact_repeat_of(sections: &[SectionSpec], i: usize) -> Option<usize> {
    let s = &sections[i];
    if s.is_variation {
        return None;
    }
    sections[..i]
        .iter()
        .position(|p| p.name == s.name && p.length == s.length && !p.is_variation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(l: u32, p: u32, m: u32, fr: u32) -> SectionFeatures {
        SectionFeatures { l, p, m, f: fr }
    }

    #[test]
    fn hand_distance() {
        let t = LayoutTotals { bars: 16, sections: 2 };
        let d = section_distance(f(8, 0, 0, 1), t, f(8, 1, 1, 1), t);
        assert!((d - 0.225).abs() < 1e-12);
        let t = LayoutTotals { bars: 36, sections: 5 };
        assert_eq!(section_distance(f(8, 0, 0, 2), t, f(8, 0, 0, 2), t), 0.0);
    }

    #[test]
    fn spec_flags() {
        let s = spec_sections("ABABB").unwrap();
        let flags: Vec<bool> = s.iter().map(|x| x.is_variation).collect();
        assert_eq!(flags, vec![false, false, false, false, true]);
        assert!(spec_sections("AABB").unwrap().iter().all(|x| !x.is_variation && x.length == 8));
        assert!(spec_sections("AB1").is_err());
        assert!(spec_sections("").is_err());
        assert!("A B".parse::<StructureMode>().is_err());
    }

    #[test]
    fn self_reference_fallback() {
        // One long seed section; the new song's short sections are far from it
        // but identical to each other.
        let seed = vec![SectionSpec::new("A", 8, false)];
        let new = vec![
            SectionSpec::new("A", 2, false),
            SectionSpec::new("A", 2, false),
            SectionSpec::new("B", 28, false),
        ];
        let plan = align(&new, &seed, DEFAULT_MAX_DIST);
        assert_eq!(plan.entries[1], Alignment::SelfRef(0));
    }

    #[test]
    fn repeats() {
        let s = spec_sections("ABABB").unwrap();
        assert_eq!(exact_repeat_of(&s, 2), Some(0));
        assert_eq!(exact_repeat_of(&s, 3), Some(1));
        assert_eq!(exact_repeat_of(&s, 4), None);
        assert_eq!(exact_repeat_of(&s, 1), None);
    }
}
