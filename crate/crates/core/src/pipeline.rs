//! End-to-end generation: structure, then chords, then melody and bass.

use crate::bassgen::{extract_bass_style, generate_bass, song_bass_style};
use crate::chordgen::{build_chain, detect_distinctive, generate_chords, DEFAULT_BOOST, DEFAULT_THRESHOLD};
use crate::corpusstats::{build_seed_stats, BlendParam, StatTables};
use crate::error::{Error, Result};
use crate::melodygen::{
    generate_section, section_plans, section_seed, seed_references, MelodyConfig, MelodyStyle,
};
use crate::rng::{derive_seed, stream};
use crate::songmodel::{ChordSymbol, Note, Song};
use crate::structuregen::{exact_repeat_of, generate_structure, StructureMode};

/// A seed song with the name it is reported under.
#[derive(Clone, Debug)]
pub struct NamedSeed {
    pub label: String,
    pub song: Song,
}

impl NamedSeed {
    pub fn new(label: impl Into<String>, song: Song) -> Self {
        NamedSeed {
            label: label.into(),
            song,
        }
    }
}

/// Seeds per module. They may all be the same song.
#[derive(Clone, Debug)]
pub struct PipelineSeeds {
    pub structure: NamedSeed,
    pub chords: NamedSeed,
    pub melody: NamedSeed,
    pub bass: NamedSeed,
}

impl PipelineSeeds {
    pub fn single(seed: NamedSeed) -> Self {
        PipelineSeeds {
            structure: seed.clone(),
            chords: seed.clone(),
            melody: seed.clone(),
            bass: seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationConfig {
    pub structure: StructureMode,
    pub alpha_chords: BlendParam,
    pub alpha_melody: BlendParam,
    pub distinctive_threshold: f64,
    pub melody: MelodyConfig,
    pub rng_seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            structure: StructureMode::Copy,
            alpha_chords: BlendParam::default(),
            alpha_melody: BlendParam::default(),
            distinctive_threshold: DEFAULT_THRESHOLD,
            melody: MelodyConfig::default(),
            rng_seed: 0,
        }
    }
}

/// Which seed, and which seed statistics, each module consumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleInput {
    pub label: String,
    /// Hash of the seed tables the module read.
    pub stats_hash: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub structure: ModuleInput,
    pub chords: ModuleInput,
    pub melody: ModuleInput,
    pub bass: ModuleInput,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub song: Song,
    pub provenance: Provenance,
    /// Mean per-note log weight of each section's chosen melody.
    pub melody_scores: Vec<f64>,
}

pub fn stats_hash(t: &StatTables) -> u64 {
    derive_seed(0, &t.to_json())
}

fn input(seed: &NamedSeed, stats: &StatTables) -> ModuleInput {
    ModuleInput {
        label: seed.label.clone(),
        stats_hash: stats_hash(stats),
    }
}

/// Copies section `i` from the section it repeats exactly, if any.
fn repeat_or<T: Clone>(
    sections: &[crate::songmodel::SectionSpec],
    done: &[Vec<T>],
    i: usize,
    make: impl FnOnce() -> Result<Vec<T>>,
) -> Result<Vec<T>> {
    match exact_repeat_of(sections, i) {
        Some(k) => Ok(done[k].clone()),
        None => make(),
    }
}

pub fn run_generate(seeds: &PipelineSeeds, general: &StatTables, cfg: &GenerationConfig) -> Result<Generated> {
    let structure_stats = build_seed_stats(&seeds.structure.song);
    let mut rng = stream(derive_seed(cfg.rng_seed, "structure"), 0);
    let sections = generate_structure(&cfg.structure, &seeds.structure.song, &mut rng)
        .map_err(|e| e.in_module("structuregen", 0))?;

    // Chords.
    let chord_stats = build_seed_stats(&seeds.chords.song);
    let distinctive = detect_distinctive(&chord_stats, general, cfg.distinctive_threshold);
    let chain = build_chain(&chord_stats, general, cfg.alpha_chords, &distinctive, DEFAULT_BOOST);
    let chord_seed = derive_seed(cfg.rng_seed, "chords");
    // Aligned sections open on their seed section's first chord.
    let chord_song = &seeds.chords.song;
    let chord_bars = chord_song.section_bars();
    let openers: Vec<Option<ChordSymbol>> = seed_references(&sections, chord_song.sections())
        .into_iter()
        .map(|r| r.map(|j| chord_song.chords()[chord_bars[j].start]))
        .collect();
    let mut chords_by_section: Vec<Vec<ChordSymbol>> = Vec::with_capacity(sections.len());
    for (i, s) in sections.iter().enumerate() {
        let c = repeat_or(&sections, &chords_by_section, i, || {
            Ok(generate_chords(s.length as usize, &chain, openers[i], &mut stream(chord_seed, i as u64)))
        })?;
        chords_by_section.push(c);
    }
    let chords: Vec<ChordSymbol> = chords_by_section.concat();

    // Melody.
    let melody_seed = &seeds.melody.song;
    let melody_stats = build_seed_stats(melody_seed);
    if melody_seed.melody().iter().all(|n| n.pitch.is_rest()) {
        return Err(Error::EmptySeedMelody.in_module("melodygen", 0));
    }
    let style = MelodyStyle::new(&melody_stats, general, cfg.alpha_melody, melody_seed.tempo());
    let plans = section_plans(&sections, &chords, melody_seed);
    let melody_run = derive_seed(cfg.rng_seed, "melody");
    let mut melody_sections: Vec<Vec<Note>> = Vec::with_capacity(sections.len());
    let mut melody_scores = Vec::with_capacity(sections.len());
    for i in 0..sections.len() {
        let mut score = None;
        let notes = repeat_or(&sections, &melody_sections, i, || {
            let c = generate_section(&style, &plans[i], &cfg.melody, section_seed(melody_run, i))
                .map_err(|e| e.in_module("melodygen", i))?;
            score = Some(c.score);
            Ok(c.notes)
        })?;
        melody_scores.push(score.unwrap_or_else(|| melody_scores[exact_repeat_of(&sections, i).unwrap()]));
        melody_sections.push(notes);
    }

    // Bass.
    let bass_seed = &seeds.bass.song;
    let bass_stats = build_seed_stats(bass_seed);
    let bass_refs = seed_references(&sections, bass_seed.sections());
    let seed_bars = bass_seed.section_bars();
    let seed_bass = bass_seed.bass_sections();
    let mut bass_sections: Vec<Vec<Note>> = Vec::with_capacity(sections.len());
    for i in 0..sections.len() {
        let notes = repeat_or(&sections, &bass_sections, i, || {
            let style = match bass_refs[i] {
                Some(j) => extract_bass_style(
                    &bass_seed.bass()[seed_bass[j].clone()],
                    &bass_seed.chords()[seed_bars[j].clone()],
                    Some(&bass_stats),
                )
                .or_else(|_| song_bass_style(bass_seed, &bass_stats)),
                None => song_bass_style(bass_seed, &bass_stats),
            }
            .map_err(|e| e.in_module("bassgen", i))?;
            generate_bass(&chords_by_section[i], &style).map_err(|e| e.in_module("bassgen", i))
        })?;
        bass_sections.push(notes);
    }

    let song = Song::new(
        sections,
        melody_sections.concat(),
        chords,
        bass_sections.concat(),
        melody_seed.tempo(),
        melody_seed.mode(),
    )
    .map_err(|e| e.in_module("pipeline", 0))?;
    Ok(Generated {
        song,
        provenance: Provenance {
            structure: input(&seeds.structure, &structure_stats),
            chords: input(&seeds.chords, &chord_stats),
            melody: input(&seeds.melody, &melody_stats),
            bass: input(&seeds.bass, &bass_stats),
        },
        melody_scores,
    })
}
