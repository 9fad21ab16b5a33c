use seedsong::bundled::{general_stats, seed_songs};
use seedsong::corpusstats::build_seed_stats;
use seedsong::pipeline::*;
use seedsong::songmodel::{export_midi, render_text_score};
use seedsong::structuregen::StructureMode;

#[test]
fn same_seed_same_song() {
    let general = general_stats().unwrap();
    let (name, song) = seed_songs().unwrap().remove(0);
    let seeds = PipelineSeeds::single(NamedSeed::new(name, song));
    let cfg = GenerationConfig { structure: StructureMode::Random, rng_seed: 5, ..Default::default() };
    let a = run_generate(&seeds, &general, &cfg).unwrap();
    let b = run_generate(&seeds, &general, &cfg).unwrap();
    assert_eq!(render_text_score(&a.song), render_text_score(&b.song));
    assert_eq!(export_midi(&a.song), export_midi(&b.song));
    assert_eq!(a.melody_scores, b.melody_scores);
    let c = run_generate(&seeds, &general, &GenerationConfig { rng_seed: 6, ..cfg }).unwrap();
    assert_ne!(render_text_score(&a.song), render_text_score(&c.song));
}

#[test]
fn hybrid_seeds_are_tracked() {
    let general = general_stats().unwrap();
    let songs = seed_songs().unwrap();
    let named = |i: usize| NamedSeed::new(songs[i].0.clone(), songs[i].1.clone());
    let seeds = PipelineSeeds { structure: named(0), chords: named(1), melody: named(2), bass: named(1) };
    let got = run_generate(&seeds, &general, &GenerationConfig::default()).unwrap();
    let p = &got.provenance;
    let hash = |i: usize| stats_hash(&build_seed_stats(&songs[i].1));
    assert_eq!((p.structure.label.as_str(), p.structure.stats_hash), (songs[0].0.as_str(), hash(0)));
    assert_eq!((p.chords.label.as_str(), p.chords.stats_hash), (songs[1].0.as_str(), hash(1)));
    assert_eq!((p.melody.label.as_str(), p.melody.stats_hash), (songs[2].0.as_str(), hash(2)));
    assert_eq!((p.bass.label.as_str(), p.bass.stats_hash), (songs[1].0.as_str(), hash(1)));
    assert_ne!(hash(0), hash(1));

    // Copy mode takes the structure seed's layout, tempo and mode follow the melody seed.
    assert_eq!(got.song.sections(), songs[0].1.sections());
    assert_eq!(got.song.tempo(), songs[2].1.tempo());
    assert_eq!(got.song.mode(), songs[2].1.mode());
    assert_eq!(got.melody_scores.len(), got.song.sections().len());
}
