mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seedsong::bassgen::*;
use seedsong::songmodel::{parse_text_score, ChordSymbol};
use ChordSymbol::*;

fn bass_of(text: &str) -> seedsong::songmodel::Song {
    parse_text_score(text).unwrap()
}

#[test]
fn repeated_pattern_and_root_rows() {
    let s = bass_of(
        "#SECTION A 2 var=no\n1_______________ | I | 1___5___1___5___\n\
         1_______________ | IV | 4___1___4___1___\n",
    );
    let style = extract_bass_style(s.bass(), s.chords(), None).unwrap();
    assert_eq!(style.most_frequent.onsets, vec![0, 4, 8, 12]);
    // Root then fifth alternately: from the root, the next note is a fifth.
    assert_eq!(style.matrices.ctt[0][0], [0.0, 0.0, 1.0, 0.0]);
    assert_eq!(style.matrices.ctt[4][2], [1.0, 0.0, 0.0, 0.0]);
    assert_eq!(style.matrices.ctf[0], [1.0, 0.0, 0.0, 0.0]);
    assert_eq!(style.matrices.ctf[4], [0.0, 0.0, 1.0, 0.0]);

    let roots = bass_of("#SECTION A 1 var=no\n1_______________ | V | 5___5___5___5___\n");
    let style = extract_bass_style(roots.bass(), roots.chords(), None).unwrap();
    for on in [0, 4, 8, 12] {
        assert_eq!(style.matrices.ctf[on], [1.0, 0.0, 0.0, 0.0]);
    }
}

#[test]
fn silent_bass_is_an_error() {
    let s = bass_of("#SECTION A 1 var=no\n1_______________ | I | ................\n");
    assert!(matches!(extract_bass_style(s.bass(), s.chords(), None), Err(seedsong::Error::EmptyBass)));
}

#[test]
fn viterbi_beats_random_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let k = rng.gen_range(1..=24);
        let onsets = common::random_onsets(&mut rng, k);
        let m = common::random_matrices(&mut rng);
        let best = viterbi_bass(&onsets, &m);
        let best_ll = sequence_log_likelihood(&onsets, &best, &m);
        for _ in 0..1000 {
            let cats: Vec<Category> = (0..k).map(|_| Category::from_index(rng.gen_range(0..4))).collect();
            assert!(sequence_log_likelihood(&onsets, &cats, &m) <= best_ll);
        }
    }
}

#[test]
fn viterbi_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let k = rng.gen_range(1..=6);
        let onsets = common::random_onsets(&mut rng, k);
        let m = common::random_matrices(&mut rng);
        assert_eq!(viterbi_bass(&onsets, &m), common::viterbi_oracle(&onsets, &m), "{onsets:?}");
    }
}

#[test]
fn generated_bass_follows_chords() {
    let s = bass_of(
        "#SECTION A 2 var=no\n1_______________ | I | 1___5___1___5___\n\
         1_______________ | IV | 4___1___4___1___\n",
    );
    let style = extract_bass_style(s.bass(), s.chords(), None).unwrap();
    let notes = generate_bass(&[V, Vi, Ii, V], &style).unwrap();
    let chords = [V, Vi, Ii, V];
    let mut pos = 0;
    for n in &notes {
        if pos % 16 == 0 {
            let bar = pos as usize / 16;
            let root = realize(Category::Root, chords[bar], chords.get(bar + 1).copied());
            assert_eq!(n.pitch.as_degree(), Some(root));
        }
        pos += n.duration.get() as u32;
    }
    assert_eq!(notes.iter().map(|n| n.duration.get() as u32).sum::<u32>(), 64);
}
