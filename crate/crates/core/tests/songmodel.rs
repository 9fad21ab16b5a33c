mod common;

use midly::{MetaMessage, MidiMessage, Smf, Timing, TrackEventKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seedsong::songmodel::*;
use seedsong::Error;

const SCALE: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];

fn key_of(base: u8, degree: u8) -> u8 {
    let d = degree - 1;
    base + 12 * (d / 7) + SCALE[(d % 7) as usize]
}

/// (tick, key) of every note-on in a track, read with midly.
fn note_ons(track: &[midly::TrackEvent]) -> Vec<(u64, u8)> {
    let mut tick = 0u64;
    let mut out = Vec::new();
    for e in track {
        tick += e.delta.as_int() as u64;
        if let TrackEventKind::Midi { message: MidiMessage::NoteOn { key, vel }, .. } = e.kind {
            if vel.as_int() > 0 {
                out.push((tick, key.as_int()));
            }
        }
    }
    out
}

fn expected_ons(notes: &[Note], base: u8) -> Vec<(u64, u8)> {
    let mut pos = 0u64;
    let mut out = Vec::new();
    for n in notes {
        if let Some(d) = n.pitch.as_degree() {
            out.push((pos * 120, key_of(base, d)));
        }
        pos += n.duration.get() as u64;
    }
    out
}

#[test]
fn midly_reads_export() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let song = common::random_song(&mut rng);
        let bytes = export_midi(&song);
        let smf = Smf::parse(&bytes).unwrap();
        assert_eq!(smf.header.timing, Timing::Metrical(480.into()));
        assert_eq!(smf.tracks.len(), 3);
        let tempo = smf.tracks[0].iter().find_map(|e| match e.kind {
            TrackEventKind::Meta(MetaMessage::Tempo(t)) => Some(t.as_int()),
            _ => None,
        });
        assert_eq!(tempo, Some((60_000_000.0 / song.tempo() as f64).round() as u32));
        assert_eq!(note_ons(&smf.tracks[0]), expected_ons(song.melody(), 60));
        assert_eq!(note_ons(&smf.tracks[2]), expected_ons(song.bass(), 36));
        // Three chord tones per bar.
        let chords = note_ons(&smf.tracks[1]);
        assert_eq!(chords.len(), 3 * song.total_bars());
        for (i, c) in song.chords().iter().enumerate() {
            let mut keys: Vec<u8> = chords.iter().filter(|x| x.0 == i as u64 * 1920).map(|x| x.1).collect();
            keys.sort();
            let r = c.root();
            assert_eq!(keys, vec![key_of(48, r), key_of(48, r + 2), key_of(48, r + 4)]);
        }
    }
}

#[test]
fn transposed_import() {
    // A melody in D major written a whole tone up comes back on C degrees.
    let song = parse_text_score("#SECTION A 1 var=no\n1___3___5___8___ | I | 1_______________\n").unwrap();
    let bytes = export_midi(&song);
    let mut smf = Smf::parse(&bytes).unwrap();
    for track in smf.tracks.iter_mut() {
        for e in track.iter_mut() {
            if let TrackEventKind::Midi { message, .. } = &mut e.kind {
                match message {
                    MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => *key = (key.as_int() + 2).into(),
                    _ => {}
                }
            }
        }
    }
    let mut moved = Vec::new();
    smf.write_std(&mut moved).unwrap();
    let mut sidecar = AnnotationSidecar::for_song(&song);
    sidecar.key = "D".into();
    assert_eq!(import_midi(&moved, &sidecar).unwrap(), song);
}

#[test]
fn syntax_errors_carry_position() {
    let err = parse_text_score("#SECTION A 1 var=no\n1___3___5___3__ | I | 1_______________\n").unwrap_err();
    assert!(matches!(err, Error::Syntax { line: 2, .. }), "{err}");
    let err = parse_text_score("#SECTION A 1 var=no\n1___3___5___3___ | IX | 1_______________\n").unwrap_err();
    assert!(matches!(err, Error::Syntax { line: 2, .. }), "{err}");
}

#[test]
fn invariants_rejected() {
    let sections = vec![SectionSpec::new("A", 1, false)];
    let whole = |p: u8| vec![Note::new(Pitch::degree(p).unwrap(), Duration::new(16).unwrap(), 0)];
    assert!(Song::new(sections.clone(), whole(1), vec![ChordSymbol::I], whole(1), 90, Mode::Major).is_ok());
    let short = vec![Note::new(Pitch::degree(1).unwrap(), Duration::new(8).unwrap(), 0)];
    assert!(Song::new(sections.clone(), short, vec![ChordSymbol::I], whole(1), 90, Mode::Major)
        .unwrap_err()
        .is_invariant_violation());
    assert!(Song::new(sections.clone(), whole(1), vec![], whole(1), 90, Mode::Major).is_err());
    assert!(Song::new(sections, whole(1), vec![ChordSymbol::I], whole(1), 0, Mode::Major).is_err());
    assert!(Pitch::degree(16).is_err());
    assert!(Duration::new(17).is_err());
    assert!(Duration::new(0).is_err());
}

proptest! {
    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let song = common::random_song(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = render_text_score(&song);
        prop_assert_eq!(parse_text_score(&text).unwrap(), song.clone());
        prop_assert_eq!(render_text_score(&parse_text_score(&text).unwrap()), text);
    }

    #[test]
    fn midi_round_trip(seed in any::<u64>()) {
        let song = common::random_song(&mut ChaCha8Rng::seed_from_u64(seed));
        let back = import_midi(&export_midi(&song), &AnnotationSidecar::for_song(&song)).unwrap();
        prop_assert_eq!(back, song);
    }

    #[test]
    fn sidecar_json_round_trip(seed in any::<u64>()) {
        let song = common::random_song(&mut ChaCha8Rng::seed_from_u64(seed));
        let s = AnnotationSidecar::for_song(&song);
        prop_assert_eq!(AnnotationSidecar::from_json(&s.to_json()).unwrap(), s);
    }
}
