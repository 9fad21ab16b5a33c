//! Import and export between [`Song`] and Standard MIDI Files.
//!
//! Export writes a format-1 file with three tracks (melody, block chords,
//! bass) at 480 ticks per quarter. Import needs an [`AnnotationSidecar`]
//! naming the tracks, the key and the section structure, since none of that
//! can be recovered from MIDI alone.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::songmodel::smf::{self, Event, EventKind, TrackOut};
use crate::songmodel::types::{
    normalize_track, section_bars, validate_sections, ChordSymbol, Degree, Mode, Note, Pitch,
    SectionSpec, Song, BAR,
};

pub const TICKS_PER_QUARTER: u16 = 480;
const TICKS_PER_SIXTEENTH: u64 = TICKS_PER_QUARTER as u64 / 4;

/// MIDI key of degree 1 for each track.
pub const MELODY_BASE: u8 = 60;
pub const CHORD_BASE: u8 = 48;
pub const BASS_BASE: u8 = 36;

const MAJOR_SCALE: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
/// Pitch class to scale step; chromatic classes snap down to the lower neighbour.
const SNAP_STEP: [u8; 12] = [0, 0, 1, 1, 2, 3, 3, 4, 4, 5, 5, 6];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackMap {
    pub melody: usize,
    pub chord: usize,
    pub bass: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarSection {
    pub name: String,
    pub length: u32,
    pub variation: bool,
}

/// Hand annotation accompanying a MIDI file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSidecar {
    /// Tonic of the song as written, e.g. `D`, `Bb`, `F#`.
    pub key: String,
    pub mode: Mode,
    /// Overrides the file's tempo event when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tempo: Option<u32>,
    pub tracks: TrackMap,
    pub sections: Vec<SidecarSection>,
    /// Per-bar chord symbols. When empty, chords are inferred from the chord track.
    #[serde(default)]
    pub chords: Vec<String>,
}

impl AnnotationSidecar {
    /// Sidecar describing a file produced by [`export_midi`].
    pub fn for_song(song: &Song) -> Self {
        // Export writes degrees on the C major scale, which is A minor's.
        let key = match song.mode() {
            Mode::Major => "C",
            Mode::Minor => "A",
        };
        AnnotationSidecar {
            key: key.into(),
            mode: song.mode(),
            tempo: None,
            tracks: TrackMap {
                melody: 0,
                chord: 1,
                bass: 2,
            },
            sections: song
                .sections()
                .iter()
                .map(|s| SidecarSection {
                    name: s.name.clone(),
                    length: s.length,
                    variation: s.is_variation,
                })
                .collect(),
            chords: song.chords().iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Sidecar(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sidecar serializes")
    }

    fn section_specs(&self) -> Vec<SectionSpec> {
        self.sections
            .iter()
            .map(|s| SectionSpec::new(s.name.clone(), s.length, s.variation))
            .collect()
    }
}

/// Pitch class of a key name.
pub fn key_pitch_class(key: &str) -> Result<u8> {
    let mut chars = key.trim().chars();
    let base = match chars.next().map(|c| c.to_ascii_uppercase()) {
        Some('C') => 0,
        Some('D') => 2,
        Some('E') => 4,
        Some('F') => 5,
        Some('G') => 7,
        Some('A') => 9,
        Some('B') => 11,
        _ => return Err(Error::Sidecar(format!("bad key `{key}`"))),
    };
    let acc: i32 = match chars.as_str() {
        "" => 0,
        "#" | "♯" => 1,
        "b" | "♭" => -1,
        _ => return Err(Error::Sidecar(format!("bad key `{key}`"))),
    };
    Ok((base + acc).rem_euclid(12) as u8)
}

/// Semitone shift in -6..=5 that moves `key`/`mode` onto C major / A minor.
pub fn transposition(key: &str, mode: Mode) -> Result<i32> {
    let pc = key_pitch_class(key)? as i32;
    let major_tonic = match mode {
        Mode::Major => pc,
        Mode::Minor => (pc + 3) % 12,
    };
    let shift = (-major_tonic).rem_euclid(12);
    Ok(if shift > 5 { shift - 12 } else { shift })
}

pub fn degree_to_midi(base: u8, degree: Degree) -> u8 {
    let d = degree.get() - 1;
    base + 12 * (d / 7) + MAJOR_SCALE[(d % 7) as usize]
}

/// Diatonic step count from MIDI key 0 (C-1), after snapping to C major.
fn diatonic_index(key: i32) -> i32 {
    key.div_euclid(12) * 7 + SNAP_STEP[key.rem_euclid(12) as usize] as i32
}

fn note_events(notes: &[Note], base: u8, channel: u8, velocity: u8, out: &mut Vec<(u64, u8, EventKind)>) {
    let mut tick = 0u64;
    for n in notes {
        let len = n.len() as u64 * TICKS_PER_SIXTEENTH;
        if let Pitch::Degree(d) = n.pitch {
            let key = degree_to_midi(base, d);
            out.push((tick, 1, EventKind::NoteOn { channel, key, velocity }));
            out.push((tick + len, 0, EventKind::NoteOff { channel, key }));
        }
        tick += len;
    }
}

fn finish_events(mut evs: Vec<(u64, u8, EventKind)>) -> Vec<Event> {
    // Offs sort before ons at the same tick so repeated keys re-trigger cleanly.
    evs.sort_by_key(|&(tick, order, _)| (tick, order));
    evs.into_iter().map(|(tick, _, kind)| Event { tick, kind }).collect()
}

pub fn export_midi(song: &Song) -> Vec<u8> {
    let us_per_quarter = ((60_000_000.0 / song.tempo() as f64).round() as u32).min(0xff_ffff);

    let mut melody = vec![
        (0, 0, EventKind::Tempo(us_per_quarter)),
        (0, 0, EventKind::TimeSignature { numerator: 4, denominator_pow2: 2 }),
    ];
    note_events(song.melody(), MELODY_BASE, 0, 96, &mut melody);

    let mut chords = Vec::new();
    let bar_ticks = BAR as u64 * TICKS_PER_SIXTEENTH;
    for (i, c) in song.chords().iter().enumerate() {
        let start = i as u64 * bar_ticks;
        let root = c.root();
        for offset in [0u8, 2, 4] {
            let key = degree_to_midi(CHORD_BASE, Degree::raw(root + offset));
            chords.push((start, 1, EventKind::NoteOn { channel: 1, key, velocity: 72 }));
            chords.push((start + bar_ticks, 0, EventKind::NoteOff { channel: 1, key }));
        }
    }

    let mut bass = Vec::new();
    note_events(song.bass(), BASS_BASE, 2, 88, &mut bass);

    smf::write(
        TICKS_PER_QUARTER,
        &[
            TrackOut { name: "melody", events: finish_events(melody) },
            TrackOut { name: "chords", events: finish_events(chords) },
            TrackOut { name: "bass", events: finish_events(bass) },
        ],
    )
}

#[derive(Clone, Copy, Debug)]
struct RawNote {
    start: u64,
    end: u64,
    key: u8,
}

fn collect_notes(events: &[Event]) -> Vec<RawNote> {
    let mut sounding: HashMap<(u8, u8), u64> = HashMap::new();
    let mut notes = Vec::new();
    let mut last_tick = 0;
    for e in events {
        last_tick = e.tick;
        match e.kind {
            EventKind::NoteOn { channel, key, .. } => {
                if let Some(start) = sounding.insert((channel, key), e.tick) {
                    notes.push(RawNote { start, end: e.tick, key });
                }
            }
            EventKind::NoteOff { channel, key } => {
                if let Some(start) = sounding.remove(&(channel, key)) {
                    notes.push(RawNote { start, end: e.tick, key });
                }
            }
            _ => {}
        }
    }
    let mut hanging: Vec<_> = sounding.into_iter().collect();
    hanging.sort();
    for ((_, key), start) in hanging {
        notes.push(RawNote { start, end: last_tick, key });
    }
    notes
}

/// Snaps a tick to the nearest sixteenth (halves round up).
fn quantize(tick: u64, tpq: u64) -> u64 {
    (tick * 4 + tpq / 2) / tpq
}

/// Quantized, transposed, monophonic (start, end, key) triples.
fn monophonic(
    notes: &[RawNote],
    tpq: u64,
    shift: i32,
    total: u64,
    prefer_high: bool,
) -> Vec<(u64, u64, i32)> {
    let mut q: Vec<(u64, u64, i32)> = notes
        .iter()
        .map(|n| (quantize(n.start, tpq), quantize(n.end, tpq).min(total), n.key as i32 + shift))
        .filter(|&(s, e, _)| e > s)
        .collect();
    q.sort_by(|a, b| {
        a.0.cmp(&b.0).then(if prefer_high { b.2.cmp(&a.2) } else { a.2.cmp(&b.2) })
    });
    q.dedup_by_key(|n| n.0);
    let mut out = Vec::with_capacity(q.len());
    for i in 0..q.len() {
        let (s, mut e, k) = q[i];
        if let Some(next) = q.get(i + 1) {
            e = e.min(next.0);
        }
        if e > s {
            out.push((s, e, k));
        }
    }
    out
}

fn fold_track(
    name: &str,
    notes: &[(u64, u64, i32)],
    base: u8,
    total: u64,
    sections: &[SectionSpec],
) -> Result<Vec<Note>> {
    let base_index = diatonic_index(base as i32);
    let raw: Vec<i32> = notes.iter().map(|n| diatonic_index(n.2) - base_index + 1).collect();

    let mut shift = 0;
    if !raw.is_empty() {
        let mut sorted = raw.clone();
        sorted.sort_unstable();
        let median = sorted[sorted.len() / 2];
        let out_of_range = |k: i32| raw.iter().filter(|&&d| !(1..=15).contains(&(d + 7 * k))).count();
        shift = (-12..=12)
            .filter(|k| (1..=15).contains(&(median + 7 * k)))
            .min_by_key(|&k| (out_of_range(k), k.abs(), k))
            .ok_or_else(|| Error::invariant(format!("{name}: cannot fold register")))?;
    }

    let mut events: Vec<(Pitch, u32)> = Vec::with_capacity(notes.len() * 2);
    let mut pos = 0u64;
    for (n, d) in notes.iter().zip(&raw) {
        let degree = d + 7 * shift;
        if !(1..=15).contains(&degree) {
            return Err(Error::invariant(format!(
                "{name}: MIDI key {} lies outside the two-octave range after transposition",
                n.2
            )));
        }
        if n.0 > pos {
            events.push((Pitch::Rest, (n.0 - pos) as u32));
        }
        events.push((Pitch::Degree(Degree::raw(degree as u8)), (n.1 - n.0) as u32));
        pos = n.1;
    }
    if pos < total {
        events.push((Pitch::Rest, (total - pos) as u32));
    }
    normalize_track(&events, sections)
}

fn infer_chords(notes: &[RawNote], tpq: u64, shift: i32, bars: usize) -> Vec<ChordSymbol> {
    let mut weights = vec![[0u64; 12]; bars];
    for n in notes {
        let (s, e) = (quantize(n.start, tpq), quantize(n.end, tpq));
        let pc = (n.key as i32 + shift).rem_euclid(12) as usize;
        for t in s..e {
            let bar = (t / BAR as u64) as usize;
            if bar < bars {
                weights[bar][pc] += 1;
            }
        }
    }
    let mut out = Vec::with_capacity(bars);
    for w in weights {
        let total: u64 = w.iter().sum();
        let chord = if total == 0 {
            out.last().copied().unwrap_or(ChordSymbol::I)
        } else {
            let score = |c: ChordSymbol| -> u64 {
                c.steps().iter().map(|&s| w[MAJOR_SCALE[s as usize] as usize]).sum()
            };
            let mut best = ChordSymbol::I;
            for c in ChordSymbol::ALL {
                if score(c) > score(best) {
                    best = c;
                }
            }
            best
        };
        out.push(chord);
    }
    out
}

pub fn import_midi(bytes: &[u8], sidecar: &AnnotationSidecar) -> Result<Song> {
    let file = smf::read(bytes)?;
    let tpq = file.ticks_per_quarter as u64;

    let mut tempo_us = None;
    for ev in file.tracks.iter().flatten() {
        match ev.kind {
            EventKind::TimeSignature { numerator, denominator_pow2 } => {
                if numerator != 4 || denominator_pow2 != 2 {
                    return Err(Error::Midi(format!(
                        "time signature {numerator}/{} is not 4/4",
                        1u32 << denominator_pow2
                    )));
                }
            }
            EventKind::Tempo(us) if tempo_us.is_none() => tempo_us = Some(us),
            _ => {}
        }
    }
    let tempo = match (sidecar.tempo, tempo_us) {
        (Some(t), _) => t,
        (None, Some(us)) if us > 0 => (60_000_000.0 / us as f64).round() as u32,
        _ => 120,
    };

    let sections = sidecar.section_specs();
    validate_sections(&sections)?;
    let bars = section_bars(&sections).last().map_or(0, |r| r.end);
    let total = bars as u64 * BAR as u64;
    let track = |idx: usize, role: &str| {
        file.tracks
            .get(idx)
            .ok_or_else(|| Error::Sidecar(format!("{role} track {idx} missing from file")))
    };
    let melody_track = track(sidecar.tracks.melody, "melody")?;
    let chord_track = track(sidecar.tracks.chord, "chord")?;
    let bass_track = track(sidecar.tracks.bass, "bass")?;

    let shift = transposition(&sidecar.key, sidecar.mode)?;

    let melody_notes = monophonic(&collect_notes(melody_track), tpq, shift, total, true);
    let bass_notes = monophonic(&collect_notes(bass_track), tpq, shift, total, false);
    let melody = fold_track("melody", &melody_notes, MELODY_BASE, total, &sections)?;
    let bass = fold_track("bass", &bass_notes, BASS_BASE, total, &sections)?;

    let chords = if sidecar.chords.is_empty() {
        infer_chords(&collect_notes(chord_track), tpq, shift, bars)
    } else {
        if sidecar.chords.len() != bars {
            return Err(Error::Sidecar(format!(
                "{} chords for {bars} bars",
                sidecar.chords.len()
            )));
        }
        sidecar
            .chords
            .iter()
            .map(|c| c.parse())
            .collect::<Result<Vec<_>>>()?
    };

    Song::new(sections, melody, chords, bass, tempo, sidecar.mode)
}
