use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sixteenths per 4/4 bar.
pub const BAR: u32 = 16;
pub const MAX_DEGREE: u8 = 15;
pub const MAX_DURATION: u8 = 16;

/// Scale degree over two octaves starting on C (1 = C, 8 = C an octave up, 15 = C two octaves up).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Degree(u8);

impl Degree {
    pub fn new(value: u8) -> Result<Self> {
        if (1..=MAX_DEGREE).contains(&value) {
            Ok(Degree(value))
        } else {
            Err(Error::invariant(format!("pitch degree {value} outside 1..=15")))
        }
    }

    pub(crate) const fn raw(value: u8) -> Self {
        debug_assert!(value >= 1 && value <= MAX_DEGREE);
        Degree(value)
    }

    pub const fn get(self) -> u8 {
        self.0
    }

    /// Position within the 7-step diatonic scale, 0 = C.
    pub const fn step(self) -> u8 {
        (self.0 - 1) % 7
    }

    pub fn all() -> impl Iterator<Item = Degree> {
        (1..=MAX_DEGREE).map(Degree)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pitch {
    Rest,
    Degree(Degree),
}

impl Pitch {
    pub fn degree(value: u8) -> Result<Self> {
        Degree::new(value).map(Pitch::Degree)
    }

    pub fn is_rest(self) -> bool {
        matches!(self, Pitch::Rest)
    }

    pub fn as_degree(self) -> Option<u8> {
        match self {
            Pitch::Rest => None,
            Pitch::Degree(d) => Some(d.get()),
        }
    }
}

/// Length in sixteenths, 1..=16.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Duration(u8);

impl Duration {
    pub fn new(sixteenths: u8) -> Result<Self> {
        if (1..=MAX_DURATION).contains(&sixteenths) {
            Ok(Duration(sixteenths))
        } else {
            Err(Error::invariant(format!("duration {sixteenths} outside 1..=16")))
        }
    }

    pub(crate) const fn raw(sixteenths: u8) -> Self {
        debug_assert!(sixteenths >= 1 && sixteenths <= MAX_DURATION);
        Duration(sixteenths)
    }

    pub const fn get(self) -> u8 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Note {
    pub pitch: Pitch,
    pub duration: Duration,
    /// Start position within its bar, 0..=15.
    pub onset: u8,
}

impl Note {
    pub fn new(pitch: Pitch, duration: Duration, onset: u8) -> Self {
        Note {
            pitch,
            duration,
            onset,
        }
    }

    pub fn len(&self) -> u32 {
        self.duration.get() as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChordSymbol {
    I,
    Ii,
    Iii,
    IV,
    V,
    Vi,
    ViiDim,
}

impl ChordSymbol {
    pub const ALL: [ChordSymbol; 7] = [
        ChordSymbol::I,
        ChordSymbol::Ii,
        ChordSymbol::Iii,
        ChordSymbol::IV,
        ChordSymbol::V,
        ChordSymbol::Vi,
        ChordSymbol::ViiDim,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> ChordSymbol {
        Self::ALL[i]
    }

    /// Root as a degree in the lowest octave (1..=7).
    pub fn root(self) -> u8 {
        self as u8 + 1
    }

    /// Scale steps (0 = C) of root, third and fifth.
    pub fn steps(self) -> [u8; 3] {
        let r = self as u8;
        [r, (r + 2) % 7, (r + 4) % 7]
    }

    pub fn contains(self, degree: Degree) -> bool {
        self.steps().contains(&degree.step())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChordSymbol::I => "I",
            ChordSymbol::Ii => "ii",
            ChordSymbol::Iii => "iii",
            ChordSymbol::IV => "IV",
            ChordSymbol::V => "V",
            ChordSymbol::Vi => "vi",
            ChordSymbol::ViiDim => "viio",
        }
    }
}

impl fmt::Display for ChordSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChordSymbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I" => ChordSymbol::I,
            "ii" => ChordSymbol::Ii,
            "iii" => ChordSymbol::Iii,
            "IV" => ChordSymbol::IV,
            "V" => ChordSymbol::V,
            "vi" => ChordSymbol::Vi,
            "viio" | "vii°" | "vii" => ChordSymbol::ViiDim,
            other => return Err(Error::invariant(format!("unknown chord `{other}`"))),
        })
    }
}

/// Join a chord sequence into its map key form, e.g. `V-I`.
pub fn chord_key(chords: &[ChordSymbol]) -> String {
    chords
        .iter()
        .map(|c| c.as_str())
        .collect::<Vec<_>>()
        .join("-")
}

pub fn parse_chord_key(key: &str) -> Result<Vec<ChordSymbol>> {
    key.split('-').map(str::parse).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectionSpec {
    pub name: String,
    pub length: u32,
    pub is_variation: bool,
}

impl SectionSpec {
    pub fn new(name: impl Into<String>, length: u32, is_variation: bool) -> Self {
        SectionSpec {
            name: name.into(),
            length,
            is_variation,
        }
    }
}

pub fn validate_sections(sections: &[SectionSpec]) -> Result<()> {
    for (i, s) in sections.iter().enumerate() {
        if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(Error::invariant(format!("section {i}: bad name `{}`", s.name)));
        }
        if s.length == 0 {
            return Err(Error::invariant(format!("section {i}: zero length")));
        }
        if s.is_variation && !sections[..i].iter().any(|p| p.name == s.name) {
            return Err(Error::invariant(format!(
                "section {i}: variation of `{}` without an earlier section of that name",
                s.name
            )));
        }
    }
    Ok(())
}

/// First bar and bar count of every section.
pub fn section_bars(sections: &[SectionSpec]) -> Vec<Range<usize>> {
    let mut start = 0usize;
    sections
        .iter()
        .map(|s| {
            let r = start..start + s.length as usize;
            start = r.end;
            r
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Major,
    Minor,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Major => "major",
            Mode::Minor => "minor",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "major" => Ok(Mode::Major),
            "minor" => Ok(Mode::Minor),
            other => Err(Error::invariant(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Song {
    sections: Vec<SectionSpec>,
    melody: Vec<Note>,
    chords: Vec<ChordSymbol>,
    bass: Vec<Note>,
    tempo: u32,
    mode: Mode,
}

impl Song {
    /// Builds a song, checking every invariant. Tracks must already be in
    /// canonical form (see [`normalize_track`]).
    pub fn new(
        sections: Vec<SectionSpec>,
        melody: Vec<Note>,
        chords: Vec<ChordSymbol>,
        bass: Vec<Note>,
        tempo: u32,
        mode: Mode,
    ) -> Result<Self> {
        validate_sections(&sections)?;
        let bars: u32 = sections.iter().map(|s| s.length).sum();
        if chords.len() != bars as usize {
            return Err(Error::invariant(format!(
                "{} chords for {bars} bars",
                chords.len()
            )));
        }
        if tempo == 0 {
            return Err(Error::invariant("tempo must be positive"));
        }
        validate_track("melody", &melody, &sections)?;
        validate_track("bass", &bass, &sections)?;
        Ok(Song {
            sections,
            melody,
            chords,
            bass,
            tempo,
            mode,
        })
    }

    pub fn sections(&self) -> &[SectionSpec] {
        &self.sections
    }

    pub fn melody(&self) -> &[Note] {
        &self.melody
    }

    pub fn chords(&self) -> &[ChordSymbol] {
        &self.chords
    }

    pub fn bass(&self) -> &[Note] {
        &self.bass
    }

    pub fn tempo(&self) -> u32 {
        self.tempo
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn total_bars(&self) -> usize {
        self.chords.len()
    }

    pub fn section_bars(&self) -> Vec<Range<usize>> {
        section_bars(&self.sections)
    }

    /// Index ranges into `melody` for each section.
    pub fn melody_sections(&self) -> Vec<Range<usize>> {
        track_sections(&self.melody, &self.sections)
    }

    pub fn bass_sections(&self) -> Vec<Range<usize>> {
        track_sections(&self.bass, &self.sections)
    }

    pub fn section_chords(&self, section: usize) -> &[ChordSymbol] {
        let r = &self.section_bars()[section];
        &self.chords[r.clone()]
    }

    pub fn with_tempo(mut self, tempo: u32) -> Result<Self> {
        if tempo == 0 {
            return Err(Error::invariant("tempo must be positive"));
        }
        self.tempo = tempo;
        Ok(self)
    }
}

/// Splits a canonical track into per-section index ranges.
pub fn track_sections(notes: &[Note], sections: &[SectionSpec]) -> Vec<Range<usize>> {
    let mut out = Vec::with_capacity(sections.len());
    let mut idx = 0usize;
    for s in sections {
        let start = idx;
        let mut filled = 0u32;
        let want = s.length * BAR;
        while filled < want && idx < notes.len() {
            filled += notes[idx].len();
            idx += 1;
        }
        out.push(start..idx);
    }
    out
}

fn validate_track(name: &str, notes: &[Note], sections: &[SectionSpec]) -> Result<()> {
    let bars = section_bars(sections);
    let mut pos = 0u32;
    let mut section = 0usize;
    let mut prev: Option<&Note> = None;
    for (i, n) in notes.iter().enumerate() {
        while section < bars.len() && pos >= bars[section].end as u32 * BAR {
            section += 1;
        }
        if section >= bars.len() {
            return Err(Error::invariant(format!("{name}: note {i} past the end of the song")));
        }
        if n.onset as u32 != pos % BAR {
            return Err(Error::invariant(format!(
                "{name}: note {i} onset {} does not match position {}",
                n.onset,
                pos % BAR
            )));
        }
        let end = pos + n.len();
        if end > bars[section].end as u32 * BAR {
            return Err(Error::invariant(format!(
                "{name}: note {i} crosses the end of section {section}"
            )));
        }
        if n.pitch.is_rest() {
            if n.onset as u32 + n.len() > BAR {
                return Err(Error::invariant(format!("{name}: rest {i} crosses a bar line")));
            }
            if let Some(p) = prev {
                if p.pitch.is_rest() && n.onset != 0 {
                    return Err(Error::invariant(format!(
                        "{name}: adjacent rests at note {i} are not merged"
                    )));
                }
            }
        }
        prev = Some(n);
        pos = end;
    }
    let total = bars.last().map_or(0, |r| r.end as u32) * BAR;
    if pos != total {
        return Err(Error::invariant(format!(
            "{name}: track covers {pos} sixteenths, song has {total}"
        )));
    }
    Ok(())
}

/// Turns a contiguous run of (pitch, length) events into canonical notes:
/// pitched notes are cut at section ends and after 16 sixteenths, rests are
/// cut at bar lines and adjacent rests in one bar are merged.
///
/// `events` must cover exactly the song's length.
pub fn normalize_track(events: &[(Pitch, u32)], sections: &[SectionSpec]) -> Result<Vec<Note>> {
    let bounds: Vec<u32> = section_bars(sections)
        .iter()
        .map(|r| r.end as u32 * BAR)
        .collect();
    let total = bounds.last().copied().unwrap_or(0);
    let covered: u32 = events.iter().map(|e| e.1).sum();
    if covered != total {
        return Err(Error::invariant(format!(
            "track covers {covered} sixteenths, song has {total}"
        )));
    }

    // Cut into pieces that respect section boundaries first.
    let mut pieces: Vec<(Pitch, u32, u32)> = Vec::new(); // pitch, start, len
    let mut pos = 0u32;
    for &(pitch, len) in events {
        let mut start = pos;
        let end = pos + len;
        while start < end {
            let section_end = *bounds.iter().find(|&&b| b > start).unwrap();
            let piece_end = match pitch {
                Pitch::Rest => end.min(section_end).min((start / BAR + 1) * BAR),
                Pitch::Degree(_) => end.min(section_end).min(start + MAX_DURATION as u32),
            };
            pieces.push((pitch, start, piece_end - start));
            start = piece_end;
        }
        pos = end;
    }

    let mut out: Vec<Note> = Vec::with_capacity(pieces.len());
    let mut out_start: Vec<u32> = Vec::with_capacity(pieces.len());
    for (pitch, start, len) in pieces {
        if pitch.is_rest() {
            if let (Some(last), Some(&last_start)) = (out.last_mut(), out_start.last()) {
                if last.pitch.is_rest() && last_start / BAR == start / BAR {
                    last.duration = Duration::raw(last.duration.get() + len as u8);
                    continue;
                }
            }
        }
        out.push(Note::new(pitch, Duration::raw(len as u8), (start % BAR) as u8));
        out_start.push(start);
    }
    Ok(out)
}

/// Expands notes into one pitch per sixteenth.
pub fn frames(notes: &[Note]) -> Vec<Pitch> {
    let mut out = Vec::with_capacity(notes.iter().map(|n| n.len() as usize).sum());
    for n in notes {
        out.extend(std::iter::repeat(n.pitch).take(n.len() as usize));
    }
    out
}

/// Offsets (from the start of `notes`) of every pitched onset.
pub fn onsets(notes: &[Note]) -> Vec<u32> {
    let mut pos = 0;
    let mut out = Vec::new();
    for n in notes {
        if !n.pitch.is_rest() {
            out.push(pos);
        }
        pos += n.len();
    }
    out
}

/// Per-bar onset mask such as `0___0_______0___`.
pub fn pattern_string(onsets: &[u8]) -> String {
    (0..BAR as u8)
        .map(|i| if onsets.contains(&i) { '0' } else { '_' })
        .collect()
}
