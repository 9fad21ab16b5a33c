//! Line-oriented text score.
//!
//! ```text
//! #TEMPO 96
//! #MODE major
//! #SECTION A 2 var=no
//! 1___3___5___3___ | I | 1_______5_______
//! 2_______........ | V | 5_______2_______
//! ```
//!
//! Each bar line holds 16 melody slots, the bar's chord and 16 bass slots.
//! A slot is a degree `1`..`15` (starts a note), `_` (holds the current
//! note) or `.` (a sixteenth of rest). Two-digit degrees are read greedily,
//! so a `1` followed by a note starting with `1`..`5` is written with a
//! separating space. Lines starting with `//` are comments.

use crate::error::{Error, Result};
use crate::songmodel::types::{
    normalize_track, ChordSymbol, Degree, Mode, Note, Pitch, SectionSpec, Song, BAR,
};

const DEFAULT_TEMPO: u32 = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Start(Degree),
    Hold,
    Rest,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Reads 16 slots from one track field. `col0` is the 1-based column of the field start.
fn parse_slots(field: &str, line: usize, col0: usize) -> Result<Vec<(Slot, usize)>> {
    let chars: Vec<char> = field.chars().collect();
    let mut out = Vec::with_capacity(16);
    let mut i = 0;
    while i < chars.len() {
        let col = col0 + i;
        match chars[i] {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '_' => out.push((Slot::Hold, col)),
            '.' => out.push((Slot::Rest, col)),
            c @ '1'..='9' => {
                let mut value = c as u8 - b'0';
                if c == '1' && i + 1 < chars.len() && ('0'..='5').contains(&chars[i + 1]) {
                    value = 10 + (chars[i + 1] as u8 - b'0');
                    i += 1;
                }
                out.push((Slot::Start(Degree::raw(value)), col));
            }
            c => return Err(syntax(line, col, format!("unexpected character `{c}` in slots"))),
        }
        i += 1;
    }
    if out.len() != BAR as usize {
        return Err(syntax(
            line,
            col0,
            format!("expected 16 slots, found {}", out.len()),
        ));
    }
    Ok(out)
}

#[derive(Default)]
struct TrackBuilder {
    events: Vec<(Pitch, u32)>,
    open: Option<(Pitch, u32)>,
}

impl TrackBuilder {
    fn close(&mut self) {
        if let Some(ev) = self.open.take() {
            self.events.push(ev);
        }
    }

    fn push_bar(
        &mut self,
        slots: &[(Slot, usize)],
        section_start: bool,
        line: usize,
    ) -> Result<()> {
        for (i, &(slot, col)) in slots.iter().enumerate() {
            match slot {
                Slot::Start(d) => {
                    self.close();
                    self.open = Some((Pitch::Degree(d), 1));
                }
                Slot::Hold => match self.open.as_mut() {
                    Some((Pitch::Degree(_), len)) if !(section_start && i == 0) => {
                        if *len >= 16 {
                            return Err(syntax(line, col, "note longer than 16 sixteenths"));
                        }
                        *len += 1;
                    }
                    Some((Pitch::Rest, _)) => {
                        return Err(syntax(line, col, "`_` cannot hold a rest; use `.`"));
                    }
                    _ => return Err(syntax(line, col, "`_` with no note to hold")),
                },
                Slot::Rest => match self.open.as_mut() {
                    Some((Pitch::Rest, len)) if i > 0 => *len += 1,
                    _ => {
                        self.close();
                        self.open = Some((Pitch::Rest, 1));
                    }
                },
            }
        }
        Ok(())
    }
}

struct PendingSection {
    spec: SectionSpec,
    line: usize,
    bars: u32,
}

pub fn parse_text_score(text: &str) -> Result<Song> {
    let mut tempo = DEFAULT_TEMPO;
    let mut mode = Mode::Major;
    let mut sections: Vec<SectionSpec> = Vec::new();
    let mut current: Option<PendingSection> = None;
    let mut chords = Vec::new();
    let mut melody = TrackBuilder::default();
    let mut bass = TrackBuilder::default();

    let finish = |p: PendingSection, sections: &mut Vec<SectionSpec>| -> Result<()> {
        if p.bars != p.spec.length {
            return Err(syntax(
                p.line,
                1,
                format!(
                    "section `{}` declares {} bars but has {}",
                    p.spec.name, p.spec.length, p.bars
                ),
            ));
        }
        sections.push(p.spec);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if trimmed.is_empty() || trimmed.starts_with("//") {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            match words.first().copied() {
                Some("TEMPO") => {
                    tempo = words
                        .get(1)
                        .and_then(|w| w.parse().ok())
                        .filter(|&t: &u32| t > 0)
                        .ok_or_else(|| syntax(line_no, indent + 8, "expected a positive tempo"))?;
                }
                Some("MODE") => {
                    mode = words
                        .get(1)
                        .ok_or_else(|| syntax(line_no, indent + 7, "expected major or minor"))?
                        .parse()
                        .map_err(|_| syntax(line_no, indent + 7, "expected major or minor"))?;
                }
                Some("SECTION") => {
                    if words.len() != 4 {
                        return Err(syntax(
                            line_no,
                            indent + 1,
                            "expected `#SECTION <name> <bars> var=yes|no`",
                        ));
                    }
                    let length: u32 = words[2]
                        .parse()
                        .map_err(|_| syntax(line_no, indent + 1, "bad bar count"))?;
                    let is_variation = match words[3] {
                        "var=yes" => true,
                        "var=no" => false,
                        _ => return Err(syntax(line_no, indent + 1, "expected var=yes or var=no")),
                    };
                    if let Some(p) = current.take() {
                        finish(p, &mut sections)?;
                    }
                    current = Some(PendingSection {
                        spec: SectionSpec::new(words[1], length, is_variation),
                        line: line_no,
                        bars: 0,
                    });
                }
                _ => return Err(syntax(line_no, indent + 1, "unknown directive")),
            }
            continue;
        }

        let Some(pending) = current.as_mut() else {
            return Err(syntax(line_no, indent + 1, "bar before any #SECTION header"));
        };
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 3 {
            return Err(syntax(
                line_no,
                indent + 1,
                "expected `<melody> | <chord> | <bass>`",
            ));
        }
        let col_of = |k: usize| fields[..k].iter().map(|f| f.chars().count() + 1).sum::<usize>() + 1;
        let mel = parse_slots(fields[0], line_no, col_of(0))?;
        let chord_field = fields[1].trim();
        let chord_col = col_of(1) + fields[1].len() - fields[1].trim_start().len();
        let chord: ChordSymbol = chord_field.parse().map_err(|_| {
            syntax(line_no, chord_col, format!("unknown chord `{chord_field}`"))
        })?;
        let bas = parse_slots(fields[2], line_no, col_of(2))?;
        let section_start = pending.bars == 0;
        melody.push_bar(&mel, section_start, line_no)?;
        bass.push_bar(&bas, section_start, line_no)?;
        chords.push(chord);
        pending.bars += 1;
    }
    if let Some(p) = current.take() {
        finish(p, &mut sections)?;
    }
    melody.close();
    bass.close();

    let melody = normalize_track(&melody.events, &sections)?;
    let bass = normalize_track(&bass.events, &sections)?;
    Song::new(sections, melody, chords, bass, tempo, mode)
}

fn bar_slots(notes: &[Note], bars: usize) -> Vec<Vec<Slot>> {
    let mut flat = Vec::with_capacity(bars * BAR as usize);
    for n in notes {
        match n.pitch {
            Pitch::Rest => flat.extend(std::iter::repeat(Slot::Rest).take(n.len() as usize)),
            Pitch::Degree(d) => {
                flat.push(Slot::Start(d));
                flat.extend(std::iter::repeat(Slot::Hold).take(n.len() as usize - 1));
            }
        }
    }
    flat.chunks(BAR as usize).map(|c| c.to_vec()).collect()
}

fn render_slots(slots: &[Slot]) -> String {
    let mut out = String::with_capacity(20);
    let mut prev_is_one = false;
    for s in slots {
        let tok = match s {
            Slot::Start(d) => d.get().to_string(),
            Slot::Hold => "_".to_string(),
            Slot::Rest => ".".to_string(),
        };
        if prev_is_one && matches!(tok.as_bytes()[0], b'1'..=b'5') {
            out.push(' ');
        }
        prev_is_one = tok == "1";
        out.push_str(&tok);
    }
    out
}

/// Canonical text form of a song. `parse_text_score` inverts it exactly.
pub fn render_text_score(song: &Song) -> String {
    let bars = song.total_bars();
    let mel = bar_slots(song.melody(), bars);
    let bas = bar_slots(song.bass(), bars);
    let mut out = format!("#TEMPO {}\n#MODE {}\n", song.tempo(), song.mode());
    for (spec, range) in song.sections().iter().zip(song.section_bars()) {
        out.push_str(&format!(
            "#SECTION {} {} var={}\n",
            spec.name,
            spec.length,
            if spec.is_variation { "yes" } else { "no" }
        ));
        for b in range {
            out.push_str(&format!(
                "{} | {} | {}\n",
                render_slots(&mel[b]),
                song.chords()[b],
                render_slots(&bas[b])
            ));
        }
    }
    out
}
