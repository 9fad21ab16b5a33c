use std::fs;
use std::path::{Path, PathBuf};

use crate::corpusstats::tables::{StatTables, CATEGORIES, INTERVAL_OFFSET, POOLED_ONSET};
use crate::error::{Error, Result};
use crate::songmodel::{
    chord_key, import_midi, parse_text_score, pattern_string, AnnotationSidecar, ChordSymbol,
    Degree, Note, Pitch, Song, BAR,
};

/// Pseudo count added to every cell of general tables.
pub const GENERAL_PSEUDO: f64 = 1e-4;

/// One item of a general corpus.
#[derive(Clone, Debug)]
pub enum CorpusItem {
    Song(Song),
    /// Chord-only annotation: one phrase per entry, one chord per bar.
    Chords(Vec<Vec<ChordSymbol>>),
}

pub fn tempo_bucket(bpm: u32) -> usize {
    match bpm {
        0..=89 => 0,
        90..=120 => 1,
        _ => 2,
    }
}

/// Root, third, fifth or other (0..=3) of a scale step against a chord.
pub fn chord_category(degree: Degree, chord: ChordSymbol) -> usize {
    match (degree.step() + 7 - chord.root() + 1) % 7 {
        0 => 0,
        2 => 1,
        4 => 2,
        _ => 3,
    }
}

fn count_chords(t: &mut StatTables, phrase: &[ChordSymbol]) {
    for w in phrase.windows(2) {
        t.chord_trans.add(w[0].index(), w[1].index(), 1.0);
    }
    for n in 2..=5 {
        for w in phrase.windows(n) {
            t.chord_ngrams.add(chord_key(w), 1.0);
        }
    }
    for k in 2..=6.min(phrase.len()) {
        t.cadences.add(chord_key(&phrase[phrase.len() - k..]), 1.0);
    }
}

/// Counts melody statistics of one section. `chords` are the section's bars.
fn count_melody(t: &mut StatTables, notes: &[Note], chords: &[ChordSymbol], tempo: u32) {
    let bucket = tempo_bucket(tempo);
    let mut pos = 0u32;
    let mut prev: Option<&Note> = None;
    let mut prev_pitched: Option<(u8, usize)> = None;
    for n in notes {
        let d = n.duration.get() as usize - 1;
        let bar = (pos / BAR) as usize;
        t.pos_dur.add(n.onset as usize, d, 1.0);
        if let Some(p) = prev {
            t.dur_trans.add(p.duration.get() as usize - 1, d, 1.0);
        }
        match n.pitch {
            Pitch::Rest => {
                t.rest_dur.add(d, 1.0);
                t.rest_share.add(1, 1.0);
            }
            Pitch::Degree(deg) => {
                let chord = chords[bar];
                let p = deg.get() as usize - 1;
                t.rest_share.add(0, 1.0);
                t.pitch_freq.add(p, 1.0);
                t.pitch_given_chord.add(chord.index(), p, 1.0);
                t.dur_freq.add(d, 1.0);
                t.dur_freq_by_tempo.add(bucket, d, 1.0);
                if n.onset == 0 || n.onset == 8 {
                    let non = usize::from(!chord.contains(deg));
                    t.nonchord_downbeat.add(d, non, 1.0);
                }
                if let Some((q, qd)) = prev_pitched {
                    let iv = (deg.get() as i32 - q as i32 + INTERVAL_OFFSET) as usize;
                    t.interval_freq.add(iv, 1.0);
                    t.interval_given_dur.add(qd, iv, 1.0);
                }
                let last_bar = ((pos + n.len() - 1) / BAR) as usize;
                if chords[bar..=last_bar].iter().any(|&c| c != chord) {
                    t.chord_spans += 1.0;
                }
                prev_pitched = Some((deg.get(), d));
            }
        }
        prev = Some(n);
        pos += n.len();
    }
}

/// Adds the bass pattern and chord-tone counts of one section to `t`.
pub fn count_bass(t: &mut StatTables, notes: &[Note], chords: &[ChordSymbol]) {
    let mut bar_onsets: Vec<Vec<u8>> = vec![Vec::new(); chords.len()];
    let mut pos = 0u32;
    let mut prev: Option<(usize, usize)> = None; // onset, category
    for n in notes {
        if let Pitch::Degree(deg) = n.pitch {
            let bar = (pos / BAR) as usize;
            let cat = chord_category(deg, chords[bar]);
            bar_onsets[bar].push(n.onset);
            t.bass_ctf.add(n.onset as usize, cat, 1.0);
            t.bass_ctf.add(POOLED_ONSET, cat, 1.0);
            if let Some((on, pc)) = prev {
                t.bass_ctt.add(on * CATEGORIES + pc, cat, 1.0);
                t.bass_ctt.add(POOLED_ONSET * CATEGORIES + pc, cat, 1.0);
            }
            prev = Some((n.onset as usize, cat));
        }
        pos += n.len();
    }
    for onsets in bar_onsets.iter().filter(|o| !o.is_empty()) {
        t.bass_patterns.add(pattern_string(onsets), 1.0);
    }
}

fn count_song(t: &mut StatTables, song: &Song) {
    let bars = song.section_bars();
    let melody = song.melody_sections();
    let bass = song.bass_sections();
    for (i, r) in bars.iter().enumerate() {
        let chords = &song.chords()[r.clone()];
        count_chords(t, chords);
        count_melody(t, &song.melody()[melody[i].clone()], chords, song.tempo());
        count_bass(t, &song.bass()[bass[i].clone()], chords);
    }
    t.items += 1;
}

/// Raw count tables of a single song.
pub fn build_seed_stats(song: &Song) -> StatTables {
    let mut t = StatTables::empty(0.0);
    count_song(&mut t, song);
    t
}

/// Pooled, smoothed count tables over a corpus. Chord-only items feed the
/// chord tables and nothing else.
pub fn build_general_stats(corpus: &[CorpusItem]) -> Result<StatTables> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut t = StatTables::empty(0.0);
    for item in corpus {
        match item {
            CorpusItem::Song(s) => count_song(&mut t, s),
            CorpusItem::Chords(phrases) => {
                for p in phrases {
                    count_chords(&mut t, p);
                }
                t.items += 1;
            }
        }
    }
    t.set_pseudo(GENERAL_PSEUDO);
    Ok(t)
}

/// Parses a chord annotation file: one phrase per line, chord symbols
/// separated by whitespace (one per bar). `//` starts a comment.
pub fn parse_chord_annotations(text: &str) -> Result<Vec<Vec<ChordSymbol>>> {
    let mut phrases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split("//").next().unwrap_or("");
        let mut phrase = Vec::new();
        let mut col = 0;
        for tok in body.split_whitespace() {
            col = body[col..].find(tok).map_or(col, |c| col + c);
            let chord = tok.parse().map_err(|_| Error::Syntax {
                line: i + 1,
                column: col + 1,
                message: format!("unknown chord `{tok}`"),
            })?;
            phrase.push(chord);
            col += tok.len();
        }
        if !phrase.is_empty() {
            phrases.push(phrase);
        }
    }
    Ok(phrases)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::from)
}

/// Loads one corpus file by extension: `.txt` text score, `.chords` chord
/// annotation, `.mid` MIDI with a same-stem `.json` sidecar.
pub fn load_corpus_file(path: &Path) -> Result<Option<CorpusItem>> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    Ok(match ext {
        "txt" => Some(CorpusItem::Song(parse_text_score(&read(path)?)?)),
        "chords" => Some(CorpusItem::Chords(parse_chord_annotations(&read(path)?)?)),
        "mid" | "midi" => {
            let sidecar = AnnotationSidecar::from_json(&read(&path.with_extension("json"))?)?;
            Some(CorpusItem::Song(import_midi(&fs::read(path)?, &sidecar)?))
        }
        _ => None,
    })
}

/// Loads every recognised file in `dir`, in file-name order.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<CorpusItem>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.sort();
    let mut items = Vec::new();
    for p in paths {
        if let Some(item) = load_corpus_file(&p)? {
            items.push(item);
        }
    }
    Ok(items)
}
