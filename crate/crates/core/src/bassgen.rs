//! Bass lines from per-bar onset patterns and chord-tone category models,
//! decoded with Viterbi.

use crate::corpusstats::{count_bass, StatTables, Table, CATEGORIES, POOLED_ONSET};
use crate::error::{Error, Result};
use crate::songmodel::{
    normalize_track, pattern_string, ChordSymbol, Note, Pitch, SectionSpec, Song, BAR,
};

/// Chord-tone category of a bass note.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Root = 0,
    Third = 1,
    Fifth = 2,
    Other = 3,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Root, Category::Third, Category::Fifth, Category::Other];

    pub fn from_index(i: usize) -> Category {
        Self::ALL[i]
    }
}

/// Onset positions of one bar.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BassPattern {
    pub onsets: Vec<u8>,
}

impl BassPattern {
    pub fn mask(&self) -> String {
        pattern_string(&self.onsets)
    }

    pub fn is_silent(&self) -> bool {
        self.onsets.is_empty()
    }
}

/// Per-bar onset patterns of a bass track slice covering `bars` bars.
pub fn bar_patterns(notes: &[Note], bars: usize) -> Vec<BassPattern> {
    let mut out = vec![BassPattern { onsets: Vec::new() }; bars];
    let mut pos = 0u32;
    for n in notes {
        if !n.pitch.is_rest() {
            out[(pos / BAR) as usize].onsets.push(n.onset);
        }
        pos += n.len();
    }
    out
}

/// Most frequent non-silent pattern; ties go to the one seen first.
fn most_frequent(patterns: &[BassPattern]) -> Option<BassPattern> {
    let mut best: Option<(&BassPattern, usize)> = None;
    for p in patterns.iter().filter(|p| !p.is_silent()) {
        let n = patterns.iter().filter(|q| *q == p).count();
        if best.map_or(true, |(_, bn)| n > bn) {
            best = Some((p, n));
        }
    }
    best.map(|(p, _)| p.clone())
}

/// Chord-tone frequency rows per onset and transition rows per
/// (onset, category). Every row is a probability distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ChordToneMatrices {
    pub ctf: Vec<[f64; CATEGORIES]>,
    /// Indexed `[onset][category]`, giving the next note's category.
    pub ctt: Vec<[[f64; CATEGORIES]; CATEGORIES]>,
}

fn row_probs(t: &StatTables, which: fn(&StatTables) -> &Table, row: usize) -> Option<[f64; CATEGORIES]> {
    let d = which(t).row(row);
    if d.is_empty() {
        return None;
    }
    let mut out = [0.0; CATEGORIES];
    for (i, o) in out.iter_mut().enumerate() {
        *o = d.prob(i);
    }
    Some(out)
}

impl ChordToneMatrices {
    /// Resolves count tables into rows. Onsets never seen use the section's
    /// all-onset row, then the `fallback` tables' all-onset row, then uniform.
    pub fn from_counts(counts: &StatTables, fallback: Option<&StatTables>) -> Self {
        let uniform = [1.0 / CATEGORIES as f64; CATEGORIES];
        let ctf_of = |t: &StatTables, r: usize| row_probs(t, |t| &t.bass_ctf, r);
        let ctt_of = |t: &StatTables, r: usize| row_probs(t, |t| &t.bass_ctt, r);
        let pooled_ctf = ctf_of(counts, POOLED_ONSET)
            .or_else(|| fallback.and_then(|f| ctf_of(f, POOLED_ONSET)))
            .unwrap_or(uniform);
        let pooled_ctt: Vec<[f64; CATEGORIES]> = (0..CATEGORIES)
            .map(|c| {
                let r = POOLED_ONSET * CATEGORIES + c;
                ctt_of(counts, r)
                    .or_else(|| fallback.and_then(|f| ctt_of(f, r)))
                    .unwrap_or(uniform)
            })
            .collect();
        let ctf = (0..POOLED_ONSET)
            .map(|o| ctf_of(counts, o).unwrap_or(pooled_ctf))
            .collect();
        let ctt = (0..POOLED_ONSET)
            .map(|o| {
                let mut rows = [[0.0; CATEGORIES]; CATEGORIES];
                for (c, row) in rows.iter_mut().enumerate() {
                    *row = ctt_of(counts, o * CATEGORIES + c).unwrap_or(pooled_ctt[c]);
                }
                rows
            })
            .collect();
        ChordToneMatrices { ctf, ctt }
    }

    /// Only the all-onset rows, copied to every onset.
    pub fn pooled(counts: &StatTables) -> Self {
        let mut only_pooled = StatTables::empty(0.0);
        only_pooled.bass_ctf.rows[POOLED_ONSET] = counts.bass_ctf.rows[POOLED_ONSET].clone();
        for c in 0..CATEGORIES {
            let r = POOLED_ONSET * CATEGORIES + c;
            only_pooled.bass_ctt.rows[r] = counts.bass_ctt.rows[r].clone();
        }
        Self::from_counts(&only_pooled, None)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BassStyle {
    pub most_frequent: BassPattern,
    pub first: BassPattern,
    pub last: BassPattern,
    pub matrices: ChordToneMatrices,
}

/// Style of one seed section. `song_counts` supplies fallback rows.
pub fn extract_bass_style(notes: &[Note], chords: &[ChordSymbol], song_counts: Option<&StatTables>) -> Result<BassStyle> {
    let patterns = bar_patterns(notes, chords.len());
    let most_frequent = most_frequent(&patterns).ok_or(Error::EmptyBass)?;
    let mut counts = StatTables::empty(0.0);
    count_bass(&mut counts, notes, chords);
    Ok(BassStyle {
        first: patterns[0].clone(),
        last: patterns[patterns.len() - 1].clone(),
        most_frequent,
        matrices: ChordToneMatrices::from_counts(&counts, song_counts),
    })
}

/// Style for sections without a seed counterpart: the song's most frequent
/// pattern in every bar and the song's all-onset rows.
pub fn song_bass_style(song: &Song, song_counts: &StatTables) -> Result<BassStyle> {
    let patterns = bar_patterns(song.bass(), song.total_bars());
    let p = most_frequent(&patterns).ok_or(Error::EmptyBass)?;
    Ok(BassStyle {
        first: p.clone(),
        last: p.clone(),
        most_frequent: p,
        matrices: ChordToneMatrices::pooled(song_counts),
    })
}

/// Log-likelihood of a category sequence at the given onsets, summed from
/// the last note backwards.
pub fn sequence_log_likelihood(onsets: &[u8], cats: &[Category], m: &ChordToneMatrices) -> f64 {
    let k = cats.len();
    if k == 0 {
        return 0.0;
    }
    let mut acc = m.ctf[onsets[k - 1] as usize][cats[k - 1] as usize].ln();
    for i in (0..k - 1).rev() {
        let on = onsets[i] as usize;
        let trans = m.ctt[on][cats[i] as usize][cats[i + 1] as usize].ln();
        acc = m.ctf[on][cats[i] as usize].ln() + (trans + acc);
    }
    acc
}

/// Most likely category sequence. Among equally likely sequences the
/// lexicographically smallest (root before third before fifth before other)
/// wins.
pub fn viterbi_bass(onsets: &[u8], m: &ChordToneMatrices) -> Vec<Category> {
    let k = onsets.len();
    if k == 0 {
        return Vec::new();
    }
    // best[i][c]: best log-likelihood of notes i.. given category c at i.
    let mut best = vec![[f64::NEG_INFINITY; CATEGORIES]; k];
    for c in 0..CATEGORIES {
        best[k - 1][c] = m.ctf[onsets[k - 1] as usize][c].ln();
    }
    for i in (0..k - 1).rev() {
        let on = onsets[i] as usize;
        for c in 0..CATEGORIES {
            let tail = (0..CATEGORIES)
                .map(|n| m.ctt[on][c][n].ln() + best[i + 1][n])
                .fold(f64::NEG_INFINITY, f64::max);
            best[i][c] = m.ctf[on][c].ln() + tail;
        }
    }
    let argmax = |vals: [f64; CATEGORIES]| {
        let mut b = 0;
        for c in 1..CATEGORIES {
            if vals[c] > vals[b] {
                b = c;
            }
        }
        b
    };
    let mut c = argmax(best[0]);
    if best[0][c] == f64::NEG_INFINITY {
        // Every sequence is impossible, so all tie.
        return vec![Category::Root; k];
    }
    let mut out = Vec::with_capacity(k);
    out.push(Category::from_index(c));
    for i in 1..k {
        let on = onsets[i - 1] as usize;
        let mut vals = [0.0; CATEGORIES];
        for (n, v) in vals.iter_mut().enumerate() {
            *v = m.ctt[on][c][n].ln() + best[i][n];
        }
        c = argmax(vals);
        out.push(Category::from_index(c));
    }
    out
}

/// Concrete degree for a category over `chord`. Non-chord tones move toward
/// the next chord's root, or sit a step above the root at a section end.
pub fn realize(cat: Category, chord: ChordSymbol, next: Option<ChordSymbol>) -> u8 {
    let r = chord.root();
    match cat {
        Category::Root => r,
        Category::Third => r + 2,
        Category::Fifth => r + 4,
        Category::Other => {
            let passing = next.and_then(|n| {
                let target = n.root();
                let (lo, hi) = (r.min(target), r.max(target));
                (lo + 1..hi)
                    .filter(|&d| !chord.steps().contains(&((d - 1) % 7)))
                    .min_by_key(|&d| (d as i32 - target as i32).abs())
            });
            passing.unwrap_or(r + 1)
        }
    }
}

/// Bass notes for one section. Bar one takes the style's first pattern, the
/// final bar its last pattern (the first wins in one-bar sections) and the
/// rest the most frequent pattern.
pub fn generate_bass(chords: &[ChordSymbol], style: &BassStyle) -> Result<Vec<Note>> {
    let bars = chords.len();
    let patterns: Vec<&BassPattern> = (0..bars)
        .map(|b| {
            if b == 0 {
                &style.first
            } else if b == bars - 1 {
                &style.last
            } else {
                &style.most_frequent
            }
        })
        .collect();

    let onsets: Vec<u8> = patterns.iter().flat_map(|p| p.onsets.iter().copied()).collect();
    let cats = viterbi_bass(&onsets, &style.matrices);

    let mut events: Vec<(Pitch, u32)> = Vec::new();
    let mut k = 0;
    for (b, p) in patterns.iter().enumerate() {
        let first = p.onsets.first().copied().unwrap_or(BAR as u8);
        if first > 0 {
            events.push((Pitch::Rest, first as u32));
        }
        for (j, &on) in p.onsets.iter().enumerate() {
            let end = p.onsets.get(j + 1).map_or(BAR, |&n| n as u32);
            let degree = realize(cats[k], chords[b], chords.get(b + 1).copied());
            events.push((Pitch::degree(degree)?, end - on as u32));
            k += 1;
        }
    }
    normalize_track(&events, &[SectionSpec::new("A", bars as u32, false)])
}
