use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Range of melodic intervals tracked, -14..=14 stored at offset +14.
pub const INTERVALS: usize = 29;
pub const INTERVAL_OFFSET: i32 = 14;
/// Chord-tone categories used by the bass tables.
pub const CATEGORIES: usize = 4;
/// Index of the all-onset row in the per-onset bass tables.
pub const POOLED_ONSET: usize = 16;

pub const STATS_VERSION: u32 = 1;

/// One row of counts. Probabilities add `pseudo` to every cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dist {
    pub counts: Vec<f64>,
    #[serde(default)]
    pub pseudo: f64,
}

impl Dist {
    pub fn zeros(len: usize, pseudo: f64) -> Self {
        Dist {
            counts: vec![0.0; len],
            pseudo,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// No observations. Smoothed rows still yield a uniform distribution.
    pub fn is_empty(&self) -> bool {
        self.total() == 0.0
    }

    pub fn add(&mut self, i: usize, w: f64) {
        self.counts[i] += w;
    }

    /// Probability of cell `i`; 0 for an empty unsmoothed row.
    pub fn prob(&self, i: usize) -> f64 {
        let denom = self.total() + self.pseudo * self.len() as f64;
        if denom == 0.0 {
            0.0
        } else {
            (self.counts[i] + self.pseudo) / denom
        }
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.prob(i)).collect()
    }

    /// Row with mass, either observed or through smoothing.
    pub fn has_mass(&self) -> bool {
        !self.is_empty() || self.pseudo > 0.0
    }
}

/// Rows of a conditional table; row `i` is the distribution given condition `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<Dist>,
}

impl Table {
    pub fn zeros(rows: usize, cols: usize, pseudo: f64) -> Self {
        Table {
            rows: (0..rows).map(|_| Dist::zeros(cols, pseudo)).collect(),
        }
    }

    pub fn row(&self, i: usize) -> &Dist {
        &self.rows[i]
    }

    pub fn prob(&self, row: usize, col: usize) -> f64 {
        self.rows[row].prob(col)
    }

    pub fn add(&mut self, row: usize, col: usize, w: f64) {
        self.rows[row].add(col, w);
    }
}

/// Counts keyed by a string such as a chord n-gram (`I-IV-V`) or a bass
/// pattern mask. Keys are grouped by their number of `-`-separated parts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FreqMap {
    pub counts: BTreeMap<String, f64>,
}

pub(crate) fn key_len(key: &str) -> usize {
    key.split('-').count()
}

impl FreqMap {
    pub fn add(&mut self, key: String, w: f64) {
        *self.counts.entry(key).or_insert(0.0) += w;
    }

    pub fn count(&self, key: &str) -> f64 {
        self.counts.get(key).copied().unwrap_or(0.0)
    }

    /// Sum of counts over keys with `n` parts.
    pub fn total_of_len(&self, n: usize) -> f64 {
        self.counts
            .iter()
            .filter(|(k, _)| key_len(k) == n)
            .map(|(_, c)| c)
            .sum()
    }

    /// Count of `key` relative to all keys of the same length.
    pub fn rel_freq(&self, key: &str) -> f64 {
        let total = self.total_of_len(key_len(key));
        if total == 0.0 {
            0.0
        } else {
            self.count(key) / total
        }
    }

    pub fn keys_of_len(&self, n: usize) -> impl Iterator<Item = (&str, f64)> {
        self.counts
            .iter()
            .filter(move |(k, _)| key_len(k) == n)
            .map(|(k, &c)| (k.as_str(), c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.values().all(|&c| c == 0.0)
    }
}

/// Every count table the rating functions and chains draw on.
///
/// Seed tables are built unsmoothed; general tables carry a small pseudo
/// count on every row so that no event is impossible under the general model.
/// Blended tables hold probabilities directly (pseudo count 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatTables {
    pub version: u32,
    /// Number of songs or chord annotation files pooled.
    pub items: usize,
    pub chord_trans: Table,
    /// Chord n-grams for n = 2..=5 within sections.
    pub chord_ngrams: FreqMap,
    /// Section-final chord sequences of length 2..=6.
    pub cadences: FreqMap,
    pub pitch_freq: Dist,
    pub pitch_given_chord: Table,
    pub interval_freq: Dist,
    pub dur_freq: Dist,
    /// Duration frequency by tempo bucket: slow, medium, fast.
    pub dur_freq_by_tempo: Table,
    /// Row: previous note duration (rests included), column: next duration.
    pub dur_trans: Table,
    pub rest_dur: Dist,
    /// Pitched versus rest note counts.
    pub rest_share: Dist,
    /// Row: onset within bar, column: duration.
    pub pos_dur: Table,
    /// Row: duration of the first note, column: interval + 14.
    pub interval_given_dur: Table,
    /// Row: duration, columns: chord tone, non-chord tone. Notes on beats 1 and 3 only.
    pub nonchord_downbeat: Table,
    /// Melody notes that keep sounding across a bar line with a chord change.
    pub chord_spans: f64,
    pub bass_patterns: FreqMap,
    /// Row: onset (16 = all onsets), column: chord-tone category.
    pub bass_ctf: Table,
    /// Row: onset * 4 + category of a bass note (64.. = all onsets),
    /// column: category of the next bass note.
    pub bass_ctt: Table,
}

pub(crate) const DUR_ROWS: usize = 16;
pub(crate) const CTT_ROWS: usize = (POOLED_ONSET + 1) * CATEGORIES;

impl StatTables {
    pub fn empty(pseudo: f64) -> Self {
        StatTables {
            version: STATS_VERSION,
            items: 0,
            chord_trans: Table::zeros(7, 7, pseudo),
            chord_ngrams: FreqMap::default(),
            cadences: FreqMap::default(),
            pitch_freq: Dist::zeros(15, pseudo),
            pitch_given_chord: Table::zeros(7, 15, pseudo),
            interval_freq: Dist::zeros(INTERVALS, pseudo),
            dur_freq: Dist::zeros(DUR_ROWS, pseudo),
            dur_freq_by_tempo: Table::zeros(3, DUR_ROWS, pseudo),
            dur_trans: Table::zeros(DUR_ROWS, DUR_ROWS, pseudo),
            rest_dur: Dist::zeros(DUR_ROWS, pseudo),
            rest_share: Dist::zeros(2, pseudo),
            pos_dur: Table::zeros(16, DUR_ROWS, pseudo),
            interval_given_dur: Table::zeros(DUR_ROWS, INTERVALS, pseudo),
            nonchord_downbeat: Table::zeros(DUR_ROWS, 2, pseudo),
            chord_spans: 0.0,
            bass_patterns: FreqMap::default(),
            bass_ctf: Table::zeros(POOLED_ONSET + 1, CATEGORIES, pseudo),
            bass_ctt: Table::zeros(CTT_ROWS, CATEGORIES, pseudo),
        }
    }

    fn dists_mut(&mut self) -> Vec<&mut Dist> {
        let mut out: Vec<&mut Dist> = vec![
            &mut self.pitch_freq,
            &mut self.interval_freq,
            &mut self.dur_freq,
            &mut self.rest_dur,
            &mut self.rest_share,
        ];
        for t in [
            &mut self.chord_trans,
            &mut self.pitch_given_chord,
            &mut self.dur_freq_by_tempo,
            &mut self.dur_trans,
            &mut self.pos_dur,
            &mut self.interval_given_dur,
            &mut self.nonchord_downbeat,
            &mut self.bass_ctf,
            &mut self.bass_ctt,
        ] {
            out.extend(t.rows.iter_mut());
        }
        out
    }

    pub(crate) fn set_pseudo(&mut self, pseudo: f64) {
        for d in self.dists_mut() {
            d.pseudo = pseudo;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: StatTables = serde_json::from_str(text)?;
        if t.version != STATS_VERSION {
            return Err(Error::Stats(format!(
                "stats file version {} (expected {STATS_VERSION})",
                t.version
            )));
        }
        Ok(t)
    }
}
