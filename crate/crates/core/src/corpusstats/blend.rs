use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpusstats::tables::{key_len, Dist, FreqMap, StatTables, Table};
use crate::error::{Error, Result};

/// Weight of seed statistics against general statistics.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BlendParam(f64);

impl BlendParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(BlendParam(alpha))
        } else {
            Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")))
        }
    }

    pub const fn get(self) -> f64 {
        self.0
    }

    pub const GENERAL: BlendParam = BlendParam(0.0);
    pub const SEED: BlendParam = BlendParam(1.0);
}

impl Default for BlendParam {
    fn default() -> Self {
        BlendParam(0.5)
    }
}

/// Convex mix of two rows. An empty row defers to the other one.
pub fn blend_dist(seed: &Dist, general: &Dist, alpha: BlendParam) -> Dist {
    let a = alpha.get();
    let counts = if seed.is_empty() || !general.has_mass() {
        if seed.is_empty() {
            general.probs()
        } else {
            seed.probs()
        }
    } else {
        (0..seed.len())
            .map(|i| (1.0 - a) * general.prob(i) + a * seed.prob(i))
            .collect()
    };
    Dist { counts, pseudo: 0.0 }
}

fn blend_table(seed: &Table, general: &Table, alpha: BlendParam) -> Table {
    Table {
        rows: seed
            .rows
            .iter()
            .zip(&general.rows)
            .map(|(s, g)| blend_dist(s, g, alpha))
            .collect(),
    }
}

/// Mixes relative frequencies key length by key length.
pub fn blend_map(seed: &FreqMap, general: &FreqMap, alpha: BlendParam) -> FreqMap {
    let a = alpha.get();
    let lens: BTreeSet<usize> = seed
        .counts
        .keys()
        .chain(general.counts.keys())
        .map(|k| key_len(k))
        .collect();
    let mut out = FreqMap::default();
    for n in lens {
        let (ws, wg) = match (seed.total_of_len(n) > 0.0, general.total_of_len(n) > 0.0) {
            (true, true) => (a, 1.0 - a),
            (true, false) => (1.0, 0.0),
            (false, true) => (0.0, 1.0),
            (false, false) => continue,
        };
        let keys: BTreeSet<&str> = seed
            .keys_of_len(n)
            .chain(general.keys_of_len(n))
            .map(|(k, _)| k)
            .collect();
        for k in keys {
            let p = ws * seed.rel_freq(k) + wg * general.rel_freq(k);
            if p > 0.0 {
                out.add(k.to_string(), p);
            }
        }
    }
    out
}

/// Blends every table: `(1 - alpha) * general + alpha * seed`, row by row.
/// Rows the seed never observed fall back to the general row. The result
/// holds probabilities; the span count is kept from the seed.
pub fn blend(seed: &StatTables, general: &StatTables, alpha: BlendParam) -> StatTables {
    StatTables {
        version: seed.version,
        items: seed.items,
        chord_trans: blend_table(&seed.chord_trans, &general.chord_trans, alpha),
        chord_ngrams: blend_map(&seed.chord_ngrams, &general.chord_ngrams, alpha),
        cadences: blend_map(&seed.cadences, &general.cadences, alpha),
        pitch_freq: blend_dist(&seed.pitch_freq, &general.pitch_freq, alpha),
        pitch_given_chord: blend_table(&seed.pitch_given_chord, &general.pitch_given_chord, alpha),
        interval_freq: blend_dist(&seed.interval_freq, &general.interval_freq, alpha),
        dur_freq: blend_dist(&seed.dur_freq, &general.dur_freq, alpha),
        dur_freq_by_tempo: blend_table(&seed.dur_freq_by_tempo, &general.dur_freq_by_tempo, alpha),
        dur_trans: blend_table(&seed.dur_trans, &general.dur_trans, alpha),
        rest_dur: blend_dist(&seed.rest_dur, &general.rest_dur, alpha),
        rest_share: blend_dist(&seed.rest_share, &general.rest_share, alpha),
        pos_dur: blend_table(&seed.pos_dur, &general.pos_dur, alpha),
        interval_given_dur: blend_table(&seed.interval_given_dur, &general.interval_given_dur, alpha),
        nonchord_downbeat: blend_table(&seed.nonchord_downbeat, &general.nonchord_downbeat, alpha),
        chord_spans: seed.chord_spans,
        bass_patterns: blend_map(&seed.bass_patterns, &general.bass_patterns, alpha),
        bass_ctf: blend_table(&seed.bass_ctf, &general.bass_ctf, alpha),
        bass_ctt: blend_table(&seed.bass_ctt, &general.bass_ctt, alpha),
    }
}
