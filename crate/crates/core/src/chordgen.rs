//! Chord progressions from a blended first-order chain extended with
//! distinctive seed sequences and section-ending cadences.

use rand::Rng;

use crate::corpusstats::{blend_dist, blend_map, BlendParam, StatTables};
use crate::rng::weighted_index;
use crate::songmodel::{chord_key, parse_chord_key, ChordSymbol};

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_BOOST: f64 = 2.0;
/// Cadences are mixed in this many bars before the end of a section.
pub const CADENCE_WINDOW: usize = 6;

/// Seed n-grams (n = 2, 3, 4) that make up less than `threshold` of the
/// general corpus's n-grams of the same length. Ordered by length, then key.
pub fn detect_distinctive(seed: &StatTables, general: &StatTables, threshold: f64) -> Vec<Vec<ChordSymbol>> {
    let mut out = Vec::new();
    for n in 2..=4 {
        for (key, count) in seed.chord_ngrams.keys_of_len(n) {
            if count > 0.0 && general.chord_ngrams.rel_freq(key) < threshold {
                out.push(parse_chord_key(key).expect("n-gram keys are valid"));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedChordChain {
    /// The seven single chords (in [`ChordSymbol::ALL`] order) followed by
    /// distinctive sequences.
    pub states: Vec<Vec<ChordSymbol>>,
    /// Row per single chord over all states.
    pub trans: Vec<Vec<f64>>,
    /// Cadence candidates of length 2..=6.
    pub cadences: Vec<Vec<ChordSymbol>>,
    /// Blended relative frequency of each cadence within its length.
    pub cadence_freq: Vec<f64>,
    /// Row per single chord over cadences.
    pub cadence_trans: Vec<Vec<f64>>,
    /// Stationary distribution of the single-chord part of the chain.
    pub stationary: Vec<f64>,
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        row.iter_mut().for_each(|x| *x /= s);
    }
}

fn stationary(base: &[Vec<f64>]) -> Vec<f64> {
    let mut p = vec![1.0 / 7.0; 7];
    for _ in 0..500 {
        let mut next = vec![0.0; 7];
        for (i, row) in base.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                next[j] += p[i] * t;
            }
        }
        normalize(&mut next);
        // Average with the previous iterate so periodic chains converge.
        for (a, b) in p.iter_mut().zip(&next) {
            *a = 0.5 * *a + 0.5 * b;
        }
    }
    p
}

pub fn build_chain(
    seed: &StatTables,
    general: &StatTables,
    alpha: BlendParam,
    distinctive: &[Vec<ChordSymbol>],
    boost: f64,
) -> AugmentedChordChain {
    let base: Vec<Vec<f64>> = (0..7)
        .map(|c| {
            let mut row = blend_dist(seed.chord_trans.row(c), general.chord_trans.row(c), alpha).counts;
            if row.iter().all(|&x| x == 0.0) {
                row = vec![1.0 / 7.0; 7];
            }
            row
        })
        .collect();

    let mut states: Vec<Vec<ChordSymbol>> = ChordSymbol::ALL.iter().map(|&c| vec![c]).collect();
    states.extend(distinctive.iter().cloned());

    let trans = (0..7)
        .map(|c| {
            let mut row = base[c].clone();
            let from = ChordSymbol::from_index(c);
            let outgoing = seed.chord_trans.row(c).total();
            for seq in distinctive {
                let mut path = vec![from];
                path.extend_from_slice(seq);
                let mass = if outgoing > 0.0 {
                    boost * seed.chord_ngrams.count(&chord_key(&path)) / outgoing
                } else {
                    0.0
                };
                row.push(mass);
            }
            normalize(&mut row);
            row
        })
        .collect();

    let blended = blend_map(&seed.cadences, &general.cadences, alpha);
    let mut cadences = Vec::new();
    let mut cadence_freq = Vec::new();
    for n in 2..=CADENCE_WINDOW {
        for (key, f) in blended.keys_of_len(n) {
            cadences.push(parse_chord_key(key).expect("cadence keys are valid"));
            cadence_freq.push(f);
        }
    }
    if !cadences.iter().any(|c| c.len() == 2) {
        cadences.push(vec![ChordSymbol::V, ChordSymbol::I]);
        cadence_freq.push(1.0);
    }

    let cadence_trans = (0..7)
        .map(|c| {
            let mut row: Vec<f64> = cadences
                .iter()
                .zip(&cadence_freq)
                .map(|(k, &f)| f * base[c][k[0].index()])
                .collect();
            if row.iter().all(|&x| x == 0.0) {
                row = cadence_freq.clone();
            }
            normalize(&mut row);
            row
        })
        .collect();

    AugmentedChordChain {
        stationary: stationary(&base),
        states,
        trans,
        cadences,
        cadence_freq,
        cadence_trans,
    }
}

impl AugmentedChordChain {
    /// A chain with no distinctive states over purely general statistics.
    pub fn general(seed: &StatTables, general: &StatTables) -> Self {
        build_chain(seed, general, BlendParam::GENERAL, &[], DEFAULT_BOOST)
    }

    fn first_chord<R: Rng>(&self, start: Option<ChordSymbol>, rng: &mut R) -> ChordSymbol {
        start.unwrap_or_else(|| {
            ChordSymbol::from_index(weighted_index(&self.stationary, rng).unwrap_or(0))
        })
    }

    fn final_cadence<R: Rng>(&self, from: Option<ChordSymbol>, rng: &mut R) -> &[ChordSymbol] {
        let len2 = |k: &Vec<ChordSymbol>| k.len() == 2;
        let mut w: Vec<f64> = match from {
            Some(c) => self
                .cadences
                .iter()
                .zip(&self.cadence_trans[c.index()])
                .map(|(k, &p)| if len2(k) { p } else { 0.0 })
                .collect(),
            None => vec![0.0; self.cadences.len()],
        };
        if w.iter().all(|&x| x == 0.0) {
            w = self
                .cadences
                .iter()
                .zip(&self.cadence_freq)
                .map(|(k, &f)| if len2(k) { f.max(f64::MIN_POSITIVE) } else { 0.0 })
                .collect();
        }
        let i = weighted_index(&w, rng).expect("a length-2 cadence always exists");
        &self.cadences[i]
    }
}

/// Chords for one section. Outside the last six bars the chain is sampled
/// as is; inside them, cadences that would end exactly on the last bar join
/// the choice, and with two bars left a two-chord cadence is forced.
pub fn generate_chords<R: Rng>(
    section_len: usize,
    chain: &AugmentedChordChain,
    start: Option<ChordSymbol>,
    rng: &mut R,
) -> Vec<ChordSymbol> {
    match section_len {
        0 => return Vec::new(),
        1 => return vec![chain.first_chord(start, rng)],
        2 => {
            // Prefer a cadence that begins on the requested first chord.
            if let Some(s) = start {
                let w: Vec<f64> = chain
                    .cadences
                    .iter()
                    .zip(&chain.cadence_freq)
                    .map(|(k, &f)| if k.len() == 2 && k[0] == s { f } else { 0.0 })
                    .collect();
                if let Some(i) = weighted_index(&w, rng) {
                    return chain.cadences[i].clone();
                }
            }
            return chain.final_cadence(None, rng).to_vec();
        }
        _ => {}
    }

    let mut out = vec![chain.first_chord(start, rng)];
    while out.len() < section_len {
        let remaining = section_len - out.len();
        let current = *out.last().unwrap();
        if remaining == 2 {
            out.extend_from_slice(chain.final_cadence(Some(current), rng));
            break;
        }
        let row = &chain.trans[current.index()];
        let mut weights: Vec<f64> = chain
            .states
            .iter()
            .zip(row)
            .map(|(s, &p)| if remaining >= s.len() + 2 { p } else { 0.0 })
            .collect();
        let cadence_base = weights.len();
        if remaining <= CADENCE_WINDOW {
            weights.extend(
                chain
                    .cadences
                    .iter()
                    .zip(&chain.cadence_trans[current.index()])
                    .map(|(k, &p)| if k.len() == remaining { p } else { 0.0 }),
            );
        }
        match weighted_index(&weights, rng) {
            Some(i) if i >= cadence_base => {
                out.extend_from_slice(&chain.cadences[i - cadence_base]);
            }
            Some(i) => out.extend_from_slice(&chain.states[i]),
            // Nothing reachable from here: jump by the stationary distribution.
            None => out.push(chain.first_chord(None, rng)),
        }
    }
    out
}

/// True when `chords` ends with one of the chain's cadences.
pub fn ends_with_cadence(chords: &[ChordSymbol], cadences: &[Vec<ChordSymbol>]) -> bool {
    cadences.iter().any(|k| chords.ends_with(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use ChordSymbol::*;

    fn tables(phrases: &[&[ChordSymbol]], pseudo: f64) -> StatTables {
        let mut t = StatTables::empty(pseudo);
        for p in phrases {
            for w in p.windows(2) {
                t.chord_trans.add(w[0].index(), w[1].index(), 1.0);
            }
            for n in 2..=5 {
                for w in p.windows(n) {
                    t.chord_ngrams.add(chord_key(w), 1.0);
                }
            }
            for k in 2..=6.min(p.len()) {
                t.cadences.add(chord_key(&p[p.len() - k..]), 1.0);
            }
        }
        t
    }

    #[test]
    fn deterministic_chain_trace() {
        let seed = tables(&[&[I, V, I, V, I]], 0.0);
        let chain = build_chain(&seed, &seed, BlendParam::SEED, &[], DEFAULT_BOOST);
        // I -> V is forced; the only length-3 cadence (I-V-I) starts on I, which
        // I never moves to, so the two-bar cadence V-I is forced at the end.
        for s in 0..10 {
            let out = generate_chords(4, &chain, Some(I), &mut stream(s, 0));
            assert_eq!(out, vec![I, V, V, I]);
            assert!(ends_with_cadence(&out, &chain.cadences));
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let seed = tables(&[&[I, Vi, Iii, IV, V, I]], 0.0);
        let gen = tables(&[&[I, IV, V, I], &[Vi, IV, I, V]], 1e-4);
        let d = detect_distinctive(&seed, &gen, DEFAULT_THRESHOLD);
        assert!(d.contains(&vec![Vi, Iii]));
        let chain = build_chain(&seed, &gen, BlendParam::default(), &d, DEFAULT_BOOST);
        for row in chain.trans.iter().chain(&chain.cadence_trans) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let vi_iii = chain.states.iter().position(|s| s == &vec![Vi, Iii]).unwrap();
        assert!(chain.trans[I.index()][vi_iii] > 0.0);
        assert!(detect_distinctive(&seed, &gen, 0.0).is_empty());
    }

    #[test]
    fn two_bar_sections_are_one_cadence() {
        let seed = tables(&[&[I, IV, V, I], &[Vi, IV, V, I]], 0.0);
        let chain = build_chain(&seed, &seed, BlendParam::SEED, &[], DEFAULT_BOOST);
        for s in 0..20 {
            let out = generate_chords(2, &chain, None, &mut stream(s, 0));
            assert_eq!(out, vec![V, I]);
        }
    }
}
