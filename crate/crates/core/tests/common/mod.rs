#![allow(dead_code)]

use rand::Rng;
use seedsong::corpusstats::StatTables;
use seedsong::bassgen::{Category, ChordToneMatrices};
use seedsong::melodygen::Frame;
use seedsong::songmodel::{normalize_track, ChordSymbol, Mode, Pitch, SectionSpec, Song, BAR};

/// Random (pitch, length) events covering `total` sixteenths.
pub fn random_events<R: Rng>(rng: &mut R, total: u32, rest_p: f64) -> Vec<(Pitch, u32)> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < total {
        let len = rng.gen_range(1..=20).min(total - pos);
        let p = if rng.gen_bool(rest_p) {
            Pitch::Rest
        } else {
            Pitch::degree(rng.gen_range(1..=15)).unwrap()
        };
        out.push((p, len));
        pos += len;
    }
    out
}

pub fn random_song<R: Rng>(rng: &mut R) -> Song {
    let names = ["A", "B", "C", "Verse", "Chorus"];
    let n = rng.gen_range(1..=4);
    let mut sections: Vec<SectionSpec> = Vec::new();
    for i in 0..n {
        let name = names[rng.gen_range(0..names.len())];
        let seen = sections.iter().any(|s| s.name == name);
        let var = i > 0 && seen && rng.gen_bool(0.3);
        sections.push(SectionSpec::new(name, rng.gen_range(1..=4), var));
    }
    let bars: u32 = sections.iter().map(|s| s.length).sum();
    let melody = normalize_track(&random_events(rng, bars * BAR, 0.2), &sections).unwrap();
    let bass = normalize_track(&random_events(rng, bars * BAR, 0.1), &sections).unwrap();
    let chords = (0..bars).map(|_| ChordSymbol::ALL[rng.gen_range(0..7)]).collect();
    let mode = if rng.gen_bool(0.5) { Mode::Major } else { Mode::Minor };
    Song::new(sections, melody, chords, bass, rng.gen_range(40..=240), mode).unwrap()
}

pub fn random_frames<R: Rng>(rng: &mut R, max_len: usize) -> Vec<Frame> {
    let n = rng.gen_range(1..=max_len);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                None
            } else {
                Some(rng.gen_range(1..=15) as f64)
            }
        })
        .collect()
}

// Contour costs restated from their definitions, for the oracle below.

fn mean(seq: &[Frame]) -> Option<f64> {
    let p: Vec<f64> = seq.iter().flatten().copied().collect();
    if p.is_empty() {
        None
    } else {
        Some(p.iter().sum::<f64>() / p.len() as f64)
    }
}

fn delta(seq: &[Frame], i: usize) -> Option<f64> {
    if i == 0 {
        return seq[0].map(|_| 0.0);
    }
    match (seq[i - 1], seq[i]) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    }
}

fn sub_cost(x: &[Frame], i: usize, y: &[Frame], j: usize) -> f64 {
    let pit = match (x[i], y[j]) {
        (Some(a), Some(b)) => (a - b).abs(),
        (None, None) => 0.0,
        _ => 12.0,
    };
    let dir = match (delta(x, i), delta(y, j)) {
        (None, None) => 0.0,
        (Some(a), Some(b)) if a == b || a * b > 0.0 => 0.0,
        (Some(a), Some(b)) if a * b < 0.0 => 2.0,
        (Some(_), Some(_)) => 1.0,
        _ => 2.0,
    };
    pit + 2.0 * dir
}

fn ins_cost(p: Frame, other: &[Frame]) -> f64 {
    match (p, mean(other)) {
        (None, _) => 10.0,
        (Some(v), Some(m)) => (v - m).abs(),
        (Some(_), None) => 12.0,
    }
}

/// Cheapest monotone alignment of all of `x` with the first `m` frames of
/// `y`, by enumerating every path. Costs accumulate from the start of the
/// path, so equal paths give bit-identical sums.
pub fn dtw_oracle(x: &[Frame], y: &[Frame], m: usize) -> f64 {
    fn go(x: &[Frame], y: &[Frame], i: usize, j: usize, n: usize, m: usize, acc: f64, best: &mut f64) {
        if i == n && j == m {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i < n && j < m {
            go(x, y, i + 1, j + 1, n, m, acc + sub_cost(x, i, y, j), best);
        }
        if i < n {
            go(x, y, i + 1, j, n, m, acc + ins_cost(x[i], y), best);
        }
        if j < m {
            go(x, y, i, j + 1, n, m, acc + ins_cost(y[j], x), best);
        }
    }
    let mut best = f64::INFINITY;
    go(x, y, 0, 0, x.len(), m, 0.0, &mut best);
    best
}

pub fn random_matrices<R: Rng>(rng: &mut R) -> ChordToneMatrices {
    let mut row = || {
        // Coarse values so that exact ties occur now and then.
        let mut r = [0.0; 4];
        for x in r.iter_mut() {
            *x = rng.gen_range(0..=4) as f64;
        }
        if r.iter().all(|&x| x == 0.0) {
            r[0] = 1.0;
        }
        let s: f64 = r.iter().sum();
        r.map(|x| x / s)
    };
    let ctf = (0..16).map(|_| row()).collect();
    let ctt = (0..16).map(|_| [row(), row(), row(), row()]).collect();
    ChordToneMatrices { ctf, ctt }
}

/// Log-likelihood restated: P(c_k) at the last onset, then for each earlier
/// note P(c_i) and the transition to the next category, nested from the end.
pub fn log_likelihood(onsets: &[u8], cats: &[usize], m: &ChordToneMatrices) -> f64 {
    let k = cats.len();
    let mut acc = m.ctf[onsets[k - 1] as usize][cats[k - 1]].ln();
    for i in (0..k - 1).rev() {
        let on = onsets[i] as usize;
        acc = m.ctf[on][cats[i]].ln() + (m.ctt[on][cats[i]][cats[i + 1]].ln() + acc);
    }
    acc
}

/// Exhaustive argmax over all 4^k sequences; the first maximum in
/// lexicographic order wins.
pub fn viterbi_oracle(onsets: &[u8], m: &ChordToneMatrices) -> Vec<Category> {
    let k = onsets.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for code in 0..4usize.pow(k as u32) {
        let cats: Vec<usize> = (0..k).rev().map(|i| (code / 4usize.pow(i as u32)) % 4).collect();
        let ll = log_likelihood(onsets, &cats, m);
        if best.as_ref().map_or(true, |(b, _)| ll > *b) {
            best = Some((ll, cats));
        }
    }
    best.unwrap().1.into_iter().map(Category::from_index).collect()
}

pub fn random_onsets<R: Rng>(rng: &mut R, k: usize) -> Vec<u8> {
    (0..k).map(|_| rng.gen_range(0..16)).collect()
}

/// The same tables with every pseudo count set to zero.
pub fn unsmoothed(t: &StatTables) -> StatTables {
    fn zero(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, x) in m.iter_mut() {
                    if k == "pseudo" {
                        *x = 0.0.into();
                    } else {
                        zero(x);
                    }
                }
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(zero),
            _ => {}
        }
    }
    let mut v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
    zero(&mut v);
    StatTables::from_json(&v.to_string()).unwrap()
}
