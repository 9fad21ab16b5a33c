//! Melody contour similarity: dynamic time warping over per-sixteenth pitch
//! frames, compared against a flat melody at the seed's average pitch.

use crate::error::{Error, Result};
use crate::songmodel::{frames, Note, Pitch};

/// Pitch of one sixteenth, `None` for a rest. Real-valued so that a flat
/// melody can sit at a non-integer average pitch.
pub type Frame = Option<f64>;

pub const W_PITCH: f64 = 1.0;
pub const W_DIRECTION: f64 = 2.0;
pub const REST_PITCH_DIST: f64 = 12.0;
pub const REST_INSERT_COST: f64 = 10.0;

pub fn pitch_frames(pitches: &[Pitch]) -> Vec<Frame> {
    pitches.iter().map(|p| p.as_degree().map(f64::from)).collect()
}

pub fn note_frames(notes: &[Note]) -> Vec<Frame> {
    pitch_frames(&frames(notes))
}

/// Mean of the pitched frames.
pub fn mean_pitch(seq: &[Frame]) -> Option<f64> {
    let (sum, n) = seq
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), &p| (s + p, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Melodic motion into `cur` from `prev`; `None` when either is a rest.
fn motion(prev: Frame, cur: Frame) -> Option<f64> {
    Some(prev? - cur?)
}

/// Motion into frame `i`; the first frame counts as no motion.
fn motion_at(seq: &[Frame], i: usize) -> Option<f64> {
    if i == 0 {
        seq[0].map(|_| 0.0)
    } else {
        motion(seq[i - 1], seq[i])
    }
}

/// Two rests match at no cost; a rest against a pitch costs an octave.
pub fn dist_pit(a: Frame, b: Frame) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs(),
        (None, None) => 0.0,
        _ => REST_PITCH_DIST,
    }
}

/// 0 for equal or same-signed motions, 2 for opposite motions or a rest on
/// one side only, 1 when exactly one motion is zero.
pub fn dist_dir(d1: Option<f64>, d2: Option<f64>) -> f64 {
    match (d1, d2) {
        (None, None) => 0.0,
        (None, _) | (_, None) => 2.0,
        (Some(a), Some(b)) => {
            if a == b || a * b > 0.0 {
                0.0
            } else if a * b < 0.0 {
                2.0
            } else {
                1.0
            }
        }
    }
}

pub fn cost_sub(x: Frame, dx: Option<f64>, y: Frame, dy: Option<f64>) -> f64 {
    W_PITCH * dist_pit(x, y) + W_DIRECTION * dist_dir(dx, dy)
}

/// Cost of inserting `p` against a sequence whose mean pitch is `other_mean`.
/// A sequence without pitches is treated as a rest for this purpose.
pub fn cost_ins(p: Frame, other_mean: Option<f64>) -> f64 {
    match (p, other_mean) {
        (None, _) => REST_INSERT_COST,
        (Some(v), Some(m)) => (v - m).abs(),
        (Some(_), None) => REST_PITCH_DIST,
    }
}

/// Full DTW table: entry `[i][j]` aligns the first `i` frames of `x` with
/// the first `j` of `y`. Insertion costs use the whole sequences' means.
pub fn dtw_table(x: &[Frame], y: &[Frame]) -> Vec<Vec<f64>> {
    let (xm, ym) = (mean_pitch(x), mean_pitch(y));
    let mut t = vec![vec![0.0; y.len() + 1]; x.len() + 1];
    for j in 1..=y.len() {
        t[0][j] = t[0][j - 1] + cost_ins(y[j - 1], xm);
    }
    for i in 1..=x.len() {
        t[i][0] = t[i - 1][0] + cost_ins(x[i - 1], ym);
        let dx = motion_at(x, i - 1);
        for j in 1..=y.len() {
            let sub = t[i - 1][j - 1] + cost_sub(x[i - 1], dx, y[j - 1], motion_at(y, j - 1));
            let del = t[i - 1][j] + cost_ins(x[i - 1], ym);
            let ins = t[i][j - 1] + cost_ins(y[j - 1], xm);
            t[i][j] = sub.min(del).min(ins);
        }
    }
    t
}

pub fn dtw_distance(x: &[Frame], y: &[Frame]) -> f64 {
    dtw_table(x, y)[x.len()][y.len()]
}

/// Smallest `row[j]` over `j >= 1`, with the earliest such `j`.
fn best_prefix(row: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 1);
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, j);
        }
    }
    best
}

fn ratio_similarity(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - a / b).max(0.0)
    }
}

/// Similarity in [0, 1] of `generated` to the best-matching prefix of `seed`,
/// relative to a flat melody at the seed's average pitch.
pub fn contour_similarity(generated: &[Frame], seed: &[Frame]) -> Result<f64> {
    let avg = mean_pitch(seed).ok_or(Error::EmptySeedMelody)?;
    if generated.is_empty() {
        return Ok(1.0);
    }
    let n = generated.len();
    let (a, j) = best_prefix(&dtw_table(generated, seed)[n]);
    let flat = vec![Some(avg); n];
    let b = dtw_table(&flat, seed)[n][j];
    Ok(ratio_similarity(a, b))
}

/// Aligned seed section prepared for incremental contour and rhythm checks.
#[derive(Clone, Debug)]
pub struct Reference {
    pub frames: Vec<Frame>,
    motions: Vec<Option<f64>>,
    /// Onset at each sixteenth of the seed section.
    pub onsets: Vec<bool>,
    pub avg: f64,
    /// DTW table of a flat melody at `avg` against `frames`.
    pub flat: Vec<Vec<f64>>,
}

impl Reference {
    /// `None` when the seed section has no pitched note.
    pub fn new(seed_notes: &[Note], max_frames: usize) -> Option<Self> {
        let frames = note_frames(seed_notes);
        let avg = mean_pitch(&frames)?;
        let mut onsets = vec![false; frames.len()];
        for o in crate::songmodel::onsets(seed_notes) {
            onsets[o as usize] = true;
        }
        let flat = dtw_table(&vec![Some(avg); max_frames], &frames);
        let motions = (0..frames.len()).map(|j| motion_at(&frames, j)).collect();
        Some(Reference {
            frames,
            motions,
            onsets,
            avg,
            flat,
        })
    }
}

/// DTW rows grown one generated frame at a time. Inserting a seed frame
/// costs its distance to the mean of the generated pitches so far (the seed
/// average before any pitch has been generated).
#[derive(Clone, Debug)]
pub struct OnlineContour {
    rows: Vec<Vec<f64>>,
    last: Frame,
    sum: f64,
    count: usize,
}

impl OnlineContour {
    pub fn new(r: &Reference) -> Self {
        let mut row0 = vec![0.0; r.frames.len() + 1];
        for j in 1..row0.len() {
            row0[j] = row0[j - 1] + cost_ins(r.frames[j - 1], Some(r.avg));
        }
        OnlineContour {
            rows: vec![row0],
            last: None,
            sum: 0.0,
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len() - 1
    }

    /// Rows for `k` more frames of `p` on top of the committed rows.
    pub fn extend(&self, r: &Reference, p: Frame, k: usize) -> Vec<Vec<f64>> {
        let y = &r.frames;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
        let (mut sum, mut count) = (self.sum, self.count);
        let mut prev_frame = self.last;
        for step in 0..k {
            let i = self.len() + step; // index of the frame being added
            if let Some(v) = p {
                sum += v;
                count += 1;
            }
            let xm = if count > 0 { sum / count as f64 } else { r.avg };
            let dx = if i == 0 { p.map(|_| 0.0) } else { motion(prev_frame, p) };
            let prev = out.last().unwrap_or_else(|| self.rows.last().unwrap());
            let del_cost = cost_ins(p, Some(r.avg));
            let mut row = vec![0.0; y.len() + 1];
            row[0] = prev[0] + del_cost;
            for j in 1..=y.len() {
                let sub = prev[j - 1] + cost_sub(p, dx, y[j - 1], r.motions[j - 1]);
                let del = prev[j] + del_cost;
                let ins = row[j - 1] + cost_ins(y[j - 1], Some(xm));
                row[j] = sub.min(del).min(ins);
            }
            out.push(row);
            prev_frame = p;
        }
        out
    }

    /// Similarity after the generated melody reaches `row` (covering `n` frames).
    pub fn similarity(r: &Reference, row: &[f64], n: usize) -> f64 {
        let (a, j) = best_prefix(row);
        ratio_similarity(a, r.flat[n][j])
    }

    pub fn commit(&mut self, p: Frame, rows: &[Vec<f64>]) {
        for _ in rows {
            if let Some(v) = p {
                self.sum += v;
                self.count += 1;
            }
        }
        self.rows.extend_from_slice(rows);
        if !rows.is_empty() {
            self.last = p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: &[i32]) -> Vec<Frame> {
        v.iter().map(|&x| if x == 0 { None } else { Some(x as f64) }).collect()
    }

    #[test]
    fn identical_is_one() {
        let y = f(&[1, 1, 3, 3, 5, 0, 5, 4]);
        assert_eq!(dtw_distance(&y, &y), 0.0);
        assert_eq!(contour_similarity(&y, &y).unwrap(), 1.0);
        assert_eq!(contour_similarity(&y[..3], &y).unwrap(), 1.0);
    }

    #[test]
    fn flat_is_zero() {
        let y = f(&[2, 4, 6, 4]);
        let flat = f(&[4, 4, 4, 4]);
        assert_eq!(contour_similarity(&flat, &y).unwrap(), 0.0);
        assert!(contour_similarity(&flat, &f(&[0, 0])).is_err());
    }

    #[test]
    fn direction_costs() {
        assert_eq!(dist_dir(Some(1.0), Some(3.0)), 0.0);
        assert_eq!(dist_dir(Some(-1.0), Some(3.0)), 2.0);
        assert_eq!(dist_dir(Some(0.0), Some(3.0)), 1.0);
        assert_eq!(dist_dir(Some(0.0), Some(0.0)), 0.0);
        assert_eq!(dist_dir(None, Some(0.0)), 2.0);
        assert_eq!(cost_ins(None, Some(3.0)), 10.0);
        assert_eq!(cost_ins(Some(5.0), Some(3.5)), 1.5);
    }

    #[test]
    fn online_rows_match_full_table_for_constant_mean() {
        // With a constant generated pitch the running mean equals the full mean.
        let seed_notes: Vec<Note> = crate::songmodel::parse_text_score(
            "#SECTION A 1 var=no\n1___3___5___3___ | I | 1_______________\n",
        )
        .unwrap()
        .melody()
        .to_vec();
        let r = Reference::new(&seed_notes, 16).unwrap();
        let oc = OnlineContour::new(&r);
        let rows = oc.extend(&r, Some(3.0), 6);
        let x = vec![Some(3.0); 6];
        let full = dtw_table(&x, &r.frames);
        assert_eq!(rows[5], full[6]);
    }
}
