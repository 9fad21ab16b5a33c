//! Onset agreement between two rhythms on the sixteenth grid.

use std::collections::BTreeSet;

/// Share of the first `length` frames where both sets have an onset or
/// neither does. 1.0 for an empty range.
pub fn rhythm_similarity(a: &BTreeSet<u32>, b: &BTreeSet<u32>, length: u32) -> f64 {
    if length == 0 {
        return 1.0;
    }
    let agree = (0..length).filter(|t| a.contains(t) == b.contains(t)).count();
    agree as f64 / length as f64
}

/// Incremental form used by the sampler: agreement counts over a prefix of
/// the reference onset grid.
#[derive(Clone, Debug)]
pub struct RhythmGate {
    /// `silent_prefix[t]` = frames in `0..t` without a reference onset.
    silent_prefix: Vec<u32>,
    reference: Vec<bool>,
    agree: u32,
    pub threshold: f64,
}

impl RhythmGate {
    pub fn new(reference: &[bool], threshold: f64) -> Self {
        let mut silent_prefix = vec![0u32; reference.len() + 1];
        for (t, &on) in reference.iter().enumerate() {
            silent_prefix[t + 1] = silent_prefix[t] + u32::from(!on);
        }
        RhythmGate {
            silent_prefix,
            reference: reference.to_vec(),
            agree: 0,
            threshold,
        }
    }

    fn len(&self) -> u32 {
        self.reference.len() as u32
    }

    /// Agreements gained by a note at `pos` lasting `d` frames, counted
    /// within the reference, and the new end of the compared range.
    fn gain(&self, pos: u32, d: u32, pitched: bool) -> (u32, u32) {
        let end = (pos + d).min(self.len());
        if pos >= end {
            return (0, end);
        }
        let first = u32::from(self.reference[pos as usize] == pitched);
        let rest = self.silent_prefix[end as usize] - self.silent_prefix[pos as usize + 1];
        (first + rest, end)
    }

    /// Accuracy after adding the note, or `None` once past the reference.
    pub fn accuracy(&self, pos: u32, d: u32, pitched: bool) -> Option<f64> {
        if pos >= self.len() {
            return None;
        }
        let (g, end) = self.gain(pos, d, pitched);
        Some((self.agree + g) as f64 / end as f64)
    }

    pub fn passes(&self, pos: u32, d: u32, pitched: bool) -> bool {
        self.accuracy(pos, d, pitched).map_or(true, |a| a >= self.threshold)
    }

    pub fn commit(&mut self, pos: u32, d: u32, pitched: bool) {
        self.agree += self.gain(pos, d, pitched).0;
    }
}
