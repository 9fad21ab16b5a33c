//! Left-to-right note sampling for one section and best-of-N selection.

use rand::Rng;
use rayon::prelude::*;

use super::contour::{OnlineContour, Reference};
use super::ratings::*;
use super::rhythm::RhythmGate;
use crate::error::{Error, Result};
use crate::rng::{stream, weighted_index};
use crate::songmodel::{ChordSymbol, Degree, Duration, Note, Pitch, BAR};

pub const DEFAULT_RHYTHM_THRESHOLD: f64 = 0.6;
pub const DEFAULT_CANDIDATES: usize = 30;
/// Lowest contour factor, so a poor early match never rules a note out.
pub const CONTOUR_FLOOR: f64 = 0.05;
/// Factors are floored here before taking logs when scoring.
pub const LOG_FLOOR: f64 = 1e-9;
/// Duration of the forced note when nothing else is possible.
const FALLBACK_DURATION: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MelodyConfig {
    pub rhythm_threshold: f64,
    pub candidates: usize,
}

impl Default for MelodyConfig {
    fn default() -> Self {
        MelodyConfig {
            rhythm_threshold: DEFAULT_RHYTHM_THRESHOLD,
            candidates: DEFAULT_CANDIDATES,
        }
    }
}

/// What one section's melody is generated against.
#[derive(Clone, Debug)]
pub struct SectionPlan {
    /// One chord per bar.
    pub chords: Vec<ChordSymbol>,
    /// Aligned seed section, if any and if it has a pitched note.
    pub reference: Option<Reference>,
}

impl SectionPlan {
    pub fn new(chords: Vec<ChordSymbol>, seed_notes: Option<&[Note]>) -> Self {
        let frames = chords.len() * BAR as usize;
        let reference = seed_notes.and_then(|n| Reference::new(n, frames));
        SectionPlan { chords, reference }
    }

    pub fn frames(&self) -> u32 {
        self.chords.len() as u32 * BAR
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateMelody {
    pub notes: Vec<Note>,
    /// Mean per-note log weight.
    pub score: f64,
}

/// One possible next note.
#[derive(Clone, Debug)]
pub struct NoteOption {
    pub pitch: Option<Degree>,
    pub duration: u8,
    pub factors: Factors,
    /// Passes every hard rule, including the rhythm gate.
    pub allowed: bool,
    /// Passes every hard rule except the rhythm gate.
    pub allowed_relaxed: bool,
}

/// All options at one position.
#[derive(Clone, Debug)]
pub struct Step {
    pub options: Vec<NoteOption>,
    /// Shares of the pitched and rest groups.
    pub shares: [f64; 2],
}

fn group(pitch: Option<Degree>) -> usize {
    usize::from(pitch.is_none())
}

/// Log of each rating factor of one note. They sum to the note's log weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoteScore {
    pub factors: [f64; 12],
}

impl NoteScore {
    pub fn total(&self) -> f64 {
        self.factors.iter().sum()
    }
}

impl Step {
    pub fn find(&self, pitch: Option<Degree>, duration: u8) -> Option<usize> {
        self.options
            .iter()
            .position(|o| o.pitch == pitch && o.duration == duration)
    }

    pub fn score(&self, i: usize) -> NoteScore {
        let mut factors = [0.0; 12];
        for (l, v) in factors.iter_mut().zip(self.options[i].factors.values()) {
            *l = v.max(LOG_FLOOR).ln();
        }
        NoteScore { factors }
    }

    /// Sampling probabilities: each group keeps its share, split within the
    /// group by weight. A group without allowed weight passes its share on.
    pub fn probabilities(&self, relaxed: bool) -> Vec<f64> {
        let ok = |o: &NoteOption| if relaxed { o.allowed_relaxed } else { o.allowed };
        let w: Vec<f64> = self
            .options
            .iter()
            .map(|o| if ok(o) { o.factors.product() } else { 0.0 })
            .collect();
        let mut sums = [0.0; 2];
        for (o, &x) in self.options.iter().zip(&w) {
            sums[group(o.pitch)] += x;
        }
        let mut shares = self.shares;
        match (sums[0] > 0.0, sums[1] > 0.0) {
            (true, false) => shares = [1.0, 0.0],
            (false, true) => shares = [0.0, 1.0],
            (false, false) => return vec![0.0; w.len()],
            _ => {}
        }
        self.options
            .iter()
            .zip(&w)
            .map(|(o, &x)| {
                let g = group(o.pitch);
                if x > 0.0 {
                    shares[g] * x / sums[g]
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Walks through one section note by note, tracking the context the
/// ratings look back on. Shared by sampling and scoring.
#[derive(Clone, Debug)]
pub struct Stepper<'a> {
    style: &'a MelodyStyle,
    plan: &'a SectionPlan,
    pos: u32,
    prev_dur: Option<u8>,
    prev_pitched: Option<(Degree, u8)>,
    prev_rest: bool,
    contour: Option<OnlineContour>,
    gate: Option<RhythmGate>,
    pac: bool,
}

impl<'a> Stepper<'a> {
    pub fn new(style: &'a MelodyStyle, plan: &'a SectionPlan, rhythm_threshold: f64) -> Self {
        Stepper {
            style,
            plan,
            pos: 0,
            prev_dur: None,
            prev_pitched: None,
            prev_rest: false,
            contour: plan.reference.as_ref().map(OnlineContour::new),
            gate: plan
                .reference
                .as_ref()
                .map(|r| RhythmGate::new(&r.onsets, rhythm_threshold)),
            pac: is_pac(&plan.chords),
        }
    }

    pub fn position(&self) -> u32 {
        self.pos
    }

    pub fn done(&self) -> bool {
        self.pos >= self.plan.frames()
    }

    fn context(&self) -> RatingContext {
        let bar = (self.pos / BAR) as usize;
        RatingContext {
            onset: (self.pos % BAR) as u8,
            chord: self.plan.chords[bar],
            prev_dur: self.prev_dur,
            prev_pitched: self.prev_pitched,
            in_last_bar: bar + 1 == self.plan.chords.len(),
        }
    }

    /// Contour factor for each duration 1..=max_d of `pitch`.
    fn contour_factors(&self, pitch: Option<Degree>, max_d: u8) -> Vec<f64> {
        match (&self.contour, &self.plan.reference) {
            (Some(c), Some(r)) => {
                let frame = pitch.map(|p| p.get() as f64);
                c.extend(r, frame, max_d as usize)
                    .iter()
                    .enumerate()
                    .map(|(k, row)| {
                        let n = self.pos as usize + k + 1;
                        OnlineContour::similarity(r, row, n).max(CONTOUR_FLOOR)
                    })
                    .collect()
            }
            _ => vec![1.0; max_d as usize],
        }
    }

    pub fn step(&self) -> Step {
        let style = self.style;
        let ctx = self.context();
        let remaining = self.plan.frames() - self.pos;
        let max_pitched = remaining.min(MAX_NOTE) as u8;
        let max_rest = remaining.min(BAR - ctx.onset as u32) as u8;

        // Factors that depend on duration alone are shared by every pitch.
        let by_dur: Vec<Factors> = (1..=max_pitched).map(|d| rate_note(style, &ctx, None, d)).collect();
        let dur_freq: Vec<f64> = (1..=max_pitched).map(|d| rate_dur_freq(style, d)).collect();

        let mut options = Vec::with_capacity(15 * max_pitched as usize + max_rest as usize);
        for p in Degree::all() {
            let contour = self.contour_factors(Some(p), max_pitched);
            let prev = ctx.prev_pitched.map(|x| x.0);
            let pitch_freq = rate_pitch_freq(style, p);
            let pitch_harmony = rate_pitch_harmony(style, p, ctx.chord);
            let interval_freq = rate_interval_freq(style, p, prev);
            let interval_harmony = rate_interval_harmony(style, p, prev, ctx.chord);
            let interval_dur = rate_interval_dur(style, p, ctx.prev_pitched);
            for d in 1..=max_pitched {
                let base = &by_dur[d as usize - 1];
                let f = Factors {
                    pitch_freq,
                    pitch_harmony,
                    interval_freq,
                    interval_harmony,
                    downbeat: rate_downbeat(style, p, d, ctx.chord, ctx.onset),
                    dur_freq: dur_freq[d as usize - 1],
                    dur_trans: base.dur_trans,
                    rest_dur: 1.0,
                    pos_dur: base.pos_dur,
                    harmony_dur: rate_harmony_dur(style, p, d, ctx.chord),
                    interval_dur,
                    contour: contour[d as usize - 1],
                };
                options.push(self.option(Some(p), d, f, remaining));
            }
        }
        let contour = self.contour_factors(None, max_rest);
        for d in 1..=max_rest {
            let mut f = by_dur[d as usize - 1];
            f.contour = contour[d as usize - 1];
            options.push(self.option(None, d, f, remaining));
        }
        let (pitched, rest) = style.group_shares();
        Step {
            options,
            shares: [pitched, rest],
        }
    }

    fn option(&self, pitch: Option<Degree>, d: u8, factors: Factors, remaining: u32) -> NoteOption {
        let onset = self.pos % BAR;
        let rules = match pitch {
            Some(_) => allow_span_chord_change(self.style.allow_spans, &self.plan.chords, self.pos, d),
            // Rests never follow a rest within a bar, so output stays canonical.
            None => !(self.prev_rest && onset != 0),
        } && (!self.pac || force_section_ending(pitch, d, remaining));
        let rhythm = self
            .gate
            .as_ref()
            .map_or(true, |g| g.passes(self.pos, d as u32, pitch.is_some()));
        NoteOption {
            pitch,
            duration: d,
            factors,
            allowed: rules && rhythm,
            allowed_relaxed: rules,
        }
    }

    /// Note used when every option is ruled out: a chord tone (the tonic in
    /// a cadence section) with the allowed duration closest to a quarter.
    pub fn fallback(&self) -> (Degree, u8) {
        let ctx = self.context();
        let remaining = self.plan.frames() - self.pos;
        let pitch = if self.pac {
            Degree::new(8).unwrap()
        } else {
            Degree::new(ctx.chord.root() + 7).unwrap()
        };
        let ok = |d: u8| {
            allow_span_chord_change(self.style.allow_spans, &self.plan.chords, self.pos, d)
                && (!self.pac || force_section_ending(Some(pitch), d, remaining))
        };
        let mut ds: Vec<u8> = (1..=remaining.min(MAX_NOTE) as u8).collect();
        ds.sort_by_key(|&d| ((d as i32 - FALLBACK_DURATION as i32).abs(), d));
        let d = ds.into_iter().find(|&d| ok(d)).unwrap_or(remaining.min(MAX_NOTE) as u8);
        (pitch, d)
    }

    pub fn commit(&mut self, pitch: Option<Degree>, d: u8) {
        if let (Some(c), Some(r)) = (&mut self.contour, &self.plan.reference) {
            let frame = pitch.map(|p| p.get() as f64);
            let rows = c.extend(r, frame, d as usize);
            c.commit(frame, &rows);
        }
        if let Some(g) = &mut self.gate {
            g.commit(self.pos, d as u32, pitch.is_some());
        }
        self.prev_dur = Some(d);
        if let Some(p) = pitch {
            self.prev_pitched = Some((p, d));
        }
        self.prev_rest = pitch.is_none();
        self.pos += d as u32;
    }
}

const MAX_NOTE: u32 = 16;

fn note_at(pos: u32, pitch: Option<Degree>, d: u8) -> Note {
    let p = pitch.map_or(Pitch::Rest, Pitch::Degree);
    Note::new(p, Duration::new(d).expect("durations stay in 1..=16"), (pos % BAR) as u8)
}

fn check_plan(plan: &SectionPlan) -> Result<()> {
    if plan.chords.is_empty() {
        return Err(Error::invariant("melody section without chords"));
    }
    Ok(())
}

/// One candidate melody for a section.
pub fn sample_section_melody<R: Rng>(
    style: &MelodyStyle,
    plan: &SectionPlan,
    rhythm_threshold: f64,
    rng: &mut R,
) -> Result<CandidateMelody> {
    check_plan(plan)?;
    let mut st = Stepper::new(style, plan, rhythm_threshold);
    let mut notes = Vec::new();
    let mut total = 0.0;
    while !st.done() {
        let step = st.step();
        let pick = weighted_index(&step.probabilities(false), rng)
            .or_else(|| weighted_index(&step.probabilities(true), rng));
        let (pitch, d, score) = match pick {
            Some(i) => {
                let o = &step.options[i];
                (o.pitch, o.duration, step.score(i).total())
            }
            None => {
                let (p, d) = st.fallback();
                let i = step.find(Some(p), d).expect("fallback is among the options");
                (Some(p), d, step.score(i).total())
            }
        };
        notes.push(note_at(st.position(), pitch, d));
        total += score;
        st.commit(pitch, d);
    }
    let score = total / notes.len() as f64;
    Ok(CandidateMelody { notes, score })
}

/// Best of `cfg.candidates` samples; candidate `i` uses stream `i` of
/// `section_seed`, and ties go to the earliest candidate.
pub fn generate_section(style: &MelodyStyle, plan: &SectionPlan, cfg: &MelodyConfig, section_seed: u64) -> Result<CandidateMelody> {
    if cfg.candidates == 0 {
        return Err(Error::InvalidArgument("at least one melody candidate is needed".into()));
    }
    let all: Vec<CandidateMelody> = (0..cfg.candidates as u64)
        .into_par_iter()
        .map(|i| sample_section_melody(style, plan, cfg.rhythm_threshold, &mut stream(section_seed, i)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, c) in all.iter().enumerate() {
        if c.score > all[best].score {
            best = i;
        }
    }
    Ok(all.into_iter().nth(best).unwrap())
}

/// Per-note scores of an existing section melody under `style`.
pub fn score_section(style: &MelodyStyle, plan: &SectionPlan, notes: &[Note], rhythm_threshold: f64) -> Result<Vec<NoteScore>> {
    check_plan(plan)?;
    let mut st = Stepper::new(style, plan, rhythm_threshold);
    let mut out = Vec::with_capacity(notes.len());
    for (k, n) in notes.iter().enumerate() {
        if st.done() {
            return Err(Error::invariant(format!("note {k} lies past the end of the section")));
        }
        let pitch = n.pitch.as_degree().map(|v| Degree::new(v).expect("valid degree"));
        let step = st.step();
        let i = step
            .find(pitch, n.duration.get())
            .ok_or_else(|| Error::invariant(format!("note {k} does not fit the section")))?;
        out.push(step.score(i));
        st.commit(pitch, n.duration.get());
    }
    if !st.done() {
        return Err(Error::invariant("section melody is too short"));
    }
    Ok(out)
}
