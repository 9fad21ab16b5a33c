//! Rating functions for a candidate next melody note. Each returns a
//! nonnegative weight; the sampler multiplies them.

use crate::corpusstats::{blend, tempo_bucket, BlendParam, Dist, StatTables, INTERVAL_OFFSET};
use crate::songmodel::{ChordSymbol, Degree, BAR};

/// Seed and general statistics as seen by the melody ratings.
#[derive(Clone, Debug)]
pub struct MelodyStyle {
    pub alpha: f64,
    /// Raw seed counts.
    pub seed: StatTables,
    /// Seed and general tables blended with `alpha`.
    pub blended: StatTables,
    /// General duration frequencies for the seed's tempo bucket.
    pub general_dur: Dist,
    /// The seed lets melody notes sound across chord changes.
    pub allow_spans: bool,
}

impl MelodyStyle {
    pub fn new(seed: &StatTables, general: &StatTables, alpha: BlendParam, tempo: u32) -> Self {
        MelodyStyle {
            alpha: alpha.get(),
            seed: seed.clone(),
            blended: blend(seed, general, alpha),
            general_dur: general.dur_freq_by_tempo.row(tempo_bucket(tempo)).clone(),
            allow_spans: seed.chord_spans > 0.0,
        }
    }

    /// Probability of pitch `p` under chord `c`, blended.
    pub fn p_har(&self, p: Degree, c: ChordSymbol) -> f64 {
        self.blended.pitch_given_chord.prob(c.index(), p.get() as usize - 1)
    }

    /// Share of pitched notes and of rests, blended.
    pub fn group_shares(&self) -> (f64, f64) {
        (self.blended.rest_share.prob(0), self.blended.rest_share.prob(1))
    }
}

fn iv_index(delta: i32) -> usize {
    (delta + INTERVAL_OFFSET) as usize
}

pub fn rate_pitch_freq(style: &MelodyStyle, p: Degree) -> f64 {
    style.blended.pitch_freq.prob(p.get() as usize - 1)
}

pub fn rate_pitch_harmony(style: &MelodyStyle, p: Degree, c: ChordSymbol) -> f64 {
    style.p_har(p, c)
}

/// 1.0 when there is no previous pitched note in the section.
pub fn rate_interval_freq(style: &MelodyStyle, p: Degree, prev: Option<Degree>) -> f64 {
    match prev {
        None => 1.0,
        Some(q) => style
            .blended
            .interval_freq
            .prob(iv_index(p.get() as i32 - q.get() as i32)),
    }
}

/// Favours small intervals, upward leaps and small downward steps, and
/// leaps that land on pitches likely under the chord.
pub fn rate_interval_harmony(style: &MelodyStyle, p: Degree, prev: Option<Degree>, c: ChordSymbol) -> f64 {
    let Some(q) = prev else { return 1.0 };
    let delta = p.get() as i32 - q.get() as i32;
    let size = delta.abs() as f64;
    let base = 1.0 / (1.0 + size);
    let dir = if delta > 4 || (-2..0).contains(&delta) { 1.2 } else { 1.0 };
    let s = (size / 4.0).min(1.0);
    let harm = (1.0 - s) + s * (0.5 + style.p_har(p, c));
    base * dir * harm
}

/// Applies to notes starting on beat 1 or 3 only; elsewhere 1.0.
pub fn rate_downbeat(style: &MelodyStyle, p: Degree, d: u8, c: ChordSymbol, onset: u8) -> f64 {
    if onset != 0 && onset != 8 {
        return 1.0;
    }
    if c.contains(p) {
        return 1.0;
    }
    let row = style.seed.nonchord_downbeat.row(d as usize - 1);
    let p_non = if row.is_empty() { 0.0 } else { row.prob(1) };
    (1.0 - style.alpha) * 1.4 / d as f64 + style.alpha * p_non
}

pub fn rate_dur_freq(style: &MelodyStyle, d: u8) -> f64 {
    let i = d as usize - 1;
    let general = style.general_dur.prob(i);
    if style.seed.dur_freq.is_empty() {
        general
    } else {
        style.alpha * style.seed.dur_freq.prob(i) + (1.0 - style.alpha) * general
    }
}

/// Duration `d` after a note (or rest) of duration `prev`.
pub fn rate_dur_trans(style: &MelodyStyle, d: u8, prev: Option<u8>) -> f64 {
    match prev {
        None => 1.0,
        Some(q) => style.blended.dur_trans.prob(q as usize - 1, d as usize - 1),
    }
}

/// Rests in the last bar of a section are always welcome.
pub fn rate_rest_dur(style: &MelodyStyle, d: u8, section_end: bool) -> f64 {
    if section_end {
        return 1.0;
    }
    let seed = if style.seed.rest_dur.is_empty() {
        0.0
    } else {
        style.seed.rest_dur.prob(d as usize - 1)
    };
    style.alpha * seed + (1.0 - style.alpha) / d as f64
}

/// Rule forbidding even durations that start on an odd sixteenth.
pub fn pos_dur_general(d: u8, onset: u8) -> f64 {
    if onset % 2 == 1 && d % 2 == 0 {
        0.0
    } else {
        1.0
    }
}

/// Seed duration statistics at `onset`, smoothed over positions that are
/// equivalent modulo 2, 4, 8 and 16 with weights 2/16, 4/16, 8/16, 16/16.
pub fn pos_dur_seed(seed: &StatTables, d: u8, onset: u8) -> f64 {
    let mut sum = 0.0;
    for i in 1..=4u32 {
        let m = 1u32 << i;
        let w = m as f64 / 16.0;
        for j in (0..BAR).filter(|j| j % m == onset as u32 % m) {
            let row = seed.pos_dur.row(j as usize);
            if !row.is_empty() {
                sum += w * row.prob(d as usize - 1);
            }
        }
    }
    sum
}

pub fn rate_pos_dur(style: &MelodyStyle, d: u8, onset: u8) -> f64 {
    let general = pos_dur_general(d, onset);
    if style.seed.pos_dur.rows.iter().all(|r| r.is_empty()) {
        return general;
    }
    style.alpha * pos_dur_seed(&style.seed, d, onset) + (1.0 - style.alpha) * general
}

/// Long notes lean towards chord tones, short notes away from them.
pub fn rate_harmony_dur(style: &MelodyStyle, p: Degree, d: u8, c: ChordSymbol) -> f64 {
    ((style.p_har(p, c) - 0.5) * (d as f64 / 4.0).log2() + 1.0) / 2.0
}

/// Interval from the previous pitched note given that note's duration.
pub fn rate_interval_dur(style: &MelodyStyle, p: Degree, prev: Option<(Degree, u8)>) -> f64 {
    match prev {
        None => 1.0,
        Some((q, qd)) => style
            .blended
            .interval_given_dur
            .prob(qd as usize - 1, iv_index(p.get() as i32 - q.get() as i32)),
    }
}

/// A note sounding from `start` (sixteenths into the section) for `d`
/// sixteenths may cross a chord change only if the seed does so.
pub fn allow_span_chord_change(allow_spans: bool, chords: &[ChordSymbol], start: u32, d: u8) -> bool {
    if allow_spans {
        return true;
    }
    let first = (start / BAR) as usize;
    let last = ((start + d as u32 - 1) / BAR) as usize;
    chords[first..=last].iter().all(|&c| c == chords[first])
}

/// Sections closing on V-I must end their melody on a tonic.
pub fn is_pac(chords: &[ChordSymbol]) -> bool {
    chords.ends_with(&[ChordSymbol::V, ChordSymbol::I])
}

pub const TONICS: [u8; 3] = [1, 8, 15];
pub const MIN_FINAL_DURATION: u8 = 4;

/// Ending constraint for a perfect-authentic-cadence section: the note that
/// ends the section is a tonic of at least four sixteenths, so any earlier
/// note must leave at least that much room.
pub fn force_section_ending(pitch: Option<Degree>, d: u8, remaining: u32) -> bool {
    if d as u32 == remaining {
        pitch.is_some_and(|p| TONICS.contains(&p.get())) && d >= MIN_FINAL_DURATION
    } else {
        remaining - d as u32 >= MIN_FINAL_DURATION as u32
    }
}

/// Individual factors of one candidate note; pitch factors are 1 for rests.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Factors {
    pub pitch_freq: f64,
    pub pitch_harmony: f64,
    pub interval_freq: f64,
    pub interval_harmony: f64,
    pub downbeat: f64,
    pub dur_freq: f64,
    pub dur_trans: f64,
    pub rest_dur: f64,
    pub pos_dur: f64,
    pub harmony_dur: f64,
    pub interval_dur: f64,
    pub contour: f64,
}

pub const FACTOR_NAMES: [&str; 12] = [
    "pitch_freq",
    "pitch_harmony",
    "interval_freq",
    "interval_harmony",
    "downbeat",
    "dur_freq",
    "dur_trans",
    "rest_dur",
    "pos_dur",
    "harmony_dur",
    "interval_dur",
    "contour",
];

impl Factors {
    pub fn ones() -> Self {
        Factors {
            pitch_freq: 1.0,
            pitch_harmony: 1.0,
            interval_freq: 1.0,
            interval_harmony: 1.0,
            downbeat: 1.0,
            dur_freq: 1.0,
            dur_trans: 1.0,
            rest_dur: 1.0,
            pos_dur: 1.0,
            harmony_dur: 1.0,
            interval_dur: 1.0,
            contour: 1.0,
        }
    }

    pub fn values(&self) -> [f64; 12] {
        [
            self.pitch_freq,
            self.pitch_harmony,
            self.interval_freq,
            self.interval_harmony,
            self.downbeat,
            self.dur_freq,
            self.dur_trans,
            self.rest_dur,
            self.pos_dur,
            self.harmony_dur,
            self.interval_dur,
            self.contour,
        ]
    }

    pub fn product(&self) -> f64 {
        self.values().iter().product()
    }
}

/// Everything the ratings need to know about the position being filled.
#[derive(Clone, Copy, Debug)]
pub struct RatingContext {
    /// Onset within the bar.
    pub onset: u8,
    pub chord: ChordSymbol,
    /// Previous note or rest duration in this section.
    pub prev_dur: Option<u8>,
    /// Previous pitched note in this section and its duration.
    pub prev_pitched: Option<(Degree, u8)>,
    /// The note starts in the section's last bar.
    pub in_last_bar: bool,
}

/// Rating factors of a pitched note or (with `pitch = None`) a rest,
/// excluding contour.
pub fn rate_note(style: &MelodyStyle, ctx: &RatingContext, pitch: Option<Degree>, d: u8) -> Factors {
    let mut f = Factors::ones();
    f.dur_trans = rate_dur_trans(style, d, ctx.prev_dur);
    f.pos_dur = rate_pos_dur(style, d, ctx.onset);
    match pitch {
        None => f.rest_dur = rate_rest_dur(style, d, ctx.in_last_bar),
        Some(p) => {
            let prev = ctx.prev_pitched.map(|x| x.0);
            f.pitch_freq = rate_pitch_freq(style, p);
            f.pitch_harmony = rate_pitch_harmony(style, p, ctx.chord);
            f.interval_freq = rate_interval_freq(style, p, prev);
            f.interval_harmony = rate_interval_harmony(style, p, prev, ctx.chord);
            f.downbeat = rate_downbeat(style, p, d, ctx.chord, ctx.onset);
            f.dur_freq = rate_dur_freq(style, d);
            f.harmony_dur = rate_harmony_dur(style, p, d, ctx.chord);
            f.interval_dur = rate_interval_dur(style, p, ctx.prev_pitched);
        }
    }
    f
}
