//! Signal-quality metrics on an output-power trace: eye folding, level
//! statistics, Q factor, BER estimate and the error-free rate search.
//!
//! Folding is aligned to the transmitter's own bit clock (bit boundaries at
//! integer multiples of the bit period), so no clock recovery is involved.
//! Level statistics come from a window of +-10% of a bit period around each
//! bit center.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sim::{LinkScenario, Trace};

/// Q threshold for the "error-free" decision; the Gaussian BER 1e-12 point.
pub const DEFAULT_DECISION_Q: f64 = 7.03;

/// Floor on sigma_1 + sigma_0 as a fraction of the level separation, so Q
/// stays finite on noiseless traces.
const SIGMA_FLOOR_FRACTION: f64 = 1e-4;

/// Half-width of the level-measurement window, as a fraction of a UI.
const WINDOW_HALF_WIDTH: f64 = 0.1;

const MIN_BITS: usize = 32;
const MIN_POINTS_PER_UI: f64 = 20.0;
const MIN_LEVEL_SAMPLES: usize = 8;

/// One folded sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyePoint {
    /// Position within the folded two-UI span, in [0, 2).
    pub ui_fraction: f64,
    /// Optical power (W).
    pub power: f64,
    /// Logic level of the owning bit slot.
    pub level: u8,
}

/// Output of [`fold_eye`]: samples folded modulo two bit periods plus the
/// pooled mid-bit window samples per logic level.
#[derive(Debug, Clone)]
pub struct EyeAccumulation {
    /// Bit period (s).
    pub unit_interval: f64,
    /// Trace sample spacing (s).
    pub dt_sample: f64,
    pub points: Vec<EyePoint>,
    window_ones: Vec<f64>,
    window_zeros: Vec<f64>,
    /// Set when the trace carries no modulation at all.
    degenerate: bool,
}

/// Eye-quality summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeMetrics {
    /// Inner vertical opening at the bit center: min(ones) - max(zeros), W.
    pub eye_height: f64,
    /// Contiguous span around the bit center with positive opening (s).
    pub eye_width: f64,
    pub level_one_mean: f64,
    pub level_zero_mean: f64,
    pub level_one_std: f64,
    pub level_zero_std: f64,
    pub q_factor: f64,
    pub extinction_ratio: f64,
    pub ber_estimate: f64,
    pub error_free: bool,
}

/// Folds the output-power series modulo two bit periods and pools the
/// mid-bit window samples of each logic level.
///
/// Levels are assigned per bit slot by comparing the slot's window mean
/// against the midpoint of the trace's power range. Requires at least 32
/// complete bit periods and 20 samples per period.
pub fn fold_eye(trace: &Trace, bit_rate: f64) -> Result<EyeAccumulation> {
    if !(bit_rate > 0.0 && bit_rate.is_finite()) {
        return Err(Error::config("bit rate must be > 0"));
    }
    let ui = 1.0 / bit_rate;
    let points_per_ui = ui / trace.dt_sample;
    if points_per_ui < MIN_POINTS_PER_UI * (1.0 - 1e-9) {
        return Err(Error::InsufficientData(format!(
            "grid resolves {points_per_ui:.1} points per bit period, need >= {MIN_POINTS_PER_UI}"
        )));
    }
    if trace.is_empty() {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let t_last = trace.time_at(trace.len() - 1);
    let k_first = (trace.t0 / ui - 1e-9).ceil() as i64;
    let k_last = ((t_last + 1e-9 * ui) / ui).floor() as i64 - 1;
    let n_bits = k_last - k_first + 1;
    if n_bits < MIN_BITS as i64 {
        return Err(Error::InsufficientData(format!(
            "trace covers {n_bits} complete bit periods, need >= {MIN_BITS}"
        )));
    }

    let lo = trace.output_power.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = trace.output_power.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = hi - lo <= 1e-12 * hi.abs().max(1e-300);
    let threshold = 0.5 * (lo + hi);

    // classify each bit slot from its window mean
    let mut slot_level = vec![0u8; n_bits as usize];
    let mut windows: Vec<Vec<f64>> = vec![Vec::new(); n_bits as usize];
    for i in 0..trace.len() {
        let t = trace.time_at(i);
        let k = (t / ui).floor() as i64;
        if k < k_first || k > k_last {
            continue;
        }
        let frac = t / ui - k as f64;
        if (0.5 - WINDOW_HALF_WIDTH - 1e-9..=0.5 + WINDOW_HALF_WIDTH + 1e-9).contains(&frac) {
            windows[(k - k_first) as usize].push(trace.output_power[i]);
        }
    }
    for (slot, w) in windows.iter().enumerate() {
        if !w.is_empty() {
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            slot_level[slot] = u8::from(mean > threshold);
        }
    }

    let mut points = Vec::new();
    let mut window_ones = Vec::new();
    let mut window_zeros = Vec::new();
    for i in 0..trace.len() {
        let t = trace.time_at(i);
        let k = (t / ui).floor() as i64;
        if k < k_first || k > k_last {
            continue;
        }
        let level = slot_level[(k - k_first) as usize];
        let two_ui_pos = (t / ui) % 2.0;
        points.push(EyePoint { ui_fraction: two_ui_pos, power: trace.output_power[i], level });
        let frac = t / ui - k as f64;
        if (0.5 - WINDOW_HALF_WIDTH - 1e-9..=0.5 + WINDOW_HALF_WIDTH + 1e-9).contains(&frac) {
            if level == 1 {
                window_ones.push(trace.output_power[i]);
            } else {
                window_zeros.push(trace.output_power[i]);
            }
        }
    }

    Ok(EyeAccumulation {
        unit_interval: ui,
        dt_sample: trace.dt_sample,
        points,
        window_ones,
        window_zeros,
        degenerate,
    })
}

/// Level statistics and the error-free decision for a folded eye.
///
/// A degenerate (unmodulated) accumulation yields a closed eye: Q = 0,
/// BER 0.5, extinction ratio 1, zero eye height. Otherwise both levels
/// must contribute at least 8 window samples.
pub fn eye_metrics(eye: &EyeAccumulation, decision_q: f64) -> Result<EyeMetrics> {
    if eye.degenerate {
        let level = eye.points.first().map(|p| p.power).unwrap_or(0.0);
        return Ok(EyeMetrics {
            eye_height: 0.0,
            eye_width: 0.0,
            level_one_mean: level,
            level_zero_mean: level,
            level_one_std: 0.0,
            level_zero_std: 0.0,
            q_factor: 0.0,
            extinction_ratio: 1.0,
            ber_estimate: 0.5,
            error_free: false,
        });
    }
    if eye.window_ones.len() < MIN_LEVEL_SAMPLES || eye.window_zeros.len() < MIN_LEVEL_SAMPLES {
        return Err(Error::MissingLevel(format!(
            "window samples: {} ones, {} zeros (need >= {MIN_LEVEL_SAMPLES} each)",
            eye.window_ones.len(),
            eye.window_zeros.len()
        )));
    }

    let (mut ones, mut zeros) = (&eye.window_ones, &eye.window_zeros);
    let (mut m1, s1) = mean_std(ones);
    let (mut m0, s0) = mean_std(zeros);
    let (mut s1, mut s0) = (s1, s0);
    if m1 < m0 {
        std::mem::swap(&mut m1, &mut m0);
        std::mem::swap(&mut s1, &mut s0);
        std::mem::swap(&mut ones, &mut zeros);
    }

    let separation = m1 - m0;
    let sigma_sum = (s1 + s0).max(SIGMA_FLOOR_FRACTION * separation);
    let q = if sigma_sum > 0.0 { separation / sigma_sum } else { 0.0 };
    let ber = 0.5 * libm::erfc(q / std::f64::consts::SQRT_2);
    let min_one = ones.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_zero = zeros.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    Ok(EyeMetrics {
        eye_height: min_one - max_zero,
        eye_width: eye_width(eye),
        level_one_mean: m1,
        level_zero_mean: m0,
        level_one_std: s1,
        level_zero_std: s0,
        q_factor: q,
        extinction_ratio: m1 / m0.max(f64::MIN_POSITIVE),
        ber_estimate: ber,
        error_free: q >= decision_q,
    })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Width of the contiguous open region around the bit center, from a
/// phase-binned opening profile folded to one UI.
fn eye_width(eye: &EyeAccumulation) -> f64 {
    let bins = (eye.unit_interval / eye.dt_sample).round() as usize;
    if bins == 0 {
        return 0.0;
    }
    let mut min_one = vec![f64::INFINITY; bins];
    let mut max_zero = vec![f64::NEG_INFINITY; bins];
    for p in &eye.points {
        let phase = p.ui_fraction % 1.0;
        let b = ((phase * bins as f64) as usize).min(bins - 1);
        if p.level == 1 {
            min_one[b] = min_one[b].min(p.power);
        } else {
            max_zero[b] = max_zero[b].max(p.power);
        }
    }
    let open = |b: usize| -> bool {
        min_one[b].is_finite() && max_zero[b].is_finite() && min_one[b] - max_zero[b] > 0.0
    };
    let center = bins / 2;
    if !open(center) {
        return 0.0;
    }
    let mut left = center;
    while left > 0 && open(left - 1) {
        left -= 1;
    }
    let mut right = center;
    while right + 1 < bins && open(right + 1) {
        right += 1;
    }
    (right - left + 1) as f64 / bins as f64 * eye.unit_interval
}

/// Largest rate in `rates` (sorted ascending) whose link run is error-free
/// with identical device parameters; `None` when no rate passes.
pub fn max_error_free_bitrate(
    scenario: &LinkScenario,
    rates: &[f64],
    decision_q: f64,
) -> Result<Option<f64>> {
    if rates.is_empty() {
        return Err(Error::config("rate list must not be empty"));
    }
    if rates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("rates must be sorted ascending"));
    }
    let outcomes: Vec<Result<bool>> = rates
        .par_iter()
        .map(|&rate| {
            let trace = scenario.with_bit_rate(rate)?.run()?;
            let eye = fold_eye(&trace, rate)?;
            Ok(eye_metrics(&eye, decision_q)?.error_free)
        })
        .collect();
    let mut best = None;
    for (&rate, outcome) in rates.iter().zip(outcomes) {
        if outcome? {
            best = Some(rate);
        }
    }
    Ok(best)
}
