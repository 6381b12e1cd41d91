//! Design-space sweeps and minimum-power search over (bias current,
//! insertion loss, voltages) at a fixed bit rate.
//!
//! Grid points are independent and evaluated concurrently; the feasible
//! argmin reduction uses a fixed tie-break (lower total power, then lower
//! IL, then lower bias, then declaration order) so parallel and serial runs
//! agree exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laser::{output_power, steady_state, LaserParams};
use crate::metrics::{eye_metrics, fold_eye, EyeMetrics};
use crate::modulator::{
    contrast_from_il, transmitter_power, AbsorptionModel, ModulatorParams, PowerBreakdown,
};
use crate::laser::LaserState;
use crate::sim::{run_link, SimConfig, SourceMode};
use crate::waveform::Waveform;

const MAX_GRID_POINTS: usize = 1_000_000;
/// Bit periods simulated per feasibility check.
const EVAL_BITS: usize = 64;
/// Points per axis of the coarse grid in `minimize_power`.
const COARSE_POINTS: usize = 16;
/// Fallback grid density on IL when the unimodality bracket fails.
const FINE_POINTS: usize = 512;

/// A candidate transmitter design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Laser bias current (A).
    pub bias_current: f64,
    /// Insertion loss, fraction in [0, 1).
    pub il: f64,
    /// Contrast ratio implied by `il` through the trade-off law.
    pub cr: f64,
    /// Data rate (bit/s).
    pub bit_rate: f64,
    /// Modulator pre-bias voltage (V).
    pub v_bias: f64,
    /// Modulator swing voltage (V).
    pub v_dd: f64,
}

impl OperatingPoint {
    pub fn new(
        bias_current: f64,
        il: f64,
        k_ratio: f64,
        bit_rate: f64,
        v_bias: f64,
        v_dd: f64,
    ) -> Result<Self> {
        if !(bias_current >= 0.0 && bias_current.is_finite()) {
            return Err(Error::Domain("bias current must be >= 0".into()));
        }
        if !(bit_rate > 0.0) {
            return Err(Error::Domain("bit rate must be > 0".into()));
        }
        let cr = contrast_from_il(il, k_ratio)?;
        Ok(OperatingPoint { bias_current, il, cr, bit_rate, v_bias, v_dd })
    }
}

/// One evaluated grid point; a failed evaluation keeps its error text and
/// is skipped by the argmin.
#[derive(Debug, Clone)]
pub struct EvaluatedPoint {
    pub point: OperatingPoint,
    pub power: Option<PowerBreakdown>,
    pub eye: Option<EyeMetrics>,
    pub error: Option<String>,
}

impl EvaluatedPoint {
    pub fn feasible(&self) -> bool {
        self.eye.is_some_and(|e| e.error_free) && self.power.is_some()
    }

    pub fn total_power(&self) -> f64 {
        self.power.map_or(f64::INFINITY, |p| p.total)
    }
}

/// Per-axis value lists for a Cartesian sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub bias: Vec<f64>,
    pub il: Vec<f64>,
    pub v_bias: Vec<f64>,
    pub v_dd: Vec<f64>,
}

impl SweepAxes {
    fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("bias_a", &self.bias),
            ("il", &self.il),
            ("v_bias_v", &self.v_bias),
            ("v_dd_v", &self.v_dd),
        ] {
            if axis.is_empty() {
                return Err(Error::config(format!("sweep axis {name} is empty")));
            }
        }
        let total = self.bias.len() * self.il.len() * self.v_bias.len() * self.v_dd.len();
        if total > MAX_GRID_POINTS {
            return Err(Error::config(format!(
                "sweep grid has {total} points, limit is {MAX_GRID_POINTS}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<EvaluatedPoint>,
    /// Index of the feasible minimum-total-power point, if any is feasible.
    pub best: Option<usize>,
    /// Human-readable description of the feasibility rule applied.
    pub feasibility_rule: String,
}

/// Evaluates every Cartesian grid point in row-major order over
/// (bias, il, v_bias, v_dd) as declared. Failed points are recorded and
/// skipped; the sweep itself only fails on malformed axes.
pub fn grid_sweep<E>(
    axes: &SweepAxes,
    k_ratio: f64,
    bit_rate: f64,
    decision_q: f64,
    evaluator: E,
) -> Result<SweepResult>
where
    E: Fn(&OperatingPoint) -> Result<(PowerBreakdown, EyeMetrics)> + Sync,
{
    axes.validate()?;
    let mut points = Vec::new();
    for &bias in &axes.bias {
        for &il in &axes.il {
            for &v_bias in &axes.v_bias {
                for &v_dd in &axes.v_dd {
                    points.push(OperatingPoint::new(bias, il, k_ratio, bit_rate, v_bias, v_dd)?);
                }
            }
        }
    }
    let evaluated: Vec<EvaluatedPoint> = points
        .par_iter()
        .map(|point| match evaluator(point) {
            Ok((power, eye)) => EvaluatedPoint {
                point: *point,
                power: Some(power),
                eye: Some(eye),
                error: None,
            },
            Err(e) => EvaluatedPoint {
                point: *point,
                power: None,
                eye: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let best = argmin_feasible(&evaluated);
    Ok(SweepResult {
        points: evaluated,
        best,
        feasibility_rule: format!("error_free (Q >= {decision_q})"),
    })
}

/// Feasible argmin with the documented tie-break: total power, then IL,
/// then bias current, then declaration index.
pub fn argmin_feasible(points: &[EvaluatedPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if !p.feasible() {
            continue;
        }
        let replace = match best {
            None => true,
            Some(j) => {
                let (a, b) = (p, &points[j]);
                let (ka, kb) = (
                    (a.total_power(), a.point.il, a.point.bias_current),
                    (b.total_power(), b.point.il, b.point.bias_current),
                );
                ka < kb
            }
        };
        if replace {
            best = Some(i);
        }
    }
    best
}

/// Bounds for the refined minimum-power search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeBounds {
    pub il: (f64, f64),
    pub bias: (f64, f64),
}

impl OptimizeBounds {
    fn validate(&self) -> Result<()> {
        if !(self.il.0 < self.il.1 && self.il.0 >= 0.0 && self.il.1 < 1.0) {
            return Err(Error::config("il bounds must satisfy 0 <= lo < hi < 1"));
        }
        if !(self.bias.0 < self.bias.1 && self.bias.0 >= 0.0) {
            return Err(Error::config("bias bounds must satisfy 0 <= lo < hi"));
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Coarse grid over (bias, IL) followed by golden-section refinement of IL
/// at the best bias. The refinement assumes the power is unimodal along IL;
/// that is verified by a bracketing check at run time, with a dense-grid
/// fallback when the minimum sits on a bound or the bracket fails.
pub fn minimize_power<E>(
    bit_rate: f64,
    bounds: &OptimizeBounds,
    k_ratio: f64,
    v_bias: f64,
    v_dd: f64,
    decision_q: f64,
    evaluator: E,
) -> Result<(OperatingPoint, PowerBreakdown)>
where
    E: Fn(&OperatingPoint) -> Result<(PowerBreakdown, EyeMetrics)> + Sync,
{
    bounds.validate()?;
    let axes = SweepAxes {
        bias: linspace(bounds.bias.0, bounds.bias.1, COARSE_POINTS),
        il: linspace(bounds.il.0, bounds.il.1, COARSE_POINTS),
        v_bias: vec![v_bias],
        v_dd: vec![v_dd],
    };
    let coarse = grid_sweep(&axes, k_ratio, bit_rate, decision_q, &evaluator)?;
    let Some(best_idx) = coarse.best else {
        return Err(Error::Infeasible(format!(
            "no (bias, il) grid point is error-free at {bit_rate:.3e} bit/s"
        )));
    };
    let best_coarse = &coarse.points[best_idx];
    let best_bias = best_coarse.point.bias_current;
    let il_step = (bounds.il.1 - bounds.il.0) / (COARSE_POINTS - 1) as f64;

    let probe = |il: f64| -> Option<(f64, PowerBreakdown, EyeMetrics)> {
        let point = OperatingPoint::new(best_bias, il, k_ratio, bit_rate, v_bias, v_dd).ok()?;
        let (power, eye) = evaluator(&point).ok()?;
        eye.error_free.then_some((il, power, eye))
    };

    // bracketing check around the coarse best IL
    let il_c = best_coarse.point.il;
    let il_l = (il_c - il_step).max(bounds.il.0);
    let il_r = (il_c + il_step).min(bounds.il.1);
    let center = probe(il_c);
    let left = probe(il_l);
    let right = probe(il_r);
    let bracketed = match (&left, &center, &right) {
        (Some(l), Some(c), Some(r)) => {
            il_l < il_c && il_c < il_r && c.1.total < l.1.total && c.1.total < r.1.total
        }
        _ => false,
    };

    let refined = if bracketed {
        golden_section(il_l, il_r, 1e-4 * (bounds.il.1 - bounds.il.0), &probe)
    } else {
        // dense-grid fallback
        linspace(bounds.il.0, bounds.il.1, FINE_POINTS)
            .into_iter()
            .filter_map(&probe)
            .min_by(|a, b| a.1.total.total_cmp(&b.1.total).then(a.0.total_cmp(&b.0)))
    };

    let coarse_power = best_coarse.power.expect("feasible point has power");
    let (il_best, power_best) = match refined {
        Some((il, power, _)) if power.total <= coarse_power.total => (il, power),
        _ => (best_coarse.point.il, coarse_power),
    };
    let point = OperatingPoint::new(best_bias, il_best, k_ratio, bit_rate, v_bias, v_dd)?;
    Ok((point, power_best))
}

/// Golden-section minimization of total power over IL on [a, b]; all probes
/// must stay feasible, otherwise refinement is abandoned.
fn golden_section<P>(mut a: f64, mut b: f64, tol: f64, probe: &P) -> Option<(f64, PowerBreakdown, EyeMetrics)>
where
    P: Fn(f64) -> Option<(f64, PowerBreakdown, EyeMetrics)>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = probe(x1)?;
    let mut f2 = probe(x2)?;
    while b - a > tol {
        if f1.1.total < f2.1.total {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = probe(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = probe(x2)?;
        }
    }
    Some(if f1.1.total < f2.1.total { f1 } else { f2 })
}

/// One row of the minimum-power-versus-rate study: the rate and, when the
/// feasible set is non-empty, the refined optimum.
pub type MinPowerRow = (f64, Option<(OperatingPoint, PowerBreakdown)>);

/// Refined minimum per rate; `None` marks rates with an empty feasible set.
/// Rates must be sorted ascending.
pub fn min_power_vs_bitrate<E>(
    rates: &[f64],
    bounds: &OptimizeBounds,
    k_ratio: f64,
    v_bias: f64,
    v_dd: f64,
    decision_q: f64,
    evaluator: E,
) -> Result<Vec<MinPowerRow>>
where
    E: Fn(&OperatingPoint) -> Result<(PowerBreakdown, EyeMetrics)> + Sync,
{
    if rates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("rates must be sorted ascending"));
    }
    rates
        .iter()
        .map(|&rate| {
            match minimize_power(rate, bounds, k_ratio, v_bias, v_dd, decision_q, &evaluator) {
                Ok(found) => Ok((rate, Some(found))),
                Err(Error::Infeasible(_)) => Ok((rate, None)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// The standard evaluator: closed-form transmitter power plus an eye
/// feasibility run of the modulator under PRBS, fed by the laser's
/// steady-state output at the point's bias (constant-master link).
pub struct PointEvaluator {
    pub laser: LaserParams,
    pub modulator: ModulatorParams,
    /// Laser diode voltage drop for the electrical wall-power term (V).
    pub laser_v_drop: f64,
    pub decision_q: f64,
    pub register_length: u32,
    pub seed: u32,
    /// Drive transition time (s); fixed across rates, so it emulates the
    /// electrical bandwidth limit of the driver.
    pub t_edge: f64,
}

impl PointEvaluator {
    pub fn evaluate(&self, point: &OperatingPoint) -> Result<(PowerBreakdown, EyeMetrics)> {
        let power = transmitter_power(point, &self.laser, &self.modulator, self.laser_v_drop)?;
        let steady = steady_state(&self.laser, point.bias_current)?;
        let p_i = output_power(steady.photon_density, &self.laser);

        let absorption = AbsorptionModel::from_contrast(point.il, self.modulator.k_ratio)?;
        let ui = 1.0 / point.bit_rate;
        let drive = Waveform::PrbsNrz {
            bit_rate: point.bit_rate,
            register_length: self.register_length,
            seed: self.seed,
            low: 0.0,
            high: 1.0,
            t_edge: self.t_edge,
        };
        drive.validate()?;
        let modulator = ModulatorParams { absorption, input_power: p_i, ..self.modulator.clone() };
        let sim = SimConfig {
            t_end: EVAL_BITS as f64 * ui,
            dt: ui / 200.0,
            record_stride: 1,
            transient_skip: 0.0,
            initial_state: LaserState::ZERO,
            source: SourceMode::ConstantMaster,
        };
        let trace = run_link(
            &self.laser,
            &modulator,
            &Waveform::Constant { level: point.bias_current },
            &drive,
            &sim,
        )?;
        let eye = eye_metrics(&fold_eye(&trace, point.bit_rate)?, self.decision_q)?;
        Ok((power, eye))
    }
}
