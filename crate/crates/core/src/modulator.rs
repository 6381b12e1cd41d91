//! Reflective electroabsorption modulator model.
//!
//! Reflectivity follows a voltage-to-absorption table (quasi-static, single
//! reflective pass); the contrast/insertion-loss trade-off and the static
//! electrical power follow the closed-form relations, with the dynamic
//! switching term modeled as activity * C * Vdd^2 * bit_rate.

use crate::error::{Error, Result};
use crate::laser::{output_power, steady_state, LaserParams};
use crate::optimizer::OperatingPoint;

/// Voltage-dependent absorption of the quantum-well stack.
///
/// Absorption is piecewise-linear between table nodes and clamps to the end
/// values outside the covered voltage range. The shipped default table is
/// SYNTHETIC: a generic steep-knee electroabsorption shape, not measured
/// device data.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionModel {
    /// (reverse voltage V, absorption coefficient m^-1), strictly increasing
    /// in voltage, non-decreasing in absorption.
    entries: Vec<(f64, f64)>,
    /// Optical interaction length (m).
    pub interaction_length: f64,
}

impl AbsorptionModel {
    pub fn new(entries: Vec<(f64, f64)>, interaction_length: f64) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::config("absorption table needs >= 2 entries"));
        }
        if !(interaction_length > 0.0 && interaction_length.is_finite()) {
            return Err(Error::config("interaction_length_m must be > 0"));
        }
        for w in entries.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::config("absorption table voltages must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::config("absorption must be non-decreasing with reverse voltage"));
            }
        }
        for &(v, a) in &entries {
            if !v.is_finite() || !(a >= 0.0 && a.is_finite()) {
                return Err(Error::config("absorption table values must be finite, alpha >= 0"));
            }
        }
        Ok(AbsorptionModel { entries, interaction_length })
    }

    /// The shipped synthetic table: slow absorption growth with a steep
    /// exciton-like knee near the top of the 0-4 V swing, 2 um interaction
    /// length.
    pub fn synthetic_default() -> Self {
        AbsorptionModel::new(
            vec![
                (0.0, 5.0e4),
                (1.0, 5.5e4),
                (2.0, 6.5e4),
                (3.0, 8.0e4),
                (3.5, 1.2e5),
                (3.8, 2.2e5),
                (3.9, 3.6e5),
                (4.0, 6.5e5),
            ],
            2e-6,
        )
        .expect("synthetic table is valid")
    }

    /// Two-point table realizing a given (insertion loss, alpha ratio) pair
    /// on a normalized 0..1 drive; used where no measured spectrum exists.
    pub fn from_contrast(il: f64, k: f64) -> Result<Self> {
        let cr = contrast_from_il(il, k)?;
        let r_on = 1.0 - il;
        let r_off = r_on / cr;
        AbsorptionModel::new(vec![(0.0, -r_on.ln()), (1.0, -r_off.ln())], 1.0)
    }

    /// Parses the two-column CSV form (`voltage_v,alpha_per_m`, header
    /// required, `#` comment lines allowed before the header).
    pub fn from_csv_str(text: &str, interaction_length: f64) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        match lines.next() {
            Some((_, h)) if h.trim() == "voltage_v,alpha_per_m" => {}
            _ => return Err(Error::config("absorption CSV must start with header voltage_v,alpha_per_m")),
        }
        let mut entries = Vec::new();
        for (idx, line) in lines {
            let mut cols = line.trim().split(',');
            let (v, a) = match (cols.next(), cols.next(), cols.next()) {
                (Some(v), Some(a), None) => (v, a),
                _ => return Err(Error::config_at(idx + 1, "expected two columns")),
            };
            let v: f64 = v.trim().parse().map_err(|_| Error::config_at(idx + 1, "bad voltage"))?;
            let a: f64 = a.trim().parse().map_err(|_| Error::config_at(idx + 1, "bad alpha"))?;
            entries.push((v, a));
        }
        AbsorptionModel::new(entries, interaction_length)
    }

    /// Piecewise-linear absorption at `v`, clamped to the table range.
    pub fn alpha_at(&self, v: f64) -> f64 {
        let first = self.entries[0];
        let last = *self.entries.last().unwrap();
        if v <= first.0 {
            return first.1;
        }
        if v >= last.0 {
            return last.1;
        }
        let i = self.entries.partition_point(|&(tv, _)| tv <= v);
        let (v0, a0) = self.entries[i - 1];
        let (v1, a1) = self.entries[i];
        a0 + (a1 - a0) * (v - v0) / (v1 - v0)
    }

    /// (lowest, highest) voltage covered by the table.
    pub fn voltage_range(&self) -> (f64, f64) {
        (self.entries[0].0, self.entries.last().unwrap().0)
    }

    /// alpha_max / alpha_min of the table end states.
    pub fn alpha_ratio(&self) -> f64 {
        self.entries.last().unwrap().1 / self.entries[0].1
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Modulator electrical and optical parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatorParams {
    pub absorption: AbsorptionModel,
    /// alpha_max/alpha_min ratio for the closed-form trade-off (used by
    /// optimizer sweeps when no spectrum applies).
    pub k_ratio: f64,
    /// Modulator responsivity (A/W), physical range (0, 1.3].
    pub responsivity: f64,
    /// Pre-bias voltage (V).
    pub v_bias: f64,
    /// Supply / swing voltage (V).
    pub v_dd: f64,
    /// Modulator plus driver-chain capacitance (F).
    pub capacitance: f64,
    /// Input optical power (W) when fed from a constant master source.
    pub input_power: f64,
    /// Switching activity factor in [0, 1]; 0.5 for balanced data.
    pub activity: f64,
}

impl Default for ModulatorParams {
    fn default() -> Self {
        let absorption = AbsorptionModel::synthetic_default();
        let k_ratio = absorption.alpha_ratio();
        ModulatorParams {
            absorption,
            k_ratio,
            responsivity: 0.8,
            v_bias: 2.0,
            v_dd: 1.0,
            capacitance: 50e-15,
            input_power: 2e-4,
            activity: 0.5,
        }
    }
}

impl ModulatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_ratio >= 1.0 && self.k_ratio.is_finite()) {
            return Err(Error::config("modulator k_ratio must be >= 1"));
        }
        if !(self.responsivity > 0.0 && self.responsivity <= 1.3) {
            return Err(Error::config("modulator responsivity must be in (0, 1.3] A/W"));
        }
        if !(self.capacitance >= 0.0 && self.capacitance.is_finite()) {
            return Err(Error::config("modulator capacitance must be >= 0"));
        }
        if !(self.v_bias >= 0.0) || !(self.v_dd >= 0.0) {
            return Err(Error::config("modulator voltages must be >= 0"));
        }
        if !(self.activity >= 0.0 && self.activity <= 1.0) {
            return Err(Error::config("modulator activity must be in [0, 1]"));
        }
        if !(self.input_power >= 0.0 && self.input_power.is_finite()) {
            return Err(Error::config("modulator p_i_w must be >= 0"));
        }
        Ok(())
    }
}

/// Transmitter electrical power split, W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown {
    pub static_power: f64,
    pub dynamic_power: f64,
    pub laser_wall_power: f64,
    pub total: f64,
    pub eta_mod: f64,
    /// Set when eta_mod came out negative (non-physical voltage split);
    /// values are reported verbatim rather than clamped.
    pub non_physical: bool,
}

/// Contrast ratio from insertion loss: CR = (1 - IL)^(1 - K).
pub fn contrast_from_il(il: f64, k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&il) {
        return Err(Error::Domain(format!("insertion loss {il} outside [0, 1)")));
    }
    if !(k >= 1.0) {
        return Err(Error::Domain(format!("alpha ratio K {k} must be >= 1")));
    }
    Ok((1.0 - il).powf(1.0 - k))
}

/// Insertion loss from contrast ratio: IL = 1 - CR^(1/(1-K)).
pub fn il_from_cr(cr: f64, k: f64) -> Result<f64> {
    if !(cr >= 1.0) {
        return Err(Error::Domain(format!("contrast ratio {cr} must be >= 1")));
    }
    if cr == 1.0 {
        return Ok(0.0);
    }
    if !(k > 1.0) {
        return Err(Error::Domain(format!(
            "contrast ratio {cr} unreachable with alpha ratio K = {k}"
        )));
    }
    Ok(1.0 - cr.powf(1.0 / (1.0 - k)))
}

/// Reflectivity exp(-alpha(v) * L) at drive voltage `v`; always in (0, 1].
pub fn reflectivity(v: f64, m: &AbsorptionModel) -> f64 {
    (-m.alpha_at(v) * m.interaction_length).exp()
}

/// Quasi-static transfer: output[i] = input[i] * R(drive(t0 + i*dt)).
pub fn modulate<D: Fn(f64) -> f64>(
    input_power: &[f64],
    t0: f64,
    dt: f64,
    drive: D,
    m: &AbsorptionModel,
) -> Vec<f64> {
    input_power
        .iter()
        .enumerate()
        .map(|(i, &p)| p * reflectivity(drive(t0 + i as f64 * dt), m))
        .collect()
}

/// Static-power efficiency factor and the static power it implies:
/// eta = 0.5 * R_s * [IL*(V_bias - V_dd) + (1 - (1-IL)/CR) * V_bias],
/// static = eta * P_i. Negative eta (V_dd above V_bias) is returned as-is.
pub fn mod_efficiency(il: f64, cr: f64, m: &ModulatorParams) -> (f64, f64) {
    let eta = 0.5
        * m.responsivity
        * (il * (m.v_bias - m.v_dd) + (1.0 - (1.0 - il) / cr) * m.v_bias);
    (eta, eta * m.input_power)
}

/// Switching power of the modulator and its driver chain.
pub fn dynamic_power(m: &ModulatorParams, bit_rate: f64) -> f64 {
    m.activity * m.capacitance * m.v_dd * m.v_dd * bit_rate
}

/// Full transmitter power breakdown at an operating point. The modulator
/// input power is the laser steady-state output at the point's bias; the
/// laser electrical term is the configured diode drop times the bias.
pub fn transmitter_power(
    point: &OperatingPoint,
    laser: &LaserParams,
    m: &ModulatorParams,
    laser_v_drop: f64,
) -> Result<PowerBreakdown> {
    let steady = steady_state(laser, point.bias_current)?;
    let p_i = output_power(steady.photon_density, laser);
    let at_point = ModulatorParams {
        v_bias: point.v_bias,
        v_dd: point.v_dd,
        input_power: p_i,
        ..m.clone()
    };
    let (eta_mod, static_power) = mod_efficiency(point.il, point.cr, &at_point);
    let dynamic = dynamic_power(&at_point, point.bit_rate);
    let laser_wall_power = laser_v_drop * point.bias_current;
    Ok(PowerBreakdown {
        static_power,
        dynamic_power: dynamic,
        laser_wall_power,
        total: static_power + dynamic + laser_wall_power,
        eta_mod,
        non_physical: eta_mod < 0.0,
    })
}
