//! INI-style run configuration: `[section]` headers, `key = value` lines,
//! `#` line comments, case-sensitive keys, SI-unit suffixes in key names.
//!
//! Unknown sections and keys are hard errors. Missing keys take documented
//! defaults; the fully resolved config (defaults included) is echoed into
//! every output file header, and parsing that echo reproduces the run's
//! configuration exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::laser::{photon_energy_for_wavelength, LaserParams};
use crate::modulator::{AbsorptionModel, ModulatorParams};
use crate::optimizer::{OptimizeBounds, PointEvaluator, SweepAxes};
use crate::output::format_g17;
use crate::laser::LaserState;
use crate::sim::{LinkScenario, SimConfig, SourceMode, SWEEP_RUN_BITS};
use crate::waveform::Waveform;

#[derive(Debug, Clone)]
pub struct LaserSection {
    pub v_a_m3: f64,
    pub g0_m3_per_s: f64,
    pub n0_per_m3: f64,
    pub eps_m3: f64,
    pub tau_n_s: f64,
    pub tau_p_s: f64,
    pub gamma: f64,
    pub beta: f64,
    pub alpha_lw: f64,
    pub eta_sp: f64,
    pub lambda_nm: f64,
    /// Diode voltage drop for the electrical wall-power term (V).
    pub v_drop_v: f64,
}

impl Default for LaserSection {
    fn default() -> Self {
        let p = LaserParams::default();
        LaserSection {
            v_a_m3: p.v_a,
            g0_m3_per_s: p.g0,
            n0_per_m3: p.n0,
            eps_m3: p.eps,
            tau_n_s: p.tau_n,
            tau_p_s: p.tau_p,
            gamma: p.gamma,
            beta: p.beta,
            alpha_lw: p.alpha_lw,
            eta_sp: p.eta_sp,
            lambda_nm: 850.0,
            v_drop_v: 1.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModulatorSection {
    pub k_ratio: f64,
    pub r_s_mod_a_per_w: f64,
    pub v_bias_v: f64,
    pub v_dd_v: f64,
    pub c_mod_f: f64,
    pub p_i_w: f64,
    pub activity: f64,
    /// Optional path to a measured voltage/absorption CSV; the built-in
    /// synthetic table is used when empty.
    pub absorption_csv: String,
    pub interaction_length_m: f64,
}

impl Default for ModulatorSection {
    fn default() -> Self {
        let m = ModulatorParams::default();
        ModulatorSection {
            k_ratio: m.k_ratio,
            r_s_mod_a_per_w: m.responsivity,
            v_bias_v: m.v_bias,
            v_dd_v: m.v_dd,
            c_mod_f: m.capacitance,
            p_i_w: m.input_power,
            activity: m.activity,
            absorption_csv: String::new(),
            interaction_length_m: m.absorption.interaction_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveKind {
    Constant,
    Pulse,
    Ramp,
    PrbsNrz,
    Piecewise,
}

impl DriveKind {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "constant" => DriveKind::Constant,
            "pulse" => DriveKind::Pulse,
            "ramp" => DriveKind::Ramp,
            "prbs_nrz" => DriveKind::PrbsNrz,
            "piecewise" => DriveKind::Piecewise,
            other => return Err(Error::config(format!("unknown drive kind `{other}`"))),
        })
    }

    fn name(&self) -> &'static str {
        match self {
            DriveKind::Constant => "constant",
            DriveKind::Pulse => "pulse",
            DriveKind::Ramp => "ramp",
            DriveKind::PrbsNrz => "prbs_nrz",
            DriveKind::Piecewise => "piecewise",
        }
    }
}

/// One `[drive.*]` section. The scalar keys carry the domain unit suffix
/// (`_a` for the laser drive, `_v` for the modulator drive); all keys are
/// stored regardless of `kind`, only the relevant ones feed the waveform.
#[derive(Debug, Clone)]
pub struct DriveSection {
    pub kind: DriveKind,
    pub level: f64,
    pub base: f64,
    pub amplitude: f64,
    pub slope_per_s: f64,
    pub low: f64,
    pub high: f64,
    pub t_start_s: f64,
    pub width_s: f64,
    pub t_rise_s: f64,
    pub t_fall_s: f64,
    pub bit_rate_bps: f64,
    pub register_length: u32,
    pub seed: u32,
    pub t_edge_s: f64,
    pub times_s: Vec<f64>,
    pub values: Vec<f64>,
}

impl DriveSection {
    fn default_laser() -> Self {
        DriveSection {
            kind: DriveKind::Constant,
            level: 1.4e-3,
            base: 1e-3,
            amplitude: 1e-3,
            slope_per_s: 0.0,
            low: 0.0,
            high: 2e-3,
            t_start_s: 0.0,
            width_s: 1e-9,
            t_rise_s: 0.0,
            t_fall_s: 0.0,
            bit_rate_bps: 10e9,
            register_length: 7,
            seed: 1,
            t_edge_s: 45e-12,
            times_s: Vec::new(),
            values: Vec::new(),
        }
    }

    fn default_modulator() -> Self {
        DriveSection {
            kind: DriveKind::PrbsNrz,
            level: 0.0,
            base: 0.0,
            amplitude: 4.0,
            slope_per_s: 0.0,
            low: 0.0,
            high: 4.0,
            t_start_s: 0.0,
            width_s: 1e-9,
            t_rise_s: 0.0,
            t_fall_s: 0.0,
            bit_rate_bps: 10e9,
            register_length: 7,
            seed: 1,
            t_edge_s: 45e-12,
            times_s: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<Waveform> {
        let w = match self.kind {
            DriveKind::Constant => Waveform::Constant { level: self.level },
            DriveKind::Pulse => Waveform::Pulse {
                base: self.base,
                amplitude: self.amplitude,
                t_start: self.t_start_s,
                width: self.width_s,
                t_rise: self.t_rise_s,
                t_fall: self.t_fall_s,
            },
            DriveKind::Ramp => Waveform::Ramp {
                base: self.base,
                slope: self.slope_per_s,
                t_start: self.t_start_s,
            },
            DriveKind::PrbsNrz => Waveform::PrbsNrz {
                bit_rate: self.bit_rate_bps,
                register_length: self.register_length,
                seed: self.seed,
                low: self.low,
                high: self.high,
                t_edge: self.t_edge_s,
            },
            DriveKind::Piecewise => Waveform::Piecewise {
                times: self.times_s.clone(),
                values: self.values.clone(),
            },
        };
        w.validate()?;
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Laser,
    ConstantMaster,
}

#[derive(Debug, Clone)]
pub struct SimSection {
    pub source: SourceKind,
    pub t_end_s: f64,
    pub dt_s: f64,
    pub record_stride: usize,
    pub transient_skip_s: f64,
    pub init_n_per_m3: f64,
    pub init_s_per_m3: f64,
    pub init_phi_rad: f64,
    // which timing keys were given explicitly (defaults re-derive when a
    // CLI flag retunes the bit rate)
    t_end_explicit: bool,
    dt_explicit: bool,
    skip_explicit: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            source: SourceKind::Laser,
            t_end_s: 0.0,
            dt_s: 0.0,
            record_stride: 1,
            transient_skip_s: 0.0,
            init_n_per_m3: 0.0,
            init_s_per_m3: 0.0,
            init_phi_rad: 0.0,
            t_end_explicit: false,
            dt_explicit: false,
            skip_explicit: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricsSection {
    pub decision_q: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection { decision_q: crate::metrics::DEFAULT_DECISION_Q }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSection {
    pub bias_a: Vec<f64>,
    pub il: Vec<f64>,
    pub v_bias_v: Vec<f64>,
    pub v_dd_v: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            bias_a: vec![0.8e-3, 1.0e-3, 1.2e-3, 1.4e-3, 1.6e-3, 1.8e-3, 2.0e-3],
            il: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50],
            v_bias_v: Vec::new(), // defaults to [modulator.v_bias_v]
            v_dd_v: Vec::new(),   // defaults to [modulator.v_dd_v]
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub laser: LaserSection,
    pub modulator: ModulatorSection,
    pub drive_laser: DriveSection,
    pub drive_modulator: DriveSection,
    pub sim: SimSection,
    pub metrics: MetricsSection,
    pub sweep: SweepSection,
}

impl Default for Config {
    fn default() -> Self {
        Config::parse("").expect("defaults are valid")
    }
}

impl Config {
    /// Parses config text and resolves every default to a concrete value.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config {
            laser: LaserSection::default(),
            modulator: ModulatorSection::default(),
            drive_laser: DriveSection::default_laser(),
            drive_modulator: DriveSection::default_modulator(),
            sim: SimSection::default(),
            metrics: MetricsSection::default(),
            sweep: SweepSection::default(),
        };
        let mut section: Option<String> = None;
        let mut seen: Vec<(String, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                const SECTIONS: [&str; 7] = [
                    "laser",
                    "modulator",
                    "drive.laser",
                    "drive.modulator",
                    "sim",
                    "metrics",
                    "sweep",
                ];
                if !SECTIONS.contains(&name) {
                    return Err(Error::config_at(lineno, format!("unknown section `[{name}]`")));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config_at(lineno, format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(sec) = section.as_deref() else {
                return Err(Error::config_at(lineno, format!("key `{key}` appears before any [section]")));
            };
            let full = (sec.to_string(), key.to_string());
            if seen.contains(&full) {
                return Err(Error::config_at(lineno, format!("duplicate key `{key}` in [{sec}]")));
            }
            seen.push(full);
            cfg.apply(sec, key, value, lineno)?;
        }

        cfg.resolve();
        cfg.check()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<()> {
        let f = |v: &str| parse_f64(v, key, line);
        let int = |v: &str| parse_usize(v, key, line);
        let u = |v: &str| parse_u32(v, key, line);
        let list = |v: &str| parse_list(v, key, line);
        match section {
            "laser" => {
                let s = &mut self.laser;
                match key {
                    "v_a_m3" => s.v_a_m3 = f(value)?,
                    "g0_m3_per_s" => s.g0_m3_per_s = f(value)?,
                    "n0_per_m3" => s.n0_per_m3 = f(value)?,
                    "eps_m3" => s.eps_m3 = f(value)?,
                    "tau_n_s" => s.tau_n_s = f(value)?,
                    "tau_p_s" => s.tau_p_s = f(value)?,
                    "gamma" => s.gamma = f(value)?,
                    "beta" => s.beta = f(value)?,
                    "alpha_lw" => s.alpha_lw = f(value)?,
                    "eta_sp" => s.eta_sp = f(value)?,
                    "lambda_nm" => s.lambda_nm = f(value)?,
                    "v_drop_v" => s.v_drop_v = f(value)?,
                    _ => return unknown_key(line, section, key),
                }
            }
            "modulator" => {
                let s = &mut self.modulator;
                match key {
                    "k_ratio" => s.k_ratio = f(value)?,
                    "r_s_mod_a_per_w" => s.r_s_mod_a_per_w = f(value)?,
                    "v_bias_v" => s.v_bias_v = f(value)?,
                    "v_dd_v" => s.v_dd_v = f(value)?,
                    "c_mod_f" => s.c_mod_f = f(value)?,
                    "p_i_w" => s.p_i_w = f(value)?,
                    "activity" => s.activity = f(value)?,
                    "absorption_csv" => s.absorption_csv = value.to_string(),
                    "interaction_length_m" => s.interaction_length_m = f(value)?,
                    _ => return unknown_key(line, section, key),
                }
            }
            "drive.laser" | "drive.modulator" => {
                let suffix = if section == "drive.laser" { "_a" } else { "_v" };
                let s = if section == "drive.laser" {
                    &mut self.drive_laser
                } else {
                    &mut self.drive_modulator
                };
                match key {
                    "kind" => s.kind = DriveKind::parse(value).map_err(|e| at_line(e, line))?,
                    _ if key == format!("level{suffix}") => s.level = f(value)?,
                    _ if key == format!("base{suffix}") => s.base = f(value)?,
                    _ if key == format!("amplitude{suffix}") => s.amplitude = f(value)?,
                    _ if key == format!("slope{suffix}_per_s") => s.slope_per_s = f(value)?,
                    _ if key == format!("low{suffix}") => s.low = f(value)?,
                    _ if key == format!("high{suffix}") => s.high = f(value)?,
                    "t_start_s" => s.t_start_s = f(value)?,
                    "width_s" => s.width_s = f(value)?,
                    "t_rise_s" => s.t_rise_s = f(value)?,
                    "t_fall_s" => s.t_fall_s = f(value)?,
                    "bit_rate_bps" => s.bit_rate_bps = f(value)?,
                    "register_length" => s.register_length = u(value)?,
                    "seed" => s.seed = u(value)?,
                    "t_edge_s" => s.t_edge_s = f(value)?,
                    "times_s" => s.times_s = list(value)?,
                    _ if key == format!("values{suffix}") => s.values = list(value)?,
                    _ => return unknown_key(line, section, key),
                }
            }
            "sim" => {
                let s = &mut self.sim;
                match key {
                    "source" => {
                        s.source = match value {
                            "laser" => SourceKind::Laser,
                            "constant_master" => SourceKind::ConstantMaster,
                            other => {
                                return Err(Error::config_at(
                                    line,
                                    format!("source must be `laser` or `constant_master`, got `{other}`"),
                                ))
                            }
                        }
                    }
                    "t_end_s" => {
                        s.t_end_s = f(value)?;
                        s.t_end_explicit = true;
                    }
                    "dt_s" => {
                        s.dt_s = f(value)?;
                        s.dt_explicit = true;
                    }
                    "record_stride" => s.record_stride = int(value)?,
                    "transient_skip_s" => {
                        s.transient_skip_s = f(value)?;
                        s.skip_explicit = true;
                    }
                    "init_n_per_m3" => s.init_n_per_m3 = f(value)?,
                    "init_s_per_m3" => s.init_s_per_m3 = f(value)?,
                    "init_phi_rad" => s.init_phi_rad = f(value)?,
                    _ => return unknown_key(line, section, key),
                }
            }
            "metrics" => match key {
                "decision_q" => self.metrics.decision_q = f(value)?,
                _ => return unknown_key(line, section, key),
            },
            "sweep" => {
                let s = &mut self.sweep;
                match key {
                    "bias_a" => s.bias_a = list(value)?,
                    "il" => s.il = list(value)?,
                    "v_bias_v" => s.v_bias_v = list(value)?,
                    "v_dd_v" => s.v_dd_v = list(value)?,
                    _ => return unknown_key(line, section, key),
                }
            }
            _ => unreachable!("section validated above"),
        }
        Ok(())
    }

    /// Fills derived defaults with concrete values.
    fn resolve(&mut self) {
        if self.sweep.v_bias_v.is_empty() {
            self.sweep.v_bias_v = vec![self.modulator.v_bias_v];
        }
        if self.sweep.v_dd_v.is_empty() {
            self.sweep.v_dd_v = vec![self.modulator.v_dd_v];
        }
        let ui = self.prbs_unit_interval();
        let tau_p = self.laser.tau_p_s;
        let tau_n = self.laser.tau_n_s;
        if !self.sim.skip_explicit {
            self.sim.transient_skip_s = match self.sim.source {
                SourceKind::Laser => 20.0 * tau_n,
                SourceKind::ConstantMaster => 0.0,
            };
        }
        if !self.sim.dt_explicit {
            self.sim.dt_s = match (self.sim.source, ui) {
                (SourceKind::Laser, Some(ui)) => (tau_p / 10.0).min(ui / 200.0),
                (SourceKind::Laser, None) => tau_p / 10.0,
                (SourceKind::ConstantMaster, Some(ui)) => ui / 200.0,
                (SourceKind::ConstantMaster, None) => tau_p / 10.0,
            };
        }
        if !self.sim.t_end_explicit {
            self.sim.t_end_s = self.sim.transient_skip_s
                + match ui {
                    Some(ui) => SWEEP_RUN_BITS as f64 * ui,
                    None => 20.0 * tau_n,
                };
        }
    }

    fn prbs_unit_interval(&self) -> Option<f64> {
        for d in [&self.drive_modulator, &self.drive_laser] {
            if d.kind == DriveKind::PrbsNrz && d.bit_rate_bps > 0.0 {
                return Some(1.0 / d.bit_rate_bps);
            }
        }
        None
    }

    /// Invariant checks that name the offending key.
    fn check(&self) -> Result<()> {
        self.laser_params()?.validate()?;
        if !(self.laser.v_drop_v >= 0.0) {
            return Err(Error::config("laser v_drop_v must be >= 0"));
        }
        if !(self.metrics.decision_q > 0.0) {
            return Err(Error::config("metrics decision_q must be > 0"));
        }
        self.drive_laser.build()?;
        self.drive_modulator.build()?;
        Ok(())
    }

    pub fn laser_params(&self) -> Result<LaserParams> {
        let s = &self.laser;
        if !(s.lambda_nm > 0.0 && s.lambda_nm.is_finite()) {
            return Err(Error::config("laser lambda_nm must be > 0"));
        }
        let p = LaserParams {
            v_a: s.v_a_m3,
            g0: s.g0_m3_per_s,
            n0: s.n0_per_m3,
            eps: s.eps_m3,
            tau_n: s.tau_n_s,
            tau_p: s.tau_p_s,
            gamma: s.gamma,
            beta: s.beta,
            alpha_lw: s.alpha_lw,
            eta_sp: s.eta_sp,
            photon_energy: photon_energy_for_wavelength(s.lambda_nm * 1e-9),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn modulator_params(&self) -> Result<ModulatorParams> {
        let s = &self.modulator;
        let absorption = if s.absorption_csv.is_empty() {
            AbsorptionModel::new(
                AbsorptionModel::synthetic_default().entries().to_vec(),
                s.interaction_length_m,
            )?
        } else {
            let text = std::fs::read_to_string(&s.absorption_csv)?;
            AbsorptionModel::from_csv_str(&text, s.interaction_length_m)?
        };
        let m = ModulatorParams {
            absorption,
            k_ratio: s.k_ratio,
            responsivity: s.r_s_mod_a_per_w,
            v_bias: s.v_bias_v,
            v_dd: s.v_dd_v,
            capacitance: s.c_mod_f,
            input_power: s.p_i_w,
            activity: s.activity,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            t_end: self.sim.t_end_s,
            dt: self.sim.dt_s,
            record_stride: self.sim.record_stride,
            transient_skip: self.sim.transient_skip_s,
            initial_state: LaserState {
                carrier_density: self.sim.init_n_per_m3,
                photon_density: self.sim.init_s_per_m3,
                phase: self.sim.init_phi_rad,
            },
            source: match self.sim.source {
                SourceKind::Laser => SourceMode::Laser,
                SourceKind::ConstantMaster => SourceMode::ConstantMaster,
            },
        }
    }

    pub fn scenario(&self) -> Result<LinkScenario> {
        let laser = self.laser_params()?;
        let sim = self.sim_config();
        sim.validate(&laser)?;
        Ok(LinkScenario {
            laser,
            modulator: self.modulator_params()?,
            laser_drive: self.drive_laser.build()?,
            mod_drive: self.drive_modulator.build()?,
            sim,
        })
    }

    pub fn sweep_axes(&self) -> SweepAxes {
        SweepAxes {
            bias: self.sweep.bias_a.clone(),
            il: self.sweep.il.clone(),
            v_bias: self.sweep.v_bias_v.clone(),
            v_dd: self.sweep.v_dd_v.clone(),
        }
    }

    /// Optimizer bounds from the sweep axes' extreme values.
    pub fn optimize_bounds(&self) -> Result<OptimizeBounds> {
        let span = |axis: &[f64], name: &str| -> Result<(f64, f64)> {
            if axis.is_empty() {
                return Err(Error::config(format!("sweep axis {name} is empty")));
            }
            let lo = axis.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = axis.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(lo < hi) {
                return Err(Error::config(format!(
                    "sweep axis {name} needs at least two distinct values for bounds"
                )));
            }
            Ok((lo, hi))
        };
        Ok(OptimizeBounds {
            il: span(&self.sweep.il, "il")?,
            bias: span(&self.sweep.bias_a, "bias_a")?,
        })
    }

    pub fn evaluator(&self) -> Result<PointEvaluator> {
        let d = &self.drive_modulator;
        let (register_length, seed, t_edge) = if d.kind == DriveKind::PrbsNrz {
            (d.register_length, d.seed, d.t_edge_s)
        } else {
            (7, 1, 45e-12)
        };
        Ok(PointEvaluator {
            laser: self.laser_params()?,
            modulator: self.modulator_params()?,
            laser_v_drop: self.laser.v_drop_v,
            decision_q: self.metrics.decision_q,
            register_length,
            seed,
            t_edge,
        })
    }

    /// Replaces the PRBS seed in both drive sections.
    pub fn apply_seed(&mut self, seed: u32) {
        self.drive_laser.seed = seed;
        self.drive_modulator.seed = seed;
    }

    /// Retunes the PRBS drive to a new bit rate (modulator drive first,
    /// else the laser drive) and re-derives defaulted timing for it.
    pub fn set_bit_rate(&mut self, rate: f64) -> Result<()> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::config("bit rate must be > 0"));
        }
        if self.drive_modulator.kind == DriveKind::PrbsNrz {
            self.drive_modulator.bit_rate_bps = rate;
        } else if self.drive_laser.kind == DriveKind::PrbsNrz {
            self.drive_laser.bit_rate_bps = rate;
        } else {
            return Err(Error::config(
                "bit-rate override requires a prbs_nrz drive on the modulator or laser",
            ));
        }
        self.resolve();
        self.check()
    }

    /// The resolved configuration as parseable config text, every value
    /// concrete, deterministic ordering.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let g = format_g17;
        let s = &self.laser;
        let _ = write!(
            out,
            "[laser]\nv_a_m3 = {}\ng0_m3_per_s = {}\nn0_per_m3 = {}\neps_m3 = {}\n\
             tau_n_s = {}\ntau_p_s = {}\ngamma = {}\nbeta = {}\nalpha_lw = {}\n\
             eta_sp = {}\nlambda_nm = {}\nv_drop_v = {}\n",
            g(s.v_a_m3),
            g(s.g0_m3_per_s),
            g(s.n0_per_m3),
            g(s.eps_m3),
            g(s.tau_n_s),
            g(s.tau_p_s),
            g(s.gamma),
            g(s.beta),
            g(s.alpha_lw),
            g(s.eta_sp),
            g(s.lambda_nm),
            g(s.v_drop_v),
        );
        let m = &self.modulator;
        let _ = write!(
            out,
            "[modulator]\nk_ratio = {}\nr_s_mod_a_per_w = {}\nv_bias_v = {}\nv_dd_v = {}\n\
             c_mod_f = {}\np_i_w = {}\nactivity = {}\nabsorption_csv = {}\ninteraction_length_m = {}\n",
            g(m.k_ratio),
            g(m.r_s_mod_a_per_w),
            g(m.v_bias_v),
            g(m.v_dd_v),
            g(m.c_mod_f),
            g(m.p_i_w),
            g(m.activity),
            m.absorption_csv,
            g(m.interaction_length_m),
        );
        for (name, d, suffix) in [
            ("drive.laser", &self.drive_laser, "_a"),
            ("drive.modulator", &self.drive_modulator, "_v"),
        ] {
            let lists = |v: &[f64]| v.iter().map(|x| g(*x)).collect::<Vec<_>>().join(",");
            let _ = write!(
                out,
                "[{name}]\nkind = {}\nlevel{suffix} = {}\nbase{suffix} = {}\namplitude{suffix} = {}\n\
                 slope{suffix}_per_s = {}\nlow{suffix} = {}\nhigh{suffix} = {}\nt_start_s = {}\n\
                 width_s = {}\nt_rise_s = {}\nt_fall_s = {}\nbit_rate_bps = {}\nregister_length = {}\n\
                 seed = {}\nt_edge_s = {}\ntimes_s = {}\nvalues{suffix} = {}\n",
                d.kind.name(),
                g(d.level),
                g(d.base),
                g(d.amplitude),
                g(d.slope_per_s),
                g(d.low),
                g(d.high),
                g(d.t_start_s),
                g(d.width_s),
                g(d.t_rise_s),
                g(d.t_fall_s),
                g(d.bit_rate_bps),
                d.register_length,
                d.seed,
                g(d.t_edge_s),
                lists(&d.times_s),
                lists(&d.values),
            );
        }
        let si = &self.sim;
        let _ = write!(
            out,
            "[sim]\nsource = {}\nt_end_s = {}\ndt_s = {}\nrecord_stride = {}\ntransient_skip_s = {}\n\
             init_n_per_m3 = {}\ninit_s_per_m3 = {}\ninit_phi_rad = {}\n",
            match si.source {
                SourceKind::Laser => "laser",
                SourceKind::ConstantMaster => "constant_master",
            },
            g(si.t_end_s),
            g(si.dt_s),
            si.record_stride,
            g(si.transient_skip_s),
            g(si.init_n_per_m3),
            g(si.init_s_per_m3),
            g(si.init_phi_rad),
        );
        let _ = write!(out, "[metrics]\ndecision_q = {}\n", g(self.metrics.decision_q));
        let sw = &self.sweep;
        let lists = |v: &[f64]| v.iter().map(|x| g(*x)).collect::<Vec<_>>().join(",");
        let _ = write!(
            out,
            "[sweep]\nbias_a = {}\nil = {}\nv_bias_v = {}\nv_dd_v = {}\n",
            lists(&sw.bias_a),
            lists(&sw.il),
            lists(&sw.v_bias_v),
            lists(&sw.v_dd_v),
        );
        out
    }
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::Config { msg, .. } => Error::Config { line: Some(line), msg },
        other => other,
    }
}

fn unknown_key(line: usize, section: &str, key: &str) -> Result<()> {
    Err(Error::config_at(line, format!("unknown key `{key}` in [{section}]")))
}

fn parse_f64(v: &str, key: &str, line: usize) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::config_at(line, format!("key `{key}`: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::config_at(line, format!("key `{key}` must be finite")));
    }
    Ok(x)
}

fn parse_usize(v: &str, key: &str, line: usize) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::config_at(line, format!("key `{key}`: `{v}` is not a non-negative integer")))
}

fn parse_u32(v: &str, key: &str, line: usize) -> Result<u32> {
    v.parse()
        .map_err(|_| Error::config_at(line, format!("key `{key}`: `{v}` is not a 32-bit integer")))
}

fn parse_list(v: &str, key: &str, line: usize) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|item| parse_f64(item.trim(), key, line)).collect()
}
