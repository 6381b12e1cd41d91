//! End-to-end transmitter runs: fixed-step integration of the laser, the
//! optical hand-off to the modulator, transient skipping and trace recording.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laser::{output_power, rk4_step, LaserParams, LaserState};
use crate::modulator::{modulate, ModulatorParams};
use crate::waveform::{Sampler, Waveform};

/// Bit periods a rate-swept run records after the transient.
pub const SWEEP_RUN_BITS: usize = 160;

/// Where the modulator's input light comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    /// Integrate the laser rate equations under the laser drive.
    Laser,
    /// External master source: laser integration is skipped and the input
    /// power is the configured constant.
    ConstantMaster,
}

/// Integration and recording settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total simulated span (s).
    pub t_end: f64,
    /// Fixed integration step (s).
    pub dt: f64,
    /// Record every n-th step (decouples trace size from step count).
    pub record_stride: usize,
    /// Time skipped before recording starts, past turn-on transients (s).
    pub transient_skip: f64,
    pub initial_state: LaserState,
    pub source: SourceMode,
}

impl SimConfig {
    pub fn validate(&self, laser: &LaserParams) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("sim dt_s must be > 0"));
        }
        if self.source == SourceMode::Laser && self.dt > laser.tau_p / 10.0 * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "sim dt_s {:e} exceeds the stability guard tau_p/10 = {:e}",
                self.dt,
                laser.tau_p / 10.0
            )));
        }
        if !(self.transient_skip >= 0.0 && self.transient_skip < self.t_end) {
            return Err(Error::config("sim requires 0 <= transient_skip_s < t_end_s"));
        }
        if self.t_end / self.dt > 1e9 {
            return Err(Error::config("sim run size t_end_s/dt_s exceeds 1e9 steps"));
        }
        if self.record_stride < 1 {
            return Err(Error::config("sim record_stride must be >= 1"));
        }
        if self.initial_state.carrier_density < 0.0 || self.initial_state.photon_density < 0.0 {
            return Err(Error::config("sim initial densities must be >= 0"));
        }
        Ok(())
    }

    fn recording(&self) -> (usize, usize) {
        // first recorded step index and recorded sample count
        let i0 = (self.transient_skip / self.dt - 1e-9).ceil().max(0.0) as usize;
        let span = (self.t_end - self.transient_skip) / (self.dt * self.record_stride as f64);
        let count = (span + 1e-9).floor() as usize + 1;
        (i0, count)
    }
}

/// Uniformly sampled multi-series record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Time of the first sample (s).
    pub t0: f64,
    /// Sample spacing, dt * record_stride (s).
    pub dt_sample: f64,
    pub carrier_density: Vec<f64>,
    pub photon_density: Vec<f64>,
    pub phase: Vec<f64>,
    pub laser_power: Vec<f64>,
    pub modulator_drive: Vec<f64>,
    pub output_power: Vec<f64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.output_power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output_power.is_empty()
    }

    /// Absolute time of sample `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt_sample
    }
}

/// Integrates the laser alone and records its state and output power.
/// Without a modulator the output series equals the laser power and the
/// drive series is zero.
pub fn run_laser(p: &LaserParams, drive: &Waveform, cfg: &SimConfig) -> Result<Trace> {
    p.validate()?;
    // integrates unconditionally, so the step guard applies regardless of
    // the configured source mode
    SimConfig { source: SourceMode::Laser, ..cfg.clone() }.validate(p)?;
    let (state_series, laser_power, t0) = integrate_laser(p, drive, cfg)?;
    let n = laser_power.len();
    let (carrier, photon, phase) = split_states(state_series);
    Ok(Trace {
        t0,
        dt_sample: cfg.dt * cfg.record_stride as f64,
        carrier_density: carrier,
        photon_density: photon,
        phase,
        output_power: laser_power.clone(),
        laser_power,
        modulator_drive: vec![0.0; n],
    })
}

/// Full transmitter: laser (or constant master) feeding the quasi-static
/// modulator under its own drive.
pub fn run_link(
    p: &LaserParams,
    m: &ModulatorParams,
    laser_drive: &Waveform,
    mod_drive: &Waveform,
    cfg: &SimConfig,
) -> Result<Trace> {
    p.validate()?;
    m.validate()?;
    cfg.validate(p)?;
    let dt_sample = cfg.dt * cfg.record_stride as f64;

    let (states, laser_power, t0) = match cfg.source {
        SourceMode::Laser => integrate_laser(p, laser_drive, cfg)?,
        SourceMode::ConstantMaster => {
            let (i0, count) = cfg.recording();
            let t0 = i0 as f64 * cfg.dt;
            (vec![LaserState::ZERO; count], vec![m.input_power; count], t0)
        }
    };

    let mod_sampler = Sampler::new(mod_drive, cfg.t_end + 2.0 * cfg.dt)?;
    let drive_v: Vec<f64> =
        (0..laser_power.len()).map(|i| mod_sampler.sample(t0 + i as f64 * dt_sample)).collect();
    let output = modulate(&laser_power, t0, dt_sample, |t| mod_sampler.sample(t), &m.absorption);

    let (carrier, photon, phase) = split_states(states);
    Ok(Trace {
        t0,
        dt_sample,
        carrier_density: carrier,
        photon_density: photon,
        phase,
        laser_power,
        modulator_drive: drive_v,
        output_power: output,
    })
}

fn integrate_laser(
    p: &LaserParams,
    drive: &Waveform,
    cfg: &SimConfig,
) -> Result<(Vec<LaserState>, Vec<f64>, f64)> {
    let sampler = Sampler::new(drive, cfg.t_end + 2.0 * cfg.dt)?;
    let (i0, count) = cfg.recording();
    let last = i0 + (count - 1) * cfg.record_stride;

    let mut states = Vec::with_capacity(count);
    let mut powers = Vec::with_capacity(count);
    let mut state = cfg.initial_state;
    let mut record = |i: usize, s: &LaserState| {
        if i >= i0 && (i - i0).is_multiple_of(cfg.record_stride) {
            states.push(*s);
            powers.push(output_power(s.photon_density, p));
        }
    };
    record(0, &state);
    for i in 0..last {
        let t = i as f64 * cfg.dt;
        state = rk4_step(&state, |t| sampler.sample(t), t, cfg.dt, p)?;
        record(i + 1, &state);
    }
    debug_assert_eq!(states.len(), count);
    Ok((states, powers, i0 as f64 * cfg.dt))
}

fn split_states(states: Vec<LaserState>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut carrier = Vec::with_capacity(states.len());
    let mut photon = Vec::with_capacity(states.len());
    let mut phase = Vec::with_capacity(states.len());
    for s in states {
        carrier.push(s.carrier_density);
        photon.push(s.photon_density);
        phase.push(s.phase);
    }
    (carrier, photon, phase)
}

/// A fully specified transmitter run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    pub laser: LaserParams,
    pub modulator: ModulatorParams,
    pub laser_drive: Waveform,
    pub mod_drive: Waveform,
    pub sim: SimConfig,
}

impl LinkScenario {
    pub fn run(&self) -> Result<Trace> {
        run_link(&self.laser, &self.modulator, &self.laser_drive, &self.mod_drive, &self.sim)
    }

    /// Retunes every PRBS drive to `rate` and re-derives the default step
    /// and span for that rate (dt = min(tau_p/10, UI/200) under laser
    /// integration, UI/200 otherwise; span = transient skip + 160 bits).
    pub fn with_bit_rate(&self, rate: f64) -> Result<LinkScenario> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::config("bit rate must be > 0"));
        }
        let ui = 1.0 / rate;
        let laser_drive = self.laser_drive.with_bit_rate(rate);
        let mod_drive = self.mod_drive.with_bit_rate(rate);
        laser_drive.validate()?;
        mod_drive.validate()?;
        let dt = match self.sim.source {
            SourceMode::Laser => (self.laser.tau_p / 10.0).min(ui / 200.0),
            SourceMode::ConstantMaster => ui / 200.0,
        };
        let sim = SimConfig {
            dt,
            t_end: self.sim.transient_skip + SWEEP_RUN_BITS as f64 * ui,
            ..self.sim.clone()
        };
        sim.validate(&self.laser)?;
        Ok(LinkScenario { laser: self.laser.clone(), modulator: self.modulator.clone(), laser_drive, mod_drive, sim })
    }
}

/// Runs independent scenarios concurrently; results are keyed by the input
/// index, so parallel and serial execution agree exactly.
pub fn run_batch(jobs: &[LinkScenario]) -> Vec<Result<Trace>> {
    jobs.par_iter().map(|job| job.run()).collect()
}
