//! Quantum-well laser rate-equation model.
//!
//! Three coupled state variables: carrier density N, photon density S, and
//! optical phase. The derivative evaluation, a fixed-step RK4 integrator,
//! and two algebraic oracles (steady state by bisection, closed-form
//! threshold current) live here. Output power is the standard linear map
//! from photon density.

use crate::error::{Error, Result};

/// Electron charge, C (exact SI).
pub const ELECTRON_CHARGE: f64 = 1.602176634e-19;
/// Planck constant, J*s (exact SI).
pub const PLANCK: f64 = 6.62607015e-34;
/// Speed of light, m/s (exact SI).
pub const SPEED_OF_LIGHT: f64 = 299792458.0;

/// Photon energy h*c/lambda in J for a vacuum wavelength in m.
pub fn photon_energy_for_wavelength(lambda: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / lambda
}

/// Rate-equation coefficients.
///
/// The default set is typical of an InGaAs-AlGaAs-GaAs quantum-well device
/// (threshold around 0.7 mA, relaxation resonance a few GHz at twice
/// threshold); it is validated by the property suite, not taken from any
/// measured device.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserParams {
    /// Active-region volume (m^3).
    pub v_a: f64,
    /// Differential gain coefficient (m^3/s).
    pub g0: f64,
    /// Reference carrier density (m^-3); gain vanishes at this density.
    pub n0: f64,
    /// Gain-compression factor (m^3).
    pub eps: f64,
    /// Carrier lifetime (s).
    pub tau_n: f64,
    /// Photon lifetime (s).
    pub tau_p: f64,
    /// Optical confinement factor (dimensionless, in (0, 1]).
    pub gamma: f64,
    /// Spontaneous-emission coupling into the lasing mode (dimensionless).
    pub beta: f64,
    /// Linewidth-enhancement factor (dimensionless).
    pub alpha_lw: f64,
    /// Output efficiency (dimensionless, in (0, 1]).
    pub eta_sp: f64,
    /// Photon energy h*nu (J); derived from the configured wavelength.
    pub photon_energy: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        LaserParams {
            v_a: 1e-17,
            g0: 1.35e-11,
            n0: 5e23,
            eps: 1e-23,
            tau_n: 2e-9,
            tau_p: 2e-12,
            gamma: 0.1,
            beta: 1e-4,
            alpha_lw: 3.0,
            eta_sp: 0.3,
            photon_energy: PLANCK * SPEED_OF_LIGHT / 850e-9,
        }
    }
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_a_m3", self.v_a),
            ("g0_m3_per_s", self.g0),
            ("n0_per_m3", self.n0),
            ("tau_n_s", self.tau_n),
            ("tau_p_s", self.tau_p),
            ("photon_energy", self.photon_energy),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("laser {name} must be > 0 and finite")));
            }
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::config("laser eps_m3 must be >= 0"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("laser gamma must be in (0, 1]"));
        }
        if !(self.beta >= 0.0 && self.beta <= 1.0) {
            return Err(Error::config("laser beta must be in [0, 1]"));
        }
        if !(self.eta_sp > 0.0 && self.eta_sp <= 1.0) {
            return Err(Error::config("laser eta_sp must be in (0, 1]"));
        }
        if !(self.alpha_lw >= 0.0 && self.alpha_lw.is_finite()) {
            return Err(Error::config("laser alpha_lw must be >= 0"));
        }
        Ok(())
    }
}

/// Dynamic variables of the rate equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserState {
    /// Carrier density in the wells (m^-3).
    pub carrier_density: f64,
    /// Photon density in the cavity (m^-3).
    pub photon_density: f64,
    /// Optical field phase (rad, unbounded).
    pub phase: f64,
}

impl LaserState {
    pub const ZERO: LaserState =
        LaserState { carrier_density: 0.0, photon_density: 0.0, phase: 0.0 };
}

/// Time derivatives (dN/dt, dS/dt, dphase/dt) at the given state and drive
/// current.
pub fn derivatives(state: &LaserState, current: f64, p: &LaserParams) -> (f64, f64, f64) {
    let n = state.carrier_density;
    let s = state.photon_density;
    let stimulated = p.g0 * (n - p.n0) / (1.0 + p.eps * s) * s;
    let d_carrier = current / (ELECTRON_CHARGE * p.v_a) - stimulated - n / p.tau_n;
    let d_photon = p.gamma * stimulated - s / p.tau_p + p.gamma * p.beta * n / p.tau_n;
    let d_phase = 0.5 * p.alpha_lw * (p.gamma * p.g0 * (n - p.n0) - 1.0 / p.tau_p);
    (d_carrier, d_photon, d_phase)
}

/// One classical RK4 step of size `dt` from time `t`, sampling the drive at
/// t, t + dt/2 and t + dt.
///
/// Caller must keep dt within the stability guard (dt <= tau_p/10 for
/// engine runs). A step that produces a negative carrier or photon density
/// is an error, never a clamp: it means dt is too large for the trajectory.
pub fn rk4_step<D: Fn(f64) -> f64>(
    state: &LaserState,
    drive: D,
    t: f64,
    dt: f64,
    p: &LaserParams,
) -> Result<LaserState> {
    let i0 = drive(t);
    let i_mid = drive(t + 0.5 * dt);
    let i1 = drive(t + dt);

    let k1 = derivatives(state, i0, p);
    let s2 = advance(state, 0.5 * dt, k1);
    let k2 = derivatives(&s2, i_mid, p);
    let s3 = advance(state, 0.5 * dt, k2);
    let k3 = derivatives(&s3, i_mid, p);
    let s4 = advance(state, dt, k3);
    let k4 = derivatives(&s4, i1, p);

    let next = LaserState {
        carrier_density: state.carrier_density
            + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        photon_density: state.photon_density
            + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        phase: state.phase + dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2),
    };
    if next.carrier_density < 0.0 {
        return Err(Error::NegativeCarrierDensity { t: t + dt });
    }
    if next.photon_density < 0.0 {
        return Err(Error::NegativePhotonDensity { t: t + dt });
    }
    Ok(next)
}

fn advance(s: &LaserState, h: f64, k: (f64, f64, f64)) -> LaserState {
    LaserState {
        carrier_density: s.carrier_density + h * k.0,
        photon_density: s.photon_density + h * k.1,
        phase: s.phase + h * k.2,
    }
}

/// Optical output power (W) for a photon density (m^-3).
pub fn output_power(photon_density: f64, p: &LaserParams) -> f64 {
    photon_density * p.eta_sp * p.photon_energy * p.v_a / (2.0 * p.gamma * p.tau_p)
}

/// Photon density solving dS/dt = 0 at a fixed carrier density.
///
/// With the gain-compression term the condition is a quadratic in S; the
/// physical (non-negative) root is returned. For eps = 0 above the clamped
/// gain there is no finite solution and infinity is returned.
fn photon_density_at(n: f64, p: &LaserParams) -> f64 {
    let feed = p.gamma * p.beta * p.tau_p * n / p.tau_n;
    let gain = p.g0 * p.gamma * p.tau_p * (n - p.n0);
    if p.eps == 0.0 {
        return if gain >= 1.0 { f64::INFINITY } else { feed / (1.0 - gain) };
    }
    let b = 1.0 - gain - feed * p.eps;
    let disc = (b * b + 4.0 * p.eps * feed).sqrt();
    if b > 0.0 {
        // stable form, avoids cancellation between -b and disc
        2.0 * feed / (b + disc)
    } else {
        (disc - b) / (2.0 * p.eps)
    }
}

const STEADY_REL_TOL: f64 = 1e-9;

/// Steady state of the carrier and photon equations for a constant current.
///
/// S is eliminated through dS/dt = 0 and the carrier equation is bisected
/// over N; bisection is derivative-free and robust across the threshold
/// knee. The phase has no fixed point above threshold and is returned as 0.
pub fn steady_state(p: &LaserParams, current: f64) -> Result<LaserState> {
    if current < 0.0 {
        return Err(Error::Domain("steady_state requires current >= 0".into()));
    }
    let pump = current / (ELECTRON_CHARGE * p.v_a);
    if p.eps == 0.0 && p.beta == 0.0 {
        // degenerate pair: dS/dt = 0 holds for any S once the gain clamps,
        // so elimination has no unique branch; use the exact closed form
        let n_th = p.n0 + 1.0 / (p.gamma * p.g0 * p.tau_p);
        let state = if pump > n_th / p.tau_n {
            LaserState {
                carrier_density: n_th,
                photon_density: p.gamma * p.tau_p * (pump - n_th / p.tau_n),
                phase: 0.0,
            }
        } else {
            LaserState { carrier_density: pump * p.tau_n, photon_density: 0.0, phase: 0.0 }
        };
        return Ok(state);
    }
    let carrier_residual = |n: f64| -> f64 {
        let s = photon_density_at(n, p);
        if s.is_infinite() {
            return f64::NEG_INFINITY;
        }
        pump - p.g0 * (n - p.n0) / (1.0 + p.eps * s) * s - n / p.tau_n
    };

    let mut lo = 0.0_f64;
    let mut hi = current * p.tau_n / (ELECTRON_CHARGE * p.v_a);
    if hi > 0.0 {
        // Below transparency, photon reabsorption pushes the fixed point a
        // hair above I*tau_n/(q*V_a); widen until the bracket holds.
        let mut margin = 1e-9;
        let mut tries = 0;
        while carrier_residual(hi) > 0.0 {
            hi *= 1.0 + margin;
            margin *= 2.0;
            tries += 1;
            if tries > 100 {
                return Err(Error::NoConvergence("steady_state bracket expansion".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break; // interval at floating-point resolution
            }
            if carrier_residual(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let n = 0.5 * (lo + hi);
    let s = photon_density_at(n, p);
    let state = LaserState { carrier_density: n, photon_density: s, phase: 0.0 };

    let (dn, ds, _) = derivatives(&state, current, p);
    let stim = p.g0 * (n - p.n0) / (1.0 + p.eps * s) * s;
    let scale_n = pump.abs() + stim.abs() + n / p.tau_n;
    let scale_s = p.gamma * stim.abs() + s / p.tau_p + p.gamma * p.beta * n / p.tau_n;
    let ok_n = scale_n == 0.0 || dn.abs() <= STEADY_REL_TOL * scale_n;
    let ok_s = scale_s == 0.0 || ds.abs() <= STEADY_REL_TOL * scale_s;
    if !(ok_n && ok_s) {
        return Err(Error::NoConvergence(format!(
            "steady_state residuals {:.3e}, {:.3e} above tolerance",
            dn, ds
        )));
    }
    Ok(state)
}

/// Closed-form threshold-current estimate (beta = 0, eps = 0):
/// I_th = q * V_a * N_th / tau_n with N_th = N0 + 1/(Gamma * g0 * tau_p).
pub fn threshold_current(p: &LaserParams) -> f64 {
    let n_th = p.n0 + 1.0 / (p.gamma * p.g0 * p.tau_p);
    ELECTRON_CHARGE * p.v_a * n_th / p.tau_n
}

/// Small-signal relaxation-oscillation frequency estimate,
/// f_r = sqrt(g0 * S_bar / tau_p) / (2 pi), with S_bar from the steady-state
/// solve; gain compression and spontaneous coupling are neglected in the
/// estimate itself.
pub fn relaxation_frequency(p: &LaserParams, current: f64) -> Result<f64> {
    let i_th = threshold_current(p);
    if current <= i_th {
        return Err(Error::BelowThreshold { current, threshold: i_th });
    }
    let steady = steady_state(p, current)?;
    Ok((p.g0 * steady.photon_density / p.tau_p).sqrt() / (2.0 * std::f64::consts::PI))
}
