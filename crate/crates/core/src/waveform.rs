//! Deterministic scalar drive signals (laser current or modulator voltage).
//!
//! All shapes are pure functions of time; a [`Sampler`] caches the PRBS bit
//! sequence so tight integration loops do not re-run the shift register.

use crate::error::{Error, Result};

/// Maximal-length feedback taps, keyed by register length.
///
/// Tap pair (L, k) realizes the recurrence s[n] = s[n-L] ^ s[n-k]:
/// 7: x^7+x^6+1, 15: x^15+x^14+1, 23: x^23+x^18+1, 31: x^31+x^28+1.
const LFSR_TAPS: [(u32, u32); 4] = [(7, 6), (15, 14), (23, 18), (31, 28)];

/// A drive waveform, usable for current (A) or voltage (V).
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// Flat level for all t.
    Constant { level: f64 },
    /// Trapezoidal pulse: base level, linear rise over `t_rise` starting at
    /// `t_start`, flat top of duration `width`, linear fall over `t_fall`.
    Pulse { base: f64, amplitude: f64, t_start: f64, width: f64, t_rise: f64, t_fall: f64 },
    /// Base level until `t_start`, then base + slope * (t - t_start).
    Ramp { base: f64, slope: f64, t_start: f64 },
    /// NRZ data from a maximal-length LFSR. Each bit holds one bit period;
    /// level changes are linear ramps of duration `t_edge` centered on the
    /// bit boundaries, so the mid-bit value is always the settled level.
    PrbsNrz { bit_rate: f64, register_length: u32, seed: u32, low: f64, high: f64, t_edge: f64 },
    /// Linear interpolation through (time, value) samples, clamped to the
    /// endpoint values outside the covered range.
    Piecewise { times: Vec<f64>, values: Vec<f64> },
}

impl Waveform {
    /// Checks the structural invariants of the variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            Waveform::Constant { level } => require_finite("level", *level),
            Waveform::Pulse { base, amplitude, t_start, width, t_rise, t_fall } => {
                require_finite("base", *base)?;
                require_finite("amplitude", *amplitude)?;
                require_finite("t_start", *t_start)?;
                if !(*width > 0.0) {
                    return Err(Error::config("pulse width must be > 0"));
                }
                if *t_rise < 0.0 || *t_fall < 0.0 {
                    return Err(Error::config("pulse t_rise and t_fall must be >= 0"));
                }
                Ok(())
            }
            Waveform::Ramp { base, slope, t_start } => {
                require_finite("base", *base)?;
                require_finite("slope", *slope)?;
                require_finite("t_start", *t_start)
            }
            Waveform::PrbsNrz { bit_rate, register_length, seed, low, high, t_edge } => {
                if !(*bit_rate > 0.0) {
                    return Err(Error::config("prbs bit_rate must be > 0"));
                }
                require_finite("low", *low)?;
                require_finite("high", *high)?;
                if *t_edge < 0.0 {
                    return Err(Error::config("prbs t_edge must be >= 0"));
                }
                if *t_edge >= 1.0 / *bit_rate {
                    return Err(Error::config(format!(
                        "prbs t_edge {:e} s must be shorter than one bit period {:e} s",
                        t_edge,
                        1.0 / bit_rate
                    )));
                }
                Lfsr::new(*register_length, *seed).map(|_| ())
            }
            Waveform::Piecewise { times, values } => {
                if times.len() < 2 {
                    return Err(Error::config("piecewise waveform needs >= 2 points"));
                }
                if times.len() != values.len() {
                    return Err(Error::config("piecewise times and values differ in length"));
                }
                for w in times.windows(2) {
                    if !(w[1] > w[0]) {
                        return Err(Error::config("piecewise times must be strictly increasing"));
                    }
                }
                for (&t, &v) in times.iter().zip(values) {
                    require_finite("times", t)?;
                    require_finite("values", v)?;
                }
                Ok(())
            }
        }
    }

    /// Samples the waveform at time `t >= 0`. Pure and total on valid data.
    ///
    /// For `PrbsNrz` this steps the shift register from the seed on every
    /// call (O(bit index)); use [`Sampler`] in integration loops.
    pub fn sample(&self, t: f64) -> f64 {
        match self {
            Waveform::Constant { level } => *level,
            Waveform::Pulse { base, amplitude, t_start, width, t_rise, t_fall } => {
                let dt = t - t_start;
                if dt < 0.0 {
                    return *base;
                }
                if dt < *t_rise {
                    return base + amplitude * dt / t_rise;
                }
                let top_end = t_rise + width;
                if dt < top_end {
                    return base + amplitude;
                }
                if dt < top_end + t_fall {
                    return base + amplitude * (1.0 - (dt - top_end) / t_fall);
                }
                *base
            }
            Waveform::Ramp { base, slope, t_start } => {
                if t < *t_start {
                    *base
                } else {
                    base + slope * (t - t_start)
                }
            }
            Waveform::PrbsNrz { bit_rate, register_length, seed, low, high, t_edge } => {
                let k = (t * bit_rate) as usize;
                // bits k-1 .. k+1 are enough for both adjacent transitions
                let bits = prbs_bits(*register_length, *seed, k + 2)
                    .expect("validated PrbsNrz parameters");
                nrz_value(&bits, *bit_rate, *low, *high, *t_edge, t)
            }
            Waveform::Piecewise { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                if t >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = times.partition_point(|&x| x <= t);
                let (t0, t1) = (times[i - 1], times[i]);
                let (v0, v1) = (values[i - 1], values[i]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Bit rate of a `PrbsNrz` drive, if this is one.
    pub fn bit_rate(&self) -> Option<f64> {
        match self {
            Waveform::PrbsNrz { bit_rate, .. } => Some(*bit_rate),
            _ => None,
        }
    }

    /// Returns a copy with the PRBS seed replaced (no-op for other shapes).
    pub fn with_seed(&self, new_seed: u32) -> Waveform {
        match self {
            Waveform::PrbsNrz { bit_rate, register_length, low, high, t_edge, .. } => {
                Waveform::PrbsNrz {
                    bit_rate: *bit_rate,
                    register_length: *register_length,
                    seed: new_seed,
                    low: *low,
                    high: *high,
                    t_edge: *t_edge,
                }
            }
            other => other.clone(),
        }
    }

    /// Returns a copy with the PRBS bit rate replaced (no-op for other shapes).
    pub fn with_bit_rate(&self, rate: f64) -> Waveform {
        match self {
            Waveform::PrbsNrz { register_length, seed, low, high, t_edge, .. } => {
                Waveform::PrbsNrz {
                    bit_rate: rate,
                    register_length: *register_length,
                    seed: *seed,
                    low: *low,
                    high: *high,
                    t_edge: *t_edge,
                }
            }
            other => other.clone(),
        }
    }
}

fn require_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite")))
    }
}

/// NRZ level train with linear transitions centered on bit boundaries.
/// The first and last boundaries without a neighbor bit hold the settled level.
fn nrz_value(bits: &[u8], bit_rate: f64, low: f64, high: f64, t_edge: f64, t: f64) -> f64 {
    let ui = 1.0 / bit_rate;
    let mut k = (t * bit_rate) as usize;
    if k >= bits.len() {
        k = bits.len() - 1;
    }
    let level = |b: u8| if b == 1 { high } else { low };
    let t_in = t - k as f64 * ui;
    let half = 0.5 * t_edge;
    if t_edge > 0.0 && t_in < half && k > 0 {
        let (a, b) = (level(bits[k - 1]), level(bits[k]));
        return a + (b - a) * (t_in + half) / t_edge;
    }
    if t_edge > 0.0 && t_in > ui - half && k + 1 < bits.len() {
        let (a, b) = (level(bits[k]), level(bits[k + 1]));
        return a + (b - a) * (t_in - (ui - half)) / t_edge;
    }
    level(bits[k])
}

/// Fibonacci LFSR; the output bit is the register LSB before the shift.
struct Lfsr {
    state: u32,
    mask: u32,
    width: u32,
}

impl Lfsr {
    fn new(register_length: u32, seed: u32) -> Result<Self> {
        let Some(&(_, tap)) = LFSR_TAPS.iter().find(|(l, _)| *l == register_length) else {
            return Err(Error::config(format!(
                "prbs register_length must be one of 7, 15, 23, 31 (got {register_length})"
            )));
        };
        let max_state = (1u32 << register_length) - 1;
        if seed == 0 || seed > max_state {
            return Err(Error::config(format!(
                "prbs seed must be in [1, 2^{register_length} - 1] (got {seed})"
            )));
        }
        Ok(Lfsr {
            state: seed,
            mask: 1 | (1 << (register_length - tap)),
            width: register_length,
        })
    }

    fn next_bit(&mut self) -> u8 {
        let out = (self.state & 1) as u8;
        let feedback = (self.state & self.mask).count_ones() & 1;
        self.state = (self.state >> 1) | (feedback << (self.width - 1));
        out
    }
}

/// First `n` bits of the maximal-length sequence for the given register.
pub fn prbs_bits(register_length: u32, seed: u32, n: usize) -> Result<Vec<u8>> {
    let mut lfsr = Lfsr::new(register_length, seed)?;
    Ok((0..n).map(|_| lfsr.next_bit()).collect())
}

/// A waveform compiled for repeated sampling on a bounded time range.
///
/// For `PrbsNrz` the bit sequence up to `horizon` is cached; all other
/// shapes delegate to [`Waveform::sample`]. Within the horizon the sampled
/// values are identical to the uncompiled waveform.
pub struct Sampler {
    waveform: Waveform,
    bits: Option<Vec<u8>>,
}

impl Sampler {
    pub fn new(waveform: &Waveform, horizon: f64) -> Result<Self> {
        waveform.validate()?;
        let bits = match waveform {
            Waveform::PrbsNrz { bit_rate, register_length, seed, .. } => {
                let n = (horizon * bit_rate).ceil() as usize + 2;
                Some(prbs_bits(*register_length, *seed, n)?)
            }
            _ => None,
        };
        Ok(Sampler { waveform: waveform.clone(), bits })
    }

    pub fn sample(&self, t: f64) -> f64 {
        match (&self.waveform, &self.bits) {
            (Waveform::PrbsNrz { bit_rate, low, high, t_edge, .. }, Some(bits)) => {
                nrz_value(bits, *bit_rate, *low, *high, *t_edge, t)
            }
            _ => self.waveform.sample(t),
        }
    }
}
