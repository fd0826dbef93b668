//! Time evolution of the two-level qubit under static and modulated drives.
//!
//! The drive adds `A f(Ωt) M` to the qubit Hamiltonian, where `f` is `cos` or
//! its sign (square wave) and `M` is `√(3/2) σx` when the exchange coupling
//! `J'` is modulated, or `|1⟩⟨1|` when the detuning is.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::{mev_to_ghz, HBAR_MEV_S, PLANCK_MEV_S};
use crate::error::{Error, Result};
use crate::linalg::{expm_2x2_hermitian, C64, ZERO};
use crate::schrieffer_wolff::EffectiveQubit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulatedTerm {
    OffDiagonal,
    Detuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    #[default]
    Sine,
    Square,
}

/// Drive parameters. Energies in meV, times in s, angular frequency in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub base: EffectiveQubit,
    pub modulated_term: ModulatedTerm,
    #[serde(default)]
    pub waveform: Waveform,
    pub amplitude: f64,
    pub angular_frequency: f64,
    pub duration: f64,
    /// Defaults to a 200th of the fastest period.
    #[serde(default)]
    pub timestep: Option<f64>,
    /// Keep every n-th step in the trace; defaults to at most 20000 samples.
    #[serde(default)]
    pub record_every: Option<usize>,
}

impl DriveSpec {
    /// Energy of the fastest scale: the qubit gap, the drive quantum and the
    /// drive amplitude.
    pub fn fastest_energy(&self) -> f64 {
        let drive = HBAR_MEV_S * self.angular_frequency.abs();
        self.base.gap().max(drive).max(1.5f64.sqrt() * self.amplitude.abs())
    }

    /// Period of the fastest scale in s, infinite for a trivial drive.
    pub fn fastest_period(&self) -> f64 {
        let e = self.fastest_energy();
        if e > 0.0 {
            PLANCK_MEV_S / e
        } else {
            f64::INFINITY
        }
    }

    pub fn effective_timestep(&self) -> f64 {
        match self.timestep {
            Some(dt) => dt,
            None => {
                let p = self.fastest_period();
                if p.is_finite() {
                    p / 200.0
                } else {
                    self.duration / 1000.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.amplitude, self.angular_frequency, self.duration].iter().all(|x| x.is_finite())
            && self.base.h2.iter().flatten().all(|x| x.is_finite());
        if !finite || self.duration <= 0.0 {
            return Err(Error::InvalidArgument("drive needs finite values and a positive duration".into()));
        }
        if (self.base.h2[0][1] - self.base.h2[1][0]).abs() > 1e-15 * self.base.h2[0][1].abs().max(1.0) {
            return Err(Error::InvalidArgument("base Hamiltonian is not symmetric".into()));
        }
        let dt = self.effective_timestep();
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("timestep must be positive".into()));
        }
        let limit = self.fastest_period() / 50.0;
        if dt > limit {
            return Err(Error::TimestepTooCoarse { timestep: dt, limit });
        }
        Ok(())
    }

    fn hamiltonian(&self, t: f64) -> [[C64; 2]; 2] {
        let phase = self.angular_frequency * t;
        let f = match self.waveform {
            Waveform::Sine => phase.cos(),
            Waveform::Square => {
                let c = phase.cos();
                if c >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        let h = self.base.h2;
        let mut m = [[C64::new(h[0][0], 0.0), C64::new(h[0][1], 0.0)], [C64::new(h[1][0], 0.0), C64::new(h[1][1], 0.0)]];
        let a = self.amplitude * f;
        match self.modulated_term {
            ModulatedTerm::OffDiagonal => {
                let x = 1.5f64.sqrt() * a;
                m[0][1].re += x;
                m[1][0].re += x;
            }
            ModulatedTerm::Detuning => m[1][1].re += a,
        }
        m
    }
}

/// Sampled populations of `|0⟩` and `|1⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub populations: Vec<[f64; 2]>,
    /// State norm at each sample.
    pub fidelity_norm: Vec<f64>,
}

/// Piecewise-constant evolution with the Hamiltonian sampled at step midpoints.
pub fn propagate(drive: &DriveSpec, initial: [C64; 2]) -> Result<EvolutionTrace> {
    drive.validate()?;
    let norm0 = (initial[0].norm_sqr() + initial[1].norm_sqr()).sqrt();
    if (norm0 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("initial state has norm {norm0}")));
    }
    let dt_max = drive.effective_timestep();
    let n_steps = (drive.duration / dt_max).ceil().max(1.0) as usize;
    let dt = drive.duration / n_steps as f64;
    let every = drive.record_every.unwrap_or_else(|| n_steps.div_ceil(20000)).max(1);

    let mut psi = initial;
    let mut trace = EvolutionTrace { times: Vec::new(), populations: Vec::new(), fidelity_norm: Vec::new() };
    let record = |t: f64, psi: &[C64; 2], trace: &mut EvolutionTrace| {
        let p0 = psi[0].norm_sqr();
        let p1 = psi[1].norm_sqr();
        trace.times.push(t);
        trace.populations.push([p0, p1]);
        trace.fidelity_norm.push((p0 + p1).sqrt());
    };
    record(0.0, &psi, &mut trace);
    for k in 0..n_steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let u = expm_2x2_hermitian(&drive.hamiltonian(t_mid), dt / HBAR_MEV_S);
        psi = [u[0][0] * psi[0] + u[0][1] * psi[1], u[1][0] * psi[0] + u[1][1] * psi[1]];
        if (k + 1) % every == 0 || k + 1 == n_steps {
            record((k + 1) as f64 * dt, &psi, &mut trace);
        }
    }
    Ok(trace)
}

/// `(E+ − E−)/h` in GHz.
pub fn resonance_frequency(q: &EffectiveQubit) -> f64 {
    mev_to_ghz(q.gap())
}

/// Rotating-wave Rabi rate `ω` (rad/s) with `p1(t) ≈ sin²(ω t)` for a resonant
/// `J'` modulation of amplitude `A`: `ω = √(3/2) A / (2ħ)`.
pub fn rabi_rate_rwa(amplitude: f64) -> f64 {
    1.5f64.sqrt() * amplitude.abs() / (2.0 * HBAR_MEV_S)
}

/// Fits `p1(t) ≈ sin²(ω t)` and returns `ω` in rad/s, or `None` when `p1`
/// never reaches one half.
pub fn fit_rabi_rate(trace: &EvolutionTrace) -> Option<f64> {
    let p1: Vec<f64> = trace.populations.iter().map(|p| p[1]).collect();
    let k = p1.iter().position(|&x| x >= 0.5)?;
    if k == 0 {
        return None;
    }
    let (t0, t1) = (trace.times[k - 1], trace.times[k]);
    let (y0, y1) = (p1[k - 1], p1[k]);
    let t_half = t0 + (0.5 - y0) * (t1 - t0) / (y1 - y0);
    let w0 = PI / (4.0 * t_half);
    let cost = |w: f64| -> f64 {
        trace.times.iter().zip(&p1).map(|(&t, &y)| {
            let s = (w * t).sin();
            (y - s * s).powi(2)
        })
        .sum()
    };
    // golden-section refinement around the crossing estimate
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.9 * w0, 1.1 * w0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    Some(0.5 * (a + b))
}

/// Largest `p1` reached from `|0⟩` for each drive frequency in `freqs_ghz`.
pub fn contrast_sweep(drive: &DriveSpec, freqs_ghz: &[f64]) -> Result<Vec<(f64, f64)>> {
    use rayon::prelude::*;
    freqs_ghz
        .par_iter()
        .map(|&f| {
            let mut d = drive.clone();
            d.angular_frequency = 2.0 * PI * f * 1e9;
            let tr = propagate(&d, [C64::new(1.0, 0.0), ZERO])?;
            Ok((f, tr.populations.iter().map(|p| p[1]).fold(0.0, f64::max)))
        })
        .collect()
}
