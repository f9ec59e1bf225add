//! Schrödinger propagation of the three-level state through pulse sequences.
//!
//! Time is in μs and Hamiltonians in MHz; a step of length dt applies
//! exp(−2πi·H·dt). Time-dependent segments use a fourth-order
//! commutator-free Magnus integrator; constant segments are exponentiated
//! in one step.

mod engine;
mod sequence;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::FieldTrajectory;
use crate::spin::{dressed_spectrum_shifted, PhysicalConstants, ZERO};

pub use engine::{
    compile_sequence, compile_sequence_at, evolve, evolve_recorded, expm, expm_apply,
    hamiltonian_at, Environment, QuantumState, Schedule, Step,
};
pub use sequence::{
    Frame, MwDrive, PulseSegment, PulseSequence, RfDrive, DT_PLAIN, DT_RF,
};

/// Linear ramp of both tones from `from` to `to` over `duration`.
pub fn ramp_sequence(delta: f64, from: f64, to: f64, duration: f64) -> PulseSequence {
    PulseSequence::new(
        Frame::symmetric(delta),
        vec![PulseSegment::dressed(duration, MwDrive::ramp(from, to))],
    )
}

/// Noiseless linear ramp 0 → `omega_final` from |0⟩; returns the state and
/// its overlap |⟨g|ψ⟩|² with the dressed ground state at `omega_final`.
pub fn adiabatic_prepare(
    constants: &PhysicalConstants,
    delta: f64,
    omega_final: f64,
    t_ramp: f64,
) -> Result<(QuantumState, f64)> {
    if !(t_ramp >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_ramp = {t_ramp} < 0")));
    }
    let start = QuantumState::basis(ZERO);
    if omega_final == 0.0 {
        return Ok((start, 1.0));
    }
    let g = dressed_spectrum_shifted(delta, omega_final, 0.0)?.state_g;
    if t_ramp == 0.0 {
        return Ok((start, start.fidelity(&g)));
    }
    let field = FieldTrajectory::constant(0.0, 1.0, t_ramp);
    let env = Environment {
        constants,
        field: &field,
        m_i: 0,
    };
    let seq = ramp_sequence(delta, 0.0, omega_final, t_ramp);
    let out = evolve(&start, &compile_sequence(&seq, &env)?);
    Ok((out, out.fidelity(&g)))
}

/// Fluorescence readout: signal = 1 − C·(1 − p₀), optionally Poisson
/// sampled with `shots` repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Readout {
    pub contrast: f64,
    pub shots: Option<u64>,
}

impl Default for Readout {
    fn default() -> Self {
        Readout {
            contrast: 0.3,
            shots: None,
        }
    }
}

impl Readout {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.contrast) {
            return Err(Error::InvalidParameter(format!(
                "contrast {} must lie in [0, 1]",
                self.contrast
            )));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        Ok(())
    }

    pub fn signal(&self, p0: f64) -> f64 {
        1.0 - self.contrast * (1.0 - p0.clamp(0.0, 1.0))
    }

    /// Shot-noised estimate of the signal; exact when `shots` is None.
    pub fn sample<R: Rng + ?Sized>(&self, p0: f64, rng: &mut R) -> f64 {
        let s = self.signal(p0);
        match self.shots {
            None => s,
            Some(n) => {
                let lambda = s * n as f64;
                if lambda <= 0.0 {
                    return 0.0;
                }
                let k: f64 = Poisson::new(lambda).map(|p| p.sample(rng)).unwrap_or(lambda);
                k / n as f64
            }
        }
    }
}

/// Contrast-mapped |0⟩ population of a state.
pub fn readout_map(state: &QuantumState, readout: &Readout) -> f64 {
    readout.signal(state.population(ZERO))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn contrast_map() {
        let r = Readout::default();
        assert_eq!(r.signal(1.0), 1.0);
        assert!((r.signal(0.0) - 0.7).abs() < 1e-15);
        assert_eq!(readout_map(&QuantumState::basis(ZERO), &r), 1.0);
    }

    #[test]
    fn shot_noise_is_unbiased() {
        let r = Readout {
            shots: Some(1_000_000),
            ..Default::default()
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 200;
        let mean: f64 = (0..n).map(|_| r.sample(0.5, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.85).abs() < 5.0 * (0.85f64 / 1e6).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn instant_ramp_overlap() {
        let c = PhysicalConstants::default();
        let (psi, f) = adiabatic_prepare(&c, 0.4, 1.6, 0.0).unwrap();
        assert_eq!(psi, QuantumState::basis(ZERO));
        let c2 = 1.6f64 * 1.6 / 2.0;
        let lg = (0.4 - (0.16f64 + 2.0 * 1.6 * 1.6).sqrt()) / 2.0;
        assert!((f - c2 / (c2 + lg * lg)).abs() < 1e-12);
        assert!((f - 0.58704).abs() < 1e-5);
        let (psi, f) = adiabatic_prepare(&c, 0.4, 0.0, 10.0).unwrap();
        assert_eq!(psi, QuantumState::basis(ZERO));
        assert_eq!(f, 1.0);
    }

    #[test]
    fn slow_ramp_prepares_ground_state() {
        let c = PhysicalConstants::default();
        let (_, f) = adiabatic_prepare(&c, 0.4, 1.6, 50.0).unwrap();
        assert!(f >= 0.99, "{f}");
    }
}
