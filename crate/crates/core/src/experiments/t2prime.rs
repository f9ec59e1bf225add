use num_complex::Complex64;

use crate::analysis::{decay_time_1e, dominant_frequency, sliding_amplitude};
use crate::error::{Error, Result};
use crate::propagate::{Frame, MwDrive, PulseSegment};
use crate::spin::{driven_hamiltonian, NuclearConfig, TwoToneDrive, ZERO};

use super::{ensemble, validate_grid, ExperimentConfig, Realization};

pub const DEFAULT_OMEGAS: [f64; 7] = [1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0];

/// Decay time of the driven coherence at one drive strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T2PrimePoint {
    pub omega: f64,
    /// Dominant frequency of the |0⟩ population, MHz; None if not resolvable.
    pub frequency: Option<f64>,
    /// 1/e time of the demodulated envelope, μs; None if it did not decay
    /// within the window.
    pub t2prime: Option<f64>,
}

impl T2PrimePoint {
    pub fn decayed(&self) -> bool {
        self.t2prime.is_some()
    }
}

fn step_for(omega: f64) -> f64 {
    // ten samples per period of the √2·Ω population oscillation
    (1.0 / (10.0 * std::f64::consts::SQRT_2 * omega)).min(0.05)
}

/// |0⟩ population under both tones on resonance (Δ = 0) at strength `omega`,
/// starting from |0⟩, ensemble-averaged on a uniform grid over the window.
fn driven_population(cfg: &ExperimentConfig, omega: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let window = cfg.t2scan.window;
    let n = (window / step_for(omega)).ceil() as usize;
    let dt = window / n as f64;
    let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let nuclear = cfg.nuclear_or(NuclearConfig::default()).components();
    let acc = ensemble(cfg.trajectory_count(), n + 1, |traj| {
        let real = Realization::sample(cfg, window, traj)?;
        let mut out = vec![0.0; n + 1];
        for &(m_i, w) in &nuclear {
            if real.is_static() {
                let shift = cfg.constants.level_shift(real.field.value_at(0.0), m_i);
                let h = driven_hamiltonian(&TwoToneDrive::symmetric(0.0, omega * real.field.eps), shift);
                let eig = h.eigh();
                // ⟨0|U(t)|0⟩ = Σ_k |V_0k|²·exp(−2πi λ_k t)
                let weights: Vec<f64> = (0..3).map(|k| eig.vector(k)[ZERO].norm_sqr()).collect();
                let rot: Vec<Complex64> = eig
                    .values
                    .iter()
                    .map(|l| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * l * dt))
                    .collect();
                let mut z: Vec<Complex64> = weights.iter().map(|&c| Complex64::new(c, 0.0)).collect();
                for o in out.iter_mut() {
                    *o += w * (z[0] + z[1] + z[2]).norm_sqr();
                    for (zk, r) in z.iter_mut().zip(&rot) {
                        *zk *= r;
                    }
                }
            } else {
                let frame = Frame::symmetric(0.0);
                let mut psi = crate::propagate::QuantumState::basis(ZERO).amplitudes;
                out[0] += w;
                for (k, o) in out.iter_mut().enumerate().skip(1) {
                    let seg = PulseSegment::dressed(dt, MwDrive::constant(omega));
                    psi = real.run(m_i, frame, &[seg], (k - 1) as f64 * dt, &psi)?;
                    *o += w * psi[ZERO].norm_sqr();
                }
            }
        }
        Ok(out)
    })?;
    Ok((t, acc.finish().0))
}

/// Decay time of the driven |0⟩ ↔ bright-state oscillation with both tones
/// on resonance, for each Ω: the ensemble-averaged population is
/// demodulated at its dominant frequency in sliding one-period windows and
/// T2′ is the 1/e time of that envelope.
pub fn run_t2prime_scan(cfg: &ExperimentConfig, omegas: &[f64]) -> Result<Vec<T2PrimePoint>> {
    cfg.validate()?;
    validate_grid(omegas)?;
    if omegas[0] <= 0.0 {
        return Err(Error::InvalidParameter("drive strengths must be > 0".into()));
    }
    omegas
        .iter()
        .map(|&omega| {
            let (t, p0) = driven_population(cfg, omega)?;
            let frequency = match dominant_frequency(&t, &p0) {
                Ok(f) if f > 0.0 => f,
                Ok(_) | Err(Error::AmbiguousFrequency(..)) | Err(Error::DegenerateData(_)) => {
                    return Ok(T2PrimePoint {
                        omega,
                        frequency: None,
                        t2prime: None,
                    })
                }
                Err(e) => return Err(e),
            };
            let t2prime = match sliding_amplitude(&t, &p0, frequency, cfg.t2scan.periods) {
                Ok(env) => decay_time_1e(&env),
                Err(Error::DegenerateData(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(T2PrimePoint {
                omega,
                frequency: Some(frequency),
                t2prime,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;

    #[test]
    fn noiseless_drive_never_decays() {
        let cfg = ExperimentConfig {
            trajectories: 1,
            noise: NoiseModel::noiseless(),
            t2scan: super::super::T2ScanConfig {
                window: 20.0,
                ..Default::default()
            },
            ..Default::default()
        };
        let out = run_t2prime_scan(&cfg, &[2.0]).unwrap();
        assert!(!out[0].decayed());
        let f = out[0].frequency.unwrap();
        assert!((f - 2.0 * std::f64::consts::SQRT_2).abs() < 0.01, "{f}");
    }
}
