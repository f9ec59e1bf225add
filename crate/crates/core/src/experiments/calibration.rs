use crate::error::{Error, Result};
use crate::numeric::golden_min;
use crate::propagate::{Frame, MwDrive, PulseSegment, RfDrive};
use crate::spin::{braket, dressed_spectrum_shifted, rf_matrix_element};

use super::{ExperimentConfig, Realization};

/// Matrix elements |⟨d|S_z|g⟩| at or below this cannot drive the dressed qubit.
pub const VANISHING_MATRIX_ELEMENT: f64 = 1e-6;

const REFINE_ROUNDS: usize = 3;

/// A calibrated RF gate on the dressed qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiPulse {
    /// 1/(2·γ_e·b_rf·|⟨d|S_z|g⟩|), μs.
    pub t_pi_analytic: f64,
    /// Peak RF amplitude, G.
    pub b_rf: f64,
    /// Carrier, MHz.
    pub f_rf: f64,
    /// Total pulse length including edges, μs.
    pub duration: f64,
    pub rise: f64,
    pub fall: f64,
    /// Simulated |⟨d|U|g⟩|² without noise.
    pub transfer: f64,
}

impl PiPulse {
    pub fn rf(&self, phase: f64) -> RfDrive {
        RfDrive {
            b_rf: self.b_rf,
            f_rf: self.f_rf,
            phase,
            rise: self.rise,
            fall: self.fall,
        }
    }

    /// The same pulse at half amplitude: a π/2 rotation.
    pub fn half(&self) -> PiPulse {
        PiPulse {
            b_rf: 0.5 * self.b_rf,
            t_pi_analytic: 2.0 * self.t_pi_analytic,
            transfer: f64::NAN,
            ..*self
        }
    }

    /// The gate as a segment under constant two-tone protection.
    pub fn segment(&self, omega: f64, phase: f64) -> PulseSegment {
        PulseSegment::dressed(self.duration, MwDrive::constant(omega)).with_rf(self.rf(phase))
    }
}

fn matrix_element(cfg: &ExperimentConfig) -> Result<f64> {
    let m = rf_matrix_element(cfg.drive.delta, cfg.drive.omega)?;
    if m <= VANISHING_MATRIX_ELEMENT {
        return Err(Error::VanishingMatrixElement(m));
    }
    Ok(m)
}

/// The configured RF amplitude, or the one giving the configured π time.
pub fn dressed_rf_amplitude(cfg: &ExperimentConfig) -> Result<f64> {
    let m = matrix_element(cfg)?;
    Ok(cfg
        .rf
        .b_rf
        .unwrap_or(1.0 / (2.0 * cfg.constants.gamma_e * cfg.rf.pi_time * m)))
}

/// Noiseless |⟨d|U|g⟩|² for a pulse starting at t = 0 in the dressed state |g⟩.
fn transfer(cfg: &ExperimentConfig, pulse: &PiPulse) -> Result<f64> {
    let spec = dressed_spectrum_shifted(cfg.drive.delta, cfg.drive.omega, 0.0)?;
    let quiet = Realization::quiet(cfg);
    let psi = quiet.run(
        0,
        Frame::symmetric(cfg.drive.delta),
        &[pulse.segment(cfg.drive.omega, 0.0)],
        0.0,
        &spec.state_g,
    )?;
    Ok(braket(&spec.state_d, &psi).norm_sqr())
}

fn calibrate(cfg: &ExperimentConfig, rise: f64, fall: f64) -> Result<PiPulse> {
    let m = matrix_element(cfg)?;
    let b_rf = dressed_rf_amplitude(cfg)?;
    let t_pi = 1.0 / (2.0 * cfg.constants.gamma_e * b_rf * m);
    let w_dg = dressed_spectrum_shifted(cfg.drive.delta, cfg.drive.omega, 0.0)?.w_dg;
    // an edge longer than the π time would carry more than the whole rotation
    let (rise, fall) = (rise.min(t_pi), fall.min(t_pi));
    let mut pulse = PiPulse {
        t_pi_analytic: t_pi,
        b_rf,
        f_rf: cfg.rf.f_rf.unwrap_or(w_dg),
        // raised-cosine edges carry half their length in area
        duration: t_pi + 0.5 * (rise + fall),
        rise,
        fall,
        transfer: 0.0,
    };
    let d0 = pulse.duration;
    for _ in 0..REFINE_ROUNDS {
        if cfg.rf.f_rf.is_none() {
            let (lo, hi) = (w_dg - 0.2 / t_pi, w_dg + 0.3 / t_pi);
            let (f, _) = golden_min(
                |f| transfer(cfg, &PiPulse { f_rf: f, ..pulse }).map(|p| 1.0 - p),
                lo,
                hi,
                1e-7,
            )?;
            pulse.f_rf = f;
        }
        let (d, _) = golden_min(
            |d| transfer(cfg, &PiPulse { duration: d, ..pulse }).map(|p| 1.0 - p),
            (0.8 * d0).max(rise + fall),
            1.2 * d0,
            1e-6,
        )?;
        pulse.duration = d;
    }
    pulse.transfer = transfer(cfg, &pulse)?;
    Ok(pulse)
}

/// Shaped RF π pulse on |g⟩ ↔ |d⟩: analytic π time from the matrix element,
/// then carrier and length refined against the full noiseless simulation.
/// Edges are capped at the analytic π time.
pub fn calibrate_pi_pulse(cfg: &ExperimentConfig) -> Result<PiPulse> {
    calibrate(cfg, cfg.rf.edge, cfg.rf.edge)
}

/// As [`calibrate_pi_pulse`] for a square pulse.
pub fn calibrate_square_pi_pulse(cfg: &ExperimentConfig) -> Result<PiPulse> {
    calibrate(cfg, 0.0, 0.0)
}
