//! Monte-Carlo protocols: ODMR, Ramsey, Rabi, NOT-gate trains and the
//! driven-coherence scan.
//!
//! Every trajectory is a pure function of its index. Trajectories run in
//! parallel batches but are summed strictly in index order, so results do
//! not depend on the worker count.

mod calibration;
mod config;
mod protocols;
mod search;
mod t2prime;

use rayon::prelude::*;

use crate::error::Result;
use crate::noise::{sample_field_trajectory, stream_rng, FieldTrajectory, Stream};
use crate::propagate::{compile_sequence_at, Environment, Frame, PulseSegment, PulseSequence};
use crate::series::{Accumulator, TimeSeries};
use crate::spin::{Ket, OperatorMatrix};

pub use calibration::{
    calibrate_pi_pulse, calibrate_square_pi_pulse, dressed_rf_amplitude, PiPulse,
    VANISHING_MATRIX_ELEMENT,
};
pub use config::{
    validate_grid, BareConfig, DriveConfig, ExperimentConfig, NotGateConfig, RampConfig,
    RfConfig, ScanGrid, T2ScanConfig,
};
pub use protocols::{
    default_grid, run_fid_bare, run_fid_cwdd, run_not_gate_train, run_odmr, run_rabi,
};
pub use search::{search_sigma_eps, SearchOutcome};
pub use t2prime::{run_t2prime_scan, T2PrimePoint, DEFAULT_OMEGAS};

/// Undriven single-tone protocols or the dressed (continuously driven) qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Bare,
    Cwdd,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Bare => "bare",
            Mode::Cwdd => "cwdd",
        }
    }
}

const BATCH: usize = 64;
/// Bath sampling step for correlated (finite τ_c) noise, μs.
const NOISE_DT: f64 = 0.01;

/// Runs `f` for trajectories 0..n and sums the returned per-point values in
/// index order.
pub(crate) fn ensemble<F>(n: usize, points: usize, f: F) -> Result<Accumulator>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let mut acc = Accumulator::new(points);
    let mut start = 0;
    while start < n {
        let end = (start + BATCH).min(n);
        let batch: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|k| f(k as u64))
            .collect::<Result<_>>()?;
        for v in &batch {
            acc.push(v);
        }
        start = end;
    }
    Ok(acc)
}

/// Means and standard errors of readout signals, with Poisson shot noise on
/// each mean when the readout has a shot count.
pub(crate) fn readout_series(
    cfg: &ExperimentConfig,
    x_label: &str,
    x: Vec<f64>,
    acc: &Accumulator,
) -> TimeSeries {
    let (mut mean, mut se) = acc.finish();
    if let Some(shots) = cfg.readout.shots {
        let n = shots as f64;
        for (i, (m, s)) in mean.iter_mut().zip(se.iter_mut()).enumerate() {
            let mut rng = stream_rng(cfg.noise.master_seed, i as u64, Stream::Shots);
            let exact = *m;
            let lambda = exact * n;
            *m = if lambda > 0.0 {
                use rand_distr::{Distribution, Poisson};
                Poisson::new(lambda).map_or(exact, |p| p.sample(&mut rng) / n)
            } else {
                0.0
            };
            *s = (*s * *s + exact.max(0.0) / n).sqrt();
        }
    }
    TimeSeries::new(x_label, x, mean, se, acc.count())
}

/// One noise realization plus the simulation settings needed to propagate
/// through it.
pub(crate) struct Realization<'a> {
    pub cfg: &'a ExperimentConfig,
    pub field: FieldTrajectory,
}

impl<'a> Realization<'a> {
    /// Bath and drive noise of trajectory `traj` covering [0, duration].
    pub fn sample(cfg: &'a ExperimentConfig, duration: f64, traj: u64) -> Result<Self> {
        let duration = duration.max(1e-6);
        let dt = if cfg.noise.is_quasi_static() {
            duration
        } else {
            NOISE_DT.min(cfg.noise.tau_c / 20.0)
        };
        Ok(Realization {
            cfg,
            field: sample_field_trajectory(&cfg.noise, duration, dt, traj)?,
        })
    }

    /// Noise-free realization.
    pub fn quiet(cfg: &'a ExperimentConfig) -> Self {
        Realization {
            cfg,
            field: FieldTrajectory::constant(0.0, 1.0, 1.0),
        }
    }

    pub fn is_static(&self) -> bool {
        self.field.is_constant()
    }

    fn env(&self, m_i: i8) -> Environment<'_> {
        Environment {
            constants: &self.cfg.constants,
            field: &self.field,
            m_i,
        }
    }

    fn sequence(&self, frame: Frame, segs: &[PulseSegment]) -> Option<PulseSequence> {
        let segs: Vec<PulseSegment> = segs.iter().copied().filter(|s| s.duration > 0.0).collect();
        if segs.is_empty() {
            return None;
        }
        let seq = PulseSequence::new(frame, segs);
        Some(match self.cfg.dt_max {
            Some(dt) => seq.with_dt_max(dt),
            None => seq,
        })
    }

    /// Applies `segs`, starting at absolute time `t0`, to `psi`.
    /// Zero-length segments are skipped.
    pub fn run(&self, m_i: i8, frame: Frame, segs: &[PulseSegment], t0: f64, psi: &Ket) -> Result<Ket> {
        match self.sequence(frame, segs) {
            Some(seq) => Ok(compile_sequence_at(&seq, &self.env(m_i), t0)?.apply(psi)),
            None => Ok(*psi),
        }
    }

    pub fn propagator(&self, m_i: i8, frame: Frame, segs: &[PulseSegment], t0: f64) -> Result<OperatorMatrix> {
        match self.sequence(frame, segs) {
            Some(seq) => Ok(compile_sequence_at(&seq, &self.env(m_i), t0)?.propagator()),
            None => Ok(OperatorMatrix::identity()),
        }
    }
}
