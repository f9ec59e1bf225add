use std::f64::consts::PI;

use num_complex::Complex64;

use super::sequence::{Frame, PulseSegment, PulseSequence};
use crate::error::{Error, Result};
use crate::noise::FieldTrajectory;
use crate::spin::{driven_hamiltonian, norm_sqr, Ket, OperatorMatrix, PhysicalConstants, TwoToneDrive};

// fourth-order commutator-free Magnus: Gauss nodes and mixing weights
const SQRT3_6: f64 = 0.288_675_134_594_812_9;
const NODE_1: f64 = 0.5 - SQRT3_6;
const NODE_2: f64 = 0.5 + SQRT3_6;
const W_1: f64 = 0.25 + SQRT3_6;
const W_2: f64 = 0.25 - SQRT3_6;

/// ‖2π·H·dt‖ above which the eigendecomposition is used instead of the series.
const SERIES_LIMIT: f64 = 1.5;
const SERIES_MAX_TERMS: usize = 60;

/// A normalized spin-1 state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Ket,
}

impl QuantumState {
    pub fn new(amplitudes: Ket) -> Result<Self> {
        let n = norm_sqr(&amplitudes);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "state norm² = {n} is not 1"
            )));
        }
        Ok(QuantumState { amplitudes })
    }

    /// Basis state |k⟩ with k one of PLUS, ZERO, MINUS.
    pub fn basis(k: usize) -> Self {
        let mut a = [Complex64::new(0.0, 0.0); 3];
        a[k] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes: a }
    }

    pub fn population(&self, k: usize) -> f64 {
        self.amplitudes[k].norm_sqr()
    }

    /// |⟨v|ψ⟩|².
    pub fn fidelity(&self, v: &Ket) -> f64 {
        crate::spin::braket(v, &self.amplitudes).norm_sqr()
    }

    pub fn norm_defect(&self) -> f64 {
        (norm_sqr(&self.amplitudes) - 1.0).abs()
    }
}

/// exp(−2πi·H·dt)|ψ⟩.
pub fn expm_apply(h: &OperatorMatrix, dt: f64, psi: &Ket) -> Ket {
    let x = 2.0 * PI * dt;
    if h.frobenius_norm() * x.abs() > SERIES_LIMIT {
        return h.eigh().propagate_ket(psi, dt);
    }
    let floor = 1e-36 * norm_sqr(psi);
    let mut term = *psi;
    let mut sum = *psi;
    for k in 1..=SERIES_MAX_TERMS {
        let f = Complex64::new(0.0, -x / k as f64);
        term = h.apply(&term).map(|z| z * f);
        for i in 0..3 {
            sum[i] += term[i];
        }
        if norm_sqr(&term) <= floor {
            break;
        }
    }
    sum
}

/// exp(−2πi·H·dt) as a matrix.
pub fn expm(h: &OperatorMatrix, dt: f64) -> OperatorMatrix {
    if h.frobenius_norm() * 2.0 * PI * dt.abs() > SERIES_LIMIT {
        return h.propagator(dt);
    }
    let cols = [0, 1, 2].map(|k| {
        let mut e = [Complex64::new(0.0, 0.0); 3];
        e[k] = Complex64::new(1.0, 0.0);
        expm_apply(h, dt, &e)
    });
    OperatorMatrix::from_columns(&cols)
}

/// Noise and nuclear context for one trajectory.
#[derive(Debug, Clone, Copy)]
pub struct Environment<'a> {
    pub constants: &'a PhysicalConstants,
    pub field: &'a FieldTrajectory,
    pub m_i: i8,
}

impl Environment<'_> {
    fn shift_at(&self, t: f64) -> f64 {
        self.constants.gamma_e * self.field.value_at(t) + self.constants.a_hf * f64::from(self.m_i)
    }
}

/// One integrator step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Time-independent stretch: a single exact exponential.
    Exact { h: OperatorMatrix, dt: f64 },
    /// Two exponentials, `first` applied before `second`.
    Magnus {
        t: f64,
        dt: f64,
        first: OperatorMatrix,
        second: OperatorMatrix,
    },
}

impl Step {
    pub fn dt(&self) -> f64 {
        match *self {
            Step::Exact { dt, .. } | Step::Magnus { dt, .. } => dt,
        }
    }

    pub fn apply(&self, psi: &Ket) -> Ket {
        match self {
            Step::Exact { h, dt } => expm_apply(h, *dt, psi),
            Step::Magnus {
                dt, first, second, ..
            } => expm_apply(second, *dt, &expm_apply(first, *dt, psi)),
        }
    }

    pub fn propagator(&self) -> OperatorMatrix {
        match self {
            Step::Exact { h, dt } => expm(h, *dt),
            Step::Magnus {
                dt, first, second, ..
            } => expm(second, *dt) * expm(first, *dt),
        }
    }
}

/// Compiled piecewise schedule of a pulse sequence under one noise realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub steps: Vec<Step>,
    pub t_start: f64,
    pub duration: f64,
}

impl Schedule {
    pub fn apply(&self, psi: &Ket) -> Ket {
        self.steps.iter().fold(*psi, |acc, s| s.apply(&acc))
    }

    pub fn propagator(&self) -> OperatorMatrix {
        self.steps
            .iter()
            .fold(OperatorMatrix::identity(), |u, s| s.propagator() * u)
    }
}

/// Hamiltonian of `seg` at absolute time `t` (segment starts at `t0`).
pub fn hamiltonian_at(
    seg: &PulseSegment,
    frame: &Frame,
    env: &Environment,
    t0: f64,
    t: f64,
) -> OperatorMatrix {
    let local = t - t0;
    let x = local / seg.duration;
    let eps = env.field.eps;
    let (om_p, ph_p) = seg
        .mw_plus
        .map_or((0.0, 0.0), |m| (m.omega_at(x) * eps, m.phase));
    let (om_m, ph_m) = seg
        .mw_minus
        .map_or((0.0, 0.0), |m| (m.omega_at(x) * eps, m.phase));
    let drive = TwoToneDrive {
        delta_plus: frame.delta_plus,
        delta_minus: frame.delta_minus,
        omega_plus: om_p,
        omega_minus: om_m,
        phase_plus: ph_p,
        phase_minus: ph_m,
    };
    let mut h = driven_hamiltonian(&drive, env.shift_at(t));
    if let Some(rf) = seg.rf {
        let a = env.constants.gamma_e
            * rf.b_rf
            * rf.envelope(local, seg.duration)
            * (2.0 * PI * rf.f_rf * t + rf.phase).cos();
        h[(0, 0)] += a;
        h[(2, 2)] -= a;
    }
    h
}

fn compile_segment(
    seg: &PulseSegment,
    frame: &Frame,
    env: &Environment,
    t0: f64,
    dt_max: f64,
    steps: &mut Vec<Step>,
) {
    if seg.rf.is_none() && !seg.is_ramped() && env.field.is_constant() {
        steps.push(Step::Exact {
            h: hamiltonian_at(seg, frame, env, t0, t0),
            dt: seg.duration,
        });
        return;
    }
    let n = (seg.duration / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = seg.duration / n as f64;
    steps.reserve(n);
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let h1 = hamiltonian_at(seg, frame, env, t0, t + NODE_1 * h);
        let h2 = hamiltonian_at(seg, frame, env, t0, t + NODE_2 * h);
        steps.push(Step::Magnus {
            t,
            dt: h,
            first: h1.scale(W_1) + h2.scale(W_2),
            second: h1.scale(W_2) + h2.scale(W_1),
        });
    }
}

/// Builds the step schedule for `seq` starting at absolute time `t_start`.
pub fn compile_sequence_at(
    seq: &PulseSequence,
    env: &Environment,
    t_start: f64,
) -> Result<Schedule> {
    seq.validate()?;
    let dt_max = seq.resolved_dt_max()?;
    let duration = seq.duration();
    env.field.check_covers(t_start + duration)?;
    let mut steps = Vec::new();
    let mut t0 = t_start;
    for seg in &seq.segments {
        compile_segment(seg, &seq.frame, env, t0, dt_max, &mut steps);
        t0 += seg.duration;
    }
    Ok(Schedule {
        steps,
        t_start,
        duration,
    })
}

pub fn compile_sequence(seq: &PulseSequence, env: &Environment) -> Result<Schedule> {
    compile_sequence_at(seq, env, 0.0)
}

pub fn evolve(initial: &QuantumState, schedule: &Schedule) -> QuantumState {
    QuantumState {
        amplitudes: schedule.apply(&initial.amplitudes),
    }
}

/// Evolution recording the state after every step, with the step end times.
pub fn evolve_recorded(initial: &QuantumState, schedule: &Schedule) -> Vec<(f64, QuantumState)> {
    let mut t = schedule.t_start;
    let mut psi = initial.amplitudes;
    schedule
        .steps
        .iter()
        .map(|s| {
            psi = s.apply(&psi);
            t += s.dt();
            (t, QuantumState { amplitudes: psi })
        })
        .collect()
}
