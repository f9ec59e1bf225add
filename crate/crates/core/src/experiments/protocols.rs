use crate::error::Result;
use crate::propagate::{Frame, MwDrive, PulseSegment, RfDrive};
use crate::series::TimeSeries;
use crate::spin::{
    braket, dressed_spectrum_shifted, rf_matrix_element, Ket, NuclearConfig, OperatorMatrix,
    MINUS, ZERO,
};

use super::{
    calibrate_pi_pulse, calibrate_square_pi_pulse, ensemble, readout_series, validate_grid,
    ExperimentConfig, Mode, Realization, ScanGrid,
};

fn basis(k: usize) -> Ket {
    crate::propagate::QuantumState::basis(k).amplitudes
}

fn pop(psi: &Ket, k: usize) -> f64 {
    psi[k].norm_sqr()
}

/// Default abscissa of a protocol: `odmr`, `fid` or `rabi`.
pub fn default_grid(protocol: &str, mode: Mode, cfg: &ExperimentConfig) -> Result<ScanGrid> {
    let round = |v: f64, step: f64| (v / step).round() * step;
    Ok(match (protocol, mode) {
        ("odmr", Mode::Bare) => {
            let w = cfg.constants.d + cfg.constants.gamma_e * cfg.constants.b_z;
            ScanGrid::new(round(w - 4.0, 0.05), round(w + 4.0, 0.05), 0.05)
        }
        ("odmr", Mode::Cwdd) => {
            let w = dressed_spectrum_shifted(cfg.drive.delta, cfg.drive.omega, 0.0)?.w_dg;
            ScanGrid::new(round(w - 0.35, 0.01), round(w + 0.35, 0.01), 0.01)
        }
        ("fid", Mode::Bare) => ScanGrid::new(0.0, 3.0, 0.02),
        ("fid", Mode::Cwdd) => ScanGrid::new(0.0, 60.0, 1.0),
        ("rabi", Mode::Bare) => ScanGrid::new(0.0, 25.0, 0.025),
        ("rabi", Mode::Cwdd) => ScanGrid::new(0.0, 30.0, 0.25),
        _ => {
            return Err(crate::Error::InvalidParameter(format!(
                "no default grid for {protocol}"
            )))
        }
    })
}

fn single_tone(duration: f64, omega: f64, plus: bool) -> PulseSegment {
    let mw = Some(MwDrive::constant(omega));
    PulseSegment {
        duration,
        mw_plus: if plus { mw } else { None },
        mw_minus: if plus { None } else { mw },
        rf: None,
    }
}

fn dressed_hold(cfg: &ExperimentConfig, duration: f64) -> PulseSegment {
    PulseSegment::dressed(duration, MwDrive::constant(cfg.drive.omega))
}

fn ramp_up(cfg: &ExperimentConfig) -> PulseSegment {
    PulseSegment::dressed(cfg.ramps.t1, MwDrive::ramp(0.0, cfg.drive.omega))
}

fn ramp_down(cfg: &ExperimentConfig) -> PulseSegment {
    PulseSegment::dressed(cfg.ramps.t2, MwDrive::ramp(cfg.drive.omega, 0.0))
}

/// |0⟩ population after the closing ramp that starts at `t0`. For a static
/// realization the ramp propagator row is computed once and cached.
struct Closing<'r, 'c> {
    real: &'r Realization<'c>,
    m_i: i8,
    frame: Frame,
    row: Option<OperatorMatrix>,
}

impl<'r, 'c> Closing<'r, 'c> {
    fn new(real: &'r Realization<'c>, m_i: i8) -> Result<Self> {
        let frame = Frame::symmetric(real.cfg.drive.delta);
        let row = if real.is_static() {
            Some(real.propagator(m_i, frame, &[ramp_down(real.cfg)], 0.0)?)
        } else {
            None
        };
        Ok(Closing { real, m_i, frame, row })
    }

    fn p0(&self, psi: &Ket, t0: f64) -> Result<f64> {
        let out = match &self.row {
            Some(u) => u.apply(psi),
            None => self
                .real
                .run(self.m_i, self.frame, &[ramp_down(self.real.cfg)], t0, psi)?,
        };
        Ok(pop(&out, ZERO))
    }
}

/// Readout signal versus probe frequency. Bare mode sweeps a weak π-area
/// pulse on the |0⟩ ↔ |+1⟩ line; cwdd mode sweeps a weak square RF probe
/// on the protected qubit between the ramps.
pub fn run_odmr(cfg: &ExperimentConfig, freqs: &[f64], mode: Mode) -> Result<TimeSeries> {
    cfg.validate()?;
    validate_grid(freqs)?;
    let n = freqs.len();
    let acc = match mode {
        Mode::Bare => {
            let nuclear = cfg.nuclear_or(NuclearConfig::Mixture).components();
            let length = cfg.bare.probe_length;
            let omega = 1.0 / (2.0 * length);
            let c = &cfg.constants;
            ensemble(cfg.trajectory_count(), n, |traj| {
                let real = Realization::sample(cfg, length, traj)?;
                let mut out = vec![0.0; n];
                for &(m_i, w) in &nuclear {
                    for (o, &f) in out.iter_mut().zip(freqs) {
                        let frame = Frame {
                            delta_plus: c.d + c.gamma_e * c.b_z - f,
                            delta_minus: 0.0,
                        };
                        let psi = real.run(m_i, frame, &[single_tone(length, omega, true)], 0.0, &basis(ZERO))?;
                        *o += w * pop(&psi, ZERO);
                    }
                }
                Ok(out.into_iter().map(|p| cfg.readout.signal(p)).collect())
            })?
        }
        Mode::Cwdd => {
            let nuclear = cfg.nuclear_or(NuclearConfig::default()).components();
            let m = rf_matrix_element(cfg.drive.delta, cfg.drive.omega)?;
            if m <= super::VANISHING_MATRIX_ELEMENT {
                return Err(crate::Error::VanishingMatrixElement(m));
            }
            let length = cfg.rf.probe_pi_time;
            let b_probe = 1.0 / (2.0 * cfg.constants.gamma_e * length * m);
            let frame = Frame::symmetric(cfg.drive.delta);
            let t1 = cfg.ramps.t1;
            ensemble(cfg.trajectory_count(), n, |traj| {
                let real = Realization::sample(cfg, t1 + length + cfg.ramps.t2, traj)?;
                let mut out = vec![0.0; n];
                for &(m_i, w) in &nuclear {
                    let prepared = real.run(m_i, frame, &[ramp_up(cfg)], 0.0, &basis(ZERO))?;
                    let closing = Closing::new(&real, m_i)?;
                    for (o, &f) in out.iter_mut().zip(freqs) {
                        let probe = dressed_hold(cfg, length).with_rf(RfDrive::square(b_probe, f));
                        let psi = real.run(m_i, frame, &[probe], t1, &prepared)?;
                        *o += w * closing.p0(&psi, t1 + length)?;
                    }
                }
                Ok(out.into_iter().map(|p| cfg.readout.signal(p)).collect())
            })?
        }
    };
    Ok(readout_series(cfg, "freq_MHz", freqs.to_vec(), &acc))
}

/// Ramsey π/2 – τ – π/2 on |0⟩ ↔ |−1⟩ with a tone detuned by
/// `cfg.bare.fid_detuning`.
pub fn run_fid_bare(cfg: &ExperimentConfig, delays: &[f64]) -> Result<TimeSeries> {
    cfg.validate()?;
    validate_grid(delays)?;
    let nuclear = cfg.nuclear_or(NuclearConfig::Mixture).components();
    let omega = cfg.bare.fid_omega;
    let t_half = 1.0 / (4.0 * omega);
    let frame = Frame {
        delta_plus: 0.0,
        delta_minus: cfg.bare.fid_detuning,
    };
    let tau_max = delays.last().copied().unwrap_or(0.0).max(0.0);
    let n = delays.len();
    let acc = ensemble(cfg.trajectory_count(), n, |traj| {
        let real = Realization::sample(cfg, 2.0 * t_half + tau_max, traj)?;
        let mut out = vec![0.0; n];
        for &(m_i, w) in &nuclear {
            for (o, &tau) in out.iter_mut().zip(delays) {
                let segs = [
                    single_tone(t_half, omega, false),
                    PulseSegment::free(tau),
                    single_tone(t_half, omega, false),
                ];
                let psi = real.run(m_i, frame, &segs, 0.0, &basis(ZERO))?;
                *o += w * pop(&psi, ZERO);
            }
        }
        Ok(out.into_iter().map(|p| cfg.readout.signal(p)).collect())
    })?;
    Ok(readout_series(cfg, "delay_us", delays.to_vec(), &acc))
}

/// Ramsey on the protected qubit: ramp up, RF π/2 at w_dg + offset, hold τ
/// under the drive, second RF π/2 with a phase-continuous carrier, ramp
/// down, read out.
pub fn run_fid_cwdd(cfg: &ExperimentConfig, delays: &[f64], offset: f64) -> Result<TimeSeries> {
    cfg.validate()?;
    validate_grid(delays)?;
    let nuclear = cfg.nuclear_or(NuclearConfig::default()).components();
    let w_dg = dressed_spectrum_shifted(cfg.drive.delta, cfg.drive.omega, 0.0)?.w_dg;
    let mut half = calibrate_pi_pulse(cfg)?.half();
    half.f_rf = w_dg + offset;
    let frame = Frame::symmetric(cfg.drive.delta);
    let t1 = cfg.ramps.t1;
    let d = half.duration;
    let tau_max = delays.last().copied().unwrap_or(0.0).max(0.0);
    let n = delays.len();
    let acc = ensemble(cfg.trajectory_count(), n, |traj| {
        let real = Realization::sample(cfg, t1 + 2.0 * d + tau_max + cfg.ramps.t2, traj)?;
        let mut out = vec![0.0; n];
        for &(m_i, w) in &nuclear {
            let opened = real.run(
                m_i,
                frame,
                &[ramp_up(cfg), half.segment(cfg.drive.omega, 0.0)],
                0.0,
                &basis(ZERO),
            )?;
            let closing = Closing::new(&real, m_i)?;
            for (o, &tau) in out.iter_mut().zip(delays) {
                let held = real.run(m_i, frame, &[dressed_hold(cfg, tau)], t1 + d, &opened)?;
                let psi = real.run(m_i, frame, &[half.segment(cfg.drive.omega, 0.0)], t1 + d + tau, &held)?;
                *o += w * closing.p0(&psi, t1 + 2.0 * d + tau)?;
            }
        }
        Ok(out.into_iter().map(|p| cfg.readout.signal(p)).collect())
    })?;
    Ok(readout_series(cfg, "delay_us", delays.to_vec(), &acc))
}

/// Rabi oscillation versus drive duration: a resonant MW tone on
/// |0⟩ ↔ |−1⟩ (bare) or a resonant square RF drive on |g⟩ ↔ |d⟩ between
/// the ramps (cwdd).
pub fn run_rabi(cfg: &ExperimentConfig, durations: &[f64], mode: Mode) -> Result<TimeSeries> {
    cfg.validate()?;
    validate_grid(durations)?;
    if durations[0] < 0.0 {
        return Err(crate::Error::InvalidParameter("durations must be >= 0".into()));
    }
    let nuclear = cfg.nuclear_or(NuclearConfig::default()).components();
    let n = durations.len();
    let t_max = *durations.last().unwrap_or(&0.0);
    let acc = match mode {
        Mode::Bare => {
            let frame = Frame {
                delta_plus: 0.0,
                delta_minus: 0.0,
            };
            let omega = cfg.bare.omega;
            ensemble(cfg.trajectory_count(), n, |traj| {
                let real = Realization::sample(cfg, t_max, traj)?;
                let mut out = vec![0.0; n];
                for &(m_i, w) in &nuclear {
                    let mut psi = basis(ZERO);
                    let mut t = 0.0;
                    let mut cached: Option<(f64, OperatorMatrix)> = None;
                    for (o, &tau) in out.iter_mut().zip(durations) {
                        let step = tau - t;
                        if step > 0.0 {
                            let seg = single_tone(step, omega, false);
                            psi = if real.is_static() {
                                let u = match &cached {
                                    Some((dt, u)) if (dt - step).abs() <= 1e-12 * step => *u,
                                    _ => {
                                        let u = real.propagator(m_i, frame, &[seg], t)?;
                                        cached = Some((step, u));
                                        u
                                    }
                                };
                                u.apply(&psi)
                            } else {
                                real.run(m_i, frame, &[seg], t, &psi)?
                            };
                        }
                        t = tau;
                        *o += w * pop(&psi, ZERO);
                    }
                }
                Ok(out.into_iter().map(|p| cfg.readout.signal(p)).collect())
            })?
        }
        Mode::Cwdd => {
            let pulse = calibrate_square_pi_pulse(cfg)?;
            let rf = RfDrive::square(pulse.b_rf, pulse.f_rf);
            let frame = Frame::symmetric(cfg.drive.delta);
            let t1 = cfg.ramps.t1;
            ensemble(cfg.trajectory_count(), n, |traj| {
                let real = Realization::sample(cfg, t1 + t_max + cfg.ramps.t2, traj)?;
                let mut out = vec![0.0; n];
                for &(m_i, w) in &nuclear {
                    let mut psi = real.run(m_i, frame, &[ramp_up(cfg)], 0.0, &basis(ZERO))?;
                    let closing = Closing::new(&real, m_i)?;
                    let mut t = 0.0;
                    for (o, &tau) in out.iter_mut().zip(durations) {
                        // a square envelope may be split at any point
                        let seg = dressed_hold(cfg, tau - t).with_rf(rf);
                        psi = real.run(m_i, frame, &[seg], t1 + t, &psi)?;
                        t = tau;
                        *o += w * closing.p0(&psi, t1 + tau)?;
                    }
                }
                Ok(out.into_iter().map(|p| cfg.readout.signal(p)).collect())
            })?
        }
    };
    Ok(readout_series(cfg, "duration_us", durations.to_vec(), &acc))
}

/// Indicator F after n = 0..=n_max successive NOT gates: the population of
/// |−1⟩ (odd n) or |0⟩ (even n) for bare MW π pulses, and of the ideal
/// dressed state |d⟩ (odd n) or |g⟩ (even n) for RF π pulses under
/// protection. The `time_us` column holds the cumulative gate time.
pub fn run_not_gate_train(cfg: &ExperimentConfig, n_max: u32, mode: Mode) -> Result<TimeSeries> {
    cfg.validate()?;
    let nuclear = cfg.nuclear_or(NuclearConfig::default()).components();
    let points = n_max as usize + 1;
    let (acc, gate_time) = match mode {
        Mode::Bare => {
            let omega = cfg.bare.omega;
            let t_pi = 1.0 / (2.0 * omega);
            let frame = Frame {
                delta_plus: 0.0,
                delta_minus: 0.0,
            };
            let acc = ensemble(cfg.trajectory_count(), points, |traj| {
                let real = Realization::sample(cfg, n_max as f64 * t_pi, traj)?;
                let mut out = vec![0.0; points];
                for &(m_i, w) in &nuclear {
                    let seg = single_tone(t_pi, omega, false);
                    let fixed = if real.is_static() {
                        Some(real.propagator(m_i, frame, &[seg], 0.0)?)
                    } else {
                        None
                    };
                    let mut psi = basis(ZERO);
                    out[0] += w * pop(&psi, ZERO);
                    for k in 1..points {
                        psi = match &fixed {
                            Some(u) => u.apply(&psi),
                            None => real.run(m_i, frame, &[seg], (k - 1) as f64 * t_pi, &psi)?,
                        };
                        let target = if k % 2 == 1 { MINUS } else { ZERO };
                        out[k] += w * pop(&psi, target);
                    }
                }
                Ok(out)
            })?;
            (acc, t_pi)
        }
        Mode::Cwdd => {
            let pulse = calibrate_pi_pulse(cfg)?;
            let levels = dressed_spectrum_shifted(cfg.drive.delta, cfg.drive.omega, 0.0)?;
            let frame = Frame::symmetric(cfg.drive.delta);
            let t1 = cfg.ramps.t1;
            let d = pulse.duration;
            let acc = ensemble(cfg.trajectory_count(), points, |traj| {
                let real = Realization::sample(cfg, t1 + n_max as f64 * d, traj)?;
                let mut out = vec![0.0; points];
                for &(m_i, w) in &nuclear {
                    let mut psi = real.run(m_i, frame, &[ramp_up(cfg)], 0.0, &basis(ZERO))?;
                    out[0] += w * braket(&levels.state_g, &psi).norm_sqr();
                    for k in 1..points {
                        let seg = pulse.segment(cfg.drive.omega, 0.0);
                        psi = real.run(m_i, frame, &[seg], t1 + (k - 1) as f64 * d, &psi)?;
                        let target = if k % 2 == 1 { &levels.state_d } else { &levels.state_g };
                        out[k] += w * braket(target, &psi).norm_sqr();
                    }
                }
                Ok(out)
            })?;
            (acc, d)
        }
    };
    let (mean, se) = acc.finish();
    let gates: Vec<f64> = (0..points).map(|k| k as f64).collect();
    let time = gates.iter().map(|k| k * gate_time).collect();
    Ok(TimeSeries::new("gates", gates, mean, se, acc.count()).with_aux("time_us", time))
}
