use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default integrator step with RF active, μs.
pub const DT_RF: f64 = 0.01;
/// Default integrator step without RF, μs.
pub const DT_PLAIN: f64 = 0.1;

/// One microwave tone with a linear amplitude ramp across its segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwDrive {
    /// Rabi frequency at the segment start, MHz.
    pub omega_start: f64,
    /// Rabi frequency at the segment end, MHz.
    pub omega_end: f64,
    pub phase: f64,
}

impl MwDrive {
    pub fn constant(omega: f64) -> Self {
        MwDrive {
            omega_start: omega,
            omega_end: omega,
            phase: 0.0,
        }
    }

    pub fn ramp(from: f64, to: f64) -> Self {
        MwDrive {
            omega_start: from,
            omega_end: to,
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Ω at fractional position `x` ∈ [0, 1] of the segment.
    pub fn omega_at(&self, x: f64) -> f64 {
        self.omega_start + (self.omega_end - self.omega_start) * x
    }

    pub fn is_ramped(&self) -> bool {
        self.omega_start != self.omega_end
    }
}

/// RF field along z: γ_e·b_rf·env(t)·cos(2π f_rf t + φ)·S_z with t the
/// absolute sequence time and raised-cosine edges of length `rise`/`fall`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfDrive {
    /// Peak amplitude, G.
    pub b_rf: f64,
    /// Carrier frequency, MHz.
    pub f_rf: f64,
    pub phase: f64,
    /// Rise time, μs.
    pub rise: f64,
    /// Fall time, μs.
    pub fall: f64,
}

impl RfDrive {
    pub fn square(b_rf: f64, f_rf: f64) -> Self {
        RfDrive {
            b_rf,
            f_rf,
            phase: 0.0,
            rise: 0.0,
            fall: 0.0,
        }
    }

    /// Envelope at local time `t` of a segment of length `duration`.
    pub fn envelope(&self, t: f64, duration: f64) -> f64 {
        let mut a = 1.0;
        if self.rise > 0.0 && t < self.rise {
            a *= (0.5 * PI * t / self.rise).sin().powi(2);
        }
        let left = duration - t;
        if self.fall > 0.0 && left < self.fall {
            a *= (0.5 * PI * left / self.fall).sin().powi(2);
        }
        a
    }
}

/// A stretch of time with fixed drive configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSegment {
    /// Length, μs.
    pub duration: f64,
    /// Tone on |0⟩↔|+1⟩.
    pub mw_plus: Option<MwDrive>,
    /// Tone on |0⟩↔|−1⟩.
    pub mw_minus: Option<MwDrive>,
    pub rf: Option<RfDrive>,
}

impl PulseSegment {
    pub fn free(duration: f64) -> Self {
        PulseSegment {
            duration,
            mw_plus: None,
            mw_minus: None,
            rf: None,
        }
    }

    /// Both tones with the same ramp.
    pub fn dressed(duration: f64, mw: MwDrive) -> Self {
        PulseSegment {
            duration,
            mw_plus: Some(mw),
            mw_minus: Some(mw),
            rf: None,
        }
    }

    pub fn with_rf(mut self, rf: RfDrive) -> Self {
        self.rf = Some(rf);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "segment duration {} must be > 0",
                self.duration
            )));
        }
        for mw in [self.mw_plus, self.mw_minus].into_iter().flatten() {
            if mw.omega_start < 0.0 || mw.omega_end < 0.0 {
                return Err(Error::InvalidParameter("negative Rabi frequency".into()));
            }
        }
        if let Some(rf) = self.rf {
            if rf.f_rf < 0.0 || rf.rise < 0.0 || rf.fall < 0.0 {
                return Err(Error::InvalidParameter("invalid RF drive".into()));
            }
            if rf.rise + rf.fall > self.duration * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(
                    "RF edges are longer than the segment".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn is_ramped(&self) -> bool {
        [self.mw_plus, self.mw_minus]
            .into_iter()
            .flatten()
            .any(|m| m.is_ramped())
    }
}

/// Detunings of the two microwave tones defining the rotating frame:
/// bare transition frequency (m_I = 0, b = 0) minus tone frequency, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Frame {
    pub delta_plus: f64,
    pub delta_minus: f64,
}

impl Frame {
    pub fn symmetric(delta: f64) -> Self {
        Frame {
            delta_plus: delta,
            delta_minus: delta,
        }
    }
}

/// Ordered segments in one rotating frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub segments: Vec<PulseSegment>,
    pub frame: Frame,
    /// Integrator step bound, μs; None selects the default.
    pub dt_max: Option<f64>,
}

impl PulseSequence {
    pub fn new(frame: Frame, segments: Vec<PulseSegment>) -> Self {
        PulseSequence {
            segments,
            frame,
            dt_max: None,
        }
    }

    pub fn with_dt_max(mut self, dt: f64) -> Self {
        self.dt_max = Some(dt);
        self
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    fn max_rf_frequency(&self) -> Option<f64> {
        self.segments
            .iter()
            .filter_map(|s| s.rf)
            .map(|rf| rf.f_rf)
            .reduce(f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidParameter("empty pulse sequence".into()));
        }
        self.segments.iter().try_for_each(PulseSegment::validate)?;
        self.resolved_dt_max().map(|_| ())
    }

    /// Step bound after defaults, checked against 1/(20 f_rf).
    pub fn resolved_dt_max(&self) -> Result<f64> {
        let f = self.max_rf_frequency();
        let dt = self
            .dt_max
            .unwrap_or(if f.is_some() { DT_RF } else { DT_PLAIN });
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt_max = {dt} must be > 0")));
        }
        if let Some(f) = f.filter(|&f| f > 0.0) {
            let bound = 1.0 / (20.0 * f);
            if dt > bound {
                return Err(Error::Resolution { dt_max: dt, bound });
            }
        }
        Ok(dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raised_cosine_edges() {
        let rf = RfDrive {
            rise: 2.0,
            fall: 2.0,
            ..RfDrive::square(0.1, 1.0)
        };
        assert_eq!(rf.envelope(0.0, 10.0), 0.0);
        assert!((rf.envelope(1.0, 10.0) - 0.5).abs() < 1e-15);
        assert_eq!(rf.envelope(5.0, 10.0), 1.0);
        assert!(rf.envelope(10.0, 10.0).abs() < 1e-30);
        assert_eq!(RfDrive::square(0.1, 1.0).envelope(0.0, 1.0), 1.0);
    }

    #[test]
    fn resolution_bound() {
        let seg = PulseSegment::free(1.0).with_rf(RfDrive::square(0.1, 2.0));
        let seq = PulseSequence::new(Frame::default(), vec![seg]).with_dt_max(0.05);
        assert!(matches!(seq.validate(), Err(Error::Resolution { .. })));
        assert_eq!(seq.clone().with_dt_max(0.025).resolved_dt_max().unwrap(), 0.025);
        let plain = PulseSequence::new(Frame::default(), vec![PulseSegment::free(1.0)]);
        assert_eq!(plain.resolved_dt_max().unwrap(), DT_PLAIN);
    }

    #[test]
    fn invalid_segments() {
        assert!(PulseSegment::free(0.0).validate().is_err());
        assert!(PulseSegment::dressed(1.0, MwDrive::constant(-1.0))
            .validate()
            .is_err());
        let empty = PulseSequence::new(Frame::default(), vec![]);
        assert!(empty.validate().is_err());
    }
}
