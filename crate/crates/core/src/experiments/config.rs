use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::propagate::Readout;
use crate::spin::{NuclearConfig, PhysicalConstants};

/// Continuous two-tone drive of the dressed qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    /// Detuning of both tones, MHz.
    pub delta: f64,
    /// Rabi frequency of both tones, MHz.
    pub omega: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            delta: 0.4,
            omega: 1.6,
        }
    }
}

/// Linear turn-on (t1) and turn-off (t2) times of the drive, μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampConfig {
    pub t1: f64,
    pub t2: f64,
}

impl Default for RampConfig {
    fn default() -> Self {
        RampConfig { t1: 50.0, t2: 50.0 }
    }
}

/// RF gates on the dressed qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfConfig {
    /// Target π time used to derive `b_rf` when it is not set, μs.
    pub pi_time: f64,
    /// Raised-cosine rise and fall time of gate pulses, μs.
    pub edge: f64,
    /// Peak RF amplitude, G.
    pub b_rf: Option<f64>,
    /// Fixed RF carrier, MHz; calibrated when unset.
    pub f_rf: Option<f64>,
    /// RF detuning from the gate resonance in the dressed Ramsey sequence, MHz.
    pub fid_offset: f64,
    /// π time of the weak square spectroscopy probe, μs.
    pub probe_pi_time: f64,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            pi_time: 4.0,
            edge: 4.0,
            b_rf: None,
            f_rf: None,
            fid_offset: 0.05,
            probe_pi_time: 20.0,
        }
    }
}

/// Single-tone experiments on the undriven qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BareConfig {
    /// Rabi frequency of Rabi and NOT-gate pulses, MHz.
    pub omega: f64,
    /// Rabi frequency of the Ramsey π/2 pulses, MHz.
    pub fid_omega: f64,
    /// Ramsey detuning from w_{0,-1}, MHz.
    pub fid_detuning: f64,
    /// Length of the ODMR probe pulse, μs.
    pub probe_length: f64,
}

impl Default for BareConfig {
    fn default() -> Self {
        BareConfig {
            omega: 2.0,
            fid_omega: 20.0,
            fid_detuning: 3.0,
            probe_length: 2.0,
        }
    }
}

/// Uniform scan grid `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl ScanGrid {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        ScanGrid { start, stop, step }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.start.is_finite() && self.stop >= self.start) {
            return Err(Error::InvalidParameter(format!(
                "scan grid needs step > 0 and stop >= start (start = {}, stop = {}, step = {})",
                self.start, self.stop, self.step
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        if n > 10_000_000 {
            return Err(Error::InvalidParameter(format!("scan grid has {n} points")));
        }
        // six digits below the step strip the accumulated representation error
        let digits = (6.0 - self.step.log10().floor()).clamp(0.0, 17.0) as usize;
        Ok((0..n)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                let r: f64 = format!("{v:.digits$}").parse().unwrap_or(v);
                if (r - v).abs() <= 1e-6 * self.step { r } else { v }
            })
            .collect())
    }
}

/// Checks that a grid is non-empty, finite and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("scan grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("scan grid has non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("scan grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NotGateConfig {
    pub n_max: u32,
}

impl Default for NotGateConfig {
    fn default() -> Self {
        NotGateConfig { n_max: 40 }
    }
}

/// Driven-coherence scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T2ScanConfig {
    /// Simulated window per Ω, μs.
    pub window: f64,
    /// Demodulation window length in signal periods.
    pub periods: f64,
}

impl Default for T2ScanConfig {
    fn default() -> Self {
        T2ScanConfig {
            window: 250.0,
            periods: 1.0,
        }
    }
}

/// Everything an experiment needs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trajectories: i64,
    /// Integrator step bound, μs; None selects the engine defaults.
    pub dt_max: Option<f64>,
    pub constants: PhysicalConstants,
    pub noise: NoiseModel,
    pub drive: DriveConfig,
    pub ramps: RampConfig,
    pub rf: RfConfig,
    pub bare: BareConfig,
    /// None selects the per-experiment default.
    pub nuclear: Option<NuclearConfig>,
    pub readout: Readout,
    /// Overrides the experiment's default abscissa.
    pub scan: Option<ScanGrid>,
    pub notgate: NotGateConfig,
    pub t2scan: T2ScanConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trajectories: 2000,
            dt_max: None,
            constants: PhysicalConstants::default(),
            noise: NoiseModel::default(),
            drive: DriveConfig::default(),
            ramps: RampConfig::default(),
            rf: RfConfig::default(),
            bare: BareConfig::default(),
            nuclear: None,
            readout: Readout::default(),
            scan: None,
            notgate: NotGateConfig::default(),
            t2scan: T2ScanConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be >= 0")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trajectories < 1 {
            return Err(Error::InvalidParameter(format!(
                "trajectories = {} must be >= 1",
                self.trajectories
            )));
        }
        if let Some(dt) = self.dt_max {
            positive("dt_max", dt)?;
        }
        self.constants.validate()?;
        self.noise.validate()?;
        positive("drive.delta", self.drive.delta)?;
        non_negative("drive.omega", self.drive.omega)?;
        non_negative("ramps.t1", self.ramps.t1)?;
        non_negative("ramps.t2", self.ramps.t2)?;
        positive("rf.pi_time", self.rf.pi_time)?;
        non_negative("rf.edge", self.rf.edge)?;
        if let Some(b) = self.rf.b_rf {
            positive("rf.b_rf", b)?;
        }
        if let Some(f) = self.rf.f_rf {
            positive("rf.f_rf", f)?;
        }
        if !self.rf.fid_offset.is_finite() {
            return Err(Error::InvalidParameter("rf.fid_offset must be finite".into()));
        }
        positive("rf.probe_pi_time", self.rf.probe_pi_time)?;
        positive("bare.omega", self.bare.omega)?;
        positive("bare.fid_omega", self.bare.fid_omega)?;
        if !self.bare.fid_detuning.is_finite() {
            return Err(Error::InvalidParameter("bare.fid_detuning must be finite".into()));
        }
        positive("bare.probe_length", self.bare.probe_length)?;
        if let Some(n) = &self.nuclear {
            n.validate()?;
        }
        self.readout.validate()?;
        if let Some(g) = &self.scan {
            validate_grid(&g.values()?)?;
        }
        positive("t2scan.window", self.t2scan.window)?;
        positive("t2scan.periods", self.t2scan.periods)?;
        Ok(())
    }

    pub fn trajectory_count(&self) -> usize {
        self.trajectories.max(1) as usize
    }

    pub fn nuclear_or(&self, default: NuclearConfig) -> NuclearConfig {
        self.nuclear.unwrap_or(default)
    }

    /// The configured scan grid, or `default` when none is set.
    pub fn grid_or(&self, default: ScanGrid) -> Result<Vec<f64>> {
        self.scan.unwrap_or(default).values()
    }
}
