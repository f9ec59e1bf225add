//! Bath-field and microwave-amplitude noise with per-trajectory seeding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::PhysicalConstants;

/// Lower bound on the drive amplitude factor 1 + ε.
pub const MW_FACTOR_FLOOR: f64 = 0.01;

/// Independent random streams derived from one trajectory index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Field,
    MwAmplitude,
    Shots,
}

impl Stream {
    fn salt(self) -> u64 {
        match self {
            Stream::Field => 0x6669_656c_6400_0001,
            Stream::MwAmplitude => 0x6d77_616d_7000_0002,
            Stream::Shots => 0x7368_6f74_7300_0003,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for (master seed, trajectory, stream); independent of evaluation order.
pub fn derive_seed(master_seed: u64, trajectory: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ trajectory) ^ stream.salt())
}

pub fn stream_rng(master_seed: u64, trajectory: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, trajectory, stream))
}

/// Bath and drive-noise statistics. `tau_c = inf` means quasi-static.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// rms bath field, G.
    pub sigma_b: f64,
    /// Bath correlation time, μs.
    pub tau_c: f64,
    /// Fractional rms of the MW amplitude.
    pub sigma_eps: f64,
    pub master_seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            sigma_b: calibrate_bath(0.93, &PhysicalConstants::default()),
            tau_c: f64::INFINITY,
            sigma_eps: 0.0,
            master_seed: 20_240_101,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            sigma_b: 0.0,
            sigma_eps: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_b >= 0.0 && self.sigma_b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma_b = {} must be finite and >= 0",
                self.sigma_b
            )));
        }
        if !(self.tau_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_c = {} must be > 0 or inf",
                self.tau_c
            )));
        }
        if !(0.0..0.5).contains(&self.sigma_eps) {
            return Err(Error::InvalidParameter(format!(
                "sigma_eps = {} must lie in [0, 0.5)",
                self.sigma_eps
            )));
        }
        Ok(())
    }

    pub fn is_quasi_static(&self) -> bool {
        self.tau_c.is_infinite() || self.sigma_b == 0.0
    }
}

/// σ_b whose quasi-static Gaussian field gives a Ramsey envelope
/// exp[−(t/T2*)²].
pub fn calibrate_bath(t2_star: f64, c: &PhysicalConstants) -> f64 {
    if t2_star.is_infinite() {
        return 0.0;
    }
    std::f64::consts::SQRT_2 / (2.0 * std::f64::consts::PI * c.gamma_e * t2_star)
}

/// One realization of the bath field on a uniform grid plus the MW factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Drive amplitude factor 1 + ε.
    pub eps: f64,
    constant: bool,
}

impl FieldTrajectory {
    /// A trajectory with a fixed field and MW factor.
    pub fn constant(b: f64, eps: f64, duration: f64) -> Self {
        FieldTrajectory {
            grid: vec![0.0, duration.max(f64::MIN_POSITIVE)],
            values: vec![b, b],
            eps,
            constant: true,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn duration(&self) -> f64 {
        *self.grid.last().unwrap_or(&0.0)
    }

    /// Field at `t` by linear interpolation; held at the end value outside the grid.
    pub fn value_at(&self, t: f64) -> f64 {
        if self.constant || t <= self.grid[0] {
            return self.values[0];
        }
        let n = self.grid.len();
        if t >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let dt = self.grid[1] - self.grid[0];
        let k = (((t - self.grid[0]) / dt) as usize).min(n - 2);
        let w = (t - self.grid[k]) / dt;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    pub fn check_covers(&self, needed: f64) -> Result<()> {
        if self.constant || self.duration() >= needed * (1.0 - 1e-12) {
            Ok(())
        } else {
            Err(Error::NoiseCoverage {
                covered: self.duration(),
                needed,
            })
        }
    }
}

/// Bath-field realization for one trajectory on [0, duration] with step dt.
pub fn sample_field_trajectory(
    model: &NoiseModel,
    duration: f64,
    dt: f64,
    trajectory: u64,
) -> Result<FieldTrajectory> {
    if !(duration > 0.0 && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration = {duration} and dt = {dt} must be > 0"
        )));
    }
    let eps = sample_mw_amplitude_factor(model, trajectory);
    let mut rng = stream_rng(model.master_seed, trajectory, Stream::Field);
    let z: f64 = StandardNormal.sample(&mut rng);
    let b0 = model.sigma_b * z;
    if model.is_quasi_static() {
        let n = (duration / dt).ceil() as usize + 1;
        let grid = (0..n).map(|k| k as f64 * dt).collect();
        return Ok(FieldTrajectory {
            grid,
            values: vec![b0; n],
            eps,
            constant: true,
        });
    }
    let n = (duration / dt).ceil() as usize + 1;
    let decay = (-dt / model.tau_c).exp();
    let kick = model.sigma_b * (1.0 - decay * decay).sqrt();
    let mut values = Vec::with_capacity(n);
    let mut b = b0;
    values.push(b);
    for _ in 1..n {
        let xi: f64 = StandardNormal.sample(&mut rng);
        b = b * decay + kick * xi;
        values.push(b);
    }
    Ok(FieldTrajectory {
        grid: (0..n).map(|k| k as f64 * dt).collect(),
        values,
        eps,
        constant: false,
    })
}

/// Quasi-static drive amplitude factor 1 + ε, floored at 0.01.
pub fn sample_mw_amplitude_factor(model: &NoiseModel, trajectory: u64) -> f64 {
    if model.sigma_eps == 0.0 {
        return 1.0;
    }
    let mut rng = stream_rng(model.master_seed, trajectory, Stream::MwAmplitude);
    let z: f64 = StandardNormal.sample(&mut rng);
    (1.0 + model.sigma_eps * z).max(MW_FACTOR_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_reference_value() {
        let s = calibrate_bath(0.93, &PhysicalConstants::default());
        assert!((s - 0.08637).abs() < 1e-5);
        let c = PhysicalConstants::default();
        assert!((calibrate_bath(1.86, &c) * 2.0 - s).abs() < 1e-15);
        assert_eq!(calibrate_bath(f64::INFINITY, &c), 0.0);
    }

    #[test]
    fn quasi_static_trajectory_is_flat() {
        let m = NoiseModel::default();
        let t = sample_field_trajectory(&m, 10.0, 0.1, 7).unwrap();
        assert!(t.values.iter().all(|&v| v == t.values[0]));
        assert_eq!(t.values.len(), t.grid.len());
        assert!(t.grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn quasi_static_value_does_not_depend_on_duration() {
        let m = NoiseModel::default();
        let a = sample_field_trajectory(&m, 1.0, 0.1, 3).unwrap();
        let b = sample_field_trajectory(&m, 50.0, 0.01, 3).unwrap();
        assert_eq!(a.values[0], b.values[0]);
    }

    #[test]
    fn clamp_applies() {
        let m = NoiseModel {
            sigma_eps: 0.49,
            ..Default::default()
        };
        let lowest = (0..20_000)
            .map(|i| sample_mw_amplitude_factor(&m, i))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(lowest, MW_FACTOR_FLOOR);
        let quiet = NoiseModel::default();
        assert_eq!(sample_mw_amplitude_factor(&quiet, 5), 1.0);
    }

    #[test]
    fn interpolation_between_grid_points() {
        let t = FieldTrajectory {
            grid: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 3.0],
            eps: 1.0,
            constant: false,
        };
        assert_eq!(t.value_at(0.5), 0.5);
        assert_eq!(t.value_at(1.5), 2.0);
        assert_eq!(t.value_at(5.0), 3.0);
        assert!(t.check_covers(2.0).is_ok());
        assert!(matches!(t.check_covers(3.0), Err(Error::NoiseCoverage { .. })));
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::default().validate().is_ok());
        for bad in [
            NoiseModel { sigma_b: -1.0, ..Default::default() },
            NoiseModel { tau_c: 0.0, ..Default::default() },
            NoiseModel { sigma_eps: 0.5, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
