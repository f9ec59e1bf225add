//! Spin-1 operator algebra, the bare and driven Hamiltonians, dressed-state
//! diagonalization and field-sensitivity analysis.
//!
//! Units: energies and frequencies in MHz, fields in Gauss, times in μs.

mod dressed;
pub mod eigen;
mod hamiltonian;
pub mod operator;
mod sensitivity;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dressed::{dressed_spectrum, dressed_spectrum_shifted, DressedSpectrum};
pub use hamiltonian::{
    bare_spectrum, build_bare_hamiltonian, build_driven_hamiltonian, driven_hamiltonian,
    BareSpectrum, TwoToneDrive,
};
pub use operator::{braket, norm_sqr, Ket, OperatorMatrix, MINUS, PLUS, ZERO};
pub use sensitivity::{
    bare_gap_sensitivity, find_sweet_spot_ratio, gap_curvature_scan, gap_sensitivity,
    rf_matrix_element, SWEET_SPOT_BRACKET,
};

/// Zero-field splitting, gyromagnetic ratio, static field and ¹⁴N hyperfine
/// constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Zero-field splitting, MHz.
    pub d: f64,
    /// Electron gyromagnetic ratio, MHz/G.
    pub gamma_e: f64,
    /// Static axial field, G.
    pub b_z: f64,
    /// Axial ¹⁴N hyperfine constant, MHz.
    pub a_hf: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            d: 2870.0,
            gamma_e: 2.802,
            b_z: 12.0,
            a_hf: 2.16,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.d, self.gamma_e, self.b_z, self.a_hf]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("constants must be finite".into()));
        }
        if self.d <= 0.0 {
            return Err(Error::InvalidParameter("D must be > 0".into()));
        }
        if self.gamma_e <= 0.0 {
            return Err(Error::InvalidParameter("gamma_e must be > 0".into()));
        }
        if self.b_z < 0.0 {
            return Err(Error::InvalidParameter("B_z must be >= 0".into()));
        }
        let worst = self.d - self.gamma_e * self.b_z - self.a_hf.abs();
        if worst <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "hyperfine splitting leaves w_(0,-1) = {worst} MHz <= 0"
            )));
        }
        Ok(())
    }

    /// Frequency shift of |±1⟩ (per unit of m_s) from a field offset `b` and
    /// nuclear projection `m_i`, MHz.
    pub fn level_shift(&self, b: f64, m_i: i8) -> f64 {
        self.gamma_e * b + self.a_hf * f64::from(m_i)
    }
}

/// Nuclear-spin treatment of the ¹⁴N hyperfine term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", deny_unknown_fields)]
pub enum NuclearConfig {
    /// A single projection m_I ∈ {−1, 0, +1}.
    Single { m_i: i8 },
    /// Equal mixture over all three projections.
    Mixture,
}

impl Default for NuclearConfig {
    fn default() -> Self {
        NuclearConfig::Single { m_i: 0 }
    }
}

impl NuclearConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            NuclearConfig::Single { m_i } if !(-1..=1).contains(m_i) => Err(
                Error::InvalidParameter(format!("m_I = {m_i} is not in {{-1, 0, +1}}")),
            ),
            _ => Ok(()),
        }
    }

    /// (m_I, weight) pairs; weights sum to one.
    pub fn components(&self) -> Vec<(i8, f64)> {
        match *self {
            NuclearConfig::Single { m_i } => vec![(m_i, 1.0)],
            NuclearConfig::Mixture => vec![(-1, 1.0 / 3.0), (0, 1.0 / 3.0), (1, 1.0 / 3.0)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        PhysicalConstants::default().validate().unwrap();
    }

    #[test]
    fn hyperfine_cannot_close_the_gap() {
        let c = PhysicalConstants {
            a_hf: 3000.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = PhysicalConstants {
            d: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn mixture_weights_sum_to_one() {
        let w: f64 = NuclearConfig::Mixture.components().iter().map(|c| c.1).sum();
        assert!((w - 1.0).abs() < 1e-15);
        assert!(NuclearConfig::Single { m_i: 2 }.validate().is_err());
    }
}
