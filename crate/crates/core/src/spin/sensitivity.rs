use super::dressed::{dressed_spectrum, dressed_spectrum_shifted};
use super::hamiltonian::bare_spectrum;
use super::operator::OperatorMatrix;
use super::PhysicalConstants;
use crate::error::{Error, Result};
use crate::numeric::brent_root;

/// Default finite-difference step, Gauss.
pub const FD_STEP: f64 = 1e-3;
/// Ratio interval searched for the vanishing curvature.
pub const SWEET_SPOT_BRACKET: (f64, f64) = (2.0, 8.0);

/// Central difference of order 1 or 2 with one Richardson step (h, h/2).
fn richardson<F>(mut f: F, x0: f64, h: f64, order: u8) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut central = |h: f64| -> Result<f64> {
        let (fp, fm) = (f(x0 + h)?, f(x0 - h)?);
        Ok(match order {
            1 => (fp - fm) / (2.0 * h),
            _ => (fp - 2.0 * f(x0)? + fm) / (h * h),
        })
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn check_order(order: u8) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("derivative order {order} is not 1 or 2")))
    }
}

/// d^order w_dg / db^order at `b0` (MHz/G or MHz/G²).
pub fn gap_sensitivity(
    c: &PhysicalConstants,
    delta: f64,
    omega: f64,
    b0: f64,
    order: u8,
) -> Result<f64> {
    check_order(order)?;
    richardson(
        |b| Ok(dressed_spectrum(c, delta, omega, b)?.w_dg),
        b0,
        FD_STEP,
        order,
    )
}

/// Derivative of the bare |0⟩↔|−1⟩ transition frequency with respect to b.
pub fn bare_gap_sensitivity(c: &PhysicalConstants, b0: f64, m_i: i8, order: u8) -> Result<f64> {
    check_order(order)?;
    richardson(|b| Ok(bare_spectrum(c, b, m_i).w_0m1), b0, FD_STEP, order)
}

/// Curvature of w_dg at b = 0 for Ω = ratio·Δ.
fn curvature_at_ratio(c: &PhysicalConstants, delta: f64, ratio: f64) -> Result<f64> {
    gap_sensitivity(c, delta, ratio * delta, 0.0, 2)
}

/// (ratio, d²w_dg/db²) pairs for a brute-force scan.
pub fn gap_curvature_scan(
    c: &PhysicalConstants,
    delta: f64,
    ratios: &[f64],
) -> Result<Vec<(f64, f64)>> {
    ratios
        .iter()
        .map(|&r| Ok((r, curvature_at_ratio(c, delta, r)?)))
        .collect()
}

/// Ω/Δ at which the field curvature of w_dg vanishes at b = 0.
pub fn find_sweet_spot_ratio(c: &PhysicalConstants, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be > 0")));
    }
    let (lo, hi) = SWEET_SPOT_BRACKET;
    brent_root(|r| curvature_at_ratio(c, delta, r), lo, hi, 1e-10, 200)
}

/// |⟨d|S_z|g⟩| at b = 0.
pub fn rf_matrix_element(delta: f64, omega: f64) -> Result<f64> {
    if omega == 0.0 {
        return Ok(0.0);
    }
    let s = dressed_spectrum_shifted(delta, omega, 0.0)?;
    Ok(OperatorMatrix::sz()
        .matrix_element(&s.state_d, &s.state_g)
        .norm())
}
