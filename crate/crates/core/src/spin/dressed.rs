use num_complex::Complex64;

use super::hamiltonian::{driven_hamiltonian, TwoToneDrive};
use super::operator::{braket, Ket, OperatorMatrix, MINUS, PLUS, ZERO};
use super::PhysicalConstants;
use crate::error::{Error, Result};

/// Eigenvalues closer than this are treated as coincident.
const DEGENERACY_TOL: f64 = 1e-9;
/// Continuity tracking step, as a fraction of the smallest gap at b = 0.
const STEP_FRACTION: f64 = 0.02;
const MAX_STEPS: usize = 20_000;

/// Dressed eigenstates of the symmetric two-tone drive.
#[derive(Debug, Clone, Copy)]
pub struct DressedSpectrum {
    pub e_g: f64,
    pub e_d: f64,
    pub e_e: f64,
    pub w_dg: f64,
    pub w_eg: f64,
    pub state_g: Ket,
    pub state_d: Ket,
    pub state_e: Ket,
    /// |⟨d|S_z|g⟩|.
    pub s_overlap: f64,
}

impl DressedSpectrum {
    fn from_parts(energies: [f64; 3], states: [Ket; 3]) -> Self {
        let [e_g, e_d, e_e] = energies;
        let [state_g, state_d, state_e] = states;
        let s_overlap = OperatorMatrix::sz()
            .matrix_element(&state_d, &state_g)
            .norm();
        DressedSpectrum {
            e_g,
            e_d,
            e_e,
            w_dg: e_d - e_g,
            w_eg: e_e - e_g,
            state_g,
            state_d,
            state_e,
            s_overlap,
        }
    }

    /// Columns g, d, e.
    pub fn basis(&self) -> OperatorMatrix {
        OperatorMatrix::from_columns(&[self.state_g, self.state_d, self.state_e])
    }
}

/// Dressed spectrum at field offset `b` (Gauss) with zero MW phases.
pub fn dressed_spectrum(
    c: &PhysicalConstants,
    delta: f64,
    omega: f64,
    b: f64,
) -> Result<DressedSpectrum> {
    dressed_spectrum_shifted(delta, omega, c.gamma_e * b).map_err(|e| match e {
        Error::DegenerateLabeling(gap, _) => Error::DegenerateLabeling(gap, b),
        other => other,
    })
}

/// Dressed spectrum for a level shift given directly in MHz.
pub fn dressed_spectrum_shifted(delta: f64, omega: f64, shift: f64) -> Result<DressedSpectrum> {
    if !(delta.is_finite() && omega.is_finite() && shift.is_finite()) {
        return Err(Error::InvalidParameter("non-finite dressing parameter".into()));
    }
    if omega < 0.0 {
        return Err(Error::InvalidParameter(format!("omega = {omega} < 0")));
    }
    if omega == 0.0 {
        return undriven(delta, shift);
    }

    let (mut energies, mut states) = zero_field(delta, omega)?;
    if shift == 0.0 {
        return Ok(DressedSpectrum::from_parts(energies, states));
    }

    let gap0 = (energies[1] - energies[0]).min(energies[2] - energies[1]);
    let steps = ((shift.abs() / (STEP_FRACTION * gap0)).ceil() as usize).clamp(1, MAX_STEPS);
    let drive = TwoToneDrive::symmetric(delta, omega);
    for k in 1..=steps {
        let s = shift * k as f64 / steps as f64;
        let eig = driven_hamiltonian(&drive, s).eigh();
        let perm = best_assignment(&states, &eig.vectors);
        for label in 0..3 {
            let v = eig.vector(perm[label]);
            states[label] = align_phase(v, &states[label]);
            energies[label] = eig.values[perm[label]];
        }
    }
    let min_gap = (energies[0] - energies[1])
        .abs()
        .min((energies[1] - energies[2]).abs())
        .min((energies[0] - energies[2]).abs());
    if min_gap < DEGENERACY_TOL {
        return Err(Error::DegenerateLabeling(min_gap, shift));
    }
    Ok(DressedSpectrum::from_parts(energies, states))
}

/// Analytic assignment at b = 0: |d⟩ is the antisymmetric combination at
/// energy Δ, |g⟩ and |e⟩ the lower and upper states of the {|0⟩, symmetric}
/// block with coupling Ω/√2.
fn zero_field(delta: f64, omega: f64) -> Result<([f64; 3], [Ket; 3])> {
    let c = omega / std::f64::consts::SQRT_2;
    let r = (delta * delta + 4.0 * c * c).sqrt();
    // product of the block eigenvalues is −c²; avoid cancellation in the smaller one
    let (l_g, l_e) = if delta >= 0.0 {
        let l_e = (delta + r) / 2.0;
        (-c * c / l_e, l_e)
    } else {
        let l_g = (delta - r) / 2.0;
        (l_g, -c * c / l_g)
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let block = |l: f64| -> Ket {
        let n = (c * c + l * l).sqrt();
        let (a0, a_s) = (c / n, l / n);
        [
            Complex64::new(a_s * h, 0.0),
            Complex64::new(a0, 0.0),
            Complex64::new(a_s * h, 0.0),
        ]
    };
    let d: Ket = [
        Complex64::new(h, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-h, 0.0),
    ];
    Ok(([l_g, delta, l_e], [block(l_g), d, block(l_e)]))
}

/// Without drive the eigenstates are the bare levels: |g⟩ = |0⟩, and |d⟩,
/// |e⟩ the lower and upper of |±1⟩.
fn undriven(delta: f64, shift: f64) -> Result<DressedSpectrum> {
    if shift == 0.0 {
        return Err(Error::DegenerateLabeling(0.0, 0.0));
    }
    let basis = |k: usize| {
        let mut v = [Complex64::new(0.0, 0.0); 3];
        v[k] = Complex64::new(1.0, 0.0);
        v
    };
    let (lo, hi) = if shift > 0.0 { (MINUS, PLUS) } else { (PLUS, MINUS) };
    let e_lo = delta - shift.abs();
    let e_hi = delta + shift.abs();
    for e in [e_lo, e_hi] {
        if e.abs() < DEGENERACY_TOL {
            return Err(Error::DegenerateLabeling(e.abs(), shift));
        }
    }
    Ok(DressedSpectrum::from_parts(
        [0.0, e_lo, e_hi],
        [basis(ZERO), basis(lo), basis(hi)],
    ))
}

/// Permutation (label → eigenvector column) maximizing total overlap.
fn best_assignment(prev: &[Ket; 3], vectors: &OperatorMatrix) -> [usize; 3] {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut ov = [[0.0; 3]; 3];
    for (l, p) in prev.iter().enumerate() {
        for (k, o) in ov[l].iter_mut().enumerate() {
            *o = braket(p, &vectors.column(k)).norm_sqr();
        }
    }
    *PERMS
        .iter()
        .max_by(|a, b| {
            let sa: f64 = (0..3).map(|l| ov[l][a[l]]).sum();
            let sb: f64 = (0..3).map(|l| ov[l][b[l]]).sum();
            sa.total_cmp(&sb)
        })
        .unwrap()
}

fn align_phase(v: Ket, reference: &Ket) -> Ket {
    let z = braket(reference, &v);
    if z.norm() == 0.0 {
        return v;
    }
    let u = z.conj() / z.norm();
    v.map(|x| x * u)
}
