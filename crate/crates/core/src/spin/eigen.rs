//! Cyclic Jacobi eigensolver for 3×3 complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot element and then applies
//! a real Givens rotation, so the iteration stays in Hermitian form and the
//! accumulated eigenvector matrix stays unitary to rounding.

use num_complex::Complex64;

use super::operator::{phase_factor, Ket, OperatorMatrix};

const MAX_SWEEPS: usize = 50;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; 3],
    pub vectors: OperatorMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Ket {
        self.vectors.column(k)
    }

    /// V · diag(exp(−2πi λ dt)) · V†.
    pub fn propagator(&self, dt: f64) -> OperatorMatrix {
        let v = &self.vectors.0;
        let ph = self.values.map(|l| phase_factor(l * dt));
        let mut u = OperatorMatrix::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    acc += v[i][k] * ph[k] * v[j][k].conj();
                }
                u.0[i][j] = acc;
            }
        }
        u
    }

    pub fn propagate_ket(&self, psi: &Ket, dt: f64) -> Ket {
        let v = &self.vectors.0;
        let mut c = [Complex64::new(0.0, 0.0); 3];
        for (k, ck) in c.iter_mut().enumerate() {
            let proj = v[0][k].conj() * psi[0] + v[1][k].conj() * psi[1] + v[2][k].conj() * psi[2];
            *ck = proj * phase_factor(self.values[k] * dt);
        }
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = v[i][0] * c[0] + v[i][1] * c[1] + v[i][2] * c[2];
        }
        out
    }
}

/// Diagonalizes a Hermitian matrix. Only the upper triangle is trusted; the
/// lower triangle is assumed to be its conjugate.
pub fn eigh(h: &OperatorMatrix) -> HermitianEigen {
    let mut a = h.0;
    // enforce exact Hermiticity of the working copy
    for i in 0..3 {
        a[i][i] = Complex64::new(a[i][i].re, 0.0);
        for j in (i + 1)..3 {
            a[j][i] = a[i][j].conj();
        }
    }
    let mut v = OperatorMatrix::identity().0;

    for _ in 0..MAX_SWEEPS {
        let off = a[0][1].norm_sqr() + a[0][2].norm_sqr() + a[1][2].norm_sqr();
        let diag = a[0][0].re.abs() + a[1][1].re.abs() + a[2][2].re.abs();
        if off == 0.0 || off.sqrt() <= f64::EPSILON * 1e-3 * diag {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            rotate(&mut a, &mut v, p, q);
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    let values = order.map(|k| a[k][k].re);
    let mut vectors = OperatorMatrix::zero();
    for (col, &k) in order.iter().enumerate() {
        for i in 0..3 {
            vectors.0[i][col] = v[i][k];
        }
    }
    HermitianEigen { values, vectors }
}

fn rotate(a: &mut [[Complex64; 3]; 3], v: &mut [[Complex64; 3]; 3], p: usize, q: usize) {
    let z = a[p][q];
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let app = a[p][p].re;
    let aqq = a[q][q].re;
    if app.abs() + 1e3 * r == app.abs() && aqq.abs() + 1e3 * r == aqq.abs() {
        a[p][q] = Complex64::new(0.0, 0.0);
        a[q][p] = Complex64::new(0.0, 0.0);
        return;
    }
    let u = z / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J restricted to (p, q): [[c, s], [-s u*, c u*]]
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -u.conj() * s;
    let jqq = u.conj() * c;

    // A ← A J (columns p, q)
    for row in a.iter_mut() {
        let xp = row[p];
        let xq = row[q];
        row[p] = xp * jpp + xq * jqp;
        row[q] = xp * jpq + xq * jqq;
    }
    // A ← J† A (rows p, q)
    for col in 0..3 {
        let xp = a[p][col];
        let xq = a[q][col];
        a[p][col] = jpp.conj() * xp + jqp.conj() * xq;
        a[q][col] = jpq.conj() * xp + jqq.conj() * xq;
    }
    a[p][q] = Complex64::new(0.0, 0.0);
    a[q][p] = Complex64::new(0.0, 0.0);
    a[p][p] = Complex64::new(a[p][p].re, 0.0);
    a[q][q] = Complex64::new(a[q][q].re, 0.0);
    // V ← V J
    for row in v.iter_mut() {
        let xp = row[p];
        let xq = row[q];
        row[p] = xp * jpp + xq * jqp;
        row[q] = xp * jpq + xq * jqq;
    }
}
