//! 3×3 complex operators over the ordered basis {|+1⟩, |0⟩, |−1⟩}.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use super::eigen::{eigh, HermitianEigen};

/// Basis index of |+1⟩.
pub const PLUS: usize = 0;
/// Basis index of |0⟩.
pub const ZERO: usize = 1;
/// Basis index of |−1⟩.
pub const MINUS: usize = 2;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// A three-component complex column vector in the spin-1 basis.
pub type Ket = [Complex64; 3];

/// Inner product ⟨a|b⟩.
pub fn braket(a: &Ket, b: &Ket) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &Ket) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Dense 3×3 complex matrix; Hamiltonians are expressed in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorMatrix(pub [[Complex64; 3]; 3]);

impl OperatorMatrix {
    pub const fn zero() -> Self {
        OperatorMatrix([[C0; 3]; 3])
    }

    pub const fn identity() -> Self {
        OperatorMatrix([[C1, C0, C0], [C0, C1, C0], [C0, C0, C1]])
    }

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.iter().enumerate() {
            m.0[i][i] = Complex64::new(*v, 0.0);
        }
        m
    }

    /// S_z = diag(+1, 0, −1).
    pub fn sz() -> Self {
        Self::diag([1.0, 0.0, -1.0])
    }

    /// S_z² = diag(1, 0, 1).
    pub fn sz2() -> Self {
        Self::diag([1.0, 0.0, 1.0])
    }

    /// |a⟩⟨b| for basis indices.
    pub fn ket_bra(a: usize, b: usize) -> Self {
        let mut m = Self::zero();
        m.0[a][b] = C1;
        m
    }

    /// |u⟩⟨v| for arbitrary kets.
    pub fn outer(u: &Ket, v: &Ket) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = u[i] * v[j].conj();
            }
        }
        m
    }

    /// Builds a unitary whose columns are the given kets.
    pub fn from_columns(cols: &[Ket; 3]) -> Self {
        let mut m = Self::zero();
        for (j, c) in cols.iter().enumerate() {
            for i in 0..3 {
                m.0[i][j] = c[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Ket {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|x| *x *= s);
        m
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|x| *x *= s);
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖H − H†‖ / ‖H‖ (zero for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.frobenius_norm();
        if n == 0.0 {
            return 0.0;
        }
        (*self - self.adjoint()).frobenius_norm() / n
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|x| *x == C0)
    }

    pub fn apply(&self, v: &Ket) -> Ket {
        let mut out = [C0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i][0] * v[0] + self.0[i][1] * v[1] + self.0[i][2] * v[2];
        }
        out
    }

    /// ⟨u|M|v⟩.
    pub fn matrix_element(&self, u: &Ket, v: &Ket) -> Complex64 {
        braket(u, &self.apply(v))
    }

    /// Eigendecomposition; only valid for Hermitian matrices.
    pub fn eigh(&self) -> HermitianEigen {
        eigh(self)
    }

    /// Unitary propagator exp(−2πi·H·dt) for H in MHz and dt in μs.
    pub fn propagator(&self, dt: f64) -> OperatorMatrix {
        self.eigh().propagator(dt)
    }

    /// exp(−2πi·H·dt)|ψ⟩ without forming the full propagator.
    pub fn propagate_ket(&self, psi: &Ket, dt: f64) -> Ket {
        self.eigh().propagate_ket(psi, dt)
    }

    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.adjoint() - OperatorMatrix::identity()).frobenius_norm()
    }
}

impl Index<(usize, usize)> for OperatorMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for OperatorMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(mut self, rhs: OperatorMatrix) -> OperatorMatrix {
        self += rhs;
        self
    }
}

impl AddAssign for OperatorMatrix {
    fn add_assign(&mut self, rhs: OperatorMatrix) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: OperatorMatrix) -> OperatorMatrix {
        self + (-rhs)
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale(-1.0)
    }
}

impl Mul for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: OperatorMatrix) -> OperatorMatrix {
        let mut m = OperatorMatrix::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][0] * rhs.0[0][j]
                    + self.0[i][1] * rhs.0[1][j]
                    + self.0[i][2] * rhs.0[2][j];
            }
        }
        m
    }
}

impl Mul<f64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

/// exp(−2πi·x) as a unit complex number.
pub(crate) fn phase_factor(x: f64) -> Complex64 {
    let a = -2.0 * PI * x;
    Complex64::new(a.cos(), a.sin())
}
