use num_complex::Complex64;

use super::operator::{OperatorMatrix, MINUS, PLUS, ZERO};
use super::PhysicalConstants;

/// Lab-frame energies of the three sublevels and the two transition
/// frequencies out of |0⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareSpectrum {
    pub e_0: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub w_01: f64,
    pub w_0m1: f64,
}

/// D·S_z² + γ_e·(B_z + b)·S_z + A_hf·m_I·S_z.
pub fn build_bare_hamiltonian(c: &PhysicalConstants, b: f64, m_i: i8) -> OperatorMatrix {
    let zeeman = c.gamma_e * (c.b_z + b) + c.a_hf * f64::from(m_i);
    OperatorMatrix::sz2().scale(c.d) + OperatorMatrix::sz().scale(zeeman)
}

pub fn bare_spectrum(c: &PhysicalConstants, b: f64, m_i: i8) -> BareSpectrum {
    let h = build_bare_hamiltonian(c, b, m_i);
    let e_plus = h[(PLUS, PLUS)].re;
    let e_0 = h[(ZERO, ZERO)].re;
    let e_minus = h[(MINUS, MINUS)].re;
    BareSpectrum {
        e_0,
        e_plus,
        e_minus,
        w_01: e_plus - e_0,
        w_0m1: e_minus - e_0,
    }
}

/// Two microwave tones in the doubly rotating frame: tone "plus" drives
/// |0⟩↔|+1⟩, tone "minus" drives |0⟩↔|−1⟩. Detunings are the bare transition
/// frequency minus the tone frequency.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoToneDrive {
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub phase_plus: f64,
    pub phase_minus: f64,
}

impl TwoToneDrive {
    /// Both tones with the same detuning, Rabi frequency and zero phase.
    pub fn symmetric(delta: f64, omega: f64) -> Self {
        TwoToneDrive {
            delta_plus: delta,
            delta_minus: delta,
            omega_plus: omega,
            omega_minus: omega,
            ..Default::default()
        }
    }
}

/// Interaction-frame Hamiltonian for a level shift `shift` (MHz per unit m_s;
/// γ_e·b plus any hyperfine offset).
pub fn driven_hamiltonian(drive: &TwoToneDrive, shift: f64) -> OperatorMatrix {
    let mut h = OperatorMatrix::diag([drive.delta_plus + shift, 0.0, drive.delta_minus - shift]);
    for (level, omega, phase) in [
        (PLUS, drive.omega_plus, drive.phase_plus),
        (MINUS, drive.omega_minus, drive.phase_minus),
    ] {
        if omega != 0.0 {
            let z = Complex64::from_polar(omega / 2.0, phase);
            h[(ZERO, level)] = z;
            h[(level, ZERO)] = z.conj();
        }
    }
    h
}

/// Σ_ι (Δ + γ_e·b·ι)|ι⟩⟨ι| + (Ω/2)(e^{iφ_ι}|0⟩⟨ι| + h.c.) with ι = ±1.
pub fn build_driven_hamiltonian(
    c: &PhysicalConstants,
    delta: f64,
    omega: f64,
    b: f64,
    phases: [f64; 2],
) -> OperatorMatrix {
    let drive = TwoToneDrive {
        phase_plus: phases[0],
        phase_minus: phases[1],
        ..TwoToneDrive::symmetric(delta, omega)
    };
    driven_hamiltonian(&drive, c.gamma_e * b)
}
