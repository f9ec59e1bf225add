use dsim_core::spin::{
    bare_spectrum, build_bare_hamiltonian, build_driven_hamiltonian, dressed_spectrum,
    find_sweet_spot_ratio, gap_sensitivity, rf_matrix_element, OperatorMatrix, PhysicalConstants,
    MINUS, PLUS, ZERO,
};
use proptest::prelude::*;

fn consts() -> PhysicalConstants {
    PhysicalConstants::default()
}

/// Gap at b = 0 from the 2×2 block of |0⟩ and (|+1⟩ + |−1⟩)/√2; the
/// antisymmetric combination sits at Δ.
fn closed_form_gap(delta: f64, omega: f64) -> f64 {
    delta / 2.0 + (delta * delta / 4.0 + omega * omega / 2.0).sqrt()
}

/// ln|w_dg(b) − w_dg(0)| against ln b by least squares.
fn log_log_slope(delta: f64, omega: f64, bs: &[f64]) -> f64 {
    let c = consts();
    let w0 = dressed_spectrum(&c, delta, omega, 0.0).unwrap().w_dg;
    let pts: Vec<(f64, f64)> = bs
        .iter()
        .map(|&b| {
            let w = dressed_spectrum(&c, delta, omega, b).unwrap().w_dg;
            (b.ln(), (w - w0).abs().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn driven_hamiltonian_is_hermitian(
        delta in -5.0f64..5.0,
        omega in 0.0f64..20.0,
        b in -2.0f64..2.0,
        p1 in -7.0f64..7.0,
        p2 in -7.0f64..7.0,
    ) {
        let h = build_driven_hamiltonian(&consts(), delta, omega, b, [p1, p2]);
        let scale = h.frobenius_norm().max(1.0);
        prop_assert!(h.hermitian_defect() <= 1e-12 * scale);
    }

    #[test]
    fn bare_hamiltonian_is_diagonal_and_linear_in_field(b in -5.0f64..5.0, m in -1i8..=1) {
        let c = consts();
        let h = build_bare_hamiltonian(&c, b, m);
        prop_assert!(h.hermitian_defect() == 0.0);
        let s = bare_spectrum(&c, b, m);
        let split = c.gamma_e * (c.b_z + b) + c.a_hf * f64::from(m);
        prop_assert!((h[(PLUS, PLUS)].re - (c.d + split)).abs() < 1e-9);
        prop_assert!((h[(MINUS, MINUS)].re - (c.d - split)).abs() < 1e-9);
        prop_assert!(h[(ZERO, ZERO)].norm() == 0.0);
        prop_assert!((s.w_01 - s.w_0m1 - 2.0 * split).abs() < 1e-9);
    }

    #[test]
    fn zero_field_gap_and_element_match_two_level_block(
        delta in 0.05f64..5.0,
        omega in 0.05f64..20.0,
    ) {
        let s = dressed_spectrum(&consts(), delta, omega, 0.0).unwrap();
        let w = closed_form_gap(delta, omega);
        prop_assert!((s.w_dg - w).abs() <= 1e-10 * w.max(1.0));
        // S_z maps the symmetric combination onto the antisymmetric one
        let e_g = delta / 2.0 - (delta * delta / 4.0 + omega * omega / 2.0).sqrt();
        let mix = omega / std::f64::consts::SQRT_2;
        let sym_weight = mix.abs() / (mix * mix + (delta - e_g).powi(2)).sqrt();
        let m = rf_matrix_element(delta, omega).unwrap();
        prop_assert!((m - sym_weight).abs() < 1e-9);
    }

    #[test]
    fn dressed_gap_is_even_in_field(
        delta in 0.1f64..3.0,
        ratio in 0.5f64..8.0,
        b in 0.001f64..0.2,
    ) {
        let c = consts();
        let omega = ratio * delta;
        let up = dressed_spectrum(&c, delta, omega, b);
        let down = dressed_spectrum(&c, delta, omega, -b);
        prop_assume!(up.is_ok() && down.is_ok());
        let (up, down) = (up.unwrap(), down.unwrap());
        prop_assert!((up.w_dg - down.w_dg).abs() <= 1e-10 * up.w_dg.abs().max(1.0));
    }

    #[test]
    fn dressed_states_are_orthonormal_eigenvectors(
        delta in 0.1f64..3.0,
        ratio in 0.5f64..8.0,
        b in -0.2f64..0.2,
    ) {
        let c = consts();
        let omega = ratio * delta;
        let s = dressed_spectrum(&c, delta, omega, b);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let h = build_driven_hamiltonian(&c, delta, omega, b, [0.0, 0.0]);
        let states = [s.state_g, s.state_d, s.state_e];
        let energies = [s.e_g, s.e_d, s.e_e];
        for (k, v) in states.iter().enumerate() {
            let hv = h.apply(v);
            let r: f64 = (0..3).map(|i| (hv[i] - v[i] * energies[k]).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(r < 1e-9);
            for (j, u) in states.iter().enumerate() {
                let ip = dsim_core::spin::braket(u, v).norm();
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn propagator_is_unitary(
        delta in -3.0f64..3.0,
        omega in 0.0f64..10.0,
        b in -1.0f64..1.0,
        dt in 0.0f64..2.0,
    ) {
        let h = build_driven_hamiltonian(&consts(), delta, omega, b, [0.3, -1.1]);
        prop_assert!(h.propagator(dt).unitarity_defect() < 1e-10);
    }
}

#[test]
fn sz_is_exact() {
    let sz = OperatorMatrix::sz();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i != j { 0.0 } else { [1.0, 0.0, -1.0][i] };
            assert_eq!(sz[(i, j)].re, want);
            assert_eq!(sz[(i, j)].im, 0.0);
        }
    }
}

#[test]
fn gap_is_quadratic_off_the_sweet_spot() {
    // Ω/Δ = 2 is far from the root; the b² term dominates
    let delta = 0.4;
    let bs = [0.002, 0.004, 0.008];
    let slope = log_log_slope(delta, 2.0 * delta, &bs);
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
}

#[test]
fn gap_is_quartic_at_the_sweet_spot() {
    for delta in [0.4, 2.0] {
        let ratio = find_sweet_spot_ratio(&consts(), delta).unwrap();
        let scale = delta / consts().gamma_e;
        let bs: Vec<f64> = [0.025, 0.05, 0.1].iter().map(|u| u * scale).collect();
        let slope = log_log_slope(delta, ratio * delta, &bs);
        assert!((slope - 4.0).abs() < 0.2, "delta {delta}: {slope}");
    }
}

#[test]
fn curvature_vanishes_only_at_the_root() {
    let c = consts();
    let delta = 0.4;
    let ratio = find_sweet_spot_ratio(&c, delta).unwrap();
    let at = gap_sensitivity(&c, delta, ratio * delta, 0.0, 2).unwrap();
    let below = gap_sensitivity(&c, delta, 0.9 * ratio * delta, 0.0, 2).unwrap();
    let above = gap_sensitivity(&c, delta, 1.1 * ratio * delta, 0.0, 2).unwrap();
    assert!(at.abs() < 1e-6 * below.abs());
    assert!(below * above < 0.0);
}
