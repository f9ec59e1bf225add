use dsim_core::experiments::{calibrate_pi_pulse, ExperimentConfig};
use dsim_core::noise::FieldTrajectory;
use dsim_core::propagate::{
    adiabatic_prepare, compile_sequence, evolve, expm, expm_apply, ramp_sequence, Environment,
    Frame, MwDrive, PulseSegment, PulseSequence, QuantumState, RfDrive,
};
use dsim_core::spin::{build_driven_hamiltonian, dressed_spectrum, Ket, PhysicalConstants, ZERO};
use num_complex::Complex64;
use proptest::prelude::*;

fn max_diff(a: &Ket, b: &Ket) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max)
}

#[test]
fn norm_drift_over_1e5_steps() {
    let c = PhysicalConstants::default();
    let field = FieldTrajectory::constant(0.05, 1.0, 1000.0);
    let env = Environment {
        constants: &c,
        field: &field,
        m_i: 0,
    };
    let seg = PulseSegment::dressed(1000.0, MwDrive::constant(1.6))
        .with_rf(RfDrive::square(0.07, 1.35));
    let seq = PulseSequence::new(Frame::symmetric(0.4), vec![seg]);
    let schedule = compile_sequence(&seq, &env).unwrap();
    assert!(schedule.steps.len() >= 100_000, "{}", schedule.steps.len());
    let out = evolve(&QuantumState::basis(ZERO), &schedule);
    assert!(out.norm_defect() <= 1e-9, "{}", out.norm_defect());
}

#[test]
fn halving_the_step_leaves_an_rf_pulse_unchanged() {
    let cfg = ExperimentConfig::default();
    let pulse = calibrate_pi_pulse(&cfg).unwrap();
    let c = cfg.constants;
    let field = FieldTrajectory::constant(0.0, 1.0, pulse.duration);
    let env = Environment {
        constants: &c,
        field: &field,
        m_i: 0,
    };
    let g = dressed_spectrum(&c, cfg.drive.delta, cfg.drive.omega, 0.0).unwrap().state_g;
    let run = |dt: f64| {
        let seq = PulseSequence::new(
            Frame::symmetric(cfg.drive.delta),
            vec![pulse.segment(cfg.drive.omega, 0.0)],
        )
        .with_dt_max(dt);
        compile_sequence(&seq, &env).unwrap().apply(&g)
    };
    let d = max_diff(&run(0.01), &run(0.005));
    assert!(d < 1e-6, "{d}");
}

#[test]
fn halving_the_step_leaves_a_ramp_unchanged() {
    let c = PhysicalConstants::default();
    let field = FieldTrajectory::constant(0.02, 1.0, 50.0);
    let env = Environment {
        constants: &c,
        field: &field,
        m_i: 0,
    };
    let psi0 = QuantumState::basis(ZERO).amplitudes;
    let run = |dt: f64| {
        let seq = ramp_sequence(0.4, 0.0, 1.6, 50.0).with_dt_max(dt);
        compile_sequence(&seq, &env).unwrap().apply(&psi0)
    };
    let d = max_diff(&run(0.1), &run(0.05));
    assert!(d < 1e-6, "{d}");
}

#[test]
fn adiabatic_fidelity_grows_with_ramp_time() {
    let c = PhysicalConstants::default();
    let f: Vec<f64> = [1.0, 5.0, 10.0, 25.0, 50.0]
        .iter()
        .map(|&t| adiabatic_prepare(&c, 0.4, 1.6, t).unwrap().1)
        .collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]), "{f:?}");
    assert!(f[4] >= 0.99, "{f:?}");
}

proptest! {
    #[test]
    fn series_and_spectral_exponentials_agree(
        delta in -2.0f64..2.0,
        omega in 0.0f64..4.0,
        b in -0.5f64..0.5,
        dt in 0.0f64..1.0,
        re in proptest::array::uniform3(-1.0f64..1.0),
        im in proptest::array::uniform3(-1.0f64..1.0),
    ) {
        let h = build_driven_hamiltonian(&PhysicalConstants::default(), delta, omega, b, [0.2, 0.9]);
        let psi: Ket = [0, 1, 2].map(|i| Complex64::new(re[i], im[i]));
        let spectral = h.propagate_ket(&psi, dt);
        prop_assert!(max_diff(&expm_apply(&h, dt, &psi), &spectral) < 1e-10);
        prop_assert!(max_diff(&expm(&h, dt).apply(&psi), &spectral) < 1e-10);
    }
}
