use std::f64::consts::PI;

use dsim_core::analysis::{
    find_dips, fit_beat_decay, fit_damped_cosine, fit_gaussian_decay, FitResult,
};
use dsim_core::noise::calibrate_bath;
use dsim_core::series::TimeSeries;
use dsim_core::spin::PhysicalConstants;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

const SHOTS: f64 = 1e6;

fn grid(stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| stop * k as f64 / (n - 1) as f64).collect()
}

fn gauss(a: f64, t2: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |t| a * (-(t / t2).powi(2)).exp() + b
}

fn sample(x: &[f64], f: impl Fn(f64) -> f64) -> TimeSeries {
    TimeSeries::exact("t_us", x.to_vec(), x.iter().map(|&t| f(t)).collect())
}

/// Poisson-counted version of an exact series with N shots per point.
fn shot_noised(s: &TimeSeries, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = s
        .mean
        .iter()
        .map(|&y| Poisson::new(y * SHOTS).unwrap().sample(&mut rng) / SHOTS)
        .collect();
    let se = s.mean.iter().map(|&y| (y / SHOTS).sqrt()).collect();
    TimeSeries::new(&s.x_label, s.x.clone(), mean, se, 1)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn wrapped(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gaussian_round_trip(a in 0.2f64..1.0, t2 in 0.5f64..20.0, b in -0.5f64..0.5) {
        let s = sample(&grid(3.0 * t2, 120), gauss(a, t2, b));
        let fit = fit_gaussian_decay(&s).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(rel(fit.value("amplitude"), a) < 1e-3);
        prop_assert!(rel(fit.t2(), t2) < 1e-3);
        prop_assert!((fit.value("offset") - b).abs() < 1e-3 * a);
    }

    #[test]
    fn damped_cosine_round_trip(
        a in 0.2f64..1.0,
        t2 in 10.0f64..40.0,
        f in 0.04f64..0.3,
        phi in -3.0f64..3.0,
        b in -0.5f64..0.5,
    ) {
        let x: Vec<f64> = (0..241).map(|k| 0.25 * k as f64).collect();
        let s = sample(&x, |t| a * (-(t / t2).powi(2)).exp() * (2.0 * PI * f * t + phi).cos() + b);
        let fit = fit_damped_cosine(&s).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(rel(fit.value("amplitude"), a) < 1e-3);
        prop_assert!(rel(fit.t2(), t2) < 1e-3);
        prop_assert!(rel(fit.value("f"), f) < 1e-3);
        prop_assert!(wrapped(fit.value("phi"), phi) < 1e-3);
    }

    #[test]
    fn accepted_steps_never_raise_the_residual(
        a in 0.2f64..1.0,
        t2 in 0.5f64..5.0,
        seed in 0u64..1000,
    ) {
        let s = shot_noised(&sample(&grid(10.0, 80), gauss(a * 0.5, t2, 0.4)), seed);
        let fit = fit_gaussian_decay(&s).unwrap();
        prop_assert!(fit.rss_history.windows(2).all(|w| w[1] <= w[0]));
    }
}

fn t2_of(fit: &FitResult) -> (f64, f64) {
    (fit.t2(), fit.sigma("T2"))
}

#[test]
fn shot_noise_errors_cover_the_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut one, mut two) = (0, 0);
    let draws = 100;
    for k in 0..draws {
        let a = rand::Rng::random_range(&mut rng, 0.3..0.6);
        let t2 = rand::Rng::random_range(&mut rng, 0.5..2.0);
        let b = rand::Rng::random_range(&mut rng, 0.2..0.4);
        let exact = sample(&grid(4.0, 80), gauss(a, t2, b));
        let fit = fit_gaussian_decay(&shot_noised(&exact, 1000 + k)).unwrap();
        let (t, s) = t2_of(&fit);
        assert!(s > 0.0);
        let z = (t - t2).abs() / s;
        one += (z <= 1.0) as usize;
        two += (z <= 2.0) as usize;
    }
    // a Gaussian estimator lands within 1σ 68% and within 2σ 95% of the time
    let (f1, f2) = (one as f64 / draws as f64, two as f64 / draws as f64);
    assert!((0.55..=0.80).contains(&f1), "1σ coverage {f1}");
    assert!(f2 >= 0.90, "2σ coverage {f2}");
}

#[test]
fn uncertainty_halves_when_points_quadruple() {
    let noise = Normal::new(0.0, 1e-3).unwrap();
    let model = gauss(0.5, 1.2, 0.3);
    let mean_sigma = |n: usize| {
        let mut total = 0.0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = grid(4.0, n);
            let y = x.iter().map(|&t| model(t) + noise.sample(&mut rng)).collect();
            let s = TimeSeries::new("t_us", x, y, vec![1e-3; n], 1);
            total += fit_gaussian_decay(&s).unwrap().sigma("T2");
        }
        total / 10.0
    };
    let ratio = mean_sigma(50) / mean_sigma(200);
    assert!((ratio - 2.0).abs() <= 0.3, "{ratio}");
}

#[test]
fn beat_envelope_at_bath_calibration() {
    // quasi-static Gaussian field of rms σ_b gives the envelope exp[−(t/T)²]
    // with T = √2/(2π·γ_e·σ_b)
    let c = PhysicalConstants::default();
    let sigma_b = calibrate_bath(0.93, &c);
    let t2 = std::f64::consts::SQRT_2 / (2.0 * PI * c.gamma_e * sigma_b);
    let x: Vec<f64> = (0..151).map(|k| 0.02 * k as f64).collect();
    let exact = sample(&x, |t| {
        let tones: f64 = [-1.0, 0.0, 1.0]
            .iter()
            .map(|m| (2.0 * PI * (3.0 + m * c.a_hf) * t).cos() / 3.0)
            .sum();
        0.85 + 0.15 * (-(t / t2).powi(2)).exp() * tones
    });
    let fit = fit_beat_decay(&shot_noised(&exact, 11), 3.0, c.a_hf).unwrap();
    assert!(rel(fit.t2(), 0.93) < 0.05, "{}", fit.t2());
    assert!((fit.value("spacing") - c.a_hf).abs() < 0.05);
}

#[test]
fn lorentzian_dips_are_located_within_half_a_step() {
    let centres = [2901.464, 2903.624, 2905.784];
    let step = 0.05;
    let x: Vec<f64> = (0..161).map(|k| 2899.6 + step * k as f64).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&f| {
            1.0 - centres
                .iter()
                .map(|c| 0.05 / (1.0 + ((f - c) / 0.25).powi(2)))
                .sum::<f64>()
        })
        .collect();
    let mut s = TimeSeries::exact("freq_MHz", x, y);
    s.stderr = vec![1e-4; s.len()];
    let dips = find_dips(&s);
    assert_eq!(dips.len(), 3);
    for (d, c) in dips.iter().zip(centres) {
        assert!((d.center - c).abs() <= step / 2.0, "{} vs {c}", d.center);
        assert!(d.depth > 0.0 && d.depth <= 0.06);
    }
}
