//! Least-squares fits of decay and oscillation models, plus spectral helpers.

pub mod lm;
mod spectrum;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use lm::{levenberg_marquardt, LmOutcome};

pub use spectrum::{
    decay_time_1e, dominant_frequency, envelope_decay_time, find_dips, power_spectrum,
    sliding_amplitude, spectral_peaks, Dip, DIP_PROMINENCE,
};

/// Which model a fit used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// A·exp[−(t/T2)²] + B
    Gaussian,
    /// A·exp[−(t/T2)²]·cos(2πft + φ) + B
    DampedCosine,
    /// A·exp[−(t'/T2)²]·Σ wₘ·cos(2π(f + m·a)t' + φ) + B over m = −1, 0, 1
    /// with t' = t + t0
    Beat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParam {
    pub name: &'static str,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<FitParam>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub rss_history: Vec<f64>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<FitParam> {
        self.params.iter().copied().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn sigma(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |p| p.sigma)
    }

    pub fn t2(&self) -> f64 {
        self.value("T2")
    }
}

fn gaussian(p: &[f64], t: f64) -> f64 {
    p[0] * (-(t / p[1]).powi(2)).exp() + p[2]
}

fn damped_cosine(p: &[f64], t: f64) -> f64 {
    p[0] * (-(t / p[1]).powi(2)).exp() * (2.0 * PI * p[2] * t + p[3]).cos() + p[4]
}

const BEAT_WEIGHTS: [f64; 3] = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];

/// p = [A, T2, f, a, φ, B, t0]; t0 is the effective extra evolution time
/// contributed by finite pulses, shared by envelope and carriers.
fn beat(p: &[f64], t: f64) -> f64 {
    let t = t + p[6];
    let tones: f64 = [-1.0, 0.0, 1.0]
        .iter()
        .zip(BEAT_WEIGHTS)
        .map(|(m, w)| w * (2.0 * PI * (p[2] + m * p[3]) * t + p[4]).cos())
        .sum();
    p[0] * (-(t / p[1]).powi(2)).exp() * tones + p[5]
}

fn check_series(series: &TimeSeries, min_points: usize) -> Result<()> {
    series.validate()?;
    if series.len() < min_points {
        return Err(Error::DegenerateData(format!(
            "{} points, at least {min_points} required",
            series.len()
        )));
    }
    let (lo, hi) = series
        .mean
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(1.0)) {
        return Err(Error::DegenerateData("signal is constant".into()));
    }
    if series.mean.iter().chain(&series.x).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite samples".into()));
    }
    Ok(())
}

/// Linear least squares y ≈ Σ cⱼ·basisⱼ(t); returns coefficients and rss.
fn linear_fit(x: &[f64], y: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Option<(Vec<f64>, f64)> {
    let a = DMatrix::from_fn(x.len(), basis.len(), |i, j| basis[j](x[i]));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-12).ok()?;
    let rss = (a * &c - b).norm_squared();
    Some((c.iter().copied().collect(), rss))
}

fn seed_widths(x: &[f64]) -> Vec<f64> {
    let span = x[x.len() - 1] - x[0];
    [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0]
        .iter()
        .map(|f| f * span)
        .collect()
}

fn finish(model: FitModel, names: &[&'static str], out: LmOutcome, n: usize) -> FitResult {
    let params = names
        .iter()
        .zip(out.params.iter().zip(&out.sigmas))
        .map(|(&name, (&value, &sigma))| FitParam { name, value, sigma })
        .collect();
    FitResult {
        model,
        params,
        residual_rms: (out.rss / n as f64).sqrt(),
        converged: out.converged,
        iterations: out.iterations,
        rss_history: out.rss_history,
    }
}

/// Makes T2 and the amplitude positive and wraps the phase into (−π, π].
fn normalize(mut r: FitResult) -> FitResult {
    let mut flip = false;
    for p in r.params.iter_mut() {
        match p.name {
            "T2" => p.value = p.value.abs(),
            "amplitude" if p.value < 0.0 => {
                p.value = -p.value;
                flip = true;
            }
            _ => {}
        }
    }
    for p in r.params.iter_mut() {
        if p.name == "phi" {
            let mut phi = p.value + if flip { PI } else { 0.0 };
            phi = (phi + PI).rem_euclid(2.0 * PI) - PI;
            if phi == -PI {
                phi = PI;
            }
            p.value = phi;
        }
    }
    r
}

/// Options for [`fit_gaussian_decay_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaussianOptions {
    /// Hold the offset B at this value.
    pub fixed_offset: Option<f64>,
    /// Never switch to the damped-cosine model.
    pub no_oscillation: bool,
}

/// A·exp[−(t/T2)²] + B. Oscillatory records are fitted with the damped
/// cosine instead, whose |A| is the envelope amplitude.
pub fn fit_gaussian_decay(series: &TimeSeries) -> Result<FitResult> {
    fit_gaussian_decay_with(series, GaussianOptions::default())
}

pub fn fit_gaussian_decay_with(series: &TimeSeries, opts: GaussianOptions) -> Result<FitResult> {
    check_series(series, 6)?;
    let (x, y) = (&series.x, &series.mean);
    let mut best: Option<([f64; 3], f64)> = None;
    for w in seed_widths(x) {
        let env = move |t: f64| (-(t / w).powi(2)).exp();
        let one = |_: f64| 1.0;
        let cand = match opts.fixed_offset {
            Some(b) => {
                let shifted: Vec<f64> = y.iter().map(|v| v - b).collect();
                linear_fit(x, &shifted, &[&env]).map(|(c, rss)| ([c[0], w, b], rss))
            }
            None => linear_fit(x, y, &[&env, &one]).map(|(c, rss)| ([c[0], w, c[1]], rss)),
        };
        if let Some((p, rss)) = cand {
            if best.as_ref().is_none_or(|b| rss < b.1) {
                best = Some((p, rss));
            }
        }
    }
    let (start, _) = best.ok_or_else(|| Error::DegenerateData("no usable seed".into()))?;
    let fixed = [false, false, opts.fixed_offset.is_some()];
    let out = levenberg_marquardt(gaussian, x, y, None, &start, &fixed);
    let gauss_rss = out.rss;
    let result = normalize(finish(
        FitModel::Gaussian,
        &["amplitude", "T2", "offset"],
        out,
        x.len(),
    ));

    if opts.no_oscillation || opts.fixed_offset.is_some() || series.len() < 8 {
        return Ok(result);
    }
    let span = x[x.len() - 1] - x[0];
    if let Ok(osc) = fit_damped_cosine(series) {
        let osc_rss = osc.residual_rms.powi(2) * x.len() as f64;
        if osc.model == FitModel::DampedCosine && osc.value("f") * span >= 1.0 && osc_rss < 0.25 * gauss_rss {
            return Ok(osc);
        }
    }
    Ok(result)
}

/// A·exp[−(t/T2)²]·cos(2πft + φ) + B with f seeded from the spectrum.
pub fn fit_damped_cosine(series: &TimeSeries) -> Result<FitResult> {
    check_series(series, 8)?;
    let (x, y) = (&series.x, &series.mean);
    let span = x[x.len() - 1] - x[0];
    let f0 = dominant_frequency(x, y)?;
    if f0 * span < 0.5 {
        // no resolvable oscillation: the model reduces to the Gaussian decay
        let g = fit_gaussian_decay_with(
            series,
            GaussianOptions {
                no_oscillation: true,
                ..Default::default()
            },
        )?;
        let mut params = g.params.clone();
        params.insert(2, FitParam { name: "f", value: 0.0, sigma: 0.0 });
        params.insert(3, FitParam { name: "phi", value: 0.0, sigma: 0.0 });
        return Ok(FitResult { params, ..g });
    }
    let mut best: Option<([f64; 5], f64)> = None;
    for w in seed_widths(x) {
        let env_c = move |t: f64| (-(t / w).powi(2)).exp() * (2.0 * PI * f0 * t).cos();
        let env_s = move |t: f64| (-(t / w).powi(2)).exp() * (2.0 * PI * f0 * t).sin();
        let one = |_: f64| 1.0;
        if let Some((c, rss)) = linear_fit(x, y, &[&env_c, &env_s, &one]) {
            let amp = c[0].hypot(c[1]);
            let phi = (-c[1]).atan2(c[0]);
            if best.as_ref().is_none_or(|b| rss < b.1) {
                best = Some(([amp, w, f0, phi, c[2]], rss));
            }
        }
    }
    let (start, _) = best.ok_or_else(|| Error::DegenerateData("no usable seed".into()))?;
    let out = levenberg_marquardt(damped_cosine, x, y, None, &start, &[false; 5]);
    Ok(normalize(finish(
        FitModel::DampedCosine,
        &["amplitude", "T2", "f", "phi", "offset"],
        out,
        x.len(),
    )))
}

/// Three equally weighted tones at f − a, f, f + a under one Gaussian
/// envelope, seeded with the given centre frequency and spacing. The fitted
/// time offset t0 absorbs the phase each tone picks up during finite pulses.
pub fn fit_beat_decay(series: &TimeSeries, f_center: f64, spacing: f64) -> Result<FitResult> {
    check_series(series, 8)?;
    let (x, y) = (&series.x, &series.mean);
    let mut best: Option<([f64; 7], f64)> = None;
    for w in seed_widths(x) {
        let tones = move |t: f64, sin: bool| -> f64 {
            [-1.0, 0.0, 1.0]
                .iter()
                .zip(BEAT_WEIGHTS)
                .map(|(m, wt)| {
                    let a = 2.0 * PI * (f_center + m * spacing) * t;
                    wt * if sin { a.sin() } else { a.cos() }
                })
                .sum::<f64>()
                * (-(t / w).powi(2)).exp()
        };
        let c_fn = move |t: f64| tones(t, false);
        let s_fn = move |t: f64| tones(t, true);
        let one = |_: f64| 1.0;
        if let Some((c, rss)) = linear_fit(x, y, &[&c_fn, &s_fn, &one]) {
            let amp = c[0].hypot(c[1]);
            let phi = (-c[1]).atan2(c[0]);
            if best.as_ref().is_none_or(|b| rss < b.1) {
                best = Some(([amp, w, f_center, spacing, phi, c[2], 0.0], rss));
            }
        }
    }
    let (start, _) = best.ok_or_else(|| Error::DegenerateData("no usable seed".into()))?;
    let out = levenberg_marquardt(beat, x, y, None, &start, &[false; 7]);
    Ok(normalize(finish(
        FitModel::Beat,
        &["amplitude", "T2", "f", "spacing", "phi", "offset", "t0"],
        out,
        x.len(),
    )))
}

/// Evaluates a fitted model at `t`.
pub fn evaluate(fit: &FitResult, t: f64) -> f64 {
    let p: Vec<f64> = fit.params.iter().map(|p| p.value).collect();
    match fit.model {
        FitModel::Gaussian => gaussian(&p, t),
        FitModel::DampedCosine if p.len() == 5 => damped_cosine(&p, t),
        FitModel::DampedCosine => gaussian(&[p[0], p[1], p[4]], t),
        FitModel::Beat => beat(&p, t),
    }
}
