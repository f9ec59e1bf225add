//! Frequency estimation, envelope demodulation and dip location.

use nalgebra::{Matrix3, Vector3};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Peaks within this power ratio of the strongest are ambiguous.
const AMBIGUITY_RATIO: f64 = 0.9;
const ZERO_PAD: usize = 8;
/// Peaks closer than this fraction of the dominant frequency belong to its line.
const LINE_FRACTION: f64 = 0.1;

fn uniform_step(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::DegenerateData("need at least two samples".into()));
    }
    let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    if !(dx > 0.0) {
        return Err(Error::DegenerateData("abscissa is not increasing".into()));
    }
    if x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-6 * dx) {
        return Err(Error::DegenerateData("abscissa is not uniformly spaced".into()));
    }
    Ok(dx)
}

/// Power spectrum of the mean-removed signal on a zero-padded grid:
/// (frequencies, powers) up to Nyquist.
pub fn power_spectrum(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let dx = uniform_step(x)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let n = (y.len() * ZERO_PAD).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let freqs = (0..half).map(|k| k as f64 / (n as f64 * dx)).collect();
    let power = buf[..half].iter().map(|z| z.norm_sqr()).collect();
    Ok((freqs, power))
}

/// Local maxima of the power spectrum, strongest first, as (frequency, power).
pub fn spectral_peaks(x: &[f64], y: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (f, p) = power_spectrum(x, y)?;
    let mut peaks = Vec::new();
    for k in 0..p.len() {
        let left = if k == 0 { f64::NEG_INFINITY } else { p[k - 1] };
        let right = p.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if p[k] > left && p[k] >= right {
            // parabolic refinement of the peak position
            let shift = if k > 0 && k + 1 < p.len() {
                let den = p[k - 1] - 2.0 * p[k] + p[k + 1];
                if den != 0.0 { 0.5 * (p[k - 1] - p[k + 1]) / den } else { 0.0 }
            } else {
                0.0
            };
            let df = f[1] - f[0];
            peaks.push(((f[k] + shift * df).max(0.0), p[k]));
        }
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(peaks)
}

/// Frequency of the dominant spectral peak. Fails when a second peak
/// carries at least 90% of its power and lies outside the main line, i.e.
/// more than one unpadded frequency bin and more than 10% of the dominant
/// frequency away from it.
pub fn dominant_frequency(x: &[f64], y: &[f64]) -> Result<f64> {
    let peaks = spectral_peaks(x, y)?;
    let Some(&(f0, p0)) = peaks.first() else {
        return Err(Error::DegenerateData("flat signal has no spectral peak".into()));
    };
    if p0 == 0.0 {
        return Err(Error::DegenerateData("flat signal has no spectral peak".into()));
    }
    let span = x[x.len() - 1] - x[0];
    let same_line = (1.0 / span).max(LINE_FRACTION * f0);
    if let Some(&(f1, _)) = peaks
        .iter()
        .skip(1)
        .find(|(f, p)| (f - f0).abs() > same_line && *p >= AMBIGUITY_RATIO * p0)
    {
        return Err(Error::AmbiguousFrequency(f0, f1));
    }
    Ok(f0)
}

/// Amplitude of the component at frequency `f` in sliding windows of
/// `periods` periods, stepped by a quarter window. Returns (window centre,
/// amplitude) pairs.
pub fn sliding_amplitude(x: &[f64], y: &[f64], f: f64, periods: f64) -> Result<Vec<(f64, f64)>> {
    let dx = uniform_step(x)?;
    if !(f > 0.0) {
        return Err(Error::InvalidParameter(format!("demodulation frequency {f} must be > 0")));
    }
    let w = ((periods / f / dx).round() as usize).max(5);
    if w > x.len() {
        return Err(Error::DegenerateData("window longer than the record".into()));
    }
    let stride = (w / 4).max(1);
    let omega = 2.0 * std::f64::consts::PI * f;
    let mut out = Vec::new();
    let mut i = 0;
    while i + w <= x.len() {
        let mut ata = Matrix3::zeros();
        let mut aty = Vector3::zeros();
        for k in i..i + w {
            let row = Vector3::new(1.0, (omega * x[k]).cos(), (omega * x[k]).sin());
            ata += row * row.transpose();
            aty += row * y[k];
        }
        let c = ata.try_inverse().map(|inv| inv * aty).unwrap_or_else(Vector3::zeros);
        let centre = 0.5 * (x[i] + x[i + w - 1]);
        out.push((centre, c[1].hypot(c[2])));
        i += stride;
    }
    Ok(out)
}

/// First time the envelope drops below 1/e of its first value, linearly
/// interpolated between windows; None if it never does.
pub fn decay_time_1e(envelope: &[(f64, f64)]) -> Option<f64> {
    let (t0, a0) = *envelope.first()?;
    let level = a0 / std::f64::consts::E;
    let mut prev = (t0, a0);
    for &(t, a) in &envelope[1..] {
        if a < level {
            let frac = (prev.1 - level) / (prev.1 - a);
            return Some(prev.0 + frac * (t - prev.0));
        }
        prev = (t, a);
    }
    None
}

/// Envelope 1/e time of an oscillating record: the frequency is taken from
/// the dominant spectral peak unless given.
pub fn envelope_decay_time(series: &TimeSeries, freq: Option<f64>) -> Result<Option<f64>> {
    let f = match freq {
        Some(f) => f,
        None => dominant_frequency(&series.x, &series.mean)?,
    };
    let env = sliding_amplitude(&series.x, &series.mean, f, 1.0)?;
    Ok(decay_time_1e(&env))
}

/// A located dip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dip {
    pub center: f64,
    pub depth: f64,
}

/// Minimum depth of a reported dip relative to the deepest one.
pub const DIP_PROMINENCE: f64 = 0.25;

/// Vertex of the least-squares parabola through the points of a dip that lie
/// below its half-depth level.
fn half_depth_vertex(x: &[f64], y: &[f64], i: usize, baseline: f64) -> Option<f64> {
    let level = baseline - 0.5 * (baseline - y[i]);
    let mut lo = i;
    while lo > 0 && y[lo - 1] <= level {
        lo -= 1;
    }
    let mut hi = i;
    while hi + 1 < y.len() && y[hi + 1] <= level {
        hi += 1;
    }
    if hi - lo < 2 {
        return None;
    }
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for k in lo..=hi {
        let u = x[k] - x[i];
        let row = Vector3::new(1.0, u, u * u);
        ata += row * row.transpose();
        aty += row * y[k];
    }
    let c = ata.try_inverse()? * aty;
    if !(c[2] > 0.0) {
        return None;
    }
    let centre = x[i] - c[1] / (2.0 * c[2]);
    (x[lo]..=x[hi]).contains(&centre).then_some(centre)
}

/// Local minima lying more than three standard errors below the median
/// baseline and at least a quarter as deep as the deepest minimum. Each
/// centre is refined by a parabola through the points below half depth, or
/// through the three nearest points for narrow dips.
pub fn find_dips(spectrum: &TimeSeries) -> Vec<Dip> {
    let y = &spectrum.mean;
    let x = &spectrum.x;
    let n = y.len();
    if n < 5 {
        return Vec::new();
    }
    let mut sorted = y.clone();
    sorted.sort_by(f64::total_cmp);
    let baseline = sorted[n / 2];
    let mut found = Vec::new();
    for i in 1..n - 1 {
        let threshold = baseline - 3.0 * spectrum.stderr[i];
        if y[i] < y[i - 1] && y[i] <= y[i + 1] && y[i] < threshold {
            let centre = half_depth_vertex(x, y, i, baseline).unwrap_or_else(|| {
                let den = y[i - 1] - 2.0 * y[i] + y[i + 1];
                let shift = if den > 0.0 {
                    (0.5 * (y[i - 1] - y[i + 1]) / den).clamp(-0.5, 0.5)
                } else {
                    0.0
                };
                let step = if shift >= 0.0 { x[i + 1] - x[i] } else { x[i] - x[i - 1] };
                x[i] + shift * step
            });
            found.push(Dip {
                center: centre,
                depth: baseline - y[i],
            });
        }
    }
    let deepest = found.iter().map(|d| d.depth).fold(0.0, f64::max);
    let noise_floor = 1e-9 * baseline.abs().max(1.0);
    found.retain(|d| d.depth >= DIP_PROMINENCE * deepest && d.depth > noise_floor);
    found
}
