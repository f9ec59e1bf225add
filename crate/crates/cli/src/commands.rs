use dsim_core::analysis::{
    fit_beat_decay, fit_damped_cosine, fit_gaussian_decay_with, FitResult, GaussianOptions,
};
use dsim_core::experiments::{
    default_grid, run_fid_bare, run_fid_cwdd, run_not_gate_train, run_odmr, run_rabi,
    run_t2prime_scan, ExperimentConfig, Mode, ScanGrid, DEFAULT_OMEGAS,
};
use dsim_core::series::TimeSeries;
use dsim_core::spin::{dressed_spectrum, find_sweet_spot_ratio, gap_curvature_scan};

use crate::output::{num, opt, read_table, Table};
use crate::{CliError, Command, ModelArg};

type Outcome = Result<(Table, Vec<String>), CliError>;

const SPECTRUM_GRID: ScanGrid = ScanGrid::new(-0.5, 0.5, 0.05);
/// Field offsets for the quartic check, in units of Δ/γ_e.
const QUARTIC_PROBES: [f64; 3] = [0.025, 0.05, 0.1];
/// Relative ratio offset at which the curvature sign is sampled.
const SIGN_PROBE: f64 = 0.01;

pub(crate) fn dispatch(command: &Command, mode: Option<Mode>, cfg: &ExperimentConfig) -> Outcome {
    let mode = mode.unwrap_or(Mode::Bare);
    match command {
        Command::Spectrum => spectrum(cfg),
        Command::Sweetspot { delta } => sweetspot(cfg, delta),
        Command::Odmr => {
            let f = cfg.grid_or(default_grid("odmr", mode, cfg)?)?;
            series(run_odmr(cfg, &f, mode)?, "signal")
        }
        Command::Fid => {
            let d = cfg.grid_or(default_grid("fid", mode, cfg)?)?;
            let s = match mode {
                Mode::Bare => run_fid_bare(cfg, &d)?,
                Mode::Cwdd => run_fid_cwdd(cfg, &d, cfg.rf.fid_offset)?,
            };
            series(s, "signal")
        }
        Command::Rabi => {
            let d = cfg.grid_or(default_grid("rabi", mode, cfg)?)?;
            series(run_rabi(cfg, &d, mode)?, "signal")
        }
        Command::Notgate { n_max } => {
            let n = n_max.unwrap_or(cfg.notgate.n_max);
            series(run_not_gate_train(cfg, n, mode)?, "fidelity")
        }
        Command::T2scan => t2scan(cfg),
        Command::Fit {
            input,
            model,
            x,
            y,
            fixed_offset,
            center,
            spacing,
        } => {
            let s = load_series(input, x.as_deref(), y.as_deref())?;
            let fit = match model {
                ModelArg::Gaussian => fit_gaussian_decay_with(
                    &s,
                    GaussianOptions {
                        fixed_offset: *fixed_offset,
                        no_oscillation: fixed_offset.is_some(),
                    },
                )?,
                ModelArg::DampedCosine => fit_damped_cosine(&s)?,
                ModelArg::Beat => fit_beat_decay(
                    &s,
                    center.unwrap_or(cfg.bare.fid_detuning),
                    spacing.unwrap_or(cfg.constants.a_hf),
                )?,
            };
            fit_table(&fit, &s)
        }
    }
}

fn series(s: TimeSeries, y_name: &str) -> Outcome {
    Ok((Table::from_series(&s, y_name), Vec::new()))
}

fn spectrum(cfg: &ExperimentConfig) -> Outcome {
    let grid = cfg.grid_or(SPECTRUM_GRID)?;
    let mut t = Table::new(&[
        "b_G", "E_g_MHz", "E_d_MHz", "E_e_MHz", "w_dg_MHz", "w_eg_MHz", "s_overlap",
    ]);
    for b in grid {
        let s = dressed_spectrum(&cfg.constants, cfg.drive.delta, cfg.drive.omega, b)?;
        t.push(vec![
            num(b),
            num(s.e_g),
            num(s.e_d),
            num(s.e_e),
            num(s.w_dg),
            num(s.w_eg),
            num(s.s_overlap),
        ]);
    }
    Ok((t, vec![format!("delta_MHz: {}, omega_MHz: {}", cfg.drive.delta, cfg.drive.omega)]))
}

/// Least-squares slope of ln|w_dg(b) − w_dg(0)| against ln b.
fn quartic_slope(cfg: &ExperimentConfig, delta: f64, omega: f64) -> Result<f64, CliError> {
    let w0 = dressed_spectrum(&cfg.constants, delta, omega, 0.0)?.w_dg;
    let mut pts = Vec::new();
    for u in QUARTIC_PROBES {
        let b = u * delta / cfg.constants.gamma_e;
        let w = dressed_spectrum(&cfg.constants, delta, omega, b)?.w_dg;
        pts.push((b.ln(), (w - w0).abs().ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn sweetspot(cfg: &ExperimentConfig, deltas: &[f64]) -> Outcome {
    if deltas.is_empty() {
        return Err(CliError::Usage("--delta needs at least one value".into()));
    }
    let mut t = Table::new(&[
        "delta_MHz",
        "ratio",
        "omega_MHz",
        "curvature_below_MHz_per_G2",
        "curvature_above_MHz_per_G2",
        "quartic_slope",
    ]);
    for &delta in deltas {
        let ratio = find_sweet_spot_ratio(&cfg.constants, delta)?;
        let curv = gap_curvature_scan(
            &cfg.constants,
            delta,
            &[ratio * (1.0 - SIGN_PROBE), ratio * (1.0 + SIGN_PROBE)],
        )?;
        let slope = quartic_slope(cfg, delta, ratio * delta)?;
        t.push(vec![
            num(delta),
            num(ratio),
            num(ratio * delta),
            num(curv[0].1),
            num(curv[1].1),
            num(slope),
        ]);
    }
    Ok((t, Vec::new()))
}

fn t2scan(cfg: &ExperimentConfig) -> Outcome {
    let omegas = match cfg.scan {
        Some(g) => g.values()?,
        None => DEFAULT_OMEGAS.to_vec(),
    };
    let points = run_t2prime_scan(cfg, &omegas)?;
    let mut t = Table::new(&["omega_MHz", "frequency_MHz", "t2prime_us"]);
    for p in points {
        t.push(vec![num(p.omega), opt(p.frequency), opt(p.t2prime)]);
    }
    Ok((t, vec!["empty cells: not resolved or no decay within the window".into()]))
}

fn pick(header: &[String], name: Option<&str>, fallback: &[&str], index: usize) -> Result<usize, CliError> {
    if let Some(n) = name {
        return header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| CliError::Config(format!("no column named '{n}'")));
    }
    fallback
        .iter()
        .find_map(|f| header.iter().position(|h| h == f))
        .or((index < header.len()).then_some(index))
        .ok_or_else(|| CliError::Config("input has too few columns".into()))
}

fn load_series(path: &std::path::Path, x: Option<&str>, y: Option<&str>) -> Result<TimeSeries, CliError> {
    let (header, cols) = read_table(path)?;
    let xi = pick(&header, x, &[], 0)?;
    let yi = pick(&header, y, &["signal", "fidelity"], 1)?;
    let stderr = header
        .iter()
        .position(|h| h == "stderr")
        .map(|i| cols[i].clone())
        .unwrap_or_else(|| vec![0.0; cols[xi].len()]);
    let mut s = TimeSeries::new(&header[xi], Vec::new(), Vec::new(), Vec::new(), 1);
    for i in 0..cols[xi].len() {
        let (xv, yv) = (cols[xi][i], cols[yi][i]);
        if xv.is_finite() && yv.is_finite() {
            s.x.push(xv);
            s.mean.push(yv);
            s.stderr.push(if stderr[i].is_finite() { stderr[i] } else { 0.0 });
        }
    }
    Ok(s)
}

fn fit_table(fit: &FitResult, s: &TimeSeries) -> Outcome {
    if !fit.converged {
        return Err(dsim_core::Error::NonConvergence(fit.iterations).into());
    }
    let mut t = Table::new(&["parameter", "value", "sigma"]);
    for p in &fit.params {
        t.push(vec![p.name.to_string(), num(p.value), num(p.sigma)]);
    }
    Ok((
        t,
        vec![
            format!("model: {:?}", fit.model),
            format!("abscissa: {}", s.x_label),
            format!("points: {}", s.len()),
            format!("residual_rms: {}", num(fit.residual_rms)),
            format!("iterations: {}", fit.iterations),
        ],
    ))
}
