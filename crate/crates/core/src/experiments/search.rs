use crate::error::{Error, Result};

/// Result of [`search_sigma_eps`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub sigma_eps: f64,
    pub value: f64,
    /// Every (σ_ε, value) evaluated, in order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Finds σ_ε > 0 at which the decreasing quantity `eval(σ_ε)` (a fitted
/// decay time) equals `target` to within `rel_tol`, using secant steps on
/// log σ_ε versus log value.
pub fn search_sigma_eps<F>(
    target: f64,
    initial: f64,
    rel_tol: f64,
    max_evals: usize,
    mut eval: F,
) -> Result<SearchOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0 && initial > 0.0 && rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "search needs target, initial and tolerance > 0 (got {target}, {initial}, {rel_tol})"
        )));
    }
    let mut evals: Vec<(f64, f64)> = Vec::new();
    let mut x = initial;
    let ln_target = target.ln();
    while evals.len() < max_evals {
        let y = eval(x)?;
        evals.push((x, y));
        if (y / target - 1.0).abs() <= rel_tol {
            return Ok(SearchOutcome {
                sigma_eps: x,
                value: y,
                evaluations: evals,
            });
        }
        let step = if !(y > 0.0 && y.is_finite()) {
            // no measurable decay yet: more noise
            2f64.ln()
        } else {
            // decay time ∝ 1/σ_ε until two points give a slope
            let mut slope = -1.0;
            if let [.., (x0, y0), (x1, y1)] = evals[..] {
                if y0 > 0.0 && y0.is_finite() && x0 != x1 {
                    let s = (y1.ln() - y0.ln()) / (x1.ln() - x0.ln());
                    if s.is_finite() && s < -0.05 {
                        slope = s;
                    }
                }
            }
            ((ln_target - y.ln()) / slope).clamp(-4f64.ln(), 4f64.ln())
        };
        x *= step.exp();
    }
    Err(Error::NonConvergence(max_evals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_power_law_root() {
        let f = |s: f64| Ok(0.2 * s.powf(-1.3));
        let out = search_sigma_eps(11.0, 0.05, 1e-6, 20, f).unwrap();
        assert!((0.2 * out.sigma_eps.powf(-1.3) / 11.0 - 1.0).abs() <= 1e-6);
        assert!(out.evaluations.len() < 8);
    }

    #[test]
    fn unreachable_target_reports_non_convergence() {
        let f = |_: f64| Ok(5.0);
        assert!(matches!(
            search_sigma_eps(11.0, 0.01, 1e-3, 6, f),
            Err(Error::NonConvergence(6))
        ));
    }
}
