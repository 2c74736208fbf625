//! Normalised trace parameters `a_i = tr Σⁱ / p`: plug-in estimates and exact values.

pub mod wishart;

use crate::error::{Error, Result};
use crate::gauss::{SampleSummary, SigmaKind, SigmaModel};

/// Floor applied to `â₂` (and friends) where they enter a square root.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Estimates of `a_1..a_4` together with `ĉ = p / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimates {
    pub a1_hat: f64,
    pub a2_hat: f64,
    pub a3_hat: f64,
    pub a4_hat: f64,
    pub c_hat: f64,
    pub p: usize,
    pub n: usize,
}

impl SpectralEstimates {
    /// `â₂` clamped to [`VARIANCE_FLOOR`], for use inside square roots.
    pub fn a2_floored(&self) -> f64 {
        self.a2_hat.max(VARIANCE_FLOOR)
    }
}

/// Unbiased estimates of `a_1..a_4` from a sample summary.
///
/// `â₁ = tr S / p`, and
///
/// ```text
/// â₂ = n² / (p (n+2)(n-1)) · {tr S² - (tr S)² / n}
/// â₃ = n² / ((n+4)(n+2)(n-1)(n-2) p) · {n² tr S³ - 3n tr S² tr S + 2 (tr S)³}
/// ```
///
/// `â₄` inverts the exact fourth-order Wishart trace moments (see [`wishart`]).
pub fn estimate_a(summary: &SampleSummary) -> Result<SpectralEstimates> {
    estimate_from_traces(&summary.trace_powers, summary.p, summary.n)
}

/// [`estimate_a`] from `[tr S, tr S², tr S³, tr S⁴]` directly.
pub fn estimate_from_traces(traces: &[f64; 4], p: usize, n: usize) -> Result<SpectralEstimates> {
    if p == 0 {
        return Err(Error::Argument("dimension must be positive".into()));
    }
    if n < 5 {
        let factor = match n {
            0 | 1 => "(n - 1)",
            2 => "(n - 2)",
            _ => "the fourth-order moment system",
        };
        return Err(Error::Argument(format!(
            "trace estimators need n >= 5 degrees of freedom; n = {n} degenerates {factor}"
        )));
    }
    let (pf, nf) = (p as f64, n as f64);
    let [t1, t2, t3, _] = *traces;
    let a1_hat = t1 / pf;
    let a2_hat = nf * nf / (pf * (nf + 2.0) * (nf - 1.0)) * (t2 - t1 * t1 / nf);
    let a3_hat = nf * nf / ((nf + 4.0) * (nf + 2.0) * (nf - 1.0) * (nf - 2.0) * pf)
        * (nf * nf * t3 - 3.0 * nf * t2 * t1 + 2.0 * t1 * t1 * t1);
    let a4_hat = wishart::unbiased_trace_power(traces, n, 4)? / pf;
    Ok(SpectralEstimates {
        a1_hat,
        a2_hat,
        a3_hat,
        a4_hat,
        c_hat: pf / nf,
        p,
        n,
    })
}

/// Exact `[a_1, a_2, a_3, a_4]` of a covariance model.
pub fn population_a(model: &SigmaModel) -> [f64; 4] {
    let p = model.dim();
    let pf = p as f64;
    match model.kind() {
        SigmaKind::Identity => [1.0; 4],
        kind => {
            let sigma = model.matrix();
            let sq = &sigma * &sigma;
            let t3 = sq.component_mul(&sigma).sum();
            let t4 = sq.component_mul(&sq).sum();
            let (t1, t2) = if kind == SigmaKind::Ar1 {
                let eta2 = model.eta().unwrap_or(0.0).powi(2);
                let off: f64 = (1..p).map(|k| (p - k) as f64 * eta2.powi(k as i32)).sum();
                (pf, pf + 2.0 * off)
            } else {
                (sigma.trace(), sq.trace())
            };
            [t1 / pf, t2 / pf, t3 / pf, t4 / pf]
        }
    }
}
