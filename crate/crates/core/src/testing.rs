//! Hotelling's T², Dempster's test and the weighted-average test.
//!
//! All three reject on the upper tail of a standardised statistic:
//! `reject ⇔ standardized >= critical`.
//!
//! The weighted family is
//!
//! ```text
//! T(ρ) = ρ √n (T²/n - p/(N-p)) + (1-ρ) √n (D_n - 1),   ρ ∈ [0, 1]
//! ```
//!
//! with `D_n = N (x̄-μ₀)'(x̄-μ₀) / tr S`. Under local alternatives `T(ρ)` is
//! asymptotically normal with variance [`sigma_rho`]², and the weight
//! [`optimal_weight`] maximises local power on the set where Hotelling's and
//! Dempster's tests are equally powerful.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::{f_upper_quantile, normal_cdf, normal_pdf, normal_upper_quantile};
use crate::error::{Error, Result};
use crate::gauss::SampleSummary;
use crate::spectral::{SpectralEstimates, VARIANCE_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "T2", alias = "hotelling")]
    Hotelling,
    #[serde(rename = "Dn", alias = "dempster")]
    Dempster,
    #[serde(rename = "Trho", alias = "weighted")]
    Weighted,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::Hotelling, TestKind::Dempster, TestKind::Weighted];

    /// Short label used in tables and CSV output.
    pub fn label(self) -> &'static str {
        match self {
            TestKind::Hotelling => "T2",
            TestKind::Dempster => "Dn",
            TestKind::Weighted => "Trho",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Result of running one test on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub kind: TestKind,
    /// Raw statistic: `T²`, `D_n` or `T(ρ)`.
    pub statistic: f64,
    /// The value compared against `critical`.
    pub standardized: f64,
    pub critical: f64,
    pub alpha: f64,
    pub reject: bool,
    /// Weight used by the weighted test.
    pub rho_used: Option<f64>,
    pub notes: Vec<String>,
}

/// How the weighted test picks `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightPolicy {
    /// `ρ̂* = ρ*(ĉ, â₁, â₂)`.
    Adaptive,
    Fixed(f64),
}

/// Critical point of the weighted test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CriticalMode {
    /// `z(α)`.
    #[serde(rename = "normal")]
    Normal,
    /// The Cornish-Fisher corrected point `x̂(α)`.
    #[default]
    #[serde(rename = "cf", alias = "cornish_fisher")]
    CornishFisher,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("level {alpha} outside (0, 1)")))
    }
}

fn check_shape(c: f64, a1: f64, a2: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Argument(format!("aspect ratio c = {c} outside (0, 1)")));
    }
    if !(a1 > 0.0) || !(a2 > 0.0) || !a1.is_finite() || !a2.is_finite() {
        return Err(Error::Argument(format!("need a1, a2 > 0, got a1 = {a1}, a2 = {a2}")));
    }
    Ok(())
}

fn hotelling_t2(summary: &SampleSummary) -> Result<f64> {
    if summary.p >= summary.n_obs {
        return Err(Error::UndefinedTest(format!(
            "T² needs p < N (p = {}, N = {})",
            summary.p, summary.n_obs
        )));
    }
    summary
        .q_inverse
        .ok_or_else(|| Error::UndefinedTest("sample covariance is numerically singular; T² does not exist".into()))
}

/// `(N-p)/(np) T²`, which is `F_{p, N-p}` under `H₀`.
pub fn hotelling_standardized(summary: &SampleSummary) -> Result<f64> {
    let t2 = hotelling_t2(summary)?;
    let (p, n_obs, n) = (summary.p as f64, summary.n_obs as f64, summary.n as f64);
    Ok((n_obs - p) / (n * p) * t2)
}

/// Upper `α` point of `F_{p, N-p}`.
pub fn hotelling_critical(alpha: f64, p: usize, n_obs: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if p == 0 || p >= n_obs {
        return Err(Error::UndefinedTest(format!(
            "T² needs 0 < p < N (p = {p}, N = {n_obs})"
        )));
    }
    f_upper_quantile(alpha, p as f64, (n_obs - p) as f64)
}

/// Hotelling's test: `(N-p)/(np) T² >= F_{p, N-p}(α)`, exact under normality.
pub fn hotelling_test(summary: &SampleSummary, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let t2 = hotelling_t2(summary)?;
    let standardized = hotelling_standardized(summary)?;
    let critical = hotelling_critical(alpha, summary.p, summary.n_obs)?;
    Ok(TestOutcome {
        kind: TestKind::Hotelling,
        statistic: t2,
        standardized,
        critical,
        alpha,
        reject: standardized >= critical,
        rho_used: None,
        notes: Vec::new(),
    })
}

/// `D_n = N (x̄-μ₀)'(x̄-μ₀) / tr S`.
pub fn dempster_statistic(summary: &SampleSummary) -> Result<f64> {
    let tr = summary.trace_powers[0];
    if !(tr > 0.0) {
        return Err(Error::Degenerate(format!("tr S = {tr} is not positive")));
    }
    Ok(summary.q_identity / tr)
}

/// `√n (D_n - 1) / sqrt(2 â₂ / (ĉ â₁²))`.
pub fn dempster_standardized(summary: &SampleSummary, est: &SpectralEstimates) -> Result<f64> {
    let d = dempster_statistic(summary)?;
    if !(est.a2_hat > VARIANCE_FLOOR) {
        return Err(Error::Standardization(format!("â₂ = {} is not positive", est.a2_hat)));
    }
    let scale = (2.0 * est.a2_hat / (est.c_hat * est.a1_hat * est.a1_hat)).sqrt();
    Ok((summary.n as f64).sqrt() * (d - 1.0) / scale)
}

/// Corrected critical point for Dempster's test,
/// `y(α) = z + q₁(z)/√p + q₂(z)/p + q₃(z)/n` with
///
/// ```text
/// q₁(z) = √2 â₃ / (3 â₂^{3/2}) · (z² - 1)
/// q₂(z) = â₄ / (2 â₂²) · z (z² - 3) - 2 â₃² / (9 â₂³) · z (2z² - 5)
/// q₃(z) = z / 2
/// ```
pub fn dempster_critical(alpha: f64, est: &SpectralEstimates) -> Result<f64> {
    let z = normal_upper_quantile(alpha)?;
    let a2 = est.a2_hat;
    if !(a2 > VARIANCE_FLOOR) {
        return Err(Error::Standardization(format!("â₂ = {a2} is not positive")));
    }
    let (a3, a4) = (est.a3_hat, est.a4_hat);
    let z2 = z * z;
    let q1 = std::f64::consts::SQRT_2 * a3 / (3.0 * (a2 * a2 * a2).sqrt()) * (z2 - 1.0);
    let q2 = a4 / (2.0 * a2 * a2) * z * (z2 - 3.0) - 2.0 * a3 * a3 / (9.0 * a2 * a2 * a2) * z * (2.0 * z2 - 5.0);
    let q3 = z / 2.0;
    let (p, n) = (est.p as f64, est.n as f64);
    Ok(z + q1 / p.sqrt() + q2 / p + q3 / n)
}

/// Dempster's test with the corrected critical point [`dempster_critical`].
pub fn dempster_test(summary: &SampleSummary, est: &SpectralEstimates, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    let statistic = dempster_statistic(summary)?;
    let standardized = dempster_standardized(summary, est)?;
    let critical = dempster_critical(alpha, est)?;
    Ok(TestOutcome {
        kind: TestKind::Dempster,
        statistic,
        standardized,
        critical,
        alpha,
        reject: standardized >= critical,
        rho_used: None,
        notes: Vec::new(),
    })
}

/// `T(ρ)` for a given weight.
pub fn weighted_statistic(summary: &SampleSummary, rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Argument(format!("weight {rho} outside [0, 1]")));
    }
    let t2 = hotelling_t2(summary)?;
    let d = dempster_statistic(summary)?;
    let (p, n_obs, n) = (summary.p as f64, summary.n_obs as f64, summary.n as f64);
    let root_n = n.sqrt();
    Ok(rho * root_n * (t2 / n - p / (n_obs - p)) + (1.0 - rho) * root_n * (d - 1.0))
}

/// The weighted test `T(ρ)/σ(ρ, ĉ, â₁, â₂) >= critical`.
///
/// Under [`WeightPolicy::Adaptive`] a degenerate `â₂` falls back to `ρ = 1`
/// (Hotelling's standardisation) and records a note.
pub fn weighted_test(
    summary: &SampleSummary,
    est: &SpectralEstimates,
    alpha: f64,
    policy: WeightPolicy,
    mode: CriticalMode,
) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    hotelling_t2(summary)?;
    let c = est.c_hat;
    if !(c < 1.0) {
        return Err(Error::Standardization(format!(
            "ĉ = p/n = {c}; the weighted statistic needs p < n"
        )));
    }
    let mut notes = Vec::new();
    let degenerate_a2 = !(est.a2_hat > VARIANCE_FLOOR);
    let rho = match policy {
        WeightPolicy::Fixed(r) => {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Argument(format!("weight {r} outside [0, 1]")));
            }
            r
        }
        WeightPolicy::Adaptive if degenerate_a2 => {
            notes.push(format!("â₂ = {:e} below floor; using ρ = 1", est.a2_hat));
            1.0
        }
        WeightPolicy::Adaptive => optimal_weight(c, est.a1_hat, est.a2_hat)?,
    };
    if degenerate_a2 && rho < 1.0 {
        return Err(Error::Standardization(format!("â₂ = {} is not positive", est.a2_hat)));
    }
    let a2 = est.a2_floored();
    let statistic = weighted_statistic(summary, rho)?;
    let sigma = sigma_rho(rho, c, est.a1_hat, a2)?;
    let critical = match mode {
        CriticalMode::Normal => normal_upper_quantile(alpha)?,
        CriticalMode::CornishFisher => cornish_fisher_critical(alpha, rho, c, est.a1_hat, a2, est.a3_hat, summary.n)?,
    };
    let standardized = statistic / sigma;
    Ok(TestOutcome {
        kind: TestKind::Weighted,
        statistic,
        standardized,
        critical,
        alpha,
        reject: standardized >= critical,
        rho_used: Some(rho),
        notes,
    })
}

/// The power-optimal weight on the equal-power set,
/// `ρ* = (a₁ c √(a₂(1-c)) / (a₂ (1-c)²) + 1)⁻¹`.
pub fn optimal_weight(c: f64, a1: f64, a2: f64) -> Result<f64> {
    check_shape(c, a1, a2)?;
    let ratio = a1 * c * (a2 * (1.0 - c)).sqrt() / (a2 * (1.0 - c) * (1.0 - c));
    Ok(1.0 / (ratio + 1.0))
}

/// Asymptotic standard deviation of `T(ρ)`:
/// `σ² = ρ² 2c/(1-c)³ + (1-ρ)² 2a₂/(c a₁²) + 2ρ(1-ρ) · 2/(1-c)`.
pub fn sigma_rho(rho: f64, c: f64, a1: f64, a2: f64) -> Result<f64> {
    check_shape(c, a1, a2)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Argument(format!("weight {rho} outside [0, 1]")));
    }
    let one_c = 1.0 - c;
    let var = rho * rho * 2.0 * c / (one_c * one_c * one_c)
        + (1.0 - rho) * (1.0 - rho) * 2.0 * a2 / (c * a1 * a1)
        + 2.0 * rho * (1.0 - rho) * 2.0 / one_c;
    if var > 0.0 && var.is_finite() {
        Ok(var.sqrt())
    } else {
        Err(Error::Numeric(format!("σ²(ρ) = {var} is not a positive variance")))
    }
}

/// Null cumulant coefficients `(b₁, b₃)` of `T(ρ)` at the given weight.
pub fn null_cumulant_coefficients(rho: f64, c: f64, a1: f64, a2: f64, a3: f64) -> (f64, f64) {
    let one_c = 1.0 - c;
    let r1 = 1.0 - rho;
    let nu1 = 2.0 * rho * c / (one_c * one_c);
    let nu3 = 4.0 * rho.powi(3) * c * (5.0 * c + 2.0) / one_c.powi(5)
        + 24.0 * rho * rho * r1 * (c + 1.0) / one_c.powi(3)
        + 12.0 * rho * r1 * r1 * a2 * (2.0 - c) / (a1 * a1 * one_c * one_c * c)
        + 8.0 * r1.powi(3) * a3 / (a1.powi(3) * c * c);
    (nu1, nu3 / 6.0 - nu1 / 2.0)
}

fn edgeworth_terms(rho: f64, c: f64, a1: f64, a2: f64, a3: f64) -> Result<(f64, f64)> {
    let sigma = sigma_rho(rho, c, a1, a2)?;
    let (b1, b3) = null_cumulant_coefficients(rho, c, a1, a2, a3);
    Ok((b1 / sigma, b3 / sigma.powi(3)))
}

/// Cornish-Fisher corrected upper `α` point of `T(ρ)/σ(ρ)` under `H₀`:
/// `x̂(α) = z + n^{-1/2} [b₁/σ + (b₃/σ³)(z² - 1)]`.
pub fn cornish_fisher_critical(alpha: f64, rho: f64, c: f64, a1: f64, a2: f64, a3: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    let z = normal_upper_quantile(alpha)?;
    let (shift, skew) = edgeworth_terms(rho, c, a1, a2, a3)?;
    Ok(z + (shift + skew * (z * z - 1.0)) / (n as f64).sqrt())
}

/// One-term Edgeworth approximation of `P(T(ρ)/σ(ρ) <= x)` under `H₀`:
/// `Φ(x) - φ(x)/√n · [b₁/σ + (b₃/σ³)(x² - 1)]`.
pub fn edgeworth_null_cdf(x: f64, rho: f64, c: f64, a1: f64, a2: f64, a3: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    let (shift, skew) = edgeworth_terms(rho, c, a1, a2, a3)?;
    Ok(normal_cdf(x) - normal_pdf(x) / (n as f64).sqrt() * (shift + skew * (x * x - 1.0)))
}
