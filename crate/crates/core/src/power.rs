//! Local asymptotic power of the three tests and the regime comparison between them.

use nalgebra::DVector;

use crate::dist::{normal_cdf, normal_upper_quantile};
use crate::error::{Error, Result};
use crate::gauss::SigmaModel;
use crate::testing::{optimal_weight, sigma_rho};

/// Squared mean shifts of `μ - μ₀` in three metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftProfile {
    /// `Δ² = (μ-μ₀)' Σ⁻¹ (μ-μ₀)`.
    pub delta2: f64,
    /// `Δ_I² = (μ-μ₀)'(μ-μ₀)`.
    pub delta2_identity: f64,
    /// `Δ_Σ² = (μ-μ₀)' Σ (μ-μ₀)`; reported only.
    pub delta2_sigma: f64,
}

impl ShiftProfile {
    pub fn is_null(&self) -> bool {
        self.delta2 == 0.0 && self.delta2_identity == 0.0
    }
}

pub fn shift_profile(mu: &[f64], mu0: &[f64], model: &SigmaModel) -> Result<ShiftProfile> {
    let p = model.dim();
    if mu.len() != p || mu0.len() != p {
        return Err(Error::Argument(format!(
            "mean vectors have lengths {} and {}, model has p = {p}",
            mu.len(),
            mu0.len()
        )));
    }
    let diff = DVector::from_iterator(p, mu.iter().zip(mu0).map(|(a, b)| a - b));
    let sigma = model.matrix();
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Model("covariance is not positive definite".into()))?;
    let delta2 = diff.dot(&chol.solve(&diff)).max(0.0);
    Ok(ShiftProfile {
        delta2,
        delta2_identity: diff.norm_squared(),
        delta2_sigma: diff.dot(&(&sigma * &diff)).max(0.0),
    })
}

/// Which test's power to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerKind {
    Hotelling,
    Dempster,
    /// The weighted test at its optimal weight.
    Weighted,
    WeightedAtRho(f64),
}

/// Local asymptotic parameters `(n, c, a₁, a₂, α)` shared by every power formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub n: f64,
    pub c: f64,
    pub a1: f64,
    pub a2: f64,
    pub alpha: f64,
}

impl Design {
    pub fn new(n: f64, c: f64, a1: f64, a2: f64, alpha: f64) -> Result<Self> {
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::Argument(format!("n = {n} must be >= 1")));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::Argument(format!("c = {c} outside (0, 1)")));
        }
        if !(a1 > 0.0 && a2 > 0.0) || !a1.is_finite() || !a2.is_finite() {
            return Err(Error::Argument(format!("need a1, a2 > 0, got {a1}, {a2}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Argument(format!("alpha = {alpha} outside (0, 1)")));
        }
        Ok(Self { n, c, a1, a2, alpha })
    }
}

/// `√n δ`, the argument of `Φ(· - z(α))` in the local power of `kind`.
pub fn noncentrality(kind: PowerKind, profile: &ShiftProfile, d: &Design) -> Result<f64> {
    let Design { n, c, a1, a2, .. } = *d;
    let (dm, di) = (profile.delta2, profile.delta2_identity);
    let root_n = n.sqrt();
    let value = match kind {
        PowerKind::Hotelling => (n * (1.0 - c)).sqrt() * dm / (2.0 * c).sqrt(),
        PowerKind::Dempster => root_n * di / (2.0 * c * a2).sqrt(),
        PowerKind::Weighted => {
            root_n * ((a2 * (1.0 - c)).sqrt() * dm + di) / (2.0 * (((1.0 - c).sqrt() * a1 * a2.sqrt() + a2) * c).sqrt())
        }
        PowerKind::WeightedAtRho(rho) => {
            let sigma = sigma_rho(rho, c, a1, a2)?;
            root_n * (rho * dm / (1.0 - c) + (1.0 - rho) * di / (a1 * c)) / sigma
        }
    };
    Ok(value)
}

/// `Φ(√n δ - z(α))`.
pub fn asymptotic_power(kind: PowerKind, profile: &ShiftProfile, d: &Design) -> Result<f64> {
    let z = normal_upper_quantile(d.alpha)?;
    Ok(normal_cdf(noncentrality(kind, profile, d)? - z))
}

/// `Δ²/Δ_I²` at which Hotelling's and Dempster's local powers coincide: `1/√((1-c) a₂)`.
pub fn omega0_ratio(c: f64, a2: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&c) || !(a2 > 0.0) {
        return Err(Error::Argument(format!(
            "need c in [0, 1) and a2 > 0, got c = {c}, a2 = {a2}"
        )));
    }
    Ok(1.0 / ((1.0 - c) * a2).sqrt())
}

/// The interval of `Δ²/Δ_I²` on which the weighted test is the most powerful, as
/// `(first, second)` endpoints in their printed order.
pub fn dominance_interval(c: f64, a1: f64, a2: f64) -> (f64, f64) {
    let k = std::f64::consts::SQRT_2 * (1.0 + a1 * ((1.0 - c) / a2).sqrt()).sqrt() - 1.0;
    let scale = (a2 * (1.0 - c)).sqrt();
    (k / scale, 1.0 / (k * scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Ratio inside the dominance interval: weighted ≥ both others.
    WeightedBest,
    /// Ratio below it: Dempster > weighted > Hotelling.
    DempsterBest,
    /// Ratio above it: Hotelling > weighted > Dempster.
    HotellingBest,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::WeightedBest => "WeightedBest",
            Regime::DempsterBest => "DempsterBest",
            Regime::HotellingBest => "HotellingBest",
        })
    }
}

/// Asymptotic powers of the three tests at one profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTriple {
    pub hotelling: f64,
    pub dempster: f64,
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    /// `Δ²/Δ_I²`.
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub regime: Regime,
    pub powers: PowerTriple,
    /// Noncentralities behind `powers`; they keep the ordering when `Φ` saturates.
    pub noncentralities: PowerTriple,
    pub notes: Vec<String>,
}

impl RegimeReport {
    /// Whether the attached values are ordered as the regime claims, within `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let check = |t: &PowerTriple| {
            let PowerTriple {
                hotelling: h,
                dempster: d,
                weighted: w,
            } = *t;
            match self.regime {
                Regime::WeightedBest => w >= h - tol && w >= d - tol,
                Regime::DempsterBest => d >= w - tol && w >= h - tol,
                Regime::HotellingBest => h >= w - tol && w >= d - tol,
            }
        };
        check(&self.powers) && check(&self.noncentralities)
    }
}

/// Places a profile in one of the three regimes and attaches the three powers.
pub fn classify_regime(profile: &ShiftProfile, d: &Design) -> Result<RegimeReport> {
    if !(profile.delta2_identity > 0.0) || !(profile.delta2 > 0.0) {
        return Err(Error::Argument("regime needs a non-null shift".into()));
    }
    let mut notes = Vec::new();
    let (first, second) = dominance_interval(d.c, d.a1, d.a2);
    let (lower, upper) = if first <= second {
        (first, second)
    } else {
        notes.push(format!(
            "dominance endpoints out of order ({first:.6}, {second:.6}); sorted"
        ));
        (second, first)
    };
    let ratio = profile.delta2 / profile.delta2_identity;
    let regime = if ratio < lower {
        Regime::DempsterBest
    } else if ratio > upper {
        Regime::HotellingBest
    } else {
        Regime::WeightedBest
    };
    let triple = |f: &dyn Fn(PowerKind) -> Result<f64>| -> Result<PowerTriple> {
        Ok(PowerTriple {
            hotelling: f(PowerKind::Hotelling)?,
            dempster: f(PowerKind::Dempster)?,
            weighted: f(PowerKind::Weighted)?,
        })
    };
    let powers = triple(&|k| asymptotic_power(k, profile, d))?;
    let noncentralities = triple(&|k| noncentrality(k, profile, d))?;
    let report = RegimeReport {
        ratio,
        lower,
        upper,
        regime,
        powers,
        noncentralities,
        notes,
    };
    if !report.is_consistent(1e-9) {
        let mut report = report;
        report
            .notes
            .push("power ordering disagrees with the regime label".into());
        return Ok(report);
    }
    Ok(report)
}

/// The optimal weight of a design, for reporting next to the powers.
pub fn design_weight(d: &Design) -> Result<f64> {
    optimal_weight(d.c, d.a1, d.a2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(dm: f64, di: f64) -> ShiftProfile {
        ShiftProfile {
            delta2: dm,
            delta2_identity: di,
            delta2_sigma: 0.0,
        }
    }

    #[test]
    fn identity_profile_is_flat() {
        let model = SigmaModel::identity(4).unwrap();
        let p = shift_profile(&[1.0, 2.0, 0.0, -1.0], &[0.0; 4], &model).unwrap();
        assert!((p.delta2 - 6.0).abs() < 1e-12);
        assert_eq!(p.delta2_identity, 6.0);
        assert!((p.delta2_sigma - 6.0).abs() < 1e-12);
    }

    #[test]
    fn paper_shift_magnitude() {
        let (p, n) = (50usize, 69.0f64);
        let v = 2.0 / (n.powf(0.25) * (p as f64).sqrt());
        let prof = shift_profile(&vec![v; p], &vec![0.0; p], &SigmaModel::identity(p).unwrap()).unwrap();
        assert!((prof.delta2_identity - 4.0 / n.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ar1_mahalanobis_matches_dense_solve() {
        let model = SigmaModel::ar1(10, 0.4).unwrap();
        let mut mu = vec![0.0; 10];
        mu[0] = 1.0;
        let prof = shift_profile(&mu, &[0.0; 10], &model).unwrap();
        // Σ⁻¹ of AR(1) is tridiagonal with (0,0) entry 1/(1-η²)
        let oracle = 1.0 / (1.0 - 0.16);
        assert!((prof.delta2 - oracle).abs() < 1e-10);
        let lu = model.matrix().lu().solve(&DVector::from_vec(mu.clone())).unwrap();
        assert!((prof.delta2 - lu[0]).abs() < 1e-10);
    }

    #[test]
    fn null_shift_has_level_power() {
        let d = Design::new(100.0, 0.4, 1.0, 1.2, 0.05).unwrap();
        for kind in [
            PowerKind::Hotelling,
            PowerKind::Dempster,
            PowerKind::Weighted,
            PowerKind::WeightedAtRho(0.3),
        ] {
            let pw = asymptotic_power(kind, &profile(0.0, 0.0), &d).unwrap();
            assert!((pw - 0.05).abs() < 1e-15, "{kind:?}: {pw}");
        }
    }

    #[test]
    fn boundary_weights_reproduce_component_powers() {
        let d = Design::new(80.0, 0.35, 1.1, 1.7, 0.05).unwrap();
        let prof = profile(0.3, 0.4);
        let at = |k| asymptotic_power(k, &prof, &d).unwrap();
        assert!((at(PowerKind::WeightedAtRho(1.0)) - at(PowerKind::Hotelling)).abs() < 1e-14);
        assert!((at(PowerKind::WeightedAtRho(0.0)) - at(PowerKind::Dempster)).abs() < 1e-14);
        let rho = optimal_weight(d.c, d.a1, d.a2).unwrap();
        assert!((at(PowerKind::WeightedAtRho(rho)) - at(PowerKind::Weighted)).abs() < 1e-12);
    }

    #[test]
    fn omega0_values() {
        assert_eq!(omega0_ratio(0.0, 1.0).unwrap(), 1.0);
        assert!((omega0_ratio(0.5, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(omega0_ratio(1.0, 1.0).is_err());
    }

    #[test]
    fn identity_design_interval() {
        let (lo, hi) = dominance_interval(0.5, 1.0, 1.0);
        // k = √2 (1 + √0.5)^{1/2} - 1
        let k = 2f64.sqrt() * (1.0 + 0.5f64.sqrt()).sqrt() - 1.0;
        assert!((lo - k / 0.5f64.sqrt()).abs() < 1e-14);
        assert!((lo - 1.198_912).abs() < 1e-6);
        assert!((hi - 1.668_179).abs() < 1e-6);
        let d = Design::new(100.0, 0.5, 1.0, 1.0, 0.05).unwrap();
        let rep = classify_regime(&profile(1.0, 1.0), &d).unwrap();
        assert_eq!(rep.regime, Regime::DempsterBest);
        assert!(rep.powers.dempster > rep.powers.weighted && rep.powers.weighted > rep.powers.hotelling);
        assert!(rep.notes.is_empty());
    }

    #[test]
    fn large_ratio_favours_hotelling() {
        let d = Design::new(100.0, 0.5, 1.0, 1.5, 0.05).unwrap();
        let rep = classify_regime(&profile(0.2, 0.02), &d).unwrap();
        assert_eq!(rep.regime, Regime::HotellingBest);
        let w = rep.powers;
        assert!(w.hotelling > w.weighted && w.weighted > w.dempster);
    }

    #[test]
    fn null_profile_is_rejected() {
        let d = Design::new(100.0, 0.5, 1.0, 1.0, 0.05).unwrap();
        assert!(classify_regime(&profile(0.0, 0.0), &d).is_err());
    }

    #[test]
    fn power_grows_with_n() {
        let prof = profile(0.2, 0.3);
        for kind in [
            PowerKind::Hotelling,
            PowerKind::Dempster,
            PowerKind::Weighted,
            PowerKind::WeightedAtRho(0.6),
        ] {
            let mut last = 0.0;
            for n in [10.0, 20.0, 50.0, 100.0, 1000.0] {
                let pw = asymptotic_power(kind, &prof, &Design::new(n, 0.3, 1.0, 1.4, 0.05).unwrap()).unwrap();
                assert!(pw >= last);
                last = pw;
            }
        }
    }
}
