//! Brute-force checks for the asymptotic machinery: Gaussian quadratic-form
//! moments, the quadratic-form CLT ratio, a grid search for the optimal weight
//! and the Monte Carlo null distribution of the weighted statistic.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gauss::{sample_with, summarize, SigmaModel};
use crate::rng;
use crate::spectral::estimate_a;
use crate::testing::{weighted_test, CriticalMode, WeightPolicy};

const MOMENT_TAG: u64 = 0x6d6f_6d65_6e74;
const NULL_CDF_TAG: u64 = 0x6e75_6c6c_6364;
const BLOCK: u64 = 4096;

/// The three Gaussian quadratic-form moment identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentIdentity {
    /// `E[z'A₁z] = tr A₁`.
    First,
    /// `E[z'A₁z · z'A₂z] = 2 tr A₁A₂ + tr A₁ tr A₂`.
    Second,
    /// The seven-term product `E[z'A₁z · z'A₂z · z'A₃z]`.
    Third,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheckReport {
    pub identity: MomentIdentity,
    pub closed_form: f64,
    pub empirical: f64,
    pub se: f64,
    /// `|closed_form - empirical| <= 4 se`.
    pub pass: bool,
}

/// Closed forms of the three identities for diagonal `A₁, A₂, A₃`.
pub fn quadratic_moment_closed_forms(d1: &[f64], d2: &[f64], d3: &[f64]) -> [f64; 3] {
    let tr = |v: &[f64]| v.iter().sum::<f64>();
    let tr2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let tr123: f64 = d1.iter().zip(d2).zip(d3).map(|((a, b), c)| a * b * c).sum();
    let (t1, t2, t3) = (tr(d1), tr(d2), tr(d3));
    [
        t1,
        2.0 * tr2(d1, d2) + t1 * t2,
        t1 * t2 * t3 + 2.0 * t3 * tr2(d1, d2) + 2.0 * t2 * tr2(d1, d3) + 2.0 * t1 * tr2(d2, d3) + 8.0 * tr123,
    ]
}

/// Monte Carlo check of the three moment identities with `A_k = diag(d_k)`.
pub fn mc_quadratic_moments(d1: &[f64], d2: &[f64], d3: &[f64], r: u64, seed: u64) -> Result<[MomentCheckReport; 3]> {
    let p = d1.len();
    if p == 0 || d2.len() != p || d3.len() != p {
        return Err(Error::Argument(format!(
            "diagonals must share a positive length, got {}, {}, {}",
            d1.len(),
            d2.len(),
            d3.len()
        )));
    }
    if r < 10_000 {
        return Err(Error::Argument(format!("need r >= 10000 replications, got {r}")));
    }
    if d1.iter().chain(d2).chain(d3).any(|v| !v.is_finite()) {
        return Err(Error::Argument("diagonal entries must be finite".into()));
    }
    let cell = rng::cell_id(&[MOMENT_TAG, p as u64]);
    let blocks = r.div_ceil(BLOCK);
    // per block: sums of (y, y²) for y = q1, q1 q2, q1 q2 q3
    let partial: Vec<[f64; 6]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng::stream(seed, cell, b);
            let mut acc = [0.0; 6];
            let mut z2 = vec![0.0; p];
            for _ in (b * BLOCK)..((b + 1) * BLOCK).min(r) {
                for v in z2.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut stream);
                    *v = z * z;
                }
                let q = |d: &[f64]| d.iter().zip(&z2).map(|(a, b)| a * b).sum::<f64>();
                let q1 = q(d1);
                let ys = [q1, q1 * q(d2), q1 * q(d2) * q(d3)];
                for (k, y) in ys.into_iter().enumerate() {
                    acc[2 * k] += y;
                    acc[2 * k + 1] += y * y;
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; 6];
    for block in &partial {
        for (t, v) in total.iter_mut().zip(block) {
            *t += v;
        }
    }
    let closed = quadratic_moment_closed_forms(d1, d2, d3);
    let rf = r as f64;
    let ids = [MomentIdentity::First, MomentIdentity::Second, MomentIdentity::Third];
    Ok(std::array::from_fn(|k| {
        let mean = total[2 * k] / rf;
        let var = ((total[2 * k + 1] - rf * mean * mean) / (rf - 1.0)).max(0.0);
        let se = (var / rf).sqrt();
        MomentCheckReport {
            identity: ids[k],
            closed_form: closed[k],
            empirical: mean,
            se,
            pass: (closed[k] - mean).abs() <= 4.0 * se,
        }
    }))
}

/// `tr Ω⁴ / (tr Ω²)²` for `Ω = diag(omega)`; the quadratic-form CLT needs it to vanish.
pub fn clt_condition(omega: &[f64]) -> Result<f64> {
    let t2: f64 = omega.iter().map(|w| w * w).sum();
    if !(t2 > 0.0) || !t2.is_finite() {
        return Err(Error::Argument("Ω must be a non-zero finite diagonal".into()));
    }
    let t4: f64 = omega.iter().map(|w| w.powi(4)).sum();
    Ok(t4 / (t2 * t2))
}

/// Local power slope `f(ρ)` on the equal-power set, as a function of the weight.
pub fn weight_objective(rho: f64, c: f64, a1: f64, a2: f64) -> f64 {
    let one_c = 1.0 - c;
    let num = rho / one_c + (1.0 - rho) * (a2 * one_c).sqrt() / (a1 * c);
    let den = 2.0 * rho * rho * c / one_c.powi(3)
        + 2.0 * (1.0 - rho).powi(2) * a2 / (a1 * a1 * c)
        + 4.0 * rho * (1.0 - rho) / one_c;
    num / den.sqrt()
}

/// Argmax of [`weight_objective`] over the grid `0, step, 2 step, ..., 1`.
pub fn grid_search_weight(c: f64, a1: f64, a2: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 1e-4) {
        return Err(Error::Argument(format!("grid step {step} must lie in (0, 1e-4]")));
    }
    if !(c > 0.0 && c < 1.0) || !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::Argument(format!("invalid (c, a1, a2) = ({c}, {a1}, {a2})")));
    }
    let points = (1.0 / step).round() as u64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=points {
        let rho = (i as f64 * step).min(1.0);
        let f = weight_objective(rho, c, a1, a2);
        if f > best.0 {
            best = (f, rho);
        }
    }
    Ok(best.1)
}

/// Empirical CDF of the adaptively weighted statistic `T(ρ̂*)/σ(ρ̂*, ĉ, â₁, â₂)` under `H₀`.
pub fn empirical_null_cdf(n_obs: usize, model: &SigmaModel, r: u64, seed: u64, x_points: &[f64]) -> Result<Vec<f64>> {
    let p = model.dim();
    if p >= n_obs {
        return Err(Error::Argument(format!("need p < N, got p = {p}, N = {n_obs}")));
    }
    if r < 10_000 {
        return Err(Error::Argument(format!("need r >= 10000 replications, got {r}")));
    }
    let cell = rng::cell_id(&[
        NULL_CDF_TAG,
        model.eta().unwrap_or(-1.0).to_bits(),
        p as u64,
        n_obs as u64,
    ]);
    let zero = vec![0.0; p];
    let counts = (0..r)
        .into_par_iter()
        .map(|rep| -> Result<Vec<u64>> {
            let data = sample_with(model, &zero, n_obs, &mut rng::stream(seed, cell, rep))?;
            let summary = summarize(&data, &zero)?;
            let est = estimate_a(&summary)?;
            let t = weighted_test(&summary, &est, 0.5, WeightPolicy::Adaptive, CriticalMode::Normal)?.standardized;
            Ok(x_points.iter().map(|&x| u64::from(t <= x)).collect())
        })
        .try_reduce(
            || vec![0; x_points.len()],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(counts.into_iter().map(|k| k as f64 / r as f64).collect())
}
