//! Monte Carlo experiments: attained significance levels and empirical powers
//! over grids of `(η, p, N, α)`.
//!
//! Each cell `(η, p, N)` gets its own family of streams `stream(seed, cell, i)`,
//! `i = 0..r`; the cell id depends only on `(η, p, N)`. Replicate `i` draws one
//! dataset that all enabled tests share. Workers return integer reject counts,
//! so results do not depend on the number of threads.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::gauss::{sample_with, summarize, SigmaModel};
use crate::rng;
use crate::spectral::estimate_a;
use crate::testing::{
    dempster_critical, dempster_standardized, hotelling_critical, hotelling_standardized, weighted_test, CriticalMode,
    TestKind, WeightPolicy,
};

/// Seed used when neither the caller nor the spec provides one.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Column order of [`ResultTable::to_csv`].
pub const CSV_HEADER: &str = "eta,p,N,alpha,test,rate,mc_se,rejects,r,seed";

/// Mean of the sampling distribution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    /// `μ = 0`.
    #[default]
    Null,
    /// `μ = 2 / (n^{1/4} √p) · 1`, recomputed for every `N`.
    PaperShift,
    /// A fixed mean vector; requires a single dimension.
    Custom(Vec<f64>),
}

fn default_alphas() -> Vec<f64> {
    vec![0.01, 0.05, 0.10]
}

fn default_replications() -> u64 {
    10_000
}

fn default_tests() -> Vec<TestKind> {
    TestKind::ALL.to_vec()
}

/// A simulation study, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// AR(1) correlation parameters; `0` is the identity.
    pub etas: Vec<f64>,
    /// Dimensions `p`.
    pub dims: Vec<usize>,
    /// Sample sizes `N`; defaults to `40 i + p`, `i = 1..=10`, per dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_sizes: Option<Vec<usize>>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mu_mode: MuMode,
    #[serde(default = "default_tests")]
    pub tests: Vec<TestKind>,
    /// Critical point of the weighted test.
    #[serde(default)]
    pub critical: CriticalMode,
}

impl ExperimentSpec {
    /// Parses a JSON spec; errors carry the path of the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Spec(vec![format!("at `{path}`: {inner}")])
        })?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    /// Sample sizes for dimension `p`.
    pub fn sample_sizes_for(&self, p: usize) -> Vec<usize> {
        match &self.sample_sizes {
            Some(list) => list.clone(),
            None => (1..=10).map(|i| 40 * i + p).collect(),
        }
    }

    pub fn is_power(&self) -> bool {
        self.mu_mode != MuMode::Null
    }

    /// Every violated constraint, or `Ok` if there are none.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.etas.is_empty() {
            v.push("etas: at least one value required".to_string());
        }
        for &eta in &self.etas {
            if !(eta.is_finite() && eta.abs() < 1.0) {
                v.push(format!("etas: {eta} outside (-1, 1)"));
            }
        }
        if self.dims.is_empty() {
            v.push("dims: at least one value required".to_string());
        }
        if self.dims.contains(&0) {
            v.push("dims: dimensions must be positive".to_string());
        }
        if self.alphas.is_empty() {
            v.push("alphas: at least one value required".to_string());
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a < 1.0) {
                v.push(format!("alphas: {a} outside (0, 1)"));
            }
        }
        if self.replications == 0 {
            v.push("replications: must be at least 1".to_string());
        }
        if self.tests.is_empty() {
            v.push("tests: at least one test required".to_string());
        }
        if matches!(&self.sample_sizes, Some(list) if list.is_empty()) {
            v.push("sample_sizes: list is empty".to_string());
        }
        let weighted = self.tests.contains(&TestKind::Weighted);
        for &p in self.dims.iter().filter(|&&p| p > 0) {
            for n_obs in self.sample_sizes_for(p) {
                if n_obs <= p {
                    v.push(format!("sample_sizes: N = {n_obs} must exceed p = {p}"));
                } else if weighted && n_obs < p + 2 {
                    v.push(format!(
                        "sample_sizes: the weighted test needs N >= p + 2 (N = {n_obs}, p = {p})"
                    ));
                }
                if n_obs < 6 {
                    v.push(format!(
                        "sample_sizes: N = {n_obs} leaves fewer than 5 degrees of freedom"
                    ));
                }
            }
        }
        if let MuMode::Custom(mu) = &self.mu_mode {
            if self.dims.len() != 1 {
                v.push("mu_mode.custom: requires exactly one dimension".to_string());
            } else if mu.len() != self.dims[0] {
                v.push(format!(
                    "mu_mode.custom: length {} differs from p = {}",
                    mu.len(),
                    self.dims[0]
                ));
            }
            if mu.iter().any(|x| !x.is_finite()) {
                v.push("mu_mode.custom: entries must be finite".to_string());
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Spec(v))
        }
    }

    /// Non-fatal remarks about the spec.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.replications < 100 {
            w.push(format!(
                "replications = {} is below 100; rates are multiples of 1/{}",
                self.replications, self.replications
            ));
        }
        w
    }
}

/// Execution options that do not change results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `0` uses all available cores.
    pub workers: usize,
    /// Overrides the spec seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub eta: f64,
    pub p: usize,
    pub n_obs: usize,
    pub alpha: f64,
    pub test: TestKind,
    pub rate: f64,
    pub mc_se: f64,
    pub rejects: u64,
    pub replications: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub spec: ExperimentSpec,
    pub seed: u64,
    pub wall_time: Duration,
}

/// `√(rate (1 - rate) / r)`.
pub fn mc_se(rate: f64, replications: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) || replications == 0 {
        return Err(Error::Argument(format!(
            "need rate in [0, 1] and r >= 1, got rate = {rate}, r = {replications}"
        )));
    }
    Ok((rate * (1.0 - rate) / replications as f64).sqrt())
}

/// Attained significance levels; requires `mu_mode = null`.
pub fn run_asl(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ResultTable> {
    if spec.mu_mode != MuMode::Null {
        return Err(Error::Spec(vec!["mu_mode: run_asl needs `null`".into()]));
    }
    run(spec, opts)
}

/// Empirical powers; requires a non-null `mu_mode`.
pub fn run_power(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ResultTable> {
    if spec.mu_mode == MuMode::Null {
        return Err(Error::Spec(vec![
            "mu_mode: run_power needs `paper_shift` or `custom`".into()
        ]));
    }
    run(spec, opts)
}

/// Runs whichever study the spec describes.
pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ResultTable> {
    spec.validate()?;
    let seed = opts.seed.or(spec.seed).unwrap_or(DEFAULT_SEED);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))?;
    let mut tests = spec.tests.clone();
    tests.sort();
    tests.dedup();
    let start = Instant::now();
    let mut rows = Vec::new();
    for &eta in &spec.etas {
        for &p in &spec.dims {
            let model = SigmaModel::ar1(p, eta)?;
            for n_obs in spec.sample_sizes_for(p) {
                let counts = pool.install(|| run_cell(spec, &model, eta, n_obs, &tests, seed))?;
                for (a, &alpha) in spec.alphas.iter().enumerate() {
                    for (t, &test) in tests.iter().enumerate() {
                        let rejects = counts[a * tests.len() + t];
                        let rate = rejects as f64 / spec.replications as f64;
                        rows.push(ResultRow {
                            eta,
                            p,
                            n_obs,
                            alpha,
                            test,
                            rate,
                            mc_se: mc_se(rate, spec.replications)?,
                            rejects,
                            replications: spec.replications,
                            seed,
                        });
                    }
                }
            }
        }
    }
    Ok(ResultTable {
        rows,
        spec: spec.clone(),
        seed,
        wall_time: start.elapsed(),
    })
}

fn cell_mean(mode: &MuMode, p: usize, n_obs: usize) -> Vec<f64> {
    match mode {
        MuMode::Null => vec![0.0; p],
        MuMode::PaperShift => {
            let n = (n_obs - 1) as f64;
            vec![2.0 / (n.powf(0.25) * (p as f64).sqrt()); p]
        }
        MuMode::Custom(mu) => mu.clone(),
    }
}

/// Reject counts indexed `[alpha][test]`, flattened.
fn run_cell(
    spec: &ExperimentSpec,
    model: &SigmaModel,
    eta: f64,
    n_obs: usize,
    tests: &[TestKind],
    seed: u64,
) -> Result<Vec<u64>> {
    let p = model.dim();
    let cell = rng::cell_id(&[eta.to_bits(), p as u64, n_obs as u64]);
    let mu = cell_mean(&spec.mu_mode, p, n_obs);
    let mu0 = vec![0.0; p];
    let hotelling_crit = spec
        .alphas
        .iter()
        .map(|&a| hotelling_critical(a, p, n_obs))
        .collect::<Result<Vec<f64>>>()?;
    let width = spec.alphas.len() * tests.len();
    (0..spec.replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<u64>> {
            let data = sample_with(model, &mu, n_obs, &mut rng::stream(seed, cell, rep))?;
            let summary = summarize(&data, &mu0)?;
            let est = estimate_a(&summary)?;
            let mut hits = vec![0u64; width];
            for (t, &test) in tests.iter().enumerate() {
                match test {
                    TestKind::Hotelling => {
                        let stat = hotelling_standardized(&summary)?;
                        for (a, crit) in hotelling_crit.iter().enumerate() {
                            hits[a * tests.len() + t] = u64::from(stat >= *crit);
                        }
                    }
                    TestKind::Dempster => {
                        let stat = dempster_standardized(&summary, &est)?;
                        for (a, &alpha) in spec.alphas.iter().enumerate() {
                            hits[a * tests.len() + t] = u64::from(stat >= dempster_critical(alpha, &est)?);
                        }
                    }
                    TestKind::Weighted => {
                        for (a, &alpha) in spec.alphas.iter().enumerate() {
                            let out = weighted_test(&summary, &est, alpha, WeightPolicy::Adaptive, spec.critical)?;
                            hits[a * tests.len() + t] = u64::from(out.reject);
                        }
                    }
                }
            }
            Ok(hits)
        })
        .try_reduce(
            || vec![0; width],
            |mut acc, hits| {
                acc.iter_mut().zip(&hits).for_each(|(x, y)| *x += y);
                Ok(acc)
            },
        )
}

impl ResultTable {
    /// The `(η, p)` pairs present, in row order.
    pub fn cells(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for r in &self.rows {
            if !out.iter().any(|&(e, p)| e.to_bits() == r.eta.to_bits() && p == r.p) {
                out.push((r.eta, r.p));
            }
        }
        out
    }

    /// Rows of one `(η, p)` pair.
    pub fn subset(&self, eta: f64, p: usize) -> ResultTable {
        ResultTable {
            rows: self
                .rows
                .iter()
                .filter(|r| r.eta.to_bits() == eta.to_bits() && r.p == p)
                .cloned()
                .collect(),
            spec: self.spec.clone(),
            seed: self.seed,
            wall_time: self.wall_time,
        }
    }

    pub fn find(&self, n_obs: usize, alpha: f64, test: TestKind) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.n_obs == n_obs && r.alpha == alpha && r.test == test)
    }

    /// CSV with columns [`CSV_HEADER`]; wall time is deliberately absent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                sig(r.eta, 6),
                r.p,
                r.n_obs,
                sig(r.alpha, 6),
                r.test.label(),
                sig(r.rate, 6),
                sig(r.mc_se, 6),
                r.rejects,
                r.replications,
                r.seed
            );
        }
        out
    }

    /// Aligned Markdown: one block of rows per `α`, one row per test, one column per `N`.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for (eta, p) in self.cells() {
            let sub = self.subset(eta, p);
            let mut ns: Vec<usize> = sub.rows.iter().map(|r| r.n_obs).collect();
            ns.sort_unstable();
            ns.dedup();
            let kind = if self.spec.is_power() { "Empirical power" } else { "ASL" };
            let _ = writeln!(
                out,
                "{kind}, (eta, p) = ({}, {p}), r = {}\n",
                sig(eta, 6),
                self.spec.replications
            );
            let mut table: Vec<Vec<String>> = Vec::new();
            let mut header = vec!["alpha".to_string(), "test".to_string()];
            header.extend(ns.iter().map(|n| format!("N={n}")));
            table.push(header);
            for &alpha in &self.spec.alphas {
                let mut first = true;
                let mut tests = self.spec.tests.clone();
                tests.sort();
                tests.dedup();
                for test in tests {
                    let mut line = vec![
                        if first { sig(alpha, 6) } else { String::new() },
                        test.label().to_string(),
                    ];
                    first = false;
                    for &n in &ns {
                        line.push(
                            sub.find(n, alpha, test)
                                .map_or("-".into(), |r| format!("{:.4}", r.rate)),
                        );
                    }
                    table.push(line);
                }
            }
            let widths: Vec<usize> = (0..table[0].len())
                .map(|j| table.iter().map(|row| row[j].chars().count()).max().unwrap_or(0).max(3))
                .collect();
            for (i, row) in table.iter().enumerate() {
                let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                let _ = writeln!(out, "| {} |", cells.join(" | "));
                if i == 0 {
                    let rule: Vec<String> = widths.iter().map(|w| format!("{}:", "-".repeat(w + 1))).collect();
                    let _ = writeln!(out, "|{}|", rule.join("|"));
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            etas: vec![0.2],
            dims: vec![6],
            sample_sizes: Some(vec![15, 25]),
            alphas: vec![0.05, 0.10],
            replications: 300,
            seed: Some(11),
            mu_mode: MuMode::Null,
            tests: TestKind::ALL.to_vec(),
            critical: CriticalMode::CornishFisher,
        }
    }

    #[test]
    fn se_values() {
        assert_eq!(mc_se(0.5, 100).unwrap(), 0.05);
        assert!((mc_se(0.05, 10_000).unwrap() - 0.002_179_449).abs() < 1e-8);
        assert_eq!(mc_se(0.0, 10).unwrap(), 0.0);
        assert!(mc_se(1.5, 10).is_err());
        assert!(mc_se(0.5, 0).is_err());
    }

    #[test]
    fn default_grid() {
        let mut spec = small_spec();
        spec.sample_sizes = None;
        assert_eq!(
            spec.sample_sizes_for(50),
            vec![90, 130, 170, 210, 250, 290, 330, 370, 410, 450]
        );
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let spec = ExperimentSpec::from_json(r#"{"etas": [0.2], "dims": [50]}"#).unwrap();
        assert_eq!(spec.alphas, vec![0.01, 0.05, 0.10]);
        assert_eq!(spec.replications, 10_000);
        assert_eq!(spec.critical, CriticalMode::CornishFisher);
        assert_eq!(spec.mu_mode, MuMode::Null);
        let again = ExperimentSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
        let custom = ExperimentSpec::from_json(
            r#"{"etas": [0.2], "dims": [2], "mu_mode": {"custom": [0, 1]}, "tests": ["T2", "weighted"], "critical": "normal"}"#,
        )
        .unwrap();
        assert_eq!(custom.mu_mode, MuMode::Custom(vec![0.0, 1.0]));
        assert_eq!(custom.tests, vec![TestKind::Hotelling, TestKind::Weighted]);
    }

    #[test]
    fn json_errors_name_the_key() {
        let err = ExperimentSpec::from_json(r#"{"etas": [0.2], "dims": [50], "replicates": 5}"#).unwrap_err();
        assert!(err.to_string().contains("replicates"), "{err}");
        let err = ExperimentSpec::from_json(r#"{"etas": [0.2], "dims": [50, "x"]}"#).unwrap_err();
        assert!(err.to_string().contains("dims[1]"), "{err}");
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut spec = small_spec();
        spec.alphas = vec![0.0, 0.05];
        spec.sample_sizes = Some(vec![6]);
        spec.replications = 0;
        match spec.validate() {
            Err(Error::Spec(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
        spec.replications = 10;
        assert_eq!(spec.warnings().len(), 1);
    }

    #[test]
    fn mode_guards() {
        let spec = small_spec();
        assert!(run_power(&spec, &RunOptions::default()).is_err());
        let mut shifted = spec.clone();
        shifted.mu_mode = MuMode::PaperShift;
        assert!(run_asl(&shifted, &RunOptions::default()).is_err());
    }

    #[test]
    fn rates_are_exact_fractions() {
        let mut spec = small_spec();
        spec.replications = 10;
        let table = run(&spec, &RunOptions { workers: 2, seed: None }).unwrap();
        assert_eq!(table.rows.len(), 2 * 2 * 3);
        for r in &table.rows {
            assert_eq!(r.rate, r.rejects as f64 / 10.0);
            assert!((r.rate * 10.0).fract() == 0.0);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let spec = small_spec();
        let a = run_asl(&spec, &RunOptions { workers: 1, seed: None }).unwrap();
        let b = run_asl(&spec, &RunOptions { workers: 4, seed: None }).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn zero_custom_shift_equals_null() {
        let spec = small_spec();
        let mut custom = spec.clone();
        custom.mu_mode = MuMode::Custom(vec![0.0; 6]);
        let a = run_asl(&spec, &RunOptions::default()).unwrap();
        let b = run_power(&custom, &RunOptions::default()).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn seed_override_changes_stream() {
        let spec = small_spec();
        let a = run(&spec, &RunOptions::default()).unwrap();
        let b = run(
            &spec,
            &RunOptions {
                workers: 0,
                seed: Some(12),
            },
        )
        .unwrap();
        assert_eq!(a.seed, 11);
        assert_eq!(b.seed, 12);
        assert_ne!(a.rows, b.rows);
    }

    #[test]
    fn markdown_layout() {
        let table = run(&small_spec(), &RunOptions::default()).unwrap();
        let md = table.to_markdown();
        assert!(md.contains("N=15") && md.contains("N=25"));
        assert_eq!(md.lines().filter(|l| l.contains("Trho")).count(), 2);
        let csv = table.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + table.rows.len());
    }
}
