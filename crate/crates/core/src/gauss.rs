//! Gaussian data generation and sufficient statistics.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;

/// Covariance structure of the generating distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaModel {
    p: usize,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Identity,
    Ar1 { eta: f64 },
    Dense { matrix: DMatrix<f64>, factor: DMatrix<f64> },
}

/// Which family a [`SigmaModel`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    Identity,
    Ar1,
    Dense,
}

impl SigmaModel {
    pub fn identity(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Model("dimension must be positive".into()));
        }
        Ok(Self {
            p,
            kind: Kind::Identity,
        })
    }

    /// `Σ = (η^|i-j|)`, the first-order autoregressive correlation matrix.
    pub fn ar1(p: usize, eta: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Model("dimension must be positive".into()));
        }
        if !(eta > -1.0 && eta < 1.0) {
            return Err(Error::Model(format!("AR(1) parameter {eta} outside (-1, 1)")));
        }
        Ok(Self {
            p,
            kind: Kind::Ar1 { eta },
        })
    }

    /// An arbitrary symmetric positive-definite matrix.
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        let p = matrix.nrows();
        if p == 0 || matrix.ncols() != p {
            return Err(Error::Model(format!(
                "covariance must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("covariance has non-finite entries".into()));
        }
        let scale = matrix.amax();
        for i in 0..p {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Model(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let factor = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::Model("covariance is not positive definite".into()))?
            .unpack();
        if (0..p).any(|i| !(factor[(i, i)] > 0.0)) {
            return Err(Error::Model("covariance is not positive definite".into()));
        }
        Ok(Self {
            p,
            kind: Kind::Dense { matrix, factor },
        })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> SigmaKind {
        match self.kind {
            Kind::Identity => SigmaKind::Identity,
            Kind::Ar1 { .. } => SigmaKind::Ar1,
            Kind::Dense { .. } => SigmaKind::Dense,
        }
    }

    /// The AR(1) parameter, `Some(0.0)` for the identity, `None` for dense models.
    pub fn eta(&self) -> Option<f64> {
        match self.kind {
            Kind::Identity => Some(0.0),
            Kind::Ar1 { eta } => Some(eta),
            Kind::Dense { .. } => None,
        }
    }

    /// The covariance as a dense matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        match &self.kind {
            Kind::Identity => DMatrix::identity(self.p, self.p),
            Kind::Ar1 { eta } => DMatrix::from_fn(self.p, self.p, |i, j| eta.powi(i.abs_diff(j) as i32)),
            Kind::Dense { matrix, .. } => matrix.clone(),
        }
    }

    /// Writes one draw of `N_p(0, Σ)` into `out`, using `z` as scratch.
    fn draw_centered<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        match &self.kind {
            Kind::Identity => {
                for o in out.iter_mut() {
                    *o = rng.sample(StandardNormal);
                }
            }
            Kind::Ar1 { eta } => {
                let innov = (1.0 - eta * eta).sqrt();
                let mut prev: f64 = rng.sample(StandardNormal);
                out[0] = prev;
                for o in out.iter_mut().skip(1) {
                    let e: f64 = rng.sample(StandardNormal);
                    prev = eta * prev + innov * e;
                    *o = prev;
                }
            }
            Kind::Dense { factor, .. } => {
                for v in z.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (k, zk) in z.iter().enumerate().take(i + 1) {
                        acc += factor[(i, k)] * zk;
                    }
                    *o = acc;
                }
            }
        }
    }
}

/// An `N x p` data matrix, one observation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::Argument(format!(
                "need at least 2 observations, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::Argument("observations have no coordinates".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("data contain non-finite values".into()));
        }
        Ok(Self { values })
    }

    /// Builds a matrix from row-major observations.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Argument(format!(
                "row {i} has {} values, expected {p}",
                rows[i].len()
            )));
        }
        Self::new(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Sample size `N`.
    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    /// Dimension `p`.
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Applies `x -> A x + b` to every observation.
    pub fn transform(&self, a: &DMatrix<f64>, b: &[f64]) -> Result<Self> {
        if a.ncols() != self.dim() || a.nrows() != b.len() {
            return Err(Error::Argument("transform dimensions do not match the data".into()));
        }
        let mut out = &self.values * a.transpose();
        for mut row in out.row_iter_mut() {
            for (v, s) in row.iter_mut().zip(b) {
                *v += s;
            }
        }
        Self::new(out)
    }
}

/// Draws `n_obs` i.i.d. observations from `N_p(mu, Σ)` using a caller-owned stream.
///
/// AR(1) rows come from the recursion `x_1 = z_1`,
/// `x_k = η x_{k-1} + sqrt(1 - η²) z_k`, which has covariance `η^|i-j|`
/// exactly; dense models multiply by the Cholesky factor.
pub fn sample_with<R: Rng + ?Sized>(model: &SigmaModel, mu: &[f64], n_obs: usize, rng: &mut R) -> Result<DataMatrix> {
    let p = model.dim();
    if mu.len() != p {
        return Err(Error::Argument(format!(
            "mean has length {}, model has p = {p}",
            mu.len()
        )));
    }
    if n_obs < 2 {
        return Err(Error::Argument(format!("need N >= 2, got {n_obs}")));
    }
    let mut values = DMatrix::zeros(n_obs, p);
    let mut row = vec![0.0; p];
    let mut scratch = vec![0.0; if model.kind() == SigmaKind::Dense { p } else { 0 }];
    for i in 0..n_obs {
        model.draw_centered(rng, &mut scratch, &mut row);
        for (j, (x, m)) in row.iter().zip(mu).enumerate() {
            values[(i, j)] = x + m;
        }
    }
    Ok(DataMatrix { values })
}

/// Draws a dataset from the stream `(seed, 0, 0)`.
pub fn sample(model: &SigmaModel, mu: &[f64], n_obs: usize, seed: u64) -> Result<DataMatrix> {
    sample_with(model, mu, n_obs, &mut rng::stream(seed, 0, 0))
}

/// Sufficient statistics of a dataset relative to a reference mean `mu0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub p: usize,
    /// Sample size `N`.
    pub n_obs: usize,
    /// Degrees of freedom `n = N - 1`.
    pub n: usize,
    pub mean: DVector<f64>,
    /// Unbiased sample covariance `S` (divisor `n`).
    pub cov: DMatrix<f64>,
    /// `[tr S, tr S², tr S³, tr S⁴]`.
    pub trace_powers: [f64; 4],
    /// `N (x̄ - μ₀)'(x̄ - μ₀)`.
    pub q_identity: f64,
    /// `N (x̄ - μ₀)' S⁻¹ (x̄ - μ₀)`, present only when `p < N` and `S` factors.
    pub q_inverse: Option<f64>,
    /// Set when `p < N` but the Cholesky factorisation of `S` broke down.
    pub singular: bool,
}

/// Reduces a dataset to a [`SampleSummary`].
pub fn summarize(data: &DataMatrix, mu0: &[f64]) -> Result<SampleSummary> {
    let x = data.values();
    let (n_obs, p) = x.shape();
    if mu0.len() != p {
        return Err(Error::Argument(format!(
            "reference mean has length {}, data have p = {p}",
            mu0.len()
        )));
    }
    let n = n_obs - 1;
    let mean = DVector::from_iterator(p, x.column_iter().map(|c| c.sum() / n_obs as f64));
    let mut centered = x.clone();
    for (mut col, m) in centered.column_iter_mut().zip(mean.iter()) {
        col.add_scalar_mut(-m);
    }
    let mut cov = centered.tr_mul(&centered);
    cov /= n as f64;
    // gemm leaves rounding-level asymmetry; S is symmetric by definition
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let tp = trace_powers(&cov, 4)?;
    let diff = DVector::from_iterator(p, mean.iter().zip(mu0).map(|(m, r)| m - r));
    let q_identity = n_obs as f64 * diff.norm_squared();

    let (q_inverse, singular) = if p < n_obs {
        match Cholesky::new(cov.clone()) {
            Some(chol) if (0..p).all(|i| chol.l_dirty()[(i, i)] > 0.0) => {
                let solved = chol.solve(&diff);
                let q = n_obs as f64 * diff.dot(&solved);
                if q.is_finite() {
                    (Some(q.max(0.0)), false)
                } else {
                    (None, true)
                }
            }
            _ => (None, true),
        }
    } else {
        (None, false)
    };

    Ok(SampleSummary {
        p,
        n_obs,
        n,
        mean,
        cov,
        trace_powers: [tp[0], tp[1], tp[2], tp[3]],
        q_identity,
        q_inverse,
        singular,
    })
}

/// `tr Sᵏ` for `k = 1..=kmax` (`kmax <= 4`) by iterated matrix products.
pub fn trace_powers(s: &DMatrix<f64>, kmax: usize) -> Result<Vec<f64>> {
    if !(1..=4).contains(&kmax) {
        return Err(Error::Argument(format!("kmax must be in 1..=4, got {kmax}")));
    }
    if !s.is_square() {
        return Err(Error::Argument("matrix must be square".into()));
    }
    let mut out = vec![s.trace()];
    if kmax == 1 {
        return Ok(out);
    }
    let s2 = s * s;
    out.push(s2.trace());
    if kmax >= 3 {
        out.push(s2.component_mul(&s.transpose()).sum());
    }
    if kmax == 4 {
        out.push(s2.component_mul(&s2.transpose()).sum());
    }
    Ok(out)
}
