//! Exact trace moments of a Wishart matrix and the unbiased estimators they imply.
//!
//! For `W ~ W_p(n, Σ)` and a trace word `λ = (λ_1, ..., λ_m)` the moment
//! `E[tr W^λ_1 ... tr W^λ_m]` is a polynomial in `n` whose coefficients are
//! products of `t_k = tr Σᵏ`. Writing `W = Σ_i y_i y_i'` with `y_i ~ N(0, Σ)` and
//! applying Isserlis' theorem, every perfect matching of the `2d` Gaussian
//! factors (`d = Σ λ_j`) contributes `n^c ∏ t_ℓ`, where `c` counts the connected
//! components of the sample-index graph and the `ℓ` are the cycle lengths of the
//! row-index graph.
//!
//! Collecting all words of one degree gives a square system
//! `E[s] = M(n) t` between observable trace products `s` and parameter
//! monomials `t` (both indexed by the partitions of `d`). Solving it at the
//! observed `s` yields exactly unbiased estimators of every monomial, `tr Σᵈ`
//! included.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Polynomial in `n` times a monomial in the `t_k`: `(monomial, power of n) -> coefficient`.
pub type MomentPolynomial = BTreeMap<(Vec<usize>, u32), i64>;

/// Partitions of `d` as non-increasing part lists, largest first part first.
pub fn partitions(d: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        self.0[x] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

fn for_each_matching(free: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, f: &mut impl FnMut(&[(usize, usize)])) {
    if free.is_empty() {
        f(pairs);
        return;
    }
    let first = free.remove(0);
    for k in 0..free.len() {
        let partner = free.remove(k);
        pairs.push((first, partner));
        for_each_matching(free, pairs, f);
        pairs.pop();
        free.insert(k, partner);
    }
    free.insert(0, first);
}

/// `E[∏_j tr W^{shape_j}]` for `W ~ W_p(n, Σ)` as an exact polynomial.
pub fn wishart_moment(shape: &[usize]) -> MomentPolynomial {
    let d: usize = shape.iter().sum();
    // factors are numbered cycle by cycle; next[f] is the factor that follows f in its trace
    let mut next = vec![0; d];
    let mut start = 0;
    for &len in shape {
        for k in 0..len {
            next[start + k] = start + (k + 1) % len;
        }
        start += len;
    }
    let mut prev = vec![0; d];
    for (f, &g) in next.iter().enumerate() {
        prev[g] = f;
    }
    // half-edge 2f is the row (left) index of factor f, 2f + 1 its column (right) index;
    // row variable v_f is shared by the right half of f and the left half of next[f]
    let var_of = |h: usize| if h % 2 == 1 { h / 2 } else { prev[h / 2] };

    let mut result = MomentPolynomial::new();
    let mut free: Vec<usize> = (0..2 * d).collect();
    for_each_matching(&mut free, &mut Vec::new(), &mut |pairs| {
        let mut samples = UnionFind::new(d);
        let mut rows = UnionFind::new(d);
        for &(a, b) in pairs {
            samples.union(a / 2, b / 2);
            rows.union(var_of(a), var_of(b));
        }
        let components = (0..d).filter(|&f| samples.find(f) == f).count() as u32;
        let mut edges_per_cycle = BTreeMap::new();
        for &(a, _) in pairs {
            *edges_per_cycle.entry(rows.find(var_of(a))).or_insert(0usize) += 1;
        }
        let mut monomial: Vec<usize> = edges_per_cycle.into_values().collect();
        monomial.sort_unstable_by(|x, y| y.cmp(x));
        *result.entry((monomial, components)).or_insert(0) += 1;
    });
    result
}

/// The moment system of degree `d`, cached: row `i` holds `E[s_i]` for the
/// `i`-th partition as a trace word, split by parameter monomial.
fn moment_system(d: usize) -> &'static [MomentPolynomial] {
    static CACHE: OnceLock<Vec<Vec<MomentPolynomial>>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        (0..=4)
            .map(|deg| {
                if deg == 0 {
                    return Vec::new();
                }
                let parts = partitions(deg);
                parts.iter().map(|word| wishart_moment(word)).collect()
            })
            .collect()
    });
    &all[d]
}

/// `M(n) / n^d`: expectations of trace products of `S = W / n`.
pub fn moment_matrix(d: usize, n: f64) -> DMatrix<f64> {
    let parts = partitions(d);
    let rows = moment_system(d);
    DMatrix::from_fn(parts.len(), parts.len(), |i, j| {
        rows[i]
            .iter()
            .filter(|((mono, _), _)| *mono == parts[j])
            .map(|((_, e), c)| *c as f64 * n.powi(*e as i32 - d as i32))
            .sum()
    })
}

/// Unbiased estimate of `tr Σᵈ` from `[tr S, tr S², tr S³, tr S⁴]`, `S` on `n`
/// degrees of freedom.
pub fn unbiased_trace_power(traces: &[f64; 4], n: usize, d: usize) -> Result<f64> {
    if !(1..=4).contains(&d) {
        return Err(Error::Argument(format!("trace power {d} not supported")));
    }
    if n < d {
        return Err(Error::Argument(format!(
            "degree-{d} moment system is singular for n = {n} < {d}"
        )));
    }
    let parts = partitions(d);
    let observed = DVector::from_iterator(
        parts.len(),
        parts
            .iter()
            .map(|word| word.iter().map(|&k| traces[k - 1]).product::<f64>()),
    );
    let system = moment_matrix(d, n as f64);
    let solution = system
        .lu()
        .solve(&observed)
        .ok_or_else(|| Error::Numeric(format!("degree-{d} Wishart moment system is singular at n = {n}")))?;
    // partitions(d)[0] == [d], the monomial tr Σᵈ
    let est = solution[0];
    if est.is_finite() {
        Ok(est)
    } else {
        Err(Error::Numeric(format!("non-finite tr Σ^{d} estimate")))
    }
}
