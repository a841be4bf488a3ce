//! Order statistics of conditionally independent components.
//!
//! Given `Z`, the indicators `1{Xi <= x}` are independent Bernoulli
//! variables with success probabilities `h_i(F_i(x), w)`, so the number of
//! components below `x` is Poisson-binomial. Every distribution here is an
//! integral over `w` of a tail probability of that count, computed by the
//! add-one-component recurrence. The permanent formulation is kept as a
//! slower second route to the same numbers.

use crate::error::{Error, Result};
use crate::model::CiModel;
use crate::permanent::SquareMatrix;
use crate::scalar::Scalar;

const MAX_STATES: usize = 1 << 24;
const PROBABILITY_SLACK: f64 = 1e-12;
pub const MAX_PERMANENT_COMPONENTS: usize = 12;
pub const MIN_CONDITIONING_PROBABILITY: f64 = 1e-12;

/// Ranks `r1 < ... < rk` (1-based) with thresholds `x1 <= ... <= xk`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatQuery<T> {
    ranks: Vec<usize>,
    thresholds: Vec<T>,
}

impl<T: Scalar> OrderStatQuery<T> {
    pub fn new(ranks: Vec<usize>, thresholds: Vec<T>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidRanks("at least one rank required".into()));
        }
        if ranks.len() != thresholds.len() {
            return Err(Error::InvalidRanks(format!(
                "{} ranks but {} thresholds",
                ranks.len(),
                thresholds.len()
            )));
        }
        if ranks[0] == 0 || ranks.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidRanks(format!(
                "ranks must be strictly increasing from 1, got {ranks:?}"
            )));
        }
        if thresholds.iter().any(|x| x.is_nan()) || thresholds.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::InvalidThresholds);
        }
        Ok(Self { ranks, thresholds })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    fn check_against(&self, n: usize) -> Result<()> {
        match self.ranks.last() {
            Some(&r) if r > n => Err(Error::InvalidRanks(format!("rank {r} exceeds n = {n}"))),
            _ => Ok(()),
        }
    }
}

/// Joint distribution of the counts `c_j = #{i : Xi <= x_j}` for
/// `k` nondecreasing thresholds, so `c_1 <= ... <= c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution<T> {
    n: usize,
    k: usize,
    // mixed radix (n + 1), digit j holds c_{j+1}
    probs: Vec<T>,
}

impl<T: Scalar> CountDistribution<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn thresholds(&self) -> usize {
        self.k
    }

    fn index(&self, counts: &[usize]) -> Option<usize> {
        if counts.len() != self.k || counts.iter().any(|&c| c > self.n) {
            return None;
        }
        Some(
            counts
                .iter()
                .rev()
                .fold(0, |acc, &c| acc * (self.n + 1) + c),
        )
    }

    /// Probability of exactly these cumulative counts.
    pub fn pmf(&self, counts: &[usize]) -> T {
        self.index(counts).map_or(T::zero(), |i| self.probs[i])
    }

    /// Calls `f` with every count vector of nonzero probability.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], T)) {
        let mut digits = vec![0usize; self.k];
        for &p in &self.probs {
            if p != T::zero() {
                f(&digits, p);
            }
            for d in digits.iter_mut() {
                *d += 1;
                if *d <= self.n {
                    break;
                }
                *d = 0;
            }
        }
    }

    pub fn probability(&self, mut event: impl FnMut(&[usize]) -> bool) -> T {
        let mut acc = T::zero();
        self.for_each(|c, p| {
            if event(c) {
                acc += p;
            }
        });
        acc
    }

    pub fn total(&self) -> T {
        self.probability(|_| true)
    }

    /// `P{c_j >= r_j for every j}`.
    pub fn at_least(&self, ranks: &[usize]) -> T {
        self.probability(|c| c.iter().zip(ranks).all(|(&c, &r)| c >= r))
    }
}

/// Poisson-binomial distribution of the number of successes.
pub fn poisson_binomial<T: Scalar>(p: &[T]) -> Result<CountDistribution<T>> {
    let rows: Vec<Vec<T>> = p.iter().map(|&x| vec![x]).collect();
    count_dp(&rows)
}

/// Joint count distribution for per-component threshold probabilities:
/// `probs[i][j] = P{Xi <= x_j}`, nondecreasing in `j`.
pub fn count_dp<T: Scalar>(probs: &[Vec<T>]) -> Result<CountDistribution<T>> {
    let n = probs.len();
    let k = probs.first().map_or(1, Vec::len);
    if k == 0 || probs.iter().any(|p| p.len() != k) {
        return Err(Error::InvalidArgument(
            "every component needs one probability per threshold".into(),
        ));
    }
    let slack = T::lit(PROBABILITY_SLACK);
    let mut cells = Vec::with_capacity(n);
    for row in probs {
        for &p in row {
            if !(p >= -slack && p <= T::one() + slack) {
                return Err(Error::ProbabilityOutOfRange(p.as_f64()));
            }
        }
        if row.windows(2).any(|w| w[0] > w[1] + slack) {
            return Err(Error::NonMonotoneThresholds);
        }
        cells.push(cell_probabilities(row));
    }
    accumulate(n, k, &cells)
}

// P{component falls strictly between consecutive thresholds}, k + 1 cells.
fn cell_probabilities<T: Scalar>(row: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(row.len() + 1);
    let mut prev = T::zero();
    for &p in row {
        let p = p.clamp01().max(prev);
        out.push(p - prev);
        prev = p;
    }
    out.push(T::one() - prev);
    out
}

fn accumulate<T: Scalar>(n: usize, k: usize, cells: &[Vec<T>]) -> Result<CountDistribution<T>> {
    let radix = n + 1;
    let size = radix
        .checked_pow(k as u32)
        .filter(|&s| s <= MAX_STATES)
        .ok_or(Error::TooLarge {
            what: "count state space",
            order: k,
            max: MAX_STATES,
        })?;
    // a component in cell m raises c_{m+1}..c_k
    let mut offsets = vec![0usize; k + 1];
    let mut place = 1usize;
    let mut suffix = vec![0usize; k + 1];
    for slot in suffix.iter_mut().take(k) {
        *slot = place;
        place *= radix;
    }
    for m in (0..k).rev() {
        offsets[m] = offsets[m + 1] + suffix[m];
    }
    let mut probs = vec![T::zero(); size];
    probs[0] = T::one();
    let mut next = vec![T::zero(); size];
    // largest index reachable so far, to skip the untouched tail
    let mut reach = 0usize;
    for cell in cells {
        next[..=(reach + offsets[0]).min(size - 1)]
            .iter_mut()
            .for_each(|x| *x = T::zero());
        for idx in 0..=reach {
            let p = probs[idx];
            if p == T::zero() {
                continue;
            }
            for (m, &q) in cell.iter().enumerate() {
                if q != T::zero() {
                    next[idx + offsets[m]] += p * q;
                }
            }
        }
        reach = (reach + offsets[0]).min(size - 1);
        std::mem::swap(&mut probs, &mut next);
    }
    Ok(CountDistribution { n, k, probs })
}

// Per-component conditional probabilities at thresholds `xs` for latent
// coordinate `w`.
fn conditional_rows<T: Scalar>(model: &CiModel<T>, xs: &[T], w: T) -> Vec<Vec<T>> {
    model
        .components()
        .iter()
        .map(|c| {
            let mut prev = T::zero();
            xs.iter()
                .map(|&x| {
                    prev = c.conditional_cdf_at(x, w).clamp01().max(prev);
                    prev
                })
                .collect()
        })
        .collect()
}

fn check_rank(n: usize, r: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(Error::InvalidRanks(format!("rank {r} outside 1..={n}")));
    }
    Ok(())
}

/// `P{X_{r:n} <= x}`.
pub fn single_cdf<T: Scalar>(model: &CiModel<T>, r: usize, x: T) -> Result<T> {
    check_rank(model.n(), r)?;
    let query = OrderStatQuery::new(vec![r], vec![x])?;
    k_joint_cdf(model, &query)
}

/// `(P{X_{1:n} <= x}, P{X_{n:n} <= x})` from the direct products.
pub fn extreme_cdfs<T: Scalar>(model: &CiModel<T>, x: T) -> Result<(T, T)> {
    let quad = model.quadrature();
    let max = quad.integrate(|w| {
        model
            .components()
            .iter()
            .fold(T::one(), |acc, c| acc * c.conditional_cdf_at(x, w))
    })?;
    let none_below = quad.integrate(|w| {
        model.components().iter().fold(T::one(), |acc, c| {
            acc * (T::one() - c.conditional_cdf_at(x, w))
        })
    })?;
    Ok((T::one() - none_below, max))
}

/// `P{X_{r:n} <= x, X_{s:n} <= y}` for `r < s`, `x <= y`.
pub fn pair_cdf<T: Scalar>(model: &CiModel<T>, r: usize, s: usize, x: T, y: T) -> Result<T> {
    let query = pair_query(model.n(), r, s, x, y)?;
    k_joint_cdf(model, &query)
}

fn pair_query<T: Scalar>(n: usize, r: usize, s: usize, x: T, y: T) -> Result<OrderStatQuery<T>> {
    check_rank(n, r)?;
    check_rank(n, s)?;
    if r >= s {
        return Err(Error::InvalidRanks(format!("need r < s, got r={r}, s={s}")));
    }
    if !(x <= y) {
        return Err(Error::InvalidThresholds);
    }
    OrderStatQuery::new(vec![r, s], vec![x, y])
}

/// `P{X_{r_1:n} <= x_1, ..., X_{r_k:n} <= x_k}`.
pub fn k_joint_cdf<T: Scalar>(model: &CiModel<T>, query: &OrderStatQuery<T>) -> Result<T> {
    query.check_against(model.n())?;
    let ranks = query.ranks();
    model.quadrature().try_integrate(|w| {
        let rows = conditional_rows(model, query.thresholds(), w);
        Ok(count_dp(&rows)?.at_least(ranks))
    })
}

/// [`single_cdf`] through permanents: for each count `i >= r`, the matrix
/// with `i` rows of conditional cdfs and `n - i` rows of their complements,
/// weighted by `1/(i!(n-i)!)`.
pub fn single_cdf_permanent<T: Scalar>(model: &CiModel<T>, r: usize, x: T) -> Result<T> {
    check_rank(model.n(), r)?;
    k_joint_cdf_permanent(model, &OrderStatQuery::new(vec![r], vec![x])?)
}

/// [`pair_cdf`] through permanents. Row blocks: `i` rows of `h(x)`, `j`
/// rows of `h(y) - h(x)`, `n - i - j` rows of `1 - h(y)`, weight
/// `1/(i! j! (n-i-j)!)`, summed over `i >= r`, `i + j >= s`.
pub fn pair_cdf_permanent<T: Scalar>(
    model: &CiModel<T>,
    r: usize,
    s: usize,
    x: T,
    y: T,
) -> Result<T> {
    let query = pair_query(model.n(), r, s, x, y)?;
    k_joint_cdf_permanent(model, &query)
}

/// [`k_joint_cdf`] through permanents of block matrices: block `m` repeats
/// the row of cell probabilities between thresholds `m` and `m + 1`
/// `j_m` times, over all compositions `j_1 + ... + j_{k+1} = n` whose
/// prefix sums reach the ranks.
pub fn k_joint_cdf_permanent<T: Scalar>(
    model: &CiModel<T>,
    query: &OrderStatQuery<T>,
) -> Result<T> {
    let n = model.n();
    if n > MAX_PERMANENT_COMPONENTS {
        return Err(Error::TooLarge {
            what: "permanent route",
            order: n,
            max: MAX_PERMANENT_COMPONENTS,
        });
    }
    query.check_against(n)?;
    let k = query.ranks().len();
    let compositions = admissible_compositions(n, query.ranks());
    let mut factorial = vec![T::one(); n + 1];
    for i in 1..=n {
        factorial[i] = factorial[i - 1] * T::from_usize_lossy(i);
    }
    model.quadrature().try_integrate(|w| {
        let rows = conditional_rows(model, query.thresholds(), w);
        // cells[m][i]: component i between thresholds m and m + 1
        let per_component: Vec<Vec<T>> = rows.iter().map(|r| cell_probabilities(r)).collect();
        let cells: Vec<Vec<T>> = (0..=k)
            .map(|m| per_component.iter().map(|c| c[m]).collect())
            .collect();
        let mut total = T::zero();
        for comp in &compositions {
            let mut entries = Vec::with_capacity(n * n);
            for (m, &reps) in comp.iter().enumerate() {
                for _ in 0..reps {
                    entries.extend_from_slice(&cells[m]);
                }
            }
            let per = SquareMatrix::new(n, entries)?.permanent()?;
            let weight = comp.iter().fold(T::one(), |acc, &j| acc * factorial[j]);
            total += per / weight;
        }
        Ok(total)
    })
}

fn admissible_compositions(n: usize, ranks: &[usize]) -> Vec<Vec<usize>> {
    fn walk(
        n: usize,
        ranks: &[usize],
        prefix: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let m = current.len();
        if m == ranks.len() {
            current.push(n - prefix);
            out.push(current.clone());
            current.pop();
            return;
        }
        let need = ranks[m].saturating_sub(prefix);
        for j in need..=(n - prefix) {
            current.push(j);
            walk(n, ranks, prefix + j, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    walk(n, ranks, 0, &mut Vec::new(), &mut out);
    out
}

/// Mean residual life `E{X_{k:n} - t | X_{r:n} > t}` for `r < k`.
///
/// The numerator `int_t^inf P{X_{k:n} > u, X_{r:n} > t} du` is taken in
/// the probability coordinate `q = F(u)` of the component with the widest
/// support, so unbounded supports integrate over a finite interval.
pub fn mrl<T: Scalar>(model: &CiModel<T>, k: usize, r: usize, t: T) -> Result<T> {
    let n = model.n();
    check_rank(n, r)?;
    check_rank(n, k)?;
    if r >= k {
        return Err(Error::InvalidRanks(format!("need r < k, got r={r}, k={k}")));
    }
    if t.is_nan() {
        return Err(Error::InvalidThresholds);
    }
    let survival_r = T::one() - single_cdf(model, r, t)?;
    if survival_r < T::lit(MIN_CONDITIONING_PROBABILITY) {
        return Err(Error::DegenerateConditioning(survival_r.as_f64()));
    }
    let quad = model.quadrature();
    let reference = widest_support(model);
    let lowest = model
        .components()
        .iter()
        .map(|c| c.marginal.support().0)
        .fold(T::infinity(), T::min);
    // below every support, X_{k:n} > u holds surely
    let mut numerator = if t < lowest {
        (lowest - t) * survival_r
    } else {
        T::zero()
    };
    let start = t.max(lowest);
    let q0 = reference.cdf(start);
    let joint_survival = |u: T| -> Result<T> {
        quad.try_integrate(|w| {
            let rows = conditional_rows(model, &[start, u], w);
            Ok(count_dp(&rows)?.probability(|c| c[0] < r && c[1] < k))
        })
    };
    numerator += quad.try_integrate(|s| {
        let q = q0 + (T::one() - q0) * s;
        let u = reference.quantile(q);
        let density = reference.pdf(u);
        if !(density > T::zero()) || !u.is_finite() {
            return Ok(T::zero());
        }
        Ok(joint_survival(u)? / density)
    })? * (T::one() - q0);
    Ok((numerator / survival_r).max(T::zero()))
}

fn widest_support<T: Scalar>(model: &CiModel<T>) -> crate::marginals::Marginal<T> {
    use crate::marginals::Marginal;
    let mut best = model.components()[0].marginal;
    for c in model.components() {
        let m = c.marginal;
        let wider = match (best, m) {
            (Marginal::Exponential { rate: a }, Marginal::Exponential { rate: b }) => b < a,
            (Marginal::Exponential { .. }, _) => false,
            (_, Marginal::Exponential { .. }) => true,
            _ => m.support().1 > best.support().1,
        };
        if wider {
            best = m;
        }
    }
    best
}
