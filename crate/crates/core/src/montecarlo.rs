//! Seeded conditional sampling of `(X1..Xn, Z)` and empirical estimators.
//!
//! A row draws `W` uniform, then `Ui = h_i^-1(Vi, W)` from fresh uniforms
//! `Vi`, so the components are independent given `W` by construction.
//! Each row owns a ChaCha stream keyed by `(seed, row)`, which makes the
//! batch independent of how rows are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::CiModel;
use crate::scalar::Scalar;

pub const KS_GRID_POINTS: usize = 201;
pub const KS_CRITICAL_COEFFICIENT: f64 = 1.63;
pub const KS_MIN_COUNT: usize = 1000;

/// `count` rows of `(X1..Xn, Z)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<T> {
    seed: u64,
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SampleBatch<T> {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of `X` columns; the batch has `n + 1` columns.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> usize {
        self.n + 1
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.columns()
    }

    pub fn row(&self, i: usize) -> &[T] {
        let w = self.columns();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.columns())
    }

    /// Column `j`; `j == n` is `Z`.
    pub fn column(&self, j: usize) -> Result<Vec<T>> {
        if j > self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.columns(),
            });
        }
        Ok(self.rows().map(|r| r[j]).collect())
    }

    /// Fraction of rows with column `j` at most `x`.
    pub fn empirical_cdf(&self, j: usize, x: T) -> Result<T> {
        if j > self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.columns(),
            });
        }
        Ok(self.fraction(|r| r[j] <= x))
    }

    /// Fraction of rows whose `r`-th smallest `X` is at most `x`.
    pub fn empirical_order_stat_cdf(&self, r: usize, x: T) -> Result<T> {
        self.check_rank(r)?;
        Ok(self.fraction(|row| row[..row.len() - 1].iter().filter(|&&v| v <= x).count() >= r))
    }

    /// Fraction of rows satisfying `event`.
    pub fn fraction(&self, event: impl Fn(&[T]) -> bool + Sync) -> T {
        if self.count() == 0 {
            return T::zero();
        }
        let hits = self
            .data
            .par_chunks_exact(self.columns())
            .filter(|r| event(r))
            .count();
        T::from_usize_lossy(hits) / T::from_usize_lossy(self.count())
    }

    /// Sorted `X` values of one row.
    pub fn order_statistics(&self, i: usize) -> Vec<T> {
        let mut xs = self.row(i)[..self.n].to_vec();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        xs
    }

    /// Empirical `E{X_{k:n} - t | X_{r:n} > t}` and the number of rows
    /// that met the condition.
    pub fn empirical_mrl(&self, k: usize, r: usize, t: T) -> Result<(T, usize)> {
        self.check_rank(r)?;
        self.check_rank(k)?;
        let (sum, hits) = (0..self.count())
            .into_par_iter()
            .map(|i| {
                let xs = self.order_statistics(i);
                if xs[r - 1] > t {
                    ((xs[k - 1] - t).as_f64(), 1usize)
                } else {
                    (0.0, 0)
                }
            })
            .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        if hits == 0 {
            return Err(Error::DegenerateConditioning(0.0));
        }
        Ok((T::lit(sum / hits as f64), hits))
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.n {
            return Err(Error::InvalidRanks(format!(
                "rank {r} outside 1..={}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Draws `count` rows from `model`.
pub fn sample<T: Scalar>(model: &CiModel<T>, count: usize, seed: u64) -> Result<SampleBatch<T>> {
    if count == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let n = model.n();
    let width = n + 1;
    let mut data = vec![T::zero(); count * width];
    data.par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(row, out)| draw_row(model, seed, row as u64, out))?;
    Ok(SampleBatch { seed, n, data })
}

fn draw_row<T: Scalar>(model: &CiModel<T>, seed: u64, row: u64, out: &mut [T]) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row);
    let w = T::lit(open_unit(&mut rng));
    for (slot, c) in out.iter_mut().zip(model.components()) {
        let v = T::lit(open_unit(&mut rng));
        let u = c.copula.h_inverse(v, w)?;
        *slot = c.marginal.quantile(u);
    }
    out[model.n()] = model.z_marginal().quantile(w);
    Ok(())
}

// uniform on (0, 1): 53 random bits offset by half an ulp
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.gen::<u64>() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Kolmogorov-Smirnov distance between a sample and a cdf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsReport<T> {
    pub statistic: T,
    pub critical: T,
    pub passed: bool,
}

/// Sup-distance between the empirical cdf of `values` and `cdf` on a
/// 201-point grid spanning the sample; passes iff it is at most
/// `1.63 / sqrt(count)` (asymptotic level 0.01).
pub fn ks_check<T, F>(values: &[T], cdf: F) -> Result<KsReport<T>>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let count = values.len();
    if count < KS_MIN_COUNT {
        return Err(Error::InvalidArgument(format!(
            "KS check needs at least {KS_MIN_COUNT} samples, got {count}"
        )));
    }
    let mut sorted = values.to_vec();
    if sorted.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("KS sample"));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let lo = sorted[0];
    let hi = sorted[count - 1];
    let total = T::from_usize_lossy(count);
    let last = T::from_usize_lossy(KS_GRID_POINTS - 1);
    let mut statistic = T::zero();
    for g in 0..KS_GRID_POINTS {
        let x = lo + (hi - lo) * T::from_usize_lossy(g) / last;
        let below = sorted.partition_point(|&v| v <= x);
        let d = (T::from_usize_lossy(below) / total - cdf(x)).abs();
        statistic = statistic.max(d);
    }
    let critical = T::lit(KS_CRITICAL_COEFFICIENT) / total.sqrt();
    Ok(KsReport {
        statistic,
        critical,
        passed: statistic <= critical,
    })
}

/// Runs a seeded statistical check, retrying once with `seed + 1` on
/// failure.
pub fn passes_with_rerun(seed: u64, mut check: impl FnMut(u64) -> Result<bool>) -> Result<bool> {
    if check(seed)? {
        return Ok(true);
    }
    check(seed.wrapping_add(1))
}
