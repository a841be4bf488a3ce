//! Permanents of small real matrices.

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

pub const MAX_RYSER_ORDER: usize = 20;
pub const MAX_NAIVE_ORDER: usize = 8;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    order: usize,
    entries: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn new(order: usize, entries: Vec<T>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidMatrix("order must be at least 1".into()));
        }
        if entries.len() != order * order {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for order {order}",
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        Ok(Self { order, entries })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::InvalidMatrix("rows must have equal length".into()));
        }
        Self::new(order, rows.concat())
    }

    pub fn identity(order: usize) -> Result<Self> {
        let mut entries = vec![T::zero(); order * order];
        for i in 0..order {
            entries[i * order + i] = T::one();
        }
        Self::new(order, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    /// Permanent by Ryser's inclusion-exclusion, visiting column subsets in
    /// Gray-code order so each step adds or removes a single column from the
    /// running row sums. `O(2^n n)`.
    pub fn permanent(&self) -> Result<T> {
        let n = self.order;
        if n > MAX_RYSER_ORDER {
            return Err(Error::TooLarge {
                what: "Ryser permanent",
                order: n,
                max: MAX_RYSER_ORDER,
            });
        }
        let mut row_sums = vec![T::zero(); n];
        let mut acc = CompensatedSum::new();
        let mut gray = 0usize;
        for k in 1usize..(1 << n) {
            let col = k.trailing_zeros() as usize;
            gray ^= 1 << col;
            let added = gray & (1 << col) != 0;
            for (i, s) in row_sums.iter_mut().enumerate() {
                let a = self.get(i, col);
                if added {
                    *s += a;
                } else {
                    *s -= a;
                }
            }
            let prod = row_sums.iter().fold(T::one(), |p, &s| p * s);
            // (-1)^(n - |S|)
            if (n - gray.count_ones() as usize).is_multiple_of(2) {
                acc.add(prod);
            } else {
                acc.add(-prod);
            }
        }
        Ok(acc.value())
    }

    /// Permanent by summing over all `n!` permutations (Heap's algorithm).
    pub fn permanent_naive(&self) -> Result<T> {
        let n = self.order;
        if n > MAX_NAIVE_ORDER {
            return Err(Error::TooLarge {
                what: "naive permanent",
                order: n,
                max: MAX_NAIVE_ORDER,
            });
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut acc = CompensatedSum::new();
        let term = |p: &[usize]| {
            p.iter()
                .enumerate()
                .fold(T::one(), |prod, (row, &col)| prod * self.get(row, col))
        };
        acc.add(term(&perm));
        let mut c = vec![0usize; n];
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                acc.add(term(&perm));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        Ok(acc.value())
    }
}

pub fn permanent<T: Scalar>(a: &SquareMatrix<T>) -> Result<T> {
    a.permanent()
}

pub fn permanent_naive<T: Scalar>(a: &SquareMatrix<T>) -> Result<T> {
    a.permanent_naive()
}
