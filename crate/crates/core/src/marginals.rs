//! Absolutely continuous univariate marginals.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal<T> {
    Uniform01,
    /// `F(x) = x^k` on `[0, 1]`.
    Power {
        k: T,
    },
    /// `F(x) = 1 - exp(-rate x)` on `[0, inf)`.
    Exponential {
        rate: T,
    },
}

impl<T: Scalar> Marginal<T> {
    pub fn uniform() -> Self {
        Self::Uniform01
    }

    pub fn power(k: T) -> Result<Self> {
        if !(k > T::zero()) || !k.is_finite() {
            return Err(Error::InvalidParameter {
                family: "power",
                message: format!("k must be positive, got {k}"),
            });
        }
        Ok(Self::Power { k })
    }

    pub fn exponential(rate: T) -> Result<Self> {
        if !(rate > T::zero()) || !rate.is_finite() {
            return Err(Error::InvalidParameter {
                family: "exponential",
                message: format!("rate must be positive, got {rate}"),
            });
        }
        Ok(Self::Exponential { rate })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Uniform01 => "uniform01",
            Self::Power { .. } => "power",
            Self::Exponential { .. } => "exponential",
        }
    }

    /// `(lower, upper)`; `upper` is infinite for unbounded support.
    pub fn support(&self) -> (T, T) {
        match self {
            Self::Uniform01 | Self::Power { .. } => (T::zero(), T::one()),
            Self::Exponential { .. } => (T::zero(), T::infinity()),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        if x.is_nan() {
            return x;
        }
        let zero = T::zero();
        let one = T::one();
        match *self {
            Self::Uniform01 => x.clamp01(),
            Self::Power { k } => {
                if x <= zero {
                    zero
                } else if x >= one {
                    one
                } else {
                    x.powf(k)
                }
            }
            Self::Exponential { rate } => {
                if x <= zero {
                    zero
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    pub fn pdf(&self, x: T) -> T {
        let zero = T::zero();
        let one = T::one();
        match *self {
            Self::Uniform01 => {
                if (zero..=one).contains(&x) {
                    one
                } else {
                    zero
                }
            }
            Self::Power { k } => {
                if x < zero || x > one {
                    zero
                } else if x == zero {
                    // k x^(k-1) at the origin
                    if k > one {
                        zero
                    } else if k == one {
                        one
                    } else {
                        T::infinity()
                    }
                } else {
                    k * x.powf(k - one)
                }
            }
            Self::Exponential { rate } => {
                if x < zero {
                    zero
                } else {
                    rate * (-rate * x).exp()
                }
            }
        }
    }

    /// `inf { x : F(x) >= p }`, with `p` clamped into `[0, 1]`.
    pub fn quantile(&self, p: T) -> T {
        let p = p.clamp01();
        match *self {
            Self::Uniform01 => p,
            Self::Power { k } => p.powf(T::one() / k),
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }
}
