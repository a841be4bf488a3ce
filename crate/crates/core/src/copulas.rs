//! Bivariate copula families `C(u, w)` coupling a component with the latent
//! variable, their h-functions `h(u, w) = dC(u, w)/dw` and h-inverses.
//!
//! `h(., w)` is the conditional cdf of `U` given `W = w`, so it is a cdf in
//! `u` for every fixed `w`; sampling inverts it.

use crate::error::{Error, Result};
use crate::numerics::{find_root, Integrator, RootBracket, DEFAULT_QUADRATURE_ORDER};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BivariateCopula<T> {
    Independence,
    /// Farlie-Gumbel-Morgenstern, `uw(1 + alpha(1 - u)(1 - w))`, `|alpha| <= 1`.
    Fgm {
        alpha: T,
    },
    /// Clayton, `(u^-theta + w^-theta - 1)^(-1/theta)`, `theta > 0`.
    Clayton {
        theta: T,
    },
}

impl<T: Scalar> BivariateCopula<T> {
    pub fn independence() -> Self {
        Self::Independence
    }

    pub fn fgm(alpha: T) -> Result<Self> {
        if !(alpha.abs() <= T::one()) {
            return Err(Error::InvalidParameter {
                family: "fgm",
                message: format!("alpha must lie in [-1, 1], got {alpha}"),
            });
        }
        Ok(Self::Fgm { alpha })
    }

    /// FGM without the parameter check. Only useful for exercising
    /// [`validate`](Self::validate) on invalid parameters.
    pub fn fgm_unchecked(alpha: T) -> Self {
        Self::Fgm { alpha }
    }

    pub fn clayton(theta: T) -> Result<Self> {
        if !(theta > T::zero()) || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                family: "clayton",
                message: format!("theta must be positive, got {theta}"),
            });
        }
        Ok(Self::Clayton { theta })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Independence => "independence",
            Self::Fgm { .. } => "fgm",
            Self::Clayton { .. } => "clayton",
        }
    }

    /// Copula value `C(u, w)`.
    pub fn cdf(&self, u: T, w: T) -> T {
        let (u, w) = (u.clamp01(), w.clamp01());
        let one = T::one();
        match *self {
            Self::Independence => u * w,
            Self::Fgm { alpha } => u * w * (one + alpha * (one - u) * (one - w)),
            Self::Clayton { theta } => {
                if u == T::zero() || w == T::zero() {
                    return T::zero();
                }
                let s = u.powf(-theta) + w.powf(-theta) - one;
                s.powf(-one / theta).min(u.min(w))
            }
        }
    }

    /// h-function `dC(u, w)/dw`, the conditional cdf of `U` at `u` given
    /// `W = w`.
    pub fn h(&self, u: T, w: T) -> T {
        let (u, w) = (u.clamp01(), w.clamp01());
        let one = T::one();
        let two = T::lit(2.0);
        match *self {
            Self::Independence => u,
            Self::Fgm { alpha } => u + alpha * u * (one - u) * (one - two * w),
            Self::Clayton { theta } => {
                if u == T::zero() {
                    return T::zero();
                }
                if u == one {
                    return one;
                }
                // (1 + w^theta (u^-theta - 1))^(-(1 + theta)/theta); w = 0 gives
                // the limit 1 (lower tail dependence)
                let base = one + w.powf(theta) * (u.powf(-theta) - one);
                base.powf(-(one + theta) / theta).clamp01()
            }
        }
    }

    /// Copula density `d^2 C / du dw`, equivalently `dh/du`.
    pub fn density(&self, u: T, w: T) -> T {
        let (u, w) = (u.clamp01(), w.clamp01());
        let one = T::one();
        let two = T::lit(2.0);
        match *self {
            Self::Independence => one,
            Self::Fgm { alpha } => one + alpha * (one - two * u) * (one - two * w),
            Self::Clayton { theta } => {
                if u == T::zero() || w == T::zero() {
                    // density is unbounded along the axes near the origin
                    return T::zero();
                }
                let s = u.powf(-theta) + w.powf(-theta) - one;
                (one + theta) * (u * w).powf(-theta - one) * s.powf(-one / theta - two)
            }
        }
    }

    /// The `u` with `h(u, w) = v`.
    pub fn h_inverse(&self, v: T, w: T) -> Result<T> {
        if !(v >= T::zero() && v <= T::one()) || !(w >= T::zero() && w <= T::one()) {
            return Err(Error::ProbabilityOutOfRange(
                if v.is_finite() && (v < T::zero() || v > T::one()) {
                    v.as_f64()
                } else {
                    w.as_f64()
                },
            ));
        }
        if v == T::zero() {
            return Ok(T::zero());
        }
        if v == T::one() {
            return Ok(T::one());
        }
        let one = T::one();
        let two = T::lit(2.0);
        let closed = match *self {
            Self::Independence => v,
            Self::Fgm { alpha } => {
                // a u^2 - (1 + a) u + v = 0 with a = alpha (1 - 2w); the
                // rationalised root avoids dividing by a
                let a = alpha * (one - two * w);
                let b = one + a;
                let disc = b * b - T::lit(4.0) * a * v;
                if disc < T::zero() {
                    return self.h_inverse_numeric(v, w);
                }
                two * v / (b + disc.sqrt())
            }
            Self::Clayton { theta } => {
                if w == T::zero() {
                    return Ok(T::zero());
                }
                let t = v.powf(-theta / (one + theta)) - one;
                (one + t * w.powf(-theta)).powf(-one / theta)
            }
        };
        if closed.is_finite() && closed >= T::zero() && closed <= one {
            Ok(closed)
        } else {
            self.h_inverse_numeric(v, w)
        }
    }

    /// h-inverse by root finding on `[0, 1]`; fails when `h(., w)` is not
    /// a cdf, which signals invalid parameters.
    pub fn h_inverse_numeric(&self, v: T, w: T) -> Result<T> {
        let bracket = RootBracket::unit();
        find_root(|u| self.h(u, w) - v, &bracket)
            .map_err(|e| Error::InvalidCopula(format!("h-inverse of {}: {e}", self.family_name())))
    }

    /// Checks the copula axioms and h-function properties on a uniform
    /// `grid_size x grid_size` grid.
    pub fn validate(&self, grid_size: usize) -> Result<CopulaValidation<T>> {
        if grid_size < 3 {
            return Err(Error::InvalidArgument(format!(
                "validation grid needs at least 3 points, got {grid_size}"
            )));
        }
        let quad = match self {
            Self::Clayton { .. } => Integrator::<T>::adaptive()?,
            _ => Integrator::fixed(DEFAULT_QUADRATURE_ORDER)?,
        };
        let last = T::from_usize_lossy(grid_size - 1);
        let grid: Vec<T> = (0..grid_size)
            .map(|k| T::from_usize_lossy(k) / last)
            .collect();
        let zero = T::zero();
        let one = T::one();
        let mut report = CopulaValidation::default();
        let bump = |slot: &mut T, v: T| {
            if v > *slot || v.is_nan() {
                *slot = if v.is_nan() { T::infinity() } else { v };
            }
        };
        for &t in &grid {
            bump(&mut report.groundedness, self.cdf(t, zero).abs());
            bump(&mut report.groundedness, self.cdf(zero, t).abs());
            bump(&mut report.uniform_margins, (self.cdf(t, one) - t).abs());
            bump(&mut report.uniform_margins, (self.cdf(one, t) - t).abs());
            bump(&mut report.h_boundary, self.h(zero, t).abs());
            bump(&mut report.h_boundary, (self.h(one, t) - one).abs());
        }
        for (a, &u0) in grid.iter().enumerate().take(grid_size - 1) {
            let u1 = grid[a + 1];
            for (b, &w0) in grid.iter().enumerate().take(grid_size - 1) {
                let w1 = grid[b + 1];
                let volume =
                    self.cdf(u1, w1) - self.cdf(u0, w1) - self.cdf(u1, w0) + self.cdf(u0, w0);
                bump(&mut report.two_increasing, -volume);
            }
        }
        for &w in &grid {
            let mut prev = zero;
            for &u in &grid {
                let hv = self.h(u, w);
                bump(&mut report.h_range, -hv);
                bump(&mut report.h_range, hv - one);
                bump(&mut report.h_monotone, prev - hv);
                prev = hv;
            }
        }
        for &u in &grid {
            let recovered = quad.integrate(|w| self.h(u, w))?;
            bump(&mut report.margin_recovery, (recovered - u).abs());
        }
        Ok(report)
    }
}

/// Largest violation of each copula property found on a grid; zero means
/// the property held exactly at every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CopulaValidation<T> {
    /// `C(u, 0) = C(0, w) = 0`.
    pub groundedness: T,
    /// `C(u, 1) = u`, `C(1, w) = w`.
    pub uniform_margins: T,
    /// Negative rectangle volume.
    pub two_increasing: T,
    /// Distance of `h` outside `[0, 1]`.
    pub h_range: T,
    /// `h(0, w) = 0`, `h(1, w) = 1`.
    pub h_boundary: T,
    /// Decrease of `h` in `u`.
    pub h_monotone: T,
    /// `|int_0^1 h(u, w) dw - u|`.
    pub margin_recovery: T,
}

impl<T: Scalar> CopulaValidation<T> {
    pub fn max_violation(&self) -> T {
        [
            self.groundedness,
            self.uniform_margins,
            self.two_increasing,
            self.h_range,
            self.h_boundary,
            self.h_monotone,
            self.margin_recovery,
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }

    pub fn passes(&self, tol: T) -> bool {
        self.max_violation() <= tol
    }
}
