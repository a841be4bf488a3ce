//! The conditionally independent model `(X1..Xn, Z)`.
//!
//! All computation happens in copula space: with `u_i = F_i(x_i)` and
//! `w = F_Z(z)` the joint copula of the components is
//! `int_0^1 prod_i h_i(u_i, w) dw`, which never divides by the density
//! of `Z`.

use std::fmt;

use crate::copulas::BivariateCopula;
use crate::error::{Error, Result};
use crate::marginals::Marginal;
use crate::numerics::{
    unit_interval_diff, Integrator, DEFAULT_DIFF_STEP, DEFAULT_QUADRATURE_ORDER,
};
use crate::scalar::Scalar;

const CONSTRUCTION_GRID: usize = 11;
const CONSTRUCTION_TOLERANCE: f64 = 1e-9;
const CANDIDATE_TOLERANCE: f64 = 1e-8;
pub const CI_TOLERANCE: f64 = 1e-4;

/// One component: the copula coupling `Xi` with `Z`, and the marginal of
/// `Xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component<T> {
    pub copula: BivariateCopula<T>,
    pub marginal: Marginal<T>,
}

impl<T: Scalar> Component<T> {
    pub fn new(copula: BivariateCopula<T>, marginal: Marginal<T>) -> Self {
        Self { copula, marginal }
    }

    /// `P{Xi <= x | Z = F_Z^-1(w)}`.
    #[inline]
    pub fn conditional_cdf_at(&self, x: T, w: T) -> T {
        self.copula.h(self.marginal.cdf(x), w)
    }
}

// Polynomial h-functions integrate exactly under a fixed rule; Clayton's
// w^theta term and its steep transition near w = u need bisection.
fn integrator_for<T: Scalar>(components: &[Component<T>], order: usize) -> Result<Integrator<T>> {
    let fixed = Integrator::fixed(order)?;
    if components
        .iter()
        .any(|c| matches!(c.copula, BivariateCopula::Clayton { .. }))
    {
        Integrator::adaptive()
    } else {
        Ok(fixed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiModel<T> {
    components: Vec<Component<T>>,
    z_marginal: Marginal<T>,
    quad: Integrator<T>,
}

impl<T: Scalar> CiModel<T> {
    /// Builds a model with the default 64-point rule. Every copula is
    /// validated on a small grid.
    pub fn new(components: Vec<Component<T>>, z_marginal: Marginal<T>) -> Result<Self> {
        Self::with_quadrature_order(components, z_marginal, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn with_quadrature_order(
        components: Vec<Component<T>>,
        z_marginal: Marginal<T>,
        order: usize,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyModel);
        }
        let tol = T::lit(CONSTRUCTION_TOLERANCE).max(T::epsilon() * T::lit(1e3));
        for (i, c) in components.iter().enumerate() {
            let report = c.copula.validate(CONSTRUCTION_GRID)?;
            if !report.passes(tol) {
                return Err(Error::InvalidCopula(format!(
                    "component {} ({}) violates copula properties by {}",
                    i + 1,
                    c.copula.family_name(),
                    report.max_violation()
                )));
            }
        }
        Ok(Self {
            quad: integrator_for(&components, order)?,
            components,
            z_marginal,
        })
    }

    /// `n` identical components.
    pub fn iid(component: Component<T>, n: usize, z_marginal: Marginal<T>) -> Result<Self> {
        Self::new(vec![component; n], z_marginal)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> Result<&Component<T>> {
        self.components.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.n(),
        })
    }

    pub fn z_marginal(&self) -> &Marginal<T> {
        &self.z_marginal
    }

    pub fn quadrature(&self) -> &Integrator<T> {
        &self.quad
    }

    /// Same model with a different quadrature order. Models that integrate
    /// adaptively keep doing so.
    pub fn reorder_quadrature(&self, order: usize) -> Result<Self> {
        Ok(Self {
            components: self.components.clone(),
            z_marginal: self.z_marginal,
            quad: integrator_for(&self.components, order)?,
        })
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got,
            });
        }
        Ok(())
    }

    fn check_probabilities(&self, u: &[T]) -> Result<()> {
        self.check_len(u.len())?;
        match u.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
            Some(p) => Err(Error::ProbabilityOutOfRange(p.as_f64())),
            None => Ok(()),
        }
    }

    #[inline]
    fn h_product(&self, u: &[T], w: T) -> T {
        self.components
            .iter()
            .zip(u)
            .fold(T::one(), |acc, (c, &ui)| acc * c.copula.h(ui, w))
    }

    /// Joint copula of `X1..Xn`: `int_0^1 prod_i h_i(u_i, w) dw`.
    pub fn joint_copula(&self, u: &[T]) -> Result<T> {
        self.check_probabilities(u)?;
        self.quad.integrate(|w| self.h_product(u, w))
    }

    /// The full `(n+1)`-copula `C(u1..un, w) = int_0^w prod_i h_i(u_i, s) ds`.
    pub fn joint_copula_with_z(&self, u: &[T], w: T) -> Result<T> {
        self.check_probabilities(u)?;
        if !(w >= T::zero() && w <= T::one()) {
            return Err(Error::ProbabilityOutOfRange(w.as_f64()));
        }
        self.quad
            .integrate_on(T::zero(), w, |s| self.h_product(u, s))
    }

    /// Joint cdf `F(x1..xn)`, the joint copula at `u_i = F_i(x_i)`.
    pub fn joint_cdf(&self, x: &[T]) -> Result<T> {
        self.check_len(x.len())?;
        let u: Vec<T> = self
            .components
            .iter()
            .zip(x)
            .map(|(c, &xi)| c.marginal.cdf(xi))
            .collect();
        self.joint_copula(&u)
    }

    /// Cdf of `Xi` given `Z = z`, i.e. `h_i(F_i(x), F_Z(z))`. `i` is zero-based.
    pub fn conditional_cdf(&self, i: usize, x: T, z: T) -> Result<T> {
        let c = self.component(i)?;
        Ok(c.conditional_cdf_at(x, self.z_marginal.cdf(z)))
    }

    /// Checks a candidate `(n+1)`-copula against the conditional
    /// independence identity `dC/dw = prod_i h_i(u_i, w)` on a uniform grid
    /// with `grid_size` points per axis.
    pub fn verify_ci(
        &self,
        candidate: &CandidateCopula<T>,
        grid_size: usize,
    ) -> Result<CiReport<T>> {
        if candidate.dim() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: candidate.dim(),
            });
        }
        if grid_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "CI grid needs at least 2 points, got {grid_size}"
            )));
        }
        let candidate_violation = candidate.axiom_violation(grid_size);
        let grid = unit_grid::<T>(grid_size);
        let step = T::lit(DEFAULT_DIFF_STEP);
        let mut residual = T::zero();
        let mut worst = vec![T::zero(); self.n() + 1];
        let mut point = vec![T::zero(); self.n()];
        for_each_grid_point(&grid, self.n(), &mut point, &mut |u| {
            for &w in &grid {
                let slope = unit_interval_diff(|s| candidate.eval(u, s), w, step)?;
                let r = (slope - self.h_product(u, w)).abs();
                if r > residual || r.is_nan() {
                    residual = if r.is_nan() { T::infinity() } else { r };
                    worst[..u.len()].copy_from_slice(u);
                    worst[u.len()] = w;
                }
            }
            Ok(())
        })?;
        let tolerance = T::lit(CI_TOLERANCE);
        let candidate_valid = candidate_violation <= T::lit(CANDIDATE_TOLERANCE);
        Ok(CiReport {
            residual,
            worst_point: worst,
            candidate_violation,
            tolerance,
            passed: candidate_valid && residual <= tolerance,
        })
    }

    /// `P{a_i < Xi <= b_i for all i}` by conditioning on `Z`.
    pub fn rectangle_probability(&self, boxes: &[(T, T)]) -> Result<T> {
        self.check_len(boxes.len())?;
        let mut bounds = Vec::with_capacity(boxes.len());
        for (c, &(a, b)) in self.components.iter().zip(boxes) {
            if !(a <= b) {
                return Err(Error::InvalidInterval {
                    lo: a.as_f64(),
                    hi: b.as_f64(),
                });
            }
            bounds.push((c.marginal.cdf(a), c.marginal.cdf(b)));
        }
        self.quad.integrate(|w| {
            self.components
                .iter()
                .zip(&bounds)
                .fold(T::one(), |acc, (c, &(ua, ub))| {
                    acc * (c.copula.h(ub, w) - c.copula.h(ua, w))
                })
        })
    }

    /// Stress-strength probability `P{Xi < Xj}` (zero-based indices).
    ///
    /// Conditionally on `Z = z` the two are independent, so the inner
    /// integral is `int F_{i|z}(x) dF_{j|z}(x)`; it is taken in the
    /// quantile coordinate of `Xj`, where `dF_{j|z}` becomes the copula
    /// density `c_j(u, w) du`. `F_i(F_j^-1(u))` is rarely polynomial (a
    /// power marginal against a uniform one gives a square root), so the
    /// inner integral is always adaptive.
    pub fn stress_strength(&self, i: usize, j: usize) -> Result<T> {
        let ci = *self.component(i)?;
        let cj = *self.component(j)?;
        if i == j {
            return Err(Error::InvalidArgument(
                "stress-strength needs two distinct components".into(),
            ));
        }
        let pieces = inner_breakpoints(&ci.marginal, &cj.marginal);
        let inner_rule = Integrator::adaptive()?;
        self.quad.try_integrate(|w| {
            let mut inner = T::zero();
            for pair in pieces.windows(2) {
                inner += inner_rule.integrate_on(pair[0], pair[1], |u| {
                    let x = cj.marginal.quantile(u);
                    ci.copula.h(ci.marginal.cdf(x), w) * cj.copula.density(u, w)
                })?;
            }
            Ok(inner)
        })
    }

    /// Largest deviation of the induced joint copula from groundedness and
    /// uniform margins on a grid.
    pub fn joint_copula_axiom_violation(&self, grid_size: usize) -> Result<T> {
        let grid = unit_grid::<T>(grid_size.max(2));
        let n = self.n();
        let mut worst = T::zero();
        let mut u = vec![T::one(); n];
        for i in 0..n {
            for &t in &grid {
                u.iter_mut().for_each(|x| *x = T::one());
                u[i] = t;
                worst = worst.max((self.joint_copula(&u)? - t).abs());
                // grounded: zero in slot i, arbitrary elsewhere
                for &s in &grid {
                    u.iter_mut().for_each(|x| *x = s);
                    u[i] = T::zero();
                    worst = worst.max(self.joint_copula(&u)?.abs());
                }
            }
        }
        Ok(worst)
    }
}

// Split points of [0, 1] in the quantile coordinate of `outer` where the
// composed cdf `inner.cdf(outer.quantile(u))` hits 0 or 1 and has a kink.
fn inner_breakpoints<T: Scalar>(inner: &Marginal<T>, outer: &Marginal<T>) -> Vec<T> {
    let mut points = vec![T::zero(), T::one()];
    let (lo, hi) = inner.support();
    for edge in [lo, hi] {
        if edge.is_finite() {
            let p = outer.cdf(edge);
            if p > T::zero() && p < T::one() {
                points.push(p);
            }
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    points.dedup();
    points
}

pub(crate) fn unit_grid<T: Scalar>(size: usize) -> Vec<T> {
    let last = T::from_usize_lossy(size - 1);
    (0..size).map(|k| T::from_usize_lossy(k) / last).collect()
}

fn for_each_grid_point<T: Scalar>(
    grid: &[T],
    dim: usize,
    point: &mut [T],
    f: &mut dyn FnMut(&[T]) -> Result<()>,
) -> Result<()> {
    let mut idx = vec![0usize; dim];
    loop {
        for (slot, &k) in point.iter_mut().zip(&idx) {
            *slot = grid[k];
        }
        f(point)?;
        let mut d = 0;
        loop {
            if d == dim {
                return Ok(());
            }
            idx[d] += 1;
            if idx[d] < grid.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Outcome of [`CiModel::verify_ci`].
#[derive(Debug, Clone, PartialEq)]
pub struct CiReport<T> {
    /// Max over the grid of `|dC/dw - prod h_i|`.
    pub residual: T,
    /// `(u1..un, w)` where the residual was attained.
    pub worst_point: Vec<T>,
    /// Largest groundedness/margin violation of the candidate itself.
    pub candidate_violation: T,
    pub tolerance: T,
    pub passed: bool,
}

type CandidateFn<T> = dyn Fn(&[T], T) -> T + Send + Sync;

/// A closed-form candidate `(n+1)`-copula `C(u1..un, w)`.
pub struct CandidateCopula<T> {
    dim: usize,
    name: String,
    eval: Box<CandidateFn<T>>,
}

impl<T> fmt::Debug for CandidateCopula<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CandidateCopula")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> CandidateCopula<T> {
    /// `dim` is the number of `u` arguments (the `w` argument is extra).
    pub fn new<F>(dim: usize, name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&[T], T) -> T + Send + Sync + 'static,
    {
        Self {
            dim,
            name: name.into(),
            eval: Box::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, u: &[T], w: T) -> T {
        (self.eval)(u, w)
    }

    /// `u1 * ... * un * w`.
    pub fn product(dim: usize) -> Self {
        Self::new(dim, "product", |u: &[T], w| {
            u.iter().fold(w, |acc, &x| acc * x)
        })
    }

    /// Antiderivative in `w`, grounded at `w = 0`, of
    /// `h(u, w) h(v, w)` for two FGM copulas with common `alpha`:
    /// `uvw + a uvw(2-u-v)(1-w) + (a^2/6) uv(1-u)(1-v)(1 - (1-2w)^3)`.
    pub fn fgm_pair(alpha: T) -> Self {
        Self::new(2, "fgm-pair", move |x: &[T], w| {
            let (u, v) = (x[0], x[1]);
            let one = T::one();
            let two = T::lit(2.0);
            let uv = u * v;
            let tail = one - (one - two * w).powi(3);
            uv * w
                + alpha * uv * w * (two - u - v) * (one - w)
                + alpha * alpha / T::lit(6.0) * uv * (one - u) * (one - v) * tail
        })
    }

    /// `uvw(1 + alpha(1-u)(1-v))`: FGM dependence placed directly between
    /// the two components, with `Z` independent of both.
    pub fn fgm_direct(alpha: T) -> Self {
        Self::new(2, "fgm-direct", move |x: &[T], w| {
            let (u, v) = (x[0], x[1]);
            let one = T::one();
            u * v * w * (one + alpha * (one - u) * (one - v))
        })
    }

    /// The model's own `(n+1)`-copula, by quadrature.
    pub fn from_model(model: &CiModel<T>) -> Self {
        let model = model.clone();
        Self::new(model.n(), "model", move |u: &[T], w| {
            model.joint_copula_with_z(u, w).unwrap_or(T::nan())
        })
    }

    /// Largest violation of groundedness or uniform margins on a grid.
    pub fn axiom_violation(&self, grid_size: usize) -> T {
        let grid = unit_grid::<T>(grid_size.max(2));
        let n = self.dim;
        let mut worst = T::zero();
        let mut bump = |v: T| {
            worst = if v.is_nan() {
                T::infinity()
            } else {
                worst.max(v)
            };
        };
        let mut u = vec![T::one(); n];
        for &t in &grid {
            // margin in w and grounding at w = 0
            u.iter_mut().for_each(|x| *x = T::one());
            bump((self.eval(&u, t) - t).abs());
            u.iter_mut().for_each(|x| *x = t);
            bump(self.eval(&u, T::zero()).abs());
            for i in 0..n {
                u.iter_mut().for_each(|x| *x = T::one());
                u[i] = t;
                bump((self.eval(&u, T::one()) - t).abs());
                for &s in &grid {
                    u.iter_mut().for_each(|x| *x = s);
                    u[i] = T::zero();
                    bump(self.eval(&u, t).abs());
                }
            }
        }
        worst
    }
}
