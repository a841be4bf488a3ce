//! Gauss-Legendre quadrature on `[0, 1]` (fixed and adaptive), finite
//! differences and bracketed root finding.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_QUADRATURE_ORDER: usize = 512;
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;
pub const DEFAULT_DIFF_STEP: f64 = 1e-5;

const MAX_ROOT_ITERATIONS: usize = 200;

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
///
/// Nodes are strictly increasing in the open interval and the weights sum to
/// one, so the rule integrates constants exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> QuadratureRule<T> {
    /// Builds the `order`-point rule, exact for polynomials of degree
    /// `2 * order - 1`.
    pub fn gauss(order: usize) -> Result<Self> {
        if order == 0 || order > MAX_QUADRATURE_ORDER {
            return Err(Error::QuadratureOrder(order));
        }
        let (x, w) = legendre_roots::<T>(order);
        let half = T::lit(0.5);
        // roots come back descending on [-1, 1]; reverse so nodes increase
        let nodes = x.iter().rev().map(|&xi| half * (T::one() + xi)).collect();
        let weights = w.iter().rev().map(|&wi| half * wi).collect();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `(node, weight)` pairs in increasing node order.
    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `sum_i weight_i * f(node_i)`, failing on the first non-finite value.
    pub fn integrate<F>(&self, mut f: F) -> Result<T>
    where
        F: FnMut(T) -> T,
    {
        let mut acc = T::zero();
        for (x, w) in self.iter() {
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::NonFinite("integrand"));
            }
            acc += w * y;
        }
        Ok(acc)
    }

    /// Integral over `[a, b]` by the affine map of the unit rule.
    pub fn integrate_on<F>(&self, a: T, b: T, mut f: F) -> Result<T>
    where
        F: FnMut(T) -> T,
    {
        let width = b - a;
        Ok(width * self.integrate(|t| f(a + width * t))?)
    }

    /// Like [`integrate`](Self::integrate) for integrands that can fail.
    pub fn try_integrate<F>(&self, mut f: F) -> Result<T>
    where
        F: FnMut(T) -> Result<T>,
    {
        let mut acc = T::zero();
        for (x, w) in self.iter() {
            let y = f(x)?;
            if !y.is_finite() {
                return Err(Error::NonFinite("integrand"));
            }
            acc += w * y;
        }
        Ok(acc)
    }
}

/// Panel rule used by [`Integrator::Adaptive`].
pub const ADAPTIVE_PANEL_ORDER: usize = 16;
/// Refinement stops once this many panels exist, converged or not.
pub const MAX_ADAPTIVE_PANELS: usize = 2048;

/// Integration strategy over `[0, 1]`.
///
/// `Fixed` applies one Gauss rule and is exact for polynomial integrands.
/// `Adaptive` keeps a set of panels, each estimated by the panel rule on
/// both of its halves, and repeatedly splits the panel whose halves
/// disagree most until the summed disagreement is within `tol`. This copes
/// with endpoint power singularities and steep interior transitions.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrator<T> {
    Fixed(QuadratureRule<T>),
    Adaptive { panel: QuadratureRule<T>, tol: T },
}

impl<T: Scalar> Integrator<T> {
    pub fn fixed(order: usize) -> Result<Self> {
        Ok(Self::Fixed(QuadratureRule::gauss(order)?))
    }

    /// Gauss-16 panels with an absolute tolerance of
    /// `max(1e-13, 64 eps)`.
    pub fn adaptive() -> Result<Self> {
        let tol = T::lit(1e-13).max(T::lit(64.0) * T::epsilon());
        Ok(Self::Adaptive {
            panel: QuadratureRule::gauss(ADAPTIVE_PANEL_ORDER)?,
            tol,
        })
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Self::Adaptive { .. })
    }

    /// The fixed rule, or the panel rule when adaptive.
    pub fn rule(&self) -> &QuadratureRule<T> {
        match self {
            Self::Fixed(r) => r,
            Self::Adaptive { panel, .. } => panel,
        }
    }

    pub fn integrate<F>(&self, mut f: F) -> Result<T>
    where
        F: FnMut(T) -> T,
    {
        self.try_integrate(|x| Ok(f(x)))
    }

    pub fn integrate_on<F>(&self, a: T, b: T, mut f: F) -> Result<T>
    where
        F: FnMut(T) -> T,
    {
        let width = b - a;
        Ok(width * self.integrate(|t| f(a + width * t))?)
    }

    pub fn try_integrate<F>(&self, mut f: F) -> Result<T>
    where
        F: FnMut(T) -> Result<T>,
    {
        match self {
            Self::Fixed(rule) => rule.try_integrate(f),
            Self::Adaptive { panel, tol } => adaptive(panel, *tol, &mut f),
        }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    halves: (T, T),
    err: T,
}

impl<T: Scalar> Panel<T> {
    fn new<F: FnMut(T) -> Result<T>>(
        rule: &QuadratureRule<T>,
        a: T,
        b: T,
        coarse: T,
        f: &mut F,
    ) -> Result<Self> {
        let mid = T::lit(0.5) * (a + b);
        let halves = (panel_sum(rule, a, mid, f)?, panel_sum(rule, mid, b, f)?);
        Ok(Self {
            a,
            b,
            halves,
            err: (halves.0 + halves.1 - coarse).abs(),
        })
    }

    fn value(&self) -> T {
        self.halves.0 + self.halves.1
    }
}

fn adaptive<T: Scalar, F: FnMut(T) -> Result<T>>(
    rule: &QuadratureRule<T>,
    tol: T,
    f: &mut F,
) -> Result<T> {
    let coarse = panel_sum(rule, T::zero(), T::one(), f)?;
    let mut panels = vec![Panel::new(rule, T::zero(), T::one(), coarse, f)?];
    while panels.len() < MAX_ADAPTIVE_PANELS {
        let mut total_err = T::zero();
        let mut total = T::zero();
        let mut worst = 0;
        for (k, p) in panels.iter().enumerate() {
            total_err += p.err;
            total += p.value();
            if p.err > panels[worst].err {
                worst = k;
            }
        }
        // rounding noise sets a floor for large integrals
        if total_err <= tol.max(T::lit(16.0) * T::epsilon() * total.abs()) {
            break;
        }
        let p = panels.swap_remove(worst);
        let mid = T::lit(0.5) * (p.a + p.b);
        panels.push(Panel::new(rule, p.a, mid, p.halves.0, f)?);
        panels.push(Panel::new(rule, mid, p.b, p.halves.1, f)?);
    }
    let mut acc = crate::scalar::CompensatedSum::new();
    for p in &panels {
        acc.add(p.value());
    }
    Ok(acc.value())
}

fn panel_sum<T: Scalar, F: FnMut(T) -> Result<T>>(
    rule: &QuadratureRule<T>,
    a: T,
    b: T,
    f: &mut F,
) -> Result<T> {
    let width = b - a;
    Ok(width * rule.try_integrate(|t| f(a + width * t))?)
}

/// Shorthand for [`QuadratureRule::gauss`].
pub fn gauss_rule<T: Scalar>(order: usize) -> Result<QuadratureRule<T>> {
    QuadratureRule::gauss(order)
}

/// Shorthand for [`QuadratureRule::integrate`].
pub fn integrate_01<T: Scalar, F: FnMut(T) -> T>(f: F, rule: &QuadratureRule<T>) -> Result<T> {
    rule.integrate(f)
}

// Newton iteration on the three-term recurrence, seeded with the usual
// cosine approximation. Returns roots of P_n on [-1, 1] in descending order
// together with their weights.
fn legendre_roots<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = T::from_usize_lossy(n);
    let half_count = n.div_ceil(2);
    for i in 0..half_count {
        let guess = T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5));
        let mut z = guess.cos();
        let mut deriv = T::one();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            deriv = dp;
            let step = p / dp;
            z -= step;
            if step.abs() <= T::epsilon() {
                let (_, dp) = legendre_with_derivative(n, z);
                deriv = dp;
                break;
            }
        }
        let weight = T::lit(2.0) / ((T::one() - z * z) * deriv * deriv);
        x[i] = z;
        w[i] = weight;
        x[n - 1 - i] = -z;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = T::zero();
    }
    (x, w)
}

fn legendre_with_derivative<T: Scalar>(n: usize, z: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = z;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 1..n {
        let kf = T::from_usize_lossy(k);
        let next = ((T::lit(2.0) * kf + T::one()) * z * p - kf * p_prev) / (kf + T::one());
        p_prev = p;
        p = next;
    }
    let nf = T::from_usize_lossy(n);
    let dp = nf * (z * p - p_prev) / (z * z - T::one());
    (p, dp)
}

/// Symmetric difference quotient `(f(x + h) - f(x - h)) / 2h`.
pub fn central_diff<T, F>(mut f: F, x: T, h: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(h > T::zero()) {
        return Err(Error::InvalidStep(h.as_f64()));
    }
    let hi = f(x + h);
    let lo = f(x - h);
    if !hi.is_finite() || !lo.is_finite() {
        return Err(Error::NonFinite("central difference"));
    }
    Ok((hi - lo) / (h + h))
}

/// Derivative of a function defined only on `[0, 1]`.
///
/// Central difference where `[x - h, x + h]` fits, otherwise a second-order
/// one-sided formula.
pub fn unit_interval_diff<T, F>(mut f: F, x: T, h: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(h > T::zero()) {
        return Err(Error::InvalidStep(h.as_f64()));
    }
    let zero = T::zero();
    let one = T::one();
    let two = T::lit(2.0);
    if x - h >= zero && x + h <= one {
        return central_diff(f, x, h);
    }
    let d = if x + two * h <= one {
        (-T::lit(3.0) * f(x) + T::lit(4.0) * f(x + h) - f(x + two * h)) / (two * h)
    } else if x - two * h >= zero {
        (T::lit(3.0) * f(x) - T::lit(4.0) * f(x - h) + f(x - two * h)) / (two * h)
    } else {
        return Err(Error::DomainExhausted {
            x: x.as_f64(),
            h: h.as_f64(),
        });
    };
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::NonFinite("one-sided difference"))
    }
}

/// Interval known to contain a sign change, with an absolute tolerance on
/// the abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket<T> {
    pub lo: T,
    pub hi: T,
    pub tol: T,
}

impl<T: Scalar> RootBracket<T> {
    pub fn new(lo: T, hi: T, tol: T) -> Result<Self> {
        if !(lo < hi) || !(tol > T::zero()) {
            return Err(Error::InvalidBracket {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                tol: tol.as_f64(),
            });
        }
        Ok(Self { lo, hi, tol })
    }

    /// `[0, 1]` with the default probability tolerance.
    pub fn unit() -> Self {
        Self {
            lo: T::zero(),
            hi: T::one(),
            tol: T::root_tolerance(),
        }
    }
}

/// Illinois false position safeguarded by bisection.
///
/// The bracket is kept throughout; a bisection step is forced whenever two
/// consecutive interpolation steps fail to halve it. Returns `x` with
/// `|x - x*| <= tol` or an exact zero.
pub fn find_root<T, F>(mut f: F, bracket: &RootBracket<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NonFinite("root bracket endpoint"));
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo: a.as_f64(),
            hi: b.as_f64(),
        });
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut side = 0i8;
    let mut slow_steps = 0;
    for _ in 0..MAX_ROOT_ITERATIONS {
        let width = b - a;
        if width <= two * bracket.tol {
            return Ok(half * (a + b));
        }
        let mut x = if slow_steps >= 2 {
            slow_steps = 0;
            half * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = half * (a + b);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite("root function"));
        }
        if fx == T::zero() {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= half;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= half;
            }
            side = -1;
        }
        if b - a > half * width {
            slow_steps += 1;
        } else {
            slow_steps = 0;
        }
    }
    Err(Error::RootNotConverged {
        best: (half * (a + b)).as_f64(),
    })
}
