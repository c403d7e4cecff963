//! First order stochastic dominance (`<=_s`) and the monotone likelihood
//! ratio order (`<=_r`) on simplex points, plus the one-dimension-lower
//! reductions of both orders.
//!
//! Float-mode comparisons accept `a <= b` when `a <= b + 1e-12 * u` for tail
//! sums and `a <= b + 1e-12 * u^2` for cross products. Zeros in the MLR order
//! are handled purely through cross products; nothing is ever divided.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;
use crate::simplex::SimplexPoint;

/// Which partial order to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Fosd,
    Mlr,
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderKind::Fosd => f.write_str("fosd"),
            OrderKind::Mlr => f.write_str("mlr"),
        }
    }
}

impl FromStr for OrderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fosd" | "s" => Ok(OrderKind::Fosd),
            "mlr" | "r" => Ok(OrderKind::Mlr),
            _ => Err(Error::Parse { input: s.to_string(), reason: "expected `fosd` or `mlr`".into() }),
        }
    }
}

/// Outcome of comparing `x` against `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderRelation {
    /// `x <= y` only.
    Less,
    /// `y <= x` only.
    Greater,
    Equal,
    Incomparable,
}

impl OrderRelation {
    pub fn is_comparable(self) -> bool {
        self != OrderRelation::Incomparable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrderRelation::Less => "less",
            OrderRelation::Greater => "greater",
            OrderRelation::Equal => "equal",
            OrderRelation::Incomparable => "incomparable",
        }
    }
}

impl fmt::Display for OrderRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_compatible<S: Scalar>(x: &SimplexPoint<S>, y: &SimplexPoint<S>) -> Result<()> {
    if x.n() != y.n() {
        return Err(domain(format!("dimension mismatch: n = {} vs n = {}", x.n(), y.n())));
    }
    let (ux, uy) = (x.u(), y.u());
    let scale = if ux > uy { ux.clone() } else { uy.clone() };
    if (ux.clone() - uy.clone()).abs() > S::tolerance() * scale {
        return Err(domain(format!("size mismatch: u = {ux} vs u = {uy}")));
    }
    Ok(())
}

/// Tail-sum test on raw coordinates. Index 0 is skipped: both tails equal `u`.
pub(crate) fn fosd_leq_raw<S: Scalar>(x: &[S], y: &[S], slack: &S) -> bool {
    let mut tx = S::zero();
    let mut ty = S::zero();
    for k in (1..x.len()).rev() {
        tx = tx + x[k].clone();
        ty = ty + y[k].clone();
        if tx > ty.clone() + slack.clone() {
            return false;
        }
    }
    true
}

/// `y_i * x_j <= x_i * y_j` for all `i < j`.
pub(crate) fn mlr_leq_raw<S: Scalar>(x: &[S], y: &[S], slack: &S) -> bool {
    let len = x.len();
    for i in 0..len {
        for j in i + 1..len {
            let lhs = y[i].clone() * x[j].clone();
            let rhs = x[i].clone() * y[j].clone();
            if lhs > rhs + slack.clone() {
                return false;
            }
        }
    }
    true
}

#[inline]
pub(crate) fn fosd_leq_f64(x: &[f64], y: &[f64], slack: f64) -> bool {
    let mut tx = 0.0;
    let mut ty = 0.0;
    for k in (1..x.len()).rev() {
        tx += x[k];
        ty += y[k];
        if tx > ty + slack {
            return false;
        }
    }
    true
}

#[inline]
pub(crate) fn mlr_leq_f64(x: &[f64], y: &[f64], slack: f64) -> bool {
    let len = x.len();
    for i in 0..len {
        for j in i + 1..len {
            if y[i] * x[j] > x[i] * y[j] + slack {
                return false;
            }
        }
    }
    true
}

pub(crate) fn slack_for<S: Scalar>(order: OrderKind, u: &S) -> S {
    match order {
        OrderKind::Fosd => S::tolerance() * u.clone(),
        OrderKind::Mlr => S::tolerance() * u.clone() * u.clone(),
    }
}

/// `x <=_s y`: every tail sum of `x` is at most the matching tail sum of `y`.
pub fn fosd_leq<S: Scalar>(x: &SimplexPoint<S>, y: &SimplexPoint<S>) -> Result<bool> {
    check_compatible(x, y)?;
    Ok(fosd_leq_raw(x.coords(), y.coords(), &slack_for(OrderKind::Fosd, x.u())))
}

/// `x <=_r y`: `y_i * x_j <= x_i * y_j` for all `0 <= i < j <= n`.
pub fn mlr_leq<S: Scalar>(x: &SimplexPoint<S>, y: &SimplexPoint<S>) -> Result<bool> {
    check_compatible(x, y)?;
    Ok(mlr_leq_raw(x.coords(), y.coords(), &slack_for(OrderKind::Mlr, x.u())))
}

pub fn leq<S: Scalar>(x: &SimplexPoint<S>, y: &SimplexPoint<S>, order: OrderKind) -> Result<bool> {
    match order {
        OrderKind::Fosd => fosd_leq(x, y),
        OrderKind::Mlr => mlr_leq(x, y),
    }
}

pub(crate) fn coords_equal<S: Scalar>(x: &[S], y: &[S], u: &S) -> bool {
    let slack = S::tolerance() * u.clone();
    x.iter().zip(y).all(|(a, b)| (a.clone() - b.clone()).abs() <= slack)
}

pub(crate) fn relation_from(forward: bool, backward: bool, equal: impl FnOnce() -> bool) -> OrderRelation {
    match (forward, backward) {
        (true, true) if equal() => OrderRelation::Equal,
        (true, false) => OrderRelation::Less,
        (false, true) => OrderRelation::Greater,
        _ => OrderRelation::Incomparable,
    }
}

/// Classifies the pair `(x, y)` under `order`.
pub fn compare<S: Scalar>(x: &SimplexPoint<S>, y: &SimplexPoint<S>, order: OrderKind) -> Result<OrderRelation> {
    let forward = leq(x, y, order)?;
    let backward = leq(y, x, order)?;
    Ok(relation_from(forward, backward, || coords_equal(x.coords(), y.coords(), x.u())))
}

/// Result of [`fosd_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct FosdReduction<S> {
    /// `(a_0, ..., a_{k-2}, a_{k-1} + ... + a_{n+1} - x_{n+1}, 0, ..., 0)`
    pub reduced: SimplexPoint<S>,
    /// `u - x_{n+1}`
    pub target_u: S,
}

/// The index `k` in `1..=n+1` with `S(a,k) <= x_last < S(a,k-1)`, where `a`
/// lives in the `(n+1)`-simplex. `None` when `x_last < a_{n+1}` (then `a`
/// cannot be dominated) or `x_last >= u`.
pub fn fosd_bracket<S: Scalar>(a: &SimplexPoint<S>, x_last: &S) -> Option<usize> {
    let tails = a.tail_sums();
    (1..tails.len()).find(|&k| tails[k] <= *x_last && *x_last < tails[k - 1])
}

/// Rewrites `a <=_s x` in the `(n+1)`-simplex as a comparison in the
/// `n`-simplex of size `u - x_last`, given the bracket index `k`.
pub fn fosd_reduce<S: Scalar>(a: &SimplexPoint<S>, x_last: &S, k: usize) -> Result<FosdReduction<S>> {
    let top = a.n();
    if top < 2 {
        return Err(domain("reduction needs a point in at least the 2-simplex"));
    }
    if k < 1 || k > top {
        return Err(Error::Index { index: k, max: top });
    }
    let tails = a.tail_sums();
    if !(tails[k] <= *x_last && *x_last < tails[k - 1]) {
        return Err(domain(format!(
            "x_last = {x_last} is outside the bracket [{}, {}) of k = {k}",
            tails[k],
            tails[k - 1]
        )));
    }
    let target_u = a.u().clone() - x_last.clone();
    let mut coords = Vec::with_capacity(top);
    coords.extend(a.coords()[..k - 1].iter().cloned());
    coords.push(tails[k - 1].clone() - x_last.clone());
    coords.resize(top, S::zero());
    Ok(FosdReduction { reduced: SimplexPoint::new_unchecked(coords, target_u.clone()), target_u })
}

/// Result of [`mlr_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlrReduction<S> {
    /// `(a_0 / v, ..., a_n / v)` with `v = (a_0 + ... + a_n) / (u - x_{n+1})`.
    pub scaled: SimplexPoint<S>,
    /// `(x_0, ..., x_n)` as a point of size `u - x_{n+1}`.
    pub prefix: SimplexPoint<S>,
    /// `x_n * a_{n+1} <= a_n * x_{n+1}`
    pub extra_condition: bool,
}

/// Splits `a <=_r x` in the `(n+1)`-simplex into the last cross-product
/// condition and a comparison in the `n`-simplex of size `u - x_{n+1}`.
pub fn mlr_reduce<S: Scalar>(a: &SimplexPoint<S>, x: &SimplexPoint<S>) -> Result<MlrReduction<S>> {
    check_compatible(a, x)?;
    let top = a.n();
    if top < 2 {
        return Err(domain("reduction needs points in at least the 2-simplex"));
    }
    let prefix = x.head()?;
    let head_mass = S::sum_all(a.coords()[..top].iter().cloned());
    if !(head_mass > S::zero()) {
        return Err(Error::Degenerate("a_0 + ... + a_n = 0, the scaling factor vanishes".into()));
    }
    let factor = prefix.u().clone() / head_mass;
    let scaled = a.coords()[..top].iter().map(|c| c.clone() * factor.clone()).collect();
    let scaled = SimplexPoint::new_unchecked(scaled, prefix.u().clone());

    let lhs = x.coord(top - 1).clone() * a.coord(top).clone();
    let rhs = a.coord(top - 1).clone() * x.coord(top).clone();
    let extra_condition = lhs <= rhs + slack_for(OrderKind::Mlr, a.u());
    Ok(MlrReduction { scaled, prefix, extra_condition })
}
