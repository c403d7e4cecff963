//! Closed forms for the MLR order: full and tail-restricted dominance
//! probabilities, the two combinatorial identities behind them, the integral
//! constant, and both comparability probabilities.
//!
//! Alternating sums are exact in rational mode and use compensated summation
//! in float mode.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::scalar::{factorial, Scalar};
use crate::simplex::SimplexPoint;

/// `a_lo + ... + a_hi`; zero when `hi < lo`.
fn span<S: Scalar>(a: &[S], lo: usize, hi: usize) -> S {
    if hi < lo {
        return S::zero();
    }
    S::sum_all(a[lo..=hi].iter().cloned())
}

fn require_interior<S: Scalar>(a: &SimplexPoint<S>) -> Result<()> {
    match a.coords().iter().position(|c| !(*c > S::zero())) {
        Some(i) => Err(Error::Degenerate(format!("coordinate a_{i} is zero"))),
        None => Ok(()),
    }
}

/// `P[X >=_r a]` together with a flag marking points on the boundary face
/// where the product has a zero factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MlrProbability<S> {
    pub value: S,
    pub degenerate: bool,
}

/// `P[X >=_r a] = prod_{i=0}^n a_i / (a_i + ... + a_n)`.
///
/// A zero `a_i` with `i < n` yields 0 flagged as degenerate; `a_n = 0` makes
/// the formula 0/0 and is rejected.
pub fn mlr_dominance_probability<S: Scalar>(a: &SimplexPoint<S>) -> Result<MlrProbability<S>> {
    let n = a.n();
    if a.coord(n).is_zero() {
        return Err(Error::Degenerate("a_n = 0: the MLR dominance probability is undefined".into()));
    }
    if a.coords()[..n].iter().any(Zero::is_zero) {
        return Ok(MlrProbability { value: S::zero(), degenerate: true });
    }
    let tails = a.tail_sums();
    let value = a.coords().iter().zip(&tails).fold(S::one(), |acc, (c, t)| acc * c.clone() / t.clone());
    Ok(MlrProbability { value, degenerate: false })
}

/// Location of a bound `b` in the partition of `[a_n, u]` by the points
/// `a_n u / (a_m + ... + a_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentIndex<S> {
    /// In `1..=n`.
    pub m: usize,
    /// `a_n u / (a_{m-1} + ... + a_n)`
    pub bracket_low: S,
    /// `a_n u / (a_m + ... + a_n)`
    pub bracket_high: S,
}

/// The bracket endpoints of segment `m`.
pub fn segment_bounds<S: Scalar>(a: &SimplexPoint<S>, m: usize) -> Result<(S, S)> {
    let n = a.n();
    if m < 1 || m > n {
        return Err(Error::Index { index: m, max: n });
    }
    require_interior(a)?;
    let tails = a.tail_sums();
    let top = a.coord(n).clone() * a.u().clone();
    Ok((top.clone() / tails[m - 1].clone(), top / tails[m].clone()))
}

/// Finds the segment containing `b`; on a shared boundary the smaller `m`
/// wins.
pub fn segment_index<S: Scalar>(a: &SimplexPoint<S>, b: &S) -> Result<SegmentIndex<S>> {
    require_interior(a)?;
    let n = a.n();
    if *b < *a.coord(n) || *b > *a.u() {
        return Err(Error::Range(format!("b = {b} outside [{}, {}]", a.coord(n), a.u())));
    }
    let tails = a.tail_sums();
    let top = a.coord(n).clone() * a.u().clone();
    let m = (1..n).find(|&m| *b <= top.clone() / tails[m].clone()).unwrap_or(n);
    Ok(SegmentIndex { m, bracket_low: top.clone() / tails[m - 1].clone(), bracket_high: top / tails[m].clone() })
}

/// `P[X >=_r a, x_n <= b]` for `b` in `[a_n, u]`.
///
/// `b < a_n` returns 0: dominance forces `x_n >= a_n`, so the event is empty
/// up to a null set.
pub fn mlr_dominance_probability_restricted<S: Scalar>(a: &SimplexPoint<S>, b: &S) -> Result<S> {
    require_interior(a)?;
    let n = a.n();
    if *b > *a.u() {
        return Err(Error::Range(format!("b = {b} exceeds u = {}", a.u())));
    }
    if *b < *a.coord(n) {
        return Ok(S::zero());
    }
    let seg = segment_index(a, b)?;
    mlr_dominance_probability_restricted_in_segment(a, b, seg.m)
}

/// The restricted closed form evaluated with an explicit segment index `m`.
///
/// Only meaningful when `b` lies in segment `m`; exposed so callers can check
/// that adjacent segments agree on their shared endpoint.
pub fn mlr_dominance_probability_restricted_in_segment<S: Scalar>(a: &SimplexPoint<S>, b: &S, m: usize) -> Result<S> {
    require_interior(a)?;
    let n = a.n();
    if m < 1 || m > n {
        return Err(Error::Index { index: m, max: n });
    }
    let c = a.coords();
    let u = a.u();
    let full = mlr_dominance_probability(a)?.value;
    let coord_product = c.iter().fold(S::one(), |acc, x| acc * x.clone());
    let u_pow = u.powu(n as u32);

    let mut terms = Vec::with_capacity(n - m + 2);
    terms.push(full);
    for k in 0..=n - m {
        let base = u.clone() - span(c, n - k, n) / c[n].clone() * b.clone();
        let left = (0..n - k).fold(S::one(), |acc, i| acc * span(c, i, n - k - 1));
        let right = (0..=k).fold(S::one(), |acc, i| acc * span(c, n - k, n - i));
        let magnitude = base.powu(n as u32) * coord_product.clone() / (left * right * u_pow.clone());
        // subtracted, so even k enters negatively
        terms.push(if k % 2 == 0 { -magnitude } else { magnitude });
    }
    Ok(S::sum_all(terms))
}

fn require_distinct<S: Scalar>(xs: &[S]) -> Result<()> {
    for (i, x) in xs.iter().enumerate() {
        if let Some(j) = xs[i + 1..].iter().position(|y| y == x) {
            return Err(domain(format!("entries {i} and {} are equal ({x})", i + 1 + j)));
        }
    }
    Ok(())
}

/// Terms `x_j^r / prod_{k != j} (x_j - x_k)` of the power-sum identity.
pub fn knuth_power_sum_terms<S: Scalar>(xs: &[S], r: u32) -> Result<Vec<S>> {
    if xs.is_empty() {
        return Err(domain("need at least one entry"));
    }
    if r as usize > xs.len() {
        return Err(domain(format!("r = {r} exceeds the number of entries {}", xs.len())));
    }
    require_distinct(xs)?;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            let denom = xs
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(S::one(), |acc, (_, xk)| acc * (xj.clone() - xk.clone()));
            xj.powu(r) / denom
        })
        .collect())
}

/// `sum_j x_j^r / prod_{k != j} (x_j - x_k)` over pairwise distinct `xs`.
pub fn knuth_power_sum<S: Scalar>(xs: &[S], r: u32) -> Result<S> {
    Ok(S::sum_all(knuth_power_sum_terms(xs, r)?))
}

/// What [`knuth_power_sum`] must return: 0 for `r < n-1`, 1 for `r = n-1`,
/// and `sum x_i` for `r = n`, where `n = xs.len()`.
pub fn knuth_power_sum_expected<S: Scalar>(xs: &[S], r: u32) -> S {
    let n = xs.len();
    match (r as usize + 1).cmp(&n) {
        std::cmp::Ordering::Less => S::zero(),
        std::cmp::Ordering::Equal => S::one(),
        std::cmp::Ordering::Greater => S::sum_all(xs.iter().cloned()),
    }
}

/// The `n + 1` signed terms of the alternating identity for `a_0, ..., a_n`:
///
/// `(-1)^k (a_0+...+a_{n-k})^n / [prod_{i=0}^{n-k} (a_i+...+a_{n-k}) *
///  prod_{i=0}^{k-1} (a_{n+1-k}+...+a_{n-i})]`
pub fn alternating_identity_terms<S: Scalar>(a: &[S]) -> Result<Vec<S>> {
    if a.len() < 2 {
        return Err(domain("need at least two entries"));
    }
    if let Some(i) = a.iter().position(|x| !(*x > S::zero())) {
        return Err(domain(format!("entry {i} is not positive ({})", a[i])));
    }
    let n = a.len() - 1;
    Ok((0..=n)
        .map(|k| {
            let numer = span(a, 0, n - k).powu(n as u32);
            let left = (0..=n - k).fold(S::one(), |acc, i| acc * span(a, i, n - k));
            let right = (0..k).fold(S::one(), |acc, i| acc * span(a, n + 1 - k, n - i));
            let term = numer / (left * right);
            if k % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .collect())
}

/// Left-hand side of the alternating identity; identically zero.
pub fn alternating_identity_residual<S: Scalar>(a: &[S]) -> Result<S> {
    Ok(S::sum_all(alternating_identity_terms(a)?))
}

/// `|sum t| / sum |t|`, zero for an all-zero input.
pub fn relative_residual(terms: &[f64]) -> f64 {
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if scale == 0.0 {
        return 0.0;
    }
    f64::sum_all(terms.iter().copied()).abs() / scale
}

/// `u^n / (n!)^2`, the integral of `prod_{i=1}^n a_i / (a_i + ... + a_n)` over
/// the solid simplex `{a >= 0, a_1 + ... + a_n <= u}`.
pub fn mlr_integral_constant<S: Scalar>(n: usize, u: &S) -> Result<S> {
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    if !(*u > S::zero()) {
        return Err(domain(format!("size u must be positive, got {u}")));
    }
    let f = S::from_biguint(&factorial(n));
    Ok(u.powu(n as u32) / (f.clone() * f))
}

/// Probability that two independent uniform points are FOSD comparable:
/// `2 / (n + 1)`.
pub fn fosd_comparability_probability(n: usize) -> Result<BigRational> {
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    Ok(BigRational::new(BigInt::from(2), BigInt::from(n + 1)))
}

/// Probability that two independent uniform points are MLR comparable:
/// `2 / (n + 1)!`.
pub fn mlr_comparability_probability(n: usize) -> Result<BigRational> {
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    Ok(BigRational::new(BigInt::from(2), factorial(n + 1).into()))
}
