//! The monomial families `H_k(n)` and the exact FOSD dominance probability.
//!
//! `H_k(n)` is the set of distinct degree-`n` monomials
//! `x_{i_0} x_{i_1} ... x_{i_{n-1}}` with `0 <= i_j <= min(j, k)`. A monomial is
//! stored as its degree vector `(d_0, ..., d_{n-1})`. A multiset of indices
//! is realizable by an admissible index sequence iff its sorted form
//! `s_0 <= ... <= s_{n-1}` satisfies `s_j <= min(j, k)`, so the family is
//! enumerated directly as such nondecreasing sequences, one per monomial.
//!
//! The probability that a uniform point of the simplex first-order dominates
//! `a` is `u^{-n} * sum_{h in H_n(n)} D(h) h(a)`, with `D(h)` the multinomial
//! coefficient `n! / (d_0! ... d_{n-1}!)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{domain, Error, Result};
use crate::scalar::{factorial, Scalar};
use crate::simplex::SimplexPoint;

/// Largest `n` for which `H_n(n)` is materialized (`C_16` is about 35.3M).
pub const MAX_EXACT_FOSD_N: usize = 16;

/// Degree vector of a monomial in `x_0, ..., x_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degrees: Box<[u8]>,
}

impl Monomial {
    pub fn new(degrees: Vec<u8>) -> Self {
        Self { degrees: degrees.into_boxed_slice() }
    }

    pub fn degrees(&self) -> &[u8] {
        &self.degrees
    }

    /// Degree of `x_i`; zero past the end of the vector.
    pub fn degree(&self, i: usize) -> usize {
        self.degrees.get(i).copied().unwrap_or(0) as usize
    }

    pub fn total_degree(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).sum()
    }

    /// Sorted index multiset `s_0 <= ... <= s_{n-1}` encoded by the degrees.
    pub fn sorted_indices(&self) -> Vec<usize> {
        self.degrees.iter().enumerate().flat_map(|(i, &d)| std::iter::repeat_n(i, d as usize)).collect()
    }

    /// Membership in `H_k(n)` by the ballot bound `s_j <= min(j, k)`.
    pub fn is_in_family(&self, k: usize) -> bool {
        self.total_degree() == self.degrees.len()
            && self.sorted_indices().iter().enumerate().all(|(j, &s)| s <= j.min(k))
    }

    /// `n! / (d_0! ... d_{n-1}!)` with `n` the total degree.
    pub fn multinomial(&self) -> BigUint {
        let denom = self.degrees.iter().fold(BigUint::one(), |acc, &d| acc * factorial(d as usize));
        factorial(self.total_degree()) / denom
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &d) in self.degrees.iter().enumerate() {
            if d == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            match d {
                1 => write!(f, "x{i}")?,
                _ => write!(f, "x{i}^{d}")?,
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// A monomial with its multinomial coefficient `D(h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedMonomial {
    pub monomial: Monomial,
    pub coefficient: BigUint,
}

type Family = Arc<[WeightedMonomial]>;

fn cache() -> &'static Mutex<HashMap<(usize, usize), Family>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Family>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Every monomial of `H_k(n)` once, with `D(h)` attached.
///
/// Results are cached per `(k, n)`. The order sorts by `d_{n-1}` first, then
/// `d_{n-2}`, and so on down to `d_0`, each ascending; for `H_3(3)` this gives
/// `x0^3, x0^2*x1, x0*x1^2, x0^2*x2, x0*x1*x2`.
pub fn enumerate_h(k: usize, n: usize) -> Result<Arc<[WeightedMonomial]>> {
    if n < 1 {
        return Err(domain("n must be at least 1"));
    }
    if k > n {
        return Err(Error::Index { index: k, max: n });
    }
    if n > MAX_EXACT_FOSD_N {
        return Err(Error::Size(format!("n = {n} exceeds the enumeration ceiling {MAX_EXACT_FOSD_N}")));
    }
    // Held across the build so concurrent first callers wait instead of
    // duplicating the work.
    let mut guard = cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(hit) = guard.get(&(k, n)) {
        return Ok(Arc::clone(hit));
    }
    let family: Family = build_family(k, n).into();
    guard.insert((k, n), Arc::clone(&family));
    Ok(family)
}

fn build_family(k: usize, n: usize) -> Vec<WeightedMonomial> {
    let mut raw = Vec::new();
    let mut degrees = vec![0u8; n];
    descend(0, 0, k, &mut degrees, &mut raw);
    raw.sort_unstable_by(|a: &Vec<u8>, b: &Vec<u8>| a.iter().rev().cmp(b.iter().rev()));

    let facts: Vec<BigUint> = (0..=n).map(factorial).collect();
    raw.into_iter()
        .map(|d| {
            let denom = d.iter().fold(BigUint::one(), |acc, &e| acc * &facts[e as usize]);
            WeightedMonomial { coefficient: &facts[n] / denom, monomial: Monomial::new(d) }
        })
        .collect()
}

fn descend(j: usize, prev: usize, k: usize, degrees: &mut [u8], out: &mut Vec<Vec<u8>>) {
    if j == degrees.len() {
        out.push(degrees.to_vec());
        return;
    }
    for s in prev..=j.min(k) {
        degrees[s] += 1;
        descend(j + 1, s, k, degrees, out);
        degrees[s] -= 1;
    }
}

/// `(2n)! / (n! (n+1)!)`
pub fn catalan_count(n: usize) -> BigUint {
    factorial(2 * n) / (factorial(n) * factorial(n + 1))
}

/// `D(h) * prod a_i^{d_i}`.
pub fn evaluate_monomial<S: Scalar>(h: &WeightedMonomial, a: &SimplexPoint<S>) -> Result<S> {
    let degrees = h.monomial.degrees();
    if degrees.len() > a.coords().len() {
        return Err(domain(format!(
            "monomial in {} variables evaluated at a point with {} coordinates",
            degrees.len(),
            a.coords().len()
        )));
    }
    let product =
        degrees.iter().zip(a.coords()).filter(|(&d, _)| d > 0).fold(S::one(), |acc, (&d, c)| acc * c.powu(d as u32));
    Ok(S::from_biguint(&h.coefficient) * product)
}

/// `P[X >=_s a] = u^{-n} * sum_{h in H_n(n)} D(h) h(a)` for `X` uniform on the
/// simplex of `a`.
pub fn fosd_dominance_probability<S: Scalar>(a: &SimplexPoint<S>) -> Result<S> {
    let n = a.n();
    let family = enumerate_h(n, n)?;

    // powers[i][d] = a_i^d
    let powers: Vec<Vec<S>> = a.coords()[..n]
        .iter()
        .map(|c| {
            let mut row = Vec::with_capacity(n + 1);
            row.push(S::one());
            for d in 1..=n {
                row.push(row[d - 1].clone() * c.clone());
            }
            row
        })
        .collect();

    let terms = family.iter().map(|h| {
        let product = h
            .monomial
            .degrees()
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .fold(S::one(), |acc, (i, &d)| acc * powers[i][d as usize].clone());
        S::from_biguint(&h.coefficient) * product
    });
    let sum = S::sum_all(terms);
    Ok(sum / a.u().powu(n as u32))
}

/// FOSD comparability probability obtained by integrating the dominance
/// polynomial term by term against the uniform law, using the Dirichlet
/// moments `E[prod a_i^{d_i}] = u^n n! prod d_i! / (2n)!`.
///
/// Returns `2 * sum_h D(h) * n! prod d_i! / (2n)!`, which must equal `2/(n+1)`.
pub fn fosd_comparability_from_moments(n: usize) -> Result<BigRational> {
    let family = enumerate_h(n, n)?;
    let n_fact = factorial(n);
    let two_n_fact = factorial(2 * n);
    let mut total = BigUint::default();
    for h in family.iter() {
        let moment_numer = h.monomial.degrees().iter().fold(n_fact.clone(), |acc, &d| acc * factorial(d as usize));
        total += &h.coefficient * moment_numer;
    }
    Ok(BigRational::new((BigUint::from(2u32) * total).into(), two_n_fact.into()))
}
