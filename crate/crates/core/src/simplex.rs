//! Points of the scaled probability simplex and the primitives every other
//! module builds on.

use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::scalar::{factorial, rational_from_f64, Scalar};

/// A point `(x_0, ..., x_n)` with nonnegative coordinates summing to `u`.
///
/// Construction validates the point; every other operation may assume it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<S> {
    coords: Vec<S>,
    u: S,
}

impl<S: Scalar> SimplexPoint<S> {
    /// Builds a point of size `u`.
    ///
    /// In float mode the coordinate sum must match `u` within `1e-12 * u`;
    /// the last coordinate is then reset to absorb the rounding residue.
    pub fn new(coords: Vec<S>, u: S) -> Result<Self> {
        if coords.len() < 2 {
            return Err(domain(format!("a simplex point needs at least 2 coordinates, got {}", coords.len())));
        }
        if !(u > S::zero()) {
            return Err(domain(format!("size u must be positive, got {u}")));
        }
        if let Some((i, c)) = coords.iter().enumerate().find(|(_, c)| !(**c >= S::zero())) {
            return Err(domain(format!("coordinate {i} is negative: {c}")));
        }
        let sum = S::sum_all(coords.iter().cloned());
        let slack = S::tolerance() * u.clone();
        if (sum.clone() - u.clone()).abs() > slack {
            return Err(domain(format!("coordinates sum to {sum}, expected {u}")));
        }
        let mut coords = coords;
        if S::MODE == crate::ScalarMode::Float64 {
            let n = coords.len() - 1;
            let head = S::sum_all(coords[..n].iter().cloned());
            let last = u.clone() - head;
            coords[n] = if last < S::zero() { S::zero() } else { last };
        }
        Ok(Self { coords, u })
    }

    /// Builds a point whose size is the sum of its coordinates.
    pub fn from_coords(coords: Vec<S>) -> Result<Self> {
        let u = S::sum_all(coords.iter().cloned());
        Self::new(coords, u)
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(coords: Vec<S>, u: S) -> Self {
        debug_assert!(coords.len() >= 2);
        Self { coords, u }
    }

    /// Dimension index `n`; the point has `n + 1` coordinates.
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn u(&self) -> &S {
        &self.u
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &S {
        &self.coords[i]
    }

    pub fn into_coords(self) -> Vec<S> {
        self.coords
    }

    /// `x_k + ... + x_n`.
    pub fn tail_sum(&self, k: usize) -> Result<S> {
        if k > self.n() {
            return Err(Error::Index { index: k, max: self.n() });
        }
        if k == 0 {
            return Ok(self.u.clone());
        }
        Ok(S::sum_all(self.coords[k..].iter().cloned()))
    }

    /// All tail sums, index `k` holding `x_k + ... + x_n`; entry 0 is `u`.
    pub fn tail_sums(&self) -> Vec<S> {
        tail_sums(&self.coords, &self.u)
    }

    /// True when every coordinate is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|c| *c > S::zero())
    }

    /// Drops the last coordinate: `(x_0, ..., x_{n-1})` as a point of size
    /// `u - x_n`.
    pub fn head(&self) -> Result<SimplexPoint<S>> {
        let n = self.n();
        if n < 2 {
            return Err(domain("dropping a coordinate would leave a 0-simplex"));
        }
        let rest = self.u.clone() - self.coords[n].clone();
        if !(rest > S::zero()) {
            return Err(Error::Degenerate(format!("last coordinate {} carries the whole mass", self.coords[n])));
        }
        Ok(Self::new_unchecked(self.coords[..n].to_vec(), rest))
    }

    pub fn to_f64(&self) -> SimplexPoint<f64> {
        SimplexPoint { coords: self.coords.iter().map(Scalar::to_f64_lossy).collect(), u: self.u.to_f64_lossy() }
    }
}

impl SimplexPoint<f64> {
    /// Exact rational image of a float point; the size becomes the exact sum
    /// of the converted coordinates.
    pub fn to_rational(&self) -> Result<SimplexPoint<BigRational>> {
        let coords = self.coords.iter().map(|&c| rational_from_f64(c)).collect::<Result<Vec<_>>>()?;
        SimplexPoint::from_coords(coords)
    }
}

pub(crate) fn tail_sums<S: Scalar>(coords: &[S], u: &S) -> Vec<S> {
    let mut out = vec![S::zero(); coords.len()];
    let mut acc = S::zero();
    for k in (1..coords.len()).rev() {
        acc = acc + coords[k].clone();
        out[k] = acc.clone();
    }
    out[0] = u.clone();
    out
}

impl<S: Scalar> fmt::Display for SimplexPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    coords: Vec<String>,
    u: String,
}

impl<S: Scalar> Serialize for SimplexPoint<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        PointRepr { coords: self.coords.iter().map(Scalar::to_repr).collect(), u: self.u.to_repr() }
            .serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for SimplexPoint<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PointRepr::deserialize(deserializer)?;
        let coords =
            repr.coords.iter().map(|c| S::parse_repr(c)).collect::<Result<Vec<_>>>().map_err(D::Error::custom)?;
        let u = S::parse_repr(&repr.u).map_err(D::Error::custom)?;
        SimplexPoint::new(coords, u).map_err(D::Error::custom)
    }
}

/// Volume of the `n`-simplex of size `u`, kept as `scale * sqrt(root)` so
/// that ratios of volumes stay exact in rational mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVolume<S> {
    /// `u^n / n!`
    pub scale: S,
    /// `n + 1`, the integer under the square root.
    pub root: u64,
}

impl<S: Scalar> SimplexVolume<S> {
    pub fn value(&self) -> f64 {
        self.scale.to_f64_lossy() * (self.root as f64).sqrt()
    }
}

/// `sqrt(n+1) * u^n / n!`
pub fn simplex_volume<S: Scalar>(n: usize, u: &S) -> Result<SimplexVolume<S>> {
    if n < 1 {
        return Err(domain("simplex dimension must be at least 1"));
    }
    if !(*u > S::zero()) {
        return Err(domain(format!("size u must be positive, got {u}")));
    }
    let n_fact = S::from_biguint(&factorial(n));
    Ok(SimplexVolume { scale: u.powu(n as u32) / n_fact, root: n as u64 + 1 })
}

/// Number of lattice points `(i_0, ..., i_n)` with `sum i_j = resolution`,
/// i.e. `C(resolution + n, n)`, saturating at `u64::MAX`.
pub fn lattice_point_count(n: usize, resolution: u64) -> u64 {
    let mut count = num_bigint::BigUint::from(1u32);
    for j in 1..=n as u64 {
        count = count * (resolution + j) / j;
    }
    if count.is_zero() {
        return 0;
    }
    count.to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn volume_values() {
        let v = simplex_volume(1, &1.0).unwrap();
        assert!((v.value() - 2f64.sqrt()).abs() < 1e-15);
        let v = simplex_volume(2, &1.0).unwrap();
        assert!((v.value() - 0.866_025_403_784_438_6).abs() < 1e-15);
        let v = simplex_volume(2, &2.0).unwrap();
        assert!((v.value() - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn volume_ratio_is_exact_power() {
        for n in 1..8 {
            let u = q(7, 3);
            let big = simplex_volume(n, &u).unwrap();
            let unit = simplex_volume(n, &BigRational::one()).unwrap();
            assert_eq!(big.root, unit.root);
            assert_eq!(big.scale / unit.scale, u.powu(n as u32));
        }
    }

    #[test]
    fn volume_rejects_bad_input() {
        assert!(simplex_volume(0, &1.0).is_err());
        assert!(simplex_volume(2, &0.0).is_err());
        assert!(simplex_volume(2, &-1.0).is_err());
    }

    #[test]
    fn tail_sum_examples() {
        let a = SimplexPoint::new(vec![0.2, 0.3, 0.5], 1.0).unwrap();
        assert!((a.tail_sum(1).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(a.tail_sum(0).unwrap(), 1.0);
        assert!((a.tail_sum(2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(a.tail_sum(3), Err(Error::Index { index: 3, max: 2 }));
    }

    #[test]
    fn construction_validates() {
        assert!(SimplexPoint::new(vec![1.0], 1.0).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.5], 0.0).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1], 1.0).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.6], 1.0).is_err());
        assert!(SimplexPoint::new(vec![f64::NAN, 1.0], 1.0).is_err());
        assert!(SimplexPoint::new(vec![q(1, 3), q(2, 3)], BigRational::one()).is_ok());
        assert!(SimplexPoint::new(vec![q(1, 3), q(1, 3)], BigRational::one()).is_err());
    }

    #[test]
    fn float_construction_absorbs_rounding_into_last_coordinate() {
        let third = 1.0 / 3.0;
        let p = SimplexPoint::new(vec![third, third, third + 1e-14], 1.0).unwrap();
        assert_eq!(p.coord(2), &(1.0 - (third + third)));
    }

    #[test]
    fn serializes_as_strings() {
        let p = SimplexPoint::new(vec![q(1, 3), q(2, 3)], BigRational::one()).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"coords":["1/3","2/3"],"u":"1"}"#);
        let back: SimplexPoint<BigRational> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);

        let f = SimplexPoint::new(vec![0.25, 0.75], 1.0).unwrap();
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"coords":["0.25","0.75"],"u":"1"}"#);
        assert!(serde_json::from_str::<SimplexPoint<f64>>(r#"{"coords":["0.5","0.6"],"u":"1"}"#).is_err());
    }

    #[test]
    fn to_rational_is_exact() {
        let f = SimplexPoint::new(vec![0.25, 0.75], 1.0).unwrap();
        let r = f.to_rational().unwrap();
        assert_eq!(r.coords(), &[q(1, 4), q(3, 4)]);
        assert_eq!(r.u(), &BigRational::one());
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_point_count(2, 300), 45_451);
        assert_eq!(lattice_point_count(2, 1), 3);
        assert_eq!(lattice_point_count(3, 1), 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tail_sum_nonincreasing(raw in prop::collection::vec(0.0f64..10.0, 2..10)) {
                prop_assume!(raw.iter().sum::<f64>() > 0.0);
                let p = SimplexPoint::from_coords(raw).unwrap();
                let tails = p.tail_sums();
                for k in 1..tails.len() {
                    prop_assert!(tails[k] <= tails[k - 1] + 1e-12 * p.u());
                    prop_assert!((tails[k] - p.tail_sum(k).unwrap()).abs() <= 1e-12 * p.u());
                }
            }
        }
    }
}
