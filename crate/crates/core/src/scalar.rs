//! Scalar abstraction shared by every module.
//!
//! All formulas are written once, generically over [`Scalar`], and run either
//! in IEEE double precision (`f64`) or in exact arbitrary-precision rationals
//! ([`BigRational`]). A single computation never mixes the two.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used by every float-mode comparison.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Evaluation mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    #[serde(rename = "float")]
    Float64,
    #[serde(rename = "rational")]
    ExactRational,
}

impl Display for ScalarMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarMode::Float64 => f.write_str("float"),
            ScalarMode::ExactRational => f.write_str("rational"),
        }
    }
}

impl FromStr for ScalarMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" | "f64" => Ok(ScalarMode::Float64),
            "rational" | "exact" => Ok(ScalarMode::ExactRational),
            other => Err(Error::Parse { input: other.to_string(), reason: "expected `float` or `rational`".into() }),
        }
    }
}

/// Field of numbers the library computes in.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Send + Sync + 'static + Num + Signed + FromPrimitive + ToPrimitive
{
    const MODE: ScalarMode;

    /// Relative slack for inequality tests: `1e-12` for floats, zero when exact.
    fn tolerance() -> Self;

    fn from_biguint(v: &BigUint) -> Self;

    fn from_rational(v: &BigRational) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact rational value; fails only for non-finite floats.
    fn to_exact(&self) -> Result<BigRational>;

    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    /// Sums `terms`; float mode uses Neumaier compensation.
    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self;

    /// Textual form used in JSON: shortest round-trip decimal or `p/q`.
    fn to_repr(&self) -> String {
        self.to_string()
    }

    fn parse_repr(s: &str) -> Result<Self>;
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float64;

    fn tolerance() -> Self {
        FLOAT_TOLERANCE
    }

    fn from_biguint(v: &BigUint) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_rational(v: &BigRational) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn powu(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }

    fn to_exact(&self) -> Result<BigRational> {
        rational_from_f64(*self)
    }

    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let mut acc = NeumaierSum::default();
        for t in terms {
            acc += t;
        }
        acc.sum()
    }

    fn parse_repr(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('/') {
            return parse_rational(s).map(|r| r.to_f64().unwrap_or(f64::NAN));
        }
        s.parse::<f64>().map_err(|e| Error::Parse { input: s.to_string(), reason: e.to_string() })
    }
}

impl Scalar for BigRational {
    const MODE: ScalarMode = ScalarMode::ExactRational;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(v.clone()))
    }

    fn from_rational(v: &BigRational) -> Self {
        v.clone()
    }

    fn to_exact(&self) -> Result<BigRational> {
        Ok(self.clone())
    }

    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(BigRational::zero(), |acc, t| acc + t)
    }

    fn parse_repr(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

/// Parses `p/q`, an integer, or a finite decimal (optionally with exponent)
/// into an exact rational.
pub fn parse_rational(input: &str) -> Result<BigRational> {
    let s = input.trim();
    let err = |reason: &str| Error::Parse { input: input.to_string(), reason: reason.to_string() };
    if s.is_empty() {
        return Err(err("empty"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err("bad numerator"))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err("bad denominator"))?;
        if q.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e = s[pos + 1..].parse::<i32>().map_err(|_| err("bad exponent"))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err("not a number"));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| err("not a number"))?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not finite")))
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Kahan-Babuska-Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn sum(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        let t = self.sum + rhs;
        if self.sum.abs() >= rhs.abs() {
            self.compensation += (self.sum - t) + rhs;
        } else {
            self.compensation += (rhs - t) + self.sum;
        }
        self.sum = t;
    }
}

impl Add for NeumaierSum {
    type Output = NeumaierSum;

    fn add(mut self, rhs: Self) -> Self::Output {
        self += rhs.sum;
        self += rhs.compensation;
        self
    }
}
