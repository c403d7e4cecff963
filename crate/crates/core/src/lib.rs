//! Exact and Monte Carlo dominance and comparability probabilities on the
//! probability simplex under first order stochastic dominance (FOSD) and the
//! monotone likelihood ratio (MLR) order.
//!
//! Exact quantities are generic over [`Scalar`], so they run either in `f64`
//! or in exact [`num_rational::BigRational`] arithmetic. The [`montecarlo`]
//! module provides seeded, parallel estimators for each of them.
//!
//! ```
//! use num_rational::BigRational;
//! use stochorder::{fosd_dominance_probability, mlr_dominance_probability, SimplexPoint};
//!
//! let third = BigRational::new(1.into(), 3.into());
//! let a = SimplexPoint::from_coords(vec![third.clone(), third.clone(), third]).unwrap();
//! assert_eq!(fosd_dominance_probability(&a).unwrap().to_string(), "1/3");
//! assert_eq!(mlr_dominance_probability(&a).unwrap().value.to_string(), "1/6");
//! ```

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mlr;
pub mod monomial;
pub mod montecarlo;
pub mod orders;
pub mod scalar;
pub mod simplex;

pub use error::{Error, Result};
pub use mlr::{
    alternating_identity_residual, alternating_identity_terms, fosd_comparability_probability, knuth_power_sum,
    knuth_power_sum_expected, knuth_power_sum_terms, mlr_comparability_probability, mlr_dominance_probability,
    mlr_dominance_probability_restricted, mlr_dominance_probability_restricted_in_segment, mlr_integral_constant,
    relative_residual, segment_bounds, segment_index, MlrProbability, SegmentIndex,
};
pub use monomial::{
    catalan_count, enumerate_h, evaluate_monomial, fosd_comparability_from_moments, fosd_dominance_probability,
    Monomial, WeightedMonomial, MAX_EXACT_FOSD_N,
};
pub use montecarlo::{
    classify_grid, comparable_fraction, estimate_comparability, estimate_dominance, estimate_dominance_restricted,
    estimate_integral_mean, sample_uniform, EstimateResult, GridPoint, SamplerConfig,
};
pub use orders::{
    compare, fosd_bracket, fosd_leq, fosd_reduce, leq, mlr_leq, mlr_reduce, FosdReduction, MlrReduction, OrderKind,
    OrderRelation,
};
pub use scalar::{parse_rational, Scalar, ScalarMode};
pub use simplex::{simplex_volume, SimplexPoint, SimplexVolume};
