//! Seeded Monte Carlo estimators for every probability the exact modules
//! compute, and the lattice classification behind the comparability figures.
//!
//! Uniform points on the simplex of size `u` are drawn as `n + 1` independent
//! standard exponentials rescaled to sum to `u`. The sample budget is split
//! across workers; worker `w` draws from ChaCha8 seeded with `seed` on stream
//! `w`, keeps a private accumulator, and the partial results are reduced in
//! worker order. A fixed `(seed, workers, samples)` therefore reproduces every
//! estimate bit for bit.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::orders::{self, OrderKind, OrderRelation};
use crate::scalar::{NeumaierSum, Scalar, FLOAT_TOLERANCE};
use crate::simplex::{lattice_point_count, SimplexPoint};

/// Identifier of the generator and substream scheme, emitted with results.
pub const GENERATOR_ID: &str = "chacha8-seed_from_u64-stream_per_worker";

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

/// Largest lattice accepted by [`classify_grid`].
pub const MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub u: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SamplerConfig {
    pub fn new(n: usize, samples: u64, seed: u64) -> Self {
        Self { n, u: 1.0, samples, seed, workers: 1 }
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(domain("n must be at least 1"));
        }
        if !(self.u > 0.0 && self.u.is_finite()) {
            return Err(domain(format!("size u must be positive and finite, got {}", self.u)));
        }
        if self.samples < 1 {
            return Err(domain("samples must be at least 1"));
        }
        if self.workers < 1 {
            return Err(domain("workers must be at least 1"));
        }
        Ok(())
    }

    /// Samples handled by worker `w`; the first `samples % workers` workers
    /// take one extra.
    pub fn worker_share(&self, w: usize) -> u64 {
        let workers = self.workers as u64;
        let base = self.samples / workers;
        base + u64::from((w as u64) < self.samples % workers)
    }

    /// The independent substream owned by worker `w`.
    pub fn worker_rng(&self, w: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(w as u64);
        rng
    }

    fn check_point(&self, a: &SimplexPoint<f64>) -> Result<()> {
        if a.n() != self.n {
            return Err(domain(format!("point has n = {}, sampler has n = {}", a.n(), self.n)));
        }
        if (a.u() - self.u).abs() > FLOAT_TOLERANCE * self.u {
            return Err(domain(format!("point has u = {}, sampler has u = {}", a.u(), self.u)));
        }
        Ok(())
    }
}

/// A Monte Carlo estimate with its standard error and 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub std_error: f64,
    pub ci95: [f64; 2],
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    #[serde(rename = "generator-id")]
    pub generator_id: String,
    pub wall_time_ms: u64,
}

impl EstimateResult {
    fn build(estimate: f64, std_error: f64, upper: f64, config: &SamplerConfig, started: Instant) -> Self {
        let low = (estimate - Z95 * std_error).max(0.0);
        let high = (estimate + Z95 * std_error).min(upper);
        Self {
            estimate,
            std_error,
            ci95: [low, high],
            samples: config.samples,
            seed: config.seed,
            workers: config.workers,
            generator_id: GENERATOR_ID.to_string(),
            wall_time_ms: started.elapsed().as_millis() as u64,
        }
    }

    /// Bernoulli estimate `hits / N` with `std_error = sqrt(p(1-p)/N)`.
    fn from_hits(hits: u64, config: &SamplerConfig, started: Instant) -> Self {
        let total = config.samples as f64;
        let p = hits as f64 / total;
        let se = (p * (1.0 - p) / total).sqrt();
        Self::build(p, se, 1.0, config, started)
    }

    /// Number of successes behind an indicator estimate.
    pub fn hits(&self) -> u64 {
        (self.estimate * self.samples as f64).round() as u64
    }

    /// `(estimate - exact) / std_error`; `None` when the standard error is
    /// zero and the estimate differs from `exact`.
    pub fn z_score(&self, exact: f64) -> Option<f64> {
        let diff = self.estimate - exact;
        if self.std_error > 0.0 {
            Some(diff / self.std_error)
        } else if diff == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }

    /// `|estimate - exact| <= k * std_error`.
    pub fn agrees_with(&self, exact: f64, k: f64) -> bool {
        (self.estimate - exact).abs() <= k * self.std_error
    }
}

/// Fills `buf` with a uniform point of the simplex of size `u`; the last
/// coordinate absorbs rounding exactly as [`SimplexPoint::new`] does.
#[inline]
pub(crate) fn fill_uniform<R: Rng + ?Sized>(buf: &mut [f64], u: f64, rng: &mut R) {
    let mut total = 0.0;
    for x in buf.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        *x = e;
        total += e;
    }
    let scale = u / total;
    let last = buf.len() - 1;
    let mut head = 0.0;
    for x in buf[..last].iter_mut() {
        *x *= scale;
        head += *x;
    }
    buf[last] = (u - head).max(0.0);
}

/// Draws one uniform point of the configured simplex from `rng`.
pub fn sample_uniform<R: Rng + ?Sized>(config: &SamplerConfig, rng: &mut R) -> SimplexPoint<f64> {
    let mut coords = vec![0.0; config.n + 1];
    fill_uniform(&mut coords, config.u, rng);
    SimplexPoint::new_unchecked(coords, config.u)
}

/// Runs `per_worker(w, share, rng)` on every worker in parallel and returns
/// the partial results in worker order.
fn run_workers<A, F>(config: &SamplerConfig, per_worker: F) -> Vec<A>
where
    A: Send,
    F: Fn(usize, u64, &mut ChaCha8Rng) -> A + Sync,
{
    (0..config.workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = config.worker_rng(w);
            per_worker(w, config.worker_share(w), &mut rng)
        })
        .collect()
}

fn count_hits<F>(config: &SamplerConfig, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> bool + Sync,
{
    run_workers(config, |_, share, rng| {
        let mut scratch = vec![0.0; 2 * (config.n + 1)];
        (0..share).filter(|_| trial(rng, &mut scratch)).count() as u64
    })
    .into_iter()
    .sum()
}

fn dominance_trial(a: &[f64], order: OrderKind, u: f64) -> impl Fn(&mut ChaCha8Rng, &mut [f64]) -> bool + Sync + '_ {
    let slack = orders::slack_for(order, &u);
    move |rng, scratch| {
        let x = &mut scratch[..a.len()];
        fill_uniform(x, u, rng);
        match order {
            OrderKind::Fosd => orders::fosd_leq_f64(a, x, slack),
            OrderKind::Mlr => orders::mlr_leq_f64(a, x, slack),
        }
    }
}

/// Estimates `P[X >= a]` under `order`.
pub fn estimate_dominance(a: &SimplexPoint<f64>, order: OrderKind, config: &SamplerConfig) -> Result<EstimateResult> {
    config.validate()?;
    config.check_point(a)?;
    let started = Instant::now();
    let hits = count_hits(config, dominance_trial(a.coords(), order, config.u));
    Ok(EstimateResult::from_hits(hits, config, started))
}

/// Estimates `P[X >=_r a, x_n <= b]`. Uses the same draws as
/// [`estimate_dominance`] with [`OrderKind::Mlr`].
pub fn estimate_dominance_restricted(a: &SimplexPoint<f64>, b: f64, config: &SamplerConfig) -> Result<EstimateResult> {
    config.validate()?;
    config.check_point(a)?;
    let started = Instant::now();
    let n = config.n;
    let dominates = dominance_trial(a.coords(), OrderKind::Mlr, config.u);
    let hits = count_hits(config, |rng, scratch| {
        let hit = dominates(rng, scratch);
        hit && scratch[n] <= b
    });
    Ok(EstimateResult::from_hits(hits, config, started))
}

/// Estimates the probability that two independent uniform points are
/// comparable. Each trial draws `X_1` then `X_2` from one stream.
pub fn estimate_comparability(order: OrderKind, config: &SamplerConfig) -> Result<EstimateResult> {
    config.validate()?;
    let started = Instant::now();
    let (len, u) = (config.n + 1, config.u);
    let slack = orders::slack_for(order, &u);
    let leq = match order {
        OrderKind::Fosd => orders::fosd_leq_f64,
        OrderKind::Mlr => orders::mlr_leq_f64,
    };
    let hits = count_hits(config, |rng, scratch| {
        let (x1, x2) = scratch.split_at_mut(len);
        fill_uniform(x1, u, rng);
        fill_uniform(x2, u, rng);
        let forward = leq(x1, x2, slack);
        let backward = leq(x2, x1, slack);
        orders::relation_from(forward, backward, || orders::coords_equal(x1, x2, &u)).is_comparable()
    });
    Ok(EstimateResult::from_hits(hits, config, started))
}

/// `prod_{i=1}^n a_i / (a_i + ... + a_n)` for `a` on the solid simplex.
fn integrand(a: &[f64]) -> f64 {
    let mut tail = 0.0;
    let mut product = 1.0;
    for &x in a.iter().rev() {
        tail += x;
        if tail <= 0.0 {
            return 0.0;
        }
        product *= x / tail;
    }
    product
}

/// Mean of `prod_{i=1}^n a_i / (a_i + ... + a_n)` under the uniform law on the
/// solid simplex `{a >= 0, a_1 + ... + a_n <= u}`; its expectation is `1/n!`.
///
/// Solid-simplex points are the first `n` coordinates of a uniform point of
/// the `n`-simplex.
pub fn estimate_integral_mean(n: usize, u: f64, config: &SamplerConfig) -> Result<EstimateResult> {
    config.validate()?;
    if config.n != n || (config.u - u).abs() > FLOAT_TOLERANCE * u {
        return Err(domain("sampler configuration does not match (n, u)"));
    }
    let started = Instant::now();
    let partials = run_workers(config, |_, share, rng| {
        let mut x = vec![0.0; n + 1];
        let (mut sum, mut sum_sq) = (NeumaierSum::default(), NeumaierSum::default());
        for _ in 0..share {
            fill_uniform(&mut x, u, rng);
            let v = integrand(&x[..n]);
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let (sum, sum_sq) = partials
        .into_iter()
        .fold((NeumaierSum::default(), NeumaierSum::default()), |(s, q), (ps, pq)| (s + ps, q + pq));
    let total = config.samples as f64;
    let mean = sum.sum() / total;
    let variance =
        if config.samples > 1 { ((sum_sq.sum() - total * mean * mean) / (total - 1.0)).max(0.0) } else { 0.0 };
    Ok(EstimateResult::build(mean, (variance / total).sqrt(), 1.0, config, started))
}

/// A lattice point and its relation to the reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub point: SimplexPoint<BigRational>,
    /// Relation of `point` to the reference: `Less` means `point <= a`.
    pub relation: OrderRelation,
}

/// Classifies every lattice point `(i_0, ..., i_n) * u / resolution`,
/// `sum i_j = resolution`, against `a`, in exact arithmetic.
///
/// Points come in lexicographic order of `(i_0, ..., i_n)`. A float `a` is
/// converted exactly and `u` becomes the exact sum of its coordinates.
pub fn classify_grid<S: Scalar>(a: &SimplexPoint<S>, resolution: u64, order: OrderKind) -> Result<Vec<GridPoint>> {
    if resolution < 1 {
        return Err(domain("resolution must be at least 1"));
    }
    let n = a.n();
    let count = lattice_point_count(n, resolution);
    if count > MAX_GRID_POINTS {
        return Err(Error::Size(format!("{count} lattice points exceed the limit of {MAX_GRID_POINTS}")));
    }
    let exact: Vec<BigRational> = a.coords().iter().map(Scalar::to_exact).collect::<Result<_>>()?;
    let reference = SimplexPoint::from_coords(exact)?;
    let step = reference.u().clone() / BigRational::from_integer(resolution.into());

    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0u64; n + 1];
    idx[n] = resolution;
    loop {
        let coords: Vec<BigRational> =
            idx.iter().map(|&i| BigRational::from_integer(i.into()) * step.clone()).collect();
        let point = SimplexPoint::new_unchecked(coords, reference.u().clone());
        let relation = orders::compare(&point, &reference, order)?;
        out.push(GridPoint { point, relation });
        if !next_composition(&mut idx) {
            break;
        }
    }
    Ok(out)
}

/// Advances `idx` to the next composition of its sum in lexicographic order.
fn next_composition(idx: &mut [u64]) -> bool {
    let last = idx.len() - 1;
    // rightmost position before the tail that can be incremented
    let Some(p) = (0..last).rev().find(|&p| idx[p + 1..].iter().any(|&v| v > 0)) else {
        return false;
    };
    let rest: u64 = idx[p + 1..].iter().sum();
    idx[p] += 1;
    for v in idx[p + 1..].iter_mut() {
        *v = 0;
    }
    idx[last] = rest - 1;
    true
}

/// Share of grid points comparable to the reference.
pub fn comparable_fraction(grid: &[GridPoint]) -> f64 {
    if grid.is_empty() {
        return 0.0;
    }
    let hits = grid.iter().filter(|g| g.relation.is_comparable()).count();
    hits as f64 / grid.len() as f64
}

/// Exact share as a rational, for reports.
pub fn comparable_fraction_exact(grid: &[GridPoint]) -> BigRational {
    let hits = grid.iter().filter(|g| g.relation.is_comparable()).count();
    if grid.is_empty() {
        return BigRational::zero();
    }
    BigRational::new(hits.into(), grid.len().into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, samples: u64, seed: u64) -> SamplerConfig {
        SamplerConfig::new(n, samples, seed).with_workers(4)
    }

    #[test]
    fn samples_lie_on_the_simplex() {
        let config = cfg(4, 1, 9).with_u(2.5);
        let mut rng = config.worker_rng(0);
        for _ in 0..1000 {
            let p = sample_uniform(&config, &mut rng);
            assert!(p.coords().iter().all(|&c| c >= 0.0));
            let sum: f64 = p.coords().iter().sum();
            assert!((sum - 2.5).abs() < 1e-12);
            assert!(SimplexPoint::new(p.coords().to_vec(), 2.5).is_ok());
        }
    }

    #[test]
    fn coordinate_means_are_exchangeable() {
        let config = cfg(2, 1, 3);
        let mut rng = config.worker_rng(0);
        let trials = 1_000_000;
        let mut sums = [0.0f64; 3];
        let mut sq = [0.0f64; 3];
        for _ in 0..trials {
            let p = sample_uniform(&config, &mut rng);
            for (i, c) in p.coords().iter().enumerate() {
                sums[i] += c;
                sq[i] += c * c;
            }
        }
        for i in 0..3 {
            let mean = sums[i] / trials as f64;
            let var = sq[i] / trials as f64 - mean * mean;
            let se = (var / trials as f64).sqrt();
            assert!((mean - 1.0 / 3.0).abs() <= 4.0 * se, "coordinate {i}: {mean}");
        }
    }

    #[test]
    fn segment_marginal_is_uniform() {
        let config = cfg(1, 1, 5);
        let mut rng = config.worker_rng(0);
        let trials = 200_000;
        for t in [0.1, 0.5, 0.9] {
            let hits = (0..trials).filter(|_| sample_uniform(&config, &mut rng).coord(1) >= &t).count();
            let p = hits as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((p - (1.0 - t)).abs() <= 4.0 * se, "t = {t}: {p}");
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let config = cfg(3, 1, 42);
        let a: Vec<f64> =
            (0..5).flat_map(|_| sample_uniform(&config, &mut config.worker_rng(0)).into_coords()).collect();
        let b: Vec<f64> =
            (0..5).flat_map(|_| sample_uniform(&config, &mut config.worker_rng(0)).into_coords()).collect();
        assert_eq!(a, b);
        let c = sample_uniform(&config, &mut config.worker_rng(1));
        assert_ne!(c.coords(), &a[..4]);
    }

    #[test]
    fn shares_cover_the_budget() {
        let config = SamplerConfig::new(2, 10, 0).with_workers(4);
        let shares: Vec<u64> = (0..4).map(|w| config.worker_share(w)).collect();
        assert_eq!(shares, vec![3, 3, 2, 2]);
        let config = SamplerConfig::new(2, 2, 0).with_workers(4);
        assert_eq!((0..4).map(|w| config.worker_share(w)).sum::<u64>(), 2);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(SamplerConfig::new(0, 10, 0).validate().is_err());
        assert!(SamplerConfig::new(2, 0, 0).validate().is_err());
        assert!(SamplerConfig::new(2, 10, 0).with_workers(0).validate().is_err());
        assert!(SamplerConfig::new(2, 10, 0).with_u(-1.0).validate().is_err());
        let a = SimplexPoint::new(vec![0.5, 0.5], 1.0).unwrap();
        assert!(estimate_dominance(&a, OrderKind::Fosd, &cfg(2, 10, 0)).is_err());
    }

    #[test]
    fn bottom_vertex_is_always_dominated() {
        let a = SimplexPoint::new(vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let r = estimate_dominance(&a, OrderKind::Fosd, &cfg(2, 10_000, 1)).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.ci95, [1.0, 1.0]);
    }

    #[test]
    fn segment_pairs_are_always_comparable() {
        for order in [OrderKind::Fosd, OrderKind::Mlr] {
            let r = estimate_comparability(order, &cfg(1, 1000, 1)).unwrap();
            assert_eq!(r.estimate, 1.0);
        }
    }

    #[test]
    fn restricted_at_u_reuses_the_same_draws() {
        let a = SimplexPoint::new(vec![0.2, 0.5, 0.3], 1.0).unwrap();
        let config = cfg(2, 50_000, 11);
        let full = estimate_dominance(&a, OrderKind::Mlr, &config).unwrap();
        let restricted = estimate_dominance_restricted(&a, 1.0, &config).unwrap();
        assert_eq!(full.estimate, restricted.estimate);
        let empty = estimate_dominance_restricted(&a, 0.3, &config).unwrap();
        assert!(empty.estimate <= 1e-4);
    }

    #[test]
    fn bernoulli_variance_identity() {
        let a = SimplexPoint::new(vec![0.3, 0.3, 0.4], 1.0).unwrap();
        let config = cfg(2, 100_000, 2);
        let r = estimate_dominance(&a, OrderKind::Fosd, &config).unwrap();
        let p = r.estimate;
        assert!((r.std_error.powi(2) * config.samples as f64 - p * (1.0 - p)).abs() < 1e-12);
        assert!((r.ci95[0] - (p - Z95 * r.std_error)).abs() < 1e-15);
        assert!((r.ci95[1] - (p + Z95 * r.std_error)).abs() < 1e-15);
    }

    #[test]
    fn mlr_comparable_pairs_are_fosd_comparable() {
        for n in 2..=5 {
            let config = cfg(n, 200_000, 8);
            let fosd = estimate_comparability(OrderKind::Fosd, &config).unwrap();
            let mlr = estimate_comparability(OrderKind::Mlr, &config).unwrap();
            assert!(mlr.hits() <= fosd.hits());
            let mut rng = config.worker_rng(0);
            let (mut x, mut y) = (vec![0.0; n + 1], vec![0.0; n + 1]);
            for _ in 0..50_000 {
                fill_uniform(&mut x, 1.0, &mut rng);
                fill_uniform(&mut y, 1.0, &mut rng);
                if orders::mlr_leq_f64(&x, &y, 1e-12) {
                    assert!(orders::fosd_leq_f64(&x, &y, 1e-12));
                }
            }
        }
    }

    #[test]
    fn estimates_are_reproducible() {
        let config = cfg(3, 20_000, 77);
        let mut r1 = estimate_comparability(OrderKind::Fosd, &config).unwrap();
        let mut r2 = estimate_comparability(OrderKind::Fosd, &config).unwrap();
        r1.wall_time_ms = 0;
        r2.wall_time_ms = 0;
        assert_eq!(r1, r2);
    }

    #[test]
    fn integral_mean_for_segment_is_one() {
        let r = estimate_integral_mean(1, 1.0, &cfg(1, 1000, 4)).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-15);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn json_field_names() {
        let r = estimate_comparability(OrderKind::Fosd, &cfg(1, 10, 1)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["estimate", "std_error", "ci95", "samples", "seed", "workers", "generator-id", "wall_time_ms"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn grid_of_resolution_one_is_the_vertices() {
        let a = SimplexPoint::new(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0).unwrap();
        let grid = classify_grid(&a, 1, OrderKind::Fosd).unwrap();
        assert_eq!(grid.len(), 3);
        let rel: Vec<_> = grid.iter().map(|g| g.relation).collect();
        // (0,0,1) dominates, (1,0,0) is dominated, (0,1,0) is incomparable
        assert_eq!(rel, vec![OrderRelation::Greater, OrderRelation::Incomparable, OrderRelation::Less]);
    }

    #[test]
    fn grid_enumerates_compositions_in_order() {
        let mut idx = vec![0, 0, 2];
        let mut seen = vec![idx.clone()];
        while next_composition(&mut idx) {
            seen.push(idx.clone());
        }
        assert_eq!(
            seen,
            vec![vec![0, 0, 2], vec![0, 1, 1], vec![0, 2, 0], vec![1, 0, 1], vec![1, 1, 0], vec![2, 0, 0]]
        );
    }

    #[test]
    fn grid_against_bottom_vertex_is_all_comparable() {
        let a = SimplexPoint::new(vec![1.0, 0.0, 0.0], 1.0).unwrap();
        let grid = classify_grid(&a, 10, OrderKind::Fosd).unwrap();
        assert_eq!(grid.len(), 66);
        assert_eq!(comparable_fraction(&grid), 1.0);
    }

    #[test]
    fn grid_size_limit() {
        let a = SimplexPoint::new(vec![0.25; 4], 1.0).unwrap();
        assert!(matches!(classify_grid(&a, 1000, OrderKind::Fosd), Err(Error::Size(_))));
        assert!(classify_grid(&a, 0, OrderKind::Fosd).is_err());
    }
}
