//! Subcommand implementations. Each returns an [`Outcome`] holding every
//! rendering of its result; the caller picks one according to `--format`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use stochorder::montecarlo::comparable_fraction_exact;
use stochorder::{
    alternating_identity_residual, alternating_identity_terms, catalan_count, classify_grid, comparable_fraction,
    compare, enumerate_h, estimate_comparability, estimate_dominance, estimate_dominance_restricted,
    fosd_comparability_probability, fosd_dominance_probability, knuth_power_sum, knuth_power_sum_expected,
    knuth_power_sum_terms, mlr_comparability_probability, mlr_dominance_probability,
    mlr_dominance_probability_restricted, parse_rational, relative_residual, segment_index, EstimateResult, OrderKind,
    OrderRelation, SamplerConfig, Scalar, ScalarMode, SimplexPoint,
};

use crate::error::CliError;
use crate::report::Report;

/// Largest relative residual accepted for float-mode identity checks.
pub const FLOAT_IDENTITY_THRESHOLD: f64 = 1e-10;

/// Settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Context {
    /// Explicit `--mode`; `None` means "decide from the input".
    pub mode: Option<ScalarMode>,
    pub u: BigRational,
}

impl Context {
    pub fn new(mode: Option<ScalarMode>, u: &str) -> Result<Self, CliError> {
        let u = parse_rational(u).map_err(|e| CliError::Input(format!("--u: {e}")))?;
        if !u.is_positive() {
            return Err(CliError::Input(format!("--u must be positive, got {u}")));
        }
        Ok(Self { mode, u })
    }

    /// Explicit mode, else exact when any input is written as a fraction.
    fn resolve_mode(&self, inputs: &[Option<&str>]) -> ScalarMode {
        self.mode.unwrap_or_else(|| {
            if inputs.iter().flatten().any(|s| s.contains('/')) {
                ScalarMode::ExactRational
            } else {
                ScalarMode::Float64
            }
        })
    }

    fn base_parameters(&self, mode: ScalarMode) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert("mode".to_string(), mode.to_string());
        p.insert("u".to_string(), self.u.to_string());
        p
    }
}

/// Everything a subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub table: String,
    pub csv: String,
    /// Short status line, shown beside CSV output.
    pub summary: Option<String>,
    /// Set when a verification step failed (exit code 4).
    pub failure: Option<String>,
}

/// Formats a float with 17 significant digits, in positional notation unless
/// the magnitude is extreme.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.16}", 0.0);
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

fn show<S: Scalar>(v: &S) -> String {
    match S::MODE {
        ScalarMode::Float64 => sig17(v.to_f64_lossy()),
        ScalarMode::ExactRational => v.to_repr(),
    }
}

fn show_rational(v: &BigRational, mode: ScalarMode) -> String {
    match mode {
        ScalarMode::Float64 => sig17(v.to_f64().unwrap_or(f64::NAN)),
        ScalarMode::ExactRational => v.to_string(),
    }
}

fn parse_components(flag: &str, text: &str) -> Result<Vec<BigRational>, CliError> {
    text.split(',').map(|c| parse_rational(c).map_err(|e| CliError::Input(format!("{flag}: {e}")))).collect()
}

fn parse_scalar(flag: &str, text: &str) -> Result<BigRational, CliError> {
    parse_rational(text).map_err(|e| CliError::Input(format!("{flag}: {e}")))
}

fn check_dimension(coords: &[BigRational], n: Option<usize>) -> Result<(), CliError> {
    match n {
        Some(n) if coords.len() != n + 1 => {
            Err(CliError::Input(format!("--n {n} needs {} coordinates, got {}", n + 1, coords.len())))
        }
        _ => Ok(()),
    }
}

fn build_point<S: Scalar>(coords: &[BigRational], u: &BigRational) -> Result<SimplexPoint<S>, CliError> {
    let coords = coords.iter().map(S::from_rational).collect();
    SimplexPoint::new(coords, S::from_rational(u)).map_err(|e| CliError::Input(format!("--point: {e}")))
}

fn csv_text(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// A closed-form value in the active mode.
struct ExactValue {
    text: String,
    float: f64,
    detail: Value,
}

fn exact_in<S: Scalar>(
    order: OrderKind,
    coords: &[BigRational],
    u: &BigRational,
    b: Option<&BigRational>,
) -> Result<ExactValue, CliError> {
    let a = build_point::<S>(coords, u)?;
    let (value, detail) = match (order, b) {
        (OrderKind::Fosd, _) => (fosd_dominance_probability(&a)?, json!({})),
        (OrderKind::Mlr, None) => {
            let p = mlr_dominance_probability(&a)?;
            (p.value, json!({ "degenerate": p.degenerate }))
        }
        (OrderKind::Mlr, Some(b)) => {
            let b = S::from_rational(b);
            let value = mlr_dominance_probability_restricted(&a, &b)?;
            let m = segment_index(&a, &b).ok().map(|s| s.m);
            (value, json!({ "b": show(&b), "segment": m }))
        }
    };
    Ok(ExactValue { text: show(&value), float: value.to_f64_lossy(), detail })
}

fn exact_dispatch(
    mode: ScalarMode,
    order: OrderKind,
    coords: &[BigRational],
    u: &BigRational,
    b: Option<&BigRational>,
) -> Result<ExactValue, CliError> {
    match mode {
        ScalarMode::Float64 => exact_in::<f64>(order, coords, u, b),
        ScalarMode::ExactRational => exact_in::<BigRational>(order, coords, u, b),
    }
}

/// `P[X >= a]` (optionally restricted to `x_n <= b`) in closed form.
pub fn exact(
    ctx: &Context,
    order: OrderKind,
    point: &str,
    n: Option<usize>,
    b: Option<&str>,
) -> Result<Outcome, CliError> {
    if b.is_some() && order != OrderKind::Mlr {
        return Err(CliError::Input("--b applies only to --order mlr".into()));
    }
    let coords = parse_components("--point", point)?;
    check_dimension(&coords, n)?;
    let b_value = b.map(|s| parse_scalar("--b", s)).transpose()?;
    let mode = ctx.resolve_mode(&[Some(point), b]);

    let value = exact_dispatch(mode, order, &coords, &ctx.u, b_value.as_ref())?;

    let mut params = ctx.base_parameters(mode);
    params.insert("order".into(), order.to_string());
    params.insert("point".into(), point.to_string());
    if let Some(n) = n {
        params.insert("n".into(), n.to_string());
    }
    if let Some(b) = b {
        params.insert("b".into(), b.to_string());
    }

    let mut result = json!({ "order": order.to_string(), "n": coords.len() - 1, "value": value.text });
    if let (Value::Object(r), Value::Object(d)) = (&mut result, value.detail) {
        r.extend(d);
    }
    let report = Report::new("exact", params, mode, result, Some(value.text.clone()), None);
    let csv = csv_text(
        &strings(&["order", "mode", "value"]),
        [vec![order.to_string(), mode.to_string(), value.text.clone()]],
    )?;
    Ok(Outcome { report, table: format!("{}\n", value.text), csv, summary: None, failure: None })
}

/// Monte Carlo settings of the `estimate` subcommand.
#[derive(Debug, Clone, Copy)]
pub struct EstimateArgs<'a> {
    pub order: OrderKind,
    pub n: Option<usize>,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub point: Option<&'a str>,
    pub b: Option<&'a str>,
}

/// Without `--point`: comparability of two uniform points. With `--point`:
/// `P[X >= a]`, optionally restricted to `x_n <= b`.
pub fn estimate(ctx: &Context, args: EstimateArgs<'_>) -> Result<Outcome, CliError> {
    let EstimateArgs { order, n, samples, seed, workers, point, b } = args;
    if b.is_some() && (order != OrderKind::Mlr || point.is_none()) {
        return Err(CliError::Input("--b requires --order mlr and --point".into()));
    }
    let mode = ctx.resolve_mode(&[point, b]);
    let u = ctx.u.to_f64().ok_or_else(|| CliError::Input("--u is out of float range".into()))?;

    let (result, exact, dim): (EstimateResult, Option<(String, f64)>, usize) = match point {
        None => {
            let n = n.ok_or_else(|| CliError::Input("--n is required when no --point is given".into()))?;
            let config = SamplerConfig::new(n, samples, seed).with_u(u).with_workers(workers);
            let result = estimate_comparability(order, &config)?;
            let closed = match order {
                OrderKind::Fosd => fosd_comparability_probability(n)?,
                OrderKind::Mlr => mlr_comparability_probability(n)?,
            };
            let float = closed.to_f64().unwrap_or(f64::NAN);
            (result, Some((show_rational(&closed, mode), float)), n)
        }
        Some(point) => {
            let coords = parse_components("--point", point)?;
            check_dimension(&coords, n)?;
            let b_value = b.map(|s| parse_scalar("--b", s)).transpose()?;
            let a = build_point::<f64>(&coords, &ctx.u)?;
            let config = SamplerConfig::new(a.n(), samples, seed).with_u(u).with_workers(workers);
            let result = match &b_value {
                Some(b) => estimate_dominance_restricted(&a, b.to_f64().unwrap_or(f64::NAN), &config)?,
                None => estimate_dominance(&a, order, &config)?,
            };
            // The estimate stands on its own when the closed form is out of reach.
            let exact = match exact_dispatch(mode, order, &coords, &ctx.u, b_value.as_ref()) {
                Ok(v) => Some((v.text, v.float)),
                Err(CliError::Ceiling(_)) => None,
                Err(e) => return Err(e),
            };
            (result, exact, a.n())
        }
    };
    let z_score = exact.as_ref().and_then(|(_, f)| result.z_score(*f));

    let mut params = ctx.base_parameters(mode);
    params.insert("order".into(), order.to_string());
    params.insert("n".into(), dim.to_string());
    params.insert("samples".into(), samples.to_string());
    params.insert("seed".into(), seed.to_string());
    params.insert("workers".into(), workers.to_string());
    if let Some(p) = point {
        params.insert("point".into(), p.to_string());
    }
    if let Some(b) = b {
        params.insert("b".into(), b.to_string());
    }

    let exact_text = exact.map(|(t, _)| t);
    let table = estimate_table(&result, exact_text.as_deref(), z_score);
    let csv = csv_text(
        &strings(&[
            "estimate",
            "std_error",
            "ci95_low",
            "ci95_high",
            "samples",
            "seed",
            "workers",
            "generator-id",
            "wall_time_ms",
            "exact",
            "z_score",
        ]),
        [vec![
            result.estimate.to_string(),
            result.std_error.to_string(),
            result.ci95[0].to_string(),
            result.ci95[1].to_string(),
            result.samples.to_string(),
            result.seed.to_string(),
            result.workers.to_string(),
            result.generator_id.clone(),
            result.wall_time_ms.to_string(),
            exact_text.clone().unwrap_or_default(),
            z_score.map(|z| z.to_string()).unwrap_or_default(),
        ]],
    )?;
    let report = Report::new("estimate", params, mode, serde_json::to_value(&result)?, exact_text, z_score);
    Ok(Outcome { report, table, csv, summary: None, failure: None })
}

fn estimate_table(r: &EstimateResult, exact: Option<&str>, z: Option<f64>) -> String {
    let mut s = format!(
        "estimate      {}\nstd_error     {}\nci95          [{}, {}]\n",
        r.estimate, r.std_error, r.ci95[0], r.ci95[1]
    );
    if let Some(e) = exact {
        s += &format!("exact         {e}\n");
    }
    if let Some(z) = z {
        s += &format!("z_score       {z}\n");
    }
    s += &format!(
        "samples       {}\nseed          {}\nworkers       {}\ngenerator-id  {}\nwall_time_ms  {}\n",
        r.samples, r.seed, r.workers, r.generator_id, r.wall_time_ms
    );
    s
}

/// Random rational `p/q` with `p, q` in `1..=1000`.
fn random_positive<R: Rng>(rng: &mut R) -> BigRational {
    BigRational::new(rng.random_range(1..=1000i64).into(), rng.random_range(1..=1000i64).into())
}

fn random_distinct<R: Rng>(rng: &mut R, len: usize) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(len);
    while out.len() < len {
        let x = random_positive(rng);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn to_f64s(xs: &[BigRational]) -> Vec<f64> {
    xs.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Worst residual seen so far, in the active mode.
enum Worst {
    Exact(BigRational),
    Relative(f64),
}

impl Worst {
    fn new(mode: ScalarMode) -> Self {
        match mode {
            ScalarMode::Float64 => Worst::Relative(0.0),
            ScalarMode::ExactRational => Worst::Exact(BigRational::zero()),
        }
    }

    fn passes(&self) -> bool {
        match self {
            Worst::Exact(r) => r.is_zero(),
            Worst::Relative(r) => *r <= FLOAT_IDENTITY_THRESHOLD,
        }
    }

    fn text(&self) -> String {
        match self {
            Worst::Exact(r) => r.to_string(),
            Worst::Relative(r) => format!("{r:e}"),
        }
    }

    fn update_exact(&mut self, r: BigRational) {
        if let Worst::Exact(w) = self {
            let r = r.abs();
            if r > *w {
                *w = r;
            }
        }
    }

    fn update_relative(&mut self, r: f64) {
        if let Worst::Relative(w) = self {
            // NaN must fail the check, so it is sticky
            if r.is_nan() || r > *w {
                *w = r;
            }
        }
    }
}

/// Relative error of a power-sum evaluation against its known value.
fn knuth_relative(terms: &[f64], expected: f64) -> f64 {
    let total = f64::sum_all(terms.iter().copied());
    let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(expected.abs());
    if scale == 0.0 {
        0.0
    } else {
        (total - expected).abs() / scale
    }
}

/// Checks the alternating identity on random positive vectors of length
/// `n + 1`, and the power-sum identity on random distinct tuples of the same
/// length for every admissible power.
pub fn identities(ctx: &Context, n: usize, trials: u64, seed: u64) -> Result<Outcome, CliError> {
    if n < 1 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    if trials < 1 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let mode = ctx.mode.unwrap_or(ScalarMode::Float64);
    let len = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alternating = Worst::new(mode);
    let mut knuth = Worst::new(mode);

    for _ in 0..trials {
        let a: Vec<BigRational> = (0..len).map(|_| random_positive(&mut rng)).collect();
        let xs = random_distinct(&mut rng, len);
        match mode {
            ScalarMode::ExactRational => {
                alternating.update_exact(alternating_identity_residual(&a)?);
                for r in 0..=len as u32 {
                    knuth.update_exact(knuth_power_sum(&xs, r)? - knuth_power_sum_expected(&xs, r));
                }
            }
            ScalarMode::Float64 => {
                alternating.update_relative(relative_residual(&alternating_identity_terms(&to_f64s(&a))?));
                let xf = to_f64s(&xs);
                for r in 0..=len as u32 {
                    let terms = knuth_power_sum_terms(&xf, r)?;
                    knuth.update_relative(knuth_relative(&terms, knuth_power_sum_expected(&xf, r)));
                }
            }
        }
    }

    let pass = alternating.passes() && knuth.passes();
    let (metric, threshold) = match mode {
        ScalarMode::Float64 => ("relative", format!("{FLOAT_IDENTITY_THRESHOLD:e}")),
        ScalarMode::ExactRational => ("absolute", "0".to_string()),
    };
    let verdict = if pass { "PASS" } else { "FAIL" };

    let mut params = ctx.base_parameters(mode);
    params.insert("n".into(), n.to_string());
    params.insert("trials".into(), trials.to_string());
    params.insert("seed".into(), seed.to_string());

    let result = json!({
        "length": len,
        "metric": metric,
        "threshold": threshold,
        "alternating": { "cases": trials, "max_residual": alternating.text() },
        "knuth": { "cases": trials * (len as u64 + 1), "max_residual": knuth.text() },
        "pass": pass,
    });
    let table = format!(
        "alternating identity: {trials} vectors of length {len}, max {metric} residual {}\n\
         power-sum identity: {trials} tuples of length {len}, r = 0..={len}, max {metric} residual {}\n\
         {verdict}\n",
        alternating.text(),
        knuth.text()
    );
    let csv = csv_text(
        &strings(&["identity", "length", "cases", "metric", "max_residual", "pass"]),
        [
            vec![
                "alternating".into(),
                len.to_string(),
                trials.to_string(),
                metric.into(),
                alternating.text(),
                alternating.passes().to_string(),
            ],
            vec![
                "knuth".into(),
                len.to_string(),
                (trials * (len as u64 + 1)).to_string(),
                metric.into(),
                knuth.text(),
                knuth.passes().to_string(),
            ],
        ],
    )?;
    let report = Report::new("identities", params, mode, result, Some("0".into()), None);
    Ok(Outcome {
        report,
        table,
        csv,
        summary: Some(verdict.to_string()),
        failure: (!pass).then(|| format!("max residual exceeds the {metric} threshold {threshold}")),
    })
}

/// Lists the weighted monomials of `H_k(n)`.
pub fn enumerate(ctx: &Context, k: usize, n: usize) -> Result<Outcome, CliError> {
    let family = enumerate_h(k, n)?;
    let count = family.len();
    let (summary, failure, catalan) = if k == n {
        let catalan = catalan_count(n);
        let ok = catalan == count.into();
        let verdict = if ok { "OK" } else { "MISMATCH" };
        let failure = (!ok).then(|| format!("count {count} differs from the Catalan number {catalan}"));
        (format!("count={count} catalan={catalan} {verdict}"), failure, Some(catalan))
    } else {
        (format!("count={count}"), None, None)
    };

    let mut header: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
    header.push("coefficient".into());
    let rows = family.iter().map(|h| {
        let mut row: Vec<String> = h.monomial.degrees().iter().map(|d| d.to_string()).collect();
        row.push(h.coefficient.to_string());
        row
    });
    let csv = csv_text(&header, rows)?;

    let mut table = String::new();
    for h in family.iter() {
        table += &format!("{:>12}  {}\n", h.coefficient, h.monomial);
    }
    table += &summary;
    table.push('\n');

    let mode = ScalarMode::ExactRational;
    let mut params = ctx.base_parameters(mode);
    params.insert("k".into(), k.to_string());
    params.insert("n".into(), n.to_string());
    let result = json!({
        "k": k,
        "n": n,
        "count": count,
        "catalan": catalan.map(|c| c.to_string()),
        "rows": family
            .iter()
            .map(|h| json!({ "degrees": h.monomial.degrees(), "coefficient": h.coefficient.to_string() }))
            .collect::<Vec<_>>(),
    });
    let report = Report::new("enumerate", params, mode, result, None, None);
    Ok(Outcome { report, table, csv, summary: Some(summary), failure })
}

/// Classifies the lattice of step `u / resolution` against `point`.
pub fn figure(ctx: &Context, point: &str, order: OrderKind, resolution: u64) -> Result<Outcome, CliError> {
    let coords = parse_components("--point", point)?;
    let mode = ctx.resolve_mode(&[Some(point)]);
    let grid = match mode {
        ScalarMode::Float64 => classify_grid(&build_point::<f64>(&coords, &ctx.u)?, resolution, order)?,
        ScalarMode::ExactRational => classify_grid(&build_point::<BigRational>(&coords, &ctx.u)?, resolution, order)?,
    };

    let mut counts: BTreeMap<&str, usize> =
        [OrderRelation::Less, OrderRelation::Greater, OrderRelation::Equal, OrderRelation::Incomparable]
            .iter()
            .map(|r| (r.as_str(), 0))
            .collect();
    for g in &grid {
        *counts.entry(g.relation.as_str()).or_default() += 1;
    }
    let fraction = comparable_fraction(&grid);
    let fraction_exact = comparable_fraction_exact(&grid);
    let comparable = grid.len() - counts["incomparable"];
    let summary = format!("points={} comparable={comparable} comparable_fraction={fraction}", grid.len());

    let mut header: Vec<String> = (0..coords.len()).map(|i| format!("x{i}")).collect();
    header.push("relation".into());
    let rows = grid.iter().map(|g| {
        let mut row: Vec<String> =
            g.point.coords().iter().map(|c| c.to_f64().unwrap_or(f64::NAN).to_string()).collect();
        row.push(g.relation.as_str().to_string());
        row
    });
    let csv = csv_text(&header, rows)?;

    let mut params = ctx.base_parameters(mode);
    params.insert("order".into(), order.to_string());
    params.insert("point".into(), point.to_string());
    params.insert("resolution".into(), resolution.to_string());
    let result = json!({
        "resolution": resolution,
        "points": grid.len(),
        "counts": counts,
        "comparable": comparable,
        "comparable_fraction": fraction,
        "comparable_fraction_exact": fraction_exact.to_string(),
    });
    let table = format!(
        "{summary}\nless={} greater={} equal={} incomparable={}\n",
        counts["less"], counts["greater"], counts["equal"], counts["incomparable"]
    );
    let report = Report::new("figure", params, mode, result, None, None);
    Ok(Outcome { report, table, csv, summary: Some(summary), failure: None })
}

/// Relation of `x` to `y` under `order`.
pub fn classify(ctx: &Context, order: OrderKind, x: &str, y: &str) -> Result<Outcome, CliError> {
    let xc = parse_components("--x", x)?;
    let yc = parse_components("--y", y)?;
    let mode = ctx.resolve_mode(&[Some(x), Some(y)]);
    let relation = match mode {
        ScalarMode::Float64 => compare(&build_point::<f64>(&xc, &ctx.u)?, &build_point(&yc, &ctx.u)?, order)?,
        ScalarMode::ExactRational => {
            compare(&build_point::<BigRational>(&xc, &ctx.u)?, &build_point(&yc, &ctx.u)?, order)?
        }
    };
    let mut params = ctx.base_parameters(mode);
    params.insert("order".into(), order.to_string());
    params.insert("x".into(), x.to_string());
    params.insert("y".into(), y.to_string());
    let result = json!({ "order": order.to_string(), "relation": relation.as_str() });
    let csv = csv_text(&strings(&["order", "relation"]), [vec![order.to_string(), relation.as_str().to_string()]])?;
    let report = Report::new("classify", params, mode, result, None, None);
    Ok(Outcome { report, table: format!("{relation}\n"), csv, summary: None, failure: None })
}
