//! Entangled clusters: geometric means of pairwise concurrences over runs of
//! consecutive spins, their peaks and lifetimes, and parameter scans for the
//! region in which a cluster exists.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ConcurrenceField, FieldEngine, PointEvaluator};
use crate::state::{symmetric_params, InitialStateParams};

/// Default lifetime threshold on the cluster geometric mean.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Default threshold on `max_t P` for a cluster to count as existing in
/// critical-value scans: the cluster is present wherever its geometric mean
/// is nonzero, with a margin above the numerical floor.
pub const CRITICAL_THRESHOLD: f64 = 1e-6;

/// Cluster of `size` consecutive spins starting at site `first`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterSpec {
    pub size: usize,
    pub first: usize,
    pub epsilon: f64,
}

impl ClusterSpec {
    pub fn new(size: usize, first: usize, epsilon: f64, n: usize) -> Result<Self> {
        if size < 2 || size > n {
            return Err(Error::InvalidArgument(format!("cluster size {size} outside 2..={n}")));
        }
        if first < 1 || first + size - 1 > n {
            return Err(Error::InvalidArgument(format!(
                "cluster of {size} spins cannot start at site {first} in a chain of {n}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("threshold {epsilon} outside (0, 1)")));
        }
        Ok(Self { size, first, epsilon })
    }

    pub fn last(&self) -> usize {
        self.first + self.size - 1
    }

    /// Pairs inside the cluster, lexicographic.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let (a, b) = (self.first, self.last());
        (a..=b).flat_map(|i| (i + 1..=b).map(move |j| (i, j))).collect()
    }

    pub fn contains_pair(&self, i: usize, j: usize) -> bool {
        self.first <= i && j <= self.last()
    }

    /// Same cluster with another threshold.
    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::new(self.size, self.first, epsilon, self.last())
    }
}

/// Geometric mean of non-negative factors; zero if any factor is zero.
/// Evaluated through logarithms so that many small factors do not underflow.
pub fn geometric_mean_of(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

fn check_spec(spec: &ClusterSpec, n: usize) -> Result<()> {
    if spec.last() > n {
        return Err(Error::InvalidArgument(format!("cluster ends at site {} beyond chain of {n}", spec.last())));
    }
    Ok(())
}

/// `P_{M,i}` at grid index `k`.
pub fn geometric_mean(field: &ConcurrenceField, spec: &ClusterSpec, k: usize) -> Result<f64> {
    check_spec(spec, field.n())?;
    let vals = spec.pairs().into_iter().map(|(i, j)| field.series(i, j).map(|s| s[k])).collect::<Result<Vec<_>>>()?;
    Ok(geometric_mean_of(&vals))
}

pub fn geometric_mean_series(field: &ConcurrenceField, spec: &ClusterSpec) -> Result<Vec<f64>> {
    (0..field.times().len()).map(|k| geometric_mean(field, spec, k)).collect()
}

/// Peak and lifetime of one cluster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub spec: ClusterSpec,
    pub p_max: f64,
    pub t_peak: f64,
    pub exists: bool,
    pub t_l: f64,
    pub t_r: f64,
    pub lifetime: f64,
    /// Total length of all super-threshold intervals, not only the one around the peak.
    pub union_lifetime: f64,
}

fn crossing(t0: f64, p0: f64, t1: f64, p1: f64, eps: f64) -> f64 {
    if p1 == p0 {
        return 0.5 * (t0 + t1);
    }
    t0 + (eps - p0) / (p1 - p0) * (t1 - t0)
}

/// Report from a sampled `P(t)`; threshold crossings are interpolated linearly.
pub fn report_from_series(times: &[f64], p: &[f64], spec: &ClusterSpec) -> ClusterReport {
    let eps = spec.epsilon;
    let mut kp = 0;
    for (k, &v) in p.iter().enumerate() {
        if v > p[kp] {
            kp = k;
        }
    }
    let above = |k: usize| p[k] > eps;
    let left_edge = |k: usize| if k == 0 { times[0] } else { crossing(times[k - 1], p[k - 1], times[k], p[k], eps) };
    let right_edge = |k: usize| {
        if k + 1 == p.len() {
            times[k]
        } else {
            crossing(times[k], p[k], times[k + 1], p[k + 1], eps)
        }
    };
    let mut union = 0.0;
    let mut k = 0;
    while k < p.len() {
        if above(k) {
            let start = k;
            while k + 1 < p.len() && above(k + 1) {
                k += 1;
            }
            union += right_edge(k) - left_edge(start);
        }
        k += 1;
    }
    let p_max = p[kp];
    let mut report = ClusterReport {
        spec: *spec,
        p_max,
        t_peak: times[kp],
        exists: p_max >= eps,
        t_l: times[kp],
        t_r: times[kp],
        lifetime: 0.0,
        union_lifetime: union,
    };
    if above(kp) {
        let (mut a, mut b) = (kp, kp);
        while a > 0 && above(a - 1) {
            a -= 1;
        }
        while b + 1 < p.len() && above(b + 1) {
            b += 1;
        }
        report.t_l = left_edge(a);
        report.t_r = right_edge(b);
        report.lifetime = report.t_r - report.t_l;
    }
    report
}

/// Grid-resolution report for one cluster of a precomputed field.
pub fn cluster_report(field: &ConcurrenceField, spec: &ClusterSpec) -> Result<ClusterReport> {
    let p = geometric_mean_series(field, spec)?;
    Ok(report_from_series(field.times(), &p, spec))
}

/// `P_{M,i}` evaluated directly at an arbitrary time.
pub fn geometric_mean_at(engine: &FieldEngine, params: &InitialStateParams, spec: &ClusterSpec, t: f64) -> Result<f64> {
    check_spec(spec, engine.n())?;
    let mix = engine.mixture_at(params, t)?;
    let mut vals = Vec::with_capacity(spec.pairs().len());
    for (i, j) in spec.pairs() {
        let c = engine
            .reducer()
            .concurrence(&mix, i, j)
            .map_err(|e| e.at_params(params.sender.lambda, params.sender.a1).at_time(t))?;
        if c == 0.0 {
            return Ok(0.0);
        }
        vals.push(c);
    }
    Ok(geometric_mean_of(&vals))
}

/// Time resolution of the refined peak and threshold crossings.
pub const REFINED_STEP: f64 = 1e-4;

/// Refine a grid report: resample the peak on a `REFINED_STEP` grid across
/// the neighbouring samples and bisect each threshold crossing.
pub fn refine_report(
    engine: &FieldEngine,
    params: &InitialStateParams,
    report: &ClusterReport,
) -> Result<ClusterReport> {
    let spec = report.spec;
    let times = engine.times();
    let (t0, t1) = (times[0], *times.last().expect("non-empty grid"));
    let dt = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let p = |t: f64| geometric_mean_at(engine, params, &spec, t);
    let mut out = *report;
    let a = (report.t_peak - dt).max(t0);
    let b = (report.t_peak + dt).min(t1);
    let steps = ((b - a) / REFINED_STEP).round().max(1.0) as usize;
    for s in 0..=steps {
        let t = a + (b - a) * s as f64 / steps as f64;
        let v = p(t)?;
        if v > out.p_max {
            out.p_max = v;
            out.t_peak = t;
        }
    }
    out.exists = out.p_max >= spec.epsilon;
    if report.lifetime > 0.0 {
        let eps = spec.epsilon;
        let bisect = |mut inside: f64, mut outside: f64| -> Result<f64> {
            while (inside - outside).abs() > REFINED_STEP {
                let mid = 0.5 * (inside + outside);
                if p(mid)? > eps {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            Ok(0.5 * (inside + outside))
        };
        if report.t_l > t0 {
            let inside = (report.t_l + dt).min(out.t_peak);
            let outside = (report.t_l - dt).max(t0);
            if p(inside)? > eps && p(outside)? <= eps {
                out.t_l = bisect(inside, outside)?;
            }
        }
        if report.t_r < t1 {
            let inside = (report.t_r - dt).max(out.t_peak);
            let outside = (report.t_r + dt).min(t1);
            if p(inside)? > eps && p(outside)? <= eps {
                out.t_r = bisect(inside, outside)?;
            }
        }
        out.lifetime = out.t_r - out.t_l;
    }
    Ok(out)
}

/// `P(t_k)` for one cluster through a lazy evaluator. Pairs are tried in an
/// order that keeps the last zero factor in front, so vanishing clusters
/// cost about one concurrence per time.
fn lazy_series(ev: &mut PointEvaluator<'_>, spec: &ClusterSpec) -> Result<Vec<f64>> {
    let mut order = spec.pairs();
    let mut logs = Vec::with_capacity(order.len());
    let mut out = Vec::with_capacity(ev.times().len());
    for k in 0..ev.times().len() {
        logs.clear();
        let mut zero_at = None;
        for (slot, &(i, j)) in order.iter().enumerate() {
            let c = ev.concurrence(i, j, k)?;
            if c == 0.0 {
                zero_at = Some(slot);
                break;
            }
            logs.push(c.ln());
        }
        match zero_at {
            Some(slot) => {
                order[..=slot].rotate_right(1);
                out.push(0.0);
            }
            None => out.push((logs.iter().sum::<f64>() / logs.len() as f64).exp()),
        }
    }
    Ok(out)
}

/// Whether `max_t P ≥ threshold` for the evaluator's initial state. Each time
/// slice stops as soon as the running product falls below `threshold^K`.
fn lazy_exists(ev: &mut PointEvaluator<'_>, spec: &ClusterSpec, threshold: f64) -> Result<bool> {
    let mut order = spec.pairs();
    let budget = order.len() as f64 * threshold.ln();
    for k in 0..ev.times().len() {
        let mut acc = 0.0;
        let mut failed_at = None;
        for (slot, &(i, j)) in order.iter().enumerate() {
            let c = ev.concurrence(i, j, k)?;
            acc += if c > 0.0 { c.ln() } else { f64::NEG_INFINITY };
            if acc < budget {
                failed_at = Some(slot);
                break;
            }
        }
        match failed_at {
            Some(slot) => order[..=slot].rotate_right(1),
            None => return Ok(true),
        }
    }
    Ok(false)
}

/// Grid report for one initial state computed lazily from the engine.
pub fn lazy_report(engine: &FieldEngine, params: &InitialStateParams, spec: &ClusterSpec) -> Result<ClusterReport> {
    check_spec(spec, engine.n())?;
    let mut ev = engine.evaluator(params)?;
    let p = lazy_series(&mut ev, spec)?;
    Ok(report_from_series(engine.times(), &p, spec))
}

/// Reports for several clusters of one initial state, sharing concurrences.
pub fn lazy_reports(
    engine: &FieldEngine,
    params: &InitialStateParams,
    specs: &[ClusterSpec],
) -> Result<Vec<ClusterReport>> {
    let mut ev = engine.evaluator(params)?;
    specs
        .iter()
        .map(|spec| {
            check_spec(spec, engine.n())?;
            let p = lazy_series(&mut ev, spec)?;
            Ok(report_from_series(engine.times(), &p, spec))
        })
        .collect()
}

/// Edges of the existence region of one cluster on a symmetric-parameter grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalValues {
    pub lambda_c: f64,
    pub alpha_c: f64,
    pub defined: bool,
}

/// Existence map and critical values of one cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalScan {
    pub spec: ClusterSpec,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `exists[a * lambdas.len() + l]`, α-major.
    pub exists: Vec<bool>,
    pub values: CriticalValues,
}

impl CriticalScan {
    pub fn exists_at(&self, l: usize, a: usize) -> bool {
        self.exists[a * self.lambdas.len() + l]
    }
}

fn check_grid(name: &str, grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !(lo..=hi).contains(v)) {
        return Err(Error::InvalidArgument(format!("{name} grid leaves [{lo}, {hi}]")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Evaluate `f(λ, α)` on every grid point in parallel; results are α-major.
pub fn parameter_grid<T: Send>(
    lambdas: &[f64],
    alphas: &[f64],
    f: impl Fn(f64, f64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let nl = lambdas.len();
    (0..nl * alphas.len()).into_par_iter().map(|idx| f(lambdas[idx % nl], alphas[idx / nl])).collect()
}

/// Critical values of several clusters from one existence scan over the
/// symmetric `(λ, α)` grid. A point belongs to a cluster's region when
/// `max_t P ≥ threshold` on the engine's time grid; pass
/// [`CRITICAL_THRESHOLD`] for the nonzero region or `spec.epsilon` for the
/// lifetime criterion.
pub fn critical_values(
    engine: &FieldEngine,
    specs: &[ClusterSpec],
    lambdas: &[f64],
    alphas: &[f64],
    threshold: f64,
) -> Result<Vec<CriticalScan>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("existence threshold {threshold} outside (0, 1)")));
    }
    check_grid("lambda", lambdas, 0.5, 1.0)?;
    check_grid("alpha", alphas, 0.0, 1.0)?;
    for spec in specs {
        check_spec(spec, engine.n())?;
    }
    let flags = parameter_grid(lambdas, alphas, |l, a| {
        let mut ev = engine.evaluator(&symmetric_params(l, a)?)?;
        specs.iter().map(|s| lazy_exists(&mut ev, s, threshold)).collect::<Result<Vec<bool>>>()
    })?;
    Ok(specs
        .iter()
        .enumerate()
        .map(|(s, spec)| {
            let exists: Vec<bool> = flags.iter().map(|f| f[s]).collect();
            let nl = lambdas.len();
            let lambda_c = (0..nl).find(|&l| (0..alphas.len()).any(|a| exists[a * nl + l])).map(|l| lambdas[l]);
            let alpha_c = (0..alphas.len()).rev().find(|&a| (0..nl).any(|l| exists[a * nl + l])).map(|a| alphas[a]);
            let values = match (lambda_c, alpha_c) {
                (Some(lambda_c), Some(alpha_c)) => CriticalValues { lambda_c, alpha_c, defined: true },
                _ => CriticalValues { lambda_c: f64::NAN, alpha_c: f64::NAN, defined: false },
            };
            CriticalScan { spec: *spec, lambdas: lambdas.to_vec(), alphas: alphas.to_vec(), exists, values }
        })
        .collect())
}

/// Time maximum of `C_{i,j}` over the symmetric `(λ, α)` grid, α-major.
pub fn pair_max_surface(
    engine: &FieldEngine,
    pair: (usize, usize),
    lambdas: &[f64],
    alphas: &[f64],
) -> Result<Vec<f64>> {
    check_grid("lambda", lambdas, 0.0, 1.0)?;
    check_grid("alpha", alphas, 0.0, 1.0)?;
    parameter_grid(lambdas, alphas, |l, a| engine.evaluator(&symmetric_params(l, a)?)?.max_over_time(pair.0, pair.1))
}

/// Time maxima of the first pair and the central pair over `(λ, α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MiddlePairScan {
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub edge_pair: (usize, usize),
    pub middle_pair: (usize, usize),
    /// α-major surfaces.
    pub edge: Vec<f64>,
    pub middle: Vec<f64>,
}

pub fn middle_pair_scan(engine: &FieldEngine, lambdas: &[f64], alphas: &[f64]) -> Result<MiddlePairScan> {
    let n = engine.n();
    if n % 2 == 1 {
        return Err(Error::InvalidConfig(format!("middle-pair scan needs an even chain, got {n} spins")));
    }
    let middle_pair = (n / 2, n / 2 + 1);
    Ok(MiddlePairScan {
        lambdas: lambdas.to_vec(),
        alphas: alphas.to_vec(),
        edge_pair: (1, 2),
        middle_pair,
        edge: pair_max_surface(engine, (1, 2), lambdas, alphas)?,
        middle: pair_max_surface(engine, middle_pair, lambdas, alphas)?,
    })
}

/// Size of the largest 4-connected set of cells with `value ≤ threshold` in
/// a `rows × cols` row-major grid.
pub fn largest_zero_region(values: &[f64], rows: usize, cols: usize, threshold: f64) -> usize {
    assert_eq!(values.len(), rows * cols, "grid shape mismatch");
    let mut seen = vec![false; values.len()];
    let mut best = 0;
    let mut stack = Vec::new();
    for start in 0..values.len() {
        if seen[start] || values[start] > threshold {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(cell) = stack.pop() {
            size += 1;
            let (r, c) = (cell / cols, cell % cols);
            let mut visit = |rr: usize, cc: usize| {
                let idx = rr * cols + cc;
                if !seen[idx] && values[idx] <= threshold {
                    seen[idx] = true;
                    stack.push(idx);
                }
            };
            if r > 0 {
                visit(r - 1, c);
            }
            if r + 1 < rows {
                visit(r + 1, c);
            }
            if c > 0 {
                visit(r, c - 1);
            }
            if c + 1 < cols {
                visit(r, c + 1);
            }
        }
        best = best.max(size);
    }
    best
}
