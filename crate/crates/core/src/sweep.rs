//! Mean ± deviation curves of per-state quantities: relay extrema, cluster
//! peaks and cluster lifetimes.

use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::{lazy_reports, ClusterSpec};
use crate::error::{Error, Result};
use crate::field::FieldEngine;
use crate::relay::{partial_sums, time_extrema};
use crate::state::symmetric_params;
use crate::stats::{summarize, Axis, QuadratureRule, StatSummary};

/// One abscissa of a sweep: the kept parameter value and one summary per quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub summaries: Vec<StatSummary>,
}

/// Evaluate `f(λ, α)` on `values × nodes` and integrate out `axis`.
///
/// With `axis = Alpha` the `values` are λ's and the α-weighted rule is used;
/// with `axis = Lambda` they are α's. Every call of `f` must return the same
/// number of quantities.
pub fn sweep<F>(axis: Axis, values: &[f64], nodes: usize, f: F) -> Result<Vec<SweepRow>>
where
    F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one abscissa".into()));
    }
    let rule = QuadratureRule::for_axis(axis, nodes)?;
    let q = rule.len();
    let raw = (0..values.len() * q)
        .into_par_iter()
        .map(|idx| {
            let (v, x) = (values[idx / q], rule.nodes()[idx % q]);
            match axis {
                Axis::Alpha => f(v, x),
                Axis::Lambda => f(x, v),
            }
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let width = raw[0].len();
    if raw.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidArgument("sweep quantity count varies between points".into()));
    }
    values
        .iter()
        .enumerate()
        .map(|(r, &v)| {
            let block = &raw[r * q..(r + 1) * q];
            let summaries = (0..width)
                .map(|c| summarize(&block.iter().map(|row| row[c]).collect::<Vec<_>>(), &rule, axis))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow { axis_value: v, summaries })
        })
        .collect()
}

/// `[S_1^max … S_{N−1}^max, S_1^min … S_{N−1}^min]` over the engine's grid.
pub fn relay_extrema_point(engine: &FieldEngine, lambda: f64, alpha: f64) -> Result<Vec<f64>> {
    let params = symmetric_params(lambda, alpha)?;
    let field = engine.field(&params)?;
    let profile = partial_sums(&field)?;
    let t_end = *engine.times().last().expect("non-empty grid");
    let ext = time_extrema(&profile, t_end)?;
    Ok(ext.iter().map(|e| e.max).chain(ext.iter().map(|e| e.min)).collect())
}

/// Cluster quantity selected for a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterQuantity {
    PeakMean,
    Lifetime,
}

/// Peak geometric mean or lifetime of each cluster for one symmetric state.
pub fn cluster_point(
    engine: &FieldEngine,
    specs: &[ClusterSpec],
    quantity: ClusterQuantity,
    lambda: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    let params = symmetric_params(lambda, alpha)?;
    Ok(lazy_reports(engine, &params, specs)?
        .iter()
        .map(|r| match quantity {
            ClusterQuantity::PeakMean => r.p_max,
            ClusterQuantity::Lifetime => r.lifetime,
        })
        .collect())
}

/// Index of the largest value, first on ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    (0..values.len()).fold(None, |best, k| match best {
        Some(b) if values[b] >= values[k] => Some(b),
        _ => Some(k),
    })
}
