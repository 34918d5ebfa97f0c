//! Weighted parameter averages, the averaged registration signal and the
//! search for its optimal time.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ChainConfig;
use crate::entanglement::MixtureReducer;
use crate::error::{Error, Result};
use crate::evolution::{EndpointAmplitudes, EndpointMixture};
use crate::field::uniform_grid;
use crate::spectral::ChainModel;
use crate::state::{symmetric_params, InitialStateParams};

/// Quadrature nodes per parameter axis.
pub const DEFAULT_NODES: usize = 32;

/// Nodes per panel of the composite rule.
pub const PANEL_ORDER: usize = 8;

/// Parameter integrated out of a two-parameter function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Alpha,
    Lambda,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::Lambda => "lambda",
        }
    }
}

/// Weighted mean and root-mean-square deviation along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StatSummary {
    pub mean: f64,
    pub deviation: f64,
    pub axis: Axis,
}

/// Nodes and weights of a quadrature rule on a finite interval.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Composite Gauss-Legendre rule with `count` nodes on `[a, b]`. Counts
    /// divisible by [`PANEL_ORDER`] use equal panels of that order; any other
    /// count is a single panel.
    pub fn gauss_legendre(a: f64, b: f64, count: usize) -> Result<Self> {
        let count = NonZeroUsize::new(count)
            .ok_or_else(|| Error::InvalidArgument("quadrature needs at least one node".into()))?;
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::InvalidInterval(format!("quadrature interval [{a}, {b}] is empty")));
        }
        let (panels, order) = if count.get() % PANEL_ORDER == 0 {
            (count.get() / PANEL_ORDER, NonZeroUsize::new(PANEL_ORDER).expect("non-zero"))
        } else {
            (1, count)
        };
        let base = GaussLegendre::new(order);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(count.get());
        let mut weights = Vec::with_capacity(count.get());
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for &(x, w) in base.as_node_weight_pairs() {
                nodes.push(lo + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        Ok(Self { nodes, weights })
    }

    /// `(π/2) sin(απ) dα` on `[0, 1]`.
    pub fn alpha_weighted(count: usize) -> Result<Self> {
        let mut rule = Self::gauss_legendre(0.0, 1.0, count)?;
        for (w, &a) in rule.weights.iter_mut().zip(&rule.nodes) {
            *w *= 0.5 * PI * (PI * a).sin();
        }
        Ok(rule)
    }

    /// `2 dλ` on `[1/2, 1]`.
    pub fn lambda_uniform(count: usize) -> Result<Self> {
        let mut rule = Self::gauss_legendre(0.5, 1.0, count)?;
        rule.weights.iter_mut().for_each(|w| *w *= 2.0);
        Ok(rule)
    }

    /// Normalized rule that integrates out `axis`.
    pub fn for_axis(axis: Axis, count: usize) -> Result<Self> {
        match axis {
            Axis::Alpha => Self::alpha_weighted(count),
            Axis::Lambda => Self::lambda_uniform(count),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Mean and deviation of values sampled at the rule's nodes (two-pass).
pub fn summarize(values: &[f64], rule: &QuadratureRule, axis: Axis) -> Result<StatSummary> {
    if values.len() != rule.len() {
        return Err(Error::InvalidArgument(format!("{} values for a {}-node rule", values.len(), rule.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite integrand value in parameter average"));
    }
    let mean: f64 = values.iter().zip(rule.weights()).map(|(v, w)| v * w).sum();
    let var: f64 = values.iter().zip(rule.weights()).map(|(v, w)| w * (v - mean).powi(2)).sum();
    Ok(StatSummary { mean, deviation: var.max(0.0).sqrt(), axis })
}

/// `⟨f⟩_α(λ)` and `δ_α f(λ)`.
pub fn mean_over_alpha(f: impl Fn(f64, f64) -> Result<f64>, lambda: f64, nodes: usize) -> Result<StatSummary> {
    let rule = QuadratureRule::alpha_weighted(nodes)?;
    let values = rule.nodes().iter().map(|&a| f(lambda, a)).collect::<Result<Vec<_>>>()?;
    summarize(&values, &rule, Axis::Alpha)
}

/// `⟨f⟩_λ(α)` and `δ_λ f(α)`.
pub fn mean_over_lambda(f: impl Fn(f64, f64) -> Result<f64>, alpha: f64, nodes: usize) -> Result<StatSummary> {
    let rule = QuadratureRule::lambda_uniform(nodes)?;
    let values = rule.nodes().iter().map(|&l| f(l, alpha)).collect::<Result<Vec<_>>>()?;
    summarize(&values, &rule, Axis::Lambda)
}

/// Registration signal averaged over symmetric initial states with weight
/// `π sin(απ)` on `[1/2, 1] × [0, 1]`.
#[derive(Clone, Debug)]
pub struct SignalAverager {
    model: ChainModel,
    reducer: MixtureReducer,
    points: Vec<(InitialStateParams, f64)>,
}

impl SignalAverager {
    pub fn new(config: &ChainConfig, nodes: usize) -> Result<Self> {
        let model = ChainModel::new(*config)?;
        let reducer = MixtureReducer::new(model.basis());
        let ra = QuadratureRule::alpha_weighted(nodes)?;
        let rl = QuadratureRule::lambda_uniform(nodes)?;
        let mut points = Vec::with_capacity(ra.len() * rl.len());
        for (&l, &wl) in rl.nodes().iter().zip(rl.weights()) {
            for (&a, &wa) in ra.nodes().iter().zip(ra.weights()) {
                points.push((symmetric_params(l, a)?, wl * wa));
            }
        }
        Ok(Self { model, reducer, points })
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let amps = EndpointAmplitudes::at(&self.model, t)?;
        Ok(self.points.iter().map(|(p, w)| w * self.reducer.signal(&EndpointMixture::new(p, &amps))).sum())
    }

    pub fn on_grid(&self, times: &[f64]) -> Result<Vec<f64>> {
        times.par_iter().map(|&t| self.at(t)).collect()
    }
}

/// `⟨s⟩(t)` for the symmetric model.
pub fn averaged_signal(config: &ChainConfig, t: f64, nodes: usize) -> Result<f64> {
    SignalAverager::new(config, nodes)?.at(t)
}

/// Location of the maximum of `⟨s⟩(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalTime {
    pub t: f64,
    pub value: f64,
    /// Grid time of the selected coarse maximum.
    pub coarse_t: f64,
}

/// Time step of the local resampling around the coarse maximum.
pub const REFINED_STEP: f64 = 1e-4;

/// Highest interior local maximum of `⟨s⟩(t)` on `[0, horizon]`.
///
/// The product initial state already carries signal at `t = 0`, where `⟨s⟩`
/// can exceed every later value; the registration instant is the best
/// maximum reached by the dynamics, so endpoints are excluded. The coarse
/// maximum is resampled at [`REFINED_STEP`] across its neighbours and then
/// polished by a parabola through the best three fine samples.
pub fn optimal_time(config: &ChainConfig, horizon: f64, dt: f64, nodes: usize) -> Result<OptimalTime> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInterval(format!("horizon must be positive, got {horizon}")));
    }
    let avg = SignalAverager::new(config, nodes)?;
    let times = uniform_grid(horizon, dt)?;
    let values = avg.on_grid(&times)?;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        return Err(Error::NoMaximum(format!("averaged signal is constant ({hi}) on [0, {horizon}]")));
    }
    let best = (1..values.len().saturating_sub(1))
        .filter(|&k| values[k] > values[k - 1] && values[k] >= values[k + 1])
        .max_by(|&a, &b| values[a].total_cmp(&values[b]))
        .ok_or_else(|| Error::NoMaximum(format!("averaged signal has no interior local maximum on [0, {horizon}]")))?;
    let (a, b) = (times[best - 1], times[best + 1]);
    let steps = ((b - a) / REFINED_STEP).round().max(2.0) as usize;
    let fine_t: Vec<f64> = (0..=steps).map(|s| a + (b - a) * s as f64 / steps as f64).collect();
    let fine = avg.on_grid(&fine_t)?;
    let kf = (0..fine.len()).max_by(|&x, &y| fine[x].total_cmp(&fine[y])).expect("non-empty");
    let (mut t, mut value) = (fine_t[kf], fine[kf]);
    if kf > 0 && kf + 1 < fine.len() {
        let (y0, y1, y2) = (fine[kf - 1], fine[kf], fine[kf + 1]);
        let denom = y0 - 2.0 * y1 + y2;
        if denom < 0.0 {
            let h = fine_t[kf + 1] - fine_t[kf];
            let shift = 0.5 * (y0 - y2) / denom;
            t += shift * h;
            value = y1 - 0.25 * (y0 - y2) * shift;
        }
    }
    Ok(OptimalTime { t, value, coarse_t: times[best] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_normalized() {
        for n in [8, 16, 32, 64, 5] {
            let a: f64 = QuadratureRule::alpha_weighted(n).unwrap().weights().iter().sum();
            let l: f64 = QuadratureRule::lambda_uniform(n).unwrap().weights().iter().sum();
            assert!((l - 1.0).abs() < 1e-14);
            assert!((a - 1.0).abs() < if n < 8 { 1e-4 } else { 1e-12 }, "{n}: {a}");
        }
        assert!(QuadratureRule::gauss_legendre(0.0, 1.0, 0).is_err());
        assert!(QuadratureRule::gauss_legendre(1.0, 1.0, 8).is_err());
    }

    #[test]
    fn composite_rule_integrates_polynomials() {
        let r = QuadratureRule::gauss_legendre(-1.0, 2.0, 32).unwrap();
        assert_eq!(r.len(), 32);
        assert!((r.integrate(|x| x.powi(7)) - (256.0 - 1.0) / 8.0).abs() < 1e-11);
        assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_has_zero_deviation() {
        let s = mean_over_alpha(|_, _| Ok(0.37), 0.8, 32).unwrap();
        assert!((s.mean - 0.37).abs() < 1e-14);
        assert!(s.deviation < 1e-7);
        let s = mean_over_lambda(|_, _| Ok(0.37), 0.2, 32).unwrap();
        assert!((s.mean - 0.37).abs() < 1e-14 && s.deviation < 1e-7);
        assert_eq!(s.axis, Axis::Lambda);
    }

    #[test]
    fn closed_form_alpha_means() {
        let s = mean_over_alpha(|_, a| Ok((a * PI).sin()), 0.6, 32).unwrap();
        assert!((s.mean - PI / 4.0).abs() < 1e-12);
        let s = mean_over_alpha(|_, a| Ok(a), 0.6, 32).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-13);
        // ⟨α²⟩ − ⟨α⟩² = 1/4 − 2/π²
        assert!((s.deviation - (0.25 - 2.0 / (PI * PI)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_lambda_means() {
        assert!((mean_over_lambda(|l, _| Ok(l), 0.3, 32).unwrap().mean - 0.75).abs() < 1e-14);
        let s = mean_over_lambda(|l, _| Ok(l * l), 0.3, 32).unwrap();
        assert!((s.mean - 7.0 / 12.0).abs() < 1e-14);
        let uniform_sd = (1.0f64 / 48.0).sqrt();
        assert!((mean_over_lambda(|l, _| Ok(l), 0.3, 32).unwrap().deviation - uniform_sd).abs() < 1e-13);
    }

    #[test]
    fn failing_integrand_propagates() {
        assert!(mean_over_alpha(|_, _| Err(Error::numerical("boom")), 0.6, 8).unwrap_err().is_numerical());
        let rule = QuadratureRule::lambda_uniform(8).unwrap();
        assert!(summarize(&[f64::NAN; 8], &rule, Axis::Lambda).unwrap_err().is_numerical());
        assert!(summarize(&[0.0; 3], &rule, Axis::Lambda).is_err());
    }

    #[test]
    fn averaged_signal_is_a_probability() {
        let cfg = ChainConfig::with_length(6).unwrap();
        let avg = SignalAverager::new(&cfg, 16).unwrap();
        for t in [0.0, 1.3, 4.0, 9.9] {
            let s = avg.at(t).unwrap();
            assert!((0.0..=1.0).contains(&s), "{t}: {s}");
        }
    }

    #[test]
    fn two_site_signal_is_flat() {
        let cfg = ChainConfig::with_length(2).unwrap();
        assert!(matches!(optimal_time(&cfg, 2.0 * PI, 0.01, 8), Err(Error::NoMaximum(_))));
    }

    #[test]
    fn optimum_is_interior() {
        let cfg = ChainConfig::with_length(4).unwrap();
        let opt = optimal_time(&cfg, 8.0, 0.01, 16).unwrap();
        assert!(opt.t > 0.0 && opt.t < 8.0);
        assert!((opt.t - opt.coarse_t).abs() <= 0.01);
        let avg = SignalAverager::new(&cfg, 16).unwrap();
        for d in [-1e-3, 1e-3] {
            assert!(avg.at(opt.t + d).unwrap() <= opt.value + 1e-12);
        }
    }
}
