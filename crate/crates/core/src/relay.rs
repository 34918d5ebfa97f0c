//! Equidistant-group means, relay entanglement and its partial sums.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ConcurrenceField, FieldEngine};
use crate::state::InitialStateParams;

/// Lower time cut for the minima of the partial sums: the product initial
/// state makes every pair unentangled near `t = 0`.
pub const MIN_WINDOW_START: f64 = 1.0;

/// `𝒞_m(t) = (1/(N−m)) Σ_i C_{i,i+m}(t)`.
pub fn group_mean(field: &ConcurrenceField, m: usize) -> Result<Vec<f64>> {
    let n = field.n();
    if !(1..n).contains(&m) {
        return Err(Error::InvalidArgument(format!("separation {m} outside 1..={}", n - 1)));
    }
    let mut out = vec![0.0; field.times().len()];
    for i in 1..=n - m {
        for (acc, c) in out.iter_mut().zip(field.series(i, i + m)?) {
            *acc += c;
        }
    }
    let scale = 1.0 / (n - m) as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Group means `𝒞_m` and partial sums `S_m` for `m = 1..N−1` on one time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RelayProfile {
    times: Vec<f64>,
    group_means: Vec<Vec<f64>>,
    partial_sums: Vec<Vec<f64>>,
}

impl RelayProfile {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Largest separation `N − 1`.
    pub fn max_separation(&self) -> usize {
        self.group_means.len()
    }

    pub fn group_mean(&self, m: usize) -> &[f64] {
        &self.group_means[m - 1]
    }

    pub fn partial_sum(&self, m: usize) -> &[f64] {
        &self.partial_sums[m - 1]
    }

    /// Relay entanglement `S = S_{N−1}`.
    pub fn relay(&self) -> &[f64] {
        self.partial_sums.last().expect("at least one group")
    }

    /// True when `S_1 ≤ S_2 ≤ … ≤ S_{N−1}` at every sample.
    pub fn chain_holds(&self) -> bool {
        self.partial_sums.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b))
    }
}

/// Accumulate `S_m = Σ_{k ≤ m} 𝒞_k`.
pub fn partial_sums(field: &ConcurrenceField) -> Result<RelayProfile> {
    let n = field.n();
    let group_means = (1..n).map(|m| group_mean(field, m)).collect::<Result<Vec<_>>>()?;
    let mut partial_sums: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for g in &group_means {
        let next = match partial_sums.last() {
            Some(prev) => prev.iter().zip(g).map(|(s, c)| s + c).collect(),
            None => g.clone(),
        };
        partial_sums.push(next);
    }
    Ok(RelayProfile { times: field.times().to_vec(), group_means, partial_sums })
}

/// Time extrema of one partial sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumExtrema {
    pub m: usize,
    pub max: f64,
    pub t_at_max: f64,
    pub min: f64,
    pub t_at_min: f64,
}

fn window(times: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    let tol = 1e-9;
    (0..times.len()).filter(|&k| times[k] >= lo - tol && times[k] <= hi + tol).collect()
}

fn check_horizon(times: &[f64], t_max: f64) -> Result<()> {
    if t_max.is_nan() || t_max <= MIN_WINDOW_START {
        return Err(Error::InvalidInterval(format!("t_max must exceed {MIN_WINDOW_START}, got {t_max}")));
    }
    let last = *times.last().expect("non-empty grid");
    if t_max > last + 1e-9 {
        return Err(Error::InvalidInterval(format!("t_max {t_max} beyond the sampled range ending at {last}")));
    }
    Ok(())
}

fn extremum(series: &[f64], idx: &[usize], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = idx[0];
    for &k in idx {
        if better(series[k], series[best]) {
            best = k;
        }
    }
    (best, series[best])
}

/// Grid extrema of every `S_m`: maximum over `[0, t_max]`, minimum over `[1, t_max]`.
pub fn time_extrema(profile: &RelayProfile, t_max: f64) -> Result<Vec<SumExtrema>> {
    let times = profile.times();
    check_horizon(times, t_max)?;
    let full = window(times, 0.0, t_max);
    let late = window(times, MIN_WINDOW_START, t_max);
    if late.is_empty() {
        return Err(Error::InvalidInterval("no samples in the minimum window".into()));
    }
    Ok((1..=profile.max_separation())
        .map(|m| {
            let s = profile.partial_sum(m);
            let (kmax, max) = extremum(s, &full, |a, b| a > b);
            let (kmin, min) = extremum(s, &late, |a, b| a < b);
            SumExtrema { m, max, t_at_max: times[kmax], min, t_at_min: times[kmin] }
        })
        .collect())
}

/// Relative gaps `|S_{m−1}^max − S_m^max| / S_{m−1}^max` and the minimum
/// analogue for `m = 2..N−1`. A zero denominator yields `None`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NegligibilityGap {
    pub m: usize,
    pub max_gap: Option<f64>,
    pub min_gap: Option<f64>,
}

pub fn negligibility_gaps(extrema: &[SumExtrema]) -> Vec<NegligibilityGap> {
    let rel = |prev: f64, cur: f64| (prev > 0.0).then(|| (prev - cur).abs() / prev);
    extrema
        .windows(2)
        .map(|w| NegligibilityGap { m: w[1].m, max_gap: rel(w[0].max, w[1].max), min_gap: rel(w[0].min, w[1].min) })
        .collect()
}

/// `S_m` evaluated directly at one time.
pub fn partial_sum_at(engine: &FieldEngine, params: &InitialStateParams, m: usize, t: f64) -> Result<f64> {
    let n = engine.n();
    if !(1..n).contains(&m) {
        return Err(Error::InvalidArgument(format!("separation {m} outside 1..={}", n - 1)));
    }
    let mix = engine.mixture_at(params, t)?;
    let mut total = 0.0;
    for d in 1..=m {
        let mut group = 0.0;
        for i in 1..=n - d {
            group += engine
                .reducer()
                .concurrence(&mix, i, i + d)
                .map_err(|e| e.at_params(params.sender.lambda, params.sender.a1).at_time(t))?;
        }
        total += group / (n - d) as f64;
    }
    Ok(total)
}

/// Step of the local resampling around grid extrema.
pub const REFINED_STEP: f64 = 1e-4;

/// Resample each grid extremum on a `REFINED_STEP` grid spanning the
/// neighbouring coarse samples, clipped to the extremum's window.
pub fn refine_extrema(
    engine: &FieldEngine,
    params: &InitialStateParams,
    coarse: &[SumExtrema],
    t_max: f64,
) -> Result<Vec<SumExtrema>> {
    let times = engine.times();
    check_horizon(times, t_max)?;
    let dt = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let sample = |m: usize, centre: f64, lo: f64, hi: f64| -> Result<Vec<(f64, f64)>> {
        let a = (centre - dt).max(lo);
        let b = (centre + dt).min(hi);
        let steps = ((b - a) / REFINED_STEP).round() as usize;
        (0..=steps)
            .map(|s| {
                let t = if steps == 0 { a } else { a + (b - a) * s as f64 / steps as f64 };
                Ok((t, partial_sum_at(engine, params, m, t)?))
            })
            .collect()
    };
    coarse
        .iter()
        .map(|e| {
            let mut out = *e;
            for (t, v) in sample(e.m, e.t_at_max, 0.0, t_max)? {
                if v > out.max {
                    out.max = v;
                    out.t_at_max = t;
                }
            }
            for (t, v) in sample(e.m, e.t_at_min, MIN_WINDOW_START, t_max)? {
                if v < out.min {
                    out.min = v;
                    out.t_at_min = t;
                }
            }
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ChainConfig;
    use crate::field::uniform_grid;
    use crate::spectral::ChainModel;
    use crate::state::symmetric_params;

    fn grid(t: f64, dt: f64) -> Vec<f64> {
        uniform_grid(t, dt).unwrap()
    }

    #[test]
    fn zero_field_gives_zero_sums() {
        let f = ConcurrenceField::zeros(5, grid(3.0, 0.5)).unwrap();
        let p = partial_sums(&f).unwrap();
        for m in 1..5 {
            assert!(p.group_mean(m).iter().all(|&v| v == 0.0));
            assert!(p.partial_sum(m).iter().all(|&v| v == 0.0));
        }
        assert!(p.chain_holds());
    }

    #[test]
    fn group_mean_averages_equal_separations() {
        let f = ConcurrenceField::from_fn(4, vec![0.0, 1.0], |i, j, k| {
            if j - i == 1 {
                0.1 * i as f64 + 0.01 * k as f64
            } else {
                0.0
            }
        })
        .unwrap();
        let g = group_mean(&f, 1).unwrap();
        assert!((g[0] - 0.2).abs() < 1e-15);
        assert!((g[1] - 0.21).abs() < 1e-15);
        assert!(group_mean(&f, 0).is_err());
        assert!(group_mean(&f, 4).is_err());
    }

    #[test]
    fn last_group_is_end_pair() {
        let f = ConcurrenceField::from_fn(5, grid(1.0, 0.5), |i, j, k| ((i * 7 + j * 3 + k) % 5) as f64 / 5.0).unwrap();
        assert_eq!(group_mean(&f, 4).unwrap(), f.series(1, 5).unwrap());
        let p = partial_sums(&f).unwrap();
        assert_eq!(p.partial_sum(1), p.group_mean(1));
        assert_eq!(p.relay(), p.partial_sum(4));
        for m in 2..5 {
            for k in 0..3 {
                let d = p.partial_sum(m)[k] - p.partial_sum(m - 1)[k];
                assert!((d - p.group_mean(m)[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn extrema_of_constant_profile() {
        let f = ConcurrenceField::from_fn(3, grid(4.0, 0.5), |_, _, _| 0.3).unwrap();
        let ex = time_extrema(&partial_sums(&f).unwrap(), 4.0).unwrap();
        for e in &ex {
            assert!((e.max - e.min).abs() < 1e-15);
        }
        assert!((ex[1].max - 0.6).abs() < 1e-15);
    }

    #[test]
    fn extrema_windows() {
        let times = grid(5.0, 0.5);
        let f = ConcurrenceField::from_fn(2, times.clone(), |_, _, k| {
            [0.0, 0.2, 0.9, 0.4, 0.5, 0.6, 0.7, 0.8, 0.3, 0.35, 0.45][k]
        })
        .unwrap();
        let p = partial_sums(&f).unwrap();
        let e = time_extrema(&p, 4.0).unwrap()[0];
        assert_eq!((e.max, e.t_at_max), (0.9, 1.0));
        assert_eq!((e.min, e.t_at_min), (0.3, 4.0));
        assert!(time_extrema(&p, 1.0).is_err());
        assert!(time_extrema(&p, 6.0).is_err());
    }

    #[test]
    fn gaps_are_relative_differences() {
        let ex = [
            SumExtrema { m: 1, max: 0.5, t_at_max: 1.0, min: 0.0, t_at_min: 2.0 },
            SumExtrema { m: 2, max: 0.6, t_at_max: 1.0, min: 0.1, t_at_min: 2.0 },
        ];
        let g = negligibility_gaps(&ex);
        assert_eq!(g.len(), 1);
        assert!((g[0].max_gap.unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(g[0].min_gap, None);
    }

    #[test]
    fn physical_profile_starts_at_zero_and_is_ordered() {
        let model = ChainModel::new(ChainConfig::with_length(6).unwrap()).unwrap();
        let engine = FieldEngine::new(model, grid(6.0, 0.05)).unwrap();
        let params = symmetric_params(0.9, 0.2).unwrap();
        let p = partial_sums(&engine.field(&params).unwrap()).unwrap();
        assert!(p.chain_holds());
        for m in 1..6 {
            assert_eq!(p.group_mean(m)[0], 0.0);
        }
        let direct = partial_sum_at(&engine, &params, 3, engine.times()[40]).unwrap();
        assert!((direct - p.partial_sum(3)[40]).abs() < 1e-12);
    }

    #[test]
    fn refinement_never_worsens_extrema() {
        let model = ChainModel::new(ChainConfig::with_length(5).unwrap()).unwrap();
        let engine = FieldEngine::new(model, grid(5.0, 0.05)).unwrap();
        let params = symmetric_params(0.95, 0.1).unwrap();
        let p = partial_sums(&engine.field(&params).unwrap()).unwrap();
        let coarse = time_extrema(&p, 5.0).unwrap();
        let fine = refine_extrema(&engine, &params, &coarse[..2], 5.0).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(f.max >= c.max && f.min <= c.min);
            assert!(f.max - c.max < 1e-2);
            assert!(f.t_at_min >= MIN_WINDOW_START);
        }
    }
}
