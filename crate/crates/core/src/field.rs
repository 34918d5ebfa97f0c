//! Concurrence of every site pair sampled on a time grid.
//!
//! [`FieldEngine`] caches the evolved end-label amplitudes for each grid time
//! so that many initial states can share them; [`PointEvaluator`] evaluates
//! single concurrences lazily for scans that only need a few pairs.

use rayon::prelude::*;

use crate::config::ChainConfig;
use crate::entanglement::MixtureReducer;
use crate::error::{Error, Result};
use crate::evolution::{EndpointAmplitudes, EndpointMixture};
use crate::spectral::ChainModel;
use crate::state::InitialStateParams;

/// Equidistant grid `0, dt, 2dt, …` ending exactly at `t_end`.
pub fn uniform_grid(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInterval(format!("grid end must be non-negative, got {t_end}")));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut grid: Vec<f64> = (0..steps).map(|k| k as f64 * dt).collect();
    grid.push(t_end);
    Ok(grid)
}

/// Number of site pairs `i < j` in a chain of `n` spins.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Position of `(i, j)` in the lexicographic list of pairs.
pub fn pair_index(n: usize, i: usize, j: usize) -> Result<usize> {
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidPair { i, j, n });
    }
    Ok((1..i).map(|r| n - r).sum::<usize>() + (j - i - 1))
}

/// All pairs `i < j` in lexicographic order.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("time grid must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `C_{i,j}(t_k)` for every pair, stored pair-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceField {
    n: usize,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ConcurrenceField {
    /// Build from a closure `f(i, j, k)` returning the concurrence of pair
    /// `(i, j)` at grid index `k`. Values must lie in `[0, 1]`.
    pub fn from_fn(n: usize, times: Vec<f64>, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("chain needs at least 2 spins, got {n}")));
        }
        check_times(&times)?;
        let nt = times.len();
        let mut values = Vec::with_capacity(pair_count(n) * nt);
        for (i, j) in all_pairs(n) {
            for k in 0..nt {
                let c = f(i, j, k);
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::InvalidArgument(format!("concurrence {c} outside [0, 1] at pair ({i}, {j})")));
                }
                values.push(c);
            }
        }
        Ok(Self { n, times, values })
    }

    pub fn zeros(n: usize, times: Vec<f64>) -> Result<Self> {
        Self::from_fn(n, times, |_, _, _| 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn series(&self, i: usize, j: usize) -> Result<&[f64]> {
        let nt = self.times.len();
        let p = pair_index(self.n, i, j)?;
        Ok(&self.values[p * nt..(p + 1) * nt])
    }

    /// Value at grid index `k`; panics on an invalid pair or index.
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.series(i, j).expect("valid pair")[k]
    }

    /// Largest `|C_{i,j} − C_{N+1−j, N+1−i}|` over the field.
    pub fn mirror_deviation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for (i, j) in all_pairs(n) {
            let a = self.series(i, j).expect("valid pair");
            let b = self.series(n + 1 - j, n + 1 - i).expect("valid pair");
            worst = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
        }
        worst
    }
}

fn annotate(params: &InitialStateParams, t: f64) -> impl Fn(Error) -> Error {
    let (l, a) = (params.sender.lambda, params.sender.a1);
    move |e| e.at_params(l, a).at_time(t)
}

/// Time grid plus evolved end-label amplitudes, shareable across initial states.
#[derive(Clone, Debug)]
pub struct FieldEngine {
    model: ChainModel,
    times: Vec<f64>,
    amps: Vec<EndpointAmplitudes>,
    reducer: MixtureReducer,
}

impl FieldEngine {
    pub fn new(model: ChainModel, times: Vec<f64>) -> Result<Self> {
        check_times(&times)?;
        let amps = times.par_iter().map(|&t| EndpointAmplitudes::at(&model, t)).collect::<Result<Vec<_>>>()?;
        let reducer = MixtureReducer::new(model.basis());
        Ok(Self { model, times, amps, reducer })
    }

    /// Engine on the uniform grid over `[0, T_reg]`.
    pub fn for_registration(config: &ChainConfig, dt: f64) -> Result<Self> {
        let times = uniform_grid(config.registration_time()?, dt)?;
        Self::new(ChainModel::new(*config)?, times)
    }

    pub fn model(&self) -> &ChainModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn reducer(&self) -> &MixtureReducer {
        &self.reducer
    }

    pub fn mixture(&self, params: &InitialStateParams, k: usize) -> EndpointMixture {
        EndpointMixture::new(params, &self.amps[k])
    }

    /// Mixture at an arbitrary time, not necessarily on the grid.
    pub fn mixture_at(&self, params: &InitialStateParams, t: f64) -> Result<EndpointMixture> {
        let amps = EndpointAmplitudes::at(&self.model, t)?;
        Ok(EndpointMixture::new(params, &amps))
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        pair_index(self.n(), i, j).map(|_| ())
    }

    pub fn concurrence_at(&self, params: &InitialStateParams, i: usize, j: usize, t: f64) -> Result<f64> {
        self.check_pair(i, j)?;
        let mix = self.mixture_at(params, t)?;
        self.reducer.concurrence(&mix, i, j).map_err(annotate(params, t))
    }

    /// Unclamped concurrence margin at an arbitrary time.
    pub fn margin_at(&self, params: &InitialStateParams, i: usize, j: usize, t: f64) -> Result<f64> {
        self.check_pair(i, j)?;
        let mix = self.mixture_at(params, t)?;
        self.reducer.margin(&mix, i, j).map_err(annotate(params, t))
    }

    pub fn signal_at(&self, params: &InitialStateParams, t: f64) -> Result<f64> {
        Ok(self.reducer.signal(&self.mixture_at(params, t)?))
    }

    /// Full field for one initial state, parallel over grid times.
    pub fn field(&self, params: &InitialStateParams) -> Result<ConcurrenceField> {
        params.validate()?;
        let n = self.n();
        let pairs = all_pairs(n);
        let slices = (0..self.times.len())
            .into_par_iter()
            .map(|k| {
                let mix = self.mixture(params, k);
                pairs
                    .iter()
                    .map(|&(i, j)| self.reducer.concurrence(&mix, i, j))
                    .collect::<Result<Vec<f64>>>()
                    .map_err(annotate(params, self.times[k]))
            })
            .collect::<Result<Vec<_>>>()?;
        let nt = self.times.len();
        let mut values = vec![0.0; pairs.len() * nt];
        for (k, slice) in slices.iter().enumerate() {
            for (p, &c) in slice.iter().enumerate() {
                values[p * nt + k] = c;
            }
        }
        Ok(ConcurrenceField { n, times: self.times.clone(), values })
    }

    pub fn evaluator(&self, params: &InitialStateParams) -> Result<PointEvaluator<'_>> {
        params.validate()?;
        let nt = self.times.len();
        Ok(PointEvaluator {
            engine: self,
            params: *params,
            mixtures: vec![None; nt],
            cache: vec![f64::NAN; pair_count(self.n()) * nt],
        })
    }
}

/// Lazily evaluated, memoized concurrences of one initial state.
pub struct PointEvaluator<'a> {
    engine: &'a FieldEngine,
    params: InitialStateParams,
    mixtures: Vec<Option<EndpointMixture>>,
    cache: Vec<f64>,
}

impl PointEvaluator<'_> {
    pub fn params(&self) -> &InitialStateParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        &self.engine.times
    }

    fn mixture(&mut self, k: usize) -> &EndpointMixture {
        let (engine, params) = (self.engine, &self.params);
        self.mixtures[k].get_or_insert_with(|| engine.mixture(params, k))
    }

    /// Concurrence of pair `(i, j)` at grid index `k`.
    pub fn concurrence(&mut self, i: usize, j: usize, k: usize) -> Result<f64> {
        let nt = self.engine.times.len();
        let slot = pair_index(self.engine.n(), i, j)? * nt + k;
        let cached = self.cache[slot];
        if !cached.is_nan() {
            return Ok(cached);
        }
        let engine = self.engine;
        let params = self.params;
        let c = engine.reducer.concurrence(self.mixture(k), i, j).map_err(annotate(&params, engine.times[k]))?;
        self.cache[slot] = c;
        Ok(c)
    }

    /// Unclamped margin of pair `(i, j)` at grid index `k` (not cached).
    pub fn margin(&mut self, i: usize, j: usize, k: usize) -> Result<f64> {
        pair_index(self.engine.n(), i, j)?;
        let engine = self.engine;
        let params = self.params;
        engine.reducer.margin(self.mixture(k), i, j).map_err(annotate(&params, engine.times[k]))
    }

    pub fn series(&mut self, i: usize, j: usize) -> Result<Vec<f64>> {
        (0..self.engine.times.len()).map(|k| self.concurrence(i, j, k)).collect()
    }

    /// Time maximum of `C_{i,j}` over the grid.
    pub fn max_over_time(&mut self, i: usize, j: usize) -> Result<f64> {
        Ok(self.series(i, j)?.into_iter().fold(0.0, f64::max))
    }
}

/// Concurrence field of one initial state on an explicit time grid.
pub fn compute_field(params: &InitialStateParams, config: &ChainConfig, times: Vec<f64>) -> Result<ConcurrenceField> {
    FieldEngine::new(ChainModel::new(*config)?, times)?.field(params)
}
