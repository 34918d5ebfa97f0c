//! Where sender-receiver entanglement first appears: the zero-entanglement
//! boundary in the `(λ^R, λ^S)` plane and its crossing with the bisectrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldEngine;
use crate::state::{symmetric_params, InitialStateParams, QubitParams};

/// Concurrence above which entanglement is considered present.
pub const EXISTENCE_THRESHOLD: f64 = 1e-6;

/// Golden-section ratio `1/φ`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximum of `f` on `[a, b]` by golden-section search to width `tol`.
pub fn golden_max(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Largest sender-receiver concurrence margin over the engine's time grid,
/// with its grid index.
fn sr_grid_peak(engine: &FieldEngine, params: &InitialStateParams) -> Result<(usize, f64)> {
    let n = engine.n();
    let mut ev = engine.evaluator(params)?;
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..engine.times().len() {
        let m = ev.margin(1, n, k)?;
        if m > best.1 {
            best = (k, m);
        }
    }
    Ok(best)
}

/// Grid peak polished by a golden-section search in time between the
/// neighbouring samples.
fn sr_refined_peak(engine: &FieldEngine, params: &InitialStateParams, tol: f64) -> Result<f64> {
    let (k, grid) = sr_grid_peak(engine, params)?;
    let times = engine.times();
    let a = times[k.saturating_sub(1)];
    let b = times[(k + 1).min(times.len() - 1)];
    if b <= a {
        return Ok(grid);
    }
    let (_, refined) = golden_max(|t| engine.margin_at(params, 1, engine.n(), t), a, b, tol)?;
    Ok(refined.max(grid))
}

/// Best α on `alphas` for the symmetric state at `lambda`, polished by a
/// golden-section search over the neighbouring grid cells.
fn best_alpha(engine: &FieldEngine, lambda: f64, alphas: &[f64], tol: f64) -> Result<(f64, f64)> {
    let peaks = alphas
        .par_iter()
        .map(|&a| Ok(sr_grid_peak(engine, &symmetric_params(lambda, a)?)?.1))
        .collect::<Result<Vec<f64>>>()?;
    let k = (0..alphas.len()).max_by(|&x, &y| peaks[x].total_cmp(&peaks[y])).expect("non-empty alpha grid");
    let a = alphas[k.saturating_sub(1)];
    let b = alphas[(k + 1).min(alphas.len() - 1)];
    let (alpha, _) = if b > a {
        golden_max(|a| Ok(sr_grid_peak(engine, &symmetric_params(lambda, a)?)?.1), a, b, tol)?
    } else {
        (alphas[k], peaks[k])
    };
    let alpha = if sr_grid_peak(engine, &symmetric_params(lambda, alpha)?)?.1 >= peaks[k] { alpha } else { alphas[k] };
    Ok((alpha, sr_refined_peak(engine, &symmetric_params(lambda, alpha)?, tol)?))
}

/// Search settings for [`bisectrix_crossing`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingSettings {
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub tolerance: f64,
    pub threshold: f64,
}

impl Default for CrossingSettings {
    fn default() -> Self {
        Self {
            lambdas: (0..=50).map(|k| 0.5 + 0.01 * k as f64).collect(),
            alphas: (0..=50).map(|k| 0.02 * k as f64).collect(),
            tolerance: 1e-4,
            threshold: EXISTENCE_THRESHOLD,
        }
    }
}

/// Point on the bisectrix where sender-receiver entanglement appears.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BisectrixCrossing {
    pub lambda: f64,
    pub alpha: f64,
    /// Largest concurrence margin over α and t at the returned λ.
    pub peak: f64,
    /// `(λ, max_{α,t} margin)` on the coarse λ grid.
    pub scan: Vec<(f64, f64)>,
}

/// Smallest symmetric λ on `[1/2, 1]` for which `max_{α,t} C_{1,N}` exceeds
/// the threshold, and the α attaining it. The coarse indicator must be
/// non-decreasing in λ; the transition cell is then bisected.
pub fn bisectrix_crossing(engine: &FieldEngine, settings: &CrossingSettings) -> Result<BisectrixCrossing> {
    let CrossingSettings { lambdas, alphas, tolerance, threshold } = settings;
    if lambdas.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidArgument("crossing search needs non-empty grids".into()));
    }
    if tolerance.is_nan() || *tolerance <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let scan = lambdas
        .iter()
        .map(|&l| {
            let peaks = alphas
                .par_iter()
                .map(|&a| Ok(sr_grid_peak(engine, &symmetric_params(l, a)?)?.1))
                .collect::<Result<Vec<f64>>>()?;
            Ok((l, peaks.into_iter().fold(f64::NEG_INFINITY, f64::max)))
        })
        .collect::<Result<Vec<_>>>()?;
    let flags: Vec<bool> = scan.iter().map(|&(_, v)| v > *threshold).collect();
    let first = flags
        .iter()
        .position(|&f| f)
        .ok_or_else(|| Error::NotFound("no sender-receiver entanglement anywhere on the bisectrix".into()))?;
    if let Some(back) = flags[first..].iter().position(|&f| !f) {
        return Err(Error::NonMonotone(format!(
            "entanglement present at lambda={} but absent at lambda={}",
            lambdas[first],
            lambdas[first + back]
        )));
    }
    let (mut lo, mut hi) = (if first == 0 { lambdas[0] } else { lambdas[first - 1] }, lambdas[first]);
    let (mut alpha, mut peak) = best_alpha(engine, hi, alphas, *tolerance)?;
    if first > 0 {
        while hi - lo > *tolerance {
            let mid = 0.5 * (lo + hi);
            let (a, p) = best_alpha(engine, mid, alphas, *tolerance)?;
            if p > *threshold {
                hi = mid;
                alpha = a;
                peak = p;
            } else {
                lo = mid;
            }
        }
    }
    Ok(BisectrixCrossing { lambda: hi, alpha, peak, scan })
}

/// How the sender and receiver angles are sampled in a boundary scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    /// One angle shared by sender and receiver.
    Tied,
    /// Sender and receiver angles scanned independently.
    Independent,
}

/// Indicator of sender-receiver entanglement over the `(λ^R, λ^S)` plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryCurve {
    pub lambdas_r: Vec<f64>,
    pub lambdas_s: Vec<f64>,
    /// `entangled[s * lambdas_r.len() + r]`.
    pub entangled: Vec<bool>,
    /// Midpoints between neighbouring cells of opposite indicator along λ^R, as `(λ^R, λ^S)`.
    pub points: Vec<(f64, f64)>,
    pub crossing: Option<(f64, f64)>,
}

impl BoundaryCurve {
    pub fn is_entangled(&self, r: usize, s: usize) -> bool {
        self.entangled[s * self.lambdas_r.len() + r]
    }
}

fn entangled_somewhere(engine: &FieldEngine, params: &InitialStateParams, threshold: f64) -> Result<bool> {
    let n = engine.n();
    let mut ev = engine.evaluator(params)?;
    for k in 0..engine.times().len() {
        if ev.margin(1, n, k)? > threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Scan the sender/receiver eigenvalue plane with zero phases.
pub fn boundary_scan(
    engine: &FieldEngine,
    lambdas_r: &[f64],
    lambdas_s: &[f64],
    alphas: &[f64],
    mode: AngleMode,
    threshold: f64,
) -> Result<BoundaryCurve> {
    if lambdas_r.is_empty() || lambdas_s.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidArgument("boundary scan needs non-empty grids".into()));
    }
    let nr = lambdas_r.len();
    let entangled = (0..nr * lambdas_s.len())
        .into_par_iter()
        .map(|idx| {
            let (lr, ls) = (lambdas_r[idx % nr], lambdas_s[idx / nr]);
            let angle_pairs: Vec<(f64, f64)> = match mode {
                AngleMode::Tied => alphas.iter().map(|&a| (a, a)).collect(),
                AngleMode::Independent => alphas.iter().flat_map(|&a| alphas.iter().map(move |&b| (a, b))).collect(),
            };
            for (a, b) in angle_pairs {
                let params = InitialStateParams::new(QubitParams::new(ls, a, 0.0)?, QubitParams::new(lr, b, 0.0)?)?;
                if entangled_somewhere(engine, &params, threshold)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<Vec<bool>>>()?;
    let mut points = Vec::new();
    for (s, &ls) in lambdas_s.iter().enumerate() {
        for r in 1..nr {
            if entangled[s * nr + r] != entangled[s * nr + r - 1] {
                points.push((0.5 * (lambdas_r[r - 1] + lambdas_r[r]), ls));
            }
        }
    }
    Ok(BoundaryCurve {
        lambdas_r: lambdas_r.to_vec(),
        lambdas_s: lambdas_s.to_vec(),
        entangled,
        points,
        crossing: None,
    })
}
