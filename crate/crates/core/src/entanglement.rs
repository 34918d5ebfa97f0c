//! Two-spin reduced states, Wootters concurrence, entanglement of formation
//! and the sender/receiver registration signal.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::evolution::EndpointMixture;
use crate::spectral::{Label, SectorBasis, SECTORS};
use crate::state::BlockDensityMatrix;
use crate::Complex;

/// Reduced density matrix of sites `(i, j)`, `i < j`, in the ordered basis
/// |00⟩, |01⟩, |10⟩, |11⟩ where the first bit is site `i` and 1 marks an excitation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState {
    pub matrix: Matrix4<Complex>,
    pub pair: (usize, usize),
}

impl TwoQubitState {
    /// Wrap a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(matrix: Matrix4<Complex>, pair: (usize, usize)) -> Result<Self> {
        let herm = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::InvalidArgument(format!("two-qubit matrix not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - Complex::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidArgument(format!("two-qubit matrix has trace {tr}")));
        }
        let min = SymmetricEigen::new(hermitian_part(&matrix)).eigenvalues.min();
        if min < -1e-10 {
            return Err(Error::InvalidArgument(format!("two-qubit matrix has eigenvalue {min:e}")));
        }
        Ok(Self { matrix, pair })
    }
}

fn hermitian_part(m: &Matrix4<Complex>) -> Matrix4<Complex> {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

/// Basis labels grouped by their configuration outside a site pair: labels
/// within one group differ only on the pair, so they are exactly the entries
/// that survive the partial trace.
#[derive(Clone, Debug)]
pub struct PairSplit {
    i: usize,
    j: usize,
    groups: Vec<Vec<(usize, usize)>>,
}

impl PairSplit {
    pub fn new(basis: &SectorBasis, i: usize, j: usize) -> Result<Self> {
        let n = basis.n();
        if !(1 <= i && i < j && j <= n) {
            return Err(Error::InvalidPair { i, j, n });
        }
        let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); basis.dim()];
        for label in basis.labels() {
            let rest = label.without(i).without(j);
            let code = 2 * usize::from(label.contains(i)) + usize::from(label.contains(j));
            let key = basis.global_index(&rest).expect("rest label in basis");
            let idx = basis.global_index(label).expect("label in basis");
            slots[key].push((code, idx));
        }
        let groups = slots.into_iter().filter(|g| !g.is_empty()).collect();
        Ok(Self { i, j, groups })
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn reduce_dense(&self, dense: &nalgebra::DMatrix<Complex>) -> Matrix4<Complex> {
        let mut out = Matrix4::zeros();
        for group in &self.groups {
            for &(ca, xa) in group {
                for &(cb, xb) in group {
                    out[(ca, cb)] += dense[(xa, xb)];
                }
            }
        }
        out
    }
}

/// Closed-form two-site reduction of an [`EndpointMixture`].
///
/// For a pure state with vacuum amplitude `a`, single-excitation amplitudes
/// `b_p` and pair amplitudes `c_pq`, every entry of the reduced matrix is a
/// sum over at most one spectator site `k`, so the reduction costs O(N).
#[derive(Clone, Debug)]
pub struct MixtureReducer {
    n: usize,
    single: Vec<usize>,
    double: Vec<usize>,
}

impl MixtureReducer {
    pub fn new(basis: &SectorBasis) -> Self {
        let n = basis.n();
        let single = (1..=n).map(|p| basis.global_index(&Label::One(p)).expect("single label")).collect();
        let mut double = vec![usize::MAX; (n + 1) * (n + 1)];
        for p in 1..=n {
            for q in p + 1..=n {
                let g = basis.global_index(&Label::Two(p, q)).expect("pair label");
                double[p * (n + 1) + q] = g;
                double[q * (n + 1) + p] = g;
            }
        }
        Self { n, single, double }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn pair(&self, p: usize, q: usize) -> usize {
        self.double[p * (self.n + 1) + q]
    }

    /// Registration signal of the end pair: total weight of labels that
    /// excite site 1 or site N.
    pub fn signal(&self, mix: &EndpointMixture) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for (m, &w) in mix.weights().iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let psi = mix.state(m);
            let mut acc = psi[self.single[0]].norm_sqr() + psi[self.single[n - 1]].norm_sqr();
            for k in 2..=n {
                acc += psi[self.pair(1, k)].norm_sqr();
            }
            for k in 2..n {
                acc += psi[self.pair(k, n)].norm_sqr();
            }
            s += w * acc;
        }
        s
    }

    /// Factor `W` with `ρ_ij = W W†`, assembled from the amplitudes and
    /// compressed to 4×4 by a Householder QR. Concurrence computed from `W`
    /// avoids square roots of tiny eigenvalues of `ρ_ij`, which otherwise turn
    /// rounding noise into errors of order √ε.
    pub fn factor(&self, mix: &EndpointMixture, i: usize, j: usize) -> Matrix4<Complex> {
        let zero = Complex::new(0.0, 0.0);
        let mut rows: Vec<[Complex; 4]> = Vec::with_capacity(4 * self.n);
        for (m, &w) in mix.weights().iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let sw = w.sqrt();
            let psi = mix.state(m);
            // one row per configuration of the other sites, components in pair codes 0..3
            rows.push([
                psi[0] * sw,
                psi[self.single[j - 1]] * sw,
                psi[self.single[i - 1]] * sw,
                psi[self.pair(i, j)] * sw,
            ]);
            let mut rest = 0.0;
            for k in (1..=self.n).filter(|&k| k != i && k != j) {
                rows.push([psi[self.single[k - 1]] * sw, psi[self.pair(j, k)] * sw, psi[self.pair(i, k)] * sw, zero]);
                for l in (k + 1..=self.n).filter(|&l| l != i && l != j) {
                    rest += psi[self.pair(k, l)].norm_sqr();
                }
            }
            if rest > 0.0 {
                rows.push([Complex::new((w * rest).sqrt(), 0.0), zero, zero, zero]);
            }
        }
        while rows.len() < 4 {
            rows.push([zero; 4]);
        }
        let g_t = DMatrix::from_fn(rows.len(), 4, |r, c| rows[r][c]);
        let r = g_t.qr().r();
        // Gᵀ = QR  ⇒  ρ = G G† = Rᵀ R̄
        Matrix4::from_fn(|a, b| r[(b, a)])
    }

    /// Concurrence of sites `i < j` through [`MixtureReducer::factor`].
    pub fn concurrence(&self, mix: &EndpointMixture, i: usize, j: usize) -> Result<f64> {
        concurrence_from_factor(&self.factor(mix, i, j))
    }

    /// Unclamped concurrence margin of sites `i < j`.
    pub fn margin(&self, mix: &EndpointMixture, i: usize, j: usize) -> Result<f64> {
        let l = factor_roots(&self.factor(mix, i, j))?;
        Ok(l[0] - l[1] - l[2] - l[3])
    }

    /// Reduced state of sites `i < j`; indices are assumed valid.
    pub fn reduce(&self, mix: &EndpointMixture, i: usize, j: usize) -> Matrix4<Complex> {
        let zero = Complex::new(0.0, 0.0);
        let mut out = Matrix4::<Complex>::zeros();
        for (m, &w) in mix.weights().iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let psi = mix.state(m);
            let a = psi[0];
            let bi = psi[self.single[i - 1]];
            let bj = psi[self.single[j - 1]];
            let cij = psi[self.pair(i, j)];
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            let (mut s10, mut s01) = (bi.norm_sqr(), bj.norm_sqr());
            let mut cross = bi * bj.conj();
            let (mut y10, mut y01) = (a * bi.conj(), a * bj.conj());
            for k in 1..=self.n {
                if k == i || k == j {
                    continue;
                }
                let bk = psi[self.single[k - 1]];
                let cik = psi[self.pair(i, k)];
                let cjk = psi[self.pair(j, k)];
                s10 += cik.norm_sqr();
                s01 += cjk.norm_sqr();
                cross += cik * cjk.conj();
                if bk != zero {
                    y10 += bk * cik.conj();
                    y01 += bk * cjk.conj();
                }
            }
            let s11 = cij.norm_sqr();
            // codes: 0 = |00⟩, 1 = |01⟩ (j excited), 2 = |10⟩ (i excited), 3 = |11⟩
            out[(0, 0)] += Complex::new(w * (norm - s10 - s01 - s11), 0.0);
            out[(1, 1)] += Complex::new(w * s01, 0.0);
            out[(2, 2)] += Complex::new(w * s10, 0.0);
            out[(3, 3)] += Complex::new(w * s11, 0.0);
            out[(2, 1)] += cross * w;
            out[(0, 2)] += y10 * w;
            out[(0, 1)] += y01 * w;
            out[(0, 3)] += a * cij.conj() * w;
            out[(1, 3)] += bj * cij.conj() * w;
            out[(2, 3)] += bi * cij.conj() * w;
        }
        for r in 0..4 {
            for c in r + 1..4 {
                if (r, c) != (1, 2) {
                    out[(c, r)] = out[(r, c)].conj();
                }
            }
        }
        out[(1, 2)] = out[(2, 1)].conj();
        out
    }
}

/// Partial trace of a block state over every site except `i` and `j`.
pub fn reduce_pair(rho: &BlockDensityMatrix, basis: &SectorBasis, i: usize, j: usize) -> Result<TwoQubitState> {
    let n = basis.n();
    if rho.n() != n {
        return Err(Error::InvalidArgument("state and basis built for different chains".into()));
    }
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidPair { i, j, n });
    }
    let mut out = Matrix4::<Complex>::zeros();
    for k in 0..SECTORS {
        for l in 0..SECTORS {
            let block = rho.block(k, l);
            for (r, lr) in basis.sector(k).iter().enumerate() {
                let rest = lr.without(i).without(j);
                let ca = code(lr, i, j);
                for (c, lc) in basis.sector(l).iter().enumerate() {
                    if lc.without(i).without(j) == rest {
                        out[(ca, code(lc, i, j))] += block[(r, c)];
                    }
                }
            }
        }
    }
    Ok(TwoQubitState { matrix: out, pair: (i, j) })
}

fn code(label: &Label, i: usize, j: usize) -> usize {
    2 * usize::from(label.contains(i)) + usize::from(label.contains(j))
}

/// Negative-eigenvalue tolerance for the input state before it is treated as invalid.
const NEGATIVITY_TOLERANCE: f64 = 1e-8;

/// Eigenvalues of ρ below this are treated as exact zeros. The spin-flip roots
/// depend on them through a square root, so rounding noise of order 1e-17 in
/// a rank-deficient state would otherwise move the concurrence by ~1e-10.
const RANK_FLOOR: f64 = 1e-14;

/// Margins below this are rounding noise on separable states and reported as zero.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Determinant of the partial transpose on the second qubit. A two-qubit
/// state is entangled iff this is negative.
fn partial_transpose_det(rho: &Matrix4<Complex>) -> f64 {
    let pt = Matrix4::from_fn(|r, c| {
        let (a, b) = (r / 2, r % 2);
        let (cc, d) = (c / 2, c % 2);
        rho[(2 * a + d, 2 * cc + b)]
    });
    pt.determinant().re
}

/// The square roots λ1 ≥ λ2 ≥ λ3 ≥ λ4 of the eigenvalues of ρ(σy⊗σy)ρ*(σy⊗σy).
///
/// With ρ = W W†, these are the singular values of Wᵀ(σy⊗σy)W, which avoids
/// a non-Hermitian eigenproblem.
pub fn spin_flip_roots(rho: &Matrix4<Complex>) -> Result<[f64; 4]> {
    let eig = SymmetricEigen::new(hermitian_part(rho));
    let min = eig.eigenvalues.min();
    if min < -NEGATIVITY_TOLERANCE {
        return Err(Error::numerical(format!("two-qubit state has negative eigenvalue {min:e}")));
    }
    let mut w = eig.eigenvectors;
    for (c, &e) in eig.eigenvalues.iter().enumerate() {
        let s = if e < RANK_FLOOR { 0.0 } else { e.sqrt() };
        w.column_mut(c).scale_mut(s);
    }
    factor_roots(&w)
}

/// Spin-flip roots from any factor `W` with `ρ = W W†`.
pub fn factor_roots(w: &Matrix4<Complex>) -> Result<[f64; 4]> {
    // (σy⊗σy) = antidiag(−1, 1, 1, −1)
    let mut yw = Matrix4::<Complex>::zeros();
    for c in 0..4 {
        yw[(0, c)] = -w[(3, c)];
        yw[(1, c)] = w[(2, c)];
        yw[(2, c)] = w[(1, c)];
        yw[(3, c)] = -w[(0, c)];
    }
    let tau = w.transpose() * yw;
    let svd = SVD::try_new(tau, false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("SVD did not converge in concurrence"))?;
    let mut roots: [f64; 4] = std::array::from_fn(|k| svd.singular_values[k]);
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(roots)
}

/// `2 λ_max − Σ λ_i` without the clamp at zero; positive iff the state is entangled.
pub fn concurrence_margin(rho: &Matrix4<Complex>) -> Result<f64> {
    let l = spin_flip_roots(rho)?;
    Ok(l[0] - l[1] - l[2] - l[3])
}

/// Wootters concurrence of a raw 4×4 density matrix.
pub fn concurrence_of(rho: &Matrix4<Complex>) -> Result<f64> {
    // Positive partial-transpose determinant means separable; the full route
    // would return exactly zero there as well.
    if partial_transpose_det(rho) > 1e-15 {
        return Ok(0.0);
    }
    let c = concurrence_margin(rho)?;
    Ok(if c < ROUNDOFF_FLOOR { 0.0 } else { c.min(1.0) })
}

/// Concurrence from a factor `W` with `ρ = W W†`.
pub fn concurrence_from_factor(w: &Matrix4<Complex>) -> Result<f64> {
    let rho = w * w.adjoint();
    if partial_transpose_det(&rho) > 1e-15 {
        return Ok(0.0);
    }
    let l = factor_roots(w)?;
    let c = l[0] - l[1] - l[2] - l[3];
    Ok(if c < ROUNDOFF_FLOOR { 0.0 } else { c.min(1.0) })
}

pub fn concurrence(state: &TwoQubitState) -> Result<f64> {
    concurrence_of(&state.matrix)
}

fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Entanglement of formation as a function of concurrence.
pub fn entanglement_of_formation(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidArgument(format!("concurrence {c} outside [0, 1]")));
    }
    Ok(binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0))
}

/// Population of |01⟩, |10⟩ and |11⟩ in the sender/receiver reduced state.
pub fn sr_signal(state: &TwoQubitState, n: usize) -> Result<f64> {
    if state.pair != (1, n) {
        return Err(Error::InvalidPair { i: state.pair.0, j: state.pair.1, n });
    }
    Ok(signal_of(&state.matrix))
}

pub(crate) fn signal_of(m: &Matrix4<Complex>) -> f64 {
    m[(1, 1)].re + m[(2, 2)].re + m[(3, 3)].re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ChainConfig;
    use crate::evolution::{evolve, evolve_product};
    use crate::spectral::ChainModel;
    use crate::state::{assemble_initial, single_qubit_state, symmetric_params, InitialStateParams, QubitParams};
    use nalgebra::{Matrix2, Vector4};

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn projector(v: Vector4<Complex>) -> Matrix4<Complex> {
        v * v.adjoint()
    }

    fn singlet() -> Matrix4<Complex> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        projector(Vector4::new(c(0.0), c(s), c(-s), c(0.0)))
    }

    fn werner(p: f64) -> Matrix4<Complex> {
        singlet() * c(p) + Matrix4::identity() * c((1.0 - p) / 4.0)
    }

    #[test]
    fn bell_state_is_maximally_entangled() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = projector(Vector4::new(c(0.0), c(s), c(s), c(0.0)));
        assert!((concurrence_of(&bell).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_separable() {
        assert_eq!(concurrence_of(&(Matrix4::identity() * c(0.25))).unwrap(), 0.0);
    }

    #[test]
    fn werner_states_follow_closed_form() {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let expected = ((3.0 * p - 1.0) / 2.0).max(0.0);
            assert!((concurrence_of(&werner(p)).unwrap() - expected).abs() < 1e-10, "p={p}");
        }
        assert!((concurrence_of(&werner(0.5)).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn margin_is_negative_for_separable_states() {
        assert!(concurrence_margin(&werner(0.2)).unwrap() < 0.0);
        assert!(concurrence_margin(&werner(0.6)).unwrap() > 0.0);
    }

    #[test]
    fn strongly_negative_input_is_a_numerical_failure() {
        let mut m = Matrix4::identity() * c(0.25);
        m[(0, 0)] = c(0.5);
        m[(3, 3)] = c(-0.01);
        assert!(concurrence_margin(&m).unwrap_err().is_numerical());
    }

    #[test]
    fn entanglement_of_formation_endpoints_and_midpoint() {
        assert_eq!(entanglement_of_formation(0.0).unwrap(), 0.0);
        assert!((entanglement_of_formation(1.0).unwrap() - 1.0).abs() < 1e-15);
        let x: f64 = (1.0 + 3f64.sqrt() / 2.0) / 2.0;
        let h = -x * x.log2() - (1.0 - x) * (1.0 - x).log2();
        assert!((entanglement_of_formation(0.5).unwrap() - h).abs() < 1e-15);
        assert!(entanglement_of_formation(1.2).is_err());
        let mut prev = -1.0;
        for k in 0..=100 {
            let e = entanglement_of_formation(k as f64 / 100.0).unwrap();
            assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn signal_requires_end_pair() {
        let model = ChainModel::new(ChainConfig::with_length(5).unwrap()).unwrap();
        let rho = assemble_initial(&symmetric_params(0.6, 0.0).unwrap(), model.basis()).unwrap();
        let st = reduce_pair(&rho, model.basis(), 2, 5).unwrap();
        assert!(matches!(sr_signal(&st, 5), Err(Error::InvalidPair { .. })));
    }

    #[test]
    fn pure_product_signals() {
        let mut ground = Matrix4::zeros();
        ground[(0, 0)] = c(1.0);
        let mut both = Matrix4::zeros();
        both[(3, 3)] = c(1.0);
        assert_eq!(sr_signal(&TwoQubitState { matrix: ground, pair: (1, 4) }, 4).unwrap(), 0.0);
        assert_eq!(sr_signal(&TwoQubitState { matrix: both, pair: (1, 4) }, 4).unwrap(), 1.0);
    }

    #[test]
    fn initial_signal_is_one_minus_lambda_squared() {
        let model = ChainModel::new(ChainConfig::with_length(6).unwrap()).unwrap();
        for &l in &[0.5, 0.7, 0.93, 1.0] {
            let rho = assemble_initial(&symmetric_params(l, 0.0).unwrap(), model.basis()).unwrap();
            let st = reduce_pair(&rho, model.basis(), 1, 6).unwrap();
            assert!((sr_signal(&st, 6).unwrap() - (1.0 - l * l)).abs() < 1e-15);
        }
    }

    #[test]
    fn end_pair_at_zero_time_is_product_of_inputs() {
        let model = ChainModel::new(ChainConfig::with_length(5).unwrap()).unwrap();
        let p = InitialStateParams::new(
            QubitParams::new(0.8, 0.35, 0.6).unwrap(),
            QubitParams::new(0.4, 0.9, 0.15).unwrap(),
        )
        .unwrap();
        let rho = assemble_initial(&p, model.basis()).unwrap();
        let st = reduce_pair(&rho, model.basis(), 1, 5).unwrap();
        let rs = single_qubit_state(&p.sender).unwrap();
        let rr = single_qubit_state(&p.receiver).unwrap();
        let prod = Matrix4::from_fn(|r, col| rs[(r / 2, col / 2)] * rr[(r % 2, col % 2)]);
        assert!((st.matrix - prod).iter().all(|z| z.norm() < 1e-14));
        assert_eq!(concurrence(&st).unwrap(), 0.0);
    }

    #[test]
    fn both_excited_end_pair_is_pure_11() {
        let model = ChainModel::new(ChainConfig::with_length(4).unwrap()).unwrap();
        let rho = assemble_initial(&symmetric_params(0.0, 0.0).unwrap(), model.basis()).unwrap();
        let st = reduce_pair(&rho, model.basis(), 1, 4).unwrap();
        let mut want = Matrix4::zeros();
        want[(3, 3)] = c(1.0);
        assert_eq!(st.matrix, want);
    }

    #[test]
    fn invalid_pairs_rejected() {
        let model = ChainModel::new(ChainConfig::with_length(4).unwrap()).unwrap();
        let rho = assemble_initial(&symmetric_params(0.6, 0.0).unwrap(), model.basis()).unwrap();
        for (i, j) in [(0, 2), (2, 2), (3, 2), (1, 5)] {
            assert!(matches!(reduce_pair(&rho, model.basis(), i, j), Err(Error::InvalidPair { .. })));
            assert!(PairSplit::new(model.basis(), i, j).is_err());
        }
    }

    #[test]
    fn mixture_reduction_matches_block_reduction() {
        let model = ChainModel::new(ChainConfig::with_length(6).unwrap()).unwrap();
        let p = InitialStateParams::new(
            QubitParams::new(0.85, 0.3, 0.4).unwrap(),
            QubitParams::new(0.2, 0.65, 0.05).unwrap(),
        )
        .unwrap();
        let rho0 = assemble_initial(&p, model.basis()).unwrap();
        let t = 3.1;
        let rho = evolve(&rho0, model.spectral(), t).unwrap();
        let mix = evolve_product(&model, &p, t).unwrap();
        let dense = rho.to_dense();
        for i in 1..=6 {
            for j in i + 1..=6 {
                let a = reduce_pair(&rho, model.basis(), i, j).unwrap().matrix;
                let split = PairSplit::new(model.basis(), i, j).unwrap();
                let b = MixtureReducer::new(model.basis()).reduce(&mix, i, j);
                let d = split.reduce_dense(&dense);
                assert!((a - b).iter().all(|z| z.norm() < 1e-12));
                assert!((a - d).iter().all(|z| z.norm() < 1e-14));
                let reducer = MixtureReducer::new(model.basis());
                let w = reducer.factor(&mix, i, j);
                assert!((w * w.adjoint() - b).iter().all(|z| z.norm() < 1e-14));
                let c = reducer.concurrence(&mix, i, j).unwrap();
                assert!((c - concurrence_of(&a).unwrap()).abs() < 1e-9, "({i},{j})");
            }
        }
        let end = reduce_pair(&rho, model.basis(), 1, 6).unwrap();
        let s = MixtureReducer::new(model.basis()).signal(&mix);
        assert!((s - sr_signal(&end, 6).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn product_states_are_separable() {
        let s = single_qubit_state(&QubitParams::new(0.9, 0.3, 0.7).unwrap()).unwrap();
        let r = single_qubit_state(&QubitParams::new(1.0, 0.55, 0.2).unwrap()).unwrap();
        let prod = Matrix4::from_fn(|a, b| s[(a / 2, b / 2)] * r[(a % 2, b % 2)]);
        assert!(concurrence_of(&prod).unwrap() < 1e-10);
        let _ = Matrix2::<Complex>::identity();
    }
}
