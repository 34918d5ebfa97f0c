//! Excitation-sector basis of the chain and the block spectral decomposition of
//! the XX Hamiltonian.
//!
//! The XX coupling conserves the number of flipped spins, so the Hamiltonian
//! restricted to at most two excitations splits into three independent real
//! symmetric blocks of sizes 1, N and N(N−1)/2.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::config::ChainConfig;
use crate::error::{Error, Result};
use crate::Complex;

/// Number of excitation sectors kept (0, 1 and 2 excitations).
pub const SECTORS: usize = 3;

/// Basis label: the set of excited sites (1-based, ascending).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Vacuum,
    One(usize),
    Two(usize, usize),
}

impl Label {
    pub fn sector(&self) -> usize {
        match self {
            Label::Vacuum => 0,
            Label::One(_) => 1,
            Label::Two(..) => 2,
        }
    }

    pub fn contains(&self, site: usize) -> bool {
        match *self {
            Label::Vacuum => false,
            Label::One(p) => p == site,
            Label::Two(p, q) => p == site || q == site,
        }
    }

    /// Build a label from an arbitrary set of at most two distinct sites.
    pub fn from_sites(sites: &[usize]) -> Option<Label> {
        match *sites {
            [] => Some(Label::Vacuum),
            [p] => Some(Label::One(p)),
            [p, q] if p < q => Some(Label::Two(p, q)),
            [p, q] if q < p => Some(Label::Two(q, p)),
            _ => None,
        }
    }

    pub fn sites(&self) -> Vec<usize> {
        match *self {
            Label::Vacuum => vec![],
            Label::One(p) => vec![p],
            Label::Two(p, q) => vec![p, q],
        }
    }

    /// Remove `site` from the excitation set (no-op when not excited).
    pub fn without(&self, site: usize) -> Label {
        let rest: Vec<usize> = self.sites().into_iter().filter(|&s| s != site).collect();
        Label::from_sites(&rest).expect("subset of a valid label")
    }

    /// Image under the site reflection p → n + 1 − p.
    pub fn reflected(&self, n: usize) -> Label {
        let r: Vec<usize> = self.sites().into_iter().map(|p| n + 1 - p).collect();
        Label::from_sites(&r).expect("reflection preserves label size")
    }
}

/// Lexicographically ordered labels of sectors 0, 1 and 2.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n: usize,
    sectors: [Vec<Label>; SECTORS],
}

impl SectorBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sector(&self, k: usize) -> &[Label] {
        &self.sectors[k]
    }

    pub fn sector_sizes(&self) -> [usize; SECTORS] {
        [self.sectors[0].len(), self.sectors[1].len(), self.sectors[2].len()]
    }

    pub fn dim(&self) -> usize {
        self.sectors.iter().map(Vec::len).sum()
    }

    /// Position of `label` inside its own sector.
    pub fn position(&self, label: &Label) -> Option<usize> {
        let n = self.n;
        match *label {
            Label::Vacuum => Some(0),
            Label::One(p) if (1..=n).contains(&p) => Some(p - 1),
            Label::Two(p, q) if p >= 1 && p < q && q <= n => {
                // rows 1..p-1 contribute (n - r) pairs each
                let before: usize = (1..p).map(|r| n - r).sum();
                Some(before + (q - p - 1))
            }
            _ => None,
        }
    }

    /// Offset of sector `k` in the concatenated (dense) ordering.
    pub fn offset(&self, k: usize) -> usize {
        self.sectors[..k].iter().map(Vec::len).sum()
    }

    /// Index of `label` in the concatenated ordering 0 ⊕ 1 ⊕ 2.
    pub fn global_index(&self, label: &Label) -> Option<usize> {
        self.position(label).map(|p| self.offset(label.sector()) + p)
    }

    /// All labels in concatenated order.
    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.sectors.iter().flatten()
    }
}

pub fn build_basis(config: &ChainConfig) -> Result<SectorBasis> {
    let n = config.n();
    if n < 2 {
        return Err(Error::InvalidConfig(format!("chain needs at least 2 spins, got {n}")));
    }
    let singles = (1..=n).map(Label::One).collect();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for p in 1..=n {
        for q in p + 1..=n {
            pairs.push(Label::Two(p, q));
        }
    }
    Ok(SectorBasis { n, sectors: [vec![Label::Vacuum], singles, pairs] })
}

/// Real symmetric Hamiltonian blocks, one per excitation sector.
#[derive(Clone, Debug)]
pub struct BlockHamiltonian {
    blocks: [DMatrix<f64>; SECTORS],
}

impl BlockHamiltonian {
    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k]
    }
}

/// Nearest-neighbour hopping Hamiltonian `D (IxIx + IyIy)`, which moves one
/// excitation by one site with amplitude D/2 and has no diagonal part.
pub fn build_hamiltonian(config: &ChainConfig, basis: &SectorBasis) -> Result<BlockHamiltonian> {
    if basis.n() != config.n() {
        return Err(Error::InvalidConfig(format!("basis built for {} spins, config has {}", basis.n(), config.n())));
    }
    let n = config.n();
    let hop = 0.5 * config.coupling();
    let blocks = std::array::from_fn(|k| {
        let labels = basis.sector(k);
        let mut h = DMatrix::zeros(labels.len(), labels.len());
        for (col, label) in labels.iter().enumerate() {
            let occupied = label.sites();
            for &p in &occupied {
                for q in [p.wrapping_sub(1), p + 1] {
                    if q < 1 || q > n || occupied.contains(&q) {
                        continue;
                    }
                    let mut moved: Vec<usize> = occupied.iter().map(|&s| if s == p { q } else { s }).collect();
                    moved.sort_unstable();
                    let target = Label::from_sites(&moved).expect("hop keeps excitation count");
                    let row = basis.position(&target).expect("target label in basis");
                    h[(row, col)] = hop;
                }
            }
        }
        h
    });
    Ok(BlockHamiltonian { blocks })
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of each block.
#[derive(Clone, Debug)]
pub struct SpectralBlocks {
    energies: [DVector<f64>; SECTORS],
    vectors: [DMatrix<f64>; SECTORS],
}

impl SpectralBlocks {
    pub fn energies(&self, k: usize) -> &DVector<f64> {
        &self.energies[k]
    }

    pub fn vectors(&self, k: usize) -> &DMatrix<f64> {
        &self.vectors[k]
    }

    pub fn sector_dim(&self, k: usize) -> usize {
        self.energies[k].len()
    }

    /// `V_k(t) = Q_k exp(−i E_k t) Q_kᵀ`.
    pub fn propagator(&self, k: usize, t: f64) -> DMatrix<Complex> {
        let q = &self.vectors[k];
        let dim = q.nrows();
        let phases: Vec<Complex> = self.energies[k].iter().map(|&e| Complex::from_polar(1.0, -e * t)).collect();
        DMatrix::from_fn(dim, dim, |r, c| {
            (0..dim).fold(Complex::new(0.0, 0.0), |acc, m| acc + phases[m] * (q[(r, m)] * q[(c, m)]))
        })
    }

    /// `exp(−i H_k t)` applied to the basis vector at `position` of sector `k`.
    pub fn propagate_basis_vector(&self, k: usize, position: usize, t: f64) -> DVector<Complex> {
        let q = &self.vectors[k];
        let e = &self.energies[k];
        let dim = q.nrows();
        let coeffs: Vec<Complex> = (0..dim).map(|m| Complex::from_polar(q[(position, m)], -e[m] * t)).collect();
        DVector::from_fn(dim, |r, _| (0..dim).fold(Complex::new(0.0, 0.0), |acc, m| acc + coeffs[m] * q[(r, m)]))
    }
}

pub fn eigendecompose(ham: &BlockHamiltonian) -> Result<SpectralBlocks> {
    let mut energies: [DVector<f64>; SECTORS] = Default::default();
    let mut vectors: [DMatrix<f64>; SECTORS] = Default::default();
    for k in 0..SECTORS {
        let block = ham.block(k).clone();
        let dim = block.nrows();
        let eig = SymmetricEigen::try_new(block, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::numerical(format!("symmetric eigensolver did not converge on block {k}")))?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        energies[k] = DVector::from_iterator(dim, order.iter().map(|&m| eig.eigenvalues[m]));
        vectors[k] = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    }
    Ok(SpectralBlocks { energies, vectors })
}

/// Basis, Hamiltonian and spectral data of one chain, built once and shared
/// read-only by every downstream computation.
#[derive(Clone, Debug)]
pub struct ChainModel {
    config: ChainConfig,
    basis: SectorBasis,
    hamiltonian: BlockHamiltonian,
    spectral: SpectralBlocks,
}

impl ChainModel {
    pub fn new(config: ChainConfig) -> Result<Self> {
        let basis = build_basis(&config)?;
        let hamiltonian = build_hamiltonian(&config, &basis)?;
        let spectral = eigendecompose(&hamiltonian)?;
        Ok(Self { config, basis, hamiltonian, spectral })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &BlockHamiltonian {
        &self.hamiltonian
    }

    pub fn spectral(&self) -> &SpectralBlocks {
        &self.spectral
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn model(n: usize) -> ChainModel {
        ChainModel::new(ChainConfig::with_length(n).unwrap()).unwrap()
    }

    #[test]
    fn sector_sizes() {
        let b = build_basis(&ChainConfig::with_length(2).unwrap()).unwrap();
        assert_eq!(b.sector_sizes(), [1, 2, 1]);
        let b = build_basis(&ChainConfig::with_length(10).unwrap()).unwrap();
        assert_eq!(b.sector_sizes(), [1, 10, 45]);
        assert_eq!(b.dim(), 56);
    }

    #[test]
    fn pair_sector_is_lexicographic() {
        let b = build_basis(&ChainConfig::with_length(4).unwrap()).unwrap();
        let expected = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
        let got: Vec<_> = b
            .sector(2)
            .iter()
            .map(|l| match *l {
                Label::Two(p, q) => (p, q),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(got, expected);
        for (pos, l) in b.sector(2).iter().enumerate() {
            assert_eq!(b.position(l), Some(pos));
        }
        assert_eq!(b.position(&Label::Two(3, 2)), None);
        assert_eq!(b.position(&Label::One(5)), None);
    }

    #[test]
    fn two_site_hamiltonian() {
        let m = model(2);
        let h1 = m.hamiltonian().block(1);
        assert_eq!(h1.as_slice(), &[0.0, 0.5, 0.5, 0.0]);
        assert_eq!(m.hamiltonian().block(0)[(0, 0)], 0.0);
        let e = m.spectral().energies(1);
        assert!((e[0] + 0.5).abs() < 1e-15 && (e[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_site_pair_couplings() {
        let m = model(3);
        let b = m.basis();
        let h2 = m.hamiltonian().block(2);
        let at = |x: Label, y: Label| h2[(b.position(&x).unwrap(), b.position(&y).unwrap())];
        assert_eq!(at(Label::Two(1, 2), Label::Two(1, 3)), 0.5);
        assert_eq!(at(Label::Two(1, 3), Label::Two(2, 3)), 0.5);
        assert_eq!(at(Label::Two(1, 2), Label::Two(2, 3)), 0.0);
        for p in 1..3 {
            let l = Label::Two(p, p + 1);
            assert_eq!(at(l, l), 0.0);
        }
    }

    #[test]
    fn coupling_scales_hopping() {
        let m = ChainModel::new(ChainConfig::new(5, 2.5).unwrap()).unwrap();
        let h1 = m.hamiltonian().block(1);
        for r in 0..5usize {
            for c in 0..5 {
                let want = if r.abs_diff(c) == 1 { 1.25 } else { 0.0 };
                assert_eq!(h1[(r, c)], want);
            }
        }
    }

    #[test]
    fn spectral_blocks_reconstruct_and_are_orthogonal() {
        for n in [2, 3, 6, 10] {
            let m = model(n);
            for k in 0..SECTORS {
                let q = m.spectral().vectors(k);
                let e = m.spectral().energies(k);
                let dim = q.nrows();
                let qtq = q.transpose() * q;
                assert!((qtq - DMatrix::<f64>::identity(dim, dim)).amax() < 1e-12);
                let rec = q * DMatrix::from_diagonal(e) * q.transpose();
                assert!((rec - m.hamiltonian().block(k)).amax() < 1e-12);
                assert!(e.iter().zip(e.iter().skip(1)).all(|(a, b)| a <= b));
                assert!(e.sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_excitation_spectrum_is_cosine() {
        for n in 2..=20 {
            let m = model(n);
            let mut analytic: Vec<f64> = (1..=n).map(|k| (k as f64 * PI / (n as f64 + 1.0)).cos()).collect();
            analytic.sort_by(f64::total_cmp);
            let e = m.spectral().energies(1);
            for (a, b) in analytic.iter().zip(e.iter()) {
                assert!((a - b).abs() < 1e-10, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hamiltonian_is_mirror_invariant() {
        let m = model(7);
        let b = m.basis();
        for k in 0..SECTORS {
            let h = m.hamiltonian().block(k);
            for (r, lr) in b.sector(k).iter().enumerate() {
                for (c, lc) in b.sector(k).iter().enumerate() {
                    let rr = b.position(&lr.reflected(7)).unwrap();
                    let cc = b.position(&lc.reflected(7)).unwrap();
                    assert!((h[(r, c)] - h[(rr, cc)]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn propagator_is_unitary_and_identity_at_zero() {
        let m = model(5);
        for k in 0..SECTORS {
            let v0 = m.spectral().propagator(k, 0.0);
            let dim = v0.nrows();
            assert!((v0 - DMatrix::<Complex>::identity(dim, dim)).camax() < 1e-14);
            let v = m.spectral().propagator(k, 3.3);
            let vv = v.adjoint() * &v;
            assert!((vv - DMatrix::<Complex>::identity(dim, dim)).camax() < 1e-12);
            let col = m.spectral().propagate_basis_vector(k, dim - 1, 3.3);
            assert!((col - v.column(dim - 1)).camax() < 1e-13);
        }
    }
}
