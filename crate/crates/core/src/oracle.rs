//! Brute-force reference pipeline on the full 2^N Hilbert space.
//!
//! Nothing here uses the sector decomposition: the Hamiltonian is assembled
//! from Kronecker products of spin operators and diagonalised as one dense
//! Hermitian matrix. Sites map to tensor factors in order, site 1 being the
//! most significant bit of a basis index; bit value 1 is an excitation.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};

use crate::config::ChainConfig;
use crate::error::{Error, Result};
use crate::spectral::{Label, SectorBasis};
use crate::state::{single_qubit_state, BlockDensityMatrix, InitialStateParams};
use crate::Complex;

pub const MAX_ORACLE_SPINS: usize = 6;

fn kron(a: &DMatrix<Complex>, b: &DMatrix<Complex>) -> DMatrix<Complex> {
    a.kronecker(b)
}

fn embed(op: &DMatrix<Complex>, site: usize, n: usize) -> DMatrix<Complex> {
    let id = DMatrix::<Complex>::identity(2, 2);
    let mut out = DMatrix::<Complex>::identity(1, 1);
    for p in 1..=n {
        out = kron(&out, if p == site { op } else { &id });
    }
    out
}

/// `Σ D (I_x I_x + I_y I_y)` on the full space, with `I = σ/2`.
pub fn full_hamiltonian(config: &ChainConfig) -> Result<DMatrix<Complex>> {
    let n = config.n();
    if n > MAX_ORACLE_SPINS {
        return Err(Error::SizeLimit { n, max: MAX_ORACLE_SPINS });
    }
    let z = Complex::new(0.0, 0.0);
    let half = Complex::new(0.5, 0.0);
    let ihalf = Complex::new(0.0, 0.5);
    let ix = DMatrix::from_row_slice(2, 2, &[z, half, half, z]);
    let iy = DMatrix::from_row_slice(2, 2, &[z, -ihalf, ihalf, z]);
    let dim = 1usize << n;
    let mut h = DMatrix::<Complex>::zeros(dim, dim);
    let d = Complex::new(config.coupling(), 0.0);
    for i in 1..n {
        let xx = embed(&ix, i, n) * embed(&ix, i + 1, n);
        let yy = embed(&iy, i, n) * embed(&iy, i + 1, n);
        h += (xx + yy) * d;
    }
    Ok(h)
}

/// `ρ^S ⊗ |0⟩⟨0|^{⊗(N−2)} ⊗ ρ^R`.
pub fn full_initial_state(params: &InitialStateParams, n: usize) -> Result<DMatrix<Complex>> {
    if n > MAX_ORACLE_SPINS {
        return Err(Error::SizeLimit { n, max: MAX_ORACLE_SPINS });
    }
    let to_dyn = |m: nalgebra::Matrix2<Complex>| DMatrix::from_fn(2, 2, |r, c| m[(r, c)]);
    let rs = to_dyn(single_qubit_state(&params.sender)?);
    let rr = to_dyn(single_qubit_state(&params.receiver)?);
    let mut ground = DMatrix::<Complex>::zeros(2, 2);
    ground[(0, 0)] = Complex::new(1.0, 0.0);
    let mut out = rs;
    for _ in 2..n {
        out = kron(&out, &ground);
    }
    Ok(kron(&out, &rr))
}

/// `exp(−iHt) ρ0 exp(iHt)` on the full 2^N space.
pub fn full_hilbert_oracle(params: &InitialStateParams, config: &ChainConfig, t: f64) -> Result<DMatrix<Complex>> {
    let n = config.n();
    if n > MAX_ORACLE_SPINS {
        return Err(Error::SizeLimit { n, max: MAX_ORACLE_SPINS });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")));
    }
    let h = full_hamiltonian(config)?;
    let rho0 = full_initial_state(params, n)?;
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("full-space eigensolver did not converge"))?;
    let q = eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex::from_polar(1.0, -e * t)));
    let v = &q * phases * q.adjoint();
    Ok(&v * rho0 * v.adjoint())
}

fn bit(index: usize, site: usize, n: usize) -> usize {
    (index >> (n - site)) & 1
}

/// Partial trace over every site except `i < j`, in the ordered basis
/// |00⟩, |01⟩, |10⟩, |11⟩ (first bit = site `i`).
pub fn full_partial_trace(rho: &DMatrix<Complex>, n: usize, i: usize, j: usize) -> Result<Matrix4<Complex>> {
    if !(1 <= i && i < j && j <= n) || rho.nrows() != 1 << n {
        return Err(Error::InvalidPair { i, j, n });
    }
    let mask = (1usize << (n - i)) | (1usize << (n - j));
    let dim = 1usize << n;
    let mut out = Matrix4::<Complex>::zeros();
    for x in 0..dim {
        let xr = x & !mask;
        let a = 2 * bit(x, i, n) + bit(x, j, n);
        for bi in 0..2 {
            for bj in 0..2 {
                let y = xr | (bi << (n - i)) | (bj << (n - j));
                out[(a, 2 * bi + bj)] += rho[(x, y)];
            }
        }
    }
    Ok(out)
}

fn label_of(index: usize, n: usize) -> Option<Label> {
    let sites: Vec<usize> = (1..=n).filter(|&p| bit(index, p, n) == 1).collect();
    Label::from_sites(&sites)
}

/// Restriction of a full-space matrix to the ≤2-excitation subspace, in block form.
pub fn project_low_sectors(rho: &DMatrix<Complex>, basis: &SectorBasis) -> Result<BlockDensityMatrix> {
    let n = basis.n();
    let mut out = BlockDensityMatrix::zeros(basis);
    let dim = 1usize << n;
    if rho.nrows() != dim {
        return Err(Error::InvalidArgument(format!("expected a {dim}x{dim} matrix")));
    }
    let labels: Vec<Option<Label>> = (0..dim).map(|x| label_of(x, n)).collect();
    for x in 0..dim {
        let Some(lx) = labels[x] else { continue };
        for y in 0..dim {
            let Some(ly) = labels[y] else { continue };
            let px = basis.position(&lx).expect("label in basis");
            let py = basis.position(&ly).expect("label in basis");
            out.block_mut(lx.sector(), ly.sector())[(px, py)] = rho[(x, y)];
        }
    }
    Ok(out)
}

/// Total absolute weight of entries touching states with three or more excitations.
pub fn weight_outside_low_sectors(rho: &DMatrix<Complex>, n: usize) -> f64 {
    let dim = 1usize << n;
    let high = |x: usize| (x.count_ones() as usize) > 2;
    let mut w = 0.0;
    for x in 0..dim {
        for y in 0..dim {
            if high(x) || high(y) {
                w += rho[(x, y)].norm();
            }
        }
    }
    w
}
