//! Parameterised one-qubit sender/receiver states and the block-form initial
//! density matrix of the whole chain.
//!
//! Single-qubit matrices use the ordered basis {|0⟩, |1⟩} with |0⟩ the ground
//! (unflipped) state and |1⟩ an excitation. The transmission line starts in
//! |0…0⟩, so the initial state lives in the span of |∅⟩, |1⟩_1, |1⟩_N and
//! |1⟩_1|1⟩_N.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Label, SectorBasis, SECTORS};
use crate::Complex;

/// One-qubit state parameters, all in normalised units on [0, 1]:
/// eigenvalue `lambda`, rotation angle `a1` (π·a1/2 rad) and phase `a2` (2π·a2 rad).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub lambda: f64,
    pub a1: f64,
    pub a2: f64,
}

impl QubitParams {
    pub fn new(lambda: f64, a1: f64, a2: f64) -> Result<Self> {
        let p = Self { lambda, a1, a2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("a1", self.a1), ("a2", self.a2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name}={v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// The rotation `U` whose columns are the eigenvectors for `lambda` and `1 − lambda`.
    pub fn rotation(&self) -> Matrix2<Complex> {
        let (s, c) = (PI * self.a1 / 2.0).sin_cos();
        let phase = Complex::from_polar(1.0, 2.0 * PI * self.a2);
        Matrix2::new(Complex::new(c, 0.0), -phase.conj() * s, phase * s, Complex::new(c, 0.0))
    }

    /// Eigenpairs `(weight, vector)` of the state, in the order (λ, 1 − λ).
    pub fn eigenpairs(&self) -> [(f64, Vector2<Complex>); 2] {
        let u = self.rotation();
        [(self.lambda, u.column(0).into_owned()), (1.0 - self.lambda, u.column(1).into_owned())]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialStateParams {
    pub sender: QubitParams,
    pub receiver: QubitParams,
}

impl InitialStateParams {
    pub fn new(sender: QubitParams, receiver: QubitParams) -> Result<Self> {
        sender.validate()?;
        receiver.validate()?;
        Ok(Self { sender, receiver })
    }

    pub fn validate(&self) -> Result<()> {
        self.sender.validate()?;
        self.receiver.validate()
    }
}

/// Sender and receiver share `lambda` and rotation `alpha`; phases are zero.
pub fn symmetric_params(lambda: f64, alpha: f64) -> Result<InitialStateParams> {
    let q = QubitParams::new(lambda, alpha, 0.0)?;
    Ok(InitialStateParams { sender: q, receiver: q })
}

/// `U diag(λ, 1−λ) U†`.
pub fn single_qubit_state(p: &QubitParams) -> Result<Matrix2<Complex>> {
    p.validate()?;
    let u = p.rotation();
    let d = Matrix2::new(
        Complex::new(p.lambda, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(1.0 - p.lambda, 0.0),
    );
    Ok(u * d * u.adjoint())
}

/// Density matrix stored as sector-pair coherence blocks `ρ_kl` over the
/// subspace with at most two excitations.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDensityMatrix {
    n: usize,
    blocks: [[DMatrix<Complex>; SECTORS]; SECTORS],
}

impl BlockDensityMatrix {
    pub fn zeros(basis: &SectorBasis) -> Self {
        let sizes = basis.sector_sizes();
        Self {
            n: basis.n(),
            blocks: std::array::from_fn(|k| std::array::from_fn(|l| DMatrix::zeros(sizes[k], sizes[l]))),
        }
    }

    pub(crate) fn from_blocks(n: usize, blocks: [[DMatrix<Complex>; SECTORS]; SECTORS]) -> Self {
        Self { n, blocks }
    }

    /// Split a dense matrix in concatenated sector order into blocks.
    pub fn from_dense(basis: &SectorBasis, dense: &DMatrix<Complex>) -> Result<Self> {
        let dim = basis.dim();
        if dense.nrows() != dim || dense.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "dense matrix is {}x{}, basis dimension is {dim}",
                dense.nrows(),
                dense.ncols()
            )));
        }
        let sizes = basis.sector_sizes();
        let blocks = std::array::from_fn(|k| {
            std::array::from_fn(|l| dense.view((basis.offset(k), basis.offset(l)), (sizes[k], sizes[l])).into_owned())
        });
        Ok(Self { n: basis.n(), blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self, k: usize, l: usize) -> &DMatrix<Complex> {
        &self.blocks[k][l]
    }

    pub fn block_mut(&mut self, k: usize, l: usize) -> &mut DMatrix<Complex> {
        &mut self.blocks[k][l]
    }

    /// Entry between two basis labels.
    pub fn entry(&self, basis: &SectorBasis, x: &Label, y: &Label) -> Complex {
        match (basis.position(x), basis.position(y)) {
            (Some(px), Some(py)) => self.blocks[x.sector()][y.sector()][(px, py)],
            _ => Complex::new(0.0, 0.0),
        }
    }

    pub fn sector_traces(&self) -> [f64; SECTORS] {
        std::array::from_fn(|k| self.blocks[k][k].trace().re)
    }

    pub fn trace(&self) -> Complex {
        (0..SECTORS).map(|k| self.blocks[k][k].trace()).sum()
    }

    /// Largest deviation from `ρ_lk = ρ_kl†`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..SECTORS {
            for l in 0..SECTORS {
                let diff = &self.blocks[l][k] - self.blocks[k][l].adjoint();
                worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<Complex> {
        let sizes: [usize; SECTORS] = std::array::from_fn(|k| self.blocks[k][k].nrows());
        let dim: usize = sizes.iter().sum();
        let mut out = DMatrix::zeros(dim, dim);
        let mut row = 0;
        for k in 0..SECTORS {
            let mut col = 0;
            for l in 0..SECTORS {
                out.view_mut((row, col), (sizes[k], sizes[l])).copy_from(&self.blocks[k][l]);
                col += sizes[l];
            }
            row += sizes[k];
        }
        out
    }

    /// Eigenvalues of the assembled (Hermitian part of the) matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let dense = self.to_dense();
        let herm = (&dense + dense.adjoint()) * Complex::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        let mut p = 0.0;
        for k in 0..SECTORS {
            for l in 0..SECTORS {
                p += self.blocks[k][l].iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        p
    }

    /// Relabel every basis state by the reflection p → n + 1 − p.
    pub fn reflected(&self, basis: &SectorBasis) -> Self {
        let n = self.n;
        let mut out = Self::zeros(basis);
        for k in 0..SECTORS {
            for l in 0..SECTORS {
                for (r, lr) in basis.sector(k).iter().enumerate() {
                    let rr = basis.position(&lr.reflected(n)).expect("reflected label");
                    for (c, lc) in basis.sector(l).iter().enumerate() {
                        let cc = basis.position(&lc.reflected(n)).expect("reflected label");
                        out.blocks[k][l][(rr, cc)] = self.blocks[k][l][(r, c)];
                    }
                }
            }
        }
        out
    }

    pub fn conjugate(&self) -> Self {
        Self { n: self.n, blocks: std::array::from_fn(|k| std::array::from_fn(|l| self.blocks[k][l].conjugate())) }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..SECTORS {
            for l in 0..SECTORS {
                let d = &self.blocks[k][l] - &other.blocks[k][l];
                worst = worst.max(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

/// Labels of the four end-pair configurations, indexed by (sender bit, receiver bit).
pub(crate) fn end_label(n: usize, sender_excited: bool, receiver_excited: bool) -> Label {
    match (sender_excited, receiver_excited) {
        (false, false) => Label::Vacuum,
        (true, false) => Label::One(1),
        (false, true) => Label::One(n),
        (true, true) => Label::Two(1, n),
    }
}

/// `ρ0 = ρ^S ⊗ |0…0⟩⟨0…0| ⊗ ρ^R` with the sender on site 1 and the receiver on site N.
pub fn assemble_initial(params: &InitialStateParams, basis: &SectorBasis) -> Result<BlockDensityMatrix> {
    params.validate()?;
    let rs = single_qubit_state(&params.sender)?;
    let rr = single_qubit_state(&params.receiver)?;
    let n = basis.n();
    let mut rho = BlockDensityMatrix::zeros(basis);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let x = end_label(n, a == 1, c == 1);
                    let y = end_label(n, b == 1, d == 1);
                    let px = basis.position(&x).expect("end label");
                    let py = basis.position(&y).expect("end label");
                    rho.blocks[x.sector()][y.sector()][(px, py)] += rs[(a, b)] * rr[(c, d)];
                }
            }
        }
    }
    Ok(rho)
}
