//! Unitary evolution of block density matrices.
//!
//! Two routes are provided. [`evolve`] applies `V_k(t) ρ_kl V_l(t)†` to an
//! arbitrary block state. [`EndpointMixture`] exploits the product structure
//! of the initial state: ρ0 is a mixture of four pure states supported on the
//! end labels |∅⟩, |1⟩_1, |1⟩_N, |1⟩_1|1⟩_N, so evolving only those four
//! basis columns is enough to reconstruct ρ(t).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spectral::{ChainModel, Label, SpectralBlocks, SECTORS};
use crate::state::{BlockDensityMatrix, InitialStateParams};
use crate::Complex;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `ρ_kl(t) = V_k(t) ρ_kl(0) V_l(t)†`.
pub fn evolve(rho0: &BlockDensityMatrix, spec: &SpectralBlocks, t: f64) -> Result<BlockDensityMatrix> {
    check_time(t)?;
    let n = rho0.n();
    for k in 0..SECTORS {
        if rho0.block(k, k).nrows() != spec.sector_dim(k) {
            return Err(Error::InvalidArgument(format!("state and spectral data disagree on sector {k} dimension")));
        }
    }
    let props: [_; SECTORS] = std::array::from_fn(|k| spec.propagator(k, t));
    let blocks = std::array::from_fn(|k| std::array::from_fn(|l| &props[k] * rho0.block(k, l) * props[l].adjoint()));
    Ok(BlockDensityMatrix::from_blocks(n, blocks))
}

/// Evolved images of the four end-label basis states at one instant, in
/// concatenated sector order.
#[derive(Clone, Debug)]
pub struct EndpointAmplitudes {
    dim: usize,
    offset1: usize,
    offset2: usize,
    sender: DVector<Complex>,
    receiver: DVector<Complex>,
    both: DVector<Complex>,
}

impl EndpointAmplitudes {
    pub fn at(model: &ChainModel, t: f64) -> Result<Self> {
        check_time(t)?;
        let basis = model.basis();
        let spec = model.spectral();
        let n = model.n();
        let pos = |l: Label| basis.position(&l).expect("end label");
        Ok(Self {
            dim: basis.dim(),
            offset1: basis.offset(1),
            offset2: basis.offset(2),
            sender: spec.propagate_basis_vector(1, pos(Label::One(1)), t),
            receiver: spec.propagate_basis_vector(1, pos(Label::One(n)), t),
            both: spec.propagate_basis_vector(2, pos(Label::Two(1, n)), t),
        })
    }

    /// Evolve the pure state with amplitudes `c[(s, r)]` on the end labels,
    /// `s`/`r` the sender/receiver excitation bits.
    fn combine(&self, c: [[Complex; 2]; 2], out: &mut [Complex]) {
        out[0] = c[0][0];
        for (p, (a, b)) in self.sender.iter().zip(self.receiver.iter()).enumerate() {
            out[self.offset1 + p] = c[1][0] * a + c[0][1] * b;
        }
        for (p, z) in self.both.iter().enumerate() {
            out[self.offset2 + p] = c[1][1] * z;
        }
    }
}

/// `ρ(t) = Σ_m w_m |ψ_m(t)⟩⟨ψ_m(t)|` with at most four terms; state vectors
/// are stored in concatenated sector order.
#[derive(Clone, Debug)]
pub struct EndpointMixture {
    weights: [f64; 4],
    states: Vec<Complex>,
    dim: usize,
}

impl EndpointMixture {
    pub fn new(params: &InitialStateParams, amps: &EndpointAmplitudes) -> Self {
        let dim = amps.dim;
        let mut states = vec![Complex::new(0.0, 0.0); 4 * dim];
        let mut weights = [0.0; 4];
        let sender = params.sender.eigenpairs();
        let receiver = params.receiver.eigenpairs();
        for (ms, (ws, us)) in sender.iter().enumerate() {
            for (mr, (wr, ur)) in receiver.iter().enumerate() {
                let m = 2 * ms + mr;
                weights[m] = ws * wr;
                let c = std::array::from_fn(|s| std::array::from_fn(|r| us[s] * ur[r]));
                amps.combine(c, &mut states[m * dim..(m + 1) * dim]);
            }
        }
        Self { weights, states, dim }
    }

    pub fn weights(&self) -> &[f64; 4] {
        &self.weights
    }

    pub fn state(&self, m: usize) -> &[Complex] {
        &self.states[m * self.dim..(m + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Expand into block form (mainly for cross-checks).
    pub fn to_block(&self, model: &ChainModel) -> BlockDensityMatrix {
        let basis = model.basis();
        let mut dense = nalgebra::DMatrix::<Complex>::zeros(self.dim, self.dim);
        for m in 0..4 {
            let w = self.weights[m];
            if w == 0.0 {
                continue;
            }
            let psi = self.state(m);
            for r in 0..self.dim {
                for c in 0..self.dim {
                    dense[(r, c)] += psi[r] * psi[c].conj() * w;
                }
            }
        }
        BlockDensityMatrix::from_dense(basis, &dense).expect("dimension matches basis")
    }
}

/// Evolve the product initial state through the endpoint route.
pub fn evolve_product(model: &ChainModel, params: &InitialStateParams, t: f64) -> Result<EndpointMixture> {
    params.validate()?;
    let amps = EndpointAmplitudes::at(model, t)?;
    Ok(EndpointMixture::new(params, &amps))
}
