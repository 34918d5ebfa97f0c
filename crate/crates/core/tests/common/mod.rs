//! Reference computations written independently of the library internals,
//! plus the verdict printer used by the acceptance suite.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use xxrelay::{Complex, QubitParams};

pub fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Print one verdict line straight to stderr (bypassing test capture) and
/// fail the test when `pass` is false.
pub fn verdict(id: &str, name: &str, pass: bool, detail: impl AsRef<str>) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] {id} {name}: {}\n", detail.as_ref());
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "{id} {name}: {}", detail.as_ref());
}

/// One-qubit density matrix in the (ground, excited) basis.
pub fn qubit_state(p: &QubitParams) -> [[Complex; 2]; 2] {
    let (s, co) = (PI * p.a1 / 2.0).sin_cos();
    let e = Complex::from_polar(1.0, 2.0 * PI * p.a2);
    // U = [[c, −e*·s], [e·s, c]], ρ = U diag(λ, 1−λ) U†
    let u = [[c(co), -e.conj() * s], [e * s, c(co)]];
    let w = [p.lambda, 1.0 - p.lambda];
    let mut r = [[c(0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            r[a][b] = (0..2).map(|k| u[a][k] * w[k] * u[b][k].conj()).sum();
        }
    }
    r
}

fn bit(x: usize, site: usize, n: usize) -> usize {
    (x >> (n - site)) & 1
}

/// Dense `2^N` density matrix of sender ⊗ ground line ⊗ receiver evolved by
/// the XX Hamiltonian with hopping `coupling/2`.
pub fn brute_force_state(
    sender: &QubitParams,
    receiver: &QubitParams,
    n: usize,
    coupling: f64,
    t: f64,
) -> DMatrix<Complex> {
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for x in 0..dim {
        for s in 1..n {
            if bit(x, s, n) != bit(x, s + 1, n) {
                let y = x ^ (1 << (n - s)) ^ (1 << (n - s - 1));
                h[(y, x)] += coupling / 2.0;
            }
        }
    }
    let (rs, rr) = (qubit_state(sender), qubit_state(receiver));
    let inner_mask = (dim - 1) & !(1 << (n - 1)) & !1;
    let mut rho0 = DMatrix::<Complex>::zeros(dim, dim);
    for x in (0..dim).filter(|x| x & inner_mask == 0) {
        for y in (0..dim).filter(|y| y & inner_mask == 0) {
            rho0[(x, y)] = rs[bit(x, 1, n)][bit(y, 1, n)] * rr[bit(x, n, n)][bit(y, n, n)];
        }
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors.map(c);
    let phases = DMatrix::<Complex>::from_diagonal(&eig.eigenvalues.map(|e| Complex::from_polar(1.0, -e * t)));
    let u = &v * phases * v.adjoint();
    &u * rho0 * u.adjoint()
}

/// Dense index of the basis state with the given excited sites.
pub fn index_of(sites: &[usize], n: usize) -> usize {
    sites.iter().map(|&s| 1usize << (n - s)).sum()
}

/// Two-site reduced state, first factor `i`, bit 1 = excitation.
pub fn partial_trace(rho: &DMatrix<Complex>, n: usize, i: usize, j: usize) -> Matrix4<Complex> {
    let dim = 1usize << n;
    let pair_mask = (1 << (n - i)) | (1 << (n - j));
    let mut out = Matrix4::<Complex>::zeros();
    for x in 0..dim {
        for y in 0..dim {
            if x & !pair_mask == y & !pair_mask {
                let a = 2 * bit(x, i, n) + bit(x, j, n);
                let b = 2 * bit(y, i, n) + bit(y, j, n);
                out[(a, b)] += rho[(x, y)];
            }
        }
    }
    out
}

/// Wootters concurrence from the singular values of `√ρ · Y · conj(√ρ) · Y`,
/// `Y = σ_y ⊗ σ_y`.
pub fn wootters(rho: &Matrix4<Complex>) -> f64 {
    let herm = (rho + rho.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(herm);
    let roots = eig.eigenvalues.map(|v| if v > 1e-14 { v.sqrt() } else { 0.0 });
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&roots.map(c)) * eig.eigenvectors.adjoint();
    let mut y = Matrix4::<Complex>::zeros();
    for (k, s) in [(0, -1.0), (1, 1.0), (2, 1.0), (3, -1.0)] {
        y[(k, 3 - k)] = c(s);
    }
    let m = sqrt_rho * y * sqrt_rho.map(|z| z.conj()) * y;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    (sv[0] - sv[1] - sv[2] - sv[3]).max(0.0)
}

/// Composite Simpson rule with `2k` panels.
pub fn simpson(a: f64, b: f64, k: usize, f: impl Fn(f64) -> f64) -> f64 {
    let m = 2 * k;
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m).map(|s| if s % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * s as f64)).sum();
    h / 3.0 * (f(a) + f(b) + inner)
}
