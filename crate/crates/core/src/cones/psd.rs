//! PSD cone blocks in packed coordinates.
//!
//! A symmetric `p×p` matrix is stored as its upper triangle, row by row,
//! with off-diagonal entries scaled by `√2`. The packed Euclidean inner
//! product then equals the trace inner product `Tr(AᵀB)`.

use crate::linalg::{eig_sym, LinalgError, Matrix, SpectralDecomposition, SymMatrix};
use std::f64::consts::SQRT_2;

pub fn packed_dim(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Side length `p` of a packed vector of length `len`, if `len` is triangular.
pub fn side_from_packed(len: usize) -> Option<usize> {
    let p = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (packed_dim(p) == len).then_some(p)
}

pub fn pack(h: &SymMatrix) -> Vec<f64> {
    let p = h.dim();
    let mut out = Vec::with_capacity(packed_dim(p));
    for i in 0..p {
        out.push(h.get(i, i));
        for j in (i + 1)..p {
            out.push(SQRT_2 * h.get(i, j));
        }
    }
    out
}

pub fn unpack(v: &[f64], p: usize) -> SymMatrix {
    assert_eq!(v.len(), packed_dim(p), "packed length mismatch");
    let mut h = SymMatrix::zeros(p);
    let mut k = 0;
    for i in 0..p {
        h.set(i, i, v[k]);
        k += 1;
        for j in (i + 1)..p {
            h.set(i, j, v[k] / SQRT_2);
            k += 1;
        }
    }
    h
}

/// Packed coordinates of `sym(a·bᵀ) = (a·bᵀ + b·aᵀ)/2`.
pub fn pack_sym_outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    let p = a.len();
    let mut h = SymMatrix::zeros(p);
    for i in 0..p {
        for j in i..p {
            h.set(i, j, 0.5 * (a[i] * b[j] + b[i] * a[j]));
        }
    }
    pack(&h)
}

pub fn project(z: &[f64], p: usize) -> Result<Vec<f64>, LinalgError> {
    let d = eig_sym(&unpack(z, p))?;
    Ok(pack(&d.spectral_map(|r| r.max(0.0))))
}

/// One element of the B-subdifferential of the PSD projection, acting as
/// `H ↦ P·(Ω ∘ PᵀHP)·Pᵀ` for a symmetric weight matrix `Ω` with entries in
/// `[0, 1]`.
#[derive(Clone, Debug)]
pub struct PsdElement {
    pub(crate) vectors: Matrix,
    pub(crate) omega: SymMatrix,
}

impl PsdElement {
    pub fn side(&self) -> usize {
        self.omega.dim()
    }

    pub fn weights(&self) -> &SymMatrix {
        &self.omega
    }

    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        let p = self.side();
        let h = unpack(d, p);
        let m = h.congruence(&self.vectors);
        let mut w = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                w.set(i, j, self.omega.get(i, j) * m.get(i, j));
            }
        }
        pack(&w.congruence(&self.vectors.transpose()))
    }
}

/// Weight matrix `U` with `U_ij = (max(ρᵢ,0) + max(ρⱼ,0)) / (|ρᵢ| + |ρⱼ|)`
/// and the convention `0/0 = 1`, computed on cleaned eigenvalues.
fn first_divided_weights(d: &SpectralDecomposition) -> SymMatrix {
    let p = d.dim();
    let mut u = SymMatrix::zeros(p);
    for i in 0..p {
        let ri = d.clean_eigenvalue(i);
        for j in i..p {
            let rj = d.clean_eigenvalue(j);
            let den = ri.abs() + rj.abs();
            let v = if den == 0.0 {
                1.0
            } else {
                (ri.max(0.0) + rj.max(0.0)) / den
            };
            u.set(i, j, v);
        }
    }
    u
}

/// Deterministic element: the zero-eigenvalue block β is assigned wholly to
/// the positive side (α′ = β, γ′ = ∅), which makes `Ω = U`.
pub fn element(z: &[f64], p: usize) -> Result<PsdElement, LinalgError> {
    let d = eig_sym(&unpack(z, p))?;
    let omega = first_divided_weights(&d);
    Ok(PsdElement {
        vectors: d.vectors,
        omega,
    })
}

/// The deterministic element followed, when β ≠ ∅, by the opposite extreme
/// (α′ = ∅, γ′ = β) whose ββ weights are zero.
pub fn alternatives(z: &[f64], p: usize) -> Result<Vec<PsdElement>, LinalgError> {
    let d = eig_sym(&unpack(z, p))?;
    let omega = first_divided_weights(&d);
    let mut out = vec![PsdElement {
        vectors: d.vectors.clone(),
        omega: omega.clone(),
    }];
    if !d.beta.is_empty() {
        let mut other = omega;
        for &i in &d.beta {
            for &j in &d.beta {
                other.set(i, j, 0.0);
            }
        }
        out.push(PsdElement {
            vectors: d.vectors,
            omega: other,
        });
    }
    Ok(out)
}

/// Orthonormal packed basis of `{H : [P_β P_γ]ᵀ H [P_β P_γ] = 0}` for
/// `s ⪰ 0`, where the zero set is read with tolerance `tol`.
pub fn lineality_basis(s: &[f64], p: usize, tol: f64) -> Result<Vec<Vec<f64>>, LinalgError> {
    let d = eig_sym(&unpack(s, p))?;
    let positive: Vec<bool> = d.eigenvalues.iter().map(|&r| r > tol).collect();
    let mut out = Vec::new();
    for i in 0..p {
        for j in i..p {
            if !positive[i] && !positive[j] {
                continue;
            }
            let pi = d.eigenvector(i);
            let pj = d.eigenvector(j);
            let mut v = pack_sym_outer(&pi, &pj);
            if i != j {
                // sym(pᵢpⱼᵀ) has norm 1/√2
                v.iter_mut().for_each(|x| *x *= SQRT_2);
            }
            out.push(v);
        }
    }
    Ok(out)
}
