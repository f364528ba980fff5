//! Self-dual cones built as products of nonnegative orthants, second-order
//! cones and PSD cones.
//!
//! Points of the ambient space are plain `f64` slices; a [`Cone`] knows how
//! to cut them into block segments. PSD blocks use the packed coordinates of
//! [`psd`], so every operator here is expressed in one Euclidean space.

pub mod psd;
pub mod soc;

use crate::linalg::{norm, LinalgError, Matrix, SymMatrix};
use serde::{Deserialize, Serialize};
use std::ops::Range;
use thiserror::Error;

pub use psd::PsdElement;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("cone has no blocks")]
    Empty,
    #[error("cone block {index} has zero dimension")]
    EmptyBlock { index: usize },
    #[error("point has dimension {got}, cone expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not in the cone (distance {dist:e})")]
    NotInCone { dist: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One factor of a product cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    /// `ℝ₊ᵖ`
    Orthant(usize),
    /// Second-order cone in `ℝʳ⁺¹`, given by its total dimension `r + 1`.
    /// Dimension 1 is the half-line and behaves exactly like `Orthant(1)`.
    Soc(usize),
    /// `S₊ᵖ`, stored packed in `p(p+1)/2` coordinates.
    Psd(usize),
}

impl Block {
    pub fn dim(&self) -> usize {
        match *self {
            Block::Orthant(p) | Block::Soc(p) => p,
            Block::Psd(p) => psd::packed_dim(p),
        }
    }

    fn size_param(&self) -> usize {
        match *self {
            Block::Orthant(p) | Block::Soc(p) | Block::Psd(p) => p,
        }
    }

    /// Orthant-like blocks (orthants and one-dimensional SOCs).
    fn is_polyhedral(&self) -> bool {
        matches!(self, Block::Orthant(_) | Block::Soc(1))
    }
}

#[derive(Serialize, Deserialize)]
struct ConeSpec {
    blocks: Vec<Block>,
}

/// Product cone `K = K₁ × … × K_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeSpec", into = "ConeSpec")]
pub struct Cone {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

impl TryFrom<ConeSpec> for Cone {
    type Error = ConeError;
    fn try_from(spec: ConeSpec) -> Result<Self, ConeError> {
        Cone::new(spec.blocks)
    }
}

impl From<Cone> for ConeSpec {
    fn from(c: Cone) -> Self {
        ConeSpec { blocks: c.blocks }
    }
}

/// Tolerance used to classify a block against the nonsmooth set.
pub fn boundary_tol(z: &[f64]) -> f64 {
    1e-9 * (1.0 + norm(z))
}

impl Cone {
    pub fn new(blocks: Vec<Block>) -> Result<Self, ConeError> {
        if blocks.is_empty() {
            return Err(ConeError::Empty);
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut off = 0;
        for (index, b) in blocks.iter().enumerate() {
            if b.size_param() == 0 {
                return Err(ConeError::EmptyBlock { index });
            }
            offsets.push(off);
            off += b.dim();
        }
        offsets.push(off);
        Ok(Cone { blocks, offsets })
    }

    pub fn orthant(p: usize) -> Self {
        Cone::new(vec![Block::Orthant(p)]).expect("nonzero orthant")
    }

    pub fn soc(dim: usize) -> Self {
        Cone::new(vec![Block::Soc(dim)]).expect("nonzero soc")
    }

    pub fn psd(p: usize) -> Self {
        Cone::new(vec![Block::Psd(p)]).expect("nonzero psd")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// True when every block is an orthant or a one-dimensional SOC.
    pub fn is_polyhedral(&self) -> bool {
        self.blocks.iter().all(Block::is_polyhedral)
    }

    /// `(block, coordinate range)` pairs in order.
    pub fn segments(&self) -> impl Iterator<Item = (Block, Range<usize>)> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .map(move |(i, b)| (*b, self.offsets[i]..self.offsets[i + 1]))
    }

    pub fn check_dim(&self, z: &[f64]) -> Result<(), ConeError> {
        if z.len() == self.dim() {
            Ok(())
        } else {
            Err(ConeError::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            })
        }
    }

    /// Metric projection `Π_K(z)`.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>, ConeError> {
        self.check_dim(z)?;
        let mut out = Vec::with_capacity(z.len());
        for (b, r) in self.segments() {
            let seg = &z[r];
            match b {
                Block::Orthant(_) => out.extend(seg.iter().map(|v| v.max(0.0))),
                Block::Soc(_) => out.extend(soc::project(seg)),
                Block::Psd(p) => out.extend(psd::project(seg, p)?),
            }
        }
        Ok(out)
    }

    /// `dist(z, K) = ‖z − Π_K(z)‖`.
    pub fn dist(&self, z: &[f64]) -> Result<f64, ConeError> {
        let pz = self.project(z)?;
        Ok(norm(&crate::linalg::sub(z, &pz)))
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> Result<bool, ConeError> {
        Ok(self.dist(z)? <= tol)
    }

    /// A deterministic element `W ∈ ∂_BΠ_K(z)`.
    ///
    /// At nonsmooth points the choice is: orthant `zᵢ = 0` → 1; SOC upper
    /// kink → `I`; SOC lower kink and origin → `0`; PSD with zero
    /// eigenvalues → all of β on the positive side.
    pub fn bsubdiff_element(&self, z: &[f64]) -> Result<SubdiffElement, ConeError> {
        self.check_dim(z)?;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (b, r) in self.segments() {
            let seg = &z[r];
            let tol = boundary_tol(seg);
            blocks.push(match b {
                Block::Orthant(_) | Block::Soc(1) => BlockElement::Orthant(orthant_flags(seg, tol)),
                Block::Soc(_) => BlockElement::Soc(soc::element(seg, tol)),
                Block::Psd(p) => BlockElement::Psd(psd::element(seg, p)?),
            });
        }
        Ok(SubdiffElement {
            cone: self.clone(),
            blocks,
        })
    }

    /// A finite sample of `∂_BΠ_K(z)` starting with [`Cone::bsubdiff_element`].
    ///
    /// Each block contributes its admissible limits at a kink. The full
    /// product is returned when it has at most `cap` members; otherwise the
    /// blocks are varied one at a time around the deterministic element.
    pub fn bsubdiff_sample(&self, z: &[f64], cap: usize) -> Result<Vec<SubdiffElement>, ConeError> {
        self.check_dim(z)?;
        let mut per_block: Vec<Vec<BlockElement>> = Vec::new();
        for (b, r) in self.segments() {
            let seg = &z[r];
            let tol = boundary_tol(seg);
            per_block.push(match b {
                Block::Orthant(_) | Block::Soc(1) => {
                    let first = orthant_flags(seg, tol);
                    let mut alts = vec![BlockElement::Orthant(first.clone())];
                    let kinks: Vec<usize> = (0..seg.len()).filter(|&i| seg[i].abs() <= tol).collect();
                    if !kinks.is_empty() {
                        let mut all_zero = first.clone();
                        for &i in &kinks {
                            all_zero[i] = 0.0;
                        }
                        alts.push(BlockElement::Orthant(all_zero));
                        if kinks.len() > 1 {
                            for &i in &kinks {
                                let mut one = first.clone();
                                one[i] = 0.0;
                                alts.push(BlockElement::Orthant(one));
                            }
                        }
                    }
                    alts
                }
                Block::Soc(_) => soc::alternatives(seg, tol).into_iter().map(BlockElement::Soc).collect(),
                Block::Psd(p) => psd::alternatives(seg, p)?.into_iter().map(BlockElement::Psd).collect(),
            });
        }

        let total: usize = per_block.iter().map(Vec::len).product();
        let mut combos: Vec<Vec<usize>> = Vec::new();
        if total <= cap {
            let mut idx = vec![0usize; per_block.len()];
            loop {
                combos.push(idx.clone());
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < per_block[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        } else {
            combos.push(vec![0; per_block.len()]);
            for (k, alts) in per_block.iter().enumerate() {
                for a in 1..alts.len() {
                    let mut idx = vec![0; per_block.len()];
                    idx[k] = a;
                    combos.push(idx);
                }
            }
        }
        Ok(combos
            .into_iter()
            .map(|idx| SubdiffElement {
                cone: self.clone(),
                blocks: idx.iter().enumerate().map(|(k, &a)| per_block[k][a].clone()).collect(),
            })
            .collect())
    }

    /// Orthonormal basis of `lin(T_K(s))` with the default boundary tolerance.
    pub fn lineality_basis(&self, s: &[f64]) -> Result<Vec<Vec<f64>>, ConeError> {
        self.lineality_basis_with_tol(s, boundary_tol(s))
    }

    /// Orthonormal basis of `lin(T_K(s))`, reading `|·| ≤ tol` as zero when
    /// classifying blocks. Basis vectors are full ambient-length vectors.
    pub fn lineality_basis_with_tol(&self, s: &[f64], tol: f64) -> Result<Vec<Vec<f64>>, ConeError> {
        self.check_dim(s)?;
        let dist = self.dist(s)?;
        if dist > tol.max(boundary_tol(s)) {
            return Err(ConeError::NotInCone { dist });
        }
        let n = self.dim();
        let mut out = Vec::new();
        let mut embed = |r: &Range<usize>, v: &[f64]| {
            let mut full = vec![0.0; n];
            full[r.clone()].copy_from_slice(v);
            out.push(full);
        };
        for (b, r) in self.segments() {
            let seg = &s[r.clone()];
            match b {
                Block::Orthant(_) | Block::Soc(1) => {
                    for (i, v) in seg.iter().enumerate() {
                        if *v > tol {
                            let mut e = vec![0.0; seg.len()];
                            e[i] = 1.0;
                            embed(&r, &e);
                        }
                    }
                }
                Block::Soc(_) => {
                    for v in soc::lineality_basis(seg, tol) {
                        embed(&r, &v);
                    }
                }
                Block::Psd(p) => {
                    for v in psd::lineality_basis(seg, p, tol)? {
                        embed(&r, &v);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn orthant_flags(seg: &[f64], tol: f64) -> Vec<f64> {
    seg.iter().map(|&v| if v >= -tol { 1.0 } else { 0.0 }).collect()
}

/// Per-block representation of one element of `∂_BΠ_K(z)`.
#[derive(Clone, Debug)]
pub enum BlockElement {
    /// 0/1 diagonal.
    Orthant(Vec<f64>),
    /// Explicit `(r+1)×(r+1)` symmetric matrix.
    Soc(Matrix),
    /// Congruence form in the eigenbasis.
    Psd(PsdElement),
}

/// One element `W ∈ ∂_BΠ_K(z)`, block diagonal over the cone's factors.
#[derive(Clone, Debug)]
pub struct SubdiffElement {
    cone: Cone,
    blocks: Vec<BlockElement>,
}

impl SubdiffElement {
    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn blocks(&self) -> &[BlockElement] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    /// `W·d`
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        assert_eq!(d.len(), self.dim(), "direction dimension mismatch");
        let mut out = Vec::with_capacity(d.len());
        for ((_, r), blk) in self.cone.segments().zip(&self.blocks) {
            let seg = &d[r];
            match blk {
                BlockElement::Orthant(flags) => out.extend(seg.iter().zip(flags).map(|(v, f)| v * f)),
                BlockElement::Soc(m) => out.extend(m.matvec(seg)),
                BlockElement::Psd(e) => out.extend(e.apply(seg)),
            }
        }
        out
    }

    /// The operator as a dense symmetric matrix in ambient coordinates.
    pub fn to_dense(&self) -> SymMatrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for ((_, r), blk) in self.cone.segments().zip(&self.blocks) {
            let o = r.start;
            match blk {
                BlockElement::Orthant(flags) => {
                    for (i, f) in flags.iter().enumerate() {
                        m[(o + i, o + i)] = *f;
                    }
                }
                BlockElement::Soc(w) => {
                    for i in 0..w.rows() {
                        for j in 0..w.cols() {
                            m[(o + i, o + j)] = w[(i, j)];
                        }
                    }
                }
                BlockElement::Psd(e) => {
                    let k = r.len();
                    for j in 0..k {
                        let mut ej = vec![0.0; k];
                        ej[j] = 1.0;
                        let col = e.apply(&ej);
                        for i in 0..k {
                            m[(o + i, o + j)] = col[i];
                        }
                    }
                }
            }
        }
        SymMatrix::from_matrix(&m)
    }

    /// `Aᵀ·W·A` for a dense `A` with `dim` rows.
    pub fn congruence(&self, a: &Matrix) -> SymMatrix {
        assert_eq!(a.rows(), self.dim());
        let mut wa = Matrix::zeros(a.rows(), a.cols());
        for j in 0..a.cols() {
            wa.set_column(j, &self.apply(&a.column(j)));
        }
        SymMatrix::from_matrix(&a.tr_matmul(&wa))
    }
}
