//! Checks of constraint qualifications and second-order conditions at a
//! point, and convergence-rate estimation from error histories.

mod rate;

pub use rate::{estimate_rate, estimate_rate_in, RateEstimate, RateWindow, MIN_USABLE_POINTS};

use crate::cones::{psd, Block};
use crate::error::{Error, Result};
use crate::linalg::{dot, eig_sym, norm, null_space, pinv_sym, row_gram_extremes, Matrix, SymMatrix};
use crate::program::{kkt_residual, Program};
use serde::Serialize;

/// Feasibility and KKT tolerance required by the checkers.
pub const POINT_TOL: f64 = 1e-8;
/// Rows are independent when the Gram spectrum satisfies `min > RANK_RATIO·max`.
pub const RANK_RATIO: f64 = 1e-8;
/// A multiplier component counts as positive above this.
pub const MULTIPLIER_TOL: f64 = 1e-8;
/// Reduced curvature must exceed this.
pub const CURVATURE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub holds: bool,
    pub rows: usize,
    pub cols: usize,
    /// Extreme eigenvalues of the row Gram matrix.
    pub min_eig: f64,
    pub max_eig: f64,
}

fn rank_report(m: &Matrix) -> Result<RankReport> {
    let (min_eig, max_eig) = row_gram_extremes(m)?;
    Ok(RankReport {
        holds: m.rows() == 0 || min_eig > RANK_RATIO * max_eig,
        rows: m.rows(),
        cols: m.cols(),
        min_eig,
        max_eig,
    })
}

fn require_feasible<P: Program + ?Sized>(p: &P, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != p.n() {
        return Err(Error::Dimension {
            what: "x",
            expected: p.n(),
            got: x.len(),
        });
    }
    let gx = p.g(x);
    let violation = norm(&p.h(x)).max(p.cone().dist(&gx)?);
    if violation > POINT_TOL {
        return Err(Error::Infeasible { violation });
    }
    Ok(gx)
}

fn stack_rows(rows: &[Vec<f64>], cols: usize) -> Matrix {
    Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Linear independence of `{∇hᵢ(x)} ∪ {∇gⱼ(x) : gⱼ(x) ≤ 1e−8}`. Only for
/// orthant-type cones.
pub fn check_licq<P: Program + ?Sized>(p: &P, x: &[f64]) -> Result<RankReport> {
    if !p.cone().is_polyhedral() {
        return Err(Error::InvalidParameter("LICQ applies to orthant cones only".into()));
    }
    let gx = require_feasible(p, x)?;
    let jh = p.jac_h(x);
    let jg = p.jac_g(x);
    let mut rows: Vec<Vec<f64>> = (0..jh.rows()).map(|i| jh.row(i).to_vec()).collect();
    rows.extend(
        (0..jg.rows())
            .filter(|&j| gx[j] <= POINT_TOL)
            .map(|j| jg.row(j).to_vec()),
    );
    rank_report(&stack_rows(&rows, p.n()))
}

/// Constraint nondegeneracy: `[[Jh, 0], [Jg, L]]` has full row rank, where
/// the columns of `L` span `lin(T_K(g(x)))`.
pub fn check_nondegeneracy<P: Program + ?Sized>(p: &P, x: &[f64]) -> Result<RankReport> {
    let gx = require_feasible(p, x)?;
    let lin = p
        .cone()
        .lineality_basis_with_tol(&gx, POINT_TOL.max(crate::cones::boundary_tol(&gx)))?;
    let (n, m, dim) = (p.n(), p.m(), p.cone().dim());
    let jh = p.jac_h(x);
    let jg = p.jac_g(x);
    let mat = Matrix::from_fn(m + dim, n + lin.len(), |i, j| match (i < m, j < n) {
        (true, true) => jh[(i, j)],
        (true, false) => 0.0,
        (false, true) => jg[(i - m, j)],
        (false, false) => lin[j - n][i - m],
    });
    rank_report(&mat)
}

#[derive(Clone, Debug, Serialize)]
pub struct SsoscReport {
    pub holds: bool,
    /// Dimension of the subspace the curvature is tested on.
    pub subspace_dim: usize,
    /// Smallest reduced eigenvalue; `None` for a trivial subspace.
    pub min_eigenvalue: Option<f64>,
}

/// The pieces of the second-order test: linear conditions whose null space
/// is the tested subspace, and the curvature matrix restricted to it.
#[derive(Clone, Debug)]
pub struct SecondOrderData {
    pub constraints: Matrix,
    pub curvature: SymMatrix,
}

enum SocPosition {
    Zero,
    Interior,
    Boundary,
}

fn soc_position(s: &[f64], tol: f64) -> SocPosition {
    let r = s.len() - 1;
    let bar = norm(&s[..r]);
    if norm(s) <= tol {
        SocPosition::Zero
    } else if s[r] - bar > tol {
        SocPosition::Interior
    } else {
        SocPosition::Boundary
    }
}

/// Builds the affine-hull conditions and the curvature `∇²ₓₓL₀ + Σ` for the
/// second-order sufficient condition at `(x, λ, μ)`.
///
/// Per block:
/// - orthant: `⟨∇gⱼ, d⟩ = 0` where `gⱼ = 0` and `μⱼ > 0`; no curvature term;
/// - second-order cone: `Jgⱼd = 0` for interior `μⱼ`; `Jgⱼd ∈ span(−μ̄ⱼ, μ̇ⱼ)`
///   when `gⱼ = 0` and `μⱼ` is on the boundary; `⟨μⱼ, Jgⱼd⟩ = 0` when both
///   are on the boundary, with curvature `−(μ̇ⱼ/ġⱼ)·Jgⱼᵀ·diag(−I, 1)·Jgⱼ`
///   whenever `gⱼ` is a nonzero boundary point;
/// - PSD: with `gⱼ − μⱼ = P·diag(ρ)·Pᵀ`, the conditions `P_βᵀHP_γ = 0` and
///   `P_γᵀHP_γ = 0` on `H = Jgⱼd`, and curvature `d ↦ 2⟨μⱼ, H·gⱼ†·H⟩`.
pub fn second_order_data<P: Program + ?Sized>(p: &P, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<SecondOrderData> {
    let n = p.n();
    let gx = p.g(x);
    let jg = p.jac_g(x);
    let jh = p.jac_h(x);
    let mut rows: Vec<Vec<f64>> = (0..jh.rows()).map(|i| jh.row(i).to_vec()).collect();
    let mut curvature = p.hess_lagrangian(x, lambda, mu);

    for (block, r) in p.cone().segments() {
        let g = &gx[r.clone()];
        let u = &mu[r.clone()];
        let jb = Matrix::from_fn(r.len(), n, |i, j| jg[(r.start + i, j)]);
        let tol = POINT_TOL
            .max(crate::cones::boundary_tol(g))
            .max(crate::cones::boundary_tol(u));
        match block {
            Block::Orthant(_) | Block::Soc(1) => {
                for j in 0..r.len() {
                    if g[j] <= POINT_TOL && u[j] > MULTIPLIER_TOL {
                        rows.push(jb.row(j).to_vec());
                    }
                }
            }
            Block::Soc(k) => {
                let last = k - 1;
                let g_pos = soc_position(g, tol);
                match (soc_position(u, tol), &g_pos) {
                    (SocPosition::Interior, _) => rows.extend((0..k).map(|i| jb.row(i).to_vec())),
                    (SocPosition::Boundary, SocPosition::Zero) => {
                        let mut v: Vec<f64> = u[..last].iter().map(|t| -t).collect();
                        v.push(u[last]);
                        let vv = dot(&v, &v);
                        let proj = Matrix::from_fn(k, k, |i, j| (if i == j { 1.0 } else { 0.0 }) - v[i] * v[j] / vv);
                        let pj = proj.matmul(&jb);
                        rows.extend((0..k).map(|i| pj.row(i).to_vec()));
                    }
                    (SocPosition::Boundary, SocPosition::Boundary) => rows.push(jb.tr_matvec(u)),
                    _ => {}
                }
                if let SocPosition::Boundary = g_pos {
                    let ratio = u[last] / g[last];
                    let mut reflected = jb.clone();
                    for i in 0..last {
                        for j in 0..n {
                            reflected[(i, j)] = -jb[(i, j)];
                        }
                    }
                    let h = SymMatrix::from_matrix(&jb.tr_matmul(&reflected)).scaled(-ratio);
                    curvature = curvature.add(&h);
                }
            }
            Block::Psd(side) => {
                let gm = psd::unpack(g, side);
                let um = psd::unpack(u, side);
                let xi = gm.add(&um.scaled(-1.0));
                let d = eig_sym(&xi)?;
                let neg = &d.gamma;
                for &i in d.beta.iter().chain(neg) {
                    for &j in neg {
                        if neg.contains(&i) && i > j {
                            continue;
                        }
                        let packed = psd::pack_sym_outer(&d.eigenvector(i), &d.eigenvector(j));
                        rows.push(jb.tr_matvec(&packed));
                    }
                }
                let gp = pinv_sym(&gm)?;
                let dirs: Vec<SymMatrix> = (0..n).map(|i| psd::unpack(&jb.column(i), side)).collect();
                let mut sigma = SymMatrix::zeros(n);
                for a in 0..n {
                    let ua = um.as_matrix().matmul(dirs[a].as_matrix()).matmul(gp.as_matrix());
                    for b in a..n {
                        // Tr(μ·Hₐ·g†·H_b) + Tr(μ·H_b·g†·Hₐ), both equal by symmetry
                        let t: f64 = ua
                            .as_slice()
                            .iter()
                            .zip(dirs[b].as_matrix().transpose().as_slice())
                            .map(|(x, y)| x * y)
                            .sum();
                        sigma.set(a, b, 2.0 * t);
                    }
                }
                curvature = curvature.add(&sigma);
            }
        }
    }
    Ok(SecondOrderData {
        constraints: stack_rows(&rows, n),
        curvature,
    })
}

/// Smallest eigenvalue of `Nᵀ·M·N`, or `None` when `N` has no columns.
pub fn reduced_min_eigenvalue(curvature: &SymMatrix, basis: &Matrix) -> Result<Option<f64>> {
    if basis.cols() == 0 {
        return Ok(None);
    }
    let reduced = curvature.congruence(basis);
    Ok(eig_sym(&reduced)?.eigenvalues.last().copied())
}

/// Strong second-order sufficient condition at a KKT point `(x, λ, μ)`.
///
/// Only the supplied multiplier is examined; under a unique multiplier this
/// is the full condition, otherwise a sufficient instance of it.
pub fn check_ssosc<P: Program + ?Sized>(p: &P, x: &[f64], lambda: &[f64], mu: &[f64]) -> Result<SsoscReport> {
    let kkt = kkt_residual(p, x, lambda, mu)?;
    if kkt.total > POINT_TOL {
        return Err(Error::InvalidParameter(format!(
            "second-order check needs a KKT point (residual {:e})",
            kkt.total
        )));
    }
    let data = second_order_data(p, x, lambda, mu)?;
    let basis = null_space(&data.constraints, 1e-12)?;
    let min_eigenvalue = reduced_min_eigenvalue(&data.curvature, &basis)?;
    Ok(SsoscReport {
        holds: min_eigenvalue.is_none_or(|e| e > CURVATURE_TOL),
        subspace_dim: basis.cols(),
        min_eigenvalue,
    })
}
