//! Second-order cone blocks `{(m̄, ṁ) : ṁ ≥ ‖m̄‖}`; the scalar part is the
//! last coordinate.

use crate::linalg::{norm, null_space, Matrix};

/// Position of a point relative to the nonsmooth set of the SOC projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SocCase {
    /// `ż > ‖z̄‖`: the projection is the identity nearby.
    Interior,
    /// `ż < −‖z̄‖`: the projection vanishes nearby.
    Polar,
    /// `|ż| < ‖z̄‖`: differentiable, closed-form Jacobian.
    Smooth,
    /// `ż = ‖z̄‖`, `z ≠ 0`.
    UpperKink,
    /// `ż = −‖z̄‖`, `z ≠ 0`.
    LowerKink,
    /// `z = 0`.
    Origin,
}

fn split(z: &[f64]) -> (&[f64], f64) {
    let (bar, dot) = z.split_at(z.len() - 1);
    (bar, dot[0])
}

pub fn classify(z: &[f64], tol: f64) -> SocCase {
    let (bar, t) = split(z);
    let s = norm(bar);
    if norm(z) <= tol {
        SocCase::Origin
    } else if (t - s).abs() <= tol {
        SocCase::UpperKink
    } else if (t + s).abs() <= tol {
        SocCase::LowerKink
    } else if t > s {
        SocCase::Interior
    } else if t < -s {
        SocCase::Polar
    } else {
        SocCase::Smooth
    }
}

pub fn project(z: &[f64]) -> Vec<f64> {
    let (bar, t) = split(z);
    let s = norm(bar);
    if t >= s {
        z.to_vec()
    } else if t <= -s {
        vec![0.0; z.len()]
    } else {
        let a = 0.5 * (1.0 + t / s);
        let mut out: Vec<f64> = bar.iter().map(|v| a * v).collect();
        out.push(a * s);
        out
    }
}

pub fn contains(z: &[f64], tol: f64) -> bool {
    let (bar, t) = split(z);
    t >= norm(bar) - tol
}

fn unit_bar(z: &[f64]) -> Vec<f64> {
    let (bar, _) = split(z);
    let s = norm(bar);
    bar.iter().map(|v| v / s).collect()
}

/// `½·[[a·I + b·wwᵀ, w], [wᵀ, 1]]`
fn half_arrow(w: &[f64], a: f64, b: f64) -> Matrix {
    let r = w.len();
    let mut m = Matrix::zeros(r + 1, r + 1);
    for i in 0..r {
        for j in 0..r {
            m[(i, j)] = 0.5 * (b * w[i] * w[j] + if i == j { a } else { 0.0 });
        }
        m[(i, r)] = 0.5 * w[i];
        m[(r, i)] = 0.5 * w[i];
    }
    m[(r, r)] = 0.5;
    m
}

/// Jacobian of the projection in the smooth region `|ż| < ‖z̄‖`.
fn smooth_jacobian(z: &[f64]) -> Matrix {
    let (bar, t) = split(z);
    let q = t / norm(bar);
    half_arrow(&unit_bar(z), 1.0 + q, -q)
}

/// Deterministic element of `∂_BΠ`: identity on the upper kink, zero on the
/// lower kink and at the origin.
pub fn element(z: &[f64], tol: f64) -> Matrix {
    let n = z.len();
    match classify(z, tol) {
        SocCase::Interior | SocCase::UpperKink => Matrix::identity(n),
        SocCase::Polar | SocCase::LowerKink | SocCase::Origin => Matrix::zeros(n, n),
        SocCase::Smooth => smooth_jacobian(z),
    }
}

/// The deterministic element first, then the other admissible limits at a
/// kink. At the origin the continuous family is sampled at
/// `τ ∈ {0, ½, 1}` and `ν̄ = ±eᵢ`.
pub fn alternatives(z: &[f64], tol: f64) -> Vec<Matrix> {
    let n = z.len();
    let r = n - 1;
    let first = element(z, tol);
    match classify(z, tol) {
        SocCase::UpperKink => {
            let w = unit_bar(z);
            let mut other = Matrix::identity(n).add(&half_arrow(&w, 0.0, -1.0));
            other[(r, r)] = 0.5;
            vec![first, other]
        }
        SocCase::LowerKink => vec![first, half_arrow(&unit_bar(z), 0.0, 1.0)],
        SocCase::Origin => {
            let mut out = vec![first, Matrix::identity(n)];
            for i in 0..r {
                for sign in [1.0, -1.0] {
                    let mut nu = vec![0.0; r];
                    nu[i] = sign;
                    for tau in [0.0, 0.5, 1.0] {
                        out.push(half_arrow(&nu, 2.0 * tau, 1.0 - 2.0 * tau));
                    }
                }
            }
            out
        }
        _ => vec![first],
    }
}

/// Orthonormal basis of the lineality space of the tangent cone at `s ∈ Q`.
pub fn lineality_basis(s: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let n = s.len();
    let (bar, t) = split(s);
    if norm(s) <= tol {
        return Vec::new();
    }
    if t > norm(bar) + tol {
        let id = Matrix::identity(n);
        return (0..n).map(|i| id.column(i)).collect();
    }
    // boundary: {ν : ⟨ν̄, s̄⟩ − ν̇·ṡ = 0}
    let mut row: Vec<f64> = bar.to_vec();
    row.push(-t);
    let basis = null_space(&Matrix::from_rows(&[row]), 1e-12).expect("finite input");
    (0..basis.cols()).map(|j| basis.column(j)).collect()
}
