use super::builtin::{Instance, Reference};
use super::Program;
use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, SymMatrix};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Quadratic objective with affine constraints:
///
/// ```text
/// f(x) = ½xᵀQx + qᵀx + κ,   h(x) = Ax − b,   g(x) = Gx − d
/// ```
#[derive(Clone, Debug)]
pub struct QuadraticProgram {
    hessian: SymMatrix,
    linear: Vec<f64>,
    constant: f64,
    eq_matrix: Matrix,
    eq_rhs: Vec<f64>,
    conic_matrix: Matrix,
    conic_rhs: Vec<f64>,
    cone: Cone,
}

impl QuadraticProgram {
    /// `equality` may be `None` for `m = 0`.
    pub fn new(
        hessian: SymMatrix,
        linear: Vec<f64>,
        constant: f64,
        equality: Option<(Matrix, Vec<f64>)>,
        conic: (Matrix, Vec<f64>),
        cone: Cone,
    ) -> Result<Self> {
        let n = linear.len();
        if n == 0 {
            return Err(Error::InvalidParameter("program has no variables".into()));
        }
        let dim = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::Dimension { what, expected, got })
            }
        };
        dim("objective hessian", n, hessian.dim())?;
        let (eq_matrix, eq_rhs) = equality.unwrap_or_else(|| (Matrix::zeros(0, n), Vec::new()));
        dim("equality matrix columns", n, eq_matrix.cols())?;
        dim("equality rhs", eq_matrix.rows(), eq_rhs.len())?;
        let (conic_matrix, conic_rhs) = conic;
        dim("conic matrix columns", n, conic_matrix.cols())?;
        dim("conic matrix rows", cone.dim(), conic_matrix.rows())?;
        dim("conic rhs", cone.dim(), conic_rhs.len())?;
        let finite = hessian.as_matrix().is_finite()
            && eq_matrix.is_finite()
            && conic_matrix.is_finite()
            && linear.iter().chain(&eq_rhs).chain(&conic_rhs).all(|v| v.is_finite())
            && constant.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(QuadraticProgram {
            hessian,
            linear,
            constant,
            eq_matrix,
            eq_rhs,
            conic_matrix,
            conic_rhs,
            cone,
        })
    }

    pub fn hessian(&self) -> &SymMatrix {
        &self.hessian
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Same constraints, objective `−½xᵀQx + q′ᵀx` with `q′ = 2Qx* + q`, so
    /// that `(x*, λ*, μ*)` stays a KKT point while the curvature flips sign.
    pub fn negated_about(&self, x_star: &[f64]) -> QuadraticProgram {
        let qx = self.hessian.matvec(x_star);
        let linear = qx.iter().zip(&self.linear).map(|(a, b)| 2.0 * a + b).collect();
        QuadraticProgram {
            hessian: self.hessian.scaled(-1.0),
            linear,
            ..self.clone()
        }
    }
}

fn affine(m: &Matrix, rhs: &[f64], x: &[f64]) -> Vec<f64> {
    let mut v = m.matvec(x);
    v.iter_mut().zip(rhs).for_each(|(a, b)| *a -= b);
    v
}

impl Program for QuadraticProgram {
    fn n(&self) -> usize {
        self.linear.len()
    }
    fn m(&self) -> usize {
        self.eq_rhs.len()
    }
    fn cone(&self) -> &Cone {
        &self.cone
    }
    fn f(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.hessian.matvec(x)) + dot(&self.linear, x) + self.constant
    }
    fn grad_f(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hessian.matvec(x);
        g.iter_mut().zip(&self.linear).for_each(|(a, b)| *a += b);
        g
    }
    fn h(&self, x: &[f64]) -> Vec<f64> {
        affine(&self.eq_matrix, &self.eq_rhs, x)
    }
    fn jac_h(&self, _x: &[f64]) -> Matrix {
        self.eq_matrix.clone()
    }
    fn g(&self, x: &[f64]) -> Vec<f64> {
        affine(&self.conic_matrix, &self.conic_rhs, x)
    }
    fn jac_g(&self, _x: &[f64]) -> Matrix {
        self.conic_matrix.clone()
    }
    fn hess_lagrangian(&self, _x: &[f64], _lambda: &[f64], _mu: &[f64]) -> SymMatrix {
        self.hessian.clone()
    }
}

/// `x ↦ matrix·x − rhs`, rows given densely.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineMap {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub hessian: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub constant: f64,
}

/// Coefficient tables for a [`QuadraticProgram`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub equality: Option<AffineMap>,
    pub cone: Cone,
    pub conic: AffineMap,
    #[serde(default)]
    pub reference: Option<Reference>,
    #[serde(default)]
    pub y0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinRef {
    pub builtin: String,
}

/// A problem file: either `{"builtin": "<name>"}` or a [`QuadraticSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemConfig {
    Builtin(BuiltinRef),
    Quadratic(Box<QuadraticSpec>),
}

fn dense(rows: &[Vec<f64>], cols: usize, what: &'static str) -> Result<Matrix> {
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::Dimension {
            what,
            expected: cols,
            got: bad.len(),
        });
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

impl QuadraticSpec {
    pub fn build(&self) -> Result<QuadraticProgram> {
        let n = self.objective.linear.len();
        let q = dense(&self.objective.hessian, n, "objective hessian row")?;
        if q.rows() != n {
            return Err(Error::Dimension {
                what: "objective hessian",
                expected: n,
                got: q.rows(),
            });
        }
        let asym = q.sub(&q.transpose()).max_abs();
        if asym > 1e-12 * (1.0 + q.max_abs()) {
            return Err(Error::InvalidParameter(format!(
                "objective hessian is not symmetric (asymmetry {asym:e})"
            )));
        }
        let equality = match &self.equality {
            Some(a) => Some((dense(&a.matrix, n, "equality matrix row")?, a.rhs.clone())),
            None => None,
        };
        let conic = (
            dense(&self.conic.matrix, n, "conic matrix row")?,
            self.conic.rhs.clone(),
        );
        QuadraticProgram::new(
            SymMatrix::from_matrix(&q),
            self.objective.linear.clone(),
            self.objective.constant,
            equality,
            conic,
            self.cone.clone(),
        )
    }
}

impl ProblemConfig {
    pub fn into_instance(self) -> Result<Instance> {
        match self {
            ProblemConfig::Builtin(r) => super::builtin(&r.builtin),
            ProblemConfig::Quadratic(spec) => {
                let program = spec.build()?;
                let dual_dim = program.dual_dim();
                let y0 = spec.y0.clone().unwrap_or_else(|| vec![0.0; dual_dim]);
                if y0.len() != dual_dim {
                    return Err(Error::Dimension {
                        what: "y0",
                        expected: dual_dim,
                        got: y0.len(),
                    });
                }
                if let Some(r) = &spec.reference {
                    r.validate(&program)?;
                }
                Ok(Instance {
                    name: spec.name.clone().unwrap_or_else(|| "custom".into()),
                    program: Arc::new(program),
                    reference: spec.reference.clone(),
                    y0,
                })
            }
        }
    }
}
