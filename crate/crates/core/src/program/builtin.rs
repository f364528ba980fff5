use super::{kkt_residual, Program, QuadraticProgram};
use crate::cones::{psd, Cone};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

/// A known KKT point `(x*, λ*, μ*)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub x: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Reference {
    /// Stacked multipliers `(λ*, μ*)`.
    pub fn y(&self) -> Vec<f64> {
        let mut y = self.lambda.clone();
        y.extend_from_slice(&self.mu);
        y
    }

    pub fn validate<P: Program + ?Sized>(&self, p: &P) -> Result<()> {
        super::check_dims(p, &self.x, &self.lambda, &self.mu)
    }
}

/// A program bundled with its default starting multipliers and, when known,
/// its solution.
#[derive(Clone)]
pub struct Instance {
    pub name: String,
    pub program: Arc<dyn Program>,
    pub reference: Option<Reference>,
    pub y0: Vec<f64>,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("name", &self.name)
            .field("n", &self.program.n())
            .field("m", &self.program.m())
            .field("cone", self.program.cone())
            .field("reference", &self.reference)
            .field("y0", &self.y0)
            .finish()
    }
}

const BASE_NAMES: [&str; 3] = ["nlp_toy", "soc_toy", "sdp_toy"];

/// Names accepted by [`builtin`]. Each base problem also has a `<name>_neg`
/// variant whose objective curvature is negated about the same KKT point.
pub fn builtin_names() -> Vec<String> {
    BASE_NAMES
        .iter()
        .flat_map(|n| [n.to_string(), format!("{n}_neg")])
        .collect()
}

/// `½‖x − a‖² = ½xᵀx − aᵀx + ½aᵀa`
fn distance_to(
    a: &[f64],
    equality: Option<(Matrix, Vec<f64>)>,
    conic: (Matrix, Vec<f64>),
    cone: Cone,
) -> QuadraticProgram {
    let n = a.len();
    let linear = a.iter().map(|v| -v).collect();
    let constant = 0.5 * a.iter().map(|v| v * v).sum::<f64>();
    QuadraticProgram::new(SymMatrix::identity(n), linear, constant, equality, conic, cone)
        .expect("built-in coefficients are consistent")
}

fn base(name: &str) -> Option<(QuadraticProgram, Reference, Vec<f64>)> {
    Some(match name {
        // min ½(x₁−1)² + ½(x₂−2)²  s.t.  x₁ = 0,  x₂ ≥ 0
        "nlp_toy" => (
            distance_to(
                &[1.0, 2.0],
                Some((Matrix::from_rows(&[[1.0, 0.0]]), vec![0.0])),
                (Matrix::from_rows(&[[0.0, 1.0]]), vec![0.0]),
                Cone::orthant(1),
            ),
            Reference {
                x: vec![0.0, 2.0],
                lambda: vec![-1.0],
                mu: vec![0.0],
            },
            vec![100.0, 100.0],
        ),
        // projection of (3, 4, 0) onto the second-order cone
        "soc_toy" => (
            distance_to(
                &[3.0, 4.0, 0.0],
                None,
                (Matrix::identity(3), vec![0.0; 3]),
                Cone::soc(3),
            ),
            Reference {
                x: vec![1.5, 2.0, 2.5],
                lambda: vec![],
                mu: vec![-1.5, -2.0, 2.5],
            },
            vec![-2.0, -1.0, 2.0],
        ),
        // projection of diag(2, −3) onto S₊², with x = (X₁₁, X₁₂, X₂₂)
        "sdp_toy" => (
            distance_to(
                &[2.0, 0.0, -3.0],
                None,
                (Matrix::diag(&[1.0, SQRT_2, 1.0]), vec![0.0; 3]),
                Cone::psd(2),
            ),
            Reference {
                x: vec![2.0, 0.0, 0.0],
                lambda: vec![],
                mu: psd::pack(&SymMatrix::diag(&[0.0, 3.0])),
            },
            psd::pack(&SymMatrix::from_rows(&[[1.0, 1.0], [1.0, 5.0]])),
        ),
        _ => return None,
    })
}

/// Looks up a built-in problem by name.
pub fn builtin(name: &str) -> Result<Instance> {
    let (base_name, negated) = match name.strip_suffix("_neg") {
        Some(b) => (b, true),
        None => (name, false),
    };
    let (program, reference, y0) = base(base_name).ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
    let program = if negated {
        program.negated_about(&reference.x)
    } else {
        program
    };
    debug_assert!(kkt_residual(&program, &reference.x, &reference.lambda, &reference.mu)
        .map(|r| r.total < 1e-12)
        .unwrap_or(false));
    Ok(Instance {
        name: name.to_string(),
        program: Arc::new(program),
        reference: Some(reference),
        y0,
    })
}
