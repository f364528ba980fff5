#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use somm::aug_lagrangian::{eval_lc, minimize_inner, InnerOptions};
use somm::cones::{psd, Block, Cone};
use somm::linalg::{Matrix, SymMatrix};
use somm::program::{Instance, Program};

pub const BUILTINS: [&str; 3] = ["nlp_toy", "soc_toy", "sdp_toy"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..=scale)).collect()
}

pub fn unit_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v = uniform_vec(rng, n, 1.0);
        let s = somm::linalg::norm(&v);
        if s > 1e-3 {
            return v.iter().map(|x| x / s).collect();
        }
    }
}

pub fn random_sym(rng: &mut impl Rng, p: usize, scale: f64) -> SymMatrix {
    let mut m = SymMatrix::zeros(p);
    for i in 0..p {
        for j in i..p {
            m.set(i, j, rng.gen_range(-scale..=scale));
        }
    }
    m
}

pub fn y_star(inst: &Instance) -> Vec<f64> {
    inst.reference.as_ref().unwrap().y()
}

/// `ϑ_c(y) = L_c(x_c(y), y)` with a tight inner solve.
pub fn theta(p: &dyn Program, c: f64, y: &[f64], x_start: &[f64]) -> (f64, Vec<f64>) {
    let (lambda, mu) = y.split_at(p.m());
    let inner = minimize_inner(p, c, lambda, mu, x_start, InnerOptions::default()).unwrap();
    assert!(inner.converged, "inner solve failed at {y:?}");
    (eval_lc(p, c, &inner.x, lambda, mu).unwrap(), inner.x)
}

/// A random point for one cone family with the given block size parameter.
pub fn random_cone(rng: &mut impl Rng, family: &str) -> Cone {
    match family {
        "orthant" => Cone::orthant(rng.gen_range(1..=6)),
        "soc" => Cone::soc(rng.gen_range(1..=5) + 1),
        "psd" => Cone::psd(rng.gen_range(1..=5)),
        _ => unreachable!(),
    }
}

/// Random point, occasionally pushed onto a kink of the projection.
pub fn random_point(rng: &mut impl Rng, cone: &Cone, kink: bool) -> Vec<f64> {
    let mut z = Vec::new();
    for (b, r) in cone.segments() {
        let mut seg = uniform_vec(rng, r.len(), 3.0);
        if kink {
            match b {
                Block::Orthant(_) => {
                    let i = rng.gen_range(0..seg.len());
                    seg[i] = 0.0;
                }
                Block::Soc(k) if k > 1 => {
                    let bar = somm::linalg::norm(&seg[..k - 1]);
                    seg[k - 1] = match rng.gen_range(0..3) {
                        0 => bar,
                        1 => -bar,
                        _ => {
                            seg.iter_mut().for_each(|v| *v = 0.0);
                            0.0
                        }
                    };
                }
                Block::Psd(p) => {
                    let m = psd::unpack(&seg, p);
                    let d = somm::linalg::eig_sym(&m).unwrap();
                    let zero = rng.gen_range(0..p);
                    let mut ev = d.eigenvalues.clone();
                    ev[zero] = 0.0;
                    let m = d.rotate_out(&SymMatrix::diag(&ev));
                    seg = psd::pack(&m);
                }
                _ => seg[0] = 0.0,
            }
        }
        z.extend(seg);
    }
    z
}

/// True when the projection onto `cone` is differentiable at `z` with margin.
pub fn differentiable(cone: &Cone, z: &[f64], margin: f64) -> bool {
    cone.segments().all(|(b, r)| {
        let s = &z[r];
        match b {
            Block::Orthant(_) | Block::Soc(1) => s.iter().all(|v| v.abs() > margin),
            Block::Soc(k) => {
                let bar = somm::linalg::norm(&s[..k - 1]);
                (s[k - 1].abs() - bar).abs() > margin && bar > margin
            }
            Block::Psd(p) => somm::linalg::eig_sym(&psd::unpack(s, p))
                .unwrap()
                .eigenvalues
                .iter()
                .all(|v| v.abs() > margin),
        }
    })
}

/// `min ½‖x − a‖²  s.t.  1 − ‖x‖² ≥ 0` with `a = (2, 1)`: a nonlinear
/// constraint whose solution is `a/‖a‖` with multiplier `(√5 − 1)/2`.
pub struct Disk;

impl Disk {
    pub const A: [f64; 2] = [2.0, 1.0];

    pub fn solution() -> (Vec<f64>, Vec<f64>) {
        let s = 5f64.sqrt();
        (vec![2.0 / s, 1.0 / s], vec![(s - 1.0) / 2.0])
    }
}

static DISK_CONE: std::sync::OnceLock<Cone> = std::sync::OnceLock::new();

impl Program for Disk {
    fn n(&self) -> usize {
        2
    }
    fn m(&self) -> usize {
        0
    }
    fn cone(&self) -> &Cone {
        DISK_CONE.get_or_init(|| Cone::orthant(1))
    }
    fn f(&self, x: &[f64]) -> f64 {
        0.5 * ((x[0] - Self::A[0]).powi(2) + (x[1] - Self::A[1]).powi(2))
    }
    fn grad_f(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0] - Self::A[0], x[1] - Self::A[1]]
    }
    fn h(&self, _x: &[f64]) -> Vec<f64> {
        vec![]
    }
    fn jac_h(&self, _x: &[f64]) -> Matrix {
        Matrix::zeros(0, 2)
    }
    fn g(&self, x: &[f64]) -> Vec<f64> {
        vec![1.0 - x[0] * x[0] - x[1] * x[1]]
    }
    fn jac_g(&self, x: &[f64]) -> Matrix {
        Matrix::from_rows(&[[-2.0 * x[0], -2.0 * x[1]]])
    }
    fn hess_lagrangian(&self, _x: &[f64], _lambda: &[f64], mu: &[f64]) -> SymMatrix {
        SymMatrix::identity(2).scaled(1.0 + 2.0 * mu[0])
    }
}
