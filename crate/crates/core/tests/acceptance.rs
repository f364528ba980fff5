//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use common::*;
use somm::aug_lagrangian::{minimize_inner, InnerOptions};
use somm::cones::Cone;
use somm::diagnostics::{check_licq, check_nondegeneracy, check_ssosc, estimate_rate};
use somm::linalg::{dot, eig_sym, fd_jacobian, norm, sub, Matrix, FD_STEP};
use somm::multipliers::{
    build_ac, check_assumptions, evaluate_dual, grad_theta, multiplier_images, solve, Method, SolveOptions,
};
use somm::program::{builtin, QuadraticProgram};
use somm::report::{clamped_log10, error_series};
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let inst = builtin("nlp_toy").unwrap();
    let start = Instant::now();
    let rep = solve(
        inst.program.as_ref(),
        &[100.0, 100.0],
        inst.reference.as_ref(),
        &SolveOptions::with_method(Method::Second),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let etas = rep.etas().unwrap();
    let reached = etas.iter().position(|e| *e <= 1e-12);
    let h1 = &rep.history[1];
    let dev = (h1.lambda[0] + 1.0).abs().max((h1.mu[0] + 2.0).abs());
    outcome(
        reached.is_some_and(|k| k <= 3) && dev <= 1e-8 && elapsed < Duration::from_millis(100),
        format!(
            "eta <= 1e-12 at k = {reached:?}, |y1 - (-1,-2)| = {dev:.1e}, {:.1} ms",
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_2() -> Outcome {
    let inst = builtin("nlp_toy").unwrap();
    let p = inst.program.as_ref();
    let first = solve(
        p,
        &[100.0, 100.0],
        inst.reference.as_ref(),
        &SolveOptions::with_method(Method::First),
    )
    .unwrap();
    let second = solve(
        p,
        &[100.0, 100.0],
        inst.reference.as_ref(),
        &SolveOptions::with_method(Method::Second),
    )
    .unwrap();
    let etas = first.etas().unwrap();
    if etas.len() <= 30 {
        return outcome(false, format!("first-order history has only {} rows", etas.len()));
    }
    let ratio = (etas[30] / etas[5]).powf(1.0 / 25.0);
    let h1 = &first.history[1];
    let dev = (h1.lambda[0] - 49.5).abs().max((h1.mu[0] - 49.0).abs());
    let log_first: Vec<f64> = error_series(&first).into_iter().map(clamped_log10).collect();
    let log_second: Vec<f64> = error_series(&second).into_iter().map(clamped_log10).collect();
    let clamp_row = log_second.iter().position(|v| *v <= -50.0);
    let decrement_ok = (10..30).all(|k| (log_first[k] - log_first[k + 1] - 2f64.log10()).abs() < 0.01);
    outcome(
        (ratio - 0.5).abs() <= 0.02 && dev <= 1e-8 && clamp_row.is_some_and(|k| k <= 5) && decrement_ok,
        format!(
            "ratio over k=5..30 = {ratio:.4}, |y1 - (49.5,49)| = {dev:.1e}, second-order clamp row {clamp_row:?}, \
             first-order log10 decrement ≈ log10 2: {decrement_ok}"
        ),
    )
}

#[derive(Default)]
struct ConeStats {
    points: usize,
    moreau: f64,
    idempotence: f64,
    nonexpansive_violations: usize,
    w_lo: f64,
    w_hi: f64,
    fd: f64,
    fd_points: usize,
}

fn cone_family(family: &str, seed: u64) -> ConeStats {
    let mut rng = rng(seed);
    let mut s = ConeStats {
        w_lo: f64::INFINITY,
        w_hi: f64::NEG_INFINITY,
        ..Default::default()
    };
    for i in 0..1200 {
        let cone = random_cone(&mut rng, family);
        let z = random_point(&mut rng, &cone, i % 4 == 3);
        let pz = cone.project(&z).unwrap();
        let scale = 1.0 + norm(&z);
        let residual = sub(&pz, &z);
        let moreau = (cone.dist(&pz).unwrap())
            .max(cone.dist(&residual).unwrap())
            .max(dot(&pz, &residual).abs());
        s.moreau = s.moreau.max(moreau / scale);
        s.idempotence = s.idempotence.max(norm(&sub(&cone.project(&pz).unwrap(), &pz)));
        let other = random_point(&mut rng, &cone, false);
        let po = cone.project(&other).unwrap();
        if norm(&sub(&pz, &po)) > norm(&sub(&z, &other)) + 1e-12 {
            s.nonexpansive_violations += 1;
        }
        for w in cone.bsubdiff_sample(&z, 64).unwrap() {
            let d = eig_sym(&w.to_dense()).unwrap();
            s.w_lo = s.w_lo.min(*d.eigenvalues.last().unwrap());
            s.w_hi = s.w_hi.max(d.eigenvalues[0]);
        }
        if differentiable(&cone, &z, 1e-3) {
            let w = cone.bsubdiff_element(&z).unwrap();
            let jac = fd_jacobian(|u| cone.project(u).unwrap(), &z, FD_STEP).unwrap();
            let d = uniform_vec(&mut rng, z.len(), 1.0);
            let err = norm(&sub(&w.apply(&d), &jac.matvec(&d))) / (1.0 + norm(&d));
            s.fd = s.fd.max(err);
            s.fd_points += 1;
        }
        s.points += 1;
    }
    s
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut passed = true;
    let mut parts = Vec::new();
    for (i, family) in ["orthant", "soc", "psd"].into_iter().enumerate() {
        let s = cone_family(family, 30 + i as u64);
        let ok = s.points >= 1000
            && s.moreau <= 1e-10
            && s.idempotence <= 1e-12
            && s.nonexpansive_violations == 0
            && s.w_lo >= -1e-10
            && s.w_hi <= 1.0 + 1e-10
            && s.fd <= 1e-5;
        passed &= ok;
        parts.push(format!(
            "{family}: n={} moreau={:.1e} idem={:.1e} nonexp={} W∈[{:.1e},{:.6}] fd={:.1e} ({} pts)",
            s.points, s.moreau, s.idempotence, s.nonexpansive_violations, s.w_lo, s.w_hi, s.fd, s.fd_points
        ));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(10);
    parts.push(format!("{:.2} s", elapsed.as_secs_f64()));
    outcome(passed, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = rng(4);
    for name in BUILTINS {
        let inst = builtin(name).unwrap();
        let p = inst.program.as_ref();
        let ys = y_star(&inst);
        let x_ref = inst.reference.as_ref().unwrap().x.clone();
        for _ in 0..10 {
            let y: Vec<f64> = ys.iter().map(|v| v + rng_offset(&mut rng)).collect();
            let (_, x) = theta(p, 1.0, &y, &x_ref);
            let (lambda, mu) = y.split_at(p.m());
            let analytic = grad_theta(p, 1.0, &x, lambda, mu).unwrap();
            let fd = fd_jacobian(|u| vec![theta(p, 1.0, u, &x).0], &y, FD_STEP).unwrap();
            let err = norm(&sub(&analytic, fd.row(0))) / norm(&analytic).max(1.0);
            worst = worst.max(err);
        }
    }
    outcome(worst <= 1e-5, format!("max relative error {worst:.2e} over 30 points"))
}

fn rng_offset(rng: &mut impl rand::Rng) -> f64 {
    rng.gen_range(-0.05..=0.05)
}

const ROUNDING_FLOOR: f64 = 1e-9;

fn criterion_5() -> Outcome {
    let mut rng = rng(5);
    let mut worst_final = 0.0f64;
    let mut trend_ok = true;
    for name in BUILTINS {
        let inst = builtin(name).unwrap();
        let p = inst.program.as_ref();
        let ys = y_star(&inst);
        let x_ref = inst.reference.as_ref().unwrap().x.clone();
        for _ in 0..5 {
            let d = unit_vec(&mut rng, ys.len());
            let ratios: Vec<f64> = (0..=20)
                .map(|k| {
                    let t = 0.5f64.powi(k);
                    let y: Vec<f64> = ys.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                    let ev = evaluate_dual(p, 1.0, &y, &x_ref, InnerOptions::default()).unwrap();
                    let v = ev.v.expect("V defined near the solution");
                    let step: Vec<f64> = d.iter().map(|b| t * b).collect();
                    norm(&sub(&ev.grad_theta, &v.apply(&step))) / norm(&step)
                })
                .collect();
            worst_final = worst_final.max(ratios[20]);
            // piecewise-affine dual gradients give a ratio that is zero up to
            // rounding, which grows like ε/t; only the part above that floor
            // must shrink
            trend_ok &= ratios[10..]
                .windows(2)
                .all(|w| w[1] <= w[0] * 1.01 || w[1] <= ROUNDING_FLOOR);
        }
    }
    outcome(
        worst_final < 1e-4 && trend_ok,
        format!(
            "max ratio at k=20: {worst_final:.2e}, non-increasing over k=10..20 above {ROUNDING_FLOOR:e}: {trend_ok}"
        ),
    )
}

fn first_kkt_hit(rep: &somm::multipliers::SolveReport, tol: f64) -> Option<usize> {
    rep.history.iter().position(|r| r.kkt.total <= tol)
}

fn criterion_6() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in ["soc_toy", "sdp_toy"] {
        let inst = builtin(name).unwrap();
        let p = inst.program.as_ref();
        let first = solve(
            p,
            &inst.y0,
            inst.reference.as_ref(),
            &SolveOptions::with_method(Method::First),
        )
        .unwrap();
        let second = solve(
            p,
            &inst.y0,
            inst.reference.as_ref(),
            &SolveOptions::with_method(Method::Second),
        )
        .unwrap();
        let kf = first_kkt_hit(&first, 1e-10);
        let ks = first_kkt_hit(&second, 1e-10);
        let order = estimate_rate(&second.etas().unwrap()).map(|r| r.order_q);
        let ok = matches!((ks, kf), (Some(s), Some(f)) if s < f) && order.as_ref().is_ok_and(|q| *q >= 1.2);
        passed &= ok;
        parts.push(format!(
            "{name}: KKT<=1e-10 at k={ks:?} (second) vs k={kf:?} (first), order_q={:.3}",
            order.unwrap_or(f64::NAN)
        ));
    }
    outcome(passed, parts.join("; "))
}

/// LICQ and nondegeneracy do not involve the objective, so their negative
/// controls are degenerate constraint sets rather than negated objectives.
fn degenerate_controls() -> (bool, bool) {
    // x₁ = 0 twice
    let dup = QuadraticProgram::new(
        somm::linalg::SymMatrix::identity(2),
        vec![0.0, 0.0],
        0.0,
        Some((Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]), vec![0.0, 0.0])),
        (Matrix::from_rows(&[[0.0, 1.0]]), vec![-1.0]),
        Cone::orthant(1),
    )
    .unwrap();
    // h(x) = x and g(x) = x, active at 0
    let parallel = QuadraticProgram::new(
        somm::linalg::SymMatrix::identity(1),
        vec![0.0],
        0.0,
        Some((Matrix::from_rows(&[[1.0]]), vec![0.0])),
        (Matrix::from_rows(&[[1.0]]), vec![0.0]),
        Cone::orthant(1),
    )
    .unwrap();
    let licq_fails = !check_licq(&dup, &[0.0, 0.0]).unwrap().holds && !check_licq(&parallel, &[0.0]).unwrap().holds;
    let nd_fails = !check_nondegeneracy(&dup, &[0.0, 0.0]).unwrap().holds
        && !check_nondegeneracy(&parallel, &[0.0]).unwrap().holds;
    (licq_fails, nd_fails)
}

fn criterion_7() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in BUILTINS {
        for negated in [false, true] {
            let full = if negated {
                format!("{name}_neg")
            } else {
                name.to_string()
            };
            let inst = builtin(&full).unwrap();
            let p = inst.program.as_ref();
            let r = inst.reference.as_ref().unwrap();
            let licq = p.cone().is_polyhedral().then(|| check_licq(p, &r.x).unwrap().holds);
            let nd = check_nondegeneracy(p, &r.x).unwrap().holds;
            let ssosc = check_ssosc(p, &r.x, &r.lambda, &r.mu).unwrap().holds;
            let ass = check_assumptions(p, &r.x, &r.lambda, &r.mu, 1.0).unwrap().passed;
            let ok = if negated {
                !ssosc && !ass
            } else {
                licq.unwrap_or(true) && nd && ssosc && ass
            };
            passed &= ok;
            let licq_txt = licq.map_or("n/a".to_string(), |b| b.to_string());
            parts.push(format!(
                "{full}: licq={licq_txt} nondeg={nd} ssosc={ssosc} assumptions={ass}"
            ));
        }
    }
    let (licq_fails, nd_fails) = degenerate_controls();
    passed &= licq_fails && nd_fails;
    parts.push(format!(
        "degenerate controls rejected: licq={licq_fails} nondeg={nd_fails}"
    ));
    outcome(passed, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    let opts = InnerOptions::default();
    for name in BUILTINS {
        let inst = builtin(name).unwrap();
        let p = inst.program.as_ref();
        let ys = y_star(&inst);
        let x_ref = inst.reference.as_ref().unwrap().x.clone();
        let m = p.m();
        for _ in 0..5 {
            let y: Vec<f64> = ys.iter().map(|v| v + rng_offset(&mut rng)).collect();
            let dy: Vec<f64> = unit_vec(&mut rng, y.len()).iter().map(|v| 1e-5 * v).collect();
            let solve_at = |yy: &[f64]| minimize_inner(p, 1.0, &yy[..m], &yy[m..], &x_ref, opts).unwrap();
            let base = solve_at(&y);
            let plus: Vec<f64> = y.iter().zip(&dy).map(|(a, b)| a + b).collect();
            let minus: Vec<f64> = y.iter().zip(&dy).map(|(a, b)| a - b).collect();
            let xp = solve_at(&plus).x;
            let xm = solve_at(&minus).x;
            let dx: Vec<f64> = xp.iter().zip(&xm).map(|(a, b)| (a - b) / 2.0).collect();
            let (lam_c, mu_c) = multiplier_images(p, 1.0, &base.x, &y[..m], &y[m..]).unwrap();
            let a = build_ac(p, 1.0, &base.x, &lam_c, &mu_c, &base.w).unwrap();
            let rhs = {
                let mut v = p.jac_h(&base.x).tr_matvec(&dy[..m]);
                let wdm = base.w.apply(&dy[m..]);
                let jg = p.jac_g(&base.x).tr_matvec(&wdm);
                v.iter_mut().zip(&jg).for_each(|(a, b)| *a += b);
                v
            };
            let err = norm(&sub(&a.matvec(&dx), &rhs)) / norm(&rhs).max(norm(&dy));
            worst = worst.max(err);
        }
    }
    outcome(
        worst <= 1e-3,
        format!("max relative residual {worst:.2e} over 15 perturbations"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let start = Instant::now();
    let criteria: [Criterion; 8] = [
        ("1 second-order reproduction on nlp_toy", criterion_1),
        ("2 first-order reproduction on nlp_toy", criterion_2),
        ("3 cone property suite", criterion_3),
        ("4 dual gradient vs finite differences", criterion_4),
        ("5 Newton approximation ratio", criterion_5),
        ("6 superlinear vs linear on conic built-ins", criterion_6),
        ("7 optimality diagnostics and controls", criterion_7),
        ("8 directional-derivative identity", criterion_8),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.passed {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let total = start.elapsed();
    let fast = total < Duration::from_secs(60);
    if !fast {
        failures += 1;
    }
    println!(
        "{} full acceptance runtime {:.2} s (limit 60 s)",
        if fast { "PASS" } else { "FAIL" },
        total.as_secs_f64()
    );
    if failures > 0 {
        eprintln!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
}
