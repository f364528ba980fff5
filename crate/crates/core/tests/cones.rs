mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use somm::cones::{Block, Cone};
use somm::linalg::{dot, eig_sym, fd_jacobian, norm, scale, sub, FD_STEP};

fn random_product(rng: &mut impl Rng) -> Cone {
    let blocks = (0..rng.gen_range(1..=4))
        .map(|_| match rng.gen_range(0..3) {
            0 => Block::Orthant(rng.gen_range(1..=4)),
            1 => Block::Soc(rng.gen_range(1..=5)),
            _ => Block::Psd(rng.gen_range(1..=4)),
        })
        .collect();
    Cone::new(blocks).unwrap()
}

fn family() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("orthant"), Just("soc"), Just("psd")]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_properties(family in family(), seed in any::<u64>(), kink in any::<bool>()) {
        let mut rng = rng(seed);
        let cone = random_cone(&mut rng, family);
        let z = random_point(&mut rng, &cone, kink);
        let pz = cone.project(&z).unwrap();
        prop_assert!(norm(&sub(&cone.project(&pz).unwrap(), &pz)) <= 1e-12);

        let other = random_point(&mut rng, &cone, false);
        let po = cone.project(&other).unwrap();
        prop_assert!(norm(&sub(&pz, &po)) <= norm(&sub(&z, &other)) + 1e-12);

        let t = rng.gen_range(0.1..10.0);
        let ptz = cone.project(&scale(&z, t)).unwrap();
        prop_assert!(norm(&sub(&ptz, &scale(&pz, t))) <= 1e-12 * (1.0 + t * norm(&z)));

        let tol = 1e-10 * (1.0 + norm(&z));
        let residual = sub(&pz, &z);
        prop_assert!(cone.dist(&pz).unwrap() <= tol);
        prop_assert!(cone.dist(&residual).unwrap() <= tol, "Π(z) − z must lie in the cone");
        prop_assert!(dot(&pz, &residual).abs() <= tol);
    }

    #[test]
    fn elements_are_symmetric_with_unit_spectrum(family in family(), seed in any::<u64>(), kink in any::<bool>()) {
        let mut rng = rng(seed);
        let cone = random_cone(&mut rng, family);
        let z = random_point(&mut rng, &cone, kink);
        for w in cone.bsubdiff_sample(&z, 64).unwrap() {
            let dense = w.to_dense();
            let d = eig_sym(&dense).unwrap();
            prop_assert!(d.eigenvalues[0] <= 1.0 + 1e-10);
            prop_assert!(*d.eigenvalues.last().unwrap() >= -1e-10);
            // the operator and its dense form agree, which also checks symmetry of apply
            let a = uniform_vec(&mut rng, z.len(), 1.0);
            let b = uniform_vec(&mut rng, z.len(), 1.0);
            prop_assert!((dot(&w.apply(&a), &b) - dot(&a, &w.apply(&b))).abs() <= 1e-12);
            prop_assert!(norm(&sub(&w.apply(&a), &dense.matvec(&a))) <= 1e-12);
        }
    }

    #[test]
    fn element_matches_fd_where_differentiable(family in family(), seed in any::<u64>()) {
        let mut rng = rng(seed);
        let cone = random_cone(&mut rng, family);
        let z = random_point(&mut rng, &cone, false);
        prop_assume!(differentiable(&cone, &z, 1e-3));
        let w = cone.bsubdiff_element(&z).unwrap();
        let jac = fd_jacobian(|u| cone.project(u).unwrap(), &z, FD_STEP).unwrap();
        let d = uniform_vec(&mut rng, z.len(), 2.0);
        prop_assert!(norm(&sub(&w.apply(&d), &jac.matvec(&d))) <= 1e-5 * (1.0 + norm(&d)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn product_cone_is_blockwise(seed in any::<u64>(), kink in any::<bool>()) {
        let mut rng = rng(seed);
        let cone = random_product(&mut rng);
        let z = random_point(&mut rng, &cone, kink);
        let whole = cone.project(&z).unwrap();
        let element = cone.bsubdiff_element(&z).unwrap();
        let d = uniform_vec(&mut rng, z.len(), 1.0);
        let applied = element.apply(&d);
        for (b, r) in cone.segments() {
            let single = Cone::new(vec![b]).unwrap();
            let expected = single.project(&z[r.clone()]).unwrap();
            prop_assert_eq!(&whole[r.clone()], expected.as_slice());
            let part = single.bsubdiff_element(&z[r.clone()]).unwrap().apply(&d[r.clone()]);
            prop_assert!(norm(&sub(&applied[r], &part)) <= 1e-14);
        }
    }

    #[test]
    fn lineality_directions_stay_in_cone(family in family(), seed in any::<u64>(), kink in any::<bool>()) {
        let mut rng = rng(seed);
        let cone = random_cone(&mut rng, family);
        let s = cone.project(&random_point(&mut rng, &cone, kink)).unwrap();
        let basis = cone.lineality_basis(&s).unwrap();
        for v in &basis {
            prop_assert!((norm(v) - 1.0).abs() <= 1e-10);
            // first-order: s ± t·v leaves the cone only at O(t²)
            let t = 1e-4;
            for sign in [1.0, -1.0] {
                let moved: Vec<f64> = s.iter().zip(v).map(|(a, b)| a + sign * t * b).collect();
                prop_assert!(cone.dist(&moved).unwrap() <= 1e-6, "dist {:e}", cone.dist(&moved).unwrap());
            }
        }
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i + 1..] {
                prop_assert!(dot(a, b).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn worked_projections() {
    let c = Cone::orthant(3);
    assert_eq!(c.project(&[1.0, -2.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
    let s = Cone::soc(3);
    assert_eq!(s.project(&[3.0, 4.0, 0.0]).unwrap(), vec![1.5, 2.0, 2.5]);
    assert_eq!(s.project(&[3.0, 4.0, -6.0]).unwrap(), vec![0.0; 3]);
}
