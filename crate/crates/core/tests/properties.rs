mod common;

use bessmertnyi::cayley::{disk_to_halfplane, halfplane_to_disk, inverse_value_cayley, value_cayley};
use bessmertnyi::geometry::in_omega;
use bessmertnyi::io;
use bessmertnyi::sampling::{random_halfplane_point, random_pencil, seeded, PencilShape};
use bessmertnyi::{MatrixFunction, RealizedFunction, Tolerances};
use common::{c, fro, rel};
use num_complex::Complex64;
use proptest::prelude::*;

fn pencil(seed: u64, num_vars: usize, n: usize, p: usize) -> RealizedFunction {
    random_pencil(&mut seeded(seed), PencilShape { num_vars, n, p }, false, Tolerances::default()).unwrap()
}

fn point(seed: u64, num_vars: usize) -> Vec<Complex64> {
    random_halfplane_point(&mut seeded(seed ^ 0x9e37_79b9), num_vars, 0.8)
}

fn shape() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 1usize..4, 1usize..3, 0usize..4)
}

fn coordinate() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_one_homogeneity((seed, nv, n, p) in shape(), r in 0.1f64..5.0, angle in -1.0f64..1.0) {
        let f = pencil(seed, nv, n, p);
        let z = point(seed, nv);
        let lambda = Complex64::from_polar(r, angle);
        let scaled: Vec<Complex64> = z.iter().map(|x| x * lambda).collect();
        let (Ok(a), Ok(b)) = (f.eval(&scaled), f.eval(&z)) else { return Ok(()) };
        let b = b * lambda;
        prop_assert!(fro(&(&a - &b)) <= 1e-9 * (1.0 + fro(&b) + f.magnitude(&scaled)));
    }

    #[test]
    fn conjugate_symmetry((seed, nv, n, p) in shape()) {
        let f = pencil(seed, nv, n, p);
        let z = point(seed, nv);
        let zbar: Vec<Complex64> = z.iter().map(|x| x.conj()).collect();
        let (Ok(a), Ok(b)) = (f.eval(&zbar), f.eval(&z)) else { return Ok(()) };
        prop_assert!(fro(&(&a - b.adjoint())) <= 1e-9 * (1.0 + fro(&b) + f.magnitude(&z)));
    }

    #[test]
    fn pencil_json_roundtrip((seed, nv, n, p) in shape()) {
        let f = pencil(seed, nv, n, p);
        let back = io::pencil_from_json(&io::pencil_to_json(f.pencil())).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.pencil().as_pencil().coeffs()) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn omega_is_rotation_and_permutation_invariant(z in prop::collection::vec(coordinate(), 1..5), angle in 0.0f64..6.3) {
        let base = in_omega(&z);
        let rot = Complex64::from_polar(1.0, angle);
        let rotated: Vec<Complex64> = z.iter().map(|x| x * rot).collect();
        let mut reversed = z.clone();
        reversed.reverse();
        prop_assert_eq!(base, in_omega(&reversed));
        if z.iter().all(|x| x.norm() > 1e-6) {
            prop_assert_eq!(base, in_omega(&rotated));
        }
    }

    #[test]
    fn open_halfplane_points_lie_in_omega(z in prop::collection::vec((0.01f64..3.0, -3.0f64..3.0), 1..5)) {
        let z: Vec<Complex64> = z.into_iter().map(|(re, im)| c(re, im)).collect();
        prop_assert!(in_omega(&z));
    }

    #[test]
    fn point_cayley_roundtrip(w in prop::collection::vec((0.0f64..0.95, 0.0f64..6.3), 1..4)) {
        let w: Vec<Complex64> = w.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect();
        let back = halfplane_to_disk(&disk_to_halfplane(&w).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&w) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn value_cayley_is_contractive((seed, nv, n, p) in shape()) {
        let f = pencil(seed, nv, n, p);
        let z = point(seed, nv);
        let tol = Tolerances::default();
        let Ok(fz) = f.eval(&z) else { return Ok(()) };
        let s = value_cayley(&fz, &tol).unwrap();
        prop_assert!(s.clone().svd(false, false).singular_values.max() <= 1.0 + 1e-9);
        let back = inverse_value_cayley(&s, &tol).unwrap();
        prop_assert!(rel(&back, &fz) <= 1e-8);
    }
}
