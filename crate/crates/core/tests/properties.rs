use std::f64::consts::PI;

use faber_tietz::conformal::{CapFamily, ConformalMap};
use faber_tietz::faber::{faber_polynomial, faber_tietz_form};
use faber_tietz::io::config::parse_complex;
use faber_tietz::numerics::{extract_taylor, least_squares, HermitianMatrix};
use faber_tietz::schiffer::schiffer_contour;
use faber_tietz::surface::{Lattice, OneForm, Surface};
use faber_tietz::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn complex(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(a, b)| c(a, b))
}

fn joukowski_sphere() -> Surface {
    let cap = ConformalMap::joukowski_ellipse(c(0.0, 0.0), c(1.0, 0.0), c(0.25, 0.0)).unwrap();
    Surface::sphere(CapFamily::new(vec![cap], 0.0).unwrap(), None, c(4.0, 4.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn complex_literals_round_trip(z in complex(1e3)) {
        let text = format!("{}{:+}i", z.re, z.im);
        prop_assert_eq!(parse_complex("x", &text).unwrap(), z);
    }

    #[test]
    fn map_inverse_round_trip(rho in 0.0..0.9f64, theta in 0.0..2.0 * PI, a in 0.0..0.3f64) {
        let map = ConformalMap::joukowski_ellipse(c(0.3, -0.2), c(0.8, 0.4), c(a, 0.1)).unwrap();
        let zeta = C64::from_polar(rho, theta);
        let back = map.invert(map.evaluate(zeta).unwrap()).unwrap();
        prop_assert!((back - zeta).norm() < 1e-10);
    }

    #[test]
    fn taylor_extraction_recovers_polynomials(coeffs in prop::collection::vec(complex(2.0), 1..8)) {
        let poly = coeffs.clone();
        let f = move |z: C64| poly.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * z + a);
        let series = extract_taylor(f, c(0.0, 0.0), 0.5, 16).unwrap();
        for (j, a) in coeffs.iter().enumerate() {
            prop_assert!((series.coefficients[j] - a).norm() < 1e-12);
        }
    }

    #[test]
    fn gram_solve_inverts_positive_definite_systems(entries in prop::collection::vec(complex(1.0), 16), rhs in prop::collection::vec(complex(1.0), 4)) {
        // A = B^* B + I
        let b = |i: usize, j: usize| entries[4 * i + j];
        let gram = HermitianMatrix::from_fn(4, |i, j| {
            let mut s: C64 = (0..4).map(|k| b(k, i).conj() * b(k, j)).sum();
            if i == j {
                s += 1.0;
            }
            s
        });
        let sol = least_squares(&gram, &rhs).unwrap();
        prop_assert!(!sol.flagged());
        let back = gram.mul_vec(&sol.x);
        for (x, y) in back.iter().zip(&rhs) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn one_forms_combine_linearly(a in complex(2.0), b in complex(2.0), w in complex(3.0)) {
        prop_assume!(w.norm() > 0.1 && (w - 1.0).norm() > 0.1);
        let f = OneForm::holomorphic(|z| 1.0 / (z * z));
        let g = OneForm::holomorphic(|z| 1.0 / (z - 1.0));
        let h = OneForm::combination(&[(a, f.clone()), (b, g.clone())]).unwrap();
        prop_assert!((h.eval(w) - (a * f.eval(w) + b * g.eval(w))).norm() < 1e-12 * (1.0 + h.eval(w).norm()));
    }

    #[test]
    fn torus_kernel_is_even_and_periodic(u in complex(0.5), tr in -0.4..0.4f64, ti in 0.8..1.5f64) {
        let l = Lattice::new(c(tr, ti)).unwrap();
        prop_assume!(l.distance_to_lattice(u) > 0.05);
        let k = l.kernel(u);
        let scale = 1.0 + k.norm();
        prop_assert!((l.kernel(-u) - k).norm() < 1e-10 * scale);
        prop_assert!((l.kernel(u + 1.0) - k).norm() < 1e-10 * scale);
        prop_assert!((l.kernel(u + l.tau()) - k).norm() < 1e-10 * scale);
    }

    #[test]
    fn sphere_kernel_is_symmetric(w in complex(3.0), z in complex(3.0)) {
        prop_assume!((w - z).norm() > 0.05);
        let s = joukowski_sphere();
        let (a, b) = (s.schiffer_kernel(w, z).unwrap(), s.schiffer_kernel(z, w).unwrap());
        prop_assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn affine_faber_polynomials(r in 0.2..2.0f64, center in complex(1.0), m in 1u32..8, z in complex(4.0)) {
        let map = ConformalMap::affine(center, c(r, 0.0)).unwrap();
        let u = z - center;
        prop_assume!(u.norm() > 1.2 * r);
        let phi = faber_polynomial(&map, m, 0.7).unwrap();
        prop_assert!((phi.eval(z) + (r / u).powi(m as i32)).norm() < 1e-10);
    }

    #[test]
    fn contour_is_independent_of_radius(r0 in 0.3..0.85f64, m in 1u32..6, theta in 0.0..2.0 * PI, rho in 1.5..3.0f64) {
        let s = joukowski_sphere();
        let z = C64::from_polar(rho, theta);
        let a = schiffer_contour(&s, 0, m, z, r0).unwrap();
        let b = schiffer_contour(&s, 0, m, z, 0.6).unwrap();
        prop_assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn faber_tietz_forms_commute_with_translation(shift in complex(2.0), m in 1u32..5, theta in 0.0..2.0 * PI) {
        let map = ConformalMap::joukowski_ellipse(c(0.0, 0.0), c(1.0, 0.0), c(0.25, 0.0)).unwrap();
        let s = Surface::sphere(CapFamily::new(vec![map.clone()], 0.0).unwrap(), None, c(4.0, 4.0)).unwrap();
        let t = Surface::sphere(CapFamily::new(vec![map.translated(shift).unwrap()], 0.0).unwrap(), None, c(4.0, 4.0) + shift)
            .unwrap();
        let (a, b) = (faber_tietz_form(&s, 0, m).unwrap(), faber_tietz_form(&t, 0, m).unwrap());
        let z = C64::from_polar(2.0, theta);
        prop_assert!((a.form.eval(z) - b.form.eval(z + shift)).norm() < 1e-10);
    }
}
