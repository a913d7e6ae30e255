use num_traits::{Signed, ToPrimitive};
use proptest::prelude::*;

use petersson::arith::{rat, rat_to_f64};
use petersson::bessel::{bessel_j, BesselRequest};
use petersson::experiments::{chebyshev_u, discrepancy, sato_tate_cdf, DiscreteMeasure, Reference};
use petersson::field::{FieldElement, TotallyRealField};
use petersson::ideals::{main_term_indicator, psi_of_level, solve_class_equation, PrincipalIdeal};
use petersson::kloosterman::{global_kloosterman, DEFAULT_PAIR_BUDGET};
use petersson::lattice::{box_set, enumerate_box};

fn quad(d: i64) -> TotallyRealField {
    TotallyRealField::quadratic(d).unwrap()
}

fn field_strategy() -> impl Strategy<Value = TotallyRealField> {
    prop_oneof![Just(2i64), Just(3), Just(5), Just(13)].prop_map(quad)
}

fn rational_elem() -> impl Strategy<Value = FieldElement> {
    (-50i64..=50, 1i64..=12, -50i64..=50, 1i64..=12).prop_map(|(a, da, b, db)| FieldElement::new(rat(a, da), rat(b, db)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(f in field_strategy(), x in rational_elem(), y in rational_elem(), z in rational_elem()) {
        prop_assert_eq!(f.mul(&x, &f.mul(&y, &z)), f.mul(&f.mul(&x, &y), &z));
        prop_assert_eq!(f.mul(&x, &(&y + &z)), &f.mul(&x, &y) + &f.mul(&x, &z));
        prop_assert_eq!(f.mul(&x, &y), f.mul(&y, &x));
        if !x.is_zero() {
            prop_assert_eq!(f.mul(&x, &f.inv(&x).unwrap()), FieldElement::one());
            prop_assert_eq!(f.norm(&f.mul(&x, &y)), f.norm(&x) * f.norm(&y));
        }
    }

    #[test]
    fn trace_and_norm_match_embeddings(f in field_strategy(), x in rational_elem()) {
        let s = f.embeddings_f64(&x);
        let tr = rat_to_f64(&f.trace(&x));
        let nm = rat_to_f64(&f.norm(&x));
        let scale = s[0].abs().max(s[1].abs()).max(1.0);
        prop_assert!((s[0] + s[1] - tr).abs() <= 1e-12 * scale);
        prop_assert!((s[0] * s[1] - nm).abs() <= 1e-12 * scale * scale);
        for j in 1..=2 {
            let e = f.embed(&x, j);
            prop_assert!(e.lo <= e.hi);
            prop_assert!((e.mid_f64() - s[j - 1]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn inverse_different_membership(f in field_strategy(), x in rational_elem()) {
        prop_assert_eq!(f.in_inverse_different(&x), f.is_integral(&f.mul(&x, f.different_generator())));
    }

    #[test]
    fn psi_is_multiplicative(f in field_strategy(), a in -9i64..=9, b in -5i64..=5, c in -9i64..=9, d in -5i64..=5) {
        let x = f.elem(a, b);
        let y = f.elem(c, d);
        prop_assume!(!x.is_zero() && !y.is_zero());
        let ix = PrincipalIdeal::new(&f, &x).unwrap();
        let iy = PrincipalIdeal::new(&f, &y).unwrap();
        prop_assume!(ix.coprime(&f, &iy));
        let ixy = ix.mul(&f, &iy);
        prop_assume!(ixy.norm_u64().unwrap() <= 10_000);
        prop_assert_eq!(psi_of_level(&f, &ixy).unwrap(), psi_of_level(&f, &ix).unwrap() * psi_of_level(&f, &iy).unwrap());
    }

    #[test]
    fn indicator_symmetry(f in prop_oneof![Just(2i64), Just(5), Just(13)].prop_map(quad), a in -6i64..=6, b in -6i64..=6, c in -6i64..=6, d in -6i64..=6, sq in any::<bool>()) {
        let dinv = f.inv(f.different_generator()).unwrap();
        let m1 = f.mul(&dinv, &f.elem(a, b));
        let m2 = if sq { m1.clone() } else { f.mul(&dinv, &f.elem(c, d)) };
        let n = PrincipalIdeal::unit(&f);
        let t = main_term_indicator(&f, &m1, &m2, &n);
        prop_assert_eq!(t, main_term_indicator(&f, &m2, &m1, &n));
        let u = f.totally_positive_unit();
        let u2m1 = f.mul(&f.mul(&u, &u), &m1);
        prop_assert_eq!(t, main_term_indicator(&f, &u2m1, &m2, &n));
    }

    #[test]
    fn class_equation_solution(f in prop_oneof![Just(2i64), Just(5), Just(13)].prop_map(quad), a in -20i64..=20, b in -20i64..=20) {
        let x = f.elem(a, b);
        prop_assume!(!x.is_zero());
        let n = PrincipalIdeal::new(&f, &x).unwrap();
        let sol = solve_class_equation(&f, &n).unwrap();
        prop_assert_eq!(sol.t, 1);
        let b1 = &sol.b_list[0];
        let lhs = PrincipalIdeal::new(&f, &sol.eta_list[0]).unwrap();
        prop_assert!(lhs.eq_ideal(&f, &b1.mul(&f, b1).mul(&f, &n)));
        prop_assert!(f.is_totally_positive(&sol.eta_list[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn lattice_scaling(f in field_strategy(), s in 1i64..=12) {
        let unit = box_set(&f, &PrincipalIdeal::unit(&f));
        let scaled = box_set(&f, &PrincipalIdeal::from_int(&f, s).unwrap());
        prop_assert_eq!(&scaled.delta_sq, &(&unit.delta_sq * rat(s * s, 1)));
    }

    #[test]
    fn singleton_box_for_balanced_minimizer(f in field_strategy(), a in -8i64..=8, b in -8i64..=8) {
        let x = f.elem(a, b);
        prop_assume!(!x.is_zero());
        let bs = box_set(&f, &PrincipalIdeal::new(&f, &x).unwrap());
        for m in &bs.minimizers {
            let s = f.embeddings_f64(m);
            if (s[0].abs() - s[1].abs()).abs() < 1e-12 {
                prop_assert_eq!(bs.a.len(), 1);
            }
        }
        prop_assert!(!bs.minimizers.is_empty());
    }

    #[test]
    fn enumerated_norms_divisible(f in field_strategy(), a in -6i64..=6, b in -6i64..=6, r1 in 1i64..=40, r2 in 1i64..=40) {
        let x = f.elem(a, b);
        prop_assume!(!x.is_zero());
        let ideal = PrincipalIdeal::new(&f, &x).unwrap();
        let nid = ideal.norm().to_integer();
        let pts = enumerate_box(&f, &ideal, &[rat(r1, 1), rat(r2, 1)], 1_000_000).unwrap();
        for p in &pts {
            prop_assert!((p.abs_norm.to_integer() % &nid).is_positive() == false);
            prop_assert!(p.sigma[0].abs() <= r1 as f64 + 1e-9 && p.sigma[1].abs() <= r2 as f64 + 1e-9);
            prop_assert!(ideal.contains(&f, &p.s));
        }
    }

    #[test]
    fn kloosterman_symmetry_and_translation(
        f in prop_oneof![Just(2i64), Just(5), Just(13)].prop_map(quad),
        ca in 1i64..=6, cb in -3i64..=3,
        a in -4i64..=4, b in -4i64..=4, c in -4i64..=4, d in -4i64..=4,
        ta in -3i64..=3, tb in -3i64..=3,
        na in 1i64..=3, nb in -1i64..=1,
    ) {
        let cc = f.elem(ca, cb);
        prop_assume!(f.abs_norm(&cc).to_integer().to_u64().map_or(false, |v| (2..=100).contains(&v)));
        let dinv = f.inv(f.different_generator()).unwrap();
        let m1 = f.mul(&dinv, &f.elem(a, b));
        let m2 = f.mul(&dinv, &f.elem(c, d));
        let n = f.elem(na, nb);
        prop_assume!(!n.is_zero());
        let s = global_kloosterman(&f, &m1, &m2, &n, &cc, DEFAULT_PAIR_BUDGET).unwrap();
        let swapped = global_kloosterman(&f, &m2, &m1, &n, &cc, DEFAULT_PAIR_BUDGET).unwrap();
        prop_assert!(s.eq_exact(&swapped));
        let t = f.mul(&dinv, &f.elem(ta, tb));
        let shifted = &m1 + &f.mul(&cc, &t);
        let moved = global_kloosterman(&f, &shifted, &m2, &n, &cc, DEFAULT_PAIR_BUDGET).unwrap();
        prop_assert!(s.eq_exact(&moved));
        let bound = rat_to_f64(&(f.abs_norm(&n) * f.abs_norm(&cc)));
        prop_assert!(s.approx.norm() <= bound + s.err);
    }

    #[test]
    fn bessel_recurrence_residual(a in 1u32..=2000, x in 0.1f64..3000.0) {
        // compare in units of the largest term so deep-tunnelling values do not underflow
        let v: Vec<_> = [a - 1, a, a + 1].iter().map(|&n| bessel_j(&BesselRequest::new(n, x)).unwrap()).collect();
        let top = v.iter().map(|b| b.ln_abs).fold(f64::NEG_INFINITY, f64::max);
        let [jm, j0, jp] = [0, 1, 2].map(|i| v[i].sign as f64 * (v[i].ln_abs - top).exp());
        prop_assert!((jm + jp - 2.0 * a as f64 / x * j0).abs() <= 1e-8, "a={} x={}", a, x);
    }

    #[test]
    fn chebyshev_trigonometric(l in 0u32..=200, t in 0.01f64..3.13) {
        let want = ((l + 1) as f64 * t).sin() / t.sin();
        prop_assert!((chebyshev_u(l, 2.0 * t.cos()) - want).abs() <= 1e-10 * want.abs().max(1.0));
    }

    #[test]
    fn discrepancy_bounds(atoms in prop::collection::vec((-2.0f64..=2.0, 0.0f64..1.0), 1..40)) {
        prop_assume!(atoms.iter().map(|a| a.1).sum::<f64>() > 1e-6);
        let nu = DiscreteMeasure::new(atoms).unwrap().normalized().unwrap();
        let dd = discrepancy(&nu, Reference::SatoTate);
        let heaviest = nu.atoms.iter().map(|a| a.1).fold(0.0, f64::max);
        prop_assert!(dd <= 1.0 + 1e-12);
        prop_assert!(dd >= heaviest - 1e-12);
        // any single half-line is dominated
        for &(x, _) in &nu.atoms {
            let below: f64 = nu.atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum();
            prop_assert!((below - sato_tate_cdf(x)).abs() <= dd + 1e-12);
        }
    }
}
