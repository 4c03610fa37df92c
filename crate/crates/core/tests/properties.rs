use proptest::prelude::*;

use ncup_core::harness::checks::{check_donoho_stark, check_hausdorff_young, check_young};
use ncup_core::harness::sampling::{sample_element, sample_seed, stream_seed, ElementClass};
use ncup_core::harness::{default_hausdorff_young_grid, default_young_grid, Exponent};
use ncup_core::{AlgebraElement, Side, TwoBoxPair, C64};

const MODELS: [&str; 6] =
    ["group:cyclic:5", "group:symmetric:3", "group:dihedral:4", "spin:3", "fixedpoint:cyclic:3-regular", "fixedpoint:trivial:2"];

fn pair(i: usize) -> TwoBoxPair {
    TwoBoxPair::from_spec(MODELS[i % MODELS.len()]).unwrap()
}

fn side(b: bool) -> Side {
    if b {
        Side::Plus
    } else {
        Side::Minus
    }
}

/// An element built from raw proptest coordinates, independent of the sampler.
fn from_coords(p: &TwoBoxPair, s: Side, raw: &[(f64, f64)]) -> AlgebraElement {
    let alg = p.algebra(s);
    let coords: Vec<C64> = (0..alg.coord_dim()).map(|k| { let (a, b) = raw[k % raw.len()]; C64::new(a + k as f64 * 0.01, b) }).collect();
    AlgebraElement::from_coords(alg, &coords).unwrap()
}

fn coords() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plancherel(m in 0usize..6, s in any::<bool>(), raw in coords()) {
        let p = pair(m);
        let x = from_coords(&p, side(s), &raw);
        let n = x.norm2();
        prop_assert!((p.fourier(&x).unwrap().norm2() - n).abs() <= 1e-10 * n.max(1e-300));
    }

    #[test]
    fn fourier_has_period_four(m in 0usize..6, s in any::<bool>(), raw in coords()) {
        let p = pair(m);
        let x = from_coords(&p, side(s), &raw);
        let mut y = x.clone();
        for _ in 0..4 {
            y = p.fourier(&y).unwrap();
        }
        prop_assert!(y.relative_distance(&x).unwrap() < 1e-10);
        let inv = p.fourier_inv(&p.fourier(&x).unwrap()).unwrap();
        prop_assert!(inv.relative_distance(&x).unwrap() < 1e-10);
    }

    #[test]
    fn fourier_commutes_with_adjoint_through_inverse(m in 0usize..6, s in any::<bool>(), raw in coords()) {
        let p = pair(m);
        let x = from_coords(&p, side(s), &raw);
        let lhs = p.fourier_inv(&x.adjoint()).unwrap();
        let rhs = p.fourier(&x).unwrap().adjoint();
        prop_assert!(lhs.relative_distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn coproduct_of_identity_is_bilinear(m in 0usize..6, s in any::<bool>(), a in coords(), b in coords(), t in -2.0f64..2.0) {
        let p = pair(m);
        let (x, y) = (from_coords(&p, side(s), &a), from_coords(&p, side(s), &b));
        let lhs = p.coproduct(&x.add(&y.scale_real(t)).unwrap(), &x).unwrap();
        let rhs = p.coproduct(&x, &x).unwrap().add(&p.coproduct(&y, &x).unwrap().scale_real(t)).unwrap();
        let scale = lhs.frobenius().max(rhs.frobenius()).max(1e-300);
        prop_assert!(lhs.sub(&rhs).unwrap().frobenius() <= 1e-10 * scale);
    }

    #[test]
    fn inequalities_hold_on_arbitrary_elements(m in 0usize..6, s in any::<bool>(), a in coords(), b in coords()) {
        let p = pair(m);
        let (x, y) = (from_coords(&p, side(s), &a), from_coords(&p, side(s), &b));
        for v in check_hausdorff_young(&p, &x, &default_hausdorff_young_grid()).unwrap() {
            prop_assert!(v.margin >= -1e-9, "{v:?}");
        }
        for v in check_young(&p, &x, &y, &default_young_grid()).unwrap() {
            prop_assert!(v.margin >= -1e-9 * v.rhs.max(1.0), "{v:?}");
        }
        let d = check_donoho_stark(&p, &x).unwrap();
        prop_assert!(d.margin >= -1e-6, "{d:?}");
    }

    #[test]
    fn sampling_is_deterministic(m in 0usize..6, s in any::<bool>(), seed in any::<u64>(), i in 0u64..1000) {
        let p = pair(m);
        let a = sample_element(&p, side(s), ElementClass::Generic, seed, i);
        let b = sample_element(&p, side(s), ElementClass::Generic, seed, i);
        prop_assert_eq!(a.coords(), b.coords());
        let c = sample_element(&p, side(s), ElementClass::Generic, seed, i + 1);
        prop_assert_ne!(a.coords(), c.coords());
    }

    #[test]
    fn seeds_separate_streams_and_indices(master in any::<u64>(), i in 0u64..10_000) {
        let a = stream_seed(master, "group:cyclic:6/plancherel");
        let b = stream_seed(master, "group:cyclic:6/young");
        prop_assert_ne!(a, b);
        prop_assert_ne!(sample_seed(a, i), sample_seed(a, i + 1));
    }

    #[test]
    fn exponent_round_trips(v in 1.0f64..1e6) {
        let e = Exponent::new(v).unwrap();
        let back: Exponent = e.to_string().parse().unwrap();
        prop_assert_eq!(back, e);
        let json = serde_json::to_string(&e).unwrap();
        prop_assert_eq!(serde_json::from_str::<Exponent>(&json).unwrap(), e);
    }

    #[test]
    fn element_literals_round_trip(m in 0usize..6, s in any::<bool>(), raw in coords()) {
        let p = pair(m);
        let x = from_coords(&p, side(s), &raw);
        let lit = p.to_literal(&x).unwrap();
        let text = serde_json::to_string(&lit).unwrap();
        let y = p.from_literal(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(x.coords(), y.coords());
    }
}

#[test]
fn exponent_infinity_round_trips() {
    let e: Exponent = "inf".parse().unwrap();
    assert_eq!(e, Exponent::INF);
    assert_eq!(serde_json::to_string(&e).unwrap(), "\"inf\"");
}
