use paradiff::diffstruct::{check_morphism, compose, DiffMorphism, MorphismVerdict, OmegaElement};
use paradiff::field::RatFun;
use proptest::prelude::*;
use testkit::{
    derivation, lie_by_definition, omega, poly, polynomial_map, ratfun, rng, sample_structures,
    z_quotient_morphism,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn jacobi(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (derivation(&mut r, 3), derivation(&mut r, 3), derivation(&mut r, 3));
        let sum = a.bracket(&b.bracket(&c))
            .add(&b.bracket(&c.bracket(&a)))
            .add(&c.bracket(&a.bracket(&b)));
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn bracket_matches_operator_commutator(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (derivation(&mut r, 2), derivation(&mut r, 2));
        let f = ratfun(&mut r, 2);
        let lhs = a.bracket(&b).apply(&f);
        let rhs = a.apply(&b.apply(&f)).sub(&b.apply(&a.apply(&f)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lie_derivative_evaluates_correctly(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let s = &sample_structures()[which];
        let k = (seed as usize) % s.dim();
        let w = omega(&mut r, s);
        prop_assert_eq!(s.lie_derivative(k, &w), lie_by_definition(s, k, &w));
    }

    #[test]
    fn general_lie_derivative_evaluates_correctly(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let s = &sample_structures()[which];
        let n = s.base().len();
        let coords: Vec<RatFun> = (0..s.dim()).map(|_| ratfun(&mut r, n)).collect();
        let w = omega(&mut r, s);
        let d = s.derivation(&coords);
        let expect = OmegaElement::new(
            (0..s.dim())
                .map(|j| {
                    let br = s.coordinates(&d.bracket(&s.basis()[j])).unwrap();
                    d.apply(w.get(j)).sub(&w.pair(&br))
                })
                .collect(),
        );
        prop_assert_eq!(s.lie_derivative_general(&coords, &w), expect);
    }

    #[test]
    fn lie_scaling_law(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let s = &sample_structures()[which];
        let n = s.base().len();
        let coords: Vec<RatFun> = (0..s.dim()).map(|_| ratfun(&mut r, n)).collect();
        let a = ratfun(&mut r, n);
        let w = omega(&mut r, s);
        let scaled: Vec<RatFun> = coords.iter().map(|c| c.mul(&a)).collect();
        let lhs = s.lie_derivative_general(&scaled, &w);
        let rhs = s
            .lie_derivative_general(&coords, &w)
            .scale(&a)
            .add(&s.d0(&a).scale(&w.pair(&coords)));
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let s = &sample_structures()[which];
        let a = ratfun(&mut r, s.base().len());
        prop_assert!(s.d1(&s.d0(&a)).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn composition_of_morphisms_is_a_morphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let xy = &sample_structures()[0];
        let (phi, psi) = (polynomial_map(&mut r, xy), polynomial_map(&mut r, xy));
        prop_assert!(check_morphism(&phi).unwrap().is_ok());
        prop_assert!(check_morphism(&psi).unwrap().is_ok());
        prop_assert!(check_morphism(&compose(&phi, &psi).unwrap()).unwrap().is_ok());

        // through the z-quotient with an exact 1-form f dx + g dy
        let h = RatFun::from_poly(poly(&mut r, 2, 3, 3));
        let q = z_quotient_morphism(&h.partial(0), &h.partial(1));
        prop_assert!(check_morphism(&q).unwrap().is_ok());
        prop_assert!(check_morphism(&q.then(&phi).unwrap()).unwrap().is_ok());
    }

    #[test]
    fn z_quotient_integrable_iff_closed(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = RatFun::from_poly(poly(&mut r, 2, 3, 3));
        let g = RatFun::from_poly(poly(&mut r, 2, 3, 3));
        let closed = f.partial(1) == g.partial(0);
        let verdict = check_morphism(&z_quotient_morphism(&f, &g)).unwrap();
        prop_assert_eq!(verdict.is_ok(), closed);
        if let MorphismVerdict::IntegrabilityFail { form, witness } = verdict {
            prop_assert_eq!(form, 2);
            prop_assert_eq!(witness.get(0, 1), g.partial(0).sub(&f.partial(1)));
        }
    }
}

#[test]
fn identity_morphisms_are_ok() {
    for s in sample_structures() {
        assert_eq!(
            check_morphism(&DiffMorphism::identity(&s)).unwrap(),
            MorphismVerdict::Ok
        );
    }
}

#[test]
fn z_quotient_examples() {
    let (x, y) = (RatFun::var(0), RatFun::var(1));
    assert!(check_morphism(&z_quotient_morphism(&y, &x))
        .unwrap()
        .is_ok());
    match check_morphism(&z_quotient_morphism(&y, &RatFun::zero())).unwrap() {
        MorphismVerdict::IntegrabilityFail { form, witness } => {
            assert_eq!(form, 2);
            assert_eq!(witness.get(0, 1), RatFun::from_int(-1));
        }
        other => panic!("expected an integrability failure, got {other:?}"),
    }
}
