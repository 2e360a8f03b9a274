use paradiff::field::{FieldError, FieldSpec, RatFun};
use proptest::prelude::*;
use testkit::{nonzero_ratfun, poly, ratfun, rng};

fn xyt() -> FieldSpec {
    FieldSpec::new(&["x", "y", "t"]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn add_sub_roundtrip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (ratfun(&mut r, 3), ratfun(&mut r, 3));
        prop_assert_eq!(a.add(&b).sub(&b), a);
    }

    #[test]
    fn inverse_cancels(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = nonzero_ratfun(&mut r, 3);
        prop_assert!(a.mul(&a.inv().unwrap()).is_one());
    }

    #[test]
    fn normal_form_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = ratfun(&mut r, 3);
        let again = RatFun::new(a.numer().clone(), a.denom().clone()).unwrap();
        prop_assert_eq!(&again, &a);
        // canonical text parses back to the same value
        let f = xyt();
        prop_assert_eq!(f.parse(&f.render(&a)).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn leibniz(seed in any::<u64>(), v in 0usize..3) {
        let mut r = rng(seed);
        let (a, b) = (ratfun(&mut r, 3), ratfun(&mut r, 3));
        let lhs = a.mul(&b).partial(v);
        let rhs = a.mul(&b.partial(v)).add(&b.mul(&a.partial(v)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn partials_commute(seed in any::<u64>(), u in 0usize..3, v in 0usize..3) {
        let mut r = rng(seed);
        let a = ratfun(&mut r, 3);
        prop_assert_eq!(a.partial(u).partial(v), a.partial(v).partial(u));
    }

    #[test]
    fn substitute_is_ring_map(seed in any::<u64>()) {
        let mut r = rng(seed);
        let images: Vec<Option<RatFun>> =
            (0..3).map(|_| Some(RatFun::from_poly(poly(&mut r, 3, 2, 2)))).collect();
        let (a, b) = (ratfun(&mut r, 3), ratfun(&mut r, 3));
        let sub = |x: &RatFun| x.substitute(&images);
        match (sub(&a), sub(&b), sub(&a.add(&b)), sub(&a.mul(&b))) {
            (Ok(sa), Ok(sb), Ok(ssum), Ok(sprod)) => {
                prop_assert_eq!(ssum, sa.add(&sb));
                prop_assert_eq!(sprod, sa.mul(&sb));
            }
            // a pole of a or b under the assignment
            _ => {}
        }
        prop_assert!(sub(&RatFun::one()).unwrap().is_one());
    }
}

#[test]
fn substitute_examples() {
    let f = FieldSpec::new(&["x", "y", "z"]).unwrap();
    let images = f
        .assignment([
            ("x", f.parse("x").unwrap()),
            ("y", f.parse("y").unwrap()),
            ("z", RatFun::zero()),
        ])
        .unwrap();
    let e = f.parse("x+z").unwrap().substitute(&images).unwrap();
    assert_eq!(f.render(&e), "(x)/(1)");
    let pole = f.parse("1/z").unwrap().substitute(&images);
    assert_eq!(pole, Err(FieldError::DenominatorVanishes));

    let g = FieldSpec::new(&["x", "t"]).unwrap();
    let sq = vec![Some(g.parse("x^2").unwrap()), Some(g.parse("t").unwrap())];
    let e = g.parse("t/x").unwrap().substitute(&sq).unwrap();
    assert_eq!(g.render(&e), "(t)/(x^2)");
}
