use std::sync::Arc;

use hilbert_eisenstein::arith::rat;
use hilbert_eisenstein::cusp_geometry::{il_class, random_borel, random_sl2, DetConstraint, GroupSpec};
use hilbert_eisenstein::cyclo::Cyclo;
use hilbert_eisenstein::eisenstein::{coefficient, EisensteinSpec};
use hilbert_eisenstein::hecke_l::rational_reconstruction;
use hilbert_eisenstein::ray_class::{narrow_class_group, ray_class_group};
use hilbert_eisenstein::{Elt, Field, Ideal};
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;
use rand::SeedableRng;

fn q10() -> Arc<Field> {
    Field::quadratic(10).unwrap()
}

fn ideal(f: &Arc<Field>, a: (i64, i64), b: (i64, i64)) -> Option<Ideal> {
    let gens: Vec<Elt> = [a, b].iter().map(|&(x, y)| Elt::from_ints(&[x, y])).filter(|e| !e.is_zero()).collect();
    if gens.is_empty() {
        return None;
    }
    Ideal::from_generators(f, &gens).ok()
}

fn pair() -> impl Strategy<Value = (i64, i64)> {
    (-9i64..=9, -9i64..=9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ideal_product_and_inverse(a in pair(), b in pair(), c in pair(), d in pair()) {
        let f = q10();
        let (Some(x), Some(y)) = (ideal(&f, a, b), ideal(&f, c, d)) else { return Ok(()) };
        prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
        prop_assert_eq!(x.mul(&x.inv()), Ideal::unit(&f));
        prop_assert_eq!(x.add(&y).mul(&x.intersect(&y)), x.mul(&y));
        prop_assert!(x.add(&y).contains_ideal(&x));
    }

    #[test]
    fn factorization_round_trips(a in pair(), b in pair()) {
        let f = q10();
        let Some(x) = ideal(&f, a, b) else { return Ok(()) };
        let back = x.factor().unwrap().iter().fold(Ideal::unit(&f), |acc, (p, e)| acc.mul(&p.pow(*e)));
        prop_assert_eq!(back, x);
    }

    #[test]
    fn roots_of_unity_multiply(a in 0i64..24, b in 0i64..24, n in 1i64..24, m in 1i64..24) {
        let x = Cyclo::root_of_unity(&rat(a, n));
        let y = Cyclo::root_of_unity(&rat(b, m));
        prop_assert_eq!(x.mul(&y), Cyclo::root_of_unity(&(rat(a, n) + rat(b, m))));
        prop_assert_eq!(x.mul(&x.conj()), Cyclo::one());
    }

    #[test]
    fn reconstruction_recovers_small_rationals(p in -10_000i64..10_000, q in 1i64..5_000) {
        let want = rat(p, q);
        let x = rug::Float::with_val(128, rug::Rational::from((p, q)));
        let got = rational_reconstruction(&x, 1e-30, &BigInt::from(10_000_000)).unwrap();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn il_class_is_invariant(seed in any::<u64>()) {
        let f = q10();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c = Ideal::parse(&f, "[2, w]").unwrap();
        let g = GroupSpec::new(Ideal::unit(&f), c.inv(), DetConstraint::One).random_element(&mut rng, 4, 2);
        let m = random_sl2(&f, &mut rng, 3, 3);
        let b = random_borel(&f, &mut rng, 3);
        prop_assert_eq!(il_class(&g.mul(&f, &m).mul(&f, &b), &c).unwrap(), il_class(&m, &c).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_are_multiplicative_over_q(m in 1i64..200, n in 1i64..200) {
        prop_assume!(m.gcd(&n) == 1);
        let q = Field::rationals();
        let id = narrow_class_group(&q).unwrap().trivial_character();
        let quad = ray_class_group(&q, &Ideal::from_int(&q, 5).unwrap()).unwrap()
            .characters().into_iter().find(|c| c.order() == 2).unwrap();
        let s = EisensteinSpec::new(id, quad, 4).unwrap();
        let c = |x: i64| coefficient(&s, &Ideal::from_int(&q, x).unwrap()).unwrap();
        prop_assert_eq!(c(m * n), c(m).mul(&c(n)));
    }
}
