//! Sequence and twisted-series behavior: shift/product laws on the named
//! sequences, the twisted product and its operators, inversion, and the
//! seeded property sweeps.

use qpv::linalg::Mat;
use qpv::rng;
use qpv::scalars::{q_binomial, q_integer, Scalar, ScalarField};
use qpv::seq::{CFiniteSeq, SeqMat, TwistedSeries, DEFAULT_TRUNCATION};
use rand::Rng;
use serde_json::json;

fn rat_field() -> ScalarField {
    ScalarField::rationals_i64(5, 3).unwrap()
}

fn sym_field() -> ScalarField {
    ScalarField::rational_functions()
}

fn random_seq(field: &ScalarField, rng: &mut rand_chacha::ChaCha8Rng) -> CFiniteSeq {
    let order = rng.gen_range(1..=2usize);
    let mut rec = Vec::with_capacity(order + 1);
    for i in 0..=order {
        if i == 0 || i == order {
            let mut n = 0;
            let mut d = 1;
            while n == 0 {
                let (a, b) = rng::small_ratio(rng, 3, 2);
                n = a;
                d = b;
            }
            rec.push(field.ratio(n, d));
        } else {
            let (n, d) = rng::small_ratio(rng, 3, 2);
            rec.push(field.ratio(n, d));
        }
    }
    let window: Vec<Scalar> = (0..order)
        .map(|_| {
            let (n, d) = rng::small_ratio(rng, 4, 3);
            field.ratio(n, d)
        })
        .collect();
    CFiniteSeq::new(field, rec, 0, window).unwrap()
}

fn random_series(
    field: &ScalarField,
    rng: &mut rand_chacha::ChaCha8Rng,
    d: usize,
) -> TwistedSeries<CFiniteSeq> {
    TwistedSeries::new((0..=d).map(|_| random_seq(field, rng)).collect())
}

fn one_seq(field: &ScalarField) -> CFiniteSeq {
    CFiniteSeq::constant(field, &field.one())
}

#[test]
fn shift_laws_on_named_sequences() {
    for field in [rat_field(), sym_field()] {
        let q = field.q();
        let big_q = CFiniteSeq::q_power(&field);
        assert_eq!(big_q.shift(), big_q.scale(&q));

        let c = CFiniteSeq::constant(&field, &field.ratio(7, 2));
        assert_eq!(c.shift(), c);

        let z = CFiniteSeq::integers(&field);
        assert_eq!(z.shift(), z.add(&one_seq(&field)));
    }
}

#[test]
fn pointwise_products() {
    let field = sym_field();
    let q = field.q();
    let big_q = CFiniteSeq::q_power(&field);

    let qq = big_q.hadamard(&big_q);
    let q2 = &q * &q;
    assert_eq!(qq, CFiniteSeq::geometric(&field, &q2, &field.one()).unwrap());
    assert_eq!(qq.order(), 1);

    let z = CFiniteSeq::integers(&field);
    assert_eq!(z.hadamard(&one_seq(&field)), z);

    // n * q^n at n = -1, 0, 1, 2.
    let zq = z.hadamard(&big_q);
    let q_inv = field.inv(&q).unwrap();
    assert_eq!(zq.eval(-1), -&q_inv);
    assert_eq!(zq.eval(0), field.zero());
    assert_eq!(zq.eval(1), q);
    assert_eq!(zq.eval(2), &field.from_i64(2) * &q2);
}

#[test]
fn shift_operator_on_series() {
    let field = sym_field();
    let q = field.q();
    let big_q = CFiniteSeq::q_power(&field);
    let zero = CFiniteSeq::zero(&field);

    // X*Q picks up one twist power and one shift: q * (q Q) = q^2 Q.
    let xq = TwistedSeries::new(vec![zero.clone(), big_q.clone(), zero.clone(), zero.clone()]);
    let expect = TwistedSeries::new(vec![
        zero.clone(),
        big_q.scale(&(&q * &q)),
        zero.clone(),
        zero.clone(),
    ]);
    assert_eq!(xq.hat_sigma(), expect);

    let one = TwistedSeries::one(&zero, 3);
    assert_eq!(one.hat_sigma(), one);
}

#[test]
fn shift_operator_matches_matrix_action_on_a_fundamental_solution() {
    // For the 2-dimensional module with diagonal shift action and nilpotent
    // divided-power action, the series Y = [[Q, X], [0, 1]] satisfies both
    // defining identities; checked here directly at the series level.
    let field = sym_field();
    let q = field.q();
    let a = Mat::from_rows(vec![
        vec![q.clone(), field.zero()],
        vec![field.zero(), field.one()],
    ]);
    let b = Mat::from_rows(vec![
        vec![field.zero(), field.one()],
        vec![field.zero(), field.zero()],
    ]);
    let d = 4;
    let c0 = SeqMat::from_fn(
        2,
        2,
        |i, j| match (i, j) {
            (0, 0) => CFiniteSeq::q_power(&field),
            (1, 1) => one_seq(&field),
            _ => CFiniteSeq::zero(&field),
        },
        &field,
    );
    let mut coeffs = vec![c0, SeqMat::constant(&b, &field)];
    coeffs.resize(d + 1, SeqMat::zero(2, 2, &field));
    let y = TwistedSeries::new(coeffs);

    let a_series = TwistedSeries::constant(SeqMat::constant(&a, &field), d);
    assert_eq!(y.hat_sigma(), a_series.mul(&y));

    let b_series = TwistedSeries::constant(SeqMat::constant(&b, &field), d);
    assert_eq!(y.hat_theta(1).unwrap(), b_series.mul(&y).truncate(d - 1));
}

#[test]
fn divided_power_operator_basics() {
    let field = sym_field();
    let zero = CFiniteSeq::zero(&field);
    let d = 5;

    let x = TwistedSeries::variable(&zero, d);
    let tx = x.hat_theta(1).unwrap();
    assert_eq!(tx, TwistedSeries::one(&zero, d - 1));

    let c = TwistedSeries::constant(CFiniteSeq::integers(&field), d);
    for l in 1..=3 {
        let t = c.hat_theta(l).unwrap();
        assert!(t.is_zero());
        assert_eq!(t.truncation(), d - l);
    }

    // Applying the first-order operator twice is [2]_q times the second.
    let mut gen = rng::seeded(0, "seq-theta-compose");
    for _ in 0..10 {
        let s = random_series(&field, &mut gen, d);
        let twice = s.hat_theta(1).unwrap().hat_theta(1).unwrap();
        let second = s.hat_theta(2).unwrap().scale(&q_integer(2, &field));
        assert_eq!(twice, second);
    }

    // Asking for more derivatives than the truncation holds is an error.
    assert!(x.hat_theta(d + 1).is_err());
}

#[test]
fn twisted_product_commutation() {
    let field = sym_field();
    let q = field.q();
    let big_q = CFiniteSeq::q_power(&field);
    let d = 4;

    // Q*X = q*X*Q.
    let q_series = TwistedSeries::constant(big_q.clone(), d);
    let x = TwistedSeries::variable(&big_q, d);
    let left = q_series.mul(&x);
    let right = x.mul(&q_series).scale(&q);
    assert_eq!(left, right);

    let mut gen = rng::seeded(0, "seq-mul-unit");
    for _ in 0..10 {
        let s = random_series(&field, &mut gen, d);
        let one = TwistedSeries::one(s.coeff(0), d);
        assert_eq!(one.mul(&s), s);
        assert_eq!(s.mul(&one), s);
    }
}

#[test]
fn geometric_inverse_of_one_minus_x() {
    let field = rat_field();
    let zero = CFiniteSeq::zero(&field);
    let d = DEFAULT_TRUNCATION;
    let one = TwistedSeries::one(&zero, d);
    let x = TwistedSeries::variable(&zero, d);
    let s = one.sub(&x);
    let inv = s.try_invert().unwrap();
    let all_ones = TwistedSeries::new(vec![one_seq(&field); d + 1]);
    assert_eq!(inv, all_ones);
}

#[test]
fn series_inverses_are_two_sided() {
    let field = rat_field();
    let d = 4;
    let mut gen = rng::seeded(0, "seq-invert");
    for round in 0..8 {
        // Invertible constant term: a nonzero geometric sequence.
        let mut num = 0;
        let mut den = 1;
        while num == 0 {
            let (a, b) = rng::small_ratio(&mut gen, 3, 2);
            num = a;
            den = b;
        }
        let ratio = field.ratio(num, den);
        let init = field.ratio(round + 1, 2);
        let a0 = CFiniteSeq::geometric(&field, &ratio, &init).unwrap();
        let mut coeffs = vec![a0];
        for _ in 0..d {
            coeffs.push(random_seq(&field, &mut gen));
        }
        let s = TwistedSeries::new(coeffs);
        let inv = s.try_invert().unwrap();
        let one = TwistedSeries::one(s.coeff(0), d);
        assert_eq!(s.mul(&inv), one);
        assert_eq!(inv.mul(&s), one);
    }

    // A constant term with a zero value is rejected.
    let z = CFiniteSeq::integers(&field);
    let bad = TwistedSeries::constant(z, d);
    assert!(bad.try_invert().is_err());
}

#[test]
fn shift_respects_products_as_an_automorphism() {
    let field = rat_field();
    let d = 4;
    let mut gen = rng::seeded(0, "seq-automorphism");
    for _ in 0..12 {
        let s1 = random_series(&field, &mut gen, d);
        let s2 = random_series(&field, &mut gen, d);
        assert_eq!(
            s1.mul(&s2).hat_sigma(),
            s1.hat_sigma().mul(&s2.hat_sigma())
        );
    }
}

#[test]
fn twisted_leibniz_rule() {
    let field = rat_field();
    let d = 4;
    let mut gen = rng::seeded(0, "seq-leibniz");
    for _ in 0..12 {
        let s1 = random_series(&field, &mut gen, d);
        let s2 = random_series(&field, &mut gen, d);
        let lhs = s1.mul(&s2).hat_theta(1).unwrap();
        let rhs = s1
            .hat_sigma()
            .mul(&s2.hat_theta(1).unwrap())
            .add(&s1.hat_theta(1).unwrap().mul(&s2));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn shift_and_divided_power_operators_commute_up_to_q_power() {
    let field = rat_field();
    let d = 5;
    let mut gen = rng::seeded(0, "seq-commutation");
    for _ in 0..8 {
        let s = random_series(&field, &mut gen, d);
        for i in 1..=3usize {
            let lhs = s.hat_sigma().hat_theta(i).unwrap();
            let rhs = s
                .hat_theta(i)
                .unwrap()
                .hat_sigma()
                .scale(&field.q_pow(i as i64));
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn equality_decision_agrees_with_brute_force() {
    let field = rat_field();
    let mut gen = rng::seeded(0, "seq-equality");
    let brute = |a: &CFiniteSeq, b: &CFiniteSeq| {
        a.window_values(-25, 50) == b.window_values(-25, 50)
    };
    for round in 0..30 {
        let a = random_seq(&field, &mut gen);
        let b = match round % 5 {
            // Disguised copies of a.
            0 => a.shift_by(7).shift_by(-7),
            1 => a.reverse().reverse(),
            2 => a.add(&CFiniteSeq::zero(&field)),
            3 => {
                // Same sequence through an inflated recurrence: multiply the
                // characteristic polynomial by (x - 1) and extend the window.
                let rec = a.recurrence();
                let mut inflated = vec![-&rec[0]];
                for i in 1..rec.len() {
                    inflated.push(&rec[i - 1] - &rec[i]);
                }
                inflated.push(rec[rec.len() - 1].clone());
                let r = inflated.len() - 1;
                CFiniteSeq::new(&field, inflated, 0, a.window_values(0, r)).unwrap()
            }
            _ => random_seq(&field, &mut gen),
        };
        assert_eq!(a == b, brute(&a, &b), "disagreement on round {round}");
    }

    // A near-miss pair: same first two values, different growth.
    let z = CFiniteSeq::integers(&field).shift(); // 1, 2, 3, ...
    let g = CFiniteSeq::geometric(&field, &field.from_i64(2), &field.one()).unwrap(); // 1, 2, 4, ...
    assert_eq!(z.eval(0), g.eval(0));
    assert_eq!(z.eval(1), g.eval(1));
    assert!(z != g);
    assert!(!brute(&z, &g));
}

#[test]
fn sequence_literals_round_trip() {
    let field = rat_field();

    let z = CFiniteSeq::from_json(
        &field,
        &json!({"recurrence": [1, -2, 1], "window": {"0": 0, "1": 1}}),
    )
    .unwrap();
    assert_eq!(z, CFiniteSeq::integers(&field));

    let q_seq = CFiniteSeq::from_json(
        &field,
        &json!({"recurrence": ["-q", "1"], "window": {"0": "1"}}),
    )
    .unwrap();
    assert_eq!(q_seq, CFiniteSeq::q_power(&field));

    // Windows may sit anywhere, e.g. centered at a negative position.
    let f = CFiniteSeq::from_json(
        &field,
        &json!({"recurrence": [-1, -1, 1], "window": {"-1": "1", "0": "0"}}),
    )
    .unwrap();
    assert_eq!(f.eval(-1), field.one());
    assert_eq!(f.eval(5), field.from_i64(5));

    let mut gen = rng::seeded(0, "seq-json");
    for _ in 0..10 {
        let a = random_seq(&field, &mut gen);
        let back = CFiniteSeq::from_json(&field, &a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    // Symbolic fields round-trip through their own scalar syntax.
    let sym = sym_field();
    let qs = CFiniteSeq::q_power(&sym);
    assert_eq!(CFiniteSeq::from_json(&sym, &qs.to_json()).unwrap(), qs);
}

#[test]
fn malformed_sequence_literals_are_rejected() {
    let field = rat_field();
    let cases = [
        json!({"recurrence": [1, -2, 1], "window": {"0": 0}}),
        json!({"recurrence": [1, -2, 1], "window": {"0": 0, "2": 1}}),
        json!({"recurrence": [0, 1], "window": {"0": 1}}),
        json!({"recurrence": [1, 0], "window": {"0": 1}}),
        json!({"recurrence": [1.5, 1], "window": {"0": 1}}),
        json!({"recurrence": ["nope", "1"], "window": {"0": 1}}),
        json!({"recurrence": [], "window": {}}),
        json!({"window": {"0": 1}}),
        json!([1, 2, 3]),
    ];
    for c in &cases {
        assert!(CFiniteSeq::from_json(&field, c).is_err(), "accepted {c}");
    }
}

#[test]
fn truncation_bookkeeping() {
    let field = rat_field();
    let zero = CFiniteSeq::zero(&field);
    let s = TwistedSeries::one(&zero, 6);
    let t = TwistedSeries::one(&zero, 4);
    assert_eq!(s.mul(&t).truncation(), 4);
    assert_eq!(s.add(&t).truncation(), 4);
    assert_eq!(s.hat_theta(2).unwrap().truncation(), 4);
    assert_eq!(s.hat_sigma().truncation(), 6);
    assert_eq!(s.try_invert().unwrap().truncation(), 6);
}

#[test]
fn binomial_coefficients_surface_in_divided_powers() {
    // The divided-power operator scales coefficients by polynomial binomials
    // evaluated in the field, and stays well defined at a root of unity
    // where the naive factorial quotient would divide by zero.
    let field = ScalarField::cyclotomic(3).unwrap();
    let zero = CFiniteSeq::zero(&field);
    let d = 6;
    let x = TwistedSeries::variable(&zero, d);
    let mut x4 = TwistedSeries::one(&zero, d);
    for _ in 0..4 {
        x4 = x4.mul(&x);
    }
    let t = x4.hat_theta(3).unwrap();
    let expect = q_binomial(4, 3, &field);
    assert_eq!(t.coeff(1), &one_seq(&field).scale(&expect));
    assert!(t.coeff(0).is_zero());
}
