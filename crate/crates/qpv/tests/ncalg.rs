//! Rewriting, confluence, morphisms and presentation files, checked against
//! hand-computed normal forms.

use qpv::ncalg::{
    parse_element, presentation_from_json, tensor_element, tensor_product, GenMap, NCElement,
    Presentation, PresentationBuilder, Word,
};
use qpv::rng::seeded;
use qpv::scalars::ScalarField;
use rand::Rng;
use std::sync::Arc;

fn ghq() -> Arc<Presentation> {
    // C⟨u, u^-1, v⟩ with uv = q·vu
    let f = ScalarField::rational_functions();
    let mut b = PresentationBuilder::new(f.clone());
    let (u, ui) = b.gen_with_inverse("u");
    let v = b.gen("v");
    b.swap_rule(v, u, f.q().inv_in(&f).unwrap()).unwrap();
    b.swap_rule(v, ui, f.q()).unwrap();
    b.build().unwrap()
}

fn r_algebra() -> Arc<Presentation> {
    // C⟨Q, Q^-1, t⟩ with Q·t = q·t·Q as a ring equality, i.e. the rewrite
    // t·Q -> q^-1·Q·t.
    let f = ScalarField::rational_functions();
    let mut b = PresentationBuilder::new(f.clone());
    let (q_gen, qi) = b.gen_with_inverse("Q");
    let t = b.gen("t");
    b.swap_rule(t, q_gen, f.q().inv_in(&f).unwrap()).unwrap();
    b.swap_rule(t, qi, f.q()).unwrap();
    b.build().unwrap()
}

#[test]
fn ghq_commutation() {
    let p = ghq();
    // vu normalizes to q^-1 uv
    let vu = parse_element("v*u", &p).unwrap();
    let expected = parse_element("q^-1*u*v", &p).unwrap();
    assert_eq!(vu, expected);
    // u u^-1 -> 1
    let unit = parse_element("u*u^-1", &p).unwrap();
    assert_eq!(unit, NCElement::one(&p));
}

#[test]
fn hq_style_reordering() {
    let f = ScalarField::rational_functions();
    let mut b = PresentationBuilder::new(f.clone());
    let (s, si) = b.gen_with_inverse("s");
    let t = b.gen("t");
    b.swap_rule(t, s, f.q()).unwrap();
    b.swap_rule(t, si, f.q().inv_in(&f).unwrap()).unwrap();
    let p = b.build().unwrap();
    // t s t s = q^3 s^2 t^2: first swap gives q·s t t s, the inner ts gives
    // another q, and moving the last s left across two t's gives q^2 more...
    // hand count: tsts -> q s(tt)s -> q s t (ts) -> q^2 s t s t -> q^3 s s t t.
    let e = parse_element("t*s*t*s", &p).unwrap();
    let expect = parse_element("q^3*s^2*t^2", &p).unwrap();
    assert_eq!(e, expect);
}

#[test]
fn ring_equality_in_r() {
    let p = r_algebra();
    // Q·t and q·(t·Q) are the same element of R.
    let lhs = parse_element("Q*t", &p).unwrap();
    let rhs = parse_element("q*(t*Q)", &p).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn normal_form_idempotent_and_linear() {
    let p = ghq();
    let x = parse_element("v*u + 3*u - q*v*v*u^-1", &p).unwrap();
    // Re-normalizing the stored terms changes nothing.
    let again = NCElement::from_terms(&p, x.terms.clone()).unwrap();
    assert_eq!(x, again);
    // Linearity: nf(a + b) = nf(a) + nf(b) on raw words.
    let a_raw = vec![(Word(vec![2, 0]), p.field.one())];
    let b_raw = vec![(Word(vec![2, 1]), p.field.q())];
    let sum = NCElement::from_terms(&p, a_raw.iter().cloned().chain(b_raw.iter().cloned()))
        .unwrap();
    let separate = NCElement::from_terms(&p, a_raw)
        .unwrap()
        .add(&NCElement::from_terms(&p, b_raw).unwrap());
    assert_eq!(sum, separate);
}

#[test]
fn associativity_on_seeded_triples() {
    let p = ghq();
    let mut rng = seeded(0, "ncalg-assoc");
    let gens = p.gens.len() as u32;
    for _ in 0..60 {
        let mut sample = || {
            let terms: Vec<(Word, _)> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let len = rng.gen_range(0..=3);
                    let w: Vec<u32> = (0..len).map(|_| rng.gen_range(0..gens)).collect();
                    let c = p.field.ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
                    (Word(w), c)
                })
                .collect();
            NCElement::from_terms(&p, terms).unwrap()
        };
        let (x, y, z) = (sample(), sample(), sample());
        let left = x.mul(&y).unwrap().mul(&z).unwrap();
        let right = x.mul(&y.mul(&z).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}

#[test]
fn confluence_reports() {
    // A clean q-commutation system passes at bound 3.
    let p = ghq();
    let rep = p.check_local_confluence(3).unwrap();
    assert!(rep.confluent());
    assert!(rep.checked_words > 0);

    // Two contradictory rules for the same pair are flagged.
    let f = ScalarField::rational_functions();
    let mut b = PresentationBuilder::new(f.clone());
    let s = b.gen("s");
    let t = b.gen("t");
    b.rule(t, s, vec![(Word(vec![s, t]), f.one())]).unwrap();
    b.rule(t, s, vec![(Word(vec![s, t]), f.q())]).unwrap();
    let broken = b.build_unchecked();
    let rep = broken.check_local_confluence(3).unwrap();
    assert!(!rep.confluent());
    assert!(!rep.failures.is_empty());
}

#[test]
fn coaction_morphism_into_tensor_product() {
    // Q -> Q⊗u, t -> t⊗1 + Q⊗v is an algebra morphism R -> R⊗GH_q.
    let r = r_algebra();
    let g = ghq();
    let target = tensor_product(&[&r, &g]).unwrap();
    let qe = parse_element("Q", &r).unwrap();
    let qi = parse_element("Q^-1", &r).unwrap();
    let te = parse_element("t", &r).unwrap();
    let u = parse_element("u", &g).unwrap();
    let ui = parse_element("u^-1", &g).unwrap();
    let v = parse_element("v", &g).unwrap();
    let one_g = NCElement::one(&g);
    let images = vec![
        tensor_element(&target, &[&qe, &u]).unwrap(),
        tensor_element(&target, &[&qi, &ui]).unwrap(),
        tensor_element(&target, &[&te, &one_g]).unwrap()
            .add(&tensor_element(&target, &[&qe, &v]).unwrap()),
    ];
    let rho = GenMap::new(&r, &target, images).unwrap();
    let report = rho.check_morphism().unwrap();
    assert!(report.ok(), "{:?}", report.violations);

    // The scalar-point evaluation Q -> 1, t -> 0 is also a morphism.
    let eval = GenMap::new(
        &r,
        &r,
        vec![
            NCElement::one(&r),
            NCElement::one(&r),
            NCElement::zero(&r),
        ],
    )
    .unwrap();
    assert!(eval.check_morphism().unwrap().ok());

    // Q -> Q, t -> Q breaks the commutation (QQ = qQQ fails for q != 1).
    let bad = GenMap::new(
        &r,
        &r,
        vec![
            parse_element("Q", &r).unwrap(),
            parse_element("Q^-1", &r).unwrap(),
            parse_element("Q", &r).unwrap(),
        ],
    )
    .unwrap();
    assert!(!bad.check_morphism().unwrap().ok());

    // Any map into a commutative image with q != 1 and both images
    // invertible must fail: take Q -> Q, t -> Q^-1.
    let bad2 = GenMap::new(
        &r,
        &r,
        vec![
            parse_element("Q", &r).unwrap(),
            parse_element("Q^-1", &r).unwrap(),
            parse_element("Q^-1", &r).unwrap(),
        ],
    )
    .unwrap();
    assert!(!bad2.check_morphism().unwrap().ok());
}

#[test]
fn presentation_json_round_trip() {
    let text = r#"{
        "field": "indeterminate",
        "generators": ["s", "t"],
        "inverses": {"s": "s^-1"},
        "rules": [
            {"lhs": "ts", "rhs": "q*st"},
            {"lhs": "t*s^-1", "rhs": "q^-1*s^-1*t"}
        ]
    }"#;
    let p = presentation_from_json(text).unwrap();
    assert_eq!(p.gens.len(), 3);
    let e = parse_element("t*s", &p).unwrap();
    let expect = parse_element("q*s*t", &p).unwrap();
    assert_eq!(e, expect);

    // Power rules (a Taft-style truncation).
    let taft = r#"{
        "field": "root_of_unity:2",
        "generators": ["s", "t"],
        "rules": [{"lhs": "ts", "rhs": "q*st"}],
        "power_rules": [
            {"gen": "s", "exponent": 2, "rhs": "1"},
            {"gen": "t", "exponent": 2, "rhs": "0"}
        ]
    }"#;
    let p2 = presentation_from_json(taft).unwrap();
    let sq = parse_element("s^2", &p2).unwrap();
    assert_eq!(sq, NCElement::one(&p2));
    let dim: usize = (0..=2).map(|d| p2.normal_monomials_of_degree(d).len()).sum();
    assert_eq!(dim, 4);

    // Non-confluent input is rejected at load time.
    let broken = r#"{
        "generators": ["s", "t"],
        "rules": [
            {"lhs": "ts", "rhs": "st"},
            {"lhs": "ts", "rhs": "q*st"}
        ]
    }"#;
    assert!(presentation_from_json(broken).is_err());
}

#[test]
fn quadratic_lhs_with_lower_order_terms() {
    // A Lie-style rule gf -> fg - g terminates and stays confluent.
    let f = ScalarField::rational_functions();
    let mut b = PresentationBuilder::new(f.clone());
    let ff = b.gen("f");
    let g = b.gen("g");
    b.rule(
        g,
        ff,
        vec![
            (Word(vec![ff, g]), f.one()),
            (Word(vec![g]), -&f.one()),
        ],
    )
    .unwrap();
    let p = b.build().unwrap();
    // g f^2 = (fg - g) f = f (fg - g) - (fg - g) = f^2 g - 2 f g + g
    let e = parse_element("g*f^2", &p).unwrap();
    let expect = parse_element("f^2*g - 2*f*g + g", &p).unwrap();
    assert_eq!(e, expect);
}

#[test]
fn zero_coefficient_terms_are_dropped() {
    let p = ghq();
    let x = parse_element("u - u", &p).unwrap();
    assert!(x.is_zero());
    assert!(x.terms.is_empty());
}
