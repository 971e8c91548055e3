//! Hopf-algebra structure layered on presentations: coproduct, counit and
//! antipode on generators, extended (anti)multiplicatively, with exhaustive
//! degree-bounded verification of the Hopf axioms.
//!
//! Built-in constructors cover the algebras this toolkit meets repeatedly:
//!
//! * [`hopf_hq`]: C⟨s, s^-1, t⟩ with ts = q·st, Δ(s) = s⊗s,
//!   Δ(t) = s⊗t + t⊗1 (the "big" quantum-plane-dual Hopf algebra),
//! * [`hopf_ghq`]: C⟨u, u^-1, v⟩ with uv = q·vu, same comultiplication shape,
//! * [`hopf_h`]: C⟨e^{±1}, f, g⟩ with eg = q·ge, ef = fe, fg - gf = g,
//!   Δ(f) = 1⊗f + f⊗1, Δ(g) = 1⊗g + g⊗e,
//! * [`hopf_jordan`]: same generators but Δ(g) = g⊗1 + e⊗g (the orientation
//!   produced by the solver's Galois-group construction),
//! * [`hopf_two_scale`]: adds a second grouplike h with hg = l·gh,
//! * [`hopf_taft`]: the N²-dimensional truncation at q a primitive N-th root
//!   of unity (s^N = 1, t^N = 0).

use crate::ncalg::{
    tensor_element, tensor_product, GenId, GenMap, NCElement, Presentation, PresentationBuilder,
    Word,
};
use crate::par;
use crate::scalars::{q_binomial, q_factorial, Scalar, ScalarField};
use crate::{Error, Result};
use std::sync::Arc;

/// A presentation with comultiplication, counit and antipode on generators.
#[derive(Clone)]
pub struct HopfPresentation {
    pub name: String,
    pub algebra: Arc<Presentation>,
    /// Tensor square of the algebra, built once.
    pub square: Arc<Presentation>,
    /// Per-generator coproduct, living in `square`.
    pub coproduct_images: Vec<NCElement>,
    /// Per-generator counit values.
    pub counit_images: Vec<Scalar>,
    /// Per-generator antipode, living in `algebra`.
    pub antipode_images: Vec<NCElement>,
}

/// Result of a degree-bounded axiom sweep or a relation check. Failures are
/// data, not errors.
#[derive(Debug, Clone)]
pub struct HopfReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl HopfReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl HopfPresentation {
    /// Assemble a Hopf structure. The coproduct images may live in any
    /// structurally matching tensor square; they are re-homed into the
    /// square this constructor builds.
    pub fn new(
        name: &str,
        algebra: Arc<Presentation>,
        coproduct_images: Vec<NCElement>,
        counit_images: Vec<Scalar>,
        antipode_images: Vec<NCElement>,
    ) -> Result<HopfPresentation> {
        let n = algebra.gens.len();
        if coproduct_images.len() != n || counit_images.len() != n || antipode_images.len() != n {
            return Err(Error::invalid(
                "need one coproduct, counit and antipode image per generator",
            ));
        }
        let square = tensor_product(&[&algebra, &algebra])?;
        let coproduct_images = coproduct_images
            .iter()
            .map(|x| {
                NCElement::from_terms(
                    &square,
                    x.terms.iter().map(|(w, c)| (w.clone(), c.clone())),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let antipode_images = antipode_images
            .iter()
            .map(|x| {
                NCElement::from_terms(
                    &algebra,
                    x.terms.iter().map(|(w, c)| (w.clone(), c.clone())),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HopfPresentation {
            name: name.to_string(),
            algebra,
            square,
            coproduct_images,
            counit_images,
            antipode_images,
        })
    }

    pub fn field(&self) -> &ScalarField {
        &self.algebra.field
    }

    /// Multiplicative extension of Δ; the result lives in the tensor square.
    pub fn coproduct(&self, x: &NCElement) -> Result<NCElement> {
        x.map_generators(&self.square, &self.coproduct_images)
    }

    /// Multiplicative extension of ε.
    pub fn counit(&self, x: &NCElement) -> Scalar {
        let field = self.field();
        let mut acc = field.zero();
        for (w, c) in &x.terms {
            let mut prod = field.one();
            for &g in &w.0 {
                prod = &prod * &self.counit_images[g as usize];
            }
            acc = &acc + &(c * &prod);
        }
        acc
    }

    /// Anti-multiplicative extension of S.
    pub fn antipode(&self, x: &NCElement) -> Result<NCElement> {
        x.map_generators_reversed(&self.algebra, &self.antipode_images)
    }

    /// Check that Δ and ε are well defined: each defining relation of the
    /// algebra keeps holding after applying Δ and ε to both sides.
    pub fn verify_bialgebra(&self) -> Result<HopfReport> {
        let delta = GenMap::new(&self.algebra, &self.square, self.coproduct_images.clone())?;
        let mut failures = Vec::new();
        let mut checked = 0;
        for rule in &self.algebra.rules {
            checked += 1;
            let lw = rule.lhs_word();
            let lhs_c = delta.apply_word(&lw)?;
            let mut rhs_c = NCElement::zero(&self.square);
            for (w, c) in &rule.rhs {
                rhs_c = rhs_c.add(&delta.apply_word(w)?.scale(c));
            }
            if lhs_c != rhs_c {
                failures.push(format!(
                    "coproduct breaks relation on {}: {} vs {}",
                    self.algebra.display_word(&lw),
                    lhs_c,
                    rhs_c
                ));
            }
            let lhs_e = self.counit_word(&lw);
            let mut rhs_e = self.field().zero();
            for (w, c) in &rule.rhs {
                rhs_e = &rhs_e + &(c * &self.counit_word(w));
            }
            if lhs_e != rhs_e {
                failures.push(format!(
                    "counit breaks relation on {}: {} vs {}",
                    self.algebra.display_word(&lw),
                    lhs_e,
                    rhs_e
                ));
            }
        }
        Ok(HopfReport { checked, failures })
    }

    fn counit_word(&self, w: &Word) -> Scalar {
        let mut prod = self.field().one();
        for &g in &w.0 {
            prod = &prod * &self.counit_images[g as usize];
        }
        prod
    }

    /// Exhaustive check of coassociativity, the counit laws and the antipode
    /// laws on every normal-form monomial of degree <= `degree_bound`, plus
    /// anti-multiplicative well-definedness of S on the relations.
    pub fn verify_hopf_axioms(&self, degree_bound: usize) -> Result<HopfReport> {
        let alg = &self.algebra;
        let square = &self.square;
        let cube = tensor_product(&[alg, alg, alg])?;
        let n = alg.gens.len() as GenId;

        // (Δ⊗id): square -> cube. Factor-0 letters of the square map to Δ of
        // the generator placed in cube factors (0,1) (letter ids coincide);
        // factor-1 letters shift to cube factor 2.
        let mut d_left: Vec<NCElement> = Vec::new();
        for g in 0..n {
            d_left.push(reindex(&self.coproduct_images[g as usize], 0, &cube)?);
        }
        for g in 0..n {
            d_left.push(NCElement::generator(&cube, 2 * n + g));
        }
        let delta_tensor_id = GenMap::new(square, &cube, d_left)?;

        // (id⊗Δ): factor-0 letters stay; factor-1 letters map to Δ shifted
        // into cube factors (1,2).
        let mut d_right: Vec<NCElement> = Vec::new();
        for g in 0..n {
            d_right.push(NCElement::generator(&cube, g));
        }
        for g in 0..n {
            d_right.push(reindex(&self.coproduct_images[g as usize], n, &cube)?);
        }
        let id_tensor_delta = GenMap::new(square, &cube, d_right)?;

        // (ε⊗id) and (id⊗ε): square -> algebra.
        let mut eps_left: Vec<NCElement> = Vec::new();
        for g in 0..n {
            eps_left.push(NCElement::scalar(alg, self.counit_images[g as usize].clone()));
        }
        for g in 0..n {
            eps_left.push(NCElement::generator(alg, g));
        }
        let eps_tensor_id = GenMap::new(square, alg, eps_left)?;

        let mut eps_right: Vec<NCElement> = Vec::new();
        for g in 0..n {
            eps_right.push(NCElement::generator(alg, g));
        }
        for g in 0..n {
            eps_right.push(NCElement::scalar(alg, self.counit_images[g as usize].clone()));
        }
        let id_tensor_eps = GenMap::new(square, alg, eps_right)?;

        let mut monomials: Vec<Word> = Vec::new();
        for d in 0..=degree_bound {
            monomials.extend(alg.normal_monomials_of_degree(d));
        }
        let total = monomials.len();

        let results: Vec<Result<Option<String>>> = par::map(monomials, |w| {
            let x = NCElement::monomial(alg, w.clone(), alg.field.one())?;
            let dx = self.coproduct(&x)?;

            let lhs = delta_tensor_id.apply(&dx)?;
            let rhs = id_tensor_delta.apply(&dx)?;
            if lhs != rhs {
                return Ok(Some(format!(
                    "coassociativity fails on {}",
                    alg.display_word(&w)
                )));
            }

            if eps_tensor_id.apply(&dx)? != x {
                return Ok(Some(format!(
                    "left counit law fails on {}",
                    alg.display_word(&w)
                )));
            }
            if id_tensor_eps.apply(&dx)? != x {
                return Ok(Some(format!(
                    "right counit law fails on {}",
                    alg.display_word(&w)
                )));
            }

            // m(S⊗id)Δ = ηε = m(id⊗S)Δ, summed over the split terms of Δ(x).
            let eps_x = NCElement::scalar(alg, self.counit(&x));
            let mut s_id = NCElement::zero(alg);
            let mut id_s = NCElement::zero(alg);
            for (tw, tc) in &dx.terms {
                let parts = self.square.split_word(tw);
                let left = Word(parts[0].0.iter().map(|&g| g).collect());
                let right = Word(parts[1].0.iter().map(|&g| g - n).collect());
                let left_el = NCElement::monomial(alg, left.clone(), alg.field.one())?;
                let right_el = NCElement::monomial(alg, right.clone(), alg.field.one())?;
                let s_left = self.antipode(&left_el)?;
                let s_right = self.antipode(&right_el)?;
                s_id = s_id.add(&s_left.mul(&right_el)?.scale(tc));
                id_s = id_s.add(&left_el.mul(&s_right)?.scale(tc));
            }
            if s_id != eps_x {
                return Ok(Some(format!(
                    "left antipode law fails on {}",
                    alg.display_word(&w)
                )));
            }
            if id_s != eps_x {
                return Ok(Some(format!(
                    "right antipode law fails on {}",
                    alg.display_word(&w)
                )));
            }
            Ok(None)
        });

        let mut failures = Vec::new();
        for r in results {
            if let Some(f) = r? {
                failures.push(f);
            }
        }

        // S well defined: apply the anti-multiplicative extension to both
        // sides of every relation.
        for rule in &alg.rules {
            let lw = rule.lhs_word();
            let lhs_el = NCElement {
                pres: alg.clone(),
                terms: [(lw.clone(), alg.field.one())].into_iter().collect(),
            };
            let s_lhs = lhs_el.map_generators_reversed(alg, &self.antipode_images)?;
            let mut s_rhs = NCElement::zero(alg);
            for (w, c) in &rule.rhs {
                let el = NCElement {
                    pres: alg.clone(),
                    terms: [(w.clone(), alg.field.one())].into_iter().collect(),
                };
                s_rhs = s_rhs.add(&el.map_generators_reversed(alg, &self.antipode_images)?.scale(c));
            }
            if s_lhs != s_rhs {
                failures.push(format!(
                    "antipode breaks relation on {}: {} vs {}",
                    alg.display_word(&lw),
                    s_lhs,
                    s_rhs
                ));
            }
        }

        Ok(HopfReport {
            checked: total,
            failures,
        })
    }
}

/// Reinterpret an element of the tensor square inside a larger tensor power,
/// shifting every letter by `offset`.
fn reindex(x: &NCElement, offset: GenId, target: &Arc<Presentation>) -> Result<NCElement> {
    let terms: Vec<(Word, Scalar)> = x
        .terms
        .iter()
        .map(|(w, c)| (Word(w.0.iter().map(|&g| g + offset).collect()), c.clone()))
        .collect();
    NCElement::from_terms(target, terms)
}

impl crate::ncalg::RewriteRule {
    pub fn lhs_word(&self) -> Word {
        match self.lhs {
            crate::ncalg::Lhs::Pair(a, b) => Word(vec![a, b]),
            crate::ncalg::Lhs::Power(g, k) => Word(vec![g; k as usize]),
        }
    }
}

// ---------------------------------------------------------------------------
// Built-in Hopf algebras
// ---------------------------------------------------------------------------

/// C⟨s, s^-1, t⟩, ts = q·st; Δ(s) = s⊗s, Δ(t) = s⊗t + t⊗1; S(t) = -q·t·s^-1.
pub fn hopf_hq(field: &ScalarField) -> Result<HopfPresentation> {
    let mut b = PresentationBuilder::new(field.clone());
    let (s, si) = b.gen_with_inverse("s");
    let t = b.gen("t");
    let q = field.q();
    b.swap_rule(t, s, q.clone())?;
    b.swap_rule(t, si, q.inv_in(field)?)?;
    let alg = b.build()?;
    let square = tensor_product(&[&alg, &alg])?;
    let gs = NCElement::generator(&alg, s);
    let gsi = NCElement::generator(&alg, si);
    let gt = NCElement::generator(&alg, t);
    let one = NCElement::one(&alg);
    let coproduct = vec![
        tensor_element(&square, &[&gs, &gs])?,
        tensor_element(&square, &[&gsi, &gsi])?,
        tensor_element(&square, &[&gs, &gt])?
            .add(&tensor_element(&square, &[&gt, &one])?),
    ];
    let counit = vec![field.one(), field.one(), field.zero()];
    let antipode = vec![
        gsi.clone(),
        gs.clone(),
        gt.mul(&gsi)?.scale(&(-&q)),
    ];
    HopfPresentation::new("H_q", alg, coproduct, counit, antipode)
}

/// C⟨u, u^-1, v⟩, uv = q·vu; Δ(u) = u⊗u, Δ(v) = u⊗v + v⊗1; S(v) = -u^-1·v.
pub fn hopf_ghq(field: &ScalarField) -> Result<HopfPresentation> {
    let mut b = PresentationBuilder::new(field.clone());
    let (u, ui) = b.gen_with_inverse("u");
    let v = b.gen("v");
    let q = field.q();
    // uv = q·vu means vu -> q^-1 uv.
    b.swap_rule(v, u, q.inv_in(field)?)?;
    b.swap_rule(v, ui, q.clone())?;
    let alg = b.build()?;
    let square = tensor_product(&[&alg, &alg])?;
    let gu = NCElement::generator(&alg, u);
    let gui = NCElement::generator(&alg, ui);
    let gv = NCElement::generator(&alg, v);
    let one = NCElement::one(&alg);
    let coproduct = vec![
        tensor_element(&square, &[&gu, &gu])?,
        tensor_element(&square, &[&gui, &gui])?,
        tensor_element(&square, &[&gu, &gv])?
            .add(&tensor_element(&square, &[&gv, &one])?),
    ];
    let counit = vec![field.one(), field.one(), field.zero()];
    let antipode = vec![gui.clone(), gu.clone(), gui.mul(&gv)?.neg()];
    HopfPresentation::new("GH_q", alg, coproduct, counit, antipode)
}

/// C⟨e, e^-1, f, g⟩ with ef = fe, eg = q·ge, fg - gf = g;
/// Δ(e) = e⊗e, Δ(f) = 1⊗f + f⊗1, Δ(g) = 1⊗g + g⊗e; S(g) = -g·e^-1.
pub fn hopf_h(field: &ScalarField) -> Result<HopfPresentation> {
    let mut b = PresentationBuilder::new(field.clone());
    let (e, ei) = b.gen_with_inverse("e");
    let f = b.gen("f");
    let g = b.gen("g");
    let q = field.q();
    let one = field.one();
    b.swap_rule(f, e, one.clone())?;
    b.swap_rule(f, ei, one.clone())?;
    b.swap_rule(g, e, q.inv_in(field)?)?;
    b.swap_rule(g, ei, q.clone())?;
    // gf = fg - g
    b.rule(
        g,
        f,
        vec![
            (Word(vec![f, g]), one.clone()),
            (Word(vec![g]), -&one),
        ],
    )?;
    let alg = b.build()?;
    let square = tensor_product(&[&alg, &alg])?;
    let ge = NCElement::generator(&alg, e);
    let gei = NCElement::generator(&alg, ei);
    let gf = NCElement::generator(&alg, f);
    let gg = NCElement::generator(&alg, g);
    let unit = NCElement::one(&alg);
    let coproduct = vec![
        tensor_element(&square, &[&ge, &ge])?,
        tensor_element(&square, &[&gei, &gei])?,
        tensor_element(&square, &[&unit, &gf])?
            .add(&tensor_element(&square, &[&gf, &unit])?),
        tensor_element(&square, &[&unit, &gg])?
            .add(&tensor_element(&square, &[&gg, &ge])?),
    ];
    let counit = vec![field.one(), field.one(), field.zero(), field.zero()];
    let antipode = vec![
        gei.clone(),
        ge.clone(),
        gf.neg(),
        gg.mul(&gei)?.neg(),
    ];
    HopfPresentation::new("h", alg, coproduct, counit, antipode)
}

/// Like [`hopf_h`] but with the solver's coproduct orientation:
/// Δ(f) = f⊗1 + 1⊗f, Δ(g) = g⊗1 + e⊗g; S(g) = -e^-1·g.
pub fn hopf_jordan(field: &ScalarField) -> Result<HopfPresentation> {
    let mut b = PresentationBuilder::new(field.clone());
    let (e, ei) = b.gen_with_named_inverse("e", "e'");
    let f = b.gen("f");
    let g = b.gen("g");
    let q = field.q();
    let one = field.one();
    b.swap_rule(f, e, one.clone())?;
    b.swap_rule(f, ei, one.clone())?;
    b.swap_rule(g, e, q.inv_in(field)?)?;
    b.swap_rule(g, ei, q.clone())?;
    b.rule(
        g,
        f,
        vec![
            (Word(vec![f, g]), one.clone()),
            (Word(vec![g]), -&one),
        ],
    )?;
    let alg = b.build()?;
    let square = tensor_product(&[&alg, &alg])?;
    let ge = NCElement::generator(&alg, e);
    let gei = NCElement::generator(&alg, ei);
    let gf = NCElement::generator(&alg, f);
    let gg = NCElement::generator(&alg, g);
    let unit = NCElement::one(&alg);
    let coproduct = vec![
        tensor_element(&square, &[&ge, &ge])?,
        tensor_element(&square, &[&gei, &gei])?,
        tensor_element(&square, &[&gf, &unit])?
            .add(&tensor_element(&square, &[&unit, &gf])?),
        tensor_element(&square, &[&gg, &unit])?
            .add(&tensor_element(&square, &[&ge, &gg])?),
    ];
    let counit = vec![field.one(), field.one(), field.zero(), field.zero()];
    let antipode = vec![
        gei.clone(),
        ge.clone(),
        gf.neg(),
        gei.mul(&gg)?.neg(),
    ];
    HopfPresentation::new(
        "jordan-block group",
        alg,
        coproduct,
        counit,
        antipode,
    )
}

/// Two grouplikes e, h and one skew-primitive g: eg = q·ge, hg = l·gh,
/// eh = he; Δ(g) = g⊗1 + e⊗g.
pub fn hopf_two_scale(field: &ScalarField, l: &Scalar) -> Result<HopfPresentation> {
    if l.is_zero() {
        return Err(Error::invalid("second scale must be invertible"));
    }
    let mut b = PresentationBuilder::new(field.clone());
    let (e, ei) = b.gen_with_named_inverse("e", "e'");
    let (h, hi) = b.gen_with_named_inverse("h", "h'");
    let g = b.gen("g");
    let q = field.q();
    let one = field.one();
    let li = l.inv_in(field)?;
    // e and h commute (and so do the formal inverses).
    b.swap_rule(h, e, one.clone())?;
    b.swap_rule(h, ei, one.clone())?;
    b.swap_rule(hi, e, one.clone())?;
    b.swap_rule(hi, ei, one.clone())?;
    b.swap_rule(g, e, q.inv_in(field)?)?;
    b.swap_rule(g, ei, q.clone())?;
    b.swap_rule(g, h, li.clone())?;
    b.swap_rule(g, hi, l.clone())?;
    let alg = b.build()?;
    let square = tensor_product(&[&alg, &alg])?;
    let mk = |id| NCElement::generator(&alg, id);
    let (ge, gei, gh, ghi, gg) = (mk(e), mk(ei), mk(h), mk(hi), mk(g));
    let unit = NCElement::one(&alg);
    let coproduct = vec![
        tensor_element(&square, &[&ge, &ge])?,
        tensor_element(&square, &[&gei, &gei])?,
        tensor_element(&square, &[&gh, &gh])?,
        tensor_element(&square, &[&ghi, &ghi])?,
        tensor_element(&square, &[&gg, &unit])?
            .add(&tensor_element(&square, &[&ge, &gg])?),
    ];
    let counit = vec![
        field.one(),
        field.one(),
        field.one(),
        field.one(),
        field.zero(),
    ];
    let antipode = vec![
        gei.clone(),
        ge.clone(),
        ghi.clone(),
        gh.clone(),
        gei.mul(&gg)?.neg(),
    ];
    HopfPresentation::new(
        "two-scale group",
        alg,
        coproduct,
        counit,
        antipode,
    )
}

/// The N²-dimensional truncation at q a primitive N-th root of unity:
/// s^N = 1, t^N = 0, ts = q·st; no separate inverse generator (s^-1 = s^{N-1}).
pub fn hopf_taft(n: u32, field: &ScalarField) -> Result<HopfPresentation> {
    if n < 2 {
        return Err(Error::invalid("truncation order must be at least 2"));
    }
    match field.is_root_of_unity() {
        Some(order) if order == n => {}
        other => {
            return Err(Error::invalid(format!(
                "truncated Hopf algebra of order {n} needs q of exact multiplicative \
                 order {n}, got {other:?}"
            )))
        }
    }
    let mut b = PresentationBuilder::new(field.clone());
    let s = b.gen("s");
    let t = b.gen("t");
    let q = field.q();
    b.swap_rule(t, s, q.clone())?;
    b.power_rule(s, n, vec![(Word::empty(), field.one())])?;
    b.power_rule(t, n, vec![])?;
    let alg = b.build()?;
    let square = tensor_product(&[&alg, &alg])?;
    let gs = NCElement::generator(&alg, s);
    let gt = NCElement::generator(&alg, t);
    let one = NCElement::one(&alg);
    let s_inv = gs.pow(n - 1)?;
    let coproduct = vec![
        tensor_element(&square, &[&gs, &gs])?,
        tensor_element(&square, &[&gs, &gt])?
            .add(&tensor_element(&square, &[&gt, &one])?),
    ];
    let counit = vec![field.one(), field.zero()];
    let antipode = vec![s_inv.clone(), gt.mul(&s_inv)?.scale(&(-&q))];
    HopfPresentation::new(
        &format!("taft({n})"),
        alg,
        coproduct,
        counit,
        antipode,
    )
}

// ---------------------------------------------------------------------------
// The divided-power basis v_{m,n} = s^m t^n / [n]_q!
// ---------------------------------------------------------------------------

/// Index of a divided-power basis element v_{m,n} = s^m t^n / [n]_q!.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VBasisIndex {
    pub m: i64,
    pub n: u32,
}

/// v_{m,n} as an element of a [`hopf_hq`] algebra.
pub fn hq_v_basis(h: &HopfPresentation, m: i64, n: u32) -> Result<NCElement> {
    if n > 0 {
        h.field().require_not_root_of_unity("divided powers t^n/[n]!")?;
    }
    let alg = &h.algebra;
    let s = alg.gen_id("s").expect("s generator");
    let si = alg.gen_id("s^-1").expect("s^-1 generator");
    let t = alg.gen_id("t").expect("t generator");
    let mut letters: Vec<GenId> = Vec::new();
    let s_letter = if m >= 0 { s } else { si };
    for _ in 0..m.unsigned_abs() {
        letters.push(s_letter);
    }
    for _ in 0..n {
        letters.push(t);
    }
    let coeff = q_factorial(n, h.field()).inv_in(h.field())?;
    NCElement::monomial(alg, Word(letters), coeff)
}

/// Δ(v_{m,n}) expanded in the divided-power basis,
/// Σ_{i+j=n} v_{m+j,i} ⊗ v_{m,j}, cross-checked against the multiplicative
/// extension of Δ.
pub fn hq_coproduct_v(h: &HopfPresentation, m: i64, n: u32) -> Result<NCElement> {
    let mut acc = NCElement::zero(&h.square);
    for j in 0..=n {
        let i = n - j;
        let left = hq_v_basis(h, m + j as i64, i)?;
        let right = hq_v_basis(h, m, j)?;
        acc = acc.add(&tensor_element(&h.square, &[&left, &right])?);
    }
    let direct = h.coproduct(&hq_v_basis(h, m, n)?)?;
    if acc != direct {
        return Err(Error::PropertyFailed(format!(
            "divided-power coproduct formula disagrees with the multiplicative \
             extension at (m,n)=({m},{n})"
        )));
    }
    Ok(acc)
}

/// S(v_{m,n}) = (-1)^n q^{n(n+1)/2 - n(m+n)} v_{-(m+n), n}, cross-checked
/// against the anti-multiplicative extension of S.
pub fn hq_antipode_v(h: &HopfPresentation, m: i64, n: u32) -> Result<(Scalar, VBasisIndex)> {
    let field = h.field();
    let exponent = (n as i64) * (n as i64 + 1) / 2 - (n as i64) * (m + n as i64);
    let mut coeff = field.q_pow(exponent);
    if n % 2 == 1 {
        coeff = -&coeff;
    }
    let index = VBasisIndex {
        m: -(m + n as i64),
        n,
    };
    let formula = hq_v_basis(h, index.m, index.n)?.scale(&coeff);
    let direct = h.antipode(&hq_v_basis(h, m, n)?)?;
    if formula != direct {
        return Err(Error::PropertyFailed(format!(
            "divided-power antipode formula disagrees with the anti-multiplicative \
             extension at (m,n)=({m},{n})"
        )));
    }
    Ok((coeff, index))
}

/// v_{m,n}·v_{m',n'} = q^{n·m'} binom(n+n', n)_q v_{m+m', n+n'}; returns the
/// coefficient and index, cross-checked against direct multiplication.
pub fn hq_v_product(
    h: &HopfPresentation,
    a: VBasisIndex,
    b: VBasisIndex,
) -> Result<(Scalar, VBasisIndex)> {
    let field = h.field();
    let coeff = &field.q_pow(a.n as i64 * b.m) * &q_binomial(a.n + b.n, a.n, field);
    let index = VBasisIndex {
        m: a.m + b.m,
        n: a.n + b.n,
    };
    let formula = hq_v_basis(h, index.m, index.n)?.scale(&coeff);
    let direct = hq_v_basis(h, a.m, a.n)?.mul(&hq_v_basis(h, b.m, b.n)?)?;
    if formula != direct {
        return Err(Error::PropertyFailed(format!(
            "divided-power product formula disagrees at ({},{})·({},{})",
            a.m, a.n, b.m, b.n
        )));
    }
    Ok((coeff, index))
}
