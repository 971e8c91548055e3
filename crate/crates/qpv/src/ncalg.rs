//! Finitely presented noncommutative algebras with ordered generators and a
//! terminating rewriting system giving unique normal forms.
//!
//! A presentation declares generators in a fixed order (the normal-form
//! order: earlier-declared letters sort to the left) and rewrite rules whose
//! left side is either a descending two-letter word, an inverse pair, or a
//! pure power of one generator, and whose right side is strictly smaller in
//! degree-lexicographic order. That shape makes rewriting terminate; local
//! confluence is verified by exhausting all short words and comparing every
//! single-step rewrite's full normal form.
//!
//! Elements are immutable linear combinations of normal-form words. Tensor
//! powers of presentations are built automatically with plain letter-swapping
//! cross rules, so `x ⊗ y` is just the product of the two embeddings.

use crate::scalars::{Scalar, ScalarField};
use crate::{Error, Result};
use serde::Deserialize;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

pub type GenId = u32;

const STEP_BUDGET: usize = 1_000_000;

/// A word in the generators; `Ord` is degree-lexicographic (length first,
/// then letter-by-letter with later-declared generators larger).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(pub Vec<GenId>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn one_letter(g: GenId) -> Word {
        Word(vec![g])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    /// Present when this generator is the formal inverse of another.
    pub inverse_of: Option<GenId>,
}

/// Left-hand side of a rewrite rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lhs {
    /// A two-letter word `a·b`.
    Pair(GenId, GenId),
    /// A pure power `g^k` with k >= 2 (for truncations like g^N -> 1).
    Power(GenId, u32),
}

impl Lhs {
    fn as_word(&self) -> Word {
        match self {
            Lhs::Pair(a, b) => Word(vec![*a, *b]),
            Lhs::Power(g, k) => Word(vec![*g; *k as usize]),
        }
    }

    fn len(&self) -> usize {
        match self {
            Lhs::Pair(..) => 2,
            Lhs::Power(_, k) => *k as usize,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RewriteRule {
    pub lhs: Lhs,
    pub rhs: Vec<(Word, Scalar)>,
}

/// An immutable presentation of a finitely generated algebra.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub field: ScalarField,
    pub gens: Vec<Generator>,
    pub rules: Vec<RewriteRule>,
    /// Tensor-factor boundaries: generator ids in `splits[k-1]..splits[k]`
    /// belong to factor k (with implicit 0 and gens.len() endpoints). Empty
    /// for plain presentations.
    pub splits: Vec<usize>,
    /// Whether the local-confluence check passed at build time.
    pub checked: bool,
    pair_index: HashMap<(GenId, GenId), usize>,
    power_rules: Vec<(GenId, u32, usize)>,
}

pub struct PresentationBuilder {
    field: ScalarField,
    gens: Vec<Generator>,
    rules: Vec<RewriteRule>,
    splits: Vec<usize>,
}

impl PresentationBuilder {
    pub fn new(field: ScalarField) -> Self {
        PresentationBuilder {
            field,
            gens: Vec::new(),
            rules: Vec::new(),
            splits: Vec::new(),
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// Declare a generator; declaration order is the normal-form order.
    pub fn gen(&mut self, name: &str) -> GenId {
        let id = self.gens.len() as GenId;
        self.gens.push(Generator {
            name: name.to_string(),
            inverse_of: None,
        });
        id
    }

    /// Declare a generator along with a formal inverse (named `name^-1`),
    /// adding both unit rules.
    pub fn gen_with_inverse(&mut self, name: &str) -> (GenId, GenId) {
        self.gen_with_named_inverse(name, &format!("{name}^-1"))
    }

    pub fn gen_with_named_inverse(&mut self, name: &str, inv_name: &str) -> (GenId, GenId) {
        let g = self.gen(name);
        let gi = self.gens.len() as GenId;
        self.gens.push(Generator {
            name: inv_name.to_string(),
            inverse_of: Some(g),
        });
        let one = self.field.one();
        self.rules.push(RewriteRule {
            lhs: Lhs::Pair(g, gi),
            rhs: vec![(Word::empty(), one.clone())],
        });
        self.rules.push(RewriteRule {
            lhs: Lhs::Pair(gi, g),
            rhs: vec![(Word::empty(), one)],
        });
        (g, gi)
    }

    /// Add a rule `a·b -> rhs`. The left word must be descending (a declared
    /// after b) unless (a, b) is an inverse pair, and every rhs monomial must
    /// be strictly smaller than `a·b` in degree-lexicographic order.
    pub fn rule(&mut self, a: GenId, b: GenId, rhs: Vec<(Word, Scalar)>) -> Result<()> {
        let inverse_pair = self.gens[a as usize].inverse_of == Some(b)
            || self.gens[b as usize].inverse_of == Some(a);
        if a <= b && !inverse_pair {
            return Err(Error::invalid(format!(
                "rule left side {}*{} is not descending in the generator order",
                self.gens[a as usize].name, self.gens[b as usize].name
            )));
        }
        self.push_rule(Lhs::Pair(a, b), rhs)
    }

    /// Convenience: `a·b -> coeff · b·a`.
    pub fn swap_rule(&mut self, a: GenId, b: GenId, coeff: Scalar) -> Result<()> {
        self.rule(a, b, vec![(Word(vec![b, a]), coeff)])
    }

    /// Add a rule `a·b -> rhs` without requiring the left word to be
    /// descending. The term order still decreases (every rhs monomial must be
    /// strictly smaller than `a·b`), so rewriting terminates; this admits
    /// rules like `x·y -> z·w + 1` where the discovered leading word happens
    /// to be ascending in the declaration order.
    pub fn directed_rule(&mut self, a: GenId, b: GenId, rhs: Vec<(Word, Scalar)>) -> Result<()> {
        self.push_rule(Lhs::Pair(a, b), rhs)
    }

    /// Add a truncation rule `g^k -> rhs` with k >= 2.
    pub fn power_rule(&mut self, g: GenId, k: u32, rhs: Vec<(Word, Scalar)>) -> Result<()> {
        if k < 2 {
            return Err(Error::invalid("power rule needs exponent >= 2"));
        }
        self.push_rule(Lhs::Power(g, k), rhs)
    }

    fn push_rule(&mut self, lhs: Lhs, rhs: Vec<(Word, Scalar)>) -> Result<()> {
        let lw = lhs.as_word();
        for (w, _) in &rhs {
            if w >= &lw {
                return Err(Error::invalid(format!(
                    "rewrite rule does not decrease the term order: {:?} -> {:?}",
                    lw, w
                )));
            }
            if let Some(&g) = w.0.iter().find(|&&g| g as usize >= self.gens.len()) {
                return Err(Error::invalid(format!("unknown generator id {g} in rule")));
            }
        }
        self.rules.push(RewriteRule { lhs, rhs });
        Ok(())
    }

    fn assemble(self, checked: bool) -> Presentation {
        let mut pair_index = HashMap::new();
        let mut power_rules = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            match r.lhs {
                Lhs::Pair(a, b) => {
                    pair_index.entry((a, b)).or_insert(i);
                }
                Lhs::Power(g, k) => power_rules.push((g, k, i)),
            }
        }
        Presentation {
            field: self.field,
            gens: self.gens,
            rules: self.rules,
            splits: self.splits,
            checked,
            pair_index,
            power_rules,
        }
    }

    /// Build without the confluence check (for diagnostics and tests).
    pub fn build_unchecked(self) -> Arc<Presentation> {
        Arc::new(self.assemble(false))
    }

    /// Build and verify local confluence up to the default overlap bound;
    /// fails when any overlap is ambiguous.
    pub fn build(self) -> Result<Arc<Presentation>> {
        let p = self.assemble(false);
        let bound = p.default_overlap_bound();
        let report = p.check_local_confluence(bound)?;
        if !report.confluent() {
            let first = &report.failures[0];
            return Err(Error::invalid(format!(
                "presentation is not locally confluent: word {} normalizes to {} distinct forms",
                first.word,
                first.forms.len()
            )));
        }
        let mut p = p;
        p.checked = true;
        Ok(Arc::new(p))
    }
}

/// Outcome of the local-confluence check.
#[derive(Debug, Clone)]
pub struct ConfluenceReport {
    pub checked_words: usize,
    pub overlap_bound: usize,
    pub failures: Vec<ConfluenceFailure>,
}

#[derive(Debug, Clone)]
pub struct ConfluenceFailure {
    pub word: String,
    pub forms: Vec<String>,
}

impl ConfluenceReport {
    pub fn confluent(&self) -> bool {
        self.failures.is_empty()
    }
}

impl Presentation {
    pub fn gen_id(&self, name: &str) -> Option<GenId> {
        self.gens
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as GenId)
    }

    pub fn gen_name(&self, id: GenId) -> &str {
        &self.gens[id as usize].name
    }

    /// The declared formal inverse of `g`, in either direction.
    pub fn inverse_of(&self, g: GenId) -> Option<GenId> {
        if let Some(b) = self.gens[g as usize].inverse_of {
            return Some(b);
        }
        self.gens
            .iter()
            .position(|h| h.inverse_of == Some(g))
            .map(|i| i as GenId)
    }

    /// Overlap bound covering all critical pairs of the declared rules:
    /// length 3 for two-letter rules, 2k-1 when a power rule of exponent k
    /// is present.
    pub fn default_overlap_bound(&self) -> usize {
        let mut bound = 3;
        for r in &self.rules {
            if let Lhs::Power(_, k) = r.lhs {
                bound = bound.max(2 * k as usize - 1);
            }
        }
        bound
    }

    /// First rewritable position in a word: (position, rule index, lhs length).
    fn first_redex(&self, w: &[GenId]) -> Option<(usize, usize, usize)> {
        for i in 0..w.len() {
            if i + 1 < w.len() {
                if let Some(&r) = self.pair_index.get(&(w[i], w[i + 1])) {
                    return Some((i, r, 2));
                }
            }
            for &(g, k, r) in &self.power_rules {
                let k = k as usize;
                if i + k <= w.len() && w[i..i + k].iter().all(|&x| x == g) {
                    return Some((i, r, k));
                }
            }
        }
        None
    }

    pub fn is_normal_word(&self, w: &[GenId]) -> bool {
        self.first_redex(w).is_none()
    }

    /// Normalize a linear combination of raw words.
    pub fn normal_form_terms<I>(&self, terms: I) -> Result<BTreeMap<Word, Scalar>>
    where
        I: IntoIterator<Item = (Word, Scalar)>,
    {
        let mut out: BTreeMap<Word, Scalar> = BTreeMap::new();
        let mut stack: Vec<(Word, Scalar)> = terms.into_iter().collect();
        let mut steps = 0usize;
        while let Some((w, c)) = stack.pop() {
            if c.is_zero() {
                continue;
            }
            match self.first_redex(&w.0) {
                None => {
                    let entry = out.entry(w.clone());
                    match entry {
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            let s = &*e.get() + &c;
                            if s.is_zero() {
                                e.remove();
                            } else {
                                *e.get_mut() = s;
                            }
                        }
                        std::collections::btree_map::Entry::Vacant(e) => {
                            e.insert(c);
                        }
                    }
                }
                Some((pos, rule, len)) => {
                    steps += 1;
                    if steps > STEP_BUDGET {
                        return Err(Error::NonTerminating {
                            word: self.display_word(&w),
                        });
                    }
                    for (rw, rc) in &self.rules[rule].rhs {
                        let mut nw = Vec::with_capacity(w.0.len() - len + rw.0.len());
                        nw.extend_from_slice(&w.0[..pos]);
                        nw.extend_from_slice(&rw.0);
                        nw.extend_from_slice(&w.0[pos + len..]);
                        stack.push((Word(nw), &c * rc));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exhaustively check that every word of length <= `overlap_bound` has a
    /// unique normal form no matter which redex is contracted first.
    pub fn check_local_confluence(&self, overlap_bound: usize) -> Result<ConfluenceReport> {
        let n = self.gens.len() as GenId;
        let mut failures = Vec::new();
        let mut checked = 0usize;
        let mut words: Vec<Vec<GenId>> = vec![Vec::new()];
        for _ in 0..overlap_bound {
            let mut next = Vec::new();
            for w in &words {
                for g in 0..n {
                    let mut v = w.clone();
                    v.push(g);
                    next.push(v);
                }
            }
            for w in &next {
                checked += 1;
                // All single-step contractions at every position.
                let mut forms: Vec<BTreeMap<Word, Scalar>> = Vec::new();
                let mut any = false;
                for i in 0..w.len() {
                    for (ri, rule) in self.rules.iter().enumerate() {
                        let len = rule.lhs.len();
                        if i + len > w.len() {
                            continue;
                        }
                        let matches = match rule.lhs {
                            Lhs::Pair(a, b) => w[i] == a && w[i + 1] == b,
                            Lhs::Power(g, k) => {
                                w[i..i + k as usize].iter().all(|&x| x == g)
                            }
                        };
                        if !matches {
                            continue;
                        }
                        any = true;
                        let _ = ri;
                        let mut terms = Vec::new();
                        for (rw, rc) in &rule.rhs {
                            let mut nw = Vec::new();
                            nw.extend_from_slice(&w[..i]);
                            nw.extend_from_slice(&rw.0);
                            nw.extend_from_slice(&w[i + len..]);
                            terms.push((Word(nw), rc.clone()));
                        }
                        forms.push(self.normal_form_terms(terms)?);
                    }
                }
                if any {
                    let first = &forms[0];
                    if forms.iter().any(|f| f != first) {
                        let mut shown: Vec<String> = Vec::new();
                        for f in &forms {
                            let s = self.display_terms(f);
                            if !shown.contains(&s) {
                                shown.push(s);
                            }
                        }
                        if shown.len() > 1 {
                            failures.push(ConfluenceFailure {
                                word: self.display_word(&Word(w.clone())),
                                forms: shown,
                            });
                        }
                    }
                }
            }
            words = next;
        }
        Ok(ConfluenceReport {
            checked_words: checked,
            overlap_bound,
            failures,
        })
    }

    /// All normal-form monomials of total degree exactly `d`.
    pub fn normal_monomials_of_degree(&self, d: usize) -> Vec<Word> {
        let n = self.gens.len() as GenId;
        let mut level: Vec<Word> = vec![Word::empty()];
        for _ in 0..d {
            let mut next = Vec::new();
            for w in &level {
                for g in 0..n {
                    let mut v = w.0.clone();
                    v.push(g);
                    if self.is_normal_word(&v) {
                        next.push(Word(v));
                    }
                }
            }
            level = next;
        }
        level
    }

    /// Number of tensor factors (1 for plain presentations).
    pub fn factor_count(&self) -> usize {
        self.splits.len() + 1
    }

    /// Split a word into its tensor-factor components.
    pub fn split_word(&self, w: &Word) -> Vec<Word> {
        let mut bounds = Vec::with_capacity(self.splits.len() + 2);
        bounds.push(0usize);
        bounds.extend_from_slice(&self.splits);
        bounds.push(self.gens.len());
        let mut parts = vec![Vec::new(); bounds.len() - 1];
        for &g in &w.0 {
            let k = bounds
                .windows(2)
                .position(|b| (g as usize) >= b[0] && (g as usize) < b[1])
                .expect("generator inside some factor");
            parts[k].push(g);
        }
        parts.into_iter().map(Word).collect()
    }

    pub fn display_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        if self.splits.is_empty() {
            return self.display_plain_word(&w.0, 0);
        }
        let parts = self.split_word(w);
        let rendered: Vec<String> = parts
            .iter()
            .map(|p| {
                if p.is_empty() {
                    "1".to_string()
                } else {
                    self.display_plain_word(&p.0, 0)
                }
            })
            .collect();
        rendered.join(" ⊗ ")
    }

    fn display_plain_word(&self, w: &[GenId], _offset: usize) -> String {
        let mut out = String::new();
        let mut i = 0;
        while i < w.len() {
            let g = w[i];
            let mut run = 1;
            while i + run < w.len() && w[i + run] == g {
                run += 1;
            }
            if !out.is_empty() {
                out.push('*');
            }
            out.push_str(self.gen_name(g));
            if run > 1 {
                out.push_str(&format!("^{run}"));
            }
            i += run;
        }
        out
    }

    pub fn display_terms(&self, terms: &BTreeMap<Word, Scalar>) -> String {
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (w, c) in terms.iter().rev() {
            let (neg, body) = coeff_body(c);
            let word_str = self.display_word(w);
            let piece = if w.is_empty() {
                body
            } else if body == "1" {
                word_str
            } else {
                format!("{body}*{word_str}")
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
                out.push_str(&piece);
            } else {
                out.push_str(if neg { " - " } else { " + " });
                out.push_str(&piece);
            }
        }
        out
    }
}

/// Split a scalar's rendering into (is_negative, magnitude_body) for display.
fn coeff_body(c: &Scalar) -> (bool, String) {
    let s = c.to_string();
    let atomic = !s.contains(" + ") && !s.contains(" - ");
    if atomic {
        if let Some(rest) = s.strip_prefix('-') {
            return (true, rest.to_string());
        }
        return (false, s);
    }
    (false, format!("({s})"))
}

/// An element of a presented algebra: a linear combination of normal-form
/// words. Immutable; all arithmetic renormalizes.
#[derive(Clone)]
pub struct NCElement {
    pub pres: Arc<Presentation>,
    pub terms: BTreeMap<Word, Scalar>,
}

impl PartialEq for NCElement {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for NCElement {}

impl fmt::Debug for NCElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NCElement({})", self)
    }
}

impl fmt::Display for NCElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pres.display_terms(&self.terms))
    }
}

impl NCElement {
    pub fn zero(pres: &Arc<Presentation>) -> NCElement {
        NCElement {
            pres: pres.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(pres: &Arc<Presentation>) -> NCElement {
        NCElement::scalar(pres, pres.field.one())
    }

    pub fn scalar(pres: &Arc<Presentation>, c: Scalar) -> NCElement {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Word::empty(), c);
        }
        NCElement {
            pres: pres.clone(),
            terms,
        }
    }

    pub fn generator(pres: &Arc<Presentation>, g: GenId) -> NCElement {
        NCElement::monomial(pres, Word::one_letter(g), pres.field.one())
            .expect("single letters are normal")
    }

    /// Normal form of `c · w`.
    pub fn monomial(pres: &Arc<Presentation>, w: Word, c: Scalar) -> Result<NCElement> {
        let terms = pres.normal_form_terms([(w, c)])?;
        Ok(NCElement {
            pres: pres.clone(),
            terms,
        })
    }

    pub fn from_terms<I>(pres: &Arc<Presentation>, terms: I) -> Result<NCElement>
    where
        I: IntoIterator<Item = (Word, Scalar)>,
    {
        Ok(NCElement {
            pres: pres.clone(),
            terms: pres.normal_form_terms(terms)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the empty word.
    pub fn scalar_part(&self) -> Scalar {
        self.terms
            .get(&Word::empty())
            .cloned()
            .unwrap_or_else(|| self.pres.field.zero())
    }

    /// True when the element is a scalar multiple of 1.
    pub fn is_scalar(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&Word::empty()))
    }

    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms
            .get(w)
            .cloned()
            .unwrap_or_else(|| self.pres.field.zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.len()).max()
    }

    fn same_pres(&self, other: &NCElement) {
        assert!(
            Arc::ptr_eq(&self.pres, &other.pres),
            "elements of different presentations"
        );
    }

    pub fn add(&self, other: &NCElement) -> NCElement {
        self.same_pres(other);
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            match terms.entry(w.clone()) {
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = &*e.get() + c;
                    if s.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = s;
                    }
                }
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
            }
        }
        NCElement {
            pres: self.pres.clone(),
            terms,
        }
    }

    pub fn neg(&self) -> NCElement {
        NCElement {
            pres: self.pres.clone(),
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &NCElement) -> NCElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> NCElement {
        if c.is_zero() {
            return NCElement::zero(&self.pres);
        }
        NCElement {
            pres: self.pres.clone(),
            terms: self.terms.iter().map(|(w, k)| (w.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &NCElement) -> Result<NCElement> {
        self.same_pres(other);
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                raw.push((w1.concat(w2), c1 * c2));
            }
        }
        NCElement::from_terms(&self.pres, raw)
    }

    pub fn pow(&self, k: u32) -> Result<NCElement> {
        let mut acc = NCElement::one(&self.pres);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Invert a single-term element whose letters all have declared inverses.
    pub fn invert_monomial(&self) -> Result<NCElement> {
        if self.terms.len() != 1 {
            return Err(Error::NotInvertible(format!(
                "not a monomial: {}",
                self
            )));
        }
        let (w, c) = self.terms.iter().next().unwrap();
        let mut inv_letters = Vec::with_capacity(w.len());
        for &g in w.0.iter().rev() {
            let gi = self.pres.inverse_of(g).ok_or_else(|| {
                Error::NotInvertible(format!(
                    "generator {} has no declared inverse",
                    self.pres.gen_name(g)
                ))
            })?;
            inv_letters.push(gi);
        }
        let candidate = NCElement::monomial(
            &self.pres,
            Word(inv_letters),
            self.pres.field.one(),
        )?;
        // w · candidate normalizes to mu · 1; the inverse is (c·mu)^{-1} candidate.
        let prod = self.mul(&candidate)?;
        if !prod.is_scalar() || prod.is_zero() {
            return Err(Error::NotInvertible(format!(
                "monomial times formal inverse is not scalar: {}",
                prod
            )));
        }
        let mu = prod.scalar_part();
        let scale = mu.inv_in(&self.pres.field)?;
        let _ = c;
        Ok(candidate.scale(&scale))
    }

    /// Multiplicative extension of a generator map into `target`.
    pub fn map_generators(
        &self,
        target: &Arc<Presentation>,
        images: &[NCElement],
    ) -> Result<NCElement> {
        let mut acc = NCElement::zero(target);
        for (w, c) in &self.terms {
            let mut prod = NCElement::scalar(target, c.clone());
            for &g in &w.0 {
                prod = prod.mul(&images[g as usize])?;
            }
            acc = acc.add(&prod);
        }
        Ok(acc)
    }

    /// Anti-multiplicative extension (images multiplied in reversed order).
    pub fn map_generators_reversed(
        &self,
        target: &Arc<Presentation>,
        images: &[NCElement],
    ) -> Result<NCElement> {
        let mut acc = NCElement::zero(target);
        for (w, c) in &self.terms {
            let mut prod = NCElement::scalar(target, c.clone());
            for &g in w.0.iter().rev() {
                prod = prod.mul(&images[g as usize])?;
            }
            acc = acc.add(&prod);
        }
        Ok(acc)
    }
}

/// A generator map between presentations, i.e. a candidate algebra morphism.
#[derive(Clone)]
pub struct GenMap {
    pub source: Arc<Presentation>,
    pub target: Arc<Presentation>,
    pub images: Vec<NCElement>,
}

#[derive(Debug, Clone)]
pub struct MorphismReport {
    pub violations: Vec<String>,
}

impl MorphismReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GenMap {
    pub fn new(
        source: &Arc<Presentation>,
        target: &Arc<Presentation>,
        images: Vec<NCElement>,
    ) -> Result<GenMap> {
        if images.len() != source.gens.len() {
            return Err(Error::invalid(format!(
                "expected {} generator images, got {}",
                source.gens.len(),
                images.len()
            )));
        }
        for im in &images {
            if !Arc::ptr_eq(&im.pres, target) {
                return Err(Error::invalid("image element in wrong presentation"));
            }
        }
        Ok(GenMap {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn apply(&self, x: &NCElement) -> Result<NCElement> {
        assert!(Arc::ptr_eq(&x.pres, &self.source));
        x.map_generators(&self.target, &self.images)
    }

    pub fn apply_word(&self, w: &Word) -> Result<NCElement> {
        let mut prod = NCElement::one(&self.target);
        for &g in &w.0 {
            prod = prod.mul(&self.images[g as usize])?;
        }
        Ok(prod)
    }

    /// Check that every defining relation of the source maps to zero, i.e.
    /// image(lhs) - image(rhs) normalizes to 0 in the target.
    pub fn check_morphism(&self) -> Result<MorphismReport> {
        let mut violations = Vec::new();
        for rule in &self.source.rules {
            let lw = rule.lhs.as_word();
            let lhs_img = self.apply_word(&lw)?;
            let mut rhs_img = NCElement::zero(&self.target);
            for (w, c) in &rule.rhs {
                rhs_img = rhs_img.add(&self.apply_word(w)?.scale(c));
            }
            let diff = lhs_img.sub(&rhs_img);
            if !diff.is_zero() {
                violations.push(format!(
                    "relation {} -> ... violated: residual {}",
                    self.source.display_word(&lw),
                    diff
                ));
            }
        }
        Ok(MorphismReport { violations })
    }
}

/// Tensor product of presentations: factor generators in declaration order,
/// original rules within each factor, and plain swap rules letting later
/// factors' letters move right past earlier factors' letters.
pub fn tensor_product(factors: &[&Arc<Presentation>]) -> Result<Arc<Presentation>> {
    assert!(!factors.is_empty());
    let field = factors[0].field.clone();
    for f in factors {
        if f.field != field {
            return Err(Error::invalid("tensor factors over different fields"));
        }
        if !f.splits.is_empty() {
            return Err(Error::invalid("tensor factors must be plain presentations"));
        }
    }
    let mut b = PresentationBuilder::new(field.clone());
    let mut offsets = Vec::with_capacity(factors.len());
    let mut splits = Vec::new();
    for f in factors {
        let off = b.gens.len() as GenId;
        offsets.push(off);
        if off != 0 {
            splits.push(off as usize);
        }
        for g in &f.gens {
            b.gens.push(Generator {
                name: g.name.clone(),
                inverse_of: g.inverse_of.map(|i| i + off),
            });
        }
    }
    // Internal rules, shifted.
    for (k, f) in factors.iter().enumerate() {
        let off = offsets[k];
        for r in &f.rules {
            let lhs = match r.lhs {
                Lhs::Pair(a, bb) => Lhs::Pair(a + off, bb + off),
                Lhs::Power(g, kk) => Lhs::Power(g + off, kk),
            };
            let rhs = r
                .rhs
                .iter()
                .map(|(w, c)| (Word(w.0.iter().map(|&g| g + off).collect()), c.clone()))
                .collect();
            b.push_rule(lhs, rhs)?;
        }
    }
    // Cross-factor swaps: a later-factor letter commutes past an earlier one.
    for i in 0..factors.len() {
        for j in (i + 1)..factors.len() {
            for gi in 0..factors[i].gens.len() as GenId {
                for gj in 0..factors[j].gens.len() as GenId {
                    let a = offsets[j] + gj;
                    let bb = offsets[i] + gi;
                    b.rule(a, bb, vec![(Word(vec![bb, a]), field.one())])?;
                }
            }
        }
    }
    b.splits = splits;
    // Tensor products of confluent factors with plain swaps stay confluent;
    // verify anyway at the default bound.
    b.build()
}

/// Embed an element of `factor`'s presentation as factor `k` of the tensor
/// presentation (all other factors carrying 1).
pub fn tensor_embed(
    x: &NCElement,
    tensor: &Arc<Presentation>,
    k: usize,
) -> Result<NCElement> {
    let mut bounds = vec![0usize];
    bounds.extend_from_slice(&tensor.splits);
    bounds.push(tensor.gens.len());
    let off = bounds[k] as GenId;
    let terms: Vec<(Word, Scalar)> = x
        .terms
        .iter()
        .map(|(w, c)| (Word(w.0.iter().map(|&g| g + off).collect()), c.clone()))
        .collect();
    NCElement::from_terms(tensor, terms)
}

/// x ⊗ y ⊗ ... as an element of the tensor presentation.
pub fn tensor_element(tensor: &Arc<Presentation>, parts: &[&NCElement]) -> Result<NCElement> {
    assert_eq!(parts.len(), tensor.factor_count());
    let mut acc = NCElement::one(tensor);
    for (k, p) in parts.iter().enumerate() {
        acc = acc.mul(&tensor_embed(p, tensor, k)?)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Element expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum ETok {
    Gen(GenId),
    Int(i64),
    Q,
    Zeta,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex_element(input: &str, pres: &Presentation) -> Result<Vec<ETok>> {
    // Longest-match generator names first, then scalars and operators.
    let mut names: Vec<(usize, GenId)> = pres
        .gens
        .iter()
        .enumerate()
        .map(|(i, g)| (g.name.len(), i as GenId))
        .collect();
    names.sort_by(|a, b| b.0.cmp(&a.0));
    let bytes = input.as_bytes();
    let mut pos = 0;
    let mut toks = Vec::new();
    'outer: while pos < bytes.len() {
        let c = bytes[pos] as char;
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        for &(len, id) in &names {
            if pos + len <= bytes.len() && &input[pos..pos + len] == pres.gen_name(id) {
                toks.push(ETok::Gen(id));
                pos += len;
                continue 'outer;
            }
        }
        match c {
            '0'..='9' => {
                let start = pos;
                while pos < bytes.len() && (bytes[pos] as char).is_ascii_digit() {
                    pos += 1;
                }
                let v: i64 = input[start..pos]
                    .parse()
                    .map_err(|_| Error::parse("integer literal overflows"))?;
                toks.push(ETok::Int(v));
            }
            '+' => {
                toks.push(ETok::Plus);
                pos += 1;
            }
            '-' => {
                toks.push(ETok::Minus);
                pos += 1;
            }
            '*' => {
                toks.push(ETok::Star);
                pos += 1;
            }
            '/' => {
                toks.push(ETok::Slash);
                pos += 1;
            }
            '^' => {
                toks.push(ETok::Caret);
                pos += 1;
            }
            '(' => {
                toks.push(ETok::LParen);
                pos += 1;
            }
            ')' => {
                toks.push(ETok::RParen);
                pos += 1;
            }
            _ => {
                // Reserved scalar names.
                if input[pos..].starts_with("zeta") {
                    toks.push(ETok::Zeta);
                    pos += 4;
                } else if c == 'q' {
                    toks.push(ETok::Q);
                    pos += 1;
                } else {
                    return Err(Error::parse(format!(
                        "unexpected character {c:?} in element expression {input:?}"
                    )));
                }
            }
        }
    }
    Ok(toks)
}

struct EParser<'a> {
    toks: Vec<ETok>,
    pos: usize,
    pres: &'a Arc<Presentation>,
}

impl<'a> EParser<'a> {
    fn peek(&self) -> Option<&ETok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &ETok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<NCElement> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&ETok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(&ETok::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(ETok::Gen(_)) | Some(ETok::Int(_)) | Some(ETok::Q) | Some(ETok::Zeta)
                | Some(ETok::LParen)
        )
    }

    fn term(&mut self) -> Result<NCElement> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&ETok::Star) {
                acc = acc.mul(&self.factor()?)?;
            } else if self.eat(&ETok::Slash) {
                let d = self.factor()?;
                if !d.is_scalar() {
                    return Err(Error::parse("division only by scalar factors"));
                }
                let inv = d.scalar_part().inv_in(&self.pres.field)?;
                acc = acc.scale(&inv);
            } else if self.starts_factor() {
                acc = acc.mul(&self.factor()?)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<NCElement> {
        let mut negate = false;
        while self.eat(&ETok::Minus) {
            negate = !negate;
        }
        let base = self.primary()?;
        let val = if self.eat(&ETok::Caret) {
            let e = self.exponent()?;
            if e >= 0 {
                base.pow(e as u32)?
            } else {
                base.invert_monomial()?.pow((-e) as u32)?
            }
        } else {
            base
        };
        Ok(if negate { val.neg() } else { val })
    }

    fn exponent(&mut self) -> Result<i64> {
        let mut neg = false;
        while self.eat(&ETok::Minus) {
            neg = !neg;
        }
        match self.toks.get(self.pos).cloned() {
            Some(ETok::Int(v)) => {
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            other => Err(Error::parse(format!(
                "expected integer exponent, found {other:?}"
            ))),
        }
    }

    fn primary(&mut self) -> Result<NCElement> {
        match self.toks.get(self.pos).cloned() {
            Some(ETok::Gen(g)) => {
                self.pos += 1;
                Ok(NCElement::generator(self.pres, g))
            }
            Some(ETok::Int(v)) => {
                self.pos += 1;
                Ok(NCElement::scalar(self.pres, self.pres.field.from_i64(v)))
            }
            Some(ETok::Q) => {
                self.pos += 1;
                Ok(NCElement::scalar(self.pres, self.pres.field.q()))
            }
            Some(ETok::Zeta) => {
                self.pos += 1;
                match self.pres.field.kind {
                    crate::scalars::FieldKind::Cyclotomic { .. } => {
                        Ok(NCElement::scalar(self.pres, self.pres.field.q()))
                    }
                    _ => Err(Error::parse(
                        "'zeta' is only meaningful in a root-of-unity field",
                    )),
                }
            }
            Some(ETok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(&ETok::RParen) {
                    return Err(Error::parse("expected ')' in element expression"));
                }
                Ok(e)
            }
            other => Err(Error::parse(format!(
                "expected a value in element expression, found {other:?}"
            ))),
        }
    }
}

/// Parse an element expression like `q*st`, `t^2/(1+q)`, `u^-1*v - 1`.
/// Generator names match longest-first; `q` and `zeta` denote scalars.
pub fn parse_element(input: &str, pres: &Arc<Presentation>) -> Result<NCElement> {
    let toks = lex_element(input, pres)?;
    if toks.is_empty() {
        return Err(Error::parse("empty element expression"));
    }
    let mut p = EParser {
        toks,
        pos: 0,
        pres,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(format!(
            "trailing input in element expression {input:?}"
        )));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// JSON presentation files
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct PresentationFile {
    #[serde(default)]
    field: Option<String>,
    generators: Vec<String>,
    #[serde(default)]
    inverses: BTreeMap<String, String>,
    #[serde(default)]
    order: Option<Vec<String>>,
    #[serde(default)]
    rules: Vec<RuleFile>,
    #[serde(default)]
    power_rules: Vec<PowerRuleFile>,
}

#[derive(Deserialize)]
struct RuleFile {
    lhs: String,
    rhs: String,
}

#[derive(Deserialize)]
struct PowerRuleFile {
    gen: String,
    exponent: u32,
    rhs: String,
}

/// Load a presentation from its JSON description. The field defaults to an
/// indeterminate q; rules' sides use the element-expression grammar.
pub fn presentation_from_json(text: &str) -> Result<Arc<Presentation>> {
    let file: PresentationFile =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("presentation JSON: {e}")))?;
    let field = match &file.field {
        Some(d) => ScalarField::from_descriptor(d)?,
        None => ScalarField::rational_functions(),
    };
    // Assemble the generator name list in declaration order.
    let mut names: Vec<String> = Vec::new();
    match &file.order {
        Some(order) => {
            names = order.clone();
            for g in &file.generators {
                if !names.contains(g) {
                    return Err(Error::parse(format!(
                        "generator {g:?} missing from explicit order"
                    )));
                }
            }
            for (_, inv) in &file.inverses {
                if !names.contains(inv) {
                    return Err(Error::parse(format!(
                        "inverse {inv:?} missing from explicit order"
                    )));
                }
            }
        }
        None => {
            for g in &file.generators {
                names.push(g.clone());
                if let Some(inv) = file.inverses.get(g) {
                    names.push(inv.clone());
                }
            }
        }
    }
    for n in &names {
        if n == "q" || n == "zeta" || n.is_empty() {
            return Err(Error::parse(format!("generator name {n:?} is reserved")));
        }
    }
    let mut b = PresentationBuilder::new(field.clone());
    for n in &names {
        b.gen(n);
    }
    // Mark inverse flags and add unit rules.
    for (base, inv) in &file.inverses {
        let gb = b
            .gens
            .iter()
            .position(|g| &g.name == base)
            .ok_or_else(|| Error::parse(format!("unknown generator {base:?} in inverses")))?
            as GenId;
        let gi = b
            .gens
            .iter()
            .position(|g| &g.name == inv)
            .ok_or_else(|| Error::parse(format!("unknown generator {inv:?} in inverses")))?
            as GenId;
        b.gens[gi as usize].inverse_of = Some(gb);
        let one = field.one();
        b.push_rule(
            Lhs::Pair(gb, gi),
            vec![(Word::empty(), one.clone())],
        )?;
        b.push_rule(Lhs::Pair(gi, gb), vec![(Word::empty(), one)])?;
    }
    // Parse rules against a throwaway unchecked presentation for the lexer.
    let probe = {
        let mut pb = PresentationBuilder::new(field.clone());
        for n in &names {
            pb.gen(n);
        }
        pb.build_unchecked()
    };
    for r in &file.rules {
        let lhs = parse_element(&r.lhs, &probe)?;
        if lhs.terms.len() != 1 {
            return Err(Error::parse(format!("rule lhs {:?} must be a word", r.lhs)));
        }
        let (w, c) = lhs.terms.iter().next().unwrap();
        if !c.is_one() || w.len() != 2 {
            return Err(Error::parse(format!(
                "rule lhs {:?} must be a plain two-letter word",
                r.lhs
            )));
        }
        let rhs = parse_raw_combination(&r.rhs, &probe)?;
        b.directed_rule(w.0[0], w.0[1], rhs)?;
    }
    for r in &file.power_rules {
        let g = b
            .gens
            .iter()
            .position(|gg| gg.name == r.gen)
            .ok_or_else(|| Error::parse(format!("unknown generator {:?}", r.gen)))?
            as GenId;
        let rhs = parse_raw_combination(&r.rhs, &probe)?;
        b.power_rule(g, r.exponent, rhs)?;
    }
    b.build()
}

/// Serialize a presentation to the JSON layout accepted by
/// [`presentation_from_json`]. Unit rules for registered inverse pairs are
/// implied by the `inverses` map and not listed under `rules`.
pub fn presentation_to_json(p: &Presentation) -> serde_json::Value {
    let mut generators: Vec<String> = Vec::new();
    let mut inverses = serde_json::Map::new();
    for (id, g) in p.gens.iter().enumerate() {
        match g.inverse_of {
            Some(base) => {
                inverses.insert(
                    p.gens[base as usize].name.clone(),
                    serde_json::Value::String(g.name.clone()),
                );
            }
            None => {
                let _ = id;
                generators.push(g.name.clone());
            }
        }
    }
    let order: Vec<String> = p.gens.iter().map(|g| g.name.clone()).collect();
    let is_inverse_unit = |a: GenId, b: GenId, rhs: &[(Word, Scalar)]| {
        let paired = p.gens[a as usize].inverse_of == Some(b)
            || p.gens[b as usize].inverse_of == Some(a);
        paired && rhs.len() == 1 && rhs[0].0.is_empty() && rhs[0].1.is_one()
    };
    let mut rules = Vec::new();
    let mut power_rules = Vec::new();
    for r in &p.rules {
        let rhs_terms: BTreeMap<Word, Scalar> = r.rhs.iter().cloned().collect();
        let rhs = p.display_terms(&rhs_terms);
        match r.lhs {
            Lhs::Pair(a, b) => {
                if is_inverse_unit(a, b, &r.rhs) {
                    continue;
                }
                rules.push(serde_json::json!({
                    "lhs": p.display_word(&Word(vec![a, b])),
                    "rhs": rhs,
                }));
            }
            Lhs::Power(g, k) => {
                power_rules.push(serde_json::json!({
                    "gen": p.gens[g as usize].name.clone(),
                    "exponent": k,
                    "rhs": rhs,
                }));
            }
        }
    }
    serde_json::json!({
        "field": p.field.descriptor(),
        "generators": generators,
        "inverses": serde_json::Value::Object(inverses),
        "order": order,
        "rules": rules,
        "power_rules": power_rules,
    })
}

/// Parse an expression in a rule-free copy of the presentation, returning raw
/// (word, coefficient) terms for use as a rule right-hand side.
fn parse_raw_combination(
    input: &str,
    probe: &Arc<Presentation>,
) -> Result<Vec<(Word, Scalar)>> {
    let e = parse_element(input, probe)?;
    Ok(e.terms.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hq() -> Arc<Presentation> {
        let mut b = PresentationBuilder::new(ScalarField::rational_functions());
        let (s, _si) = b.gen_with_inverse("s");
        let t = b.gen("t");
        let q = b.field().q();
        b.swap_rule(t, s, q.clone()).unwrap(); // ts -> q st
        let qi = q.inv_in(b.field()).unwrap();
        b.swap_rule(t, _si, qi).unwrap(); // t s^-1 -> q^-1 s^-1 t
        b.build().unwrap()
    }

    #[test]
    fn normal_forms_in_hq() {
        let p = hq();
        let s = p.gen_id("s").unwrap();
        let t = p.gen_id("t").unwrap();
        // t s t s -> q^3 s^2 t^2
        let e = NCElement::monomial(&p, Word(vec![t, s, t, s]), p.field.one()).unwrap();
        let expected = NCElement::monomial(
            &p,
            Word(vec![s, s, t, t]),
            p.field.q_pow(3),
        )
        .unwrap();
        assert_eq!(e, expected);
        // s s^-1 -> 1
        let si = p.gen_id("s^-1").unwrap();
        let u = NCElement::monomial(&p, Word(vec![s, si]), p.field.one()).unwrap();
        assert!(u.is_scalar() && u.scalar_part().is_one());
    }

    #[test]
    fn presentation_json_round_trip() {
        let p = {
            let mut b = PresentationBuilder::new(ScalarField::rational_functions());
            let (s, si) = b.gen_with_inverse("s");
            let t = b.gen("t");
            let q = b.field().q();
            b.swap_rule(t, s, q.clone()).unwrap();
            b.swap_rule(t, si, q.inv_in(b.field()).unwrap()).unwrap();
            b.power_rule(t, 3, vec![]).unwrap();
            b.build().unwrap()
        };
        let text = presentation_to_json(&p).to_string();
        let p2 = presentation_from_json(&text).unwrap();
        assert_eq!(p.gens.len(), p2.gens.len());
        for (a, b) in p.gens.iter().zip(p2.gens.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.inverse_of, b.inverse_of);
        }
        assert_eq!(p.rules.len(), p2.rules.len());
        for d in 0..=4 {
            assert_eq!(
                p.normal_monomials_of_degree(d).len(),
                p2.normal_monomials_of_degree(d).len()
            );
        }
        // A mixed word must reduce identically in both.
        let w = "t^2*s*t*s^-1";
        let e1 = parse_element(w, &p).unwrap();
        let e2 = parse_element(w, &p2).unwrap();
        assert_eq!(
            p.display_terms(&e1.terms),
            p2.display_terms(&e2.terms)
        );
    }

    #[test]
    fn directed_rules_allow_ascending_pairs() {
        // x*y -> y*x + 1 has an ascending left word; the builder admits it
        // through directed_rule and rewriting still terminates.
        let mut b = PresentationBuilder::new(ScalarField::rationals_i64(2, 1).unwrap());
        let x = b.gen("x");
        let y = b.gen("y");
        let one = b.field().one();
        b.directed_rule(x, y, vec![(Word(vec![y, x]), one.clone()), (Word::empty(), one)])
            .unwrap_err();
        // y*x is deg-lex larger than x*y, so that orientation is rejected;
        // the valid one rewrites y*x instead.
        let one = b.field().one();
        b.directed_rule(y, x, vec![(Word(vec![x, y]), one.clone()), (Word::empty(), one)])
            .unwrap();
        let p = b.build().unwrap();
        let e = parse_element("y*x - x*y", &p).unwrap();
        assert!(e.is_scalar() && e.scalar_part().is_one());
    }

    #[test]
    fn multiply_is_associative() {
        let p = hq();
        let x = parse_element("s + t", &p).unwrap();
        let y = parse_element("q*t*s^-1 - 2", &p).unwrap();
        let z = parse_element("s^2 + t^2", &p).unwrap();
        let a = x.mul(&y).unwrap().mul(&z).unwrap();
        let b = x.mul(&y.mul(&z).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn broken_system_reported() {
        let mut b = PresentationBuilder::new(ScalarField::rational_functions());
        let s = b.gen("s");
        let t = b.gen("t");
        let q = b.field().q();
        b.rule(t, s, vec![(Word(vec![s, t]), b.field().one())]).unwrap();
        b.rule(t, s, vec![(Word(vec![s, t]), q)]).unwrap();
        let p = b.build_unchecked();
        let report = p.check_local_confluence(3).unwrap();
        assert!(!report.confluent());
    }

    #[test]
    fn tensor_square_display_and_product()  {
        let p = hq();
        let t2 = tensor_product(&[&p, &p]).unwrap();
        assert_eq!(t2.factor_count(), 2);
        let s = NCElement::generator(&p, p.gen_id("s").unwrap());
        let t = NCElement::generator(&p, p.gen_id("t").unwrap());
        let st = tensor_element(&t2, &[&s, &t]).unwrap();
        let ts = tensor_element(&t2, &[&t, &s]).unwrap();
        // (s⊗t)(t⊗s) = st ⊗ ts = st⊗(q st)
        let prod = st.mul(&ts).unwrap();
        let stst = tensor_element(&t2, &[&s.mul(&t).unwrap(), &t.mul(&s).unwrap()]).unwrap();
        assert_eq!(prod, stst);
        assert!(prod.to_string().contains('⊗'));
    }

    #[test]
    fn morphism_check_catches_bad_map() {
        let p = hq();
        let s = p.gen_id("s").unwrap();
        let si = p.gen_id("s^-1").unwrap();
        let t = p.gen_id("t").unwrap();
        // identity map passes
        let id = GenMap::new(
            &p,
            &p,
            (0..p.gens.len() as GenId)
                .map(|g| NCElement::generator(&p, g))
                .collect(),
        )
        .unwrap();
        assert!(id.check_morphism().unwrap().ok());
        // s -> s, t -> s violates ts = q st
        let mut images: Vec<NCElement> = (0..p.gens.len() as GenId)
            .map(|g| NCElement::generator(&p, g))
            .collect();
        images[t as usize] = NCElement::generator(&p, s);
        let bad = GenMap::new(&p, &p, images).unwrap();
        assert!(!bad.check_morphism().unwrap().ok());
        let _ = si;
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p = hq();
        for src in ["q*s*t", "s^2*t - t", "s^-1", "1 + t^3", "(1+q)*s"] {
            let e = parse_element(src, &p).unwrap();
            let again = parse_element(&e.to_string(), &p).unwrap();
            assert_eq!(e, again, "round trip for {src}");
        }
    }

    #[test]
    fn power_rules_truncate() {
        // s^3 = 1, t s = q s t, t^3 = 0 at q = zeta_3 (a Taft-style algebra)
        let f = ScalarField::cyclotomic(3).unwrap();
        let mut b = PresentationBuilder::new(f.clone());
        let s = b.gen("s");
        let t = b.gen("t");
        b.swap_rule(t, s, f.q()).unwrap();
        b.power_rule(s, 3, vec![(Word::empty(), f.one())]).unwrap();
        b.power_rule(t, 3, vec![]).unwrap();
        let p = b.build().unwrap();
        let e = NCElement::monomial(&p, Word(vec![s; 4]), p.field.one()).unwrap();
        assert_eq!(e, NCElement::generator(&p, s));
        let z = NCElement::monomial(&p, Word(vec![t; 3]), p.field.one()).unwrap();
        assert!(z.is_zero());
        // dimension 9: monomials s^a t^b with a,b <= 2
        let count: usize = (0..=4)
            .map(|d| p.normal_monomials_of_degree(d).len())
            .sum();
        assert_eq!(count, 9);
    }
}
