//! Exact bilateral sequences satisfying linear recurrences with constant
//! coefficients, and truncated power series over them with the twisted
//! product `a*X = X*shift(a)`.
//!
//! A [`CFiniteSeq`] is determined by a recurrence `c_0..c_r` (with `c_0` and
//! `c_r` nonzero, so the recurrence runs in both directions) together with a
//! window of `r` consecutive values. Sums, pointwise products, shifts and
//! reversals stay in the class, and equality of two sequences of orders `r`
//! and `s` is decided exactly by comparing `r + s` consecutive values.
//!
//! [`TwistedSeries`] is generic over its coefficients through the
//! [`SeriesCoeff`] trait, so the same series engine drives scalar sequences,
//! matrices of sequences ([`SeqMat`]), and the two-variable coefficients used
//! for the function-field embedding. Every series knows its truncation order
//! `D` (arithmetic is exact through degree `D`), and operators that lose
//! precision, like [`TwistedSeries::hat_theta`], return a series with the
//! reduced truncation so the loss is visible in the type's own bookkeeping.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::Error;
use crate::linalg::Mat;
use crate::scalars::{q_binomial, Scalar, ScalarField};
use crate::Result;

/// Default truncation order for power series when a caller does not choose
/// one: exact through degree 8.
pub const DEFAULT_TRUNCATION: usize = 8;

/// A bilateral sequence `n -> a(n)` satisfying
/// `c_0 a(n) + c_1 a(n+1) + ... + c_r a(n+r) = 0` for all integers `n`.
///
/// Stored in a canonical form: the recurrence is the unique minimal monic
/// one, and the zero sequence is `rec = [1]` with an empty window. Since
/// `c_0 != 0`, the recurrence extends the window to all of `Z` in both
/// directions.
#[derive(Debug, Clone)]
pub struct CFiniteSeq {
    field: ScalarField,
    /// Minimal monic recurrence `c_0..c_r`, `c_r = 1`, `c_0 != 0` (except for
    /// the zero sequence, stored as `[1]`).
    rec: Vec<Scalar>,
    /// Position of the first stored value.
    start: i64,
    /// Values at `start, start+1, ..., start+r-1`.
    window: Vec<Scalar>,
}

impl CFiniteSeq {
    /// Builds a sequence from a recurrence and a window of `r` consecutive
    /// values starting at position `start`. The representation is normalized:
    /// the recurrence is made monic and then minimized.
    pub fn new(
        field: &ScalarField,
        rec: Vec<Scalar>,
        start: i64,
        window: Vec<Scalar>,
    ) -> Result<CFiniteSeq> {
        if rec.is_empty() {
            return Err(Error::invalid("recurrence must have at least one coefficient"));
        }
        let r = rec.len() - 1;
        if window.len() != r {
            return Err(Error::invalid(format!(
                "recurrence of order {} needs a window of {} values, got {}",
                r,
                r,
                window.len()
            )));
        }
        if rec[0].is_zero() {
            return Err(Error::invalid(
                "leading recurrence coefficient c_0 must be invertible for a bilateral sequence",
            ));
        }
        if rec[r].is_zero() {
            return Err(Error::invalid(
                "trailing recurrence coefficient c_r must be invertible",
            ));
        }
        if window.iter().all(|v| v.is_zero()) {
            return Ok(CFiniteSeq::zero(field));
        }
        let lead_inv = rec[r].inv_in(field)?;
        let monic: Vec<Scalar> = rec.iter().map(|c| c * &lead_inv).collect();
        let seq = CFiniteSeq {
            field: field.clone(),
            rec: monic,
            start,
            window,
        };
        Ok(seq.minimized())
    }

    /// The identically-zero sequence.
    pub fn zero(field: &ScalarField) -> CFiniteSeq {
        CFiniteSeq {
            field: field.clone(),
            rec: vec![field.one()],
            start: 0,
            window: Vec::new(),
        }
    }

    /// The constant sequence `n -> c`.
    pub fn constant(field: &ScalarField, c: &Scalar) -> CFiniteSeq {
        if c.is_zero() {
            return CFiniteSeq::zero(field);
        }
        CFiniteSeq {
            field: field.clone(),
            rec: vec![-&field.one(), field.one()],
            start: 0,
            window: vec![c.clone()],
        }
    }

    /// The geometric sequence `n -> init * ratio^n`. The ratio must be
    /// invertible so the sequence extends to negative `n`.
    pub fn geometric(field: &ScalarField, ratio: &Scalar, init: &Scalar) -> Result<CFiniteSeq> {
        if ratio.is_zero() {
            return Err(Error::invalid("geometric ratio must be invertible"));
        }
        if init.is_zero() {
            return Ok(CFiniteSeq::zero(field));
        }
        Ok(CFiniteSeq {
            field: field.clone(),
            rec: vec![-ratio, field.one()],
            start: 0,
            window: vec![init.clone()],
        })
    }

    /// The sequence `n -> q^n` for the field's own `q`.
    pub fn q_power(field: &ScalarField) -> CFiniteSeq {
        CFiniteSeq::geometric(field, &field.q(), &field.one())
            .expect("q is invertible in every scalar field")
    }

    /// The sequence `n -> n`.
    pub fn integers(field: &ScalarField) -> CFiniteSeq {
        let one = field.one();
        CFiniteSeq {
            field: field.clone(),
            rec: vec![one.clone(), -&(&one + &one), one.clone()],
            start: 0,
            window: vec![field.zero(), one],
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// Order of the stored (minimal) recurrence.
    pub fn order(&self) -> usize {
        self.rec.len() - 1
    }

    /// Minimal monic recurrence coefficients `c_0..c_r`.
    pub fn recurrence(&self) -> &[Scalar] {
        &self.rec
    }

    pub fn is_zero(&self) -> bool {
        self.window.is_empty()
    }

    /// Returns the constant value if the sequence is constant.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.order() {
            0 => Some(self.field.zero()),
            1 if self.rec[0] == -&self.field.one() => Some(self.window[0].clone()),
            _ => None,
        }
    }

    /// Value at an arbitrary integer position, by running the recurrence out
    /// from the stored window.
    pub fn eval(&self, n: i64) -> Scalar {
        if self.is_zero() {
            return self.field.zero();
        }
        self.window_values(n, 1).pop().unwrap()
    }

    /// Values at `len` consecutive positions starting at `from`.
    pub fn window_values(&self, from: i64, len: usize) -> Vec<Scalar> {
        let r = self.order();
        if r == 0 {
            return vec![self.field.zero(); len];
        }
        if len == 0 {
            return Vec::new();
        }
        // March a state vector of r consecutive values until it covers the
        // requested range, then read the values off.
        let mut state: Vec<Scalar> = self.window.clone();
        let mut pos = self.start; // state holds positions pos..pos+r
        let to = from + len as i64; // exclusive
        let mut collected: BTreeMap<i64, Scalar> = BTreeMap::new();
        let record =
            |collected: &mut BTreeMap<i64, Scalar>, state: &[Scalar], pos: i64| {
                for (i, v) in state.iter().enumerate() {
                    let p = pos + i as i64;
                    if p >= from && p < to {
                        collected.insert(p, v.clone());
                    }
                }
            };
        record(&mut collected, &state, pos);
        // Extend rightward: a(pos+r) = -sum_{i<r} c_i a(pos+i)  (monic c_r=1).
        while pos + (r as i64) < to {
            let mut acc = self.field.zero();
            for i in 0..r {
                acc = &acc + &(&self.rec[i] * &state[i]);
            }
            let next = -&acc;
            state.remove(0);
            state.push(next.clone());
            pos += 1;
            let p = pos + r as i64 - 1;
            if p >= from && p < to {
                collected.insert(p, next);
            }
        }
        // Extend leftward: a(pos-1) = -(sum_{i>=1} c_i a(pos-1+i)) / c_0.
        let mut state: Vec<Scalar> = self.window.clone();
        let mut pos = self.start;
        let c0_inv = self.rec[0]
            .inv_in(&self.field)
            .expect("c_0 is invertible by construction");
        while pos > from {
            let mut acc = self.field.zero();
            for i in 1..=r {
                acc = &acc + &(&self.rec[i] * &state[i - 1]);
            }
            let prev = &(-&acc) * &c0_inv;
            state.pop();
            state.insert(0, prev.clone());
            pos -= 1;
            if pos < to {
                collected.insert(pos, prev);
            }
        }
        (from..to)
            .map(|p| collected.get(&p).cloned().unwrap_or_else(|| self.field.zero()))
            .collect()
    }

    /// The shifted sequence `n -> a(n+k)`.
    pub fn shift_by(&self, k: i64) -> CFiniteSeq {
        if self.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.start -= k;
        out
    }

    /// The shift `n -> a(n+1)`: same recurrence, window advanced one step.
    pub fn shift(&self) -> CFiniteSeq {
        self.shift_by(1)
    }

    /// The reversal `n -> a(-n)` (recurrence coefficients reversed).
    pub fn reverse(&self) -> CFiniteSeq {
        if self.is_zero() {
            return self.clone();
        }
        let r = self.order();
        let rec: Vec<Scalar> = self.rec.iter().rev().cloned().collect();
        let new_start = -(self.start + r as i64 - 1);
        let window: Vec<Scalar> = self.window.iter().rev().cloned().collect();
        CFiniteSeq::new(&self.field, rec, new_start, window)
            .expect("reversed recurrence is bilateral")
    }

    pub fn scale(&self, s: &Scalar) -> CFiniteSeq {
        if s.is_zero() || self.is_zero() {
            return CFiniteSeq::zero(&self.field);
        }
        let mut out = self.clone();
        for v in &mut out.window {
            *v = &*v * s;
        }
        out
    }

    pub fn neg(&self) -> CFiniteSeq {
        self.scale(&(-&self.field.one()))
    }

    pub fn add(&self, other: &CFiniteSeq) -> CFiniteSeq {
        assert_eq!(
            self.field.descriptor(),
            other.field.descriptor(),
            "sequence arithmetic requires a common scalar field"
        );
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // The product of the two characteristic polynomials annihilates the
        // sum, so fitting against that order bound is exact.
        let bound = self.order() + other.order();
        let start = -(bound as i64);
        let len = 2 * bound;
        let a = self.window_values(start, len);
        let b = other.window_values(start, len);
        let vals: Vec<Scalar> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        fit_from_values(&self.field, start, &vals, bound)
    }

    pub fn sub(&self, other: &CFiniteSeq) -> CFiniteSeq {
        self.add(&other.neg())
    }

    /// Pointwise product `n -> a(n) * b(n)`. The result satisfies the
    /// characteristic polynomial of the Kronecker product of the two
    /// companion matrices, of order at most `r*s`.
    pub fn hadamard(&self, other: &CFiniteSeq) -> CFiniteSeq {
        assert_eq!(
            self.field.descriptor(),
            other.field.descriptor(),
            "sequence arithmetic requires a common scalar field"
        );
        if self.is_zero() || other.is_zero() {
            return CFiniteSeq::zero(&self.field);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        // The Kronecker product of the two companion matrices gives an
        // order-r*s recurrence for the pointwise product (its characteristic
        // polynomial annihilates the tensored state vector), so fitting
        // against that order bound is exact.
        let bound = self.order() * other.order();
        let start = -(bound as i64);
        let len = 2 * bound;
        let a = self.window_values(start, len);
        let b = other.window_values(start, len);
        let vals: Vec<Scalar> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let out = fit_from_values(&self.field, start, &vals, bound);
        debug_assert!((-2..=2).all(|n| out.eval(n) == &self.eval(n) * &other.eval(n)));
        out
    }

    /// Pointwise inverse `n -> a(n)^{-1}`, when it is again a sequence of
    /// this class: the candidate recurrence is fitted from sample values and
    /// then certified exactly by checking `a * candidate = 1`. Fails if some
    /// value is zero or no recurrence of order at most `2r + 2` works.
    pub fn try_pointwise_invert(&self) -> Result<CFiniteSeq> {
        if self.is_zero() {
            return Err(Error::NotInvertible("the zero sequence".into()));
        }
        if let Some(c) = self.as_constant() {
            return Ok(CFiniteSeq::constant(&self.field, &c.inv_in(&self.field)?));
        }
        let r = self.order();
        let bound = 2 * r + 2;
        let samples = 2 * bound + 2;
        let start = -((samples / 2) as i64);
        let mut inv_vals = Vec::with_capacity(samples);
        for (i, v) in self.window_values(start, samples).into_iter().enumerate() {
            if v.is_zero() {
                return Err(Error::NotInvertible(format!(
                    "sequence vanishes at n = {}",
                    start + i as i64
                )));
            }
            inv_vals.push(v.inv_in(&self.field)?);
        }
        let not_cfinite = || {
            Error::NotInvertible(
                "pointwise inverse is not recognized by a bilateral recurrence".into(),
            )
        };
        // Guess a recurrence from the sampled inverses, then certify the
        // guess exactly: a * candidate is decidably equal to the constant 1.
        let rec = minimal_recurrence(&self.field, &inv_vals).ok_or_else(not_cfinite)?;
        let l = rec.len() - 1;
        if l > bound || l == 0 || rec[0].is_zero() {
            return Err(not_cfinite());
        }
        let candidate = CFiniteSeq {
            field: self.field.clone(),
            rec,
            start,
            window: inv_vals[..l].to_vec(),
        };
        let one = CFiniteSeq::constant(&self.field, &self.field.one());
        if self.hadamard(&candidate) == one {
            Ok(candidate)
        } else {
            Err(not_cfinite())
        }
    }

    /// Reads a sequence literal `{"recurrence": [...], "window": {"-1": ...}}`.
    /// Entries may be JSON integers or strings in the field's scalar syntax.
    pub fn from_json(field: &ScalarField, v: &Value) -> Result<CFiniteSeq> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::parse("sequence literal must be a JSON object"))?;
        let rec_v = obj
            .get("recurrence")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("sequence literal needs a \"recurrence\" array"))?;
        let rec: Vec<Scalar> = rec_v
            .iter()
            .map(|x| scalar_from_json(field, x))
            .collect::<Result<_>>()?;
        let win_v = obj
            .get("window")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::parse("sequence literal needs a \"window\" object"))?;
        let mut entries: BTreeMap<i64, Scalar> = BTreeMap::new();
        for (k, x) in win_v {
            let pos: i64 = k
                .parse()
                .map_err(|_| Error::parse(format!("window key {k:?} is not an integer")))?;
            entries.insert(pos, scalar_from_json(field, x)?);
        }
        let r = rec.len().saturating_sub(1);
        if entries.len() != r {
            return Err(Error::parse(format!(
                "recurrence of order {} needs exactly {} window values, got {}",
                r,
                r,
                entries.len()
            )));
        }
        let positions: Vec<i64> = entries.keys().copied().collect();
        for w in positions.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(Error::parse("window positions must be consecutive integers"));
            }
        }
        let start = positions.first().copied().unwrap_or(0);
        let window: Vec<Scalar> = entries.into_values().collect();
        CFiniteSeq::new(field, rec, start, window)
    }

    /// Writes the normalized representation as a sequence literal.
    pub fn to_json(&self) -> Value {
        let rec: Vec<Value> = self.rec.iter().map(|c| json!(c.to_string())).collect();
        let mut window = serde_json::Map::new();
        for (i, v) in self.window.iter().enumerate() {
            window.insert((self.start + i as i64).to_string(), json!(v.to_string()));
        }
        json!({ "recurrence": rec, "window": window })
    }

    /// Replaces the recurrence by the minimal one fitted on the window and
    /// certified by the annihilator argument: a combination satisfying the
    /// old recurrence and vanishing at `r` consecutive points is zero.
    fn minimized(self) -> CFiniteSeq {
        let r = self.order();
        if r <= 1 {
            return self;
        }
        let vals = self.window_values(self.start, 2 * r);
        fit_from_values(&self.field, self.start, &vals, r)
    }
}

/// Fits the minimal monic bilateral recurrence to sampled values, given a
/// proof that SOME recurrence of order at most `bound` annihilates the
/// sequence. Requires `vals.len() >= 2 * bound`: the minimal fit then holds
/// everywhere, because the defect combination satisfies the order-`bound`
/// recurrence and vanishes on at least `bound` consecutive points.
/// Minimality forces an invertible `c_0` (a minimal annihilator of a
/// bilateral sequence cannot lose its constant term).
fn fit_from_values(field: &ScalarField, start: i64, vals: &[Scalar], bound: usize) -> CFiniteSeq {
    assert!(vals.len() >= 2 * bound, "not enough samples to certify a fit");
    if vals.iter().all(|v| v.is_zero()) {
        return CFiniteSeq::zero(field);
    }
    let rec = minimal_recurrence(field, vals).expect("values admit a recurrence by assumption");
    let l = rec.len() - 1;
    assert!(l <= bound, "minimal fit exceeds the certified order bound");
    assert!(!rec[0].is_zero(), "minimal bilateral annihilator lost its constant term");
    CFiniteSeq {
        field: field.clone(),
        rec,
        start,
        window: vals[..l].to_vec(),
    }
}

/// Berlekamp-Massey over the scalar field: the shortest monic recurrence
/// `c_0..c_L` (returned low-to-high, `c_L = 1`) with
/// `sum_j c_j vals[n+j] = 0` for all `n + L < vals.len()`. Returns None when
/// only the trivial fit `L = vals.len()` exists... which cannot happen for
/// fewer samples than twice the true order, so callers pass enough.
fn minimal_recurrence(field: &ScalarField, vals: &[Scalar]) -> Option<Vec<Scalar>> {
    let n_total = vals.len();
    // Connection polynomial c(x) = 1 + c_1 x + ...: vals[n] = -sum c_i vals[n-i].
    let mut c = vec![field.one()];
    let mut b_poly = vec![field.one()];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut b = field.one();
    for n in 0..n_total {
        let mut d = vals[n].clone();
        for i in 1..c.len() {
            d = &d + &(&c[i] * &vals[n - i]);
        }
        if d.is_zero() {
            m += 1;
        } else {
            let coef = d.div(&b, field).expect("previous discrepancy is nonzero");
            if 2 * l <= n {
                let t = c.clone();
                if c.len() < b_poly.len() + m {
                    c.resize(b_poly.len() + m, field.zero());
                }
                for (i, bi) in b_poly.iter().enumerate() {
                    c[i + m] = &c[i + m] - &(&coef * bi);
                }
                l = n + 1 - l;
                b_poly = t;
                b = d;
                m = 1;
            } else {
                if c.len() < b_poly.len() + m {
                    c.resize(b_poly.len() + m, field.zero());
                }
                for (i, bi) in b_poly.iter().enumerate() {
                    c[i + m] = &c[i + m] - &(&coef * bi);
                }
                m += 1;
            }
        }
    }
    if 2 * l > n_total {
        return None;
    }
    // Recurrence coefficients are the connection polynomial reversed.
    c.resize(l + 1, field.zero());
    let rec: Vec<Scalar> = c.into_iter().rev().collect();
    debug_assert!((0..n_total - l).all(|n| {
        let mut acc = field.zero();
        for (j, r) in rec.iter().enumerate() {
            acc = &acc + &(r * &vals[n + j]);
        }
        acc.is_zero()
    }));
    Some(rec)
}

impl PartialEq for CFiniteSeq {
    /// Exact equality, decided on `r + s` consecutive values.
    fn eq(&self, other: &CFiniteSeq) -> bool {
        if self.field.descriptor() != other.field.descriptor() {
            return false;
        }
        let n = self.order() + other.order();
        if n == 0 {
            return true;
        }
        let start = -((n / 2) as i64);
        self.window_values(start, n) == other.window_values(start, n)
    }
}

impl fmt::Display for CFiniteSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_constant() {
            return write!(f, "{c}");
        }
        if self.order() == 1 {
            let ratio = -&self.rec[0];
            let init = self.eval(0);
            if init.is_one() {
                return write!(f, "({ratio})^n");
            }
            return write!(f, "{init}*({ratio})^n");
        }
        let rec: Vec<String> = self.rec.iter().map(|c| c.to_string()).collect();
        let win: Vec<String> = self.window.iter().map(|v| v.to_string()).collect();
        write!(
            f,
            "seq(rec=[{}], at n={}: [{}])",
            rec.join(", "),
            self.start,
            win.join(", ")
        )
    }
}

fn scalar_from_json(field: &ScalarField, v: &Value) -> Result<Scalar> {
    match v {
        Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| Error::parse(format!("{n} is not an exact integer")))?;
            Ok(field.from_i64(i))
        }
        Value::String(s) => field.parse(s),
        other => Err(Error::parse(format!(
            "expected a number or scalar string, got {other}"
        ))),
    }
}

/// A matrix whose entries are bilateral sequences: the value at `n` is the
/// scalar matrix of entry values. Products combine matrix structure with
/// pointwise (Hadamard) products of the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqMat {
    field: ScalarField,
    rows: usize,
    cols: usize,
    entries: Vec<CFiniteSeq>,
}

impl SeqMat {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> CFiniteSeq,
        field: &ScalarField,
    ) -> SeqMat {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        SeqMat {
            field: field.clone(),
            rows,
            cols,
            entries,
        }
    }

    /// Constant matrix sequence `n -> m`.
    pub fn constant(m: &Mat, field: &ScalarField) -> SeqMat {
        SeqMat::from_fn(
            m.rows,
            m.cols,
            |i, j| CFiniteSeq::constant(field, &m[(i, j)]),
            field,
        )
    }

    pub fn zero(rows: usize, cols: usize, field: &ScalarField) -> SeqMat {
        SeqMat::from_fn(rows, cols, |_, _| CFiniteSeq::zero(field), field)
    }

    pub fn identity(n: usize, field: &ScalarField) -> SeqMat {
        let one = field.one();
        SeqMat::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    CFiniteSeq::constant(field, &one)
                } else {
                    CFiniteSeq::zero(field)
                }
            },
            field,
        )
    }

    /// The matrix-power sequence `n -> a^n` for an invertible square matrix,
    /// stored entrywise with the characteristic polynomial of `a` as the
    /// common recurrence (no eigenvalue factorization needed).
    pub fn power_sequence(a: &Mat, field: &ScalarField) -> Result<SeqMat> {
        if !a.is_square() {
            return Err(Error::invalid("matrix powers need a square matrix"));
        }
        let n = a.rows;
        let rec = a.charpoly(field);
        if rec[0].is_zero() {
            return Err(Error::NotInvertible(
                "matrix is singular, so negative powers do not exist".into(),
            ));
        }
        // Window: entries of a^0 .. a^{n-1}.
        let mut powers = Vec::with_capacity(n);
        let mut p = Mat::identity(n, field);
        for _ in 0..n {
            powers.push(p.clone());
            p = &p * a;
        }
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let window: Vec<Scalar> = powers.iter().map(|m| m[(i, j)].clone()).collect();
                out.push(CFiniteSeq::new(field, rec.clone(), 0, window)?);
            }
        }
        Ok(SeqMat {
            field: field.clone(),
            rows: n,
            cols: n,
            entries: out,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn entry(&self, i: usize, j: usize) -> &CFiniteSeq {
        &self.entries[i * self.cols + j]
    }

    /// The scalar matrix of values at position `n`.
    pub fn eval(&self, n: i64) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval(n))
    }

    pub fn add(&self, o: &SeqMat) -> SeqMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        SeqMat::from_fn(
            self.rows,
            self.cols,
            |i, j| self.entry(i, j).add(o.entry(i, j)),
            &self.field,
        )
    }

    pub fn sub(&self, o: &SeqMat) -> SeqMat {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> SeqMat {
        SeqMat::from_fn(
            self.rows,
            self.cols,
            |i, j| self.entry(i, j).neg(),
            &self.field,
        )
    }

    pub fn mul(&self, o: &SeqMat) -> SeqMat {
        assert_eq!(self.cols, o.rows, "matrix dimensions do not match");
        SeqMat::from_fn(
            self.rows,
            o.cols,
            |i, j| {
                let mut acc = CFiniteSeq::zero(&self.field);
                for k in 0..self.cols {
                    acc = acc.add(&self.entry(i, k).hadamard(o.entry(k, j)));
                }
                acc
            },
            &self.field,
        )
    }

    pub fn scale(&self, s: &Scalar) -> SeqMat {
        SeqMat::from_fn(
            self.rows,
            self.cols,
            |i, j| self.entry(i, j).scale(s),
            &self.field,
        )
    }

    pub fn shift(&self) -> SeqMat {
        self.shift_by(1)
    }

    pub fn shift_by(&self, k: i64) -> SeqMat {
        SeqMat::from_fn(
            self.rows,
            self.cols,
            |i, j| self.entry(i, j).shift_by(k),
            &self.field,
        )
    }

    pub fn transpose(&self) -> SeqMat {
        SeqMat::from_fn(self.cols, self.rows, |i, j| self.entry(j, i).clone(), &self.field)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(CFiniteSeq::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == SeqMat::identity(self.rows, &self.field)
    }

    /// Pointwise matrix inverse `n -> m(n)^{-1}` via the adjugate identity
    /// `m * adj(m) = det(m) * I`, which holds entrywise in the commutative
    /// ring of sequences; only the determinant needs a pointwise inverse.
    pub fn try_invert(&self) -> Result<SeqMat> {
        if self.rows != self.cols {
            return Err(Error::invalid("only square matrix sequences can be inverted"));
        }
        let det = self.det();
        let det_inv = det.try_pointwise_invert()?;
        let n = self.rows;
        let out = SeqMat::from_fn(
            n,
            n,
            |i, j| {
                let minor = self.minor_det(j, i);
                let sign = if (i + j) % 2 == 0 {
                    minor
                } else {
                    minor.neg()
                };
                sign.hadamard(&det_inv)
            },
            &self.field,
        );
        Ok(out)
    }

    /// Pointwise determinant, by cofactor expansion over the sequence ring.
    pub fn det(&self) -> CFiniteSeq {
        assert!(self.rows == self.cols, "determinant of a square matrix only");
        det_rec(&(0..self.rows).collect::<Vec<_>>(), &(0..self.cols).collect::<Vec<_>>(), self)
    }

    fn minor_det(&self, drop_row: usize, drop_col: usize) -> CFiniteSeq {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != drop_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != drop_col).collect();
        det_rec(&rows, &cols, self)
    }
}

fn det_rec(rows: &[usize], cols: &[usize], m: &SeqMat) -> CFiniteSeq {
    let field = m.field();
    match rows.len() {
        0 => CFiniteSeq::constant(field, &field.one()),
        1 => m.entry(rows[0], cols[0]).clone(),
        _ => {
            let mut acc = CFiniteSeq::zero(field);
            let sub_rows = &rows[1..];
            for (k, &c) in cols.iter().enumerate() {
                let e = m.entry(rows[0], c);
                if e.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> =
                    cols.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
                let term = e.hadamard(&det_rec(sub_rows, &sub_cols, m));
                acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

impl fmt::Display for SeqMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let cells: Vec<String> =
                    (0..self.cols).map(|j| self.entry(i, j).to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// What a twisted power series needs from its coefficients: a commutative-in-
/// `n` but possibly matrix-valued ring with the shift endomorphism and exact
/// equality. The shift is where the twist `a*X = X*shift(a)` comes from.
pub trait SeriesCoeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn field(&self) -> &ScalarField;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// The shift automorphism applied to the coefficient.
    fn shift(&self) -> Self;
    fn scale(&self, s: &Scalar) -> Self;
    fn is_zero(&self) -> bool;
    /// Additive identity of the same shape and field.
    fn zero_like(&self) -> Self;
    /// Multiplicative identity of the same shape and field.
    fn one_like(&self) -> Self;
    fn try_invert(&self) -> Result<Self>;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

impl SeriesCoeff for CFiniteSeq {
    fn field(&self) -> &ScalarField {
        self.field()
    }
    fn add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn neg(&self) -> Self {
        self.neg()
    }
    fn mul(&self, o: &Self) -> Self {
        self.hadamard(o)
    }
    fn shift(&self) -> Self {
        self.shift()
    }
    fn scale(&self, s: &Scalar) -> Self {
        self.scale(s)
    }
    fn is_zero(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        CFiniteSeq::zero(self.field())
    }
    fn one_like(&self) -> Self {
        CFiniteSeq::constant(self.field(), &self.field().one())
    }
    fn try_invert(&self) -> Result<Self> {
        self.try_pointwise_invert()
    }
}

impl SeriesCoeff for SeqMat {
    fn field(&self) -> &ScalarField {
        self.field()
    }
    fn add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn neg(&self) -> Self {
        self.neg()
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn shift(&self) -> Self {
        self.shift()
    }
    fn scale(&self, s: &Scalar) -> Self {
        self.scale(s)
    }
    fn is_zero(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        SeqMat::zero(self.rows, self.cols, self.field())
    }
    fn one_like(&self) -> Self {
        assert!(
            self.rows == self.cols,
            "multiplicative identity needs a square matrix shape"
        );
        SeqMat::identity(self.rows, self.field())
    }
    fn try_invert(&self) -> Result<Self> {
        self.try_invert()
    }
}

/// A power series `a_0 + X a_1 + ... + X^D a_D + O(X^{D+1})` in a variable
/// `X` twisted past coefficients by the shift: `a * X = X * shift(a)`.
/// Arithmetic is exact through degree `D` (the truncation order); operations
/// that combine different truncations keep the smaller one, and
/// [`hat_theta`](TwistedSeries::hat_theta) reports its loss by returning
/// truncation `D - l`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedSeries<C: SeriesCoeff> {
    coeffs: Vec<C>, // length D + 1 >= 1
}

impl<C: SeriesCoeff> TwistedSeries<C> {
    pub fn new(coeffs: Vec<C>) -> TwistedSeries<C> {
        assert!(!coeffs.is_empty(), "a series needs at least the degree-0 coefficient");
        TwistedSeries { coeffs }
    }

    /// The constant series `c + O(X^{d+1})`.
    pub fn constant(c: C, d: usize) -> TwistedSeries<C> {
        let mut coeffs = vec![c.zero_like(); d + 1];
        coeffs[0] = c;
        TwistedSeries { coeffs }
    }

    /// The series `X + O(X^{d+1})`; `proto` supplies shape and field.
    pub fn variable(proto: &C, d: usize) -> TwistedSeries<C> {
        assert!(d >= 1, "the variable needs truncation order at least 1");
        let mut coeffs = vec![proto.zero_like(); d + 1];
        coeffs[1] = proto.one_like();
        TwistedSeries { coeffs }
    }

    pub fn one(proto: &C, d: usize) -> TwistedSeries<C> {
        TwistedSeries::constant(proto.one_like(), d)
    }

    pub fn zero(proto: &C, d: usize) -> TwistedSeries<C> {
        TwistedSeries::constant(proto.zero_like(), d)
    }

    /// Truncation order `D`: coefficients are exact for degrees `0..=D`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &C {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn field(&self) -> &ScalarField {
        self.coeffs[0].field()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(C::is_zero)
    }

    /// Drops precision down to truncation order `d`.
    pub fn truncate(&self, d: usize) -> TwistedSeries<C> {
        assert!(d <= self.truncation(), "cannot invent precision");
        TwistedSeries {
            coeffs: self.coeffs[..=d].to_vec(),
        }
    }

    pub fn add(&self, o: &TwistedSeries<C>) -> TwistedSeries<C> {
        let d = self.truncation().min(o.truncation());
        TwistedSeries {
            coeffs: (0..=d).map(|i| self.coeffs[i].add(&o.coeffs[i])).collect(),
        }
    }

    pub fn sub(&self, o: &TwistedSeries<C>) -> TwistedSeries<C> {
        let d = self.truncation().min(o.truncation());
        TwistedSeries {
            coeffs: (0..=d).map(|i| self.coeffs[i].sub(&o.coeffs[i])).collect(),
        }
    }

    pub fn neg(&self) -> TwistedSeries<C> {
        TwistedSeries {
            coeffs: self.coeffs.iter().map(C::neg).collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> TwistedSeries<C> {
        TwistedSeries {
            coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// Twisted product: `(X^i a)(X^j b) = X^{i+j} shift^j(a) b`, truncated at
    /// the smaller of the two truncation orders.
    pub fn mul(&self, o: &TwistedSeries<C>) -> TwistedSeries<C> {
        let d = self.truncation().min(o.truncation());
        // shifted[j][i] = shift^j(a_i), built incrementally.
        let mut shifted: Vec<Vec<C>> = Vec::with_capacity(d + 1);
        shifted.push(self.coeffs[..=d].to_vec());
        for j in 1..=d {
            let prev = &shifted[j - 1];
            let row: Vec<C> = prev[..=(d - j)].iter().map(C::shift).collect();
            shifted.push(row);
        }
        let coeffs: Vec<C> = (0..=d)
            .map(|k| {
                let mut acc = self.coeffs[0].zero_like();
                for j in 0..=k {
                    let i = k - j;
                    let b = &o.coeffs[j];
                    if b.is_zero() || shifted[j][i].is_zero() {
                        continue;
                    }
                    acc = acc.add(&shifted[j][i].mul(b));
                }
                acc
            })
            .collect();
        TwistedSeries { coeffs }
    }

    /// The ring automorphism induced by the shift:
    /// `sum X^i a_i -> sum X^i q^i shift(a_i)`.
    pub fn hat_sigma(&self) -> TwistedSeries<C> {
        let field = self.field().clone();
        TwistedSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| a.shift().scale(&field.q_pow(i as i64)))
                .collect(),
        }
    }

    /// The `l`-th divided-power operator:
    /// `sum X^i a_i -> sum X^i binom(i+l, l)_q a_{i+l}`, with the binomial
    /// always evaluated from its polynomial form. The result is only exact
    /// through degree `D - l`, and that is the truncation it carries.
    pub fn hat_theta(&self, l: usize) -> Result<TwistedSeries<C>> {
        let d = self.truncation();
        if l > d {
            return Err(Error::invalid(format!(
                "operator order {l} exceeds series truncation {d}: no exact coefficients remain"
            )));
        }
        let field = self.field().clone();
        let coeffs: Vec<C> = (0..=(d - l))
            .map(|i| {
                let c = q_binomial((i + l) as u32, l as u32, &field);
                self.coeffs[i + l].scale(&c)
            })
            .collect();
        Ok(TwistedSeries { coeffs })
    }

    /// Two-sided inverse modulo `X^{D+1}`, by the twisted geometric series:
    /// with `T = a_0^{-1} S - 1` (so `T` has no constant term),
    /// `S^{-1} = (1 - T + T^2 - ...) a_0^{-1}`.
    pub fn try_invert(&self) -> Result<TwistedSeries<C>> {
        let d = self.truncation();
        let a0_inv = self.coeffs[0].try_invert().map_err(|e| match e {
            Error::NotInvertible(msg) => {
                Error::NotInvertible(format!("series constant term: {msg}"))
            }
            other => other,
        })?;
        let a0_inv_series = TwistedSeries::constant(a0_inv.clone(), d);
        let mut t = a0_inv_series.mul(self);
        t.coeffs[0] = t.coeffs[0].zero_like();
        // Horner form of 1 - T + T^2 - ...: G = 1 - T*G, D times.
        let one = TwistedSeries::one(&self.coeffs[0], d);
        let mut g = one.clone();
        for _ in 0..d {
            g = one.sub(&t.mul(&g));
        }
        Ok(g.mul(&a0_inv_series))
    }
}

impl<C: SeriesCoeff> fmt::Display for TwistedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let cs = if needs_parens(&s) { format!("({s})") } else { s };
            match i {
                0 => parts.push(cs),
                1 => parts.push(format!("X*{cs}")),
                _ => parts.push(format!("X^{i}*{cs}")),
            }
        }
        parts.push(format!("O(X^{})", self.truncation() + 1));
        write!(f, "{}", parts.join(" + "))
    }
}

fn needs_parens(s: &str) -> bool {
    s.chars().any(|c| c.is_whitespace() || c == '+' || c == '*' || c == '[')
        || s.chars().skip(1).any(|c| c == '-')
        || s.starts_with('-')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> ScalarField {
        ScalarField::rationals_i64(5, 3).unwrap()
    }

    #[test]
    fn window_extension_both_directions() {
        let field = f();
        let fib = CFiniteSeq::new(
            &field,
            vec![-&field.one(), -&field.one(), field.one()],
            0,
            vec![field.from_i64(0), field.from_i64(1)],
        )
        .unwrap();
        assert_eq!(fib.eval(10), field.from_i64(55));
        // Bilateral extension: fib(-n) = (-1)^{n+1} fib(n).
        assert_eq!(fib.eval(-8), field.from_i64(-21));
    }

    #[test]
    fn normalization_minimizes_and_detects_constants() {
        let field = f();
        // Inflated representation of the constant 3: order-2 recurrence.
        let c = CFiniteSeq::new(
            &field,
            vec![field.from_i64(1), field.from_i64(-2), field.from_i64(1)],
            0,
            vec![field.from_i64(3), field.from_i64(3)],
        )
        .unwrap();
        assert_eq!(c.order(), 1);
        assert_eq!(c.as_constant(), Some(field.from_i64(3)));
        assert_eq!(c, CFiniteSeq::constant(&field, &field.from_i64(3)));
    }

    #[test]
    fn zero_recurrence_ends_rejected() {
        let field = f();
        let err = CFiniteSeq::new(
            &field,
            vec![field.zero(), field.one()],
            0,
            vec![field.one()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn pointwise_inverse_of_interleaved_values() {
        let field = f();
        // Period-2 sequence 2, 3, 2, 3, ...
        let a = CFiniteSeq::new(
            &field,
            vec![-&field.one(), field.zero(), field.one()],
            0,
            vec![field.from_i64(2), field.from_i64(3)],
        )
        .unwrap();
        let b = a.try_pointwise_invert().unwrap();
        assert_eq!(b.eval(0), field.ratio(1, 2));
        assert_eq!(b.eval(1), field.ratio(1, 3));
        assert_eq!(
            a.hadamard(&b),
            CFiniteSeq::constant(&field, &field.one())
        );
        // The integers are not pointwise invertible (zero value at 0).
        assert!(CFiniteSeq::integers(&field).try_pointwise_invert().is_err());
    }

    #[test]
    fn matrix_power_window_and_negative_powers() {
        let field = f();
        let a = Mat::from_rows(vec![
            vec![field.q(), field.one()],
            vec![field.zero(), field.one()],
        ]);
        let pw = SeqMat::power_sequence(&a, &field).unwrap();
        assert!(pw.eval(0).is_identity());
        assert_eq!(pw.eval(3), a.pow(3, &field));
        let a_inv = a.inverse(&field).unwrap();
        assert_eq!(pw.eval(-2), a_inv.pow(2, &field));
        let inv = pw.try_invert().unwrap();
        assert!(inv.mul(&pw).is_identity());
        assert_eq!(inv.eval(2), a_inv.pow(2, &field));
    }

    #[test]
    fn series_display_format() {
        let field = f();
        let one = CFiniteSeq::constant(&field, &field.one());
        let q = CFiniteSeq::q_power(&field);
        let s = TwistedSeries::new(vec![one, CFiniteSeq::zero(&field), q]);
        assert_eq!(s.to_string(), "1 + X^2*(5/3)^n + O(X^3)");
    }
}
