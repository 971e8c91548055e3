//! Exact scalar fields and q-combinatorics.
//!
//! Three fields are supported, each with a designated element q:
//!
//! * rationals with q a fixed nonzero rational,
//! * the cyclotomic field Q(zeta_N) with q = zeta_N (a primitive N-th root),
//! * rational functions in an indeterminate q.
//!
//! Scalars are immutable canonical values: fractions are reduced, cyclotomic
//! elements are reduced modulo the N-th cyclotomic polynomial, rational
//! functions carry a monic reduced denominator. Equality is structural.
//!
//! The q-binomials are always computed as Gaussian polynomials in an
//! indeterminate and specialized afterwards, so they stay correct at roots of
//! unity where the q-factorials themselves vanish.

mod parse;
pub mod qpoly;

use crate::error::Error;
use crate::Result;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use qpoly::{cyclotomic, poly_display, QPoly, RatFun};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub use qpoly::{br, br_ratio};

/// Which exact field scalars live in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldKind {
    /// Rationals, with the designated q a fixed nonzero rational.
    Rationals { q: BigRational },
    /// Q(zeta_n) with q = zeta_n.
    Cyclotomic { n: u32 },
    /// Rational functions in an indeterminate q.
    RationalFunctions,
}

/// An exact scalar field together with its designated element q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarField {
    pub kind: FieldKind,
    /// Degree of the cyclotomic extension (1 for the other kinds).
    ext_degree: usize,
    /// Cached modulus for cyclotomic arithmetic.
    modulus: Option<QPoly>,
}

impl ScalarField {
    pub fn rationals(q: BigRational) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::invalid("q must be nonzero"));
        }
        Ok(ScalarField {
            kind: FieldKind::Rationals { q },
            ext_degree: 1,
            modulus: None,
        })
    }

    pub fn rationals_i64(num: i64, den: i64) -> Result<Self> {
        Self::rationals(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn cyclotomic(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("cyclotomic order must be positive"));
        }
        let m = cyclotomic(n);
        let deg = m.degree().unwrap();
        Ok(ScalarField {
            kind: FieldKind::Cyclotomic { n },
            ext_degree: deg,
            modulus: Some(m),
        })
    }

    pub fn rational_functions() -> Self {
        ScalarField {
            kind: FieldKind::RationalFunctions,
            ext_degree: 1,
            modulus: None,
        }
    }

    /// Parse a field descriptor: "p/r" or "p" (rationals), "indeterminate",
    /// or "root_of_unity:N".
    pub fn from_descriptor(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "indeterminate" || s == "q" {
            return Ok(Self::rational_functions());
        }
        if let Some(rest) = s
            .strip_prefix("root_of_unity:")
            .or_else(|| s.strip_prefix("root-of-unity:"))
            .or_else(|| s.strip_prefix("zeta"))
        {
            let n: u32 = rest
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad root-of-unity order in {s:?}")))?;
            return Self::cyclotomic(n);
        }
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let n: i64 = num
            .parse()
            .map_err(|_| Error::parse(format!("bad rational q in {s:?}")))?;
        let d: i64 = den
            .parse()
            .map_err(|_| Error::parse(format!("bad rational q in {s:?}")))?;
        if d == 0 {
            return Err(Error::parse("zero denominator in q"));
        }
        Self::rationals(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn descriptor(&self) -> String {
        match &self.kind {
            FieldKind::Rationals { q } => format!("{}", q),
            FieldKind::Cyclotomic { n } => format!("root_of_unity:{}", n),
            FieldKind::RationalFunctions => "indeterminate".into(),
        }
    }

    pub fn zero(&self) -> Scalar {
        match &self.kind {
            FieldKind::Rationals { .. } => Scalar::Rat(BigRational::zero()),
            FieldKind::Cyclotomic { n } => Scalar::Cyclo {
                n: *n,
                c: QPoly::zero(),
            },
            FieldKind::RationalFunctions => Scalar::RatFun(RatFun::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_rational(BigRational::one())
    }

    pub fn from_rational(&self, r: BigRational) -> Scalar {
        match &self.kind {
            FieldKind::Rationals { .. } => Scalar::Rat(r),
            FieldKind::Cyclotomic { n } => Scalar::Cyclo {
                n: *n,
                c: QPoly::constant(r),
            },
            FieldKind::RationalFunctions => Scalar::RatFun(RatFun::from_poly(QPoly::constant(r))),
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        self.from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(&self, num: i64, den: i64) -> Scalar {
        self.from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The designated element q.
    pub fn q(&self) -> Scalar {
        match &self.kind {
            FieldKind::Rationals { q } => Scalar::Rat(q.clone()),
            FieldKind::Cyclotomic { n } => {
                if self.ext_degree == 1 {
                    // zeta_1 = 1, zeta_2 = -1: the extension is trivial.
                    let v = if *n == 1 { 1 } else { -1 };
                    Scalar::Cyclo {
                        n: *n,
                        c: QPoly::constant(br(v)),
                    }
                } else {
                    Scalar::Cyclo {
                        n: *n,
                        c: QPoly::x(),
                    }
                }
            }
            FieldKind::RationalFunctions => Scalar::RatFun(RatFun::q()),
        }
    }

    /// q^k for any integer k.
    pub fn q_pow(&self, k: i64) -> Scalar {
        self.q().pow(k, self).expect("q is invertible")
    }

    /// Smallest N with q^N = 1, if any. Decidable in every supported field.
    pub fn is_root_of_unity(&self) -> Option<u32> {
        match &self.kind {
            FieldKind::Rationals { q } => {
                if q.is_one() {
                    Some(1)
                } else if (-q.clone()).is_one() {
                    Some(2)
                } else {
                    None
                }
            }
            FieldKind::Cyclotomic { n } => Some(*n),
            FieldKind::RationalFunctions => None,
        }
    }

    /// Error out when q is a root of unity; used by v-basis layers.
    pub fn require_not_root_of_unity(&self, context: &str) -> Result<()> {
        match self.is_root_of_unity() {
            Some(order) => Err(Error::RootOfUnity {
                order,
                context: context.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Parse a scalar literal: "3/4", "q", "q^2 - 1/(q+1)", "zeta", ...
    pub fn parse(&self, input: &str) -> Result<Scalar> {
        parse::parse_scalar(input, self)
    }

    /// Multiplicative inverse in this field.
    pub fn inv(&self, x: &Scalar) -> Result<Scalar> {
        x.inv_in(self)
    }
}

/// An element of a [`ScalarField`], in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Rat(BigRational),
    Cyclo { n: u32, c: QPoly },
    RatFun(RatFun),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Cyclo { c, .. } => c.is_zero(),
            Scalar::RatFun(f) => f.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Cyclo { c, .. } => c.degree() == Some(0) && c.coeff(0).is_one(),
            Scalar::RatFun(f) => {
                f.den == QPoly::one() && f.num.degree() == Some(0) && f.num.coeff(0).is_one()
            }
        }
    }

    /// The rational value, when this scalar is in fact rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Rat(r) => Some(r.clone()),
            Scalar::Cyclo { c, .. } => {
                if c.is_zero() {
                    Some(BigRational::zero())
                } else if c.degree() == Some(0) {
                    Some(c.coeff(0))
                } else {
                    None
                }
            }
            Scalar::RatFun(f) => {
                if f.den == QPoly::one() && f.num.degree().map_or(true, |d| d == 0) {
                    Some(f.num.coeff(0))
                } else {
                    None
                }
            }
        }
    }

    fn mismatch(a: &Scalar, b: &Scalar) -> ! {
        panic!("scalar field mismatch: {a:?} vs {b:?}");
    }

    pub fn inv_in(&self, field: &ScalarField) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero scalar".into()));
        }
        match self {
            Scalar::Rat(r) => Ok(Scalar::Rat(BigRational::one() / r.clone())),
            Scalar::Cyclo { n, c } => {
                let m = field.modulus.as_ref().expect("cyclotomic modulus");
                let inv = poly_inverse_mod(c, m).ok_or_else(|| {
                    Error::NotInvertible("cyclotomic element not invertible".into())
                })?;
                Ok(Scalar::Cyclo { n: *n, c: inv })
            }
            Scalar::RatFun(f) => f
                .inv()
                .map(Scalar::RatFun)
                .ok_or_else(|| Error::NotInvertible("zero rational function".into())),
        }
    }

    pub fn pow(&self, k: i64, field: &ScalarField) -> Result<Scalar> {
        if k == 0 {
            return Ok(field.one());
        }
        let base = if k < 0 { self.inv_in(field)? } else { self.clone() };
        let mut acc = field.one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Division; errors on a zero divisor.
    pub fn div(&self, o: &Scalar, field: &ScalarField) -> Result<Scalar> {
        Ok(self * &o.inv_in(field)?)
    }
}

/// Extended Euclid inverse of `a` modulo `m` in Q[x]; None when gcd != 1.
fn poly_inverse_mod(a: &QPoly, m: &QPoly) -> Option<QPoly> {
    // Invariants: r0 = s0*a mod m lineage; stop when r1 is a nonzero constant.
    let mut r0 = m.clone();
    let mut r1 = a.rem(m);
    let mut s0 = QPoly::zero();
    let mut s1 = QPoly::one();
    while !r1.is_zero() {
        if r1.degree() == Some(0) {
            let inv = BigRational::one() / r1.coeff(0);
            return Some(s1.scale(&inv).rem(m));
        }
        let (q, r) = r0.divrem(&r1);
        let s = s0.sub(&q.mul(&s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    None
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Cyclo { n: n1, c: a }, Scalar::Cyclo { n: n2, c: b }) if n1 == n2 => {
                Scalar::Cyclo {
                    n: *n1,
                    c: a.add(b),
                }
            }
            (Scalar::RatFun(a), Scalar::RatFun(b)) => Scalar::RatFun(a.add(b)),
            _ => Scalar::mismatch(self, o),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            (Scalar::Cyclo { n: n1, c: a }, Scalar::Cyclo { n: n2, c: b }) if n1 == n2 => {
                Scalar::Cyclo {
                    n: *n1,
                    c: a.sub(b),
                }
            }
            (Scalar::RatFun(a), Scalar::RatFun(b)) => Scalar::RatFun(a.sub(b)),
            _ => Scalar::mismatch(self, o),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Cyclo { n: n1, c: a }, Scalar::Cyclo { n: n2, c: b }) if n1 == n2 => {
                // Reduce through a throwaway field handle to reuse the modulus.
                let m = cyclotomic(*n1);
                Scalar::Cyclo {
                    n: *n1,
                    c: a.mul(b).rem(&m),
                }
            }
            (Scalar::RatFun(a), Scalar::RatFun(b)) => Scalar::RatFun(a.mul(b)),
            _ => Scalar::mismatch(self, o),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a.clone()),
            Scalar::Cyclo { n, c } => Scalar::Cyclo {
                n: *n,
                c: c.neg(),
            },
            Scalar::RatFun(a) => Scalar::RatFun(a.neg()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{}", r),
            Scalar::Cyclo { c, .. } => write!(f, "{}", poly_display(c, "zeta")),
            Scalar::RatFun(rf) => {
                if rf.den == QPoly::one() {
                    write!(f, "{}", poly_display(&rf.num, "q"))
                } else {
                    write!(
                        f,
                        "({})/({})",
                        poly_display(&rf.num, "q"),
                        poly_display(&rf.den, "q")
                    )
                }
            }
        }
    }
}

/// [n]_q = 1 + q + ... + q^{n-1}; 0 for n = 0.
pub fn q_integer(n: u32, field: &ScalarField) -> Scalar {
    let mut acc = field.zero();
    let mut p = field.one();
    let q = field.q();
    for _ in 0..n {
        acc = &acc + &p;
        p = &p * &q;
    }
    acc
}

/// [n]_q! = [1]_q [2]_q ... [n]_q, with [0]_q! = 1.
pub fn q_factorial(n: u32, field: &ScalarField) -> Scalar {
    let mut acc = field.one();
    for i in 1..=n {
        acc = &acc * &q_integer(i, field);
    }
    acc
}

/// Gaussian binomial as a polynomial in an indeterminate x, via the q-Pascal
/// recurrence binom(m,n) = binom(m-1,n-1) + x^n binom(m-1,n). Exact for all
/// m, n; zero when m < n.
pub fn gaussian_polynomial(m: u32, n: u32) -> QPoly {
    if n > m {
        return QPoly::zero();
    }
    let n = n.min(m - n); // symmetry keeps the table thin
    let mut row: Vec<QPoly> = vec![QPoly::one()]; // binom(0,0)
    for mm in 1..=m {
        let upto = n.min(mm);
        let mut next: Vec<QPoly> = Vec::with_capacity(upto as usize + 1);
        for nn in 0..=upto {
            if nn == 0 {
                next.push(QPoly::one());
            } else if nn == mm {
                next.push(QPoly::one());
            } else {
                let left = &row[nn as usize - 1];
                let right = &row[nn as usize];
                next.push(left.add(&right.mul(&QPoly::monomial(BigRational::one(), nn as usize))));
            }
        }
        row = next;
    }
    row[n as usize].clone()
}

/// binom(m,n)_q, computed as a Gaussian polynomial and then specialized, so
/// the value is correct even when q is a root of unity.
pub fn q_binomial(m: u32, n: u32, field: &ScalarField) -> Scalar {
    let p = gaussian_polynomial(m, n);
    specialize_poly(&p, field)
}

/// Evaluate a rational-coefficient polynomial at the field's q.
pub fn specialize_poly(p: &QPoly, field: &ScalarField) -> Scalar {
    let q = field.q();
    let mut acc = field.zero();
    for c in p.coeffs.iter().rev() {
        acc = &(&acc * &q) + &field.from_rational(c.clone());
    }
    acc
}

/// Check q^l binom(m,l) + binom(m,l-1) = binom(m,l) + q^{m-l+1} binom(m,l-1).
pub fn q_pascal_identity_check(m: u32, l: u32, field: &ScalarField) -> bool {
    assert!((1..=m).contains(&l), "need 1 <= l <= m");
    let bl = q_binomial(m, l, field);
    let bl1 = q_binomial(m, l - 1, field);
    let ql = field.q_pow(l as i64);
    let qml1 = field.q_pow((m - l + 1) as i64);
    let lhs = &(&ql * &bl) + &bl1;
    let rhs = &bl + &(&qml1 * &bl1);
    lhs == rhs
}
