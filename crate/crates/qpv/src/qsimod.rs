//! Finite-dimensional modules for the operator pair (shift, divided power)
//! over the constant field: validation of the defining q-commutation, tensor
//! and dual constructions, and the series solver that produces a fundamental
//! system together with its trivializing inverse.
//!
//! A module of dimension n is stored as a pair of n×n scalar matrices `A`
//! (the shift action, invertible) and `B` (the degree-one divided-power
//! action) satisfying `B·A = q·A·B`. The linear system attached to the module
//! lives in the transposed picture: a fundamental system is a matrix `Y` of
//! twisted series with
//!
//! ```text
//! Σ̂(Y) = Aᵀ·Y,      Θ̂^(1)(Y) = Bᵀ·Y,
//! ```
//!
//! and these transposed matrices satisfy `Aᵀ·Bᵀ = q·Bᵀ·Aᵀ`. The closed-form
//! solution is the q-exponential `Y = Σ_i X^i (Bᵀ)^i/[i]_q! · 𝔸` where `𝔸`
//! is the matrix sequence `n ↦ (Aᵀ)^n`; it terminates when `B` is nilpotent
//! and is truncated (with a note) when it is not.

use serde_json::{json, Map, Value};
use std::fmt;

use crate::linalg::Mat;
use crate::scalars::{q_factorial, Scalar, ScalarField};
use crate::seq::{CFiniteSeq, SeqMat, TwistedSeries};
use crate::{Error, Result};

/// How a module file carries its matrix pair.
///
/// `Direct` files store the pair as used internally, satisfying
/// `B·A = q·A·B`. `Transposed` files carry the transposed pair, which
/// satisfies `A·B = q·B·A`, and are transposed on load (and transposed back
/// on save). The JSON tags are `"partIII"` and `"partII-transposed"`; the
/// first is the default when a file has no `convention` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Direct,
    Transposed,
}

impl Convention {
    pub fn tag(self) -> &'static str {
        match self {
            Convention::Direct => "partIII",
            Convention::Transposed => "partII-transposed",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Convention> {
        match tag {
            "partIII" => Ok(Convention::Direct),
            "partII-transposed" => Ok(Convention::Transposed),
            other => Err(Error::parse(format!(
                "unknown convention tag {:?} (expected \"partIII\" or \"partII-transposed\")",
                other
            ))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A finite-dimensional module over the constants, given by the invertible
/// shift action `A` and the divided-power action `B` with `B·A = q·A·B`.
///
/// Construction validates the pair; an incompatible pair is rejected with an
/// error naming the identity that failed.
#[derive(Debug, Clone)]
pub struct QsiModuleSpec {
    field: ScalarField,
    n: usize,
    a: Mat,
    b: Mat,
    convention: Convention,
}

impl PartialEq for QsiModuleSpec {
    fn eq(&self, other: &Self) -> bool {
        self.field.descriptor() == other.field.descriptor()
            && self.n == other.n
            && self.a == other.a
            && self.b == other.b
    }
}

/// Outcome of re-checking a constructed module: which q-commutation
/// orientations the stored pair satisfies and whether the divided-power
/// action is nilpotent (with its index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub dim: usize,
    pub convention: Convention,
    pub shift_action_invertible: bool,
    /// `B·A = q·A·B` on the stored pair.
    pub stored_orientation: bool,
    /// `A·B = q·B·A` on the stored pair (holds additionally when the two
    /// actions commute, e.g. for `B = 0`).
    pub transposed_orientation: bool,
    /// Least k with `B^k = 0`, when one exists (k is at most the dimension).
    pub theta_nilpotency: Option<usize>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.shift_action_invertible && self.stored_orientation
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.dim,
            "convention": self.convention.tag(),
            "shift_action_invertible": self.shift_action_invertible,
            "stored_orientation_q_commutation": self.stored_orientation,
            "transposed_orientation_q_commutation": self.transposed_orientation,
            "theta_nilpotency_index": self.theta_nilpotency,
            "valid": self.pass(),
        })
    }
}

fn q_commutes(left: &Mat, right: &Mat, q: &Scalar) -> bool {
    // left·right == q · right·left
    let lhs = left * right;
    let rhs = (right * left).scale(q);
    lhs == rhs
}

/// Least k ≥ 1 with `m^k = 0`, searching up to the dimension (beyond which
/// no new vanishing can appear).
fn nilpotency_index(m: &Mat) -> Option<usize> {
    let n = m.rows;
    let mut p = m.clone();
    for k in 1..=n {
        if p.is_zero() {
            return Some(k);
        }
        p = &p * m;
    }
    if p.is_zero() {
        Some(n)
    } else {
        None
    }
}

impl QsiModuleSpec {
    /// Builds a module from the matrix pair as it appears in a file of the
    /// given convention. `Transposed` input is transposed on ingestion, so
    /// the stored pair always satisfies `B·A = q·A·B`.
    pub fn new(field: &ScalarField, a: Mat, b: Mat, convention: Convention) -> Result<QsiModuleSpec> {
        let n = a.rows;
        if a.cols != n {
            return Err(Error::invalid(format!(
                "shift-action matrix must be square, got {}x{}",
                a.rows, a.cols
            )));
        }
        if b.rows != n || b.cols != n {
            return Err(Error::invalid(format!(
                "divided-power matrix must be {n}x{n} to match the shift action, got {}x{}",
                b.rows, b.cols
            )));
        }
        let (a, b) = match convention {
            Convention::Direct => (a, b),
            Convention::Transposed => (a.transpose(), b.transpose()),
        };
        if a.inverse(field).is_err() {
            return Err(Error::invalid(
                "incompatible matrix pair: the shift action A is not invertible",
            ));
        }
        if !q_commutes(&b, &a, &field.q()) {
            let identity = match convention {
                Convention::Direct => "B*A = q*A*B",
                Convention::Transposed => "A*B = q*B*A (on the pair as stored in the file)",
            };
            return Err(Error::invalid(format!(
                "incompatible matrix pair: {identity} fails"
            )));
        }
        Ok(QsiModuleSpec {
            field: field.clone(),
            n,
            a,
            b,
            convention,
        })
    }

    /// The one-dimensional module with trivial actions (A = 1, B = 0).
    pub fn trivial(field: &ScalarField) -> QsiModuleSpec {
        QsiModuleSpec {
            field: field.clone(),
            n: 1,
            a: Mat::identity(1, field),
            b: Mat::zero(1, 1, field),
            convention: Convention::Direct,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    /// The stored shift action (invertible).
    pub fn shift_action(&self) -> &Mat {
        &self.a
    }

    /// The stored divided-power action.
    pub fn theta_action(&self) -> &Mat {
        &self.b
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// The transposed pair `(Aᵀ, Bᵀ)` appearing in the defining equations of
    /// the linear system; it satisfies `Aᵀ·Bᵀ = q·Bᵀ·Aᵀ`.
    pub fn equation_pair(&self) -> (Mat, Mat) {
        (self.a.transpose(), self.b.transpose())
    }

    /// Re-checks the stored pair and reports which orientation(s) of the
    /// q-commutation hold, plus nilpotency of the divided-power action.
    pub fn validate(&self) -> ValidationReport {
        let q = self.field.q();
        ValidationReport {
            dim: self.n,
            convention: self.convention,
            shift_action_invertible: self.a.inverse(&self.field).is_ok(),
            stored_orientation: q_commutes(&self.b, &self.a, &q),
            transposed_orientation: q_commutes(&self.a, &self.b, &q),
            theta_nilpotency: nilpotency_index(&self.b),
        }
    }

    /// Tensor product of two modules over the same field:
    /// `A⊗ = A₁⊗A₂` and `B⊗ = A₁⊗B₂ + B₁⊗I`, on the stored pairs. The
    /// result is validated before being returned.
    pub fn tensor(&self, other: &QsiModuleSpec) -> Result<QsiModuleSpec> {
        if self.field.descriptor() != other.field.descriptor() {
            return Err(Error::invalid(
                "tensor requires both modules over the same field",
            ));
        }
        let a = self.a.kron(&other.a);
        let b = &self.a.kron(&other.b) + &self.b.kron(&Mat::identity(other.n, &self.field));
        QsiModuleSpec::new(&self.field, a, b, Convention::Direct)
    }

    /// Dual module: `A* = (A⁻¹)ᵀ` and `B* = (−q·B·A⁻¹)ᵀ` on the stored pair.
    /// The double dual returns `A` unchanged and scales `B` by q.
    pub fn dual(&self) -> Result<QsiModuleSpec> {
        let a_inv = self.a.inverse(&self.field)?;
        let q = self.field.q();
        let a_star = a_inv.transpose();
        let b_star = (&self.b * &a_inv).scale(&q).transpose().map(|s| -s);
        QsiModuleSpec::new(&self.field, a_star, b_star, Convention::Direct)
    }

    /// Solves the linear system of the module as a twisted series through
    /// degree `truncation` (which must be at least 1 so the defining
    /// equations have room to be checked).
    ///
    /// The series is the q-exponential `Σ_i X^i (Bᵀ)^i/[i]_q! · 𝔸` with
    /// `𝔸(n) = (Aᵀ)^n`. When `B` is nilpotent of index k ≤ truncation + 1
    /// the result is exact; otherwise it is a truncation and carries a note.
    /// When q is a root of unity of order N ≥ 2 the q-factorials vanish from
    /// degree N on, so the solver refuses unless `B` is nilpotent of index
    /// at most N.
    pub fn solve(&self, truncation: usize) -> Result<SolutionMatrix> {
        if truncation == 0 {
            return Err(Error::invalid(
                "solve needs truncation >= 1 to carry the defining equations",
            ));
        }
        let nilpotency = nilpotency_index(&self.b);
        if let Some(order) = self.field.is_root_of_unity() {
            if order >= 2 {
                let ok = matches!(nilpotency, Some(k) if k <= order as usize);
                if !ok {
                    return Err(Error::RootOfUnity {
                        order,
                        context: format!(
                            "the series solution (the divided-power action must be \
                             nilpotent of index <= {order} to avoid dividing by a \
                             vanishing q-factorial)"
                        ),
                    });
                }
            }
        }
        let (ea, eb) = self.equation_pair();
        let powers = SeqMat::power_sequence(&ea, &self.field)?;
        let mut coeffs = Vec::with_capacity(truncation + 1);
        let mut eb_pow = Mat::identity(self.n, &self.field);
        for i in 0..=truncation {
            if i > 0 {
                eb_pow = &eb_pow * &eb;
            }
            if eb_pow.is_zero() {
                coeffs.push(SeqMat::zero(self.n, self.n, &self.field));
                continue;
            }
            let fact_inv = q_factorial(i as u32, &self.field).inv_in(&self.field)?;
            let coeff_mat = eb_pow.scale(&fact_inv);
            coeffs.push(SeqMat::constant(&coeff_mat, &self.field).mul(&powers));
        }
        let exact = matches!(nilpotency, Some(k) if k <= truncation + 1);
        let note = if exact {
            None
        } else {
            Some(format!(
                "series truncated at degree {truncation}: the divided-power action \
                 is not nilpotent within that window, so higher-degree terms were \
                 dropped"
            ))
        };
        Ok(SolutionMatrix {
            spec: self.clone(),
            y: TwistedSeries::new(coeffs),
            exact,
            note,
        })
    }

    /// Reads a module from JSON of the shape
    /// `{"n": 2, "A": [["q", 0], [0, 1]], "B": [[0, 0], [1, 0]],
    ///   "convention": "partIII"}`.
    ///
    /// Matrix entries are exact integers or strings in the scalar grammar of
    /// the field. A missing `convention` field means `"partIII"`.
    pub fn from_json(field: &ScalarField, v: &Value) -> Result<QsiModuleSpec> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::parse("module spec must be a JSON object"))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("module spec needs a positive integer field \"n\""))?
            as usize;
        if n == 0 {
            return Err(Error::parse("module dimension n must be positive"));
        }
        let convention = match obj.get("convention") {
            None => Convention::Direct,
            Some(Value::String(s)) => Convention::from_tag(s)?,
            Some(_) => return Err(Error::parse("\"convention\" must be a string tag")),
        };
        let a = parse_matrix(field, obj, "A", n)?;
        let b = parse_matrix(field, obj, "B", n)?;
        QsiModuleSpec::new(field, a, b, convention)
    }

    /// Serializes the module in its original convention (transposing back
    /// for `Transposed` files), with entries printed in the scalar grammar.
    pub fn to_json(&self) -> Value {
        let (a, b) = match self.convention {
            Convention::Direct => (self.a.clone(), self.b.clone()),
            Convention::Transposed => (self.a.transpose(), self.b.transpose()),
        };
        json!({
            "n": self.n,
            "A": matrix_json(&a),
            "B": matrix_json(&b),
            "convention": self.convention.tag(),
        })
    }
}

fn parse_matrix(field: &ScalarField, obj: &Map<String, Value>, key: &str, n: usize) -> Result<Mat> {
    let rows = obj
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(format!("module spec needs an array field {key:?}")))?;
    if rows.len() != n {
        return Err(Error::parse(format!(
            "matrix {key:?} must have {n} rows, got {}",
            rows.len()
        )));
    }
    let mut data = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::parse(format!("row {i} of {key:?} must be an array")))?;
        if row.len() != n {
            return Err(Error::parse(format!(
                "row {i} of {key:?} must have {n} entries, got {}",
                row.len()
            )));
        }
        let mut out = Vec::with_capacity(n);
        for (j, entry) in row.iter().enumerate() {
            let s = match entry {
                Value::Number(num) => match num.as_i64() {
                    Some(k) => field.from_i64(k),
                    None => {
                        return Err(Error::parse(format!(
                            "entry ({i},{j}) of {key:?}: numeric entries must be exact \
                             integers, got {num}"
                        )))
                    }
                },
                Value::String(text) => field.parse(text)?,
                other => {
                    return Err(Error::parse(format!(
                        "entry ({i},{j}) of {key:?} must be an integer or a string, got {other}"
                    )))
                }
            };
            out.push(s);
        }
        data.push(out);
    }
    Ok(Mat::from_rows(data))
}

fn matrix_json(m: &Mat) -> Value {
    Value::Array(
        (0..m.rows)
            .map(|i| {
                Value::Array(
                    (0..m.cols)
                        .map(|j| Value::String(m[(i, j)].to_string()))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Location of the first failing coefficient of a matrix-series identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub row: usize,
    pub col: usize,
    pub degree: usize,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "entry ({},{}) at degree {}",
            self.row, self.col, self.degree
        )
    }
}

/// Result of checking one matrix-series identity coefficientwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquationCheck {
    pub holds: bool,
    pub mismatch: Option<Mismatch>,
}

impl EquationCheck {
    fn compare(lhs: &TwistedSeries<SeqMat>, rhs: &TwistedSeries<SeqMat>) -> EquationCheck {
        let d = lhs.truncation().min(rhs.truncation());
        let diff = lhs.truncate(d).sub(&rhs.truncate(d));
        EquationCheck::from_difference(&diff)
    }

    fn from_difference(diff: &TwistedSeries<SeqMat>) -> EquationCheck {
        for (degree, coeff) in diff.coeffs().iter().enumerate() {
            for row in 0..coeff.rows() {
                for col in 0..coeff.cols() {
                    if !coeff.entry(row, col).is_zero() {
                        return EquationCheck {
                            holds: false,
                            mismatch: Some(Mismatch { row, col, degree }),
                        };
                    }
                }
            }
        }
        EquationCheck {
            holds: true,
            mismatch: None,
        }
    }

    fn to_json(self) -> Value {
        match self.mismatch {
            None => json!({ "holds": self.holds }),
            Some(m) => json!({
                "holds": self.holds,
                "first_mismatch": { "row": m.row, "col": m.col, "degree": m.degree },
            }),
        }
    }
}

/// Coefficientwise check of the two defining equations of a candidate
/// solution, plus an invertibility certificate from series inversion.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub truncation: usize,
    /// `Σ̂(Y) = Aᵀ·Y`.
    pub shift_equation: EquationCheck,
    /// `Θ̂^(1)(Y) = Bᵀ·Y`, compared through degree truncation − 1.
    pub theta_equation: EquationCheck,
    pub invertible: bool,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.shift_equation.holds && self.theta_equation.holds && self.invertible
    }

    pub fn to_json(&self) -> Value {
        json!({
            "truncation": self.truncation,
            "shift_equation": self.shift_equation.to_json(),
            "theta_equation": self.theta_equation.to_json(),
            "invertible": self.invertible,
            "pass": self.pass(),
        })
    }
}

/// Checks a candidate series against the module's defining equations.
///
/// This is the verification path for matrices that did not come out of
/// [`QsiModuleSpec::solve`], e.g. perturbed or hand-built candidates.
pub fn verify_candidate(spec: &QsiModuleSpec, y: &TwistedSeries<SeqMat>) -> VerificationReport {
    let d = y.truncation();
    let (ea, eb) = spec.equation_pair();
    let ea_series = TwistedSeries::constant(SeqMat::constant(&ea, spec.field()), d);
    let eb_series = TwistedSeries::constant(SeqMat::constant(&eb, spec.field()), d);
    let shift_equation = EquationCheck::compare(&y.hat_sigma(), &ea_series.mul(y));
    let theta_equation = match y.hat_theta(1) {
        Ok(lhs) => EquationCheck::compare(&lhs, &eb_series.mul(y)),
        Err(_) => EquationCheck {
            holds: false,
            mismatch: None,
        },
    };
    VerificationReport {
        truncation: d,
        shift_equation,
        theta_equation,
        invertible: y.try_invert().is_ok(),
    }
}

/// A fundamental system: the series solution of a module's linear system.
#[derive(Debug, Clone)]
pub struct SolutionMatrix {
    spec: QsiModuleSpec,
    y: TwistedSeries<SeqMat>,
    exact: bool,
    note: Option<String>,
}

impl SolutionMatrix {
    /// Wraps a candidate series for a module; nothing is checked here, use
    /// [`SolutionMatrix::verify`].
    pub fn from_series(spec: &QsiModuleSpec, y: TwistedSeries<SeqMat>) -> SolutionMatrix {
        let exact = false;
        SolutionMatrix {
            spec: spec.clone(),
            y,
            exact,
            note: None,
        }
    }

    pub fn spec(&self) -> &QsiModuleSpec {
        &self.spec
    }

    pub fn series(&self) -> &TwistedSeries<SeqMat> {
        &self.y
    }

    pub fn truncation(&self) -> usize {
        self.y.truncation()
    }

    /// True when the series terminates below the truncation, so the matrix
    /// is the whole solution rather than a truncation of it.
    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    /// The (i, j) entry as a scalar-coefficient series.
    pub fn entry_series(&self, i: usize, j: usize) -> TwistedSeries<CFiniteSeq> {
        TwistedSeries::new(
            self.y
                .coeffs()
                .iter()
                .map(|m| m.entry(i, j).clone())
                .collect(),
        )
    }

    /// Checks both defining equations and invertibility.
    pub fn verify(&self) -> VerificationReport {
        verify_candidate(&self.spec, &self.y)
    }

    /// Inverts the solution and checks the dual equations and the
    /// constant-row conditions; see [`Trivialization`].
    pub fn trivialize(&self) -> Result<Trivialization> {
        let z = self.y.try_invert()?;
        let d = z.truncation();
        let field = self.spec.field();
        let (ea, eb) = self.spec.equation_pair();
        let ea_inv = ea.inverse(field)?;
        let minus_ea_inv_eb = (&ea_inv * &eb).map(|s| -s);
        let const_series = |m: &Mat| TwistedSeries::constant(SeqMat::constant(m, field), d);

        let shifted = z.hat_sigma();
        let shift_equation = EquationCheck::compare(&shifted, &z.mul(&const_series(&ea_inv)));
        let theta = z.hat_theta(1)?;
        let theta_equation =
            EquationCheck::compare(&theta, &z.mul(&const_series(&minus_ea_inv_eb)));
        let constant_rows_shift_fixed =
            EquationCheck::compare(&shifted.mul(&const_series(&ea)), &z);
        let constant_rows_theta_killed = EquationCheck::from_difference(
            &shifted
                .mul(&const_series(&eb))
                .truncate(theta.truncation())
                .add(&theta),
        );
        Ok(Trivialization {
            z,
            shift_equation,
            theta_equation,
            constant_rows_shift_fixed,
            constant_rows_theta_killed,
        })
    }

    pub fn to_json(&self) -> Value {
        let n = self.spec.dim();
        let entries: Vec<Value> = (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let s = self.entry_series(i, j);
                            json!({
                                "coefficients": s
                                    .coeffs()
                                    .iter()
                                    .map(CFiniteSeq::to_json)
                                    .collect::<Vec<_>>(),
                                "display": entry_string(&s),
                            })
                        })
                        .collect(),
                )
            })
            .collect();
        let mut obj = json!({
            "n": n,
            "variable": "X",
            "truncation": self.truncation(),
            "exact": self.exact,
            "entries": entries,
        });
        if let Some(note) = &self.note {
            obj["note"] = json!(note);
        }
        obj
    }
}

/// Compact rendering of one matrix entry: zero coefficients are skipped and
/// no big-O tail is printed (the matrix display carries the truncation).
fn entry_string(s: &TwistedSeries<CFiniteSeq>) -> String {
    let mut terms = Vec::new();
    for (i, c) in s.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let cs = c.to_string();
        let term = if i == 0 {
            cs
        } else {
            let x = if i == 1 {
                "X".to_string()
            } else {
                format!("X^{i}")
            };
            if cs == "1" {
                x
            } else if cs.starts_with('-') || cs.contains(|ch: char| ch.is_whitespace()) {
                format!("{x}*({cs})")
            } else {
                format!("{x}*{cs}")
            }
        };
        terms.push(term);
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

impl fmt::Display for SolutionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.spec.dim();
        let rows: Vec<String> = (0..n)
            .map(|i| {
                let cells: Vec<String> = (0..n)
                    .map(|j| entry_string(&self.entry_series(i, j)))
                    .collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))?;
        if !self.exact {
            write!(f, " + O(X^{})", self.truncation() + 1)?;
        }
        Ok(())
    }
}

/// The inverse `Z` of a fundamental system with the four checks that make it
/// a trivialization: the dual equations `Σ̂(Z) = Z·(Aᵀ)⁻¹` and
/// `Θ̂^(1)(Z) = −Z·(Aᵀ)⁻¹·Bᵀ`, and the conditions making the rows of `Z`
/// coefficient vectors of constants, `Σ̂(Z)·Aᵀ = Z` and
/// `Σ̂(Z)·Bᵀ + Θ̂^(1)(Z) = 0`.
#[derive(Debug, Clone)]
pub struct Trivialization {
    z: TwistedSeries<SeqMat>,
    pub shift_equation: EquationCheck,
    pub theta_equation: EquationCheck,
    pub constant_rows_shift_fixed: EquationCheck,
    pub constant_rows_theta_killed: EquationCheck,
}

impl Trivialization {
    pub fn matrix(&self) -> &TwistedSeries<SeqMat> {
        &self.z
    }

    pub fn pass(&self) -> bool {
        self.shift_equation.holds
            && self.theta_equation.holds
            && self.constant_rows_shift_fixed.holds
            && self.constant_rows_theta_killed.holds
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dual_shift_equation": self.shift_equation.to_json(),
            "dual_theta_equation": self.theta_equation.to_json(),
            "constant_rows_shift_fixed": self.constant_rows_shift_fixed.to_json(),
            "constant_rows_theta_killed": self.constant_rows_theta_killed.to_json(),
            "pass": self.pass(),
        })
    }
}
