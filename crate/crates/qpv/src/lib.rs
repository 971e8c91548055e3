//! Exact symbolic toolkit for linear q-difference-differential ("qsi") systems
//! with constant coefficients: twisted power-series solvers, quantum Galois
//! groups computed as co-representation Hopf algebras, Picard-Vessiot rings,
//! torsors and cleft trivializations.
//!
//! Everything is computed over exact scalar fields (rationals, cyclotomic
//! fields, or rational functions in an indeterminate q); there is no floating
//! point anywhere.
//!
//! Module map:
//!
//! * [`scalars`]: exact fields, q-integers, q-factorials, Gaussian binomials.
//! * [`linalg`]: dense matrices over a scalar field (kernel, rank, char poly).
//! * [`ncalg`]: finitely presented noncommutative algebras with rewriting.
//! * [`hopf`]: Hopf structure on presentations, axiom suites, built-ins.
//! * [`seq`]: bilateral C-finite sequences and twisted power series.
//! * [`qsimod`]: finite-dimensional modules (A, B), tensor/dual, the solver.
//! * [`corepr`]: dual functionals, convolution, Galois group discovery.
//! * [`pvt`]: Picard-Vessiot rings, torsors, cleftness, simplicity.
//! * [`hull`]: the rational qsi field C(t), universal morphism, deformations.

pub mod error;
pub mod par;
pub mod rng;
pub mod scalars;
pub mod linalg;
pub mod ncalg;
pub mod hopf;
pub mod seq;
pub mod qsimod;
pub mod corepr;
pub mod pvt;
pub mod hull;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
