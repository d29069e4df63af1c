//! Exact-arithmetic engine for linear Pfaffian exterior differential systems
//! on frame bundles, together with the symmetric-matrix algebra of austere
//! subspaces and a floating-point checker for explicit immersions.
//!
//! The layers, bottom to top:
//!
//! * [`gaussian`], [`poly`], [`ratfun`] — Q(i), sparse multivariate
//!   polynomials and rational functions: the universal coefficient domain.
//! * [`groebner`], [`matrix`] — Buchberger with budgets, ideal operations,
//!   and exact linear algebra over any [`field::Field`].
//! * [`exterior`] — graded exterior forms over a structured coframe with a
//!   structure-equation-driven exterior derivative.
//! * [`frames`] — concrete frame-bundle models (semi-orthonormal bundles,
//!   special orthogonal Maurer-Cartan models).
//! * [`austere`] — maximal austere subspaces of symmetric matrices, the
//!   austere test, prolongations, and the classification of 2-dimensional
//!   subspaces.
//! * [`pfaffian`] — linear Pfaffian systems: integral elements, Cartan
//!   characters, torsion, forced forms, characteristic varieties,
//!   quadratic obstructions, prolongation.
//! * [`geometry`] — numeric second-fundamental-form checks for explicit
//!   parametrized submanifolds.

pub mod field;
pub mod gaussian;
pub mod rng;
pub mod poly;
pub mod order;
pub mod ratfun;
pub mod groebner;
pub mod matrix;
pub mod exterior;
pub mod frames;
pub mod austere;
pub mod pfaffian;
pub mod geometry;

pub use field::Field;
pub use gaussian::GaussianRational;
pub use poly::{MPoly, Polynomial};
pub use ratfun::RationalFunction;
