//! Numerical workbench for the inhomogeneous Cauchy-Riemann equation on planar
//! compacta: a Pompeiu transform solver, Bezout and corona solvers, principal
//! and multi-generator division with smoothness certificates, a Faa di Bruno
//! engine and local L-connectivity probes.
//!
//! All grid work runs on rayon when the `parallel` feature is enabled (the
//! default) and falls back to plain loops otherwise. Each entry point also
//! takes an [`Execution`] so both paths can be compared in one build.

pub mod bezout;
pub mod cauchy;
pub mod corona;
pub mod division;
pub mod domain;
mod error;
pub mod expr;
pub mod faa;
pub mod field;
pub mod geometry;
mod parallel;
pub mod poly;
pub mod study;
pub mod taylor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use parallel::Execution;
