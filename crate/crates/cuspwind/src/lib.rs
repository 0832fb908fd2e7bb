//! Numerical thermodynamic formalism for generalized Schottky groups with a
//! single cusp, and the Gauss continued-fraction system used as a contrast
//! case.
//!
//! The pipeline: disc-model Möbius geometry ([`geometry`]), the group and its
//! induced countable-alphabet Markov coding ([`schottky`]), topological
//! pressure of the two-parameter potential family ([`pressure`]), Bowen roots
//! and the cusp-winding spectrum ([`spectra`]), the Dirichlet/Mellin special
//! functions behind the asymptotics ([`special`]), the Gauss-map analogue
//! ([`gauss`]), and the convergence-rate experiments ([`ratelab`]).

pub mod gauss;
pub mod geometry;
pub mod pressure;
pub mod ratelab;
pub mod schottky;
pub mod special;
pub mod spectra;
