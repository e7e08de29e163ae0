//! Rauzy induction for non-classical interval exchanges.
//!
//! A non-classical interval exchange is a thickened interval with bands
//! allowed to run top-to-top or bottom-to-bottom (orientation reversing).
//! This crate implements the induction step and its expansion matrices,
//! the reduced diagram of combinatorial types, exact rational geometry of
//! the configuration-space polytopes cut out by the switch condition, and
//! Monte Carlo experiments probing distortion, normality, and diameter
//! decay of the induced expansions.

pub mod combinatorics;
pub mod diagram;
pub mod expansion;
pub mod four_band;
pub mod geometry;
pub mod matrix;
pub mod montecarlo;
pub mod numeric;
