//! Invariant P-values for model checking.
//!
//! A density-based P-value `P(f_T(t) <= f_T(t_0))` is not invariant under
//! smooth reparameterizations of the discrepancy statistic `T`: the density
//! picks up the volume distortion of the transformation. This crate computes
//! the corrected quantity instead, comparing `f*_T = f_T / J*_T` where
//! `J_T(x) = |det(dT(x) dT'(x))|^{-1/2}` is the fiber volume distortion, so
//! the resulting P-value depends only on the density assignment on the
//! original response space.
//!
//! The pieces:
//!
//! - [`discrete`]: exact P-values for finite probability functions, where the
//!   corrected and plain notions coincide.
//! - [`discretization`]: partition-based P-values for a measured continuous
//!   response and their convergence to `P(f(x) <= f(x_0))`.
//! - [`sampler`]: reproducible uniform draws of the standardized residual
//!   direction on the centered unit sphere.
//! - [`distortion`]: discrepancy statistics (power sums, Jarque-Bera,
//!   Shapiro-Wilk) with analytic inverse-distortion factors and a
//!   finite-difference fallback.
//! - [`estimate`]: weighted kernel density estimation turning Monte-Carlo
//!   draws into plain/corrected density curves and the three P-values
//!   (tail, plain-density, invariant).
//! - [`closed_forms`]: exact reference P-values (chi-square level sets,
//!   normal mean) used as oracles for the Monte-Carlo pipeline.
//! - [`normality`]: the end-to-end normal-model check conditioning on the
//!   minimal sufficient statistic via the residual sphere.
//! - [`loc_scale`]: location-scale model checking through the quartile
//!   ancillary and its corrected density computed by double quadrature.
//!
//! The crate is `no_std` (with `alloc`); all float math goes through `libm`
//! so results are bit-identical regardless of the host's libstd.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod closed_forms;
pub mod contour;
pub mod discrete;
pub mod discretization;
pub mod distortion;
pub mod error;
pub mod estimate;
pub mod loc_scale;
pub mod math;
pub mod normality;
pub mod quad;
pub mod rng;
pub mod sample;
pub mod sampler;

pub use error::{Error, Result};
pub use sample::{MonteCarloConfig, PValueReport, Sample, ScalarOrPair};
