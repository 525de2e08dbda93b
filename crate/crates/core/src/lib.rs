#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agmon;
pub mod domain;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kmc;
pub mod landscape;
pub mod langevin;
pub mod potential;
pub mod rates;
pub mod rng;
pub mod spectral;
pub mod stats;
