//! Bit-to-pattern mapping and achievable-rate optimization for OFDM systems
//! with subcarrier index modulation (IM).
//!
//! An IM transmitter activates `K` of `N` subcarriers per group and conveys
//! information both in the activation pattern (SAP) and in the symbols on the
//! active subcarriers. When the SAPs are selected by parsing a uniform bit
//! stream through a full binary tree, each SAP is transmitted with a dyadic
//! probability `2^-q` fixed by the depth of its leaf. This crate provides:
//!
//! - [`tree_core`] — construction and enumeration of the reduced set of full
//!   binary trees and of the feasible set of dyadic SAP probability vectors;
//! - [`mapping`] — prefix-free bit-to-SAP codebooks, Huffman depths, and the
//!   projection of a relaxed probability vector onto the feasible set;
//! - [`channel_model`] — the parallel frequency-domain channel, SAP catalog,
//!   and the conditional/mixture output densities;
//! - [`rate_opt`] — Monte Carlo mutual information, analytic bounds and
//!   asymptotics, waterfilling, block coordinate descent, and the constrained
//!   solvers (enumerative and projection-based);
//! - [`link_sim`] — block-error-rate simulation of the encode → transmit →
//!   ML-detect chain with BPSK/QPSK constellations.
//!
//! All mutual-information values are in nats. Stochastic routines are
//! deterministic functions of `(seed, partitions)`; see [`rng`].

pub mod channel_model;
pub mod error;
pub mod link_sim;
pub mod mapping;
pub mod math;
pub mod rate_opt;
pub mod rng;
pub mod tree_core;

pub use error::{Error, Result};
