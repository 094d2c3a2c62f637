//! Distributed adaptive consensus tracking for networks of switched
//! odd-power-integrator agents.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod approximators;
pub mod controller;
pub mod graph;
pub mod lemma_suites;
pub mod linalg;
pub mod odd_power;
pub mod plant;
pub mod scenario;
pub mod simulator;
