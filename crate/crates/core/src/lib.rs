#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numerics;
pub mod oracles;
pub mod problem;
pub mod game;
pub mod parallel;
pub mod volterra;
pub mod cli;
