//! File formats, reports and the command-line front end for `lienard-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod svg;
pub mod system;
