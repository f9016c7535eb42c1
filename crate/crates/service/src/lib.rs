//! Command line and HTTP front end for `ctsplat-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod http;
pub mod request;
pub mod views;
