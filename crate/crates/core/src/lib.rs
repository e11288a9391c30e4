#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod compound;
pub mod data;
pub mod error;
pub mod estimate;
pub mod gof;
mod mp;
pub mod nbl;
pub mod quad;
pub mod specfun;
