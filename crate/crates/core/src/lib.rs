#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod models;
pub mod moments;
pub mod numeric;
pub mod chebdesign;
pub mod tcrit;
pub mod lp;
pub mod optimizer;
pub mod robust;
pub mod powersim;
pub mod cli;
