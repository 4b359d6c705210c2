//! Exact LP machinery and the cutting-plane method for minimum-cost perfect
//! matching, with and without perturbed costs.

pub mod cpm;
pub mod fixtures;
pub mod graph;
pub mod lexmin;
pub mod lp;
pub mod matching_lp;
pub mod oracle;
pub mod perturb;
pub mod rational;
mod simplex;
