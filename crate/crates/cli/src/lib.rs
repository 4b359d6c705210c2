//! Command-line front end for `cpmatch`: the graph file format, JSON run
//! traces and the `solve` / `gen` subcommands.

pub mod app;
pub mod format;
pub mod trace;

pub use app::run;
pub use format::{emit_graph, parse_graph, ParseError};
