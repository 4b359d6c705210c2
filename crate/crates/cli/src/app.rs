use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};
use cpmatch::cpm::{
    solve_naive, solve_perturbed_reference_with, solve_unperturbed_with, CpmError, CpmOptions, MatchingResult,
    NaiveTrace, StopReason,
};
use cpmatch::fixtures::random_instance;
use cpmatch::graph::{EdgeId, EdgeOrdering, Graph};
use cpmatch::oracle::{brute_force_matchings, lex_tie_break, OracleResult};

use crate::format::{edge_label, emit_graph, parse_graph};
use crate::trace::Trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_MATCHING: i32 = 2;
pub const EXIT_FAULT: i32 = 3;

/// Largest graph `--validate` hands to the brute-force oracle.
pub const VALIDATE_VERTEX_CAP: usize = 14;

pub const DEFAULT_NAIVE_ITERATIONS: usize = 50;

#[derive(Parser, Debug)]
#[command(name = "cpmatch", version, about = "Minimum-cost perfect matching by exact cutting planes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a graph file and print the matching and its cost.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Unperturbed)]
        algorithm: Algorithm,
        /// Write a JSON trace of every iteration to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Cross-check against the brute-force oracle (graphs with at most 14 vertices).
        #[arg(long)]
        validate: bool,
        /// Iteration cap; for naive mode defaults to 50.
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Print a random graph with a planted perfect matching.
    Gen {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 10)]
        max_cost: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Unperturbed,
    Perturbed,
    Naive,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Unperturbed => "unperturbed",
            Algorithm::Perturbed => "perturbed",
            Algorithm::Naive => "naive",
        }
    }
}

enum Outcome {
    Solved(Result<MatchingResult, CpmError>),
    Naive(NaiveTrace),
}

impl Outcome {
    fn matching(&self) -> Option<&[EdgeId]> {
        match self {
            Outcome::Solved(Ok(r)) => Some(&r.matching),
            Outcome::Solved(Err(_)) => None,
            Outcome::Naive(t) => t.matching.as_deref(),
        }
    }

    fn no_perfect_matching(&self) -> bool {
        matches!(self, Outcome::Solved(Err(CpmError::NoPerfectMatching)))
            || matches!(self, Outcome::Naive(t) if t.stop == StopReason::NoPerfectMatching)
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match cli.command {
        Command::Solve { file, algorithm, trace, validate, max_iter } => {
            solve(&file, algorithm, trace.as_deref(), validate, max_iter, out, err)
        }
        Command::Gen { vertices, edges, max_cost, seed } => {
            if vertices % 2 == 1 {
                let _ = writeln!(err, "error: --vertices must be even to plant a perfect matching");
                return EXIT_INPUT;
            }
            if max_cost < 1 {
                let _ = writeln!(err, "error: --max-cost must be at least 1");
                return EXIT_INPUT;
            }
            let (g, sigma) = random_instance(vertices, edges, max_cost, seed);
            let _ = writeln!(out, "c gen --vertices {vertices} --edges {edges} --max-cost {max_cost} --seed {seed}");
            let _ = write!(out, "{}", emit_graph(&g, &sigma));
            EXIT_OK
        }
    }
}

fn run_algorithm(g: &Graph, sigma: &EdgeOrdering, algorithm: Algorithm, max_iter: Option<usize>) -> Outcome {
    let options = CpmOptions { iteration_cap: max_iter };
    match algorithm {
        Algorithm::Unperturbed => Outcome::Solved(solve_unperturbed_with(g, sigma, &options)),
        Algorithm::Perturbed => Outcome::Solved(solve_perturbed_reference_with(g, sigma, &options)),
        Algorithm::Naive => Outcome::Naive(solve_naive(g, sigma, max_iter.unwrap_or(DEFAULT_NAIVE_ITERATIONS))),
    }
}

fn solve(
    file: &std::path::Path,
    algorithm: Algorithm,
    trace_path: Option<&std::path::Path>,
    validate: bool,
    max_iter: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", file.display());
            return EXIT_INPUT;
        }
    };
    let (g, sigma) = match parse_graph(&text) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", file.display());
            return EXIT_INPUT;
        }
    };

    let oracle_wanted = validate && g.vertex_count() <= VALIDATE_VERTEX_CAP;
    if validate && !oracle_wanted {
        let _ = writeln!(err, "validate: skipped, {} vertices exceeds the oracle cap of {VALIDATE_VERTEX_CAP}", g.vertex_count());
    }
    let (outcome, oracle) = thread::scope(|s| {
        let oracle = oracle_wanted.then(|| s.spawn(|| brute_force_matchings(&g, VALIDATE_VERTEX_CAP)));
        let outcome = run_algorithm(&g, &sigma, algorithm, max_iter);
        let oracle = oracle.map(|h| h.join().expect("oracle thread panicked").expect("size checked against the cap"));
        (outcome, oracle)
    });

    let mut status = report(&g, algorithm, &outcome, out, err);

    if let Some(path) = trace_path {
        let trace = match &outcome {
            Outcome::Solved(r) => Trace::from_result(algorithm.name(), &g, r),
            Outcome::Naive(t) => Trace::from_naive(&g, t),
        };
        if let Err(e) = std::fs::write(path, trace.to_json() + "\n") {
            let _ = writeln!(err, "error: cannot write trace to {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }

    if let Some(oracle) = oracle {
        match check_against_oracle(&g, &sigma, algorithm, &outcome, &oracle) {
            Ok(msg) => {
                let _ = writeln!(out, "validate: {msg}");
            }
            Err(msg) => {
                let _ = writeln!(err, "validate: mismatch: {msg}");
                status = EXIT_FAULT;
            }
        }
    }
    status
}

fn matching_cost(g: &Graph, matching: &[EdgeId]) -> i64 {
    matching.iter().map(|&e| g.edge(e).cost).sum()
}

fn report(g: &Graph, algorithm: Algorithm, outcome: &Outcome, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let _ = writeln!(out, "algorithm: {}", algorithm.name());
    let (iterations, solves) = match outcome {
        Outcome::Solved(Ok(r)) => (r.iterations.len(), r.total_lp_solves),
        Outcome::Naive(t) => (t.iterations.len(), t.total_lp_solves),
        Outcome::Solved(Err(_)) => (0, 0),
    };
    if let Outcome::Naive(t) = outcome {
        let _ = writeln!(out, "stop: {}", t.stop);
    }
    if let Some(m) = outcome.matching() {
        let labels: Vec<String> = m.iter().map(|&e| edge_label(g, e)).collect();
        let _ = writeln!(out, "matching: {}", labels.join(" "));
        let _ = writeln!(out, "cost: {}", matching_cost(g, m));
    }
    if !matches!(outcome, Outcome::Solved(Err(_))) {
        let _ = writeln!(out, "iterations: {iterations}");
        let _ = writeln!(out, "lp solves: {solves}");
    }
    match outcome {
        Outcome::Solved(Ok(_)) => EXIT_OK,
        Outcome::Solved(Err(e)) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CpmError::NoPerfectMatching => EXIT_NO_MATCHING,
                CpmError::OrderingLength { .. } => EXIT_INPUT,
                _ => EXIT_FAULT,
            }
        }
        Outcome::Naive(t) => match t.stop {
            StopReason::NoPerfectMatching => {
                let _ = writeln!(err, "error: graph has no perfect matching");
                EXIT_NO_MATCHING
            }
            StopReason::InvariantFault { .. } => EXIT_FAULT,
            _ => EXIT_OK,
        },
    }
}

fn check_against_oracle(
    g: &Graph,
    sigma: &EdgeOrdering,
    algorithm: Algorithm,
    outcome: &Outcome,
    oracle: &OracleResult,
) -> Result<String, String> {
    let Some(best) = oracle.min_cost else {
        return if outcome.no_perfect_matching() {
            Ok("oracle agrees there is no perfect matching".into())
        } else {
            Err("oracle finds no perfect matching".into())
        };
    };
    let Some(m) = outcome.matching() else {
        return match outcome {
            Outcome::Naive(t) if !matches!(t.stop, StopReason::NoPerfectMatching | StopReason::InvariantFault { .. }) => {
                Ok(format!("oracle minimum {best}; naive run stopped before an integral point"))
            }
            _ => Err(format!("oracle minimum {best}, solver returned no matching")),
        };
    };
    let cost = matching_cost(g, m);
    if cost != best {
        return Err(format!("cost {cost}, oracle minimum {best}"));
    }
    if algorithm != Algorithm::Naive {
        let expected = lex_tie_break(&oracle.matchings, sigma);
        if m != expected.as_slice() {
            let labels: Vec<String> = expected.iter().map(|&e| edge_label(g, e)).collect();
            return Err(format!("cost agrees but the tie-break matching is {}", labels.join(" ")));
        }
    }
    Ok(format!("oracle minimum {best} agrees"))
}
