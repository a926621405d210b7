//! `leafcomm` — experiment driver for formulas with low-communication
//! leaf gates.
//!
//! Exit codes: 0 success, 1 assertion failure (a check that was supposed to
//! hold did not), 2 validation failure (bad input, bad parameters).

mod commands;
mod suite;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "leafcomm", version, about = "formulas over low-communication leaf gates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula file and report its shape.
    Parse {
        #[arg(long)]
        file: String,
        #[arg(long)]
        nvars: usize,
        #[arg(long)]
        json: bool,
    },
    /// Build an approximating polynomial for a formula.
    Approx {
        #[arg(long)]
        file: String,
        #[arg(long)]
        nvars: usize,
        /// Error bound as an exact rational "A/B".
        #[arg(long)]
        eps: String,
        /// Re-verify the pointwise bound exhaustively and fail otherwise.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        json: bool,
    },
    /// Build a leaf-gate protocol and optionally enumerate its rectangles.
    Protocol {
        /// Single-leaf gate s-expression, e.g. "(xor 1 3)".
        #[arg(long)]
        gate: String,
        #[arg(long)]
        nvars: usize,
        /// Number-in-hand parties for symmetric gates (default 2).
        #[arg(long)]
        parties: Option<usize>,
        /// Error bound "A/B" for randomized (LTF) protocols.
        #[arg(long)]
        delta: Option<String>,
        /// Sample seed when dumping one member of a randomized family.
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
        #[arg(long)]
        enumerate: bool,
        #[arg(long)]
        json: bool,
    },
    /// Count satisfying assignments.
    Sat {
        #[arg(long)]
        file: String,
        #[arg(long)]
        nvars: usize,
        /// brute | fast | rand
        #[arg(long)]
        mode: String,
        #[arg(long)]
        nprime: Option<usize>,
        /// Constant in the n' balance.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        #[arg(long)]
        json: bool,
    },
    /// Expand or test a pseudorandom generator.
    Prg {
        /// smallbias | inw | gip
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        /// Bias/error target "A/B" (smallbias, inw).
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        dprime: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        /// Formula file to measure the fooling gap against.
        #[arg(long)]
        test_against: Option<String>,
        #[arg(long)]
        test_nvars: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Exact correlation of two formulas under a distribution.
    Corr {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        nvars: usize,
        /// JSON file with 2^n rational weights; uniform if omitted.
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Lower-bound and seed-length calculators (constant 1, q16 logs).
    Lbcalc {
        /// gip-size | seed-xor | seed-ltf | seed-sym | seed-nih | seed-nof
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        eps: String,
        /// Communication cost term "A/B".
        #[arg(long)]
        r: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        json: bool,
    },
    /// PAC-learn a formula-over-parities target.
    Learn {
        #[arg(long)]
        target: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run the regression-fixture registry.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
        /// Include a wall-clock section (breaks byte-for-byte comparisons).
        #[arg(long)]
        timestamps: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Parse { file, nvars, json } => commands::parse(&file, nvars, json),
        Cmd::Approx { file, nvars, eps, verify, json } => {
            commands::approx(&file, nvars, &eps, verify, json)
        }
        Cmd::Protocol { gate, nvars, parties, delta, sample_seed, enumerate, json } => {
            commands::protocol(&gate, nvars, parties, delta.as_deref(), sample_seed, enumerate, json)
        }
        Cmd::Sat { file, nvars, mode, nprime, c, seed, confidence, json } => {
            commands::sat(&file, nvars, &mode, nprime, c, seed, confidence, json)
        }
        Cmd::Prg { kind, n, delta, k, dprime, m, t, test_against, test_nvars, seed, json } => {
            commands::prg(commands::PrgArgs {
                kind,
                n,
                delta,
                k,
                dprime,
                m,
                t,
                test_against,
                test_nvars,
                seed,
                json,
            })
        }
        Cmd::Corr { f, g, nvars, dist, json } => commands::corr(&f, &g, nvars, dist.as_deref(), json),
        Cmd::Lbcalc { kind, n, s, m, k, eps, r, c, json } => {
            commands::lbcalc(&kind, n, s, m, k, &eps, r.as_deref(), c, json)
        }
        Cmd::Learn { target, n, s, eps, delta, seed, json } => {
            commands::learn(&target, n, s, eps, delta, seed, json)
        }
        Cmd::Suite { seed, out, timestamps } => suite::run(seed, out.as_deref(), timestamps),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CmdError::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(1)
        }
        Err(commands::CmdError::Validation(msg)) => {
            eprintln!("invalid input: {msg}");
            ExitCode::from(2)
        }
    }
}
