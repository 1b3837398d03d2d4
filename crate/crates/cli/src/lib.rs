//! Command-line pipeline for certified ruin probabilities: tail bound and
//! barrier, two-barrier solve, Monte-Carlo validation, and one-command
//! reproduction of the case-study figures.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{Overrides, RunConfig, SolverKind};
pub use error::{exit, CliError, CliResult};
pub use pipeline::{cmd_bound, cmd_solve, cmd_validate, SolveOutput, Validation};

/// Prefix selecting an embedded configuration instead of a file.
pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Debug, Parser)]
#[command(name = "ruin", version, about = "Certified ruin probabilities via two-barrier fixpoints")]
pub struct Cli {
    /// JSON run configuration, or `builtin:<name>` for an embedded one.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Target precision ε in (0, 1).
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Share of ε given to the tail bound, in (0, 1].
    #[arg(long, global = true)]
    pub split: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub solver: Option<SolverKind>,
    /// Monte-Carlo trials per validation point.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Monte-Carlo steps per trial.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Monte-Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the net profit condition and print the tail bound and barrier.
    Bound,
    /// Solve for 1 − φ(·, y) and write curves and the certificate.
    Solve,
    /// Solve, then compare against Monte-Carlo estimates.
    Validate,
    /// Run an embedded case study end to end (fig1, fig2 or fig3).
    Reproduce { figure: String },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            epsilon: self.epsilon,
            split: self.split,
            solver: self.solver,
            trials: self.trials,
            horizon: self.horizon,
            seed: self.seed,
        }
    }

    fn load_config(&self) -> CliResult<RunConfig> {
        let spec = self
            .config
            .as_deref()
            .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
        let cfg = match spec.strip_prefix(BUILTIN_PREFIX) {
            Some(name) => RunConfig::embedded(name)?,
            None => RunConfig::from_path(Path::new(spec))?,
        };
        cfg.apply(&self.overrides())
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Solves and validates an embedded figure configuration, writing the bundle
/// to `out`. Files are written before a failed validation is reported.
pub fn cmd_reproduce(figure: &str, out: &Path, overrides: &Overrides) -> CliResult<(SolveOutput, Validation)> {
    if !matches!(figure, "fig1" | "fig2" | "fig3") {
        return Err(CliError::Config(format!("unknown figure `{figure}`; expected fig1, fig2 or fig3")));
    }
    let cfg = RunConfig::embedded(figure)?.apply(overrides)?;
    solve_and_validate(&cfg, out)
}

fn solve_and_validate(cfg: &RunConfig, out: &Path) -> CliResult<(SolveOutput, Validation)> {
    let solved = cmd_solve(cfg)?;
    output::write_solution(out, &solved)?;
    let validation = cmd_validate(&solved)?;
    output::write_validation(out, &validation)?;
    Ok((solved, validation))
}

fn print_certificate(solved: &SolveOutput) {
    let c = &solved.certificate;
    println!(
        "y = {}  tail = {:.6e}  solver error = {:.3e}  total = {:.6e}  (requested ε = {})",
        c.y, c.tail, c.solver_error, c.total, c.epsilon
    );
    if !c.meets_epsilon() {
        eprintln!("note: certified total exceeds the requested ε");
    }
}

fn print_validation(v: &Validation) {
    for r in &v.rows {
        println!(
            "z = {:<5} i = {:<5} p_hat = {:.4} [{:.4}, {:.4}]  psi_tilde = {:.4}  {}",
            r.z,
            r.i,
            r.estimate.p_hat,
            r.estimate.lo,
            r.estimate.hi,
            r.psi_tilde,
            if r.pass { "ok" } else { "FAIL" }
        );
    }
    println!("{} of {} points inside the band", v.passed, v.rows.len());
}

/// Runs one command; the error carries the process exit code.
pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Bound => {
            let cfg = cli.load_config()?;
            let report = cmd_bound(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serialisable"));
            if let Some(dir) = &cli.out {
                output::write_bound(dir, &report)?;
            }
        }
        Command::Solve => {
            let cfg = cli.load_config()?;
            let solved = cmd_solve(&cfg)?;
            let files = output::write_solution(&cli.out_dir(), &solved)?;
            print_certificate(&solved);
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Validate => {
            let cfg = cli.load_config()?;
            let (solved, v) = solve_and_validate(&cfg, &cli.out_dir())?;
            print_certificate(&solved);
            print_validation(&v);
            v.into_result()?;
        }
        Command::Reproduce { figure } => {
            let out = cli.out_dir().join(figure);
            let (solved, v) = cmd_reproduce(figure, &out, &cli.overrides())?;
            print_certificate(&solved);
            print_validation(&v);
            println!("bundle in {}", out.display());
            v.into_result()?;
        }
    }
    Ok(())
}
