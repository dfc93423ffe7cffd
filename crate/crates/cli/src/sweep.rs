use std::fmt::Write as _;
use std::fs;

use crate::args::{SolveArgs, SweepArgs};
use crate::run::{execute, write_outputs, CliError, Summary};

fn grid(args: &SweepArgs) -> Vec<SolveArgs> {
    let mut out = Vec::new();
    for &beta in &args.betas {
        for &theta in &args.thetas {
            for &memory_depth in &args.memory_depths {
                let mut a = args.base.clone();
                a.beta = beta;
                a.theta = theta;
                a.memory_depth = memory_depth;
                a.out_dir = args
                    .base
                    .out_dir
                    .join(format!("beta{beta}_theta{theta}_md{memory_depth}"));
                out.push(a);
            }
        }
    }
    out
}

fn run_one(a: &SolveArgs) -> Result<Summary, CliError> {
    let outcome = execute(a)?;
    write_outputs(&outcome, &a.out_dir)?;
    Ok(outcome.summary)
}

#[cfg(feature = "parallel")]
fn run_all(configs: &[SolveArgs], jobs: usize) -> Result<Vec<Result<Summary, CliError>>, CliError> {
    use rayon::prelude::*;
    if jobs <= 1 {
        return Ok(configs.iter().map(run_one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| configs.par_iter().map(run_one).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_all(configs: &[SolveArgs], _jobs: usize) -> Result<Vec<Result<Summary, CliError>>, CliError> {
    Ok(configs.iter().map(run_one).collect())
}

/// Runs every grid point into its own subdirectory and writes `sweep.csv`.
pub fn run_sweep(args: &SweepArgs) -> Result<u8, CliError> {
    if args.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let configs = grid(args);
    if configs.is_empty() {
        return Err(CliError::Config("empty sweep grid".into()));
    }
    let results = run_all(&configs, args.jobs)?;

    let mut csv = String::from("beta,theta,memory_depth,status,iterations,phases,oracle_calls,ub,gap\n");
    let mut code = 0;
    for (cfg, res) in configs.iter().zip(results) {
        let s = res?;
        if !s.converged() {
            code = 2;
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{:e},{:e}",
            cfg.beta,
            cfg.theta,
            cfg.memory_depth,
            s.status,
            s.iterations,
            s.phases,
            s.oracle_calls.total(),
            s.objective,
            s.gap
        );
        println!(
            "beta {} theta {} md {}: {} in {} iterations",
            cfg.beta, cfg.theta, cfg.memory_depth, s.status, s.iterations
        );
    }
    fs::create_dir_all(&args.base.out_dir)?;
    fs::write(args.base.out_dir.join("sweep.csv"), csv)?;
    Ok(code)
}
