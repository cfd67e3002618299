//! `heatsym` command-line interface.
//!
//! Exit codes: 0 success, 1 numerical failure (step rejection, Newton
//! divergence, i/o), 2 usage or parse error.

use clap::{Parser, Subcommand};
use heatsym_cli::config::ExperimentConfig;
use heatsym_cli::runner::{check_mesh, compare, invariants_from_file, run, HarnessError};
use heatsym_cli::{csv_io, OUTPUT_DIR_ENV};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "heatsym",
    about = "Invariant finite-difference schemes and moving meshes for heat-transfer equations"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment config and write its outputs.
    Run { config: PathBuf },
    /// Run two configs sharing an oracle and tabulate their errors.
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        /// Directory for the comparison table and plot.
        #[arg(long, default_value = "compare-out")]
        output: PathBuf,
    },
    /// Tabulate the mesh-geometry conditions for an operator set
    /// (powerlaw | semilinear | linear).
    CheckMesh { set: String },
    /// Evaluate a family's difference invariants on a stencil file
    /// (ode | powerlaw | semilinear | linear).
    Invariants {
        family: String,
        stencil: PathBuf,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Evaluate a closed-form solution at a point:
    /// `exact <fundamental|linear|semilinear> --eval T X`.
    Exact {
        name: String,
        #[arg(long, num_args = 2, value_names = ["T", "X"], allow_negative_numbers = true)]
        eval: Vec<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        f0: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Time step of the semilinear recursion grid; T must be a multiple.
        #[arg(long)]
        tau_step: Option<f64>,
    },
}

fn output_override(path: PathBuf) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => path,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.cmd {
        Cmd::Run { config } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            cfg.output = output_override(cfg.output);
            let report = run(&cfg)?;
            println!(
                "ran {} steps to t = {}",
                report.history.len() - 1,
                csv_io::fmt(report.history.last().unwrap().t())
            );
            if let Some(err) = report.final_error() {
                println!("final_error = {}", csv_io::fmt(err));
            }
            println!(
                "max_residual = {}",
                csv_io::fmt(report.residual_norms.iter().copied().fold(0.0, f64::max))
            );
            println!("wall_time_ms = {:.3}", report.wall_time.as_secs_f64() * 1e3);
            println!("outputs in {}", cfg.output.display());
            Ok(())
        }
        Cmd::Compare {
            config_a,
            config_b,
            output,
        } => {
            let cfg_a = ExperimentConfig::from_file(&config_a)?;
            let cfg_b = ExperimentConfig::from_file(&config_b)?;
            let out = output_override(output);
            let cmp = compare(&cfg_a, &cfg_b, &out)?;
            println!("t, err_a, err_b, ratio");
            for row in &cmp.rows {
                println!(
                    "{}, {}, {}, {}",
                    csv_io::fmt(row.t),
                    csv_io::fmt(row.err_a),
                    csv_io::fmt(row.err_b),
                    csv_io::fmt(row.ratio)
                );
            }
            println!("outputs in {}", out.display());
            Ok(())
        }
        Cmd::CheckMesh { set } => {
            let rows = check_mesh(&set)?;
            println!("operator  time_uniform  space_uniform  orthogonal  flat_layers");
            for r in rows {
                println!(
                    "{:<9} {:<13} {:<14} {:<11} {}",
                    r.operator, r.time_uniform, r.space_uniform, r.orthogonal, r.flat_layers
                );
            }
            Ok(())
        }
        Cmd::Invariants {
            family,
            stencil,
            sigma,
            n,
            delta,
        } => {
            let inv = invariants_from_file(&family, &stencil, sigma, n, delta)?;
            for (name, value) in inv.names().iter().zip(inv.values()) {
                println!("{name} = {}", csv_io::fmt(*value));
            }
            Ok(())
        }
        Cmd::Exact {
            name,
            eval,
            c,
            alpha,
            f0,
            delta,
            tau_step,
        } => {
            let usage = |msg: &str| HarnessError::Usage(msg.to_string());
            let [t, x] = eval[..] else {
                return Err(usage("--eval takes exactly T X"));
            };
            let need = |opt: Option<f64>, what: &str| {
                opt.ok_or_else(|| usage(&format!("{name} needs --{what}")))
            };
            let u = match name.as_str() {
                "fundamental" => heatsym::exact::Fundamental { c: need(c, "c")? }.eval(x, t)?,
                "linear" => heatsym::exact::LinearExact {
                    alpha: need(alpha, "alpha")?,
                    f0: need(f0, "f0")?,
                }
                .eval(x, t)?,
                "semilinear" => {
                    let tau = need(tau_step, "tau-step")?;
                    let sol = heatsym::exact::SemilinearExact::new(
                        need(alpha, "alpha")?,
                        need(f0, "f0")?,
                        need(delta, "delta")?,
                        tau,
                    )?;
                    let j = (t / tau).round();
                    if j < 0.0 || (t - j * tau).abs() > 1e-9 * t.abs().max(1.0) {
                        return Err(usage("T must be a nonnegative multiple of --tau-step"));
                    }
                    sol.eval(x, j as usize)?
                }
                other => return Err(HarnessError::UnknownSet(other.to_string())),
            };
            println!("u({x}, {t}) = {}", csv_io::fmt(u));
            Ok(())
        }
    }
}
