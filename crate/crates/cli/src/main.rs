mod commands;
mod format;
mod source;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sspert::NumericPolicy;

#[derive(Parser)]
#[command(name = "sspert", version, about = "SSP radii and optimal downwind perturbations of Runge-Kutta methods")]
struct Cli {
    /// Structured output with full-precision values.
    #[arg(long, global = true)]
    json: bool,

    /// auto, rational or float.
    #[arg(long, global = true, env = "SSPERT_NUMERIC", default_value = "auto")]
    numeric: NumericPolicy,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmChoice {
    Lp,
    Splitting,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Radius of absolute monotonicity R(K).
    Radius { method: String },
    /// R(K, K~) for a method file carrying A_tilde and b_tilde.
    RadiusPerturbed { method: String },
    /// Upper bounds on the optimal perturbed radius.
    Bounds { method: String },
    /// Optimal downwind perturbation.
    Optimize {
        method: String,
        #[arg(long, value_enum, default_value = "lp")]
        algorithm: AlgorithmChoice,
        #[arg(long, default_value_t = sspert::optimize::DEFAULT_TOL)]
        tol: f64,
    },
    /// Threshold factor of the bivariate stability function.
    LinearRadius { method: String },
    /// Optimal threshold factors over polynomials of given degree and order.
    ThresholdTable {
        #[arg(long, default_value_t = 10)]
        smax: usize,
        #[arg(long, default_value_t = 10)]
        pmax: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Built-in methods.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Recompute the reference table for every built-in method.
    Table2,
    /// Numerical experiments.
    Demo {
        #[command(subcommand)]
        kind: DemoKind,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show {
        name: String,
        /// Recompute and compare against the stored reference values.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Subcommand)]
enum DemoKind {
    /// Square-wave advection with upwind and downwind differences.
    Advection {
        method: String,
        /// Use the optimal downwind perturbation.
        #[arg(long)]
        perturbed: bool,
        #[arg(long, default_value_t = 0.9)]
        cfl: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
}

pub struct Ctx {
    pub json: bool,
    pub numeric: NumericPolicy,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let ctx = Ctx { json: cli.json, numeric: cli.numeric };
    match cli.command {
        Command::Radius { method } => commands::radius(&ctx, &method, false),
        Command::RadiusPerturbed { method } => commands::radius(&ctx, &method, true),
        Command::Bounds { method } => commands::bounds(&ctx, &method),
        Command::Optimize { method, algorithm, tol } => commands::optimize(&ctx, &method, algorithm, tol),
        Command::LinearRadius { method } => commands::linear_radius(&ctx, &method),
        Command::ThresholdTable { smax, pmax, tol } => commands::threshold_table(&ctx, smax, pmax, tol),
        Command::Catalog { action: CatalogAction::List } => commands::catalog_list(&ctx),
        Command::Catalog { action: CatalogAction::Show { name, verify } } => commands::catalog_show(&ctx, &name, verify),
        Command::Table2 => commands::table2(&ctx),
        Command::Demo { kind: DemoKind::Advection { method, perturbed, cfl, n, steps } } => {
            commands::advection(&ctx, &method, perturbed, cfl, n, steps)
        }
    }
}

fn main() -> ExitCode {
    // exit quietly when piped into `head`
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
