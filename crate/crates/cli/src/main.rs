use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use salg_cli::{emit_plotdata, fixtures, linspace, run_suite, Quantity, Scenario, Sweep};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "salg", version, about = "Verification suites and plot data for string algebroids on flat tori")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Ell,
    Ray,
    Scale,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the suites requested by a scenario and print a JSON report.
    Verify {
        /// Bundled scenario name or path to a JSON scenario file.
        scenario: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit CSV plot data for one quantity over a sweep.
    Sweep {
        scenario: String,
        /// M_ell, potential_K, cone_metric_eigenvalues or conjecture_margin.
        #[arg(long)]
        quantity: String,
        #[arg(long, value_enum)]
        param: Param,
        /// Explicit sweep values (comma separated); overrides --from/--to/--steps.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.5)]
        from: f64,
        #[arg(long, default_value_t = 2.0)]
        to: f64,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Cone point (ell sweep) or ray base (ray sweep); defaults to (1, …, 1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
        /// Real variation direction for conjecture_margin; defaults to the ray base.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Vec<f64>,
        /// Level for ray sweeps.
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bundled fixtures.
    Fixtures {
        #[command(subcommand)]
        cmd: FixturesCmd,
    },
}

#[derive(Subcommand)]
enum FixturesCmd {
    /// List bundled scenarios, configurations, backgrounds and rings.
    List,
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SALG_THREADS") {
        let n: usize = v.parse().with_context(|| format!("SALG_THREADS = `{v}` is not a thread count"))?;
        if n == 0 {
            bail!("SALG_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn write(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.cmd {
        Cmd::Verify { scenario, seed, out } => {
            let mut sc = Scenario::load(&scenario)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            let rep = run_suite(&sc);
            for s in &rep.suites {
                eprintln!("{:<22} {}  {:.2}s", s.suite.id(), if s.passed { "pass" } else { "FAIL" }, s.seconds);
            }
            write(out, &(rep.to_json() + "\n"))?;
            Ok(rep.passed)
        }
        Cmd::Sweep { scenario, quantity, param, values, from, to, steps, point, direction, ell, out } => {
            let sc = Scenario::load(&scenario)?;
            let q: Quantity = quantity.parse()?;
            let values = values.unwrap_or_else(|| linspace(from, to, steps));
            let sweep = match param {
                Param::Ell => Sweep::Ell { values, point },
                Param::Ray => Sweep::Ray { ts: values, base: point, direction, ell },
                Param::Scale => Sweep::Scale { values },
            };
            write(out, &emit_plotdata(&sc, q, &sweep)?)?;
            Ok(true)
        }
        Cmd::Fixtures { cmd: FixturesCmd::List } => {
            for l in fixtures::listing() {
                println!("{l}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
