//! frameflow: experiments on twisted transfer operators of Schottky groups.
//!
//! Exit codes: 0 all asserted properties pass, 1 an assertion failed,
//! 2 configuration error, 3 numeric error.

mod cmds;
mod csvout;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use cmds::{CliError, CmdResult};

#[derive(Parser)]
#[command(name = "frameflow", version, about = "spectral experiments for Schottky group transfer operators")]
struct Cli {
    /// Seed for every pseudo-random stream (SplitMix64).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads for grid experiments; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output directory for results without an explicit --out.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify structural identities of a Lie algebra model.
    LieVerify {
        /// so | su | sp | sl3
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Flow time for the grading check.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the limit set of a Schottky group.
    LimitSet {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        per_word: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical exponent as the pressure root, cross-checked at two depths.
    Critexp {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decay rate of one twisted transfer operator cell.
    Spectrum {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        ell: i64,
        #[arg(long, default_value_t = 14)]
        kmax: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation decay of the suspension flow.
    Decay {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 30.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.6)]
        omega_phi: f64,
        #[arg(long, default_value_t = 0.0)]
        omega_psi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-concentration witness search over the limit set.
    Ncp {
        #[arg(long)]
        group: PathBuf,
        /// Dyadic epsilon exponents lo:hi, scanning eps = 2^-lo .. 2^-hi.
        #[arg(long, default_value = "3:7")]
        eps_grid: String,
        #[arg(long, default_value_t = 0.5)]
        kappa: f64,
        #[arg(long, default_value_t = 7)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dolgopyat operator properties on one twist cell.
    Dolgopyat {
        #[arg(long)]
        group: PathBuf,
        #[arg(long, default_value_t = 5.0)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        ell: i64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full battery on the bundled groups.
    All,
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::LieVerify { family, n, t, out } => cmds::lie_verify(
            family,
            *n,
            *t,
            cli.seed,
            &cmds::out_path(out, &cli.out_dir, "lie.csv"),
        ),
        Cmd::LimitSet { group, depth, per_word, out } => cmds::limit_set(
            group,
            *depth,
            *per_word,
            cli.seed,
            &cmds::out_path(out, &cli.out_dir, "limit_set.csv"),
        ),
        Cmd::Critexp { group, depth, tol, out } => cmds::critexp(
            group,
            *depth,
            *tol,
            cli.seed,
            &cmds::out_path(out, &cli.out_dir, "critexp.csv"),
        ),
        Cmd::Spectrum { group, depth, a, b, ell, kmax, trials, out } => cmds::spectrum(
            group,
            *depth,
            *a,
            *b,
            *ell,
            *kmax,
            *trials,
            cli.seed,
            &cmds::out_path(out, &cli.out_dir, "spectrum.csv"),
        ),
        Cmd::Decay { group, depth, tmax, omega_phi, omega_psi, out } => cmds::decay(
            group,
            *depth,
            *tmax,
            *omega_phi,
            *omega_psi,
            cli.seed,
            &cmds::out_path(out, &cli.out_dir, "decay.csv"),
        ),
        Cmd::Ncp { group, eps_grid, kappa, depth, out } => cmds::ncp(
            group,
            eps_grid,
            *kappa,
            *depth,
            cli.seed,
            &cmds::out_path(out, &cli.out_dir, "ncp.csv"),
        ),
        Cmd::Dolgopyat { group, b, ell, samples, out } => cmds::dolgopyat(
            group,
            *b,
            *ell,
            *samples,
            cli.seed,
            &cmds::out_path(out, &cli.out_dir, "dolgopyat.csv"),
        ),
        Cmd::All => cmds::all(cli.seed, cli.threads, &cli.out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => {
            println!("ok: all asserted properties pass");
            ExitCode::from(0)
        }
        Ok(false) => {
            eprintln!("assertion failure: see the emitted CSV for the failing rows");
            ExitCode::from(1)
        }
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("numeric error: {m}");
            ExitCode::from(3)
        }
    }
}
