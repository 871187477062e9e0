use std::f64::consts::PI;
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vesture::targets::KnIdentification;
use vesture::Signature;
use vesture_cli::run::{preset_outputs, write_outputs};
use vesture_cli::selftest::{all_pass, render};
use vesture_cli::{
    init_threads, kerr_newman_preset, kerr_preset, parse_config, run_dress, run_selftest,
    run_verify, CliError, ExitCode, Format, PresetGrid, SelftestOptions, Summary,
};

#[derive(Parser)]
#[command(name = "vesture", version, about = "Soliton dressing of axisymmetric harmonic maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a grid as described by a JSON run configuration.
    Dress {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Kerr from the 1-soliton G(1,1) dressing, diffed against the Kerr potentials.
    Kerr {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Kerr-Newman from the closed-form G(2,1) family, diffed against the KN potentials.
    KerrNewman {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        e: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, value_enum, default_value_t = Ident::Realizable)]
        identification: Ident,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Recompute residuals from the q columns of a stored output.
    Verify {
        file: PathBuf,
        /// Signature as p,q; inferred for 2x2 (1,1) and 3x3 (2,1) outputs.
        #[arg(long, value_parser = parse_signature)]
        signature: Option<Signature>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run the invariant suites.
    Selftest {
        /// Negative control: flip the sign of b(lambda).
        #[arg(long)]
        inject_b_sign_bug: bool,
        /// Negative control: perturb one structure constant.
        #[arg(long)]
        perturb_table: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Ident {
    Printed,
    Realizable,
}

#[derive(Args)]
struct GridArgs {
    /// Radial range; defaults to [m + 1.5, m + 10].
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    r: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [PI / 8.0, 7.0 * PI / 8.0])]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 40)]
    nr: usize,
    #[arg(long, default_value_t = 40)]
    ntheta: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

impl GridArgs {
    fn grid(&self) -> PresetGrid {
        PresetGrid {
            r: self.r.as_ref().map(|r| (r[0], r[1])),
            theta: (self.theta[0], self.theta[1]),
            count: (self.nr, self.ntheta),
        }
    }

    fn outputs(&self, default: &str) -> vesture_cli::Outputs {
        let path = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        let format = match self.format {
            Some(Fmt::Csv) => Format::Csv,
            Some(Fmt::Json) => Format::Json,
            None => Format::from_path(&path),
        };
        preset_outputs(path, format)
    }
}

fn parse_signature(s: &str) -> Result<Signature, String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    let p = p.trim().parse().map_err(|_| format!("bad p in \"{s}\""))?;
    let q = q.trim().parse().map_err(|_| format!("bad q in \"{s}\""))?;
    Signature::new(p, q).map_err(|e| e.to_string())
}

fn finish(summary: Summary) -> ExitCode {
    print!("{}", summary.render());
    summary.exit()
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    init_threads()?;
    match cli.command {
        Command::Dress { config } => {
            let text = std::fs::read(&config)
                .map_err(|e| CliError::Io(format!("{}: {e}", config.display())))?;
            let cfg = parse_config(&text)?;
            Ok(finish(run_dress(&cfg)?))
        }
        Command::Kerr { m, s, grid } => {
            let sweep = kerr_preset(m, s, &grid.grid())?;
            write_outputs(&sweep, &grid.outputs("kerr.csv"))?;
            Ok(finish(sweep.summary))
        }
        Command::KerrNewman { m, e, s, identification, grid } => {
            let ident = match identification {
                Ident::Printed => KnIdentification::Printed,
                Ident::Realizable => KnIdentification::Realizable,
            };
            let sweep = kerr_newman_preset(m, e, s, ident, &grid.grid())?;
            write_outputs(&sweep, &grid.outputs("kerr-newman.csv"))?;
            Ok(finish(sweep.summary))
        }
        Command::Verify { file, signature, tol } => {
            let report = run_verify(&file, signature, tol)?;
            print!("{}", report.render());
            Ok(if report.exit_code == 0 {
                ExitCode::Success
            } else {
                ExitCode::Constraint
            })
        }
        Command::Selftest { inject_b_sign_bug, perturb_table } => {
            let results = run_selftest(SelftestOptions {
                b_sign_bug: inject_b_sign_bug,
                perturb_table,
            });
            print!("{}", render(&results));
            Ok(if all_pass(&results) {
                ExitCode::Success
            } else {
                ExitCode::Constraint
            })
        }
    }
}

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vesture: {e}");
            e.exit_code()
        }
    };
    process::exit(code as i32);
}
