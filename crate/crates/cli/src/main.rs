use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use openbook_core::brieskorn::BrieskornParams;
use openbook_core::export::{sample_records, write_rescale_table, SampleCounts};
use openbook_core::profile::TwistProfile;
use openbook_core::report::CheckReport;
use openbook_core::suite::{check_names, run_verify, threads_from_env, RunConfig, DEFAULT_SAMPLES};
use openbook_core::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "openbook",
    version,
    about = "Check that Brieskorn contact forms are supported by an open book"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite over an (n, k) grid.
    Verify(VerifyArgs),
    /// Write the profile table `y,f_k,I,h_k,h_aux` and the `r,g` table.
    Profile(ProfileArgs),
    /// Emit sampled binding, page and torus points as JSON lines.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Output file (standard output if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Repeatable; default 2, 3, 4.
    #[arg(long = "n")]
    n: Vec<usize>,
    /// Repeatable; default 1, 2, 3, 5, 8.
    #[arg(long = "k")]
    k: Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Tolerance override, `<check>=<value>`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Check to run, or `all`; repeatable.
    #[arg(long = "check")]
    check: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long = "k")]
    k: u32,
    /// Rows in the profile table.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Rows in the `g` table.
    #[arg(long, default_value_t = 200)]
    g_points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long = "n")]
    n: usize,
    #[arg(long = "k")]
    k: u32,
    #[arg(long, default_value_t = 10)]
    binding: usize,
    #[arg(long, default_value_t = 10)]
    page: usize,
    #[arg(long, default_value_t = 10)]
    torus: usize,
    #[command(flatten)]
    common: Common,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected <check>=<value>")?;
    let value: f64 = value
        .parse()
        .map_err(|e| format!("bad tolerance `{value}`: {e}"))?;
    Ok((name.to_string(), value))
}

enum Failure {
    Usage(String),
    Io(String),
    Numeric(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let checks = if args.check.is_empty() || args.check.iter().any(|c| c == "all") {
        None
    } else {
        Some(args.check)
    };
    let config = RunConfig {
        n_list: if args.n.is_empty() {
            vec![2, 3, 4]
        } else {
            args.n
        },
        k_list: if args.k.is_empty() {
            vec![1, 2, 3, 5, 8]
        } else {
            args.k
        },
        samples: args.samples,
        seed: args.common.seed,
        tol_overrides: args.tol.into_iter().collect::<BTreeMap<_, _>>(),
        checks,
        threads: threads_from_env(),
    };
    config.validate().map_err(|e| {
        let hint = match e {
            Error::InvalidParams(ref m) if m.starts_with("unknown check") => {
                format!("{e}\nknown checks: {}", check_names().join(", "))
            }
            _ => e.to_string(),
        };
        Failure::Usage(hint)
    })?;
    let reports = run_verify(&config)?;
    let mut out = open_output(&args.common.output)?;
    write_reports(&reports, args.format, &mut out)?;
    out.flush()?;
    let failing: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.failing()
                .map(move |name| format!("n={} k={} {name}", r.n, r.k))
        })
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(failing))
    }
}

fn write_reports(
    reports: &[CheckReport],
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let text = match reports {
                [one] => serde_json::to_string_pretty(one),
                many => serde_json::to_string_pretty(many),
            }
            .map_err(|e| Failure::Io(e.to_string()))?;
            writeln!(out, "{text}")?;
        }
        Format::Text => {
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write!(out, "{}", r.to_text())?;
            }
        }
        Format::Csv => {
            writeln!(out, "n,k,seed,check,samples,max_abs_err,tolerance,pass")?;
            for r in reports {
                for c in &r.checks {
                    writeln!(
                        out,
                        "{},{},{},{},{},{:e},{:e},{}",
                        r.n, r.k, r.seed, c.name, c.samples, c.max_abs_err, c.tolerance, c.pass
                    )?;
                }
            }
        }
    }
    Ok(())
}

fn profile(args: ProfileArgs) -> Result<(), Failure> {
    if !matches!(args.format, Format::Csv) {
        return Err(Failure::Usage("profile supports --format csv only".into()));
    }
    if args.points < 2 || args.g_points < 2 {
        return Err(Failure::Usage(
            "--points and --g-points must be at least 2".into(),
        ));
    }
    let prof = TwistProfile::new(args.k)?;
    let mut out = open_output(&args.common.output)?;
    prof.write_table(&prof.default_grid(args.points), &mut out)?;
    writeln!(out)?;
    write_rescale_table(&prof, args.g_points, &mut out)?;
    out.flush()?;
    Ok(())
}

fn sample(args: SampleArgs) -> Result<(), Failure> {
    let params = BrieskornParams::new(args.n, args.k)?;
    let prof = TwistProfile::new(args.k)?;
    let counts = SampleCounts {
        binding: args.binding,
        page: args.page,
        torus: args.torus,
    };
    let records = sample_records(&params, &prof, counts, args.common.seed)?;
    let mut out = open_output(&args.common.output)?;
    for rec in &records {
        let line = serde_json::to_string(rec).map_err(|e| Failure::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Profile(a) => profile(a),
        Command::Sample(a) => sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Numeric(names)) => {
            eprintln!("failing checks:");
            for n in names {
                eprintln!("  {n}");
            }
            ExitCode::from(EXIT_FAIL)
        }
    }
}
