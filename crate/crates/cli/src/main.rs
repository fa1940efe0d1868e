use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use vft_core::allowable::{total_volume, SampledDensity};
use vft_core::bordism::Bordism;
use vft_core::evaluator::{eval, partition_function_certified, BlockOperatorJson};
use vft_core::frobenius::DEFAULT_TOL;
use vft_core::lorentzian::{eval_lorentzian, long_distance_linf, short_distance_l0, UnboundedBlockOperatorJson};
use vft_core::spectral::{SpectralVft, SpectralVftJson};
use vft_core::suites::{run_suite, Suite};
use vft_core::yang_mills::{build_datum, parse_rational, ym_vft, GroupType};
use vft_core::Error;

const VALIDATION_FAILURE: u8 = 1;
const USAGE: u8 = 2;
const CERTIFICATION_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "vft", version, about = "Evaluate 2d volume-dependent field theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every block of a theory file.
    Validate { theory: PathBuf },
    /// Evaluate a bordism with volume labels.
    Eval {
        theory: PathBuf,
        bordism: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Closed genus-G surface with one volume label.
    Partition {
        theory: PathBuf,
        #[arg(long)]
        genus: u32,
        /// Complex volume as `RE,IM` (a bare `RE` means zero imaginary part).
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        volume: Complex64,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Evaluate a bordism with imaginary or zero labels.
    Lorentz {
        theory: PathBuf,
        bordism: PathBuf,
        #[arg(long)]
        lambda_max: f64,
    },
    /// Short- or long-distance topological limit of a bordism.
    Limits {
        theory: PathBuf,
        bordism: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Generate a Yang-Mills theory from root data.
    YmGen {
        #[arg(long)]
        group: String,
        #[arg(long)]
        cmax: f64,
        /// Coupling constant as `p/q`.
        #[arg(long, default_value = "1/1")]
        norm: String,
    },
    /// Total volume label of a sampled density.
    MetricVolume { mesh: PathBuf },
    /// Seeded property checks.
    Check {
        theory: PathBuf,
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Short,
    Long,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let re: f64 = re.trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Complex64::new(re, im))
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::Certification(_)) => CERTIFICATION_FAILURE,
            Failure::Core(
                Error::ImaginaryLabel
                | Error::VolumeLabel(_)
                | Error::ClosedLorentzian
                | Error::UnsupportedGroup(_)
                | Error::Precondition(_),
            ) => USAGE,
            Failure::Io(_) => USAGE,
            Failure::Core(_) => VALIDATION_FAILURE,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) => m.clone(),
        }
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_theory(path: &Path) -> Result<SpectralVft, Failure> {
    let raw: SpectralVftJson = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    Ok(raw.into_vft(DEFAULT_TOL)?)
}

fn load_bordism(path: &Path) -> Result<Bordism, Failure> {
    Ok(serde_json::from_str(&read(path)?).map_err(Error::from)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { theory } => {
            let raw: SpectralVftJson = serde_json::from_str(&read(&theory)?).map_err(Error::from)?;
            let report = raw.validate(DEFAULT_TOL);
            Ok((to_value(&report), report.passed))
        }
        Command::Eval { theory, bordism, eps } => {
            let op = eval(&load_theory(&theory)?, &load_bordism(&bordism)?, eps)?;
            Ok((to_value(&BlockOperatorJson::from(&op)), true))
        }
        Command::Partition {
            theory,
            genus,
            volume,
            eps,
        } => {
            let (z, tail) = partition_function_certified(&load_theory(&theory)?, genus, volume, eps)?;
            Ok((json!({ "value": [z.re, z.im], "tail_bound": tail }), true))
        }
        Command::Lorentz {
            theory,
            bordism,
            lambda_max,
        } => {
            let u = eval_lorentzian(&load_theory(&theory)?, &load_bordism(&bordism)?, lambda_max)?;
            Ok((to_value(&UnboundedBlockOperatorJson::from(&u)), true))
        }
        Command::Limits { theory, bordism, mode } => {
            let (vft, x) = (load_theory(&theory)?, load_bordism(&bordism)?);
            let out = match mode {
                Mode::Short => to_value(&UnboundedBlockOperatorJson::from(&short_distance_l0(&vft, &x)?)),
                Mode::Long => to_value(&BlockOperatorJson::from(&long_distance_linf(&vft, &x)?)),
            };
            Ok((out, true))
        }
        Command::YmGen { group, cmax, norm } => {
            let group: GroupType = group.parse()?;
            let datum = build_datum(group, parse_rational(&norm)?)?;
            let vft = ym_vft(&datum, cmax)?;
            let growth = vec![vft.check_growth(0.05), vft.check_growth(0.1)];
            Ok((to_value(&SpectralVftJson::from_vft(&vft, growth)), true))
        }
        Command::MetricVolume { mesh } => {
            let d: SampledDensity = serde_json::from_str(&read(&mesh)?).map_err(Error::from)?;
            let labels = total_volume(&d)?;
            let out = match labels.as_slice() {
                [one] => to_value(one),
                many => to_value(&many),
            };
            Ok((out, true))
        }
        Command::Check { theory, suite, seed } => {
            let suite: Suite = suite.parse()?;
            let report = run_suite(&load_theory(&theory)?, suite, seed)?;
            Ok((to_value(&report), report.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((value, passed)) => {
            let text = serde_json::to_string_pretty(&value).expect("valid json");
            // ignore a closed pipe
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(VALIDATION_FAILURE)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
