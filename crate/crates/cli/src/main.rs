use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use conecert::cones::horn_matrix;
use conecert::exactfield::{parse_rat, Rat};
use conecert::pipeline::{run_ecop, run_extend, run_seed, run_verify, Certificate, PipelineConfig};
use conecert::volume::{volume_report, VolumeCone};

#[derive(Parser)]
#[command(name = "conecert", version, about = "Exact certificates for DNN-not-CP and copositive-not-SPN matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the seed SDP and emit a 5x5 e-DNN certificate.
    Seed {
        #[arg(long, default_value = "1/20")]
        epsilon: String,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long = "m-prime", default_value_t = 5)]
        m_prime: usize,
        #[arg(long, default_value_t = 1_000_000)]
        denominator_bound: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extend an e-DNN certificate to size n.
    Extend {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an e-COP certificate separating the given e-DNN matrix from SPN.
    Ecop {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long = "epsilon-prime", default_value = "1/10")]
        epsilon_prime: String,
        #[arg(long, default_value_t = 1_000_000)]
        denominator_bound: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run every exact check on a certificate file.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Text)]
        format: VerifyFormat,
    },
    /// Monte Carlo volume radii of cone sections of the unit ball.
    Vrad {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "nn,psd,dnn,spn", value_delimiter = ',')]
        cones: Vec<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to the extension of --out, else csv.
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
    },
    /// Print the Horn matrix.
    Horn {
        #[arg(long, value_enum, default_value_t = HornFormat::Text)]
        format: HornFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum HornFormat {
    Text,
    Json,
}

fn rational(s: &str, what: &str) -> Result<Rat> {
    parse_rat(s).with_context(|| format!("bad value for {what}: {s:?}"))
}

fn write_cert(cert: &Certificate, out: &Path) -> Result<()> {
    cert.write(out).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("wrote {} ({} certificate, n = {})", out.display(), cert.kind, cert.n());
    Ok(())
}

fn read_cert(path: &Path) -> Result<Certificate> {
    Certificate::read(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Seed { epsilon, m, m_prime, denominator_bound, out } => {
            let mut config = PipelineConfig { epsilon: rational(&epsilon, "--epsilon")?, m, m_prime, ..Default::default() };
            config.rounding.denominator_bound = denominator_bound;
            write_cert(&run_seed(&config)?, &out)?;
        }
        Cmd::Extend { cert, n, out } => {
            let c = read_cert(&cert)?;
            write_cert(&run_extend(&c, n)?, &out)?;
        }
        Cmd::Ecop { cert, k, epsilon_prime, denominator_bound, out } => {
            let c = read_cert(&cert)?;
            let mut config = PipelineConfig {
                epsilon_prime: rational(&epsilon_prime, "--epsilon-prime")?,
                k,
                ..Default::default()
            };
            config.rounding.denominator_bound = denominator_bound;
            write_cert(&run_ecop(&c, &config)?, &out)?;
        }
        Cmd::Verify { file, format } => {
            let report = run_verify(&file).with_context(|| format!("verifying {}", file.display()))?;
            match format {
                VerifyFormat::Text => print!("{report}"),
                VerifyFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Vrad { n, cones, samples, seed, out, format } => {
            let cones = cones.iter().map(|s| s.parse::<VolumeCone>()).collect::<Result<Vec<_>, _>>()?;
            if cones.is_empty() {
                bail!("--cones is empty");
            }
            if cones.contains(&VolumeCone::Spn) && n > 5 {
                bail!("spn membership solves an SDP per sample; n is limited to 5 (got {n})");
            }
            let format = format.unwrap_or_else(|| match out.as_ref().and_then(|p| p.extension()) {
                Some(e) if e == "json" => ReportFormat::Json,
                _ => ReportFormat::Csv,
            });
            let report = volume_report(n, &cones, samples, seed)?;
            let text = match format {
                ReportFormat::Csv => report.to_csv(),
                ReportFormat::Json => report.to_json() + "\n",
            };
            match &out {
                Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            let v = report.violations;
            if v.total() > 0 {
                eprintln!("inclusion violations: {v:?}");
            }
        }
        Cmd::Horn { format } => {
            let h = horn_matrix();
            match format {
                HornFormat::Text => {
                    for row in h.rows() {
                        let cells: Vec<String> = row.iter().map(|x| format!("{:>3}", x.to_string())).collect();
                        println!("{}", cells.join(" "));
                    }
                }
                HornFormat::Json => println!("{}", serde_json::to_string(&h)?),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
