mod failure;
mod files;

use std::f64::consts::FRAC_PI_8;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use locc_core::channel::{COMPLETENESS_REJECT_TOL, COMPLETENESS_WARN_TOL, DEFAULT_EQUALITY_TOL};
use locc_core::protocol::{three_round_domino_protocol, usd_oneway_protocol, verify_protocol};
use locc_core::sweep::{run_sweep, write_csv};
use locc_core::zoo::{self, RotatedDominoParams, UsdParams, DEFAULT_ETA};
use locc_core::{gate_channel, KrausChannel, DEFAULT_GATE_TOL};
use num_complex::Complex64;
use rand::SeedableRng;

use failure::{code, Failure};

#[derive(Parser)]
#[command(
    name = "locc",
    version,
    about = "Certify that quantum channels cannot be implemented by LOCC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the first-measurement gate on a channel file and print the verdict
    /// as JSON.
    ///
    /// Exit codes: 0 analysis done (any verdict), 3 parse error,
    /// 4 dimension error, 5 completeness failure, 7 I/O error.
    Check {
        #[arg(long)]
        channel: PathBuf,
        /// Relative eigenvalue threshold for an empty nullspace.
        #[arg(long, default_value_t = DEFAULT_GATE_TOL)]
        tol: f64,
    },
    /// Write a channel from the built-in families to a JSON file.
    Zoo(ZooArgs),
    /// Run a seeded parameter sweep and write one CSV row per sample.
    ///
    /// Column order is fixed per family:
    ///   rotated_domino: sample,theta1,theta2,theta3,theta4,theta_min,ratio_p0,ratio_p1,lambda_hat,verdict
    ///   random_unitary: sample,dims,n_u,ratio_p0..ratio_p{n-1},lambda_hat,verdict
    ///   usd:            sample,abs_alpha1,abs_beta1,abs_alpha3,abs_beta3,arg_alpha3,eta1,eta3,ratio_p0,ratio_p1,lambda_hat,verdict
    ///
    /// Config keys: family, samples, seed, rel_tol (optional), theta_range
    /// (rotated_domino), dims and nu (random_unitary; samples counts draws per
    /// nu), eta1 and eta3 (usd).
    #[command(verbatim_doc_comment)]
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compile a protocol tree and compare it with a channel.
    ///
    /// Prints {"ok", "choi_distance"} as JSON. Exit code 0 iff ok, 1 if the
    /// channels differ, 3/4/6 for parse, dimension and protocol errors.
    VerifyProtocol {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        /// Largest allowed Choi-matrix entry difference.
        #[arg(long, default_value_t = DEFAULT_EQUALITY_TOL)]
        tol: f64,
    },
    /// Write one of the built-in protocol trees to a JSON file.
    Protocol {
        #[command(subcommand)]
        which: ProtocolCommand,
    },
}

#[derive(Subcommand)]
enum ProtocolCommand {
    /// Three-round protocol for the rotated domino channel with theta1 = 0.
    ThreeRound {
        /// theta2,theta3,theta4 in [0, pi/4].
        #[arg(long, value_delimiter = ',', default_values_t = [FRAC_PI_8; 3])]
        theta: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// One-way protocol for the discrimination channel at alpha3 = 0.
    UsdOneway {
        /// |alpha1| in (0, 1/sqrt 2); beta1 is real and positive.
        #[arg(long, default_value_t = 0.4)]
        alpha1: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ZooName {
    Bell,
    Domino,
    RotatedDomino,
    RandomUnitary,
    Usd,
    UsdLimit,
    Identity,
    Dephasing,
    Swap,
    ProductUnitary,
}

#[derive(Args)]
struct ZooArgs {
    name: ZooName,
    #[arg(long)]
    out: PathBuf,
    /// rotated-domino angles theta1..theta4 in [0, pi/4].
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// Local dimensions for identity, dephasing, random-unitary, product-unitary.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 2])]
    dims: Vec<usize>,
    /// Number of random unitaries.
    #[arg(long, default_value_t = 3)]
    nu: usize,
    /// Seed for random families.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dephased party.
    #[arg(long, default_value_t = 0)]
    party: usize,
    /// usd and usd-limit: |alpha1|. usd draws all amplitudes from the seed
    /// unless both --alpha1 and --alpha3 are given.
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha3: Option<f64>,
    /// Phase of alpha3 in radians.
    #[arg(long, default_value_t = 0.0)]
    phase3: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta1: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta3: f64,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn angles<const N: usize>(theta: &[f64]) -> Result<[f64; N], Failure> {
    theta.try_into().map_err(|_| {
        Failure::new(
            code::INVALID,
            format!(
                "invalid parameters: --theta needs {N} comma-separated angles, got {}",
                theta.len()
            ),
        )
    })
}

fn positive_part(a: f64) -> Result<(Complex64, Complex64), Failure> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Failure::new(
            code::INVALID,
            format!("invalid parameters: |alpha| = {a} outside [0, 1]"),
        ));
    }
    Ok((real(a), real((1.0 - a * a).sqrt())))
}

fn build_zoo(a: &ZooArgs) -> Result<KrausChannel, Failure> {
    if a.dims.is_empty() || a.dims.contains(&0) {
        return Err(Failure::new(
            code::INVALID,
            format!("invalid parameters: --dims {:?} must list positive dimensions", a.dims),
        ));
    }
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(a.seed);
    let c = match a.name {
        ZooName::Bell => zoo::bell_channel(),
        ZooName::Domino => zoo::domino_channel(),
        ZooName::RotatedDomino => {
            let theta = match &a.theta {
                Some(t) => angles::<4>(t)?,
                None => [FRAC_PI_8; 4],
            };
            zoo::rotated_domino_channel(&RotatedDominoParams::new(theta)?)?
        }
        ZooName::RandomUnitary => zoo::random_unitary_channel(&a.dims, a.nu, &mut rng)?,
        ZooName::Usd => {
            let p = match (a.alpha1, a.alpha3) {
                (Some(a1), Some(r3)) => {
                    let (alpha1, beta1) = positive_part(a1)?;
                    let (r3, beta3) = positive_part(r3)?;
                    let alpha3 = Complex64::from_polar(r3.re, a.phase3);
                    UsdParams::new(alpha1, beta1, alpha3, beta3, a.eta1, a.eta3)?
                }
                (None, None) => UsdParams::sample(&mut rng, a.eta1, a.eta3)?,
                _ => {
                    return Err(Failure::new(
                        code::INVALID,
                        "invalid parameters: give both --alpha1 and --alpha3, or neither",
                    ))
                }
            };
            zoo::usd_channel(&p)?
        }
        ZooName::UsdLimit => {
            let (alpha1, beta1) = positive_part(a.alpha1.unwrap_or(0.4))?;
            zoo::usd_limit_channel(alpha1, beta1)?
        }
        ZooName::Identity => zoo::identity_channel(&a.dims),
        ZooName::Dephasing => {
            if a.party >= a.dims.len() {
                return Err(locc_core::Error::PartyOutOfRange {
                    party: a.party,
                    parties: a.dims.len(),
                }
                .into());
            }
            zoo::local_dephasing_channel(&a.dims, a.party)
        }
        ZooName::Swap => zoo::unitary_channel("swap", &[2, 2], zoo::swap_unitary())?,
        ZooName::ProductUnitary => zoo::product_unitary_channel(&a.dims, &mut rng),
    };
    Ok(c)
}

fn check(channel: &Path, tol: f64) -> Result<(), Failure> {
    let c = files::read_channel(channel)?;
    let residual = c.completeness_residual();
    if residual > COMPLETENESS_REJECT_TOL {
        return Err(Failure::new(
            code::COMPLETENESS,
            format!(
                "completeness error: {}: sum of K†K differs from the identity by {residual:e} (limit {COMPLETENESS_REJECT_TOL:e})",
                channel.display()
            ),
        ));
    }
    if residual > COMPLETENESS_WARN_TOL {
        eprintln!("warning: completeness residual {residual:e} exceeds {COMPLETENESS_WARN_TOL:e}");
    }
    let verdict = gate_channel(&c, tol)?;
    println!("{}", verdict.to_json());
    Ok(())
}

fn verify(protocol: &Path, channel: &Path, tol: f64) -> Result<ExitCode, Failure> {
    let tree = files::read_protocol(protocol)?;
    let target = files::read_channel(channel)?;
    let v = verify_protocol(&tree, &target, tree.output_isometry.as_ref(), tol)?;
    println!("{}", serde_json::to_string_pretty(&v).expect("plain struct serializes"));
    Ok(if v.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(code::MISMATCH)
    })
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Check { channel, tol } => check(&channel, tol)?,
        Command::Zoo(args) => {
            let c = build_zoo(&args)?;
            files::write_text(&args.out, &c.to_json())?;
        }
        Command::Sweep { config, out } => {
            let config = files::read_sweep_config(&config)?;
            let rows = run_sweep(&config)?;
            files::write_atomic(&out, |w| Ok(write_csv(&config, &rows, w)?))?;
        }
        Command::VerifyProtocol { protocol, channel, tol } => return verify(&protocol, &channel, tol),
        Command::Protocol { which } => {
            let (tree, out) = match which {
                ProtocolCommand::ThreeRound { theta, out } => {
                    let [t2, t3, t4] = angles::<3>(&theta)?;
                    (three_round_domino_protocol(t2, t3, t4)?, out)
                }
                ProtocolCommand::UsdOneway { alpha1, out } => {
                    let (a1, b1) = positive_part(alpha1)?;
                    (usd_oneway_protocol(a1, b1)?, out)
                }
            };
            files::write_text(&out, &tree.to_json())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
