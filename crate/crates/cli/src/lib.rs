//! Command-line front end: JSON ingestion, subcommand dispatch and report
//! emission for `ifsproj`.

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod doc;
pub mod error;
pub mod raster;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ifsproj_core::{fixtures, Tolerances};

pub use doc::{GdifsDocument, IfsDocument};
pub use error::{CliError, CliResult};
pub use report::Report;

pub const PROFILE_ENV: &str = "IFSPROJ_TOLERANCE_PROFILE";

/// Settings read from the environment.
#[derive(Debug, Clone)]
pub struct Context {
    pub profile: String,
    pub tol: Tolerances,
}

impl Context {
    pub fn from_profile(name: Option<&str>) -> CliResult<Self> {
        let profile = name.unwrap_or("default").to_string();
        let tol = Tolerances::profile(&profile).ok_or_else(|| {
            CliError::Usage(format!("{PROFILE_ENV}={profile:?}, expected \"default\" or \"strict\""))
        })?;
        Ok(Self { profile, tol })
    }

    pub fn from_env() -> CliResult<Self> {
        let v = std::env::var(PROFILE_ENV).ok();
        Self::from_profile(v.as_deref())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ifsproj", version, about = "Self-similar sets and their linear projections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// IFS document (JSON, schema version 1).
    #[arg(long, conflicts_with = "fixture")]
    pub input: Option<PathBuf>,
    /// Built-in fixture by name instead of a file.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Directory for emitted files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Chaos-game sample size.
    #[arg(long, default_value_t = 1_000_000)]
    pub points: usize,
    /// Scale exponents `a..b`: boxes of side `base * 2^-k` for `k` in `a..=b`.
    #[arg(long)]
    pub scales: Option<String>,
    /// Base length for `--scales`.
    #[arg(long)]
    pub scale_base: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectionArgs {
    /// Project onto the line through this vector, e.g. `1,0`.
    #[arg(long, conflicts_with = "matrix")]
    pub direction: Option<String>,
    /// Explicit matrix, rows separated by `;`, e.g. `1,0,0;0,1,0`.
    #[arg(long)]
    pub matrix: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Similarity dimension of an IFS.
    Simdim {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Graph-directed system whose attractors include a projection of the attractor.
    ProjectGdifs {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        projection: ProjectionArgs,
    },
    /// Orthogonal projection of rank `l` with strictly smaller dimension.
    Dimdrop {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        l: usize,
    },
    /// Group word sending a vector into the kernel of a projection.
    Annihilate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        projection: ProjectionArgs,
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        word_cap: usize,
    },
    /// Sampling-based estimators and separated-subsystem constructions.
    Estimate {
        #[command(subcommand)]
        command: EstimateCommand,
    },
    /// Write the built-in fixture corpus as JSON documents.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum EstimateCommand {
    /// Box-counting slope of a chaos-game sample.
    Boxdim {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// Side of the PGM raster written for planar samples.
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        /// Also write the sampled points as CSV.
        #[arg(long)]
        write_points: bool,
    },
    /// Box-counting slopes and covering sums of line projections.
    ProjectBoxdim {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// `name=a,b,..` or `a,b,..`; repeatable. Defaults to the fixture's named directions.
        #[arg(long)]
        direction: Vec<String>,
        /// Covering exponent; defaults to the dimension of the attractor.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Covering sums `N(e) (e sqrt d)^t` of a projected sample across scales.
    CollapseSweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        projection: ProjectionArgs,
        /// Covering exponent; defaults to the box-counting slope of the unprojected sample.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Strongly separated subsystem losing at most `epsilon` of the dimension.
    SscApprox {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        epsilon: f64,
        /// Dimension of the attractor, if known.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample size when `t` has to be estimated.
        #[arg(long, default_value_t = 1_000_000)]
        points: usize,
    },
    /// Disjoint cylinders whose rotations are close to a target.
    Cylinders {
        #[command(flatten)]
        input: InputArgs,
        /// Planar target rotation angle in radians.
        #[arg(long, conflicts_with = "target")]
        target_angle: Option<f64>,
        /// Target rotation, rows separated by `;`.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        delta: f64,
        /// Mass exponent; defaults to the similarity dimension.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 0.99)]
        mass: f64,
        #[arg(long, default_value_t = 16)]
        depth: usize,
    },
}

/// Loaded input with the name used in reports.
pub struct Loaded {
    pub doc: IfsDocument,
    pub name: String,
}

pub fn load_input(args: &InputArgs) -> CliResult<Loaded> {
    match (&args.input, &args.fixture) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let doc = IfsDocument::parse(&text)?;
            let name = doc.name().map(str::to_string).unwrap_or_else(|| stem(path));
            Ok(Loaded { doc, name })
        }
        (None, Some(name)) => {
            let f = fixtures::by_name(name).ok_or_else(|| CliError::Usage(format!("unknown fixture {name:?}")))?;
            Ok(Loaded {
                doc: IfsDocument::from_fixture(&f),
                name: name.clone(),
            })
        }
        _ => Err(CliError::Usage("give exactly one of --input or --fixture".into())),
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Runs a parsed command and returns the text for stdout.
pub fn run(cli: &Cli, ctx: &Context) -> CliResult<String> {
    commands::dispatch(&cli.command, ctx)
}
