//! Command-line front end.

use crate::config::ExperimentConfig;
use crate::error::{malformed, CliError, CliResult, EXIT_FAILED, EXIT_PASS};
use crate::gen::generate;
use crate::render::{parse_reports, render_csv};
use crate::suite::{parse_ids, run_verify, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use isoslice::logconcave::{body_from_density, l_pair, DensitySpec};
use isoslice::pipeline::{perturb_body, Budget};
use isoslice::quasi::{quasi_perturb, quasi_theorem_report, QuasiBody};
use isoslice::sampling::isotropic_constant_body;
use isoslice::sections::{near_origin_perturb, projection_perturb, projection_report, Subspace};
use isoslice::{Body, Constants, Report};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "isoslice",
    version,
    about = "Bounded-isotropic-constant perturbations and their verification"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Master seed; required by every Monte Carlo command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Uniform-sample budget.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Random-direction budget for polar estimates.
    #[arg(long, global = true)]
    pub directions: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON config with seed, budgets and constant overrides.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification checks over the corpus.
    Verify {
        /// Comma-separated check ids, or `all`.
        #[arg(long, default_value = "all")]
        ids: String,
        /// Comma-separated corpus dimensions.
        #[arg(long, default_value = "2,3,4")]
        dims: String,
    },
    /// Perturb a convex body.
    Perturb {
        /// Body file or generator spec.
        #[arg(long)]
        body: String,
    },
    /// Perturb a quasi-convex body.
    QuasiPerturb {
        #[arg(long)]
        body: PathBuf,
    },
    /// Marginal of a body on a subspace and its `K_f`.
    Project {
        #[arg(long)]
        body: String,
        /// Subspace file (list of spanning vectors) or `random:k:seed`.
        #[arg(long)]
        subspace: String,
    },
    /// Perturbation of a volume-1 body with mass near the origin.
    NearOrigin {
        #[arg(long)]
        body: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Isotropic constant of a body or a density.
    Lk {
        #[arg(long, conflicts_with = "density")]
        body: Option<String>,
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// The body `K_f` of a density.
    Kf {
        #[arg(long)]
        density: PathBuf,
    },
    /// Generate a body file from a spec such as `lp:3:1.5`.
    Gen { spec: String },
    /// Flatten report files into a CSV table.
    Render { files: Vec<PathBuf> },
}

/// Resolved settings of a run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub directions: Option<usize>,
    pub constants: Constants,
}

impl Settings {
    pub fn resolve(g: &Global) -> CliResult<Self> {
        let cfg = match &g.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        Ok(Self {
            seed: g.seed.or(cfg.seed),
            samples: g.samples.or(cfg.samples),
            directions: g.directions.or(cfg.directions),
            constants: cfg.constants,
        })
    }

    pub fn budget(&self) -> CliResult<Budget> {
        let seed = self
            .seed
            .ok_or_else(|| malformed("--seed is required for Monte Carlo commands"))?;
        let mut b = Budget::new(seed);
        if let Some(s) = self.samples {
            b.samples = s;
        }
        if let Some(d) = self.directions {
            b.directions = d;
        }
        if b.samples == 0 || b.directions == 0 {
            return Err(malformed("sample budgets must be positive"));
        }
        Ok(b)
    }
}

/// What a command prints: a JSON document, plus the reports that decide the
/// exit code.
pub struct Output {
    pub json: String,
    pub reports: Vec<Report>,
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| malformed(e.to_string()))
}

/// Reads a body from a file, or builds it from a generator spec.
pub fn load_body(arg: &str, seed: u64) -> CliResult<Body> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let b = Body::from_json(&text).map_err(|e| malformed(format!("{arg}: {e}")))?;
        return Ok(b);
    }
    generate(arg, seed)
}

fn load_density(path: &Path) -> CliResult<std::sync::Arc<dyn isoslice::logconcave::Density>> {
    let text = std::fs::read_to_string(path)?;
    let spec: DensitySpec = serde_json::from_str(&text).map_err(|e| {
        malformed(format!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    spec.build().map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn load_subspace(arg: &str, n: usize) -> CliResult<Subspace> {
    if let Some(rest) = arg.strip_prefix("random:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let (k, seed) = match parts.as_slice() {
            [k, s] => (
                k.parse::<usize>()
                    .map_err(|_| malformed(format!("subspace '{arg}': bad dimension")))?,
                s.parse::<u64>()
                    .map_err(|_| malformed(format!("subspace '{arg}': bad seed")))?,
            ),
            _ => return Err(malformed(format!("subspace '{arg}': expected random:k:seed"))),
        };
        return Subspace::random(n, k, seed).map_err(|e| malformed(e.to_string()));
    }
    let text = std::fs::read_to_string(arg)?;
    let vs: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| malformed(format!("{arg}: {e}")))?;
    Subspace::new(n, &vs).map_err(|e| malformed(format!("{arg}: {e}")))
}

fn parse_dims(s: &str) -> CliResult<Vec<usize>> {
    let dims: Vec<usize> = s
        .split(',')
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .map_err(|_| malformed(format!("bad dimension '{d}'")))
        })
        .collect::<CliResult<_>>()?;
    if dims.iter().any(|&d| !(2..=6).contains(&d)) {
        return Err(malformed("corpus dimensions must lie in 2..=6"));
    }
    Ok(dims)
}

#[derive(Serialize)]
struct WithReports<T: Serialize> {
    result: T,
    reports: Vec<Report>,
}

/// Executes a command and returns its output document.
pub fn execute(command: &Command, settings: &Settings) -> CliResult<Output> {
    let c = &settings.constants;
    match command {
        Command::Verify { ids, dims } => {
            let ids = parse_ids(ids)?;
            let ctx = Context::new(settings.budget()?, c.clone(), parse_dims(dims)?);
            let suite = run_verify(&ids, &ctx)?;
            Ok(Output {
                json: to_json(&suite)?,
                reports: suite.reports,
            })
        }
        Command::Perturb { body } => {
            let b = settings.budget()?;
            let k = load_body(body, b.seed)?;
            let res = perturb_body(&k, c, &b)?;
            let reports = vec![res.theorem_report(&b), res.corollary_report(&b)];
            Ok(Output {
                json: to_json(&WithReports {
                    result: &res,
                    reports: reports.clone(),
                })?,
                reports,
            })
        }
        Command::QuasiPerturb { body } => {
            let b = settings.budget()?;
            let text = std::fs::read_to_string(body)?;
            let k = QuasiBody::from_json(&text).map_err(|e| match e {
                isoslice::Error::Hypothesis(_) => CliError::Core(e),
                other => malformed(format!("{}: {other}", body.display())),
            })?;
            let res = quasi_perturb(&k, c, &b)?;
            let reports = vec![quasi_theorem_report(&k, &res, &b)];
            Ok(Output {
                json: to_json(&WithReports {
                    result: &res,
                    reports: reports.clone(),
                })?,
                reports,
            })
        }
        Command::Project { body, subspace } => {
            let b = settings.budget()?;
            let k = load_body(body, b.seed)?;
            let e = load_subspace(subspace, k.dim())?;
            let res = projection_perturb(&k, &e, c, &b)?;
            let reports = vec![projection_report(&res, &e, &b)];
            Ok(Output {
                json: to_json(&WithReports {
                    result: &res,
                    reports: reports.clone(),
                })?,
                reports,
            })
        }
        Command::NearOrigin {
            body,
            gamma,
            beta,
            delta,
        } => {
            let b = settings.budget()?;
            let k = load_body(body, b.seed)?;
            let res = near_origin_perturb(&k, *gamma, *beta, *delta, c, &b)?;
            let reports = vec![res.report(&b)];
            Ok(Output {
                json: to_json(&WithReports {
                    result: &res,
                    reports: reports.clone(),
                })?,
                reports,
            })
        }
        Command::Lk { body, density } => {
            let b = settings.budget()?;
            let mut r = Report::new("lk", "");
            match (body, density) {
                (Some(body), None) => {
                    let k = load_body(body, b.seed)?;
                    r.subject = k.name();
                    r.measure("L", isotropic_constant_body(&k, b.samples, b.seed)?);
                }
                (None, Some(path)) => {
                    let f = load_density(path)?;
                    r.subject = f.label();
                    let pair = l_pair(f.as_ref(), b.directions, b.seed)?;
                    r.measure("L_f", pair.l_f).measure("L_Kf", pair.l_kf);
                }
                _ => return Err(malformed("lk needs exactly one of --body and --density")),
            }
            r.input("seed", b.seed);
            Ok(Output {
                json: to_json(&r)?,
                reports: vec![r],
            })
        }
        Command::Kf { density } => {
            let b = settings.budget()?;
            let f = load_density(density)?;
            let kf = body_from_density(f.clone())?;
            let pair = l_pair(f.as_ref(), b.directions, b.seed)?;
            let (r_in, r_out) = kf.radii();
            let mut r = Report::new("kf", f.label());
            r.input("seed", b.seed);
            r.exact("f0", f.f0())
                .exact("inner_radius", r_in)
                .exact("outer_radius", r_out);
            r.measure("L_f", pair.l_f)
                .measure("L_Kf", pair.l_kf)
                .measure("ratio", pair.ratio);
            Ok(Output {
                json: to_json(&r)?,
                reports: vec![r],
            })
        }
        Command::Gen { spec } => {
            let seed = settings.seed.unwrap_or(0);
            if spec.starts_with("random-") && settings.seed.is_none() {
                return Err(malformed("--seed is required for random bodies"));
            }
            let body = generate(spec, seed)?;
            let file = body.to_file()?;
            Ok(Output {
                json: to_json(&file)?,
                reports: Vec::new(),
            })
        }
        Command::Render { files } => {
            let mut reports = Vec::new();
            for f in files {
                let text = std::fs::read_to_string(f)?;
                reports.extend(parse_reports(&text).map_err(|e| malformed(format!("{}: {e}", f.display())))?);
            }
            // render always succeeds on valid input, whatever the pass flags
            Ok(Output {
                json: render_csv(&reports)?,
                reports: Vec::new(),
            })
        }
    }
}

/// Runs the CLI on a scoped thread pool and writes the output. Returns the
/// process exit code.
pub fn run(cli: &Cli) -> CliResult<i32> {
    let settings = Settings::resolve(&cli.global)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(malformed("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| malformed(e.to_string()))?;
    let out = pool.install(|| execute(&cli.command, &settings))?;
    let text = match (cli.global.format, &cli.command) {
        (_, Command::Render { .. }) => out.json,
        (Format::Json, _) => out.json + "\n",
        (Format::Csv, _) => render_csv(&out.reports)?,
    };
    match &cli.global.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(if out.reports.iter().all(|r| r.pass) {
        EXIT_PASS
    } else {
        EXIT_FAILED
    })
}
