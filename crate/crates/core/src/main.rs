use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fracnet::domain::DEFAULT_VERTEX_BUDGET;
use fracnet::experiments::{DEFAULT_CONFIDENCE, DEFAULT_SEED};
use fracnet::formats::{self, RunManifest};
use fracnet::{
    analyze, build_network, fit_stretched_exponential, run_sweep, sample_poisson_nodes, scaling_check,
    Error, Family, FractalDomain, FractalSpec, SweepConfig, SweepRow, DEFAULT_MAX_DEPTH,
};

#[derive(Parser)]
#[command(name = "fracnet", version, about = "Line-of-sight networks in fractal domains")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived constants r, D, V and y_max of a domain.
    Info {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        json: bool,
    },
    /// Write the closed boundary polyline as SVG or CSV.
    Render(RenderArgs),
    /// Sample one network and write its nodes, edges and report.
    Sample(SampleArgs),
    /// Estimate the full-connection probability over a density grid.
    Sweep(SweepArgs),
    /// Fit ln(-ln p) = ln a + beta ln rho to a sweep CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        rho_min: f64,
        /// Only fit rows with this theta.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Compare P(rho / r^2) with P(rho)^n on a sweep CSV.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Reproduce an output from its manifest.
    Rerun {
        manifest: PathBuf,
        /// Output file (render, sweep) or directory (sample).
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args, Clone)]
struct DomainArgs {
    #[arg(long)]
    family: u32,
    /// Opening angle in radians.
    #[arg(long, required_unless_present = "theta_deg", conflicts_with = "theta_deg", allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Opening angle in degrees.
    #[arg(long, allow_negative_numbers = true)]
    theta_deg: Option<f64>,
}

impl DomainArgs {
    fn spec(&self) -> Result<FractalSpec, Failure> {
        let theta = match (self.theta, self.theta_deg) {
            (Some(t), _) => t,
            (None, Some(d)) => d.to_radians(),
            (None, None) => return Err(Failure::invalid("missing --theta")),
        };
        Ok(FractalSpec::new(Family::try_from(self.family)?, theta)?)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RenderFormat {
    Svg,
    Csv,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, default_value_t = 6)]
    level: u32,
    #[arg(long, value_enum, default_value_t = RenderFormat::Svg)]
    format: RenderFormat,
    /// Maximum number of boundary vertices.
    #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET)]
    budget: usize,
    /// Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct RenderConfig {
    spec: FractalSpec,
    level: u32,
    format: RenderFormat,
    budget: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SampleFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: u32,
    #[arg(long, value_enum, default_value_t = SampleFormat::Csv)]
    format: SampleFormat,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct SampleConfig {
    spec: FractalSpec,
    rho: f64,
    seed: u64,
    r0: f64,
    max_depth: u32,
    format: SampleFormat,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<u32>,
    /// Comma-separated angles in radians.
    #[arg(long)]
    theta: Option<String>,
    /// Comma-separated ascending densities.
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long)]
    confidence: Option<f64>,
    /// Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::VertexBudget { .. } => 3,
            Error::InsufficientData { .. } | Error::NoMatchingPairs => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::invalid(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: could not size thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Info { domain, json } => info(&domain.spec()?, json),
        Command::Render(args) => {
            let config = RenderConfig {
                spec: args.domain.spec()?,
                level: args.level,
                format: args.format,
                budget: args.budget,
            };
            render(&config, args.output.as_deref())
        }
        Command::Sample(args) => {
            let config = SampleConfig {
                spec: args.domain.spec()?,
                rho: args.rho,
                seed: args.seed,
                r0: args.r0,
                max_depth: args.max_depth,
                format: args.format,
            };
            sample(&config, &args.out_dir)
        }
        Command::Sweep(args) => {
            let config = sweep_config(&args)?;
            sweep(&config, args.output.as_deref())
        }
        Command::Fit { input, rho_min, theta } => fit(&input, rho_min, theta),
        Command::Check { input, domain } => check(&input, &domain.spec()?),
        Command::Rerun { manifest, output } => rerun(&manifest, &output),
    }
}

fn info(spec: &FractalSpec, json: bool) -> Result<(), Failure> {
    let d = FractalDomain::new(*spec)?;
    if json {
        let v = serde_json::json!({
            "family": spec.family.n(),
            "theta": spec.theta,
            "r": d.r,
            "D": d.dimension,
            "V": d.area,
            "y_max": d.y_max,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        let s = |x| formats::significant(x, 12);
        println!("family = {}", spec.family);
        println!("theta  = {}", s(spec.theta));
        println!("r      = {}", s(d.r));
        println!("D      = {}", s(d.dimension));
        println!("V      = {}", s(d.area));
        println!("y_max  = {}", s(d.y_max));
    }
    Ok(())
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), Failure> {
    fs::write(path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}

fn open_output(output: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn render(config: &RenderConfig, output: Option<&Path>) -> Result<(), Failure> {
    let d = FractalDomain::new(config.spec)?;
    let vertices = d.domain_boundary_polyline(config.level, config.budget)?;
    let mut out = open_output(output)?;
    match config.format {
        RenderFormat::Csv => formats::write_polyline_csv(&mut out, &vertices)?,
        RenderFormat::Svg => out.write_all(formats::polyline_svg(&d, &vertices).as_bytes())?,
    }
    out.flush()?;
    if let Some(p) = output {
        write_manifest(&manifest_path(p), &RunManifest::new("render", config, None))?;
    }
    Ok(())
}

fn sample(config: &SampleConfig, out_dir: &Path) -> Result<(), Failure> {
    let d = FractalDomain::new(config.spec)?;
    if config.r0.is_nan() || config.r0 <= 0.0 || config.max_depth == 0 {
        return Err(Failure::invalid("r0 must be positive and max_depth at least 1"));
    }
    let nodes = sample_poisson_nodes(&d, config.rho, config.seed)?;
    let net = build_network(&d, &nodes, config.r0, config.max_depth);
    let report = analyze(&net);
    let manifest = RunManifest::new("sample", config, Some(config.seed));
    fs::create_dir_all(out_dir)?;

    let report_json = serde_json::json!({ "report": report, "manifest": manifest });
    match config.format {
        SampleFormat::Csv => {
            let mut f = BufWriter::new(File::create(out_dir.join("nodes.csv"))?);
            formats::write_nodes_csv(&mut f, &nodes.points)?;
            f.flush()?;
            let mut f = BufWriter::new(File::create(out_dir.join("edges.csv"))?);
            formats::write_edges_csv(&mut f, &net.edges)?;
            f.flush()?;
        }
        SampleFormat::Json => {
            let nodes_json: Vec<_> = nodes
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| serde_json::json!({ "id": i, "x": p.x, "y": p.y }))
                .collect();
            let v = serde_json::json!({ "nodes": nodes_json, "edges": net.edges });
            fs::write(out_dir.join("network.json"), serde_json::to_string(&v)? + "\n")?;
        }
    }
    fs::write(out_dir.join("report.json"), serde_json::to_string_pretty(&report_json)? + "\n")?;
    write_manifest(&out_dir.join("manifest.json"), &manifest)?;
    println!(
        "nodes = {}, edges = {}, components = {}, isolated = {}, fully_connected = {}",
        report.node_count,
        net.edges.len(),
        report.component_count,
        report.isolated_count,
        report.fully_connected
    );
    Ok(())
}

fn sweep_config(args: &SweepArgs) -> Result<SweepConfig, Failure> {
    let mut kv = match &args.config {
        Some(p) => formats::parse_key_values(&fs::read_to_string(p)?)?,
        None => Default::default(),
    };
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.insert(k.to_string(), v);
        }
    };
    set("family", args.family.map(|v| v.to_string()));
    set("theta", args.theta.clone());
    set("rho", args.rho.clone());
    set("trials", args.trials.map(|v| v.to_string()));
    set("seed", args.seed.map(|v| v.to_string()));
    set("r0", args.r0.map(|v| v.to_string()));
    set("max_depth", args.max_depth.map(|v| v.to_string()));
    set("confidence", args.confidence.map(|v| v.to_string()));

    const KNOWN: [&str; 8] = ["family", "theta", "rho", "trials", "seed", "r0", "max_depth", "confidence"];
    if let Some(k) = kv.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Failure::invalid(format!("unknown sweep config key {k:?}")));
    }
    let need = |k: &str| {
        kv.get(k)
            .cloned()
            .ok_or_else(|| Failure::invalid(format!("sweep needs {k} (flag or config key)")))
    };
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, Failure> {
        v.trim()
            .parse()
            .map_err(|_| Failure::invalid(format!("bad value {v:?} for {k}")))
    }
    let family = Family::try_from(num::<u32>("family", &need("family")?)?)?;
    let mut config = SweepConfig::new(
        family,
        formats::parse_list(&need("theta")?)?,
        formats::parse_list(&need("rho")?)?,
        num("trials", &need("trials")?)?,
    );
    if let Some(v) = kv.get("seed") {
        config.master_seed = num("seed", v)?;
    }
    if let Some(v) = kv.get("r0") {
        config.r0 = num("r0", v)?;
    }
    if let Some(v) = kv.get("max_depth") {
        config.max_depth = num("max_depth", v)?;
    }
    config.confidence = match kv.get("confidence") {
        Some(v) => num("confidence", v)?,
        None => DEFAULT_CONFIDENCE,
    };
    config.validate()?;
    Ok(config)
}

fn sweep(config: &SweepConfig, output: Option<&Path>) -> Result<(), Failure> {
    let rows = run_sweep(config)?;
    let mut out = open_output(output)?;
    formats::write_sweep_csv(&mut out, &rows)?;
    out.flush()?;
    if let Some(p) = output {
        write_manifest(&manifest_path(p), &RunManifest::new("sweep", config, Some(config.master_seed)))?;
    }
    Ok(())
}

fn read_rows(input: &Path) -> Result<Vec<SweepRow>, Failure> {
    Ok(formats::read_sweep_csv(BufReader::new(File::open(input)?))?)
}

fn fit(input: &Path, rho_min: f64, theta: Option<f64>) -> Result<(), Failure> {
    let rows = read_rows(input)?;
    let mut groups: Vec<(Family, f64)> = Vec::new();
    for r in &rows {
        if !groups.contains(&(r.family, r.theta)) && theta.is_none_or(|t| (t - r.theta).abs() < 1e-12) {
            groups.push((r.family, r.theta));
        }
    }
    if groups.is_empty() {
        return Err(Error::InsufficientData { usable: 0, required: 3 }.into());
    }
    for (family, t) in groups {
        let subset: Vec<SweepRow> = rows
            .iter()
            .filter(|r| r.family == family && r.theta == t)
            .cloned()
            .collect();
        let fit = fit_stretched_exponential(&subset, rho_min)?;
        let theory = FractalSpec::new(family, t)
            .and_then(FractalDomain::new)
            .map(|d| d.dimension / 2.0)
            .ok();
        println!("family = {family}, theta = {t}");
        println!("  rows_used = {} (rho >= {rho_min})", fit.rows_used);
        println!("  beta_hat  = {:.6} +/- {:.6}", fit.beta_hat, fit.beta_se);
        println!("  a_hat     = {:.6} +/- {:.6}", fit.a_hat, fit.a_se);
        if let Some(b) = theory {
            println!("  D/2       = {b:.6}");
        }
    }
    Ok(())
}

fn check(input: &Path, spec: &FractalSpec) -> Result<(), Failure> {
    let rows = read_rows(input)?;
    let d = FractalDomain::new(*spec)?;
    let pairs = scaling_check(&rows, &d)?;
    println!("# r^-2 = {:.6}, n = {}", d.r.powi(-2), d.n());
    println!("rho,rho_scaled,lhs,lhs_low,lhs_high,rhs,rhs_low,rhs_high,ci_overlap");
    for p in pairs {
        println!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            p.rho, p.rho_scaled, p.lhs, p.lhs_ci.0, p.lhs_ci.1, p.rhs, p.rhs_ci.0, p.rhs_ci.1, p.ci_overlap
        );
    }
    Ok(())
}

fn rerun(manifest: &Path, output: &Path) -> Result<(), Failure> {
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(manifest)?)?;
    match m.command.as_str() {
        "render" => render(&serde_json::from_value(m.config)?, Some(output)),
        "sample" => sample(&serde_json::from_value(m.config)?, output),
        "sweep" => sweep(&serde_json::from_value(m.config)?, Some(output)),
        other => Err(Failure::invalid(format!("manifest command {other:?} cannot be rerun"))),
    }
}
