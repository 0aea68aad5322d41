//! Command-line front end.
//!
//! Every command writes a `<command>.manifest.json` next to its outputs.
//! The manifest holds the fully resolved arguments, so `copsym replay`
//! reproduces the run without the original environment or config file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::copula::{tau_to_params, Axis, CopulaSpec, Family};
use crate::empirical::{pseudo_observations, DataMatrix, UniformSample};
use crate::error::{Error, Result};
use crate::fboxplot::{render, summarize};
use crate::seed;
use crate::study::{run_scenario, StudyScenario};
use crate::symmetry::Symmetry;
use crate::symmetry_test::{run_test, TestConfig};
use crate::test_functions::{build_set, draw_anchors, CurveFamily};

/// Environment variable read for the root seed when `--seed` is absent.
pub const SEED_ENV: &str = "COPSYM_SEED";

#[derive(Parser, Debug)]
#[command(name = "copsym", version, about = "Visualize and test symmetries of bivariate copulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a sample from a parametric copula.
    Simulate(SimulateArgs),
    /// Test reflection, radial or joint symmetry of column pairs.
    Test(TestArgs),
    /// Functional boxplots of the test functions of one pair.
    Visualize(VisualizeArgs),
    /// Monte-Carlo size/power study.
    Study(StudyArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SpecArgs {
    /// independence, gaussian, clayton, gumbel, frank, marshall-olkin
    #[arg(long)]
    family: String,
    /// Kendall's tau of the base copula.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "params")]
    tau: Option<f64>,
    /// Base copula parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// Wrap the base copula in Khoudraji's device with this exponent.
    #[arg(long)]
    delta: Option<f64>,
    /// Coordinate the device acts on (1 or 2).
    #[arg(long, default_value_t = 1, requires = "delta")]
    axis: u8,
}

impl SpecArgs {
    fn resolve(&self) -> Result<CopulaSpec> {
        let family: Family = self.family.parse()?;
        let base = match self.tau {
            Some(tau) => tau_to_params(family, tau)?,
            None => CopulaSpec::from_params(family, &self.params)?,
        };
        match self.delta {
            None => Ok(base),
            Some(delta) => {
                let axis = match self.axis {
                    1 => Axis::First,
                    2 => Axis::Second,
                    a => {
                        return Err(Error::InvalidParameter(format!(
                            "axis must be 1 or 2, got {a}"
                        )))
                    }
                };
                CopulaSpec::khoudraji_on(delta, axis, base)
            }
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (columns u, v).
    #[arg(long, default_value = "sample.csv")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct TestArgs {
    /// CSV with a header row.
    input: PathBuf,
    /// Two columns, by name or zero-based index.
    #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with = "all_pairs")]
    pair: Vec<String>,
    /// Test every pair of columns (the default without --pair).
    #[arg(long)]
    all_pairs: bool,
    /// reflection, radial, joint or all.
    #[arg(long)]
    symmetry: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    m0: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    share_null: bool,
    #[arg(long)]
    fixed_anchors: bool,
    /// key = value file merged under the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the columns as uniforms instead of ranking them.
    #[arg(long)]
    already_uniform: bool,
    /// Include every bootstrap statistic in the JSON.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct VisualizeArgs {
    input: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pair: Vec<String>,
    /// reflection, radial, joint or all.
    #[arg(long, default_value = "all")]
    symmetry: String,
    #[arg(long, default_value_t = 250)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    /// Fence inflation factor.
    #[arg(long, default_value_t = crate::fboxplot::DEFAULT_FACTOR)]
    factor: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    already_uniform: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct StudyArgs {
    /// JSON file with one scenario or a list of scenarios.
    #[arg(long, conflicts_with_all = ["family", "n"])]
    scenario: Option<PathBuf>,
    #[arg(long, requires = "n")]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    axis: u8,
    #[arg(long, default_value = "reflection")]
    symmetry: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = 250)]
    m: usize,
    #[arg(long, default_value_t = 250)]
    m0: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 200)]
    n_boot: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    share_null: bool,
    #[arg(long)]
    fixed_anchors: bool,
    /// Test simulated uniforms directly instead of their ranks.
    #[arg(long)]
    direct: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write outputs here instead of the recorded locations.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Resolved arguments of a run, tagged by command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "lowercase")]
enum Resolved {
    Simulate(SimulateArgs),
    Test(TestArgs),
    Visualize(VisualizeArgs),
    Study(StudyArgs),
}

#[derive(Debug, Serialize, Deserialize)]
struct InputDigest {
    path: PathBuf,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    #[serde(flatten)]
    run: Resolved,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    input: Option<InputDigest>,
    outputs: Vec<PathBuf>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Error::InvalidConfig(format!("{SEED_ENV} must be an unsigned integer, got '{s}'"))
        }),
        Err(_) => Ok(None),
    }
}

fn digest(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = fs::read(path)?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    Ok((bytes, InputDigest { path: path.to_path_buf(), sha256 }))
}

fn write_manifest(
    dir: &Path,
    run: Resolved,
    seed: u64,
    input: Option<InputDigest>,
    outputs: Vec<PathBuf>,
) -> Result<PathBuf> {
    let name = match &run {
        Resolved::Simulate(_) => "simulate",
        Resolved::Test(_) => "test",
        Resolved::Visualize(_) => "visualize",
        Resolved::Study(_) => "study",
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        run,
        seed,
        input,
        outputs,
    };
    let path = dir.join(format!("{name}.manifest.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn parse_symmetries(s: &str) -> Result<Vec<Symmetry>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Symmetry::ALL.to_vec());
    }
    s.split(',').map(|x| x.trim().parse()).collect()
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?
            .install(f),
    }
}

/// `key = value` lines; `#` starts a comment. Keys may use `-` or `_`.
fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("{}:{}: expected key = value", path.display(), i + 1))
        })?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidConfig(format!("bad value '{v}' for {key}")))
}

impl TestArgs {
    /// Fold the config file and the seed environment variable under the flags.
    fn resolve(mut self) -> Result<TestArgs> {
        if let Some(path) = self.config.take() {
            for (key, v) in read_config(&path)? {
                match key.as_str() {
                    "m" => self.m = self.m.or(Some(parse_value(&key, &v)?)),
                    "m0" => self.m0 = self.m0.or(Some(parse_value(&key, &v)?)),
                    "p" => self.p = self.p.or(Some(parse_value(&key, &v)?)),
                    "n_boot" => self.n_boot = self.n_boot.or(Some(parse_value(&key, &v)?)),
                    "alpha" => self.alpha = self.alpha.or(Some(parse_value(&key, &v)?)),
                    "seed" => self.seed = self.seed.or(Some(parse_value(&key, &v)?)),
                    "workers" => self.workers = self.workers.or(Some(parse_value(&key, &v)?)),
                    "symmetry" => self.symmetry = self.symmetry.or(Some(v)),
                    "share_null" => self.share_null |= parse_value::<bool>(&key, &v)?,
                    "fixed_anchors" => self.fixed_anchors |= parse_value::<bool>(&key, &v)?,
                    other => {
                        return Err(Error::InvalidConfig(format!("unknown config key '{other}'")))
                    }
                }
            }
        }
        if self.seed.is_none() {
            self.seed = Some(env_seed()?.unwrap_or(0));
        }
        if self.symmetry.is_none() {
            self.symmetry = Some("all".into());
        }
        Ok(self)
    }
}

fn pairs_of(data: &DataMatrix, pair: &[String]) -> Result<Vec<(usize, usize)>> {
    if pair.is_empty() {
        let d = data.ncols();
        return Ok((0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect());
    }
    if pair.len() != 2 {
        return Err(Error::InvalidInput(format!("--pair takes two columns, got {}", pair.len())));
    }
    Ok(vec![(data.resolve_column(&pair[0])?, data.resolve_column(&pair[1])?)])
}

fn sample_of(
    data: &DataMatrix,
    a: usize,
    b: usize,
    already_uniform: bool,
) -> Result<UniformSample> {
    if already_uniform {
        data.uniform_pair(a, b)
    } else {
        pseudo_observations(data, a, b)
    }
}

fn cmd_simulate(args: SimulateArgs, out_override: Option<&Path>) -> Result<()> {
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let args = SimulateArgs { seed: Some(seed), ..args };
    let spec = args.spec.resolve()?;
    let out = match out_override {
        Some(dir) => dir.join(args.out.file_name().unwrap_or("sample.csv".as_ref())),
        None => args.out.clone(),
    };
    let dir =
        out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
    fs::create_dir_all(&dir)?;
    let sample = spec.sample(args.n, seed)?;
    sample.write_csv(fs::File::create(&out)?)?;
    write_manifest(&dir, Resolved::Simulate(args), seed, None, vec![out])?;
    Ok(())
}

fn cmd_test(args: TestArgs, out_override: Option<&Path>) -> Result<()> {
    let args = args.resolve()?;
    let seed = args.seed.expect("resolved");
    let out_dir = out_override.unwrap_or(&args.out_dir).to_path_buf();
    let (bytes, input) = digest(&args.input)?;
    let data = DataMatrix::from_csv(&bytes[..])?;
    let pairs = pairs_of(&data, &args.pair)?;
    let syms = parse_symmetries(args.symmetry.as_deref().expect("resolved"))?;

    let results = with_workers(args.workers, || {
        let mut results = Vec::new();
        for (idx, &(a, b)) in pairs.iter().enumerate() {
            let sample = sample_of(&data, a, b, args.already_uniform)?;
            let n = sample.len();
            for &sym in &syms {
                let defaults = TestConfig::new(sym, n);
                let cfg = TestConfig {
                    sym,
                    m: args.m.unwrap_or(defaults.m),
                    m0: args.m0.unwrap_or(defaults.m0),
                    p: args.p.unwrap_or(defaults.p),
                    n_boot: args.n_boot.unwrap_or(defaults.n_boot),
                    alpha: args.alpha.unwrap_or(defaults.alpha),
                    seed: seed::derive(seed::derive(seed, "pair", idx as u64), sym.letter(), 0),
                    share_null: args.share_null,
                    fixed_anchors: args.fixed_anchors,
                };
                let r = run_test(&sample, &cfg)?;
                log::info!(
                    "{}/{} {}: p = {}",
                    data.names()[a],
                    data.names()[b],
                    sym.name(),
                    r.p_value
                );
                let mut json = r.to_json(args.full);
                json["pair"] = serde_json::json!([data.names()[a], data.names()[b]]);
                results.push(json);
            }
        }
        Ok(results)
    })?;

    fs::create_dir_all(&out_dir)?;
    let out = out_dir.join("results.json");
    let doc = serde_json::Value::Array(results);
    write_json(&out, &doc)?;
    println!("{}", serde_json::to_string(&doc)?);
    write_manifest(&out_dir, Resolved::Test(args), seed, Some(input), vec![out])?;
    Ok(())
}

fn cmd_visualize(args: VisualizeArgs, out_override: Option<&Path>) -> Result<()> {
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let args = VisualizeArgs { seed: Some(seed), ..args };
    let out_dir = out_override.unwrap_or(&args.out_dir).to_path_buf();
    let (bytes, input) = digest(&args.input)?;
    let data = DataMatrix::from_csv(&bytes[..])?;
    let pair = if args.pair.is_empty() { vec!["0".into(), "1".into()] } else { args.pair.clone() };
    let (a, b) = pairs_of(&data, &pair)?[0];
    let sample = sample_of(&data, a, b, args.already_uniform)?;
    let anchors = draw_anchors(args.m, seed::derive(seed, "anchors", 0))?;
    let stem = format!("{}-{}", data.names()[a], data.names()[b]).replace(['/', '\\', ' '], "_");

    fs::create_dir_all(&out_dir)?;
    let mut outputs = Vec::new();
    for sym in parse_symmetries(&args.symmetry)? {
        let set = build_set(&sample, sym, &anchors, args.p)?;
        let families = CurveFamily::for_symmetry(sym);
        for &family in families {
            let (suffix, label) = match family {
                CurveFamily::S => ("s", "reflection"),
                CurveFamily::R => ("r", "radial"),
                CurveFamily::J1 => ("j1", "joint, first family"),
                CurveFamily::J2 => ("j2", "joint, second family"),
            };
            let summary = summarize(&set.family_rows(family), &set.grid, args.factor)?;
            let title = format!("{} vs {}: {label}", data.names()[a], data.names()[b]);
            let svg_path = out_dir.join(format!("{stem}-{suffix}.svg"));
            let csv_path = out_dir.join(format!("{stem}-{suffix}.csv"));
            fs::write(&svg_path, render(&summary, &title))?;
            summary.write_csv(fs::File::create(&csv_path)?)?;
            outputs.push(svg_path);
            outputs.push(csv_path);
        }
    }
    write_manifest(&out_dir, Resolved::Visualize(args), seed, Some(input), outputs)?;
    Ok(())
}

fn cmd_study(args: StudyArgs, out_override: Option<&Path>) -> Result<()> {
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let args = StudyArgs { seed: Some(seed), ..args };
    let out_dir = out_override.unwrap_or(&args.out_dir).to_path_buf();

    let (scenarios, input) = match &args.scenario {
        Some(path) => {
            let (bytes, input) = digest(path)?;
            let value: serde_json::Value = serde_json::from_slice(&bytes)?;
            let list = match value {
                serde_json::Value::Array(_) => serde_json::from_value(value)?,
                one => vec![serde_json::from_value(one)?],
            };
            (list, Some(input))
        }
        None => {
            let family = args.family.clone().ok_or_else(|| {
                Error::InvalidConfig("give --scenario or --family with --n".into())
            })?;
            let spec = SpecArgs {
                family,
                tau: args.tau,
                params: args.params.clone(),
                delta: args.delta,
                axis: args.axis,
            }
            .resolve()?;
            let mut list = Vec::new();
            for sym in parse_symmetries(&args.symmetry)? {
                list.push(StudyScenario {
                    replicates: args.replicates,
                    m: args.m,
                    m0: args.m0,
                    p: args.p,
                    n_boot: args.n_boot,
                    alpha: args.alpha,
                    share_null: args.share_null,
                    fixed_anchors: args.fixed_anchors,
                    direct: args.direct,
                    ..StudyScenario::new(spec.clone(), sym, args.n.expect("clap requires n"))
                });
            }
            (list, None)
        }
    };

    fs::create_dir_all(&out_dir)?;
    let ledger = out_dir.join("ledger.csv");
    let mut reports = Vec::new();
    for (i, scenario) in scenarios.iter().enumerate() {
        let result =
            run_scenario(scenario, seed::derive(seed, "scenario", i as u64), args.workers)?;
        log::info!(
            "{} {} n={}: rate {} in {:.1}s",
            scenario.spec.label(),
            scenario.sym.letter(),
            scenario.n,
            result.rejection_rate,
            result.wall_time_secs
        );
        result.append_to_ledger(&ledger)?;
        reports.push(result.to_json());
    }
    let report = out_dir.join("study.json");
    let doc = serde_json::Value::Array(reports);
    write_json(&report, &doc)?;
    println!("{}", serde_json::to_string(&doc)?);
    write_manifest(&out_dir, Resolved::Study(args), seed, input, vec![report, ledger])?;
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<()> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(&args.manifest)?)?;
    if let Some(recorded) = &manifest.input {
        let (_, now) = digest(&recorded.path)?;
        if now.sha256 != recorded.sha256 {
            return Err(Error::InvalidInput(format!(
                "input {} changed since the recorded run",
                recorded.path.display()
            )));
        }
    }
    let out = args.out_dir.as_deref();
    match manifest.run {
        Resolved::Simulate(a) => cmd_simulate(a, out),
        Resolved::Test(a) => cmd_test(a, out),
        Resolved::Visualize(a) => cmd_visualize(a, out),
        Resolved::Study(a) => cmd_study(a, out),
    }
}

fn report(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
}

/// Parse `args` and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            report("usage", e.to_string().trim());
            return 2;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(a, None),
        Command::Test(a) => cmd_test(a, None),
        Command::Visualize(a) => cmd_visualize(a, None),
        Command::Study(a) => cmd_study(a, None),
        Command::Replay(a) => cmd_replay(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            report(e.kind(), &e.to_string());
            1
        }
    }
}
