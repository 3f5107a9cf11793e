//! `gdenet` subcommands. [`run`] parses arguments, executes one command and
//! returns the process exit code: 0 on success, 1 when a proposition check
//! fails, 2 on usage or input errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use gdenet::chebyshev::{heat_solution_cheb, wave_solution_cheb, SolverConfig};
use gdenet::curvature::{edge_curvatures, node_curvature};
use gdenet::dynamics::{check_component_confinement, support_components, verify_graph, Suite};
use gdenet::features::{extract_features, FeatureConfig, Features, Level, SolverKind, WaveVelocity};
use gdenet::graph::{generate_er_stream, generate_sbm_stream, Graph, Signal};
use gdenet::io::{self, FeatureTable, ManifestRow};
use gdenet::mlp::{
    cross_validate, fit_pipeline, score, Checkpoint, Metric, Task, TrainConfig,
};
use gdenet::seed::{self, streams};
use gdenet::spectral::{eigendecompose, heat_solution_exact, wave_solution_exact, LaplacianKind, Pde};
use rand::Rng;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable/malformed input (exit 2).
    Input(String),
    /// A proposition check failed (exit 1).
    Failed(String),
}

impl From<gdenet::Error> for CliError {
    fn from(e: gdenet::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "gdenet", version, about = "Heat and wave dynamics on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample random graphs and write edge lists plus a manifest.
    Generate(GenerateArgs),
    /// Solve the heat or wave equation and write a solution CSV.
    Solve(SolveArgs),
    /// Extract node- or graph-level moment features.
    Features(FeaturesArgs),
    /// Compute Ollivier-Ricci curvature labels.
    Labels(LabelsArgs),
    /// Train a regression network; optionally cross-validate.
    Train(TrainArgs),
    /// Score a trained model or a predictions file.
    Eval(EvalArgs),
    /// Run the proposition checks and write a JSON-lines report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Er,
    Sbm,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// ER edge probability; drawn per graph from [0.01, 0.1] when omitted.
    #[arg(long)]
    pub p: Option<f64>,
    /// SBM block count; drawn per graph from 5..=25 when omitted.
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_out: f64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "heat")]
    pub pde: Pde,
    #[arg(long, default_value = "sym")]
    pub laplacian: LaplacianKind,
    #[arg(long, default_value = "exact")]
    pub solver: SolverKind,
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    /// Dirac source nodes; all nodes when neither this nor --signal is given.
    #[arg(long, value_delimiter = ',', conflicts_with = "signal")]
    pub source: Vec<usize>,
    /// Initial condition file (`node,value`).
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Initial velocity file for the wave equation (zero when omitted).
    #[arg(long)]
    pub velocity: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FeatureArgs {
    #[arg(long, default_value = "heat")]
    pub pde: Pde,
    #[arg(long, default_value = "sym")]
    pub laplacian: LaplacianKind,
    #[arg(long, default_value = "exact")]
    pub solver: SolverKind,
    /// Explicit time grid; overrides --T and --t-max.
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
    /// Number of time steps on (0, t_max].
    #[arg(long = "T", default_value_t = 20)]
    pub time_steps: usize,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    /// Highest node moment.
    #[arg(long = "M", default_value_t = 4)]
    pub max_moment: usize,
    /// Largest hop radius.
    #[arg(long = "K", default_value_t = 4)]
    pub max_hop: usize,
    /// Highest graph moment.
    #[arg(long = "S", default_value_t = 4)]
    pub max_graph_moment: usize,
    #[arg(long)]
    pub include_hop_one: bool,
    /// Use the initial condition as wave velocity instead of zero.
    #[arg(long)]
    pub velocity_equal_x: bool,
}

impl FeatureArgs {
    fn config(&self) -> FeatureConfig {
        FeatureConfig {
            pde: self.pde,
            kind: self.laplacian,
            solver: self.solver,
            max_moment: self.max_moment,
            max_hop: self.max_hop,
            time_steps: self.time_steps,
            t_max: self.t_max,
            times: (!self.times.is_empty()).then(|| self.times.clone()),
            max_graph_moment: self.max_graph_moment,
            wave_velocity: if self.velocity_equal_x {
                WaveVelocity::EqualX
            } else {
                WaveVelocity::Zero
            },
            include_hop_one: self.include_hop_one,
            solver_config: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    /// Edge-list file, or a directory of edge lists.
    #[arg(long)]
    pub graph: PathBuf,
    /// Input signal scaling the Dirac sources (single graph only).
    #[arg(long)]
    pub signal: Option<PathBuf>,
    #[arg(long, default_value = "graph")]
    pub level: Level,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Output file, or directory when --graph is a directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LabelsArgs {
    /// Edge-list file, or a directory of edge lists.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "node")]
    pub level: LabelLevel,
    /// Mass kept on the node itself.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelLevel {
    Node,
    Edge,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Directory of feature CSVs, one per graph.
    #[arg(long)]
    pub features: PathBuf,
    /// Graph targets: a generate manifest (uses `p_or_blocks`) or an
    /// `id,target` CSV; ids are file stems.
    #[arg(long, conflicts_with = "labels")]
    pub targets: Option<PathBuf>,
    /// Directory of node label CSVs matching the node-level feature files.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Hidden layer widths.
    #[arg(long, value_delimiter = ',', default_value = "128,128,128,128")]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 50)]
    pub patience: usize,
    #[arg(long, default_value_t = 0.1)]
    pub validation_fraction: f64,
    /// Decoupled weight decay per step (scaled by the learning rate).
    #[arg(long, default_value_t = 1.0)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cross-validation folds (0 skips cross-validation).
    #[arg(long, default_value_t = 0)]
    pub folds: usize,
    /// Output directory for `model.json` and `metrics.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Checkpoint written by `train`.
    #[arg(long, required_unless_present = "predictions")]
    pub model: Option<PathBuf>,
    /// Precomputed `id,target` predictions instead of a model (graph level).
    #[arg(long, conflicts_with = "model")]
    pub predictions: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "mse,r2")]
    pub metric: Vec<Metric>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check confinement of a solution CSV instead of running the suite.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// PDE label for --solution reports.
    #[arg(long, default_value = "heat")]
    pub pde: Pde,
    #[arg(long, default_value = "sym")]
    pub laplacian: LaplacianKind,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Messages go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(CliError::Failed(msg)) => {
            eprintln!("gdenet: {msg}");
            1
        }
        Err(CliError::Input(msg)) => {
            eprintln!("gdenet: error: {msg}");
            2
        }
    }
}

pub fn execute(cmd: &Command) -> CliResult {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Features(a) => cmd_features(a),
        Command::Labels(a) => cmd_labels(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn write(path: &Path, text: &str) -> CliResult {
    io::atomic_write(path, text.as_bytes()).map_err(CliError::from)
}

/// Writes `<path>.json` recording the command and its arguments.
fn write_sidecar<A: Serialize>(path: &Path, command: &str, args: &A, extra: serde_json::Value) -> CliResult {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    let echo = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "resolved": extra,
    });
    write(Path::new(&name), &(serde_json::to_string_pretty(&echo).expect("serializable") + "\n"))
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> CliResult<Graph> {
    io::parse_edge_list(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// Edge-list files of a directory, sorted, skipping `manifest.csv`.
fn graph_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_generate(a: &GenerateArgs) -> CliResult {
    let check_p = |p: f64, what: &str| {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(input(format!("{what} must be in [0, 1], got {p}")))
        }
    };
    match a.family {
        Family::Er => {
            if let Some(p) = a.p {
                check_p(p, "--p")?;
            }
        }
        Family::Sbm => {
            check_p(a.p_in, "--p-in")?;
            check_p(a.p_out, "--p-out")?;
            if let Some(b) = a.blocks {
                if b == 0 || b > a.n {
                    return Err(input(format!("--blocks must be in [1, n], got {b}")));
                }
            } else if a.n < 25 {
                return Err(input("random block counts (5..=25) need --n >= 25"));
            }
        }
    }
    if a.count == 0 {
        return Err(input("--count must be positive"));
    }
    ensure_dir(&a.out)?;
    let mut prng = seed::rng(a.seed, streams::PARAM);
    let params: Vec<f64> = (0..a.count)
        .map(|_| match a.family {
            Family::Er => a.p.unwrap_or_else(|| prng.random_range(0.01..=0.1)),
            Family::Sbm => a.blocks.map(|b| b as f64).unwrap_or_else(|| prng.random_range(5..=25usize) as f64),
        })
        .collect();
    let width = (a.count - 1).to_string().len().max(4);
    let family = match a.family {
        Family::Er => "er",
        Family::Sbm => "sbm",
    };
    let rows: Vec<CliResult<ManifestRow>> = {
        use rayon::prelude::*;
        (0..a.count)
            .into_par_iter()
            .map(|j| {
                let stream = streams::GRAPH + j as u64;
                let g = match a.family {
                    Family::Er => generate_er_stream(a.n, params[j], a.seed, stream)?,
                    Family::Sbm => generate_sbm_stream(a.n, params[j] as usize, a.p_in, a.p_out, a.seed, stream)?,
                };
                let file = format!("{family}_{j:0width$}.csv");
                write(&a.out.join(&file), &io::format_edge_list(&g))?;
                Ok(ManifestRow {
                    file,
                    family: family.into(),
                    n: a.n,
                    p_or_blocks: params[j],
                    seed: a.seed,
                })
            })
            .collect()
    };
    let rows: Vec<ManifestRow> = rows.into_iter().collect::<CliResult<_>>()?;
    let manifest = a.out.join("manifest.csv");
    write(&manifest, &io::format_manifest(&rows)?)?;
    write_sidecar(&manifest, "generate", a, serde_json::Value::Null)
}

fn cmd_solve(a: &SolveArgs) -> CliResult {
    let g = read_graph(&a.graph)?;
    let n = g.node_count();
    let xs: Vec<Signal> = if let Some(p) = &a.signal {
        vec![io::parse_signal(&read_text(p)?, n)?]
    } else if a.source.is_empty() {
        (0..n).map(|v| Signal::dirac(n, v)).collect()
    } else {
        if let Some(&bad) = a.source.iter().find(|&&v| v >= n) {
            return Err(input(format!("source {bad} out of range for {n} nodes")));
        }
        a.source.iter().map(|&v| Signal::dirac(n, v)).collect()
    };
    let velocity = match &a.velocity {
        Some(p) => io::parse_signal(&read_text(p)?, n)?,
        None => Signal::zeros(n),
    };
    if a.velocity.is_some() && a.pde == Pde::Heat {
        return Err(input("--velocity applies to the wave equation only"));
    }
    let ys = vec![velocity; xs.len()];
    let sol = match a.solver {
        SolverKind::Exact => {
            let dec = eigendecompose(&g, a.laplacian)?;
            match a.pde {
                Pde::Heat => heat_solution_exact(&dec, &xs, &a.times)?,
                Pde::Wave => wave_solution_exact(&dec, &xs, &ys, &a.times)?,
            }
        }
        SolverKind::Chebyshev => {
            let cfg = SolverConfig {
                tolerance: a.tolerance,
                ..SolverConfig::default()
            };
            match a.pde {
                Pde::Heat => heat_solution_cheb(&g, a.laplacian, &xs, &a.times, &cfg)?,
                Pde::Wave => wave_solution_cheb(&g, a.laplacian, &xs, &ys, &a.times, &cfg)?,
            }
        }
    };
    if !sol.tolerance_met {
        eprintln!("gdenet: warning: Chebyshev tolerance not met at the order cap");
    }
    write(&a.out, &io::format_solution(&sol))?;
    write_sidecar(&a.out, "solve", a, serde_json::json!({ "tolerance_met": sol.tolerance_met }))
}

fn features_text(g: &Graph, signal: Option<&Signal>, cfg: &FeatureConfig, level: Level) -> CliResult<(String, bool)> {
    Ok(match extract_features(g, signal, None, cfg, level)? {
        Features::Node(h) => (io::format_node_features(&h), h.tolerance_met),
        Features::Graph(w) => (io::format_graph_features(&w), w.tolerance_met),
    })
}

fn cmd_features(a: &FeaturesArgs) -> CliResult {
    let cfg = a.features.config();
    cfg.validate()?;
    let resolved = serde_json::to_value(&cfg).expect("serializable");
    if a.graph.is_dir() {
        if a.signal.is_some() {
            return Err(input("--signal needs a single --graph file"));
        }
        ensure_dir(&a.out)?;
        let files = graph_files(&a.graph)?;
        let results: Vec<CliResult<bool>> = {
            use rayon::prelude::*;
            files
                .par_iter()
                .map(|f| {
                    let g = read_graph(f)?;
                    let (text, met) = features_text(&g, None, &cfg, a.level)?;
                    write(&a.out.join(format!("{}.csv", stem(f))), &text)?;
                    Ok(met)
                })
                .collect()
        };
        let met = results.into_iter().collect::<CliResult<Vec<bool>>>()?;
        if met.contains(&false) {
            eprintln!("gdenet: warning: Chebyshev tolerance not met for some graphs");
        }
        write_sidecar(&a.out.join("features"), "features", a, resolved)
    } else {
        let g = read_graph(&a.graph)?;
        let signal = match &a.signal {
            Some(p) => Some(io::parse_signal(&read_text(p)?, g.node_count())?),
            None => None,
        };
        let (text, met) = features_text(&g, signal.as_ref(), &cfg, a.level)?;
        if !met {
            eprintln!("gdenet: warning: Chebyshev tolerance not met");
        }
        write(&a.out, &text)?;
        write_sidecar(&a.out, "features", a, resolved)
    }
}

fn labels_text(g: &Graph, level: LabelLevel, alpha: f64, name: &str) -> CliResult<String> {
    Ok(match level {
        LabelLevel::Node => {
            let labels = node_curvature(g, alpha)?;
            for (v, k) in labels.iter().enumerate() {
                if k.is_none() {
                    eprintln!("gdenet: warning: {name}: node {v} is isolated; no label written");
                }
            }
            io::format_node_labels(&labels)
        }
        LabelLevel::Edge => io::format_edge_labels(&edge_curvatures(g, alpha)?),
    })
}

fn cmd_labels(a: &LabelsArgs) -> CliResult {
    if a.graph.is_dir() {
        ensure_dir(&a.out)?;
        for f in graph_files(&a.graph)? {
            let g = read_graph(&f)?;
            let text = labels_text(&g, a.level, a.alpha, &f.display().to_string())?;
            write(&a.out.join(format!("{}.csv", stem(&f))), &text)?;
        }
        write_sidecar(&a.out.join("labels"), "labels", a, serde_json::Value::Null)
    } else {
        let g = read_graph(&a.graph)?;
        write(&a.out, &labels_text(&g, a.level, a.alpha, &a.graph.display().to_string())?)?;
        write_sidecar(&a.out, "labels", a, serde_json::Value::Null)
    }
}

/// Feature rows, targets and row ids assembled from the data flags.
struct Dataset {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    ids: Vec<String>,
}

fn read_features_dir(dir: &Path) -> CliResult<BTreeMap<String, FeatureTable>> {
    let entries = fs::read_dir(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for e in entries {
        let p = e.map_err(|e| input(e.to_string()))?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            let table = io::parse_features(&read_text(&p)?).map_err(|e| input(format!("{}: {e}", p.display())))?;
            out.insert(stem(&p), table);
        }
    }
    if out.is_empty() {
        return Err(input(format!("no feature files in {}", dir.display())));
    }
    Ok(out)
}

fn read_targets(path: &Path) -> CliResult<BTreeMap<String, f64>> {
    let text = read_text(path)?;
    let first = text.lines().find(|l| !l.trim_start().starts_with('#')).unwrap_or("");
    let pairs: Vec<(String, f64)> = if first.trim().starts_with("file,") {
        io::parse_manifest(&text)?
            .into_iter()
            .map(|r| (stem(Path::new(&r.file)), r.p_or_blocks))
            .collect()
    } else {
        io::parse_targets(&text)?
    };
    Ok(pairs.into_iter().collect())
}

fn orphan_error(a: &[String], b: &[String]) -> CliError {
    let mut msg = String::from("feature and target ids do not align");
    if !a.is_empty() {
        msg += &format!("; features without targets: {}", a.join(", "));
    }
    if !b.is_empty() {
        msg += &format!("; targets without features: {}", b.join(", "));
    }
    input(msg)
}

fn matrix(rows: &[Vec<f64>]) -> CliResult<DMatrix<f64>> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(input("feature files have differing lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), width, |r, c| rows[r][c]))
}

fn load_dataset(d: &DataArgs) -> CliResult<Dataset> {
    let feats = read_features_dir(&d.features)?;
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut ids = Vec::new();
    match (&d.targets, &d.labels) {
        (Some(t), None) => {
            let tmap = read_targets(t)?;
            let only_f: Vec<String> = feats.keys().filter(|k| !tmap.contains_key(*k)).cloned().collect();
            let only_t: Vec<String> = tmap.keys().filter(|k| !feats.contains_key(*k)).cloned().collect();
            if !only_f.is_empty() || !only_t.is_empty() {
                return Err(orphan_error(&only_f, &only_t));
            }
            for (id, table) in &feats {
                let FeatureTable::Graph(v) = table else {
                    return Err(input(format!("{id}: graph targets need graph-level features")));
                };
                rows.push(v.clone());
                targets.push(tmap[id]);
                ids.push(id.clone());
            }
        }
        (None, Some(dir)) => {
            let mut labels = BTreeMap::new();
            for f in graph_files(dir)? {
                labels.insert(stem(&f), io::parse_node_labels(&read_text(&f)?)?);
            }
            let only_f: Vec<String> = feats.keys().filter(|k| !labels.contains_key(*k)).cloned().collect();
            let only_l: Vec<String> = labels.keys().filter(|k| !feats.contains_key(*k)).cloned().collect();
            if !only_f.is_empty() || !only_l.is_empty() {
                return Err(orphan_error(&only_f, &only_l));
            }
            for (id, table) in &feats {
                let FeatureTable::Node(node_rows) = table else {
                    return Err(input(format!("{id}: node labels need node-level features")));
                };
                for &(v, k) in &labels[id] {
                    let row = node_rows
                        .get(v)
                        .ok_or_else(|| input(format!("{id}: label for node {v} has no features")))?;
                    rows.push(row.clone());
                    targets.push(k);
                    ids.push(format!("{id}:{v}"));
                }
            }
        }
        _ => return Err(input("exactly one of --targets or --labels is required")),
    }
    let x = matrix(&rows)?;
    let y = DMatrix::from_column_slice(targets.len(), 1, &targets);
    Ok(Dataset { x, y, ids })
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn cmd_train(a: &TrainArgs) -> CliResult {
    let data = load_dataset(&a.data)?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.learning_rate,
        seed: a.seed,
        patience: (a.patience > 0).then_some(a.patience),
        validation_fraction: a.validation_fraction,
        weight_decay: a.weight_decay,
        ..TrainConfig::default()
    };
    ensure_dir(&a.out)?;
    let mut metrics = serde_json::Map::new();
    if a.folds > 0 {
        let cv = cross_validate(&data.x, &data.y, &a.hidden, &cfg, a.folds, a.seed)?;
        metrics.insert("mse".into(), cv.mean_mse.into());
        metrics.insert("baseline_mse".into(), cv.mean_baseline_mse.into());
        metrics.insert("fold_mse".into(), serde_json::to_value(&cv.fold_mse).unwrap());
        metrics.insert("folds".into(), a.folds.into());
    }
    let (pipeline, outcome) = fit_pipeline(&data.x, &data.y, &a.hidden, Task::Regression, &cfg)?;
    let pred = pipeline.predict(&data.x)?;
    metrics.insert("train_mse".into(), score(&pred, &data.y, Metric::Mse)?.into());
    metrics.insert("epochs_run".into(), outcome.history.len().into());
    metrics.insert("samples".into(), data.ids.len().into());
    let echo = serde_json::json!({ "args": a, "train": cfg });
    let ck = Checkpoint::from_pipeline(&pipeline, echo);
    write(&a.out.join("model.json"), &to_json(&ck))?;
    write(&a.out.join("metrics.json"), &to_json(&metrics))?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> CliResult {
    let data = load_dataset(&a.data)?;
    let pred = if let Some(p) = &a.predictions {
        let pmap: BTreeMap<String, f64> = io::parse_targets(&read_text(p)?)?.into_iter().collect();
        let missing: Vec<String> = data.ids.iter().filter(|id| !pmap.contains_key(*id)).cloned().collect();
        let extra: Vec<String> = pmap.keys().filter(|k| !data.ids.contains(k)).cloned().collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(orphan_error(&missing, &extra));
        }
        DMatrix::from_fn(data.ids.len(), 1, |r, _| pmap[&data.ids[r]])
    } else {
        let path = a.model.as_ref().expect("clap requires --model");
        let ck: Checkpoint = serde_json::from_str(&read_text(path)?)
            .map_err(|e| input(format!("{}: {e}", path.display())))?;
        ck.to_pipeline()?.predict(&data.x)?
    };
    let mut out = serde_json::Map::new();
    for &m in &a.metric {
        let name = serde_json::to_value(m).unwrap().as_str().unwrap().to_string();
        let v = match score(&pred, &data.y, m) {
            Ok(v) => serde_json::Value::from(v),
            Err(gdenet::Error::UndefinedMetric(why)) => {
                eprintln!("gdenet: warning: {name} undefined: {why}");
                serde_json::Value::Null
            }
            Err(e) => return Err(e.into()),
        };
        out.insert(name, v);
    }
    write(&a.out, &to_json(&out))
}

fn cmd_verify(a: &VerifyArgs) -> CliResult {
    let g = read_graph(&a.graph)?;
    let reports = if let Some(p) = &a.solution {
        let sol = io::parse_solution(&read_text(p)?, a.pde, a.laplacian)
            .map_err(|e| input(format!("{}: {e}", p.display())))?;
        let Some(j0) = sol.times.iter().position(|&t| t == 0.0) else {
            return Err(input("solution file needs a t = 0 snapshot to locate the support"));
        };
        (0..sol.sources)
            .map(|s| {
                let single = gdenet::SolutionTensor::from_snapshots(
                    sol.pde,
                    sol.kind,
                    sol.times.clone(),
                    sol.nodes,
                    vec![(0..sol.times.len()).map(|j| sol.snapshot(s, j).to_vec()).collect()],
                )?;
                let support = support_components(&g, &[sol.snapshot(s, j0)]);
                let mut r = check_component_confinement(&g, &single, &support)?;
                r.id = format!("{}_source{s}", r.id);
                Ok(r)
            })
            .collect::<gdenet::Result<Vec<_>>>()?
    } else {
        verify_graph(&g, a.suite, a.seed)?
    };
    write(&a.out, &io::format_reports(&reports))?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}

/// Caps the global worker pool at `GDENET_THREADS` when set.
pub fn configure_threads() -> CliResult {
    if let Ok(v) = std::env::var("GDENET_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| input(format!("GDENET_THREADS must be a positive integer, got {v:?}")))?;
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
