use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crsel::data::{read_csv, write_csv};
use crsel::prognostics::{kdgfi_table, score_prognostic_index, split_eval, CoefficientTable, SplitOptions, SplitReport};
use crsel::simulate::{
    calibrate_scenario, generate, preset, run_study, write_study_csv, CenterSizes, Method, PresetOptions, StudyOptions,
};
use crsel::{
    fit_path, prepare_penalty, sandwich, standardize_covariates, Dataset, Error, FitResult, GridOptions, MeatKind, ModelKind,
    PenaltyFamily, PenaltySpec, Problem, SolverKind, Status,
};
use rand_chacha::rand_core::SeedableRng;

const SCHEMA_VERSION: u32 = 1;

const EXIT_DATA: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;
const EXIT_CONFIG: u8 = 4;

/// Penalized variable selection for multi-center competing-risks data.
#[derive(Parser, Debug)]
#[command(name = "crsel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a penalized model on a CSV file and select λ by BIC.
    Fit(FitArgs),
    /// Generate one data set from a named simulation design.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo selection study and write its metrics table.
    Bench(BenchArgs),
    /// Repeated train/test evaluation: C-index, D-index, prediction error.
    Evaluate(EvaluateArgs),
    /// Prognostic index of each row of a CSV under a coefficient table.
    Score(ScoreArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Pooled,
    StratifiedRegular,
    StratifiedHigh,
    Marginal,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Pooled => ModelKind::PooledPsh,
            ModelArg::StratifiedRegular => ModelKind::StratifiedRegular,
            ModelArg::StratifiedHigh => ModelKind::StratifiedHigh,
            ModelArg::Marginal => ModelKind::Marginal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum PenaltyArg {
    None,
    Lasso,
    Alasso,
    Scad,
    Mcp,
}

impl From<PenaltyArg> for PenaltyFamily {
    fn from(p: PenaltyArg) -> Self {
        match p {
            PenaltyArg::None => PenaltyFamily::None,
            PenaltyArg::Lasso => PenaltyFamily::Lasso,
            PenaltyArg::Alasso => PenaltyFamily::Alasso,
            PenaltyArg::Scad => PenaltyFamily::Scad,
            PenaltyArg::Mcp => PenaltyFamily::Mcp,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Lqa,
    Cd,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Lqa => SolverKind::Lqa,
            SolverArg::Cd => SolverKind::Cd,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeatArg {
    Simple,
    Corrected,
}

#[derive(Args, Debug)]
struct PenaltyOpts {
    /// Penalty family.
    #[arg(long, value_enum, default_value = "scad")]
    penalty: PenaltyArg,
    /// SCAD shape a.
    #[arg(long, default_value_t = 3.7)]
    scad_a: f64,
    /// MCP shape γ.
    #[arg(long, default_value_t = 2.7)]
    mcp_gamma: f64,
    /// Number of λ values.
    #[arg(long, default_value_t = 50)]
    grid_size: usize,
    /// Smallest λ as a fraction of λ_max.
    #[arg(long, default_value_t = 1e-3)]
    min_ratio: f64,
    /// Optimizer; coordinate descent needs the marginal or pooled model.
    #[arg(long, value_enum, default_value = "lqa")]
    solver: SolverArg,
}

impl PenaltyOpts {
    fn template(&self, dim: usize) -> PenaltySpec {
        let mut spec = PenaltySpec::new(self.penalty.into(), dim);
        spec.scad_a = self.scad_a;
        spec.mcp_gamma = self.mcp_gamma;
        spec
    }

    fn grid(&self) -> GridOptions {
        GridOptions { size: self.grid_size, min_ratio: self.min_ratio }
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Input CSV with columns id,center,time,status,z1..zd.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "stratified-regular")]
    model: ModelArg,
    #[command(flatten)]
    penalty: PenaltyOpts,
    /// Group layout as 1-based covariate indices, e.g. "1,2;3;4,5,6".
    #[arg(long)]
    groups: Option<String>,
    /// Fit on standardized covariates; estimates are reported on the original scale.
    #[arg(long)]
    standardize: bool,
    /// Sandwich meat: with or without the censoring-weight correction.
    #[arg(long, value_enum, default_value = "corrected")]
    meat: MeatArg,
    /// Ignore columns other than id,center,time,status,z1..zd.
    #[arg(long)]
    allow_extra: bool,
    /// Output JSON path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DesignArgs {
    /// Named design: table1..table4, table4-marginal, appendixD-a..d.
    #[arg(long)]
    scenario: String,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    /// Sample size of three-center designs.
    #[arg(long)]
    n: Option<usize>,
    /// Number of centers of clustered designs.
    #[arg(long)]
    centers: Option<usize>,
    /// Center sizes: "m" or "lo-hi".
    #[arg(long)]
    sizes: Option<String>,
    /// Positive stable frailty index.
    #[arg(long)]
    alpha: Option<f64>,
}

impl DesignArgs {
    fn preset_options(&self) -> Result<PresetOptions, Failure> {
        let sizes = match &self.sizes {
            None => None,
            Some(s) => Some(parse_sizes(s).ok_or_else(|| Failure::config(format!("cannot parse center sizes `{s}`")))?),
        };
        Ok(PresetOptions { n: self.n, n_centers: self.centers, sizes, alpha: self.alpha, seed: self.seed })
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    design: DesignArgs,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Models to fit; defaults to those the design is meant for.
    #[arg(long, value_enum, value_delimiter = ',')]
    model: Vec<ModelArg>,
    /// Penalties besides MPLE and oracle.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "lasso,alasso,scad,mcp")]
    penalties: Vec<PenaltyArg>,
    #[arg(long, value_enum, default_value = "lqa")]
    solver: SolverArg,
    #[arg(long, default_value_t = 50)]
    grid_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    min_ratio: f64,
    /// Worker threads.
    #[arg(long, env = "CRR_THREADS")]
    threads: Option<usize>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "stratified-regular")]
    model: ModelArg,
    #[command(flatten)]
    penalty: PenaltyOpts,
    #[arg(long, default_value_t = 100)]
    splits: usize,
    /// Training share of each split; 1.0 evaluates in-sample.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    #[arg(long)]
    seed: u64,
    /// Prediction-error horizon; defaults to the upper quartile of test times.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, env = "CRR_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    allow_extra: bool,
    /// Output JSON path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// CSV with one column per factor; an optional `id` column is echoed.
    #[arg(long)]
    input: PathBuf,
    /// Coefficient table JSON; the bundled donor index table when absent.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure { code: EXIT_DATA, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidScenario(_) | Error::InvalidPenalty(_) | Error::CoordinateDescentUnsupported => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::data(e.to_string())
    }
}

fn parse_sizes(s: &str) -> Option<CenterSizes> {
    match s.split_once('-') {
        Some((lo, hi)) => Some(CenterSizes::Uniform { lo: lo.trim().parse().ok()?, hi: hi.trim().parse().ok()? }),
        None => Some(CenterSizes::Fixed(s.trim().parse().ok()?)),
    }
}

fn parse_groups(s: &str, dim: usize) -> Result<Vec<Vec<usize>>, Failure> {
    let bad = || Failure::config(format!("cannot parse groups `{s}`"));
    let mut groups = Vec::new();
    for part in s.split(';').filter(|p| !p.trim().is_empty()) {
        let g = part
            .split(',')
            .map(|x| x.trim().parse::<usize>().ok().filter(|&j| j >= 1 && j <= dim).map(|j| j - 1))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        groups.push(g);
    }
    Ok(groups)
}

fn open_input(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::data(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn read_dataset(path: &Path, allow_extra: bool) -> Result<Dataset, Failure> {
    Ok(read_csv(open_input(path)?, allow_extra)?)
}

#[derive(Serialize)]
struct PathPoint {
    lambda: f64,
    beta: Vec<f64>,
    active_set: Vec<String>,
    loglik: f64,
    df: f64,
    bic: f64,
}

#[derive(Serialize)]
struct SelectedFit {
    lambda: f64,
    beta: Vec<f64>,
    active_set: Vec<String>,
    se: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    covariance_method: Option<crsel::CovarianceMethod>,
}

#[derive(Serialize)]
struct Diagnostics {
    n: usize,
    n_centers: usize,
    n_events: usize,
    iterations: usize,
    converged: bool,
    solver: SolverKind,
    standardized: bool,
    meat: MeatKind,
}

#[derive(Serialize)]
struct FitReport {
    schema_version: u32,
    command: &'static str,
    model: ModelKind,
    penalty: PenaltyFamily,
    covariates: Vec<String>,
    lambda_grid: Vec<f64>,
    path: Vec<PathPoint>,
    selected_index: usize,
    selected: SelectedFit,
    diagnostics: Diagnostics,
}

fn names_of(ds: &Dataset, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&j| ds.covariate_names()[j].clone()).collect()
}

fn cmd_fit(args: &FitArgs) -> Result<u8, Failure> {
    let raw = read_dataset(&args.input, args.allow_extra)?;
    let model: ModelKind = args.model.into();
    let (ds, transform) = if args.standardize {
        let (ds, s) = standardize_covariates(&raw);
        (ds, Some(s))
    } else {
        (raw, None)
    };
    let problem = Problem::new(model, &ds)?;
    let mut template = args.penalty.template(ds.dim());
    if let Some(g) = &args.groups {
        template = template.with_groups(parse_groups(g, ds.dim())?);
    }
    let (spec, _) = prepare_penalty(&problem, args.penalty.penalty.into(), &template)?;
    let solver: SolverKind = args.penalty.solver.into();
    let path = fit_path(&problem, &spec, &args.penalty.grid(), solver)?;

    let scale_back = |beta: &[f64]| match &transform {
        Some(t) => t.back_map(beta),
        None => beta.to_vec(),
    };
    let points = path
        .fits
        .iter()
        .map(|f| PathPoint {
            lambda: f.lambda,
            beta: scale_back(&f.beta),
            active_set: names_of(&ds, &f.active),
            loglik: f.loglik,
            df: f.df,
            bic: f.bic,
        })
        .collect();

    let fit: &FitResult = &path.fits[path.selected];
    let meat = match args.meat {
        MeatArg::Simple => MeatKind::Simple,
        MeatArg::Corrected => MeatKind::Corrected,
    };
    let (se, covariance, covariance_method) = match sandwich(fit, &problem, meat) {
        Ok(rep) => {
            let s: Vec<f64> = match &transform {
                Some(t) => rep.active.iter().map(|&j| t.scales[j]).collect(),
                None => vec![1.0; rep.active.len()],
            };
            let cov: Vec<Vec<f64>> = rep
                .covariance
                .iter()
                .enumerate()
                .map(|(r, row)| row.iter().enumerate().map(|(c, v)| v / (s[r] * s[c])).collect())
                .collect();
            let se = (0..cov.len()).map(|r| cov[r][r].sqrt()).collect();
            (se, cov, Some(rep.method))
        }
        Err(Error::EmptyActiveSet) => (Vec::new(), Vec::new(), None),
        Err(e) => return Err(e.into()),
    };

    let report = FitReport {
        schema_version: SCHEMA_VERSION,
        command: "fit",
        model,
        penalty: spec.family,
        covariates: ds.covariate_names().to_vec(),
        lambda_grid: path.lambdas.clone(),
        path: points,
        selected_index: path.selected,
        selected: SelectedFit {
            lambda: fit.lambda,
            beta: scale_back(&fit.beta),
            active_set: names_of(&ds, &fit.active),
            se,
            covariance,
            covariance_method,
        },
        diagnostics: Diagnostics {
            n: ds.n(),
            n_centers: ds.n_centers(),
            n_events: ds.subjects().iter().filter(|s| s.status == Status::Cause1).count(),
            iterations: fit.iterations,
            converged: fit.converged,
            solver,
            standardized: transform.is_some(),
            meat,
        },
    };
    write_json(&args.output, &report)?;
    if !fit.converged {
        eprintln!("error: the selected fit did not converge");
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(0)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8, Failure> {
    let (scenario, _) = preset(&args.design.scenario, &args.design.preset_options()?)?;
    let scenario = calibrate_scenario(&scenario)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.design.seed);
    let ds = generate(&scenario, &mut rng)?;
    write_csv(&ds, sink(&args.output)?)?;
    Ok(0)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, Failure> {
    let (scenario, defaults) = preset(&args.design.scenario, &args.design.preset_options()?)?;
    let models: Vec<ModelKind> = if args.model.is_empty() { defaults } else { args.model.iter().map(|&m| m.into()).collect() };
    let penalties: Vec<PenaltyFamily> = args.penalties.iter().filter(|&&p| p != PenaltyArg::None).map(|&p| p.into()).collect();
    let methods: Vec<Method> = models
        .into_iter()
        .map(|m| {
            let mut method = Method::new(m, penalties.clone());
            method.solver = args.solver.into();
            method
        })
        .collect();
    let opts = StudyOptions {
        reps: args.reps,
        grid: GridOptions { size: args.grid_size, min_ratio: args.min_ratio },
        threads: args.threads,
    };
    let result = run_study(&scenario, &methods, &opts)?;
    for f in &result.failures {
        log::warn!("replication {} ({} {}): {}", f.rep, f.model, f.penalty, f.message);
    }
    write_study_csv(&result.rows, sink(&args.output)?)?;
    Ok(0)
}

#[derive(Serialize)]
struct EvaluateReport {
    schema_version: u32,
    command: &'static str,
    train_fraction: f64,
    seed: u64,
    #[serde(flatten)]
    report: SplitReport,
    notes: Vec<String>,
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<u8, Failure> {
    let model: ModelKind = args.model.into();
    if model == ModelKind::StratifiedHigh && args.horizon.is_some() {
        return Err(Failure::config(
            "prediction error is infeasible for the stratified-high model: it has no baseline subdistribution hazard to predict from",
        ));
    }
    let ds = read_dataset(&args.input, args.allow_extra)?;
    let opts = SplitOptions {
        splits: args.splits,
        train_fraction: args.train_fraction,
        seed: args.seed,
        grid: args.penalty.grid(),
        solver: args.penalty.solver.into(),
        horizon: args.horizon,
        threads: args.threads,
    };
    let report = split_eval(&ds, model, args.penalty.penalty.into(), &opts)?;
    let mut notes = Vec::new();
    if model == ModelKind::StratifiedHigh {
        let note = "prediction error omitted: infeasible for the stratified-high model".to_string();
        eprintln!("note: {note}");
        notes.push(note);
    }
    for (split, msg) in &report.failures {
        log::warn!("split {split}: {msg}");
    }
    let out = EvaluateReport {
        schema_version: SCHEMA_VERSION,
        command: "evaluate",
        train_fraction: args.train_fraction,
        seed: args.seed,
        report,
        notes,
    };
    write_json(&args.output, &out)?;
    Ok(0)
}

fn cmd_score(args: &ScoreArgs) -> Result<u8, Failure> {
    let table = match &args.table {
        Some(p) => {
            let mut text = String::new();
            open_input(p)?.read_to_string(&mut text)?;
            CoefficientTable::from_json(&text)?
        }
        None => kdgfi_table(),
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open_input(&args.input)?);
    let headers = rdr.headers().map_err(|e| Failure::data(e.to_string()))?.clone();
    let id_col = headers.iter().position(|h| h == "id");
    let mut w = csv::Writer::from_writer(sink(&args.output)?);
    w.write_record(["id", "pi", "index"]).map_err(|e| Failure::data(e.to_string()))?;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::data(e.to_string()))?;
        let mut subject = BTreeMap::new();
        for (h, v) in headers.iter().zip(rec.iter()) {
            if Some(h) == id_col.map(|c| &headers[c]) || v.is_empty() {
                continue;
            }
            let x: f64 = v
                .parse()
                .map_err(|_| Failure::data(format!("line {}: cannot parse `{v}` as a number in column `{h}`", row + 2)))?;
            subject.insert(h.to_string(), x);
        }
        let score = score_prognostic_index(&table, &subject).map_err(|e| Failure::data(format!("line {}: {e}", row + 2)))?;
        let id = id_col.and_then(|c| rec.get(c)).map(str::to_string).unwrap_or_else(|| (row + 1).to_string());
        w.write_record([id, format!("{:.6}", score.pi), format!("{:.6}", score.index)])
            .map_err(|e| Failure::data(e.to_string()))?;
    }
    w.flush()?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Score(a) => cmd_score(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
