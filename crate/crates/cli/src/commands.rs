use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use abf_core::filter::{CountingFilter, FilterParams};
use abf_core::harness::{run_growth_comparison_with, run_threshold_sweep_with, GrowthConfig, SweepConfig};
use abf_core::model::{rates, ModelPoint};
use abf_core::tuner::{optimize_t, optimize_theta_t, TuneConstraint, TuneResult};
use abf_core::{Error, Execution};
use serde::de::DeserializeOwned;

use crate::store::{load, read_lines, save};
use crate::{Command, RunArgs, TuneSource};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        CliError::Domain(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::InvalidThreshold { .. }
            | Error::InvalidProbability(_)
            | Error::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

pub fn run(command: Command) -> CliResult {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match command {
        Command::Build { m, k, seed, counter_max, out: path } => {
            let params = FilterParams::with_counter_max(m, k, seed, counter_max)?;
            save(&path, &CountingFilter::new(params))
        }
        Command::Insert { filter } => update(&filter, &mut out, true),
        Command::Remove { filter } => update(&filter, &mut out, false),
        Command::Query { filter, theta, t } => query(&filter, theta, t, &mut out),
        Command::Tune { source, l_tpr, theta } => tune(source, l_tpr, theta, &mut out),
        Command::Analyze { m, n, k, theta, t } => analyze(ModelPoint { m, n, k, theta, t }, &mut out),
        Command::SweepTheta { run, pmf_out } => sweep(run, pmf_out.as_deref(), &mut out),
        Command::CompareGrowth { run } => growth(run, &mut out),
    }?;
    out.flush().map_err(|e| CliError::Domain(e.to_string()))
}

fn stdin_elements() -> Result<Vec<Vec<u8>>, CliError> {
    let lines = read_lines(io::stdin().lock()).map_err(|e| CliError::Domain(format!("stdin: {e}")))?;
    Ok(lines.into_iter().filter(|l| !l.is_empty()).collect())
}

fn emit(out: &mut impl Write, args: fmt::Arguments<'_>) -> CliResult {
    out.write_fmt(args).map_err(|e| CliError::Domain(e.to_string()))
}

/// Apply the whole batch in memory; the file changes only if every line succeeds.
fn update(path: &Path, out: &mut impl Write, insert: bool) -> CliResult {
    let mut filter = load(path)?;
    let elements = stdin_elements()?;
    for (line, element) in elements.iter().enumerate() {
        let d = filter.digest(element);
        let result = if insert { filter.insert(&d) } else { filter.remove(&d) };
        result.map_err(|e| CliError::Domain(format!("line {}: {e}; batch aborted, filter unchanged", line + 1)))?;
    }
    save(path, &filter)?;
    let verb = if insert { "inserted" } else { "removed" };
    for element in &elements {
        emit(out, format_args!("{verb}\t{}\n", String::from_utf8_lossy(element)))?;
    }
    Ok(())
}

fn query(path: &Path, theta: u32, t: Option<usize>, out: &mut impl Write) -> CliResult {
    let filter = load(path)?;
    let t = t.unwrap_or(filter.params().k());
    let view = filter.binarize(theta, t)?;
    for element in stdin_elements()? {
        emit(out, format_args!("{}\n", u8::from(view.query_element(&element))))?;
    }
    Ok(())
}

fn tune(source: TuneSource, l_tpr: f64, theta: Option<u32>, out: &mut impl Write) -> CliResult {
    let (m, n, k) = match (source.filter, source.m, source.n, source.k) {
        (Some(path), ..) => {
            let f = load(&path)?;
            (f.params().m() as u64, f.n_stored(), f.params().k() as u64)
        }
        (None, Some(m), Some(n), Some(k)) => {
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            (m, n, k)
        }
        _ => return Err(CliError::Usage("give --filter or all of --m, --n, --k".into())),
    };
    if k == 0 || k > m {
        return Err(CliError::Usage(format!("need 1 <= k <= m, got k = {k}, m = {m}")));
    }
    let constraint = TuneConstraint::new(l_tpr)?;
    let result = match theta {
        Some(theta) => optimize_t(m, n, k, theta, constraint)?,
        None => optimize_theta_t(m, n, k, constraint)?,
    };
    write_tune(out, &result)
}

pub fn write_tune(out: &mut impl Write, r: &TuneResult) -> CliResult {
    emit(
        out,
        format_args!(
            "theta={}\nT={}\ntpr={}\nfpr={}\nacc={}\nfeasible={}\ncandidates={}\n",
            r.theta, r.t, r.predicted.tpr, r.predicted.fpr, r.predicted.acc, r.feasible, r.candidates_evaluated
        ),
    )
}

fn analyze(point: ModelPoint, out: &mut impl Write) -> CliResult {
    if point.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let r = rates(&point)?;
    emit(
        out,
        format_args!(
            "p1={}\nP0={}\nP1={}\ndbar_x={}\ndbar_y={}\np_x={}\np_y={}\nTPR={}\nFPR={}\nACC={}\n",
            r.position_prob,
            r.zero_prob,
            r.one_prob,
            r.mean_dot_stored,
            r.mean_dot_absent,
            r.stored_hit_prob,
            r.absent_hit_prob,
            r.tpr,
            r.fpr,
            r.acc
        ),
    )
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn execution(run: &RunArgs) -> Execution {
    if run.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn sweep(run: RunArgs, pmf_out: Option<&Path>, out: &mut impl Write) -> CliResult {
    let mut cfg: SweepConfig = load_config(run.config.as_deref())?;
    cfg.trials = run.trials.unwrap_or(cfg.trials);
    cfg.query_count = run.queries.unwrap_or(cfg.query_count);
    cfg.base_seed = run.seed.unwrap_or(cfg.base_seed);
    let report = run_threshold_sweep_with(&cfg, execution(&run))?;
    report.write_csv(create(&run.out)?).map_err(|e| CliError::io(&run.out, e))?;
    if let Some(p) = pmf_out {
        report.write_pmf_csv(create(p)?).map_err(|e| CliError::io(p, e))?;
    }
    emit(out, format_args!("best_theta={}\n", report.best.theta))?;
    write_tune(out, &report.best)
}

fn growth(run: RunArgs, out: &mut impl Write) -> CliResult {
    let mut cfg: GrowthConfig = load_config(run.config.as_deref())?;
    cfg.trials = run.trials.unwrap_or(cfg.trials);
    cfg.query_count = run.queries.unwrap_or(cfg.query_count);
    cfg.base_seed = run.seed.unwrap_or(cfg.base_seed);
    let report = run_growth_comparison_with(&cfg, execution(&run))?;
    report.write_csv(create(&run.out)?).map_err(|e| CliError::io(&run.out, e))?;
    emit(out, format_args!("records={}\nrebuilds={}\n", report.records.len(), report.rebuild_count))
}
