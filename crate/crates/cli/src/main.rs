//! Command-line front end: data ingestion, test configuration, JSON
//! results, and plot-data emission.

mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use randinfer::cluster::{
    art_test, cluster_scores_ols, contiguous_blocks, im_ttest, ClusterData, ClusterStat,
};
use randinfer::conformal::{
    full_conformal, split_conformal, symmetric_interval_exchangeable, upper_bound_exchangeable,
    Grid, LinearPredictor, MeanPredictor, MedianPredictor, Predictor,
};
use randinfer::engine::{run_with_mode, EngineConfig, RandomizationResult, RunMode};
use randinfer::experiments::{
    pair_by_covariates, strong_null_test, strong_null_test_resampled, weak_null_test_pairs,
    AssignmentScheme,
};
use randinfer::groups::GroupKind;
use randinfer::simlab;
use randinfer::{Error as CoreError, ExperimentSample, Sample, StatisticSpec};

use input::{split_cols, Table};

/// Error split matching the exit-code contract: 2 for validation
/// problems, 1 for runtime failures.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Structure(_) | CoreError::Parameter(_) | CoreError::CapExceeded { .. } => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "randinfer",
    version,
    about = "Randomization tests, conformal prediction, and cluster sign-change inference"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Randomization tests on CSV data.
    #[command(subcommand)]
    Test(TestCmd),
    /// Randomization tests for randomized experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Conformal prediction intervals and sets.
    #[command(subcommand)]
    Conformal(ConformalCmd),
    /// Cluster-level approximate randomization tests.
    #[command(subcommand)]
    Cluster(ClusterCmd),
    /// Calibrated synthetic studies emitting plot data.
    #[command(subcommand)]
    Simlab(SimlabCmd),
}

/// Flags shared by every randomization-test command.
#[derive(Args, Clone, Serialize)]
struct RunOpts {
    /// Input CSV file (UTF-8, header row required).
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated column names; the meaning depends on the
    /// subcommand.
    #[arg(long)]
    cols: String,
    /// Nominal level of the test.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Enumerate the whole group instead of sampling.
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Monte Carlo budget (number of group elements, identity included).
    #[arg(long)]
    mc: Option<usize>,
    /// RNG seed; mandatory in Monte Carlo mode.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl RunOpts {
    fn mode(&self) -> Result<RunMode, CliError> {
        if self.exact {
            return Ok(RunMode::Exact);
        }
        let b = self.mc.unwrap_or(randinfer::engine::DEFAULT_MONTE_CARLO_B);
        let seed = self.seed.ok_or_else(|| {
            CliError::validation("--seed is mandatory in Monte Carlo mode (or pass --exact)")
        })?;
        Ok(RunMode::MonteCarlo { b, seed })
    }

    fn table(&self) -> Result<Table, CliError> {
        Table::load(&self.input)
    }
}

#[derive(Subcommand)]
enum TestCmd {
    /// One-sample sign-change test of a symmetric center.
    OneSample {
        #[command(flatten)]
        opts: RunOpts,
        /// Hypothesized center subtracted before testing.
        #[arg(long, default_value_t = 0.0)]
        mu0: f64,
    },
    /// Two-sample permutation test. Long format: --cols y,group (group
    /// holds 0/1); wide format with --wide: --cols x,y.
    TwoSample {
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long, value_enum, default_value_t = TwoSampleStat::MeanDiff)]
        stat: TwoSampleStat,
        /// Divide by a consistent scale estimate (asymptotically pivotal).
        #[arg(long)]
        studentize: bool,
        /// Columns are two value lists instead of value + group label.
        #[arg(long)]
        wide: bool,
        /// Reject for large signed values instead of large |T|.
        #[arg(long)]
        one_sided: bool,
    },
    /// K-sample studentized dispersion test: --cols y,group.
    KSample {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Multivariate two-sample test: --cols y1,...,yd,group.
    Hotelling {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Permutation test of zero correlation: --cols x,y.
    Correlation {
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long)]
        studentize: bool,
        #[arg(long)]
        one_sided: bool,
    },
    /// Permutation test of zero lag-k autocorrelation: --cols y.
    Autocorr {
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long, default_value_t = 1)]
        lag: usize,
        #[arg(long)]
        studentize: bool,
        /// Truncation lag of the plug-in studentizer (default n^(1/3)).
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        one_sided: bool,
    },
    /// Permutation trend test (Mann-Kendall): --cols y.
    Trend {
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long)]
        one_sided: bool,
    },
    /// Streak test on a binary series: --cols made. One-sided by
    /// construction (positive dependence inflates the statistic).
    Hothand {
        #[command(flatten)]
        opts: RunOpts,
        /// Streak length k.
        #[arg(long, default_value_t = 3)]
        streak: usize,
        #[arg(long, value_enum, default_value_t = HothandStat::Diff)]
        stat: HothandStat,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum TwoSampleStat {
    MeanDiff,
    Wilcoxon,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum HothandStat {
    /// Difference of success rates after success and failure streaks.
    Diff,
    /// Success rate after success streaks only.
    Make,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Exact test of the strong null under the design's group:
    /// --cols y,d[,stratum|,pair].
    Strong {
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Treated share for simple or stratified designs.
        #[arg(long)]
        q: Option<f64>,
        /// Redraw whole assignment vectors from the scheme instead of
        /// transforming the observed one (Monte Carlo only).
        #[arg(long)]
        resample: bool,
        #[arg(long)]
        studentize: bool,
        #[arg(long)]
        one_sided: bool,
    },
    /// Studentized matched-pair test of a mean effect:
    /// --cols y,d,pair (or --cols y,d,z with --pair-on-covariate).
    Weak {
        #[command(flatten)]
        opts: RunOpts,
        /// Hypothesized average treatment effect.
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        /// Third column is a covariate; pairs are built by sorting it.
        #[arg(long)]
        pair_on_covariate: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum SchemeArg {
    Simple,
    Complete,
    Stratified,
    Pairs,
}

#[derive(Subcommand)]
enum ConformalCmd {
    /// Prediction bound for an exchangeable column: --cols y.
    Bound {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        cols: String,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = BoundScore::Raw)]
        score: BoundScore,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Full conformal prediction set over a response grid: --cols x,y.
    Full {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        cols: String,
        /// Query point.
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Response grid as lo:hi:points (defaults to the widened
        /// observed range with 513 points).
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value_t = PredictorArg::Linear)]
        predictor: PredictorArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Split conformal interval with a held-out training file.
    Split {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        calib: PathBuf,
        #[arg(long)]
        cols: String,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = PredictorArg::Linear)]
        predictor: PredictorArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum BoundScore {
    /// One-sided upper bound from the raw values.
    Raw,
    /// Two-sided set from deviations about the median.
    AbsMedian,
    /// Two-sided set from deviations about the mean.
    AbsMean,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum PredictorArg {
    Mean,
    Median,
    Linear,
}

impl PredictorArg {
    fn as_predictor(self) -> Box<dyn Predictor<f64>> {
        match self {
            PredictorArg::Mean => Box::new(MeanPredictor),
            PredictorArg::Median => Box::new(MedianPredictor),
            PredictorArg::Linear => Box::new(LinearPredictor),
        }
    }
}

#[derive(Subcommand)]
enum ClusterCmd {
    /// Sign-change test on per-cluster regression coefficients:
    /// --cols y,x1,...,cluster (the last column is the cluster label), or
    /// --cols y,x1,... with --blocks q for contiguous time blocks.
    Art {
        #[command(flatten)]
        opts: RunOpts,
        /// Coefficient index (0 = intercept unless --no-intercept).
        #[arg(long, default_value_t = 1)]
        coef: usize,
        /// Hypothesized coefficient value.
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        #[arg(long, value_enum, default_value_t = ClusterStatArg::Tstat)]
        stat: ClusterStatArg,
        /// Treat the rows as a time series split into this many
        /// contiguous blocks instead of reading a cluster column.
        #[arg(long)]
        blocks: Option<usize>,
        /// Do not prepend an intercept regressor.
        #[arg(long)]
        no_intercept: bool,
        /// Also report the comparison t-test decision.
        #[arg(long)]
        compare_ttest: bool,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum ClusterStatArg {
    Tstat,
    Wald,
}

#[derive(Subcommand)]
enum SimlabCmd {
    /// Two-sample level study across mixing proportions.
    Figure2 {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 2000)]
        b: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Correlation level study under the product dependence construction.
    Correlation {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 999)]
        b: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Matched-pair weak-null level study with heterogeneous effects.
    Weaknull {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 999)]
        b: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Streak-difference randomization-distribution diagnostics.
    Hothand {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        streak: usize,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 10_000)]
        b: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cluster sign-change vs comparison t-test level study.
    Cluster {
        /// Per-cluster score standard deviations, comma separated.
        #[arg(long, default_value = "1,2,3,4,5,6,7,8")]
        sigmas: String,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum TableFormat {
    Csv,
    Json,
}

/// The JSON result artifact of a randomization test.
#[derive(Serialize)]
struct TestArtifact {
    method: String,
    statistic: String,
    group: String,
    mode: String,
    m_or_b: usize,
    seed: Option<u64>,
    alpha: f64,
    t_obs: f64,
    p_value: f64,
    reject_nonrandomized: bool,
    a: f64,
    r_hat: f64,
    dropped: usize,
    warnings: Vec<String>,
    config_echo: serde_json::Value,
    version: String,
}

fn describe_group(kind: &GroupKind) -> String {
    match kind {
        GroupKind::SignChange { n } => format!("sign-change({n})"),
        GroupKind::FullPermutation { n } => format!("full-permutation({n})"),
        GroupKind::StratifiedPermutation { strata } => {
            let mut labels = strata.clone();
            labels.sort_unstable();
            labels.dedup();
            format!("stratified-permutation({} strata)", labels.len())
        }
        GroupKind::PairSwap { pairs } => {
            let mut labels = pairs.clone();
            labels.sort_unstable();
            labels.dedup();
            format!("pair-swap({} pairs)", labels.len())
        }
        GroupKind::ClusterSignChange { q } => format!("cluster-sign-change({q})"),
    }
}

fn artifact(
    method: &str,
    statistic: String,
    kind: &GroupKind,
    res: &RandomizationResult<f64>,
    mut warnings: Vec<String>,
    config_echo: serde_json::Value,
) -> TestArtifact {
    if res.dropped > 0 {
        warnings.push(format!(
            "{} group elements had an undefined statistic and were excluded; \
             derived quantities use the reduced count",
            res.dropped
        ));
    }
    let (mode, m_or_b, seed) = match res.mode {
        randinfer::Mode::Exact { m } => ("exact".to_string(), m, None),
        randinfer::Mode::MonteCarlo { b, seed } => ("monte-carlo".to_string(), b, Some(seed)),
    };
    TestArtifact {
        method: method.to_string(),
        statistic,
        group: describe_group(kind),
        mode,
        m_or_b,
        seed,
        alpha: res.alpha,
        t_obs: res.t_obs,
        p_value: res.p_hat,
        reject_nonrandomized: res.phi == 1.0,
        a: res.a,
        r_hat: res.r_hat,
        dropped: res.dropped,
        warnings,
        config_echo,
        version: randinfer::VERSION.to_string(),
    }
}

fn emit<T: Serialize>(value: &T, output: &Option<PathBuf>) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))?;
    write_out(json, output)
}

fn write_out(text: String, output: &Option<PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn expect_cols(cols: &str, expected: usize, usage: &str) -> Result<Vec<String>, CliError> {
    let names = split_cols(cols);
    if names.len() != expected {
        return Err(CliError::validation(format!(
            "--cols expects {expected} name(s) here ({usage}), got {names:?}"
        )));
    }
    Ok(names)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Test(t) => run_test(t),
        Cmd::Experiment(e) => run_experiment(e),
        Cmd::Conformal(c) => run_conformal(c),
        Cmd::Cluster(c) => run_cluster(c),
        Cmd::Simlab(s) => run_simlab(s),
    }
}

fn maybe_abs(spec: StatisticSpec, one_sided: bool) -> StatisticSpec {
    if one_sided {
        spec
    } else {
        spec.two_sided()
    }
}

fn stat_name(spec: &StatisticSpec) -> String {
    match spec {
        StatisticSpec::AbsMean => "abs-mean".into(),
        StatisticSpec::MeanDiff => "mean-diff".into(),
        StatisticSpec::StudentizedMeanDiff => "studentized-mean-diff".into(),
        StatisticSpec::Wilcoxon => "wilcoxon".into(),
        StatisticSpec::StudentizedWilcoxon => "studentized-wilcoxon".into(),
        StatisticSpec::KSample => "k-sample".into(),
        StatisticSpec::HotellingStudentized => "hotelling-studentized".into(),
        StatisticSpec::Correlation => "correlation".into(),
        StatisticSpec::StudentizedCorrelation => "studentized-correlation".into(),
        StatisticSpec::Autocorr { lag } => format!("autocorr(lag={lag})"),
        StatisticSpec::StudentizedAutocorr { lag, truncation } => match truncation {
            Some(l) => format!("studentized-autocorr(lag={lag},trunc={l})"),
            None => format!("studentized-autocorr(lag={lag})"),
        },
        StatisticSpec::MannKendall => "mann-kendall".into(),
        StatisticSpec::HotHand { streak } => format!("hot-hand(k={streak})"),
        StatisticSpec::HotHandDiff { streak } => format!("hot-hand-diff(k={streak})"),
        StatisticSpec::Abs(inner) => format!("|{}|", stat_name(inner)),
    }
}

fn run_engine(
    method: &str,
    sample: &Sample<f64>,
    spec: &StatisticSpec,
    kind: &GroupKind,
    opts: &RunOpts,
    echo: serde_json::Value,
) -> Result<(), CliError> {
    let mode = opts.mode()?;
    let res = run_with_mode(
        &EngineConfig::default(),
        sample,
        spec,
        kind,
        opts.alpha,
        mode,
    )?;
    let art = artifact(method, stat_name(spec), kind, &res, Vec::new(), echo);
    emit(&art, &opts.output)
}

fn run_test(cmd: TestCmd) -> Result<(), CliError> {
    match cmd {
        TestCmd::OneSample { opts, mu0 } => {
            let names = expect_cols(&opts.cols, 1, "value column")?;
            let mut values = opts.table()?.numeric(&names[0])?;
            for v in &mut values {
                *v -= mu0;
            }
            let n = values.len();
            let echo = serde_json::json!({ "opts": &opts, "mu0": mu0 });
            run_engine(
                "test one-sample",
                &Sample::Values(values),
                &StatisticSpec::AbsMean,
                &GroupKind::SignChange { n },
                &opts,
                echo,
            )
        }
        TestCmd::TwoSample {
            opts,
            stat,
            studentize,
            wide,
            one_sided,
        } => {
            let names = expect_cols(
                &opts.cols,
                2,
                if wide {
                    "two value columns"
                } else {
                    "value,group"
                },
            )?;
            let table = opts.table()?;
            let (x, y) = if wide {
                (
                    table.numeric_sparse(&names[0])?,
                    table.numeric_sparse(&names[1])?,
                )
            } else {
                let v = table.numeric(&names[0])?;
                let d = table.binary(&names[1])?;
                let mut x = Vec::new();
                let mut y = Vec::new();
                for (&vi, &di) in v.iter().zip(&d) {
                    if di {
                        x.push(vi);
                    } else {
                        y.push(vi);
                    }
                }
                (x, y)
            };
            if x.is_empty() || y.is_empty() {
                return Err(CliError::validation("both samples must be non-empty"));
            }
            let spec = match (stat, studentize) {
                (TwoSampleStat::MeanDiff, false) => StatisticSpec::MeanDiff,
                (TwoSampleStat::MeanDiff, true) => StatisticSpec::StudentizedMeanDiff,
                (TwoSampleStat::Wilcoxon, false) => StatisticSpec::Wilcoxon,
                (TwoSampleStat::Wilcoxon, true) => StatisticSpec::StudentizedWilcoxon,
            };
            let spec = maybe_abs(spec, one_sided);
            let n = x.len() + y.len();
            let echo = serde_json::json!({
                "opts": &opts, "stat": stat, "studentize": studentize,
                "wide": wide, "one_sided": one_sided,
            });
            run_engine(
                "test two-sample",
                &Sample::two_sample(x, y),
                &spec,
                &GroupKind::FullPermutation { n },
                &opts,
                echo,
            )
        }
        TestCmd::KSample { opts } => {
            let names = expect_cols(&opts.cols, 2, "value,group")?;
            let groups = opts.table()?.grouped(&names[0], &names[1])?;
            if groups.len() < 2 {
                return Err(CliError::validation(
                    "k-sample test needs at least 2 groups",
                ));
            }
            let n: usize = groups.iter().map(Vec::len).sum();
            let echo = serde_json::json!({ "opts": &opts });
            run_engine(
                "test k-sample",
                &Sample::k_sample(groups),
                &StatisticSpec::KSample,
                &GroupKind::FullPermutation { n },
                &opts,
                echo,
            )
        }
        TestCmd::Hotelling { opts } => {
            let names = split_cols(&opts.cols);
            if names.len() < 2 {
                return Err(CliError::validation(
                    "--cols needs outcome coordinates then a group column (y1,...,yd,group)",
                ));
            }
            let table = opts.table()?;
            let group = table.binary(names.last().unwrap())?;
            let coords: Vec<Vec<f64>> = names[..names.len() - 1]
                .iter()
                .map(|c| table.numeric(c))
                .collect::<Result<_, _>>()?;
            let mut x = Vec::new();
            let mut y = Vec::new();
            for i in 0..group.len() {
                let row: Vec<f64> = coords.iter().map(|c| c[i]).collect();
                if group[i] {
                    x.push(row);
                } else {
                    y.push(row);
                }
            }
            let n = group.len();
            let sample = Sample::vector_two_sample(x, y)?;
            let echo = serde_json::json!({ "opts": &opts });
            run_engine(
                "test hotelling",
                &sample,
                &StatisticSpec::HotellingStudentized,
                &GroupKind::FullPermutation { n },
                &opts,
                echo,
            )
        }
        TestCmd::Correlation {
            opts,
            studentize,
            one_sided,
        } => {
            let names = expect_cols(&opts.cols, 2, "x,y")?;
            let table = opts.table()?;
            let x = table.numeric(&names[0])?;
            let y = table.numeric(&names[1])?;
            let n = x.len();
            let spec = maybe_abs(
                if studentize {
                    StatisticSpec::StudentizedCorrelation
                } else {
                    StatisticSpec::Correlation
                },
                one_sided,
            );
            let echo = serde_json::json!({
                "opts": &opts, "studentize": studentize, "one_sided": one_sided
            });
            run_engine(
                "test correlation",
                &Sample::paired(x, y)?,
                &spec,
                &GroupKind::FullPermutation { n },
                &opts,
                echo,
            )
        }
        TestCmd::Autocorr {
            opts,
            lag,
            studentize,
            truncation,
            one_sided,
        } => {
            let names = expect_cols(&opts.cols, 1, "value column")?;
            let values = opts.table()?.numeric(&names[0])?;
            let n = values.len();
            let spec = maybe_abs(
                if studentize {
                    StatisticSpec::StudentizedAutocorr { lag, truncation }
                } else {
                    StatisticSpec::Autocorr { lag }
                },
                one_sided,
            );
            let echo = serde_json::json!({
                "opts": &opts, "lag": lag, "studentize": studentize,
                "truncation": truncation, "one_sided": one_sided,
            });
            run_engine(
                "test autocorr",
                &Sample::Values(values),
                &spec,
                &GroupKind::FullPermutation { n },
                &opts,
                echo,
            )
        }
        TestCmd::Trend { opts, one_sided } => {
            let names = expect_cols(&opts.cols, 1, "value column")?;
            let values = opts.table()?.numeric(&names[0])?;
            let n = values.len();
            let spec = maybe_abs(StatisticSpec::MannKendall, one_sided);
            let echo = serde_json::json!({ "opts": &opts, "one_sided": one_sided });
            run_engine(
                "test trend",
                &Sample::Values(values),
                &spec,
                &GroupKind::FullPermutation { n },
                &opts,
                echo,
            )
        }
        TestCmd::Hothand { opts, streak, stat } => {
            let names = expect_cols(&opts.cols, 1, "binary column")?;
            let bits = opts.table()?.binary(&names[0])?;
            let n = bits.len();
            let spec = match stat {
                HothandStat::Diff => StatisticSpec::HotHandDiff { streak },
                HothandStat::Make => StatisticSpec::HotHand { streak },
            };
            let echo = serde_json::json!({ "opts": &opts, "streak": streak, "stat": stat });
            run_engine(
                "test hothand",
                &Sample::Bits(bits),
                &spec,
                &GroupKind::FullPermutation { n },
                &opts,
                echo,
            )
        }
    }
}

fn run_experiment(cmd: ExperimentCmd) -> Result<(), CliError> {
    match cmd {
        ExperimentCmd::Strong {
            opts,
            scheme,
            q,
            resample,
            studentize,
            one_sided,
        } => {
            let names = split_cols(&opts.cols);
            if names.len() < 2 || names.len() > 3 {
                return Err(CliError::validation(
                    "--cols needs y,d and optionally a stratum or pair column",
                ));
            }
            let table = opts.table()?;
            let y = table.numeric(&names[0])?;
            let d = table.binary(&names[1])?;
            let n = y.len();
            let mut sample = ExperimentSample::new(y, d.clone(), vec![])?;

            let scheme_core = match scheme {
                SchemeArg::Simple => AssignmentScheme::SimpleRandom {
                    q: q.ok_or_else(|| CliError::validation("--q is required for simple"))?,
                },
                SchemeArg::Complete => AssignmentScheme::Complete {
                    m: d.iter().filter(|&&b| b).count(),
                },
                SchemeArg::Stratified => {
                    if names.len() != 3 {
                        return Err(CliError::validation(
                            "stratified designs need a stratum column (--cols y,d,stratum)",
                        ));
                    }
                    let strata = table.labels(&names[2])?;
                    sample = sample.with_strata(strata.clone())?;
                    AssignmentScheme::StratifiedBlock {
                        strata,
                        q: q.ok_or_else(|| CliError::validation("--q is required for stratified"))?,
                    }
                }
                SchemeArg::Pairs => {
                    if names.len() != 3 {
                        return Err(CliError::validation(
                            "matched-pair designs need a pair column (--cols y,d,pair)",
                        ));
                    }
                    let pairs = table.labels(&names[2])?;
                    sample = sample.with_pairs(pairs.clone())?;
                    AssignmentScheme::MatchedPairs { pairs }
                }
            };
            let spec = maybe_abs(
                if studentize {
                    StatisticSpec::StudentizedMeanDiff
                } else {
                    StatisticSpec::MeanDiff
                },
                one_sided,
            );
            let echo = serde_json::json!({
                "opts": &opts, "scheme": scheme, "q": q, "resample": resample,
                "studentize": studentize, "one_sided": one_sided,
            });
            let res = if resample {
                let (b, seed) = match opts.mode()? {
                    RunMode::MonteCarlo { b, seed } => (b, seed),
                    RunMode::Exact => {
                        return Err(CliError::validation(
                            "--resample draws assignments at random; use Monte Carlo mode",
                        ))
                    }
                };
                strong_null_test_resampled(&sample, &scheme_core, &spec, opts.alpha, b, seed)?
            } else {
                strong_null_test(&sample, &scheme_core, &spec, opts.alpha, opts.mode()?)?
            };
            let kind = scheme_core.group_kind(n);
            let art = artifact(
                if resample {
                    "experiment strong (resampled)"
                } else {
                    "experiment strong"
                },
                stat_name(&spec),
                &kind,
                &res,
                Vec::new(),
                echo,
            );
            emit(&art, &opts.output)
        }
        ExperimentCmd::Weak {
            opts,
            theta0,
            pair_on_covariate,
        } => {
            let names = expect_cols(&opts.cols, 3, "y,d,pair or y,d,z")?;
            let table = opts.table()?;
            let y = table.numeric(&names[0])?;
            let d = table.binary(&names[1])?;
            let pairs = if pair_on_covariate {
                let z = table.numeric(&names[2])?;
                pair_by_covariates(&z)?.labels
            } else {
                table.labels(&names[2])?
            };
            let sample = ExperimentSample::new(y, d, vec![])?.with_pairs(pairs.clone())?;
            let echo = serde_json::json!({
                "opts": &opts, "theta0": theta0, "pair_on_covariate": pair_on_covariate
            });
            let report = weak_null_test_pairs(&sample, theta0, opts.alpha, opts.mode()?)?;
            let kind = GroupKind::PairSwap { pairs };
            let mut art = artifact(
                "experiment weak",
                "studentized-pair".into(),
                &kind,
                &report.result,
                report.warnings.clone(),
                echo,
            );
            art.config_echo["variance_report"] = serde_json::to_value(report.variance)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            emit(&art, &opts.output)
        }
    }
}

fn parse_grid(arg: &str) -> Result<Grid<f64>, CliError> {
    let parts: Vec<&str> = arg.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::validation("--grid must be lo:hi:points"));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::validation(format!("bad grid lower bound {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::validation(format!("bad grid upper bound {:?}", parts[1])))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| CliError::validation(format!("bad grid point count {:?}", parts[2])))?;
    Ok(Grid::new(lo, hi, points)?)
}

fn load_pairs(path: &Path, cols: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let names = expect_cols(cols, 2, "x,y")?;
    let table = Table::load(path)?;
    let x = table.numeric(&names[0])?;
    let y = table.numeric(&names[1])?;
    Ok(x.into_iter().zip(y).collect())
}

#[derive(Serialize)]
struct ConformalArtifact<T: Serialize> {
    method: String,
    result: T,
    config_echo: serde_json::Value,
    version: String,
}

fn run_conformal(cmd: ConformalCmd) -> Result<(), CliError> {
    match cmd {
        ConformalCmd::Bound {
            input,
            cols,
            alpha,
            score,
            output,
        } => {
            let names = expect_cols(&cols, 1, "value column")?;
            let values = Table::load(&input)?.numeric(&names[0])?;
            let echo = serde_json::json!({
                "input": &input, "cols": cols, "alpha": alpha, "score": score
            });
            match score {
                BoundScore::Raw => {
                    let iv = upper_bound_exchangeable(&values, alpha)?;
                    emit(
                        &ConformalArtifact {
                            method: "conformal bound".into(),
                            result: iv,
                            config_echo: echo,
                            version: randinfer::VERSION.into(),
                        },
                        &output,
                    )
                }
                BoundScore::AbsMedian | BoundScore::AbsMean => {
                    let region = symmetric_interval_exchangeable(
                        &values,
                        alpha,
                        matches!(score, BoundScore::AbsMedian),
                        None,
                    )?;
                    emit(
                        &ConformalArtifact {
                            method: "conformal bound".into(),
                            result: region,
                            config_echo: echo,
                            version: randinfer::VERSION.into(),
                        },
                        &output,
                    )
                }
            }
        }
        ConformalCmd::Full {
            input,
            cols,
            x,
            alpha,
            grid,
            predictor,
            output,
        } => {
            let data = load_pairs(&input, &cols)?;
            let grid_parsed = match &grid {
                Some(s) => parse_grid(s)?,
                None => {
                    let ys: Vec<f64> = data.iter().map(|&(_, y)| y).collect();
                    Grid::default_for(&ys)?
                }
            };
            let echo = serde_json::json!({
                "input": &input, "cols": cols, "x": x, "alpha": alpha,
                "grid": grid, "predictor": predictor,
            });
            let region = full_conformal(
                &data,
                x,
                alpha,
                &grid_parsed,
                predictor.as_predictor().as_ref(),
            )?;
            emit(
                &ConformalArtifact {
                    method: "conformal full".into(),
                    result: region,
                    config_echo: echo,
                    version: randinfer::VERSION.into(),
                },
                &output,
            )
        }
        ConformalCmd::Split {
            train,
            calib,
            cols,
            x,
            alpha,
            predictor,
            output,
        } => {
            let train_pairs = load_pairs(&train, &cols)?;
            let calib_pairs = load_pairs(&calib, &cols)?;
            let echo = serde_json::json!({
                "train": &train, "calib": &calib, "cols": cols, "x": x,
                "alpha": alpha, "predictor": predictor,
            });
            let iv = split_conformal(
                &train_pairs,
                &calib_pairs,
                x,
                alpha,
                predictor.as_predictor().as_ref(),
            )?;
            emit(
                &ConformalArtifact {
                    method: "conformal split".into(),
                    result: iv,
                    config_echo: echo,
                    version: randinfer::VERSION.into(),
                },
                &output,
            )
        }
    }
}

fn run_cluster(cmd: ClusterCmd) -> Result<(), CliError> {
    let ClusterCmd::Art {
        opts,
        coef,
        theta0,
        stat,
        blocks,
        no_intercept,
        compare_ttest,
    } = cmd;
    let names = split_cols(&opts.cols);
    let min_cols = if blocks.is_some() { 1 } else { 2 };
    if names.len() < min_cols {
        return Err(CliError::validation(
            "--cols needs y[,x1,...],cluster; the cluster column is replaced by --blocks for \
             time-series blocking",
        ));
    }
    let table = opts.table()?;
    let y = table.numeric(&names[0])?;
    let n = y.len();

    let (regressor_names, cluster_labels) = match blocks {
        Some(q) => (&names[1..], contiguous_blocks(n, q)?),
        None => (
            &names[1..names.len() - 1],
            table.labels(names.last().unwrap())?,
        ),
    };
    let regressors: Vec<Vec<f64>> = regressor_names
        .iter()
        .map(|c| table.numeric(c))
        .collect::<Result<_, _>>()?;

    let q = cluster_labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut clusters: Vec<ClusterData<f64>> = (0..q)
        .map(|_| ClusterData {
            design: Vec::new(),
            outcomes: Vec::new(),
        })
        .collect();
    for i in 0..n {
        let mut row = Vec::with_capacity(regressors.len() + 1);
        if !no_intercept {
            row.push(1.0);
        }
        for r in &regressors {
            row.push(r[i]);
        }
        let c = cluster_labels[i];
        clusters[c].design.push(row);
        clusters[c].outcomes.push(y[i]);
    }

    let scores = cluster_scores_ols(&clusters, coef, theta0)?;
    let stat_core = match stat {
        ClusterStatArg::Tstat => ClusterStat::TStat,
        ClusterStatArg::Wald => ClusterStat::Wald,
    };
    let echo = serde_json::json!({
        "opts": &opts, "coef": coef, "theta0": theta0, "stat": stat,
        "blocks": blocks, "no_intercept": no_intercept,
    });
    let report = art_test(&scores, stat_core, opts.alpha, opts.mode()?)?;
    let kind = GroupKind::ClusterSignChange {
        q: scores.cluster_count(),
    };
    let mut art = artifact(
        "cluster art",
        match stat_core {
            ClusterStat::TStat => "cluster-t-stat".to_string(),
            ClusterStat::Wald => "cluster-wald".to_string(),
        },
        &kind,
        &report.result,
        report.warnings.clone(),
        echo,
    );
    if compare_ttest {
        let ttest = im_ttest(&scores, opts.alpha)?;
        art.warnings.extend(ttest.warnings.clone());
        art.config_echo["comparison_ttest"] =
            serde_json::to_value(&ttest).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    emit(&art, &opts.output)
}

fn emit_table(
    table: &simlab::LevelTable,
    format: TableFormat,
    output: &Option<PathBuf>,
) -> Result<(), CliError> {
    match format {
        TableFormat::Csv => write_out(table.to_csv().trim_end().to_string(), output),
        TableFormat::Json => emit(table, output),
    }
}

fn run_simlab(cmd: SimlabCmd) -> Result<(), CliError> {
    match cmd {
        SimlabCmd::Figure2 {
            n,
            reps,
            b,
            alpha,
            seed,
            format,
            output,
        } => {
            let table = simlab::figure2_study(n, reps, b, alpha, seed)?;
            emit_table(&table, format, &output)
        }
        SimlabCmd::Correlation {
            n,
            reps,
            b,
            alpha,
            seed,
            format,
            output,
        } => {
            let table = simlab::correlation_study(n, reps, b, alpha, seed)?;
            emit_table(&table, format, &output)
        }
        SimlabCmd::Weaknull {
            pairs,
            reps,
            b,
            alpha,
            seed,
            format,
            output,
        } => {
            let table = simlab::weak_null_study(pairs, reps, b, alpha, seed)?;
            emit_table(&table, format, &output)
        }
        SimlabCmd::Hothand {
            n,
            streak,
            q,
            b,
            reps,
            seed,
            output,
        } => {
            let study = simlab::run_hot_hand_study(n, streak, q, b, reps, seed)?;
            emit(&study, &output)
        }
        SimlabCmd::Cluster {
            sigmas,
            reps,
            alpha,
            seed,
            output,
        } => {
            let parsed: Result<Vec<f64>, _> =
                sigmas.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let parsed = parsed
                .map_err(|_| CliError::validation(format!("cannot parse --sigmas {sigmas:?}")))?;
            let study = simlab::cluster_study(&parsed, reps, alpha, seed)?;
            emit(&study, &output)
        }
    }
}
