//! Seeded multi-trial experiments over a dataset recipe.
//!
//! Configuration is TOML:
//!
//! ```toml
//! kind = "single"          # single | vary-k | vary-size | trace | order-invariance | ratio
//! recipe = "recipes/adult.toml"   # relative to this file; not needed for ratio
//! algorithm = "frac-oe"    # vanilla | frac | frac-oe | oracle
//! k = 10
//! p = 2                    # 1: k-median, 2: k-means
//! tau = "1/k"              # or a list such as [0.05, 0.02]
//! trials = 10
//! seed = 0
//! jobs = 0                 # worker threads; 0 uses every core
//! output = "results.csv"   # optional; relative to the working directory
//! format = "csv"           # csv | json | jsonl
//! ks = [2, 5, 10]          # vary-k
//! sizes = [1000, 2000]     # vary-size
//! permutations = 100       # order-invariance
//! min_group_size = 1       # ratio
//! max_group_size = 12      # ratio
//!
//! [lloyd]
//! max_iters = 100
//! rel_tol = 1e-4
//! init = "uniform"         # or "kmeans++"
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{de, Deserialize, Deserializer};

use crate::data_io::{load_recipe_data, subsample, Recipe};
use crate::error::{Error, Result};
use crate::fair::{correct_vanilla, frac, RoundRobinOrder};
use crate::lloyd::{run_lloyd, InitMethod, LloydConfig};
use crate::metrics::{evaluate, objective_cost};
use crate::model::{AssignmentInstance, Clustering, Dataset, FairnessSpec, MetricsReport, Norm, TauSpec};
use crate::oracle::{brute_force_fair_assignment, ratio, ratio_experiment, MAX_GROUP_SIZE, MAX_K};
use crate::table::{Cell, OutputFormat, Table};

/// Seed for trial `index` of a run with master seed `master`. Each trial
/// seed depends only on its own index.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index.wrapping_add(2));
    rng.next_u64()
}

macro_rules! kebab_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($name), " `{}`"),
                        other
                    ))),
                }
            }
        }
    };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Single,
    VaryK,
    VarySize,
    Trace,
    OrderInvariance,
    Ratio,
}

kebab_enum!(ExperimentKind {
    Single => "single",
    VaryK => "vary-k",
    VarySize => "vary-size",
    Trace => "trace",
    OrderInvariance => "order-invariance",
    Ratio => "ratio",
});

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Vanilla,
    Frac,
    #[default]
    FracOe,
    /// Exact fair assignment to the vanilla centers; tiny datasets only.
    Oracle,
}

kebab_enum!(Algorithm {
    Vanilla => "vanilla",
    Frac => "frac",
    FracOe => "frac-oe",
    Oracle => "oracle",
});

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LloydSettings {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub init: InitMethod,
}

impl Default for LloydSettings {
    fn default() -> Self {
        Self {
            max_iters: LloydConfig::DEFAULT_MAX_ITERS,
            rel_tol: LloydConfig::DEFAULT_REL_TOL,
            init: InitMethod::UniformSample,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: ExperimentKind,
    #[serde(default)]
    pub recipe: Option<PathBuf>,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_norm")]
    pub p: Norm,
    #[serde(default = "default_tau", deserialize_with = "deserialize_tau")]
    pub tau: TauSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub jobs: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub lloyd: LloydSettings,
    #[serde(default)]
    pub ks: Vec<usize>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_min_group")]
    pub min_group_size: usize,
    #[serde(default = "default_max_group")]
    pub max_group_size: usize,
}

fn default_k() -> usize {
    10
}
fn default_norm() -> Norm {
    Norm::L2
}
fn default_tau() -> TauSpec {
    TauSpec::Uniform
}
fn default_trials() -> usize {
    10
}
fn default_permutations() -> usize {
    100
}
fn default_min_group() -> usize {
    1
}
fn default_max_group() -> usize {
    MAX_GROUP_SIZE
}

fn deserialize_tau<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<TauSpec, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        List(Vec<f64>),
    }
    match Raw::deserialize(d)? {
        Raw::Text(s) => TauSpec::parse(&s).map_err(de::Error::custom),
        Raw::List(v) => Ok(TauSpec::Explicit(v)),
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Single,
            recipe: None,
            algorithm: Algorithm::FracOe,
            k: default_k(),
            p: default_norm(),
            tau: default_tau(),
            trials: default_trials(),
            seed: 0,
            jobs: 0,
            output: None,
            format: OutputFormat::Csv,
            lloyd: LloydSettings::default(),
            ks: Vec::new(),
            sizes: Vec::new(),
            permutations: default_permutations(),
            min_group_size: default_min_group(),
            max_group_size: default_max_group(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })
    }

    /// Reads a config file; a relative `recipe` path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let (Some(recipe), Some(dir)) = (&config.recipe, path.parent()) {
            if recipe.is_relative() {
                config.recipe = Some(dir.join(recipe));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::ZeroClusters);
        }
        self.lloyd_config(self.k, 0).validate()?;
        match self.kind {
            ExperimentKind::VaryK if self.ks.is_empty() => {
                return Err(Error::Config("vary-k needs a nonempty `ks` list".into()))
            }
            ExperimentKind::VaryK if self.ks.contains(&0) => return Err(Error::ZeroClusters),
            ExperimentKind::VarySize if self.sizes.is_empty() => {
                return Err(Error::Config("vary-size needs a nonempty `sizes` list".into()))
            }
            ExperimentKind::OrderInvariance if self.permutations == 0 => {
                return Err(Error::Config("permutations must be at least 1".into()))
            }
            ExperimentKind::Ratio => {
                if self.k > MAX_K || self.max_group_size > MAX_GROUP_SIZE {
                    return Err(Error::TooLarge(format!(
                        "ratio experiments need k <= {MAX_K} and max_group_size <= {MAX_GROUP_SIZE}"
                    )));
                }
                if self.min_group_size == 0 || self.min_group_size > self.max_group_size {
                    return Err(Error::Config(format!(
                        "bad group size range [{}, {}]",
                        self.min_group_size, self.max_group_size
                    )));
                }
            }
            _ => {}
        }
        if self.kind != ExperimentKind::Ratio && self.recipe.is_none() {
            return Err(Error::Config(format!("kind `{}` needs a recipe", self.kind)));
        }
        Ok(())
    }

    pub fn lloyd_config(&self, k: usize, seed: u64) -> LloydConfig {
        LloydConfig::new(k, self.p)
            .with_seed(seed)
            .with_init(self.lloyd.init)
            .with_max_iters(self.lloyd.max_iters)
            .with_rel_tol(self.lloyd.rel_tol)
    }
}

#[derive(Clone, Debug)]
struct Setting {
    dataset: Dataset,
    spec: FairnessSpec,
}

impl Setting {
    fn k(&self) -> usize {
        self.spec.k()
    }
}

/// A validated configuration with its data loaded and every fairness spec
/// resolved. Errors past this point come from running, not from the inputs.
#[derive(Clone, Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    dataset_name: String,
    settings: Vec<Setting>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    /// One row per trial (or per trace step, permutation, ratio instance).
    pub trials: Table,
    /// Aggregated rows with mean and standard deviation per metric.
    pub summary: Table,
}

pub fn prepare(config: ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    if config.kind == ExperimentKind::Ratio {
        return Ok(Experiment {
            config,
            dataset_name: "random".into(),
            settings: Vec::new(),
        });
    }
    let recipe_path = config.recipe.as_deref().expect("validated");
    let recipe = Recipe::load(recipe_path)?;
    let base = load_recipe_data(&recipe)?;
    let mut planned: Vec<(Dataset, usize)> = Vec::new();
    match config.kind {
        ExperimentKind::VaryK => planned.extend(config.ks.iter().map(|&k| (base.clone(), k))),
        ExperimentKind::VarySize => {
            for &size in &config.sizes {
                if size == 0 || size > base.n() {
                    return Err(Error::Config(format!(
                        "size {size} outside 1..={} for dataset `{}`",
                        base.n(),
                        recipe.name
                    )));
                }
                planned.push((subsample(&base, size, config.seed)?, config.k));
            }
        }
        _ => planned.push((base, config.k)),
    }
    let settings = planned
        .into_iter()
        .map(|(dataset, k)| {
            if dataset.n() < k {
                return Err(Error::TooFewPoints { n: dataset.n(), k });
            }
            let spec = config.tau.resolve(k, &dataset)?;
            Ok(Setting { dataset, spec })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Experiment {
        config,
        dataset_name: recipe.name,
        settings,
    })
}

/// Loads, validates and runs `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    prepare(config.clone())?.run()
}

impl Experiment {
    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn run(&self) -> Result<ExperimentResult> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", self.config.jobs)))?;
        pool.install(|| match self.config.kind {
            ExperimentKind::Single | ExperimentKind::VaryK | ExperimentKind::VarySize => self.run_trials(),
            ExperimentKind::Trace => self.run_trace(),
            ExperimentKind::OrderInvariance => self.run_order_invariance(),
            ExperimentKind::Ratio => self.run_ratio(),
        })
    }

    fn key_cells(&self, setting: &Setting, algorithm: &str) -> Vec<Cell> {
        vec![
            self.config.kind.as_str().into(),
            algorithm.into(),
            self.dataset_name.as_str().into(),
            setting.k().into(),
            (self.config.p.p() as usize).into(),
            setting.dataset.n().into(),
            self.config.tau.to_string().into(),
        ]
    }

    fn run_trials(&self) -> Result<ExperimentResult> {
        let jobs: Vec<(usize, usize)> = (0..self.settings.len())
            .flat_map(|s| (0..self.config.trials).map(move |t| (s, t)))
            .collect();
        let records = jobs
            .par_iter()
            .map(|&(s, t)| {
                let seed = trial_seed(self.config.seed, t as u64);
                self.trial(&self.settings[s], seed)
            })
            .collect::<Result<Vec<_>>>()?;

        let mut trials = Table::new(
            KEY_COLUMNS
                .iter()
                .chain(&["trial", "seed"])
                .chain(&TRIAL_METRICS)
                .chain(&TIMING),
        );
        for (&(s, t), rec) in jobs.iter().zip(&records) {
            let mut row = self.key_cells(&self.settings[s], self.config.algorithm.as_str());
            row.push(t.into());
            row.push(trial_seed(self.config.seed, t as u64).into());
            row.extend(rec.metric_cells());
            row.push(rec.runtime_s.into());
            row.push(rec.overhead_s.into());
            trials.push(row)?;
        }

        let mut columns: Vec<String> = KEY_COLUMNS.iter().map(|c| c.to_string()).collect();
        columns.push("trials".into());
        for m in SUMMARY_METRICS.iter().chain(&TIMING) {
            columns.push(format!("{m}_mean"));
            columns.push(format!("{m}_std"));
        }
        let mut summary = Table::new(columns);
        for (s, setting) in self.settings.iter().enumerate() {
            let mut row = self.key_cells(setting, self.config.algorithm.as_str());
            row.push(self.config.trials.into());
            for m in SUMMARY_METRICS.iter().chain(&TIMING) {
                let values: Vec<f64> = jobs
                    .iter()
                    .zip(&records)
                    .filter(|((js, _), _)| *js == s)
                    .map(|(_, r)| r.value(m))
                    .collect();
                let (mean, std) = mean_std(&values);
                row.push(mean.into());
                row.push(std.into());
            }
            summary.push(row)?;
        }
        Ok(ExperimentResult { trials, summary })
    }

    fn trial(&self, setting: &Setting, seed: u64) -> Result<TrialRecord> {
        let (ds, spec) = (&setting.dataset, &setting.spec);
        let norm = self.config.p;
        let cfg = self.config.lloyd_config(setting.k(), seed);
        let start = Instant::now();
        let vanilla = run_lloyd(ds, &cfg)?;
        let vanilla_s = start.elapsed().as_secs_f64();
        let (van_lp, van_raw) = objective_cost(ds, &vanilla.clustering, norm);
        let (report, iterations, converged, corrected, runtime_s, overhead_s) = match self.config.algorithm {
            Algorithm::Vanilla => {
                let report = evaluate(ds, &vanilla.clustering, spec, norm)?;
                (
                    report,
                    vanilla.iterations,
                    vanilla.converged,
                    false,
                    vanilla_s,
                    0.0,
                )
            }
            Algorithm::FracOe => {
                let order = RoundRobinOrder::from_seed(setting.k(), seed);
                let (iterations, converged) = (vanilla.iterations, vanilla.converged);
                let t = Instant::now();
                let out = correct_vanilla(ds, spec, norm, vanilla, &order)?;
                let overhead = t.elapsed().as_secs_f64();
                (
                    out.report,
                    iterations,
                    converged,
                    out.corrected,
                    vanilla_s + overhead,
                    overhead,
                )
            }
            Algorithm::Frac => {
                let t = Instant::now();
                let out = frac(ds, spec, &cfg)?;
                let runtime = t.elapsed().as_secs_f64();
                (
                    out.report,
                    out.run.iterations,
                    out.run.converged,
                    true,
                    runtime,
                    runtime - vanilla_s,
                )
            }
            Algorithm::Oracle => {
                let (iterations, converged) = (vanilla.iterations, vanilla.converged);
                let t = Instant::now();
                let instance =
                    AssignmentInstance::new(ds.clone(), vanilla.clustering.centers, spec.clone(), norm)?;
                let solution = brute_force_fair_assignment(&instance)?;
                let clustering = Clustering {
                    centers: instance.centers,
                    assignment: solution.clustering.assignment,
                };
                let report = evaluate(ds, &clustering, spec, norm)?;
                let overhead = t.elapsed().as_secs_f64();
                (
                    report,
                    iterations,
                    converged,
                    true,
                    vanilla_s + overhead,
                    overhead,
                )
            }
        };
        Ok(TrialRecord {
            scaled_cost: ratio(report.raw_cost_sum, van_raw),
            scaled_objective_cost: ratio(report.objective_cost, van_lp),
            report,
            iterations,
            converged,
            corrected,
            runtime_s,
            overhead_s,
        })
    }

    fn run_trace(&self) -> Result<ExperimentResult> {
        let setting = &self.settings[0];
        let (ds, spec, norm) = (&setting.dataset, &setting.spec, self.config.p);
        let traces = (0..self.config.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(self.config.seed, t as u64);
                let cfg = self.config.lloyd_config(setting.k(), seed);
                let vanilla = run_lloyd(ds, &cfg)?;
                let order = RoundRobinOrder::from_seed(setting.k(), seed);
                let oe = correct_vanilla(ds, spec, norm, vanilla.clone(), &order)?;
                let fr = frac(ds, spec, &cfg)?;
                Ok([
                    (Algorithm::Vanilla, vanilla.trace),
                    (Algorithm::FracOe, oe.trace),
                    (Algorithm::Frac, fr.run.trace),
                ])
            })
            .collect::<Result<Vec<_>>>()?;

        let mut trials = Table::new(KEY_COLUMNS.iter().chain(&["trial", "seed", "iteration", "cost"]));
        for (t, per_alg) in traces.iter().enumerate() {
            for (alg, trace) in per_alg {
                for (i, &cost) in trace.iter().enumerate() {
                    let mut row = self.key_cells(setting, alg.as_str());
                    row.extend([
                        t.into(),
                        trial_seed(self.config.seed, t as u64).into(),
                        (i + 1).into(),
                        cost.into(),
                    ]);
                    trials.push(row)?;
                }
            }
        }

        let mut summary =
            Table::new(
                KEY_COLUMNS
                    .iter()
                    .chain(&["iteration", "trials", "cost_mean", "cost_std"]),
            );
        for (a, alg) in [Algorithm::Vanilla, Algorithm::FracOe, Algorithm::Frac]
            .iter()
            .enumerate()
        {
            let longest = traces.iter().map(|tr| tr[a].1.len()).max().unwrap_or(0);
            for i in 0..longest {
                let values: Vec<f64> = traces.iter().filter_map(|tr| tr[a].1.get(i).copied()).collect();
                let (mean, std) = mean_std(&values);
                let mut row = self.key_cells(setting, alg.as_str());
                row.extend([(i + 1).into(), values.len().into(), mean.into(), std.into()]);
                summary.push(row)?;
            }
        }
        Ok(ExperimentResult { trials, summary })
    }

    fn run_order_invariance(&self) -> Result<ExperimentResult> {
        let setting = &self.settings[0];
        let (ds, spec, norm) = (&setting.dataset, &setting.spec, self.config.p);
        let base_seed = trial_seed(self.config.seed, 0);
        let vanilla = run_lloyd(ds, &self.config.lloyd_config(setting.k(), base_seed))?;
        let runs = (0..self.config.permutations)
            .into_par_iter()
            .map(|i| {
                let order = RoundRobinOrder::from_seed(setting.k(), trial_seed(base_seed, i as u64));
                let start = Instant::now();
                let out = correct_vanilla(ds, spec, norm, vanilla.clone(), &order)?;
                Ok((order, out.corrected, out.report, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>>>()?;

        let alg = Algorithm::FracOe.as_str();
        let mut trials = Table::new(KEY_COLUMNS.iter().chain(&[
            "permutation",
            "order",
            "corrected",
            "objective_cost",
            "raw_cost_sum",
            "tau_satisfied",
            "runtime_s",
        ]));
        for (i, (order, corrected, report, secs)) in runs.iter().enumerate() {
            let order_text: Vec<String> = order.permutation().iter().map(ToString::to_string).collect();
            let mut row = self.key_cells(setting, alg);
            row.extend([
                i.into(),
                order_text.join("-").into(),
                (*corrected).into(),
                report.objective_cost.into(),
                report.raw_cost_sum.into(),
                report.tau_satisfied.into(),
                (*secs).into(),
            ]);
            trials.push(row)?;
        }

        let mut summary = Table::new(KEY_COLUMNS.iter().chain(&[
            "permutations",
            "raw_cost_sum_mean",
            "raw_cost_sum_std",
            "raw_cost_sum_rel_std",
            "objective_cost_mean",
            "objective_cost_std",
            "objective_cost_rel_std",
            "runtime_s_mean",
            "runtime_s_std",
        ]));
        let mut row = self.key_cells(setting, alg);
        row.push(runs.len().into());
        for values in [
            runs.iter().map(|r| r.2.raw_cost_sum).collect::<Vec<_>>(),
            runs.iter().map(|r| r.2.objective_cost).collect(),
        ] {
            let (mean, std) = mean_std(&values);
            row.extend([mean.into(), std.into(), (std / mean).into()]);
        }
        let (mean, std) = mean_std(&runs.iter().map(|r| r.3).collect::<Vec<_>>());
        row.extend([mean.into(), std.into()]);
        summary.push(row)?;
        Ok(ExperimentResult { trials, summary })
    }

    fn run_ratio(&self) -> Result<ExperimentResult> {
        let c = &self.config;
        let exp = ratio_experiment(c.trials, c.k, (c.min_group_size, c.max_group_size), c.seed)?;
        let mut trials = Table::new([
            "trial",
            "seed",
            "k",
            "n",
            "alg_cost",
            "opt_cost",
            "beta",
            "ratio",
            "bound_satisfied",
        ]);
        for r in &exp.reports {
            trials.push(vec![
                r.trial.into(),
                r.seed.into(),
                r.k.into(),
                r.n.into(),
                r.alg_cost.into(),
                r.opt_cost.into(),
                r.beta.into(),
                r.ratio.into(),
                r.bound_satisfied.into(),
            ])?;
        }
        let mut summary = Table::new([
            "kind",
            "k",
            "trials",
            "violations",
            "max_ratio",
            "oracle_inversions",
        ]);
        summary.push(vec![
            c.kind.as_str().into(),
            c.k.into(),
            exp.summary.trials.into(),
            exp.summary.violations.into(),
            exp.summary.max_ratio.into(),
            exp.summary.oracle_inversions.into(),
        ])?;
        Ok(ExperimentResult { trials, summary })
    }
}

const KEY_COLUMNS: [&str; 7] = ["kind", "algorithm", "dataset", "k", "p", "n", "tau"];

const TRIAL_METRICS: [&str; 13] = [
    "objective_cost",
    "raw_cost_sum",
    "scaled_cost",
    "scaled_objective_cost",
    "balance",
    "balance_degenerate",
    "fairness_error",
    "tau_satisfied",
    "mp_satisfied",
    "rd_satisfied",
    "iterations",
    "converged",
    "corrected",
];

const SUMMARY_METRICS: [&str; 11] = [
    "objective_cost",
    "raw_cost_sum",
    "scaled_cost",
    "scaled_objective_cost",
    "balance",
    "fairness_error",
    "tau_satisfied",
    "mp_satisfied",
    "rd_satisfied",
    "iterations",
    "converged",
];

const TIMING: [&str; 2] = ["runtime_s", "overhead_s"];

#[derive(Clone, Debug)]
struct TrialRecord {
    report: MetricsReport,
    scaled_cost: f64,
    scaled_objective_cost: f64,
    iterations: usize,
    converged: bool,
    corrected: bool,
    runtime_s: f64,
    overhead_s: f64,
}

impl TrialRecord {
    fn metric_cells(&self) -> Vec<Cell> {
        let r = &self.report;
        vec![
            r.objective_cost.into(),
            r.raw_cost_sum.into(),
            self.scaled_cost.into(),
            self.scaled_objective_cost.into(),
            r.balance.into(),
            r.balance_degenerate.into(),
            r.fairness_error.into(),
            r.tau_satisfied.into(),
            r.mp_satisfied.into(),
            r.rd_satisfied.into(),
            self.iterations.into(),
            self.converged.into(),
            self.corrected.into(),
        ]
    }

    fn value(&self, metric: &str) -> f64 {
        let r = &self.report;
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        match metric {
            "objective_cost" => r.objective_cost,
            "raw_cost_sum" => r.raw_cost_sum,
            "scaled_cost" => self.scaled_cost,
            "scaled_objective_cost" => self.scaled_objective_cost,
            "balance" => r.balance,
            "fairness_error" => r.fairness_error,
            "tau_satisfied" => b(r.tau_satisfied),
            "mp_satisfied" => b(r.mp_satisfied),
            "rd_satisfied" => b(r.rd_satisfied),
            "iterations" => self.iterations as f64,
            "converged" => b(self.converged),
            "runtime_s" => self.runtime_s,
            "overhead_s" => self.overhead_s,
            other => unreachable!("unknown metric {other}"),
        }
    }
}

/// Mean and sample standard deviation, summed in the given order. A single
/// value has standard deviation 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
