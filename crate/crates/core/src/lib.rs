//! Tau-ratio fair clustering.
//!
//! Every cluster must receive at least a `tau_l` fraction of each protected
//! group `l`. [`frac_oe`] corrects a vanilla Lloyd solution once with a
//! round-robin fair assignment; [`frac`] applies the same assignment inside
//! every Lloyd iteration.
//!
//! ```
//! use fairclust::{check_tau_ratio, frac_oe, Dataset, FairnessSpec, LloydConfig, Norm};
//!
//! let rows = vec![vec![0.0, 0.0], vec![0.2, 0.1], vec![0.1, 0.3], vec![5.0, 5.0], vec![5.1, 4.9], vec![4.8, 5.2]];
//! let ds = Dataset::new(&rows, &["a", "a", "a", "b", "b", "b"])?;
//! let spec = FairnessSpec::uniform(2, &ds)?; // tau = 1/k for every group
//! let out = frac_oe(&ds, &spec, &LloydConfig::new(2, Norm::L2).with_seed(7))?;
//! assert!(out.corrected);
//! assert!(check_tau_ratio(&ds, &out.clustering.assignment, &spec).satisfied);
//! assert!((out.report.balance - 0.5).abs() < 1e-12);
//! # Ok::<(), fairclust::Error>(())
//! ```

pub mod data_io;
pub mod error;
pub mod experiment;
pub mod fair;
pub mod lloyd;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod table;

pub use data_io::{load_csv, read_dataset, Recipe, Scaling};
pub use error::{Error, Result};
pub use experiment::{
    prepare, run_experiment, Algorithm, ExperimentConfig, ExperimentKind, ExperimentResult,
};
pub use fair::{
    check_tau_ratio, correct_vanilla, fair_assignment, frac, frac_oe, round_robin_assign, FracOeOutcome,
    FracOutcome, RoundRobinOrder, TauCheck,
};
pub use lloyd::{assign_nearest, run_lloyd, update_centers, InitMethod, LloydConfig, LloydRun};
pub use metrics::{balance, balance_lower_bound, evaluate, fairness_error, mp_rd_check, objective_cost};
pub use model::{AssignmentInstance, Clustering, Dataset, FairnessSpec, MetricsReport, Norm, TauSpec};
pub use oracle::{brute_force_fair_assignment, ratio_experiment, worst_case_instance, RatioReport};
pub use table::{emit_results, OutputFormat, Table};
