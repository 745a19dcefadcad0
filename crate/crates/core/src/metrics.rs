//! Evaluation quantities: objective cost, Balance, fairness error, minority
//! protection / restricted dominance, and the Balance lower bound implied by
//! a tau-ratio guarantee.

use crate::data_io::counts_balance;
use crate::error::{Error, Result};
use crate::fair::check_tau_ratio;
use crate::model::{composition, Clustering, Dataset, FairnessSpec, MetricsReport, Norm};

/// Floor applied to achieved proportions inside the logarithm of the
/// fairness error.
pub const FAIRNESS_EPS: f64 = 1e-12;

/// Relative slack on the share comparisons of [`mp_rd_check`].
const SHARE_SLACK: f64 = 1e-9;

/// Default `delta` for the representation bounds in [`evaluate`].
pub const DEFAULT_DELTA: f64 = 0.2;

/// `sum_i d(x_i, c_{a(i)})^p`, summed in point order.
pub fn raw_cost(dataset: &Dataset, centers: &[Vec<f64>], assignment: &[usize], norm: Norm) -> f64 {
    dataset
        .points()
        .zip(assignment)
        .map(|(x, &j)| norm.cost(x, &centers[j]))
        .sum()
}

/// `(L_p, raw_sum)` where `L_p = raw_sum^(1/p)`.
pub fn objective_cost(dataset: &Dataset, clustering: &Clustering, norm: Norm) -> (f64, f64) {
    let raw = raw_cost(dataset, &clustering.centers, &clustering.assignment, norm);
    (norm.root(raw), raw)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Balance {
    pub value: f64,
    /// Some nonempty cluster has no member of some group.
    pub degenerate: bool,
}

/// Minimum over clusters and ordered group pairs of the within-cluster count
/// ratio. Empty clusters are skipped; a nonempty cluster missing a group
/// forces the result to 0.
pub fn balance(dataset: &Dataset, clustering: &Clustering) -> Result<Balance> {
    if dataset.m() < 2 {
        return Err(Error::SingleGroup);
    }
    let counts = clustering.composition(dataset);
    let mut value = f64::INFINITY;
    let mut degenerate = false;
    for row in counts.iter().filter(|r| r.iter().any(|&c| c > 0)) {
        if row.contains(&0) {
            degenerate = true;
        }
        value = value.min(counts_balance(row));
    }
    Ok(Balance {
        value: if value.is_finite() { value } else { 0.0 },
        degenerate,
    })
}

/// `min_j count_j(a) / count_j(b)` over clusters holding at least one
/// group-`b` point.
pub fn pair_balance(dataset: &Dataset, clustering: &Clustering, a: usize, b: usize) -> f64 {
    clustering
        .composition(dataset)
        .iter()
        .filter(|row| row[b] > 0)
        .map(|row| row[a] as f64 / row[b] as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Per-cluster group fractions `q_l = count_j(l) / n_l` compared against the
/// target `tau`:
/// `sum_j sum_l -tau_l * ln(q_l / tau_l)`, with `q` floored at
/// [`FAIRNESS_EPS`] and `tau_l = 0` terms omitted.
pub fn fairness_error(dataset: &Dataset, clustering: &Clustering, target_tau: &[f64]) -> Result<f64> {
    if target_tau.len() != dataset.m() {
        return Err(Error::LengthMismatch {
            expected: dataset.m(),
            found: target_tau.len(),
        });
    }
    let n = dataset.group_counts();
    let mut total = 0.0;
    for row in clustering.composition(dataset) {
        for (g, &tau) in target_tau.iter().enumerate() {
            if tau > 0.0 {
                let q = (row[g] as f64 / n[g] as f64).max(FAIRNESS_EPS);
                total -= tau * (q / tau).ln();
            }
        }
    }
    Ok(total)
}

/// Per-cluster share bounds for minority protection (lower) and restricted
/// dominance (upper).
#[derive(Clone, Debug, PartialEq)]
pub struct RepresentationBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl RepresentationBounds {
    /// `r_l (1 - delta)` and `r_l / (1 - delta)` around the dataset shares
    /// `r_l = n_l / n`; the upper bound is capped at 1.
    pub fn from_delta(dataset: &Dataset, delta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Config(format!("delta must lie in [0, 1), got {delta}")));
        }
        let n = dataset.n() as f64;
        let shares: Vec<f64> = dataset.group_counts().iter().map(|&c| c as f64 / n).collect();
        Ok(Self {
            lower: shares.iter().map(|r| r * (1.0 - delta)).collect(),
            upper: shares.iter().map(|r| (r / (1.0 - delta)).min(1.0)).collect(),
        })
    }
}

/// `(MP, RD)`: whether every cluster holds at least `tau_mp[l]` and at most
/// `tau_rd[l]` of its size from each group `l`.
pub fn mp_rd_check(
    dataset: &Dataset,
    clustering: &Clustering,
    tau_mp: &[f64],
    tau_rd: &[f64],
) -> Result<(bool, bool)> {
    for v in [tau_mp, tau_rd] {
        if v.len() != dataset.m() {
            return Err(Error::LengthMismatch {
                expected: dataset.m(),
                found: v.len(),
            });
        }
    }
    let mut mp = true;
    let mut rd = true;
    for row in clustering.composition(dataset) {
        let size = row.iter().sum::<usize>() as f64;
        let slack = SHARE_SLACK * size;
        for (g, &c) in row.iter().enumerate() {
            let c = c as f64;
            mp &= c >= tau_mp[g] * size - slack;
            rd &= c <= tau_rd[g] * size + slack;
        }
    }
    Ok((mp, rd))
}

/// Lower bound on the `(a, b)` Balance of any tau-ratio fair assignment:
/// `tau_a n_a / (n_b (1 - k tau_b + tau_b))`, evaluated with the enforced
/// integer quotas in place of `tau_l n_l`.
pub fn balance_lower_bound(spec: &FairnessSpec, dataset: &Dataset, a: usize, b: usize) -> Result<f64> {
    if dataset.m() < 2 {
        return Err(Error::SingleGroup);
    }
    let k = spec.k();
    let (qa, qb) = (spec.quota(a) as f64, spec.quota(b) as f64);
    let nb = dataset.group_count(b) as f64;
    Ok(qa / (nb - (k as f64 - 1.0) * qb))
}

/// Full metric set for one clustering against `spec`, with MP/RD evaluated at
/// `delta` around the dataset shares.
pub fn evaluate_with_delta(
    dataset: &Dataset,
    clustering: &Clustering,
    spec: &FairnessSpec,
    norm: Norm,
    delta: f64,
) -> Result<MetricsReport> {
    clustering.check_shape(dataset)?;
    let (objective_cost, raw_cost_sum) = objective_cost(dataset, clustering, norm);
    let (balance, balance_degenerate) = if dataset.m() >= 2 {
        let b = balance(dataset, clustering)?;
        (b.value, b.degenerate)
    } else {
        (1.0, false)
    };
    let bounds = RepresentationBounds::from_delta(dataset, delta)?;
    let (mp_satisfied, rd_satisfied) = mp_rd_check(dataset, clustering, &bounds.lower, &bounds.upper)?;
    Ok(MetricsReport {
        objective_cost,
        raw_cost_sum,
        balance,
        balance_degenerate,
        fairness_error: fairness_error(dataset, clustering, spec.tau())?,
        tau_satisfied: check_tau_ratio(dataset, &clustering.assignment, spec).satisfied,
        mp_satisfied,
        rd_satisfied,
    })
}

pub fn evaluate(
    dataset: &Dataset,
    clustering: &Clustering,
    spec: &FairnessSpec,
    norm: Norm,
) -> Result<MetricsReport> {
    evaluate_with_delta(dataset, clustering, spec, norm, DEFAULT_DELTA)
}

/// Smallest per-cluster fraction of each group, `min_j count_j(l) / n_l`:
/// the largest `tau` the assignment satisfies.
pub fn achieved_tau(dataset: &Dataset, assignment: &[usize], k: usize) -> Vec<f64> {
    let counts = composition(dataset, assignment, k);
    (0..dataset.m())
        .map(|g| {
            let n = dataset.group_count(g) as f64;
            counts
                .iter()
                .map(|row| row[g] as f64 / n)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
