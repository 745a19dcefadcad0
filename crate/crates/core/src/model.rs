//! Domain types shared by every algorithm: datasets with one protected
//! attribute, fairness targets, clusterings and fixed-center assignment
//! instances.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when comparing a user supplied `tau` against `1/k`, so that
/// decimal inputs such as `0.1` for `k = 10` are accepted.
const TAU_RANGE_SLACK: f64 = 1e-12;

/// Added before flooring `tau * n` so that `tau = 1/k` with `k | n` yields
/// exactly `n / k` despite rounding in the product.
const QUOTA_ROUNDING_SLACK: f64 = 1e-9;

/// Points in `R^d` with one protected-group label per point.
///
/// Labels are re-indexed densely to `0..m` in ascending order of the original
/// labels; the original spelling is kept for reporting.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    coords: Vec<f64>,
    dim: usize,
    groups: Vec<usize>,
    labels: Vec<String>,
    members: Vec<Vec<usize>>,
}

/// Builds a [`Dataset`] from raw rows and arbitrary group labels.
pub fn validate_dataset<L>(raw_points: &[Vec<f64>], raw_groups: &[L]) -> Result<Dataset>
where
    L: Ord + Clone + ToString,
{
    Dataset::new(raw_points, raw_groups)
}

impl Dataset {
    pub fn new<L>(raw_points: &[Vec<f64>], raw_groups: &[L]) -> Result<Self>
    where
        L: Ord + Clone + ToString,
    {
        if raw_points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if raw_points.len() != raw_groups.len() {
            return Err(Error::LabelCountMismatch {
                points: raw_points.len(),
                labels: raw_groups.len(),
            });
        }
        let dim = raw_points[0].len();
        if dim == 0 {
            return Err(Error::ZeroDimensions);
        }
        let mut coords = Vec::with_capacity(raw_points.len() * dim);
        for (index, p) in raw_points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::RaggedDimensions {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            coords.extend_from_slice(p);
        }

        let mut dense: BTreeMap<L, usize> = raw_groups.iter().map(|l| (l.clone(), 0)).collect();
        let mut labels = Vec::with_capacity(dense.len());
        for (i, (label, slot)) in dense.iter_mut().enumerate() {
            *slot = i;
            labels.push(label.to_string());
        }
        let groups: Vec<usize> = raw_groups.iter().map(|l| dense[l]).collect();
        Ok(Self::from_dense(coords, dim, groups, labels))
    }

    fn from_dense(coords: Vec<f64>, dim: usize, groups: Vec<usize>, labels: Vec<String>) -> Self {
        let mut members = vec![Vec::new(); labels.len()];
        for (i, &g) in groups.iter().enumerate() {
            members[g].push(i);
        }
        Self {
            coords,
            dim,
            groups,
            labels,
            members,
        }
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.groups.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct groups.
    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn group(&self, i: usize) -> usize {
        self.groups[i]
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    /// Indices of the points in group `g`, ascending.
    pub fn members(&self, g: usize) -> &[usize] {
        &self.members[g]
    }

    pub fn group_count(&self, g: usize) -> usize {
        self.members[g].len()
    }

    pub fn group_counts(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Original label of dense group `g`.
    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Re-runs validation on this dataset's own contents.
    pub fn revalidate(&self) -> Result<Self> {
        let mut ds = Self::new(&self.to_rows(), &self.groups)?;
        ds.labels = self.labels.clone();
        Ok(ds)
    }

    /// Restriction to `indices` (kept in the given order). Groups that lose
    /// every member are dropped and the rest re-indexed densely.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let rows: Vec<Vec<f64>> = indices.iter().map(|&i| self.point(i).to_vec()).collect();
        let groups: Vec<usize> = indices.iter().map(|&i| self.groups[i]).collect();
        let mut ds = Self::new(&rows, &groups)?;
        let mut kept: Vec<usize> = groups.clone();
        kept.sort_unstable();
        kept.dedup();
        ds.labels = kept.iter().map(|&g| self.labels[g].clone()).collect();
        Ok(ds)
    }

    /// Applies `f` to every coordinate column in place.
    pub(crate) fn map_columns(&mut self, mut f: impl FnMut(usize, &mut [f64])) {
        let mut column = vec![0.0; self.n()];
        for c in 0..self.dim {
            for (i, v) in column.iter_mut().enumerate() {
                *v = self.coords[i * self.dim + c];
            }
            f(c, &mut column);
            for (i, v) in column.iter().enumerate() {
                self.coords[i * self.dim + c] = *v;
            }
        }
    }

    /// Largest Euclidean distance between any two points.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                best = best.max(distance(self.point(i), self.point(j)));
            }
        }
        best
    }
}

/// Objective norm `p` of the clustering cost: 1 for k-median, 2 for k-means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn p(self) -> u32 {
        match self {
            Norm::L1 => 1,
            Norm::L2 => 2,
        }
    }

    /// `d^p` for a Euclidean distance `d`.
    pub fn pow(self, d: f64) -> f64 {
        match self {
            Norm::L1 => d,
            Norm::L2 => d * d,
        }
    }

    /// `d(a, b)^p`, computed without an intermediate square root for `p = 2`.
    pub fn cost(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::L1 => distance(a, b),
            Norm::L2 => squared_distance(a, b),
        }
    }

    /// Inverse of [`Norm::pow`] applied to a summed cost.
    pub fn root(self, raw: f64) -> f64 {
        match self {
            Norm::L1 => raw,
            Norm::L2 => raw.sqrt(),
        }
    }
}

impl TryFrom<u32> for Norm {
    type Error = String;

    fn try_from(p: u32) -> std::result::Result<Self, String> {
        match p {
            1 => Ok(Norm::L1),
            2 => Ok(Norm::L2),
            other => Err(format!("p must be 1 or 2, got {other}")),
        }
    }
}

impl From<Norm> for u32 {
    fn from(n: Norm) -> u32 {
        n.p()
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p())
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Per-group fractions `tau` and the integer per-cluster quotas
/// `floor(tau_l * n_l)` they induce on a particular dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct FairnessSpec {
    tau: Vec<f64>,
    k: usize,
    quotas: Vec<usize>,
}

/// Checks `tau` against `0 <= tau_l <= 1/k` and fixes the integer quotas.
pub fn validate_spec(tau: &[f64], k: usize, dataset: &Dataset) -> Result<FairnessSpec> {
    FairnessSpec::new(tau, k, dataset)
}

impl FairnessSpec {
    pub fn new(tau: &[f64], k: usize, dataset: &Dataset) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroClusters);
        }
        if tau.len() != dataset.m() {
            return Err(Error::LengthMismatch {
                expected: dataset.m(),
                found: tau.len(),
            });
        }
        let max = 1.0 / k as f64;
        let mut quotas = Vec::with_capacity(tau.len());
        for (group, &t) in tau.iter().enumerate() {
            if !(0.0..=max + TAU_RANGE_SLACK).contains(&t) {
                return Err(Error::TauOutOfRange { group, value: t, max });
            }
            let n = dataset.group_count(group);
            let quota = ((t * n as f64 + QUOTA_ROUNDING_SLACK).floor() as usize).min(n / k);
            if quota * k > n {
                return Err(Error::InfeasibleQuota {
                    group,
                    quota,
                    k,
                    available: n,
                });
            }
            quotas.push(quota);
        }
        Ok(Self {
            tau: tau.to_vec(),
            k,
            quotas,
        })
    }

    /// `tau_l = 1/k` for every group.
    pub fn uniform(k: usize, dataset: &Dataset) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroClusters);
        }
        Self::new(&vec![1.0 / k as f64; dataset.m()], k, dataset)
    }

    /// `tau_l = 0` for every group; the constraint is vacuous.
    pub fn unconstrained(k: usize, dataset: &Dataset) -> Result<Self> {
        Self::new(&vec![0.0; dataset.m()], k, dataset)
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Minimum number of group-`g` points every cluster must hold.
    pub fn quota(&self, g: usize) -> usize {
        self.quotas[g]
    }

    pub fn quotas(&self) -> &[usize] {
        &self.quotas
    }

    /// Checks that the quotas fit `dataset`: one entry per group and
    /// `k * quota_l <= n_l`.
    pub fn check_feasible(&self, dataset: &Dataset) -> Result<()> {
        if self.quotas.len() != dataset.m() {
            return Err(Error::LengthMismatch {
                expected: dataset.m(),
                found: self.quotas.len(),
            });
        }
        for (group, &quota) in self.quotas.iter().enumerate() {
            let available = dataset.group_count(group);
            if quota * self.k > available {
                return Err(Error::InfeasibleQuota {
                    group,
                    quota,
                    k: self.k,
                    available,
                });
            }
        }
        Ok(())
    }

    /// `quota_l / n_l`: the fraction actually enforced after flooring.
    pub fn effective_tau(&self, dataset: &Dataset) -> Vec<f64> {
        self.quotas
            .iter()
            .enumerate()
            .map(|(g, &q)| q as f64 / dataset.group_count(g) as f64)
            .collect()
    }
}

/// The `tau` vector as written in a configuration: either `"1/k"` or an
/// explicit comma separated list.
#[derive(Clone, Debug, PartialEq)]
pub enum TauSpec {
    Uniform,
    Explicit(Vec<f64>),
}

impl TauSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("1/k") {
            return Ok(TauSpec::Uniform);
        }
        let values = s
            .split(',')
            .map(|v| {
                let v = v.trim();
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Config(format!("bad tau component `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TauSpec::Explicit(values))
    }

    pub fn resolve(&self, k: usize, dataset: &Dataset) -> Result<FairnessSpec> {
        match self {
            TauSpec::Uniform => FairnessSpec::uniform(k, dataset),
            TauSpec::Explicit(tau) => FairnessSpec::new(tau, k, dataset),
        }
    }
}

impl fmt::Display for TauSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauSpec::Uniform => f.write_str("1/k"),
            TauSpec::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Centers plus a total point-to-cluster assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub centers: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[self.assignment[i]]
    }

    /// `counts[j][g]`: number of group-`g` points in cluster `j`.
    pub fn composition(&self, dataset: &Dataset) -> Vec<Vec<usize>> {
        composition(dataset, &self.assignment, self.k())
    }

    pub fn check_shape(&self, dataset: &Dataset) -> Result<()> {
        if self.assignment.len() != dataset.n() {
            return Err(Error::LengthMismatch {
                expected: dataset.n(),
                found: self.assignment.len(),
            });
        }
        if let Some(&bad) = self.assignment.iter().find(|&&j| j >= self.k()) {
            return Err(Error::Config(format!(
                "assignment refers to cluster {bad} but only {} centers exist",
                self.k()
            )));
        }
        Ok(())
    }
}

/// `counts[j][g]`: number of group-`g` points assigned to cluster `j`.
pub fn composition(dataset: &Dataset, assignment: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut counts = vec![vec![0usize; dataset.m()]; k];
    for (i, &j) in assignment.iter().enumerate() {
        counts[j][dataset.group(i)] += 1;
    }
    counts
}

/// Fixed centers, the points to assign to them, and the fairness target.
#[derive(Clone, Debug)]
pub struct AssignmentInstance {
    pub dataset: Dataset,
    pub centers: Vec<Vec<f64>>,
    pub spec: FairnessSpec,
    pub norm: Norm,
}

impl AssignmentInstance {
    pub fn new(dataset: Dataset, centers: Vec<Vec<f64>>, spec: FairnessSpec, norm: Norm) -> Result<Self> {
        if spec.k() != centers.len() {
            return Err(Error::LengthMismatch {
                expected: spec.k(),
                found: centers.len(),
            });
        }
        for (index, c) in centers.iter().enumerate() {
            if c.len() != dataset.dim() {
                return Err(Error::RaggedDimensions {
                    index,
                    expected: dataset.dim(),
                    found: c.len(),
                });
            }
        }
        spec.check_feasible(&dataset)?;
        Ok(Self {
            dataset,
            centers,
            spec,
            norm,
        })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    /// `d(x_i, c_j)^p`.
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.norm.cost(self.dataset.point(i), &self.centers[j])
    }

    /// Raw cost `sum_i d(x_i, c_{a(i)})^p` of an assignment to the fixed
    /// centers, summed in point order.
    pub fn assignment_cost(&self, assignment: &[usize]) -> f64 {
        assignment.iter().enumerate().map(|(i, &j)| self.cost(i, j)).sum()
    }
}

/// Evaluation summary for one clustering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `L_p = raw_cost_sum^(1/p)`.
    pub objective_cost: f64,
    /// `sum_i d(x_i, c_phi(i))^p`.
    pub raw_cost_sum: f64,
    pub balance: f64,
    /// Set when some nonempty cluster lacks a group, forcing `balance = 0`.
    pub balance_degenerate: bool,
    pub fairness_error: f64,
    pub tau_satisfied: bool,
    pub mp_satisfied: bool,
    pub rd_satisfied: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn counts_groups() {
        let ds = Dataset::new(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]], &[0, 1, 0]).unwrap();
        assert_eq!((ds.n(), ds.m(), ds.dim()), (3, 2, 2));
        assert_eq!(ds.group_counts(), vec![2, 1]);
        assert_eq!(ds.members(0), &[0, 2]);
    }

    #[test]
    fn reindexes_labels_densely() {
        let ds = Dataset::new(&line(&[1.0, 2.0, 3.0]), &[5, 9, 5]).unwrap();
        assert_eq!(ds.groups(), &[0, 1, 0]);
        assert_eq!(ds.m(), 2);
        assert_eq!(ds.labels(), &["5".to_string(), "9".to_string()]);
    }

    #[test]
    fn rejects_bad_input() {
        let empty: Vec<Vec<f64>> = vec![];
        assert!(matches!(
            Dataset::new(&empty, &[] as &[u8]),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            Dataset::new(&[vec![1.0], vec![1.0, 2.0]], &[0, 0]),
            Err(Error::RaggedDimensions { index: 1, .. })
        ));
        assert!(matches!(
            Dataset::new(&[vec![f64::NAN]], &[0]),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(matches!(
            Dataset::new(&[vec![1.0]], &[0, 1]),
            Err(Error::LabelCountMismatch { .. })
        ));
    }

    #[test]
    fn tau_range() {
        let ds = Dataset::new(&line(&[0.0, 1.0, 2.0, 3.0]), &[0, 1, 0, 1]).unwrap();
        let spec = validate_spec(&[0.5, 0.5], 2, &ds).unwrap();
        assert_eq!(spec.quotas(), &[1, 1]);

        let single = Dataset::new(&line(&[0.0, 1.0]), &["a", "a"]).unwrap();
        assert!(matches!(
            validate_spec(&[0.6], 2, &single),
            Err(Error::TauOutOfRange { group: 0, .. })
        ));
        assert!(matches!(
            validate_spec(&[-0.1], 2, &single),
            Err(Error::TauOutOfRange { .. })
        ));
        assert!(matches!(
            validate_spec(&[0.1, 0.1], 2, &single),
            Err(Error::LengthMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn general_tau_on_two_unequal_groups() {
        // <0.25, 0.12> needs k <= 4; at k = 10 the first component exceeds 1/k.
        let mut labels = vec![0u8; 217];
        labels.extend(vec![1u8; 108]);
        let pts = line(&vec![0.0; labels.len()]);
        let ds = Dataset::new(&pts, &labels).unwrap();
        assert!(validate_spec(&[0.1, 0.1], 10, &ds).is_ok());
        assert!(validate_spec(&[0.25, 0.12], 10, &ds).is_err());
        assert!(validate_spec(&[0.25, 0.12], 4, &ds).is_ok());
    }

    #[test]
    fn uniform_quota_is_exact_when_k_divides() {
        for k in 1..=12 {
            for mult in 1..=30 {
                let n = k * mult;
                let pts = line(&vec![0.0; n]);
                let ds = Dataset::new(&pts, &vec![0; n]).unwrap();
                let spec = FairnessSpec::uniform(k, &ds).unwrap();
                assert_eq!(spec.quota(0), mult, "k={k} n={n}");
                let spec = validate_spec(&[1.0 / k as f64], k, &ds).unwrap();
                assert_eq!(spec.quota(0), mult, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn tau_shorthand() {
        assert_eq!(TauSpec::parse("1/k").unwrap(), TauSpec::Uniform);
        assert_eq!(
            TauSpec::parse(" 0.25, 0.12 ").unwrap(),
            TauSpec::Explicit(vec![0.25, 0.12])
        );
        assert!(TauSpec::parse("0.2,x").is_err());
        assert!(TauSpec::parse("").is_err());
        assert!(TauSpec::parse("nan").is_err());
    }

    #[test]
    fn subset_drops_vanished_groups() {
        let ds = Dataset::new(&line(&[0.0, 1.0, 2.0]), &["a", "b", "c"]).unwrap();
        let sub = ds.subset(&[0, 2]).unwrap();
        assert_eq!(sub.m(), 2);
        assert_eq!(sub.labels(), &["a".to_string(), "c".to_string()]);
        assert_eq!(sub.groups(), &[0, 1]);
    }

    #[test]
    fn instance_checks_center_count() {
        let ds = Dataset::new(&line(&[0.0, 1.0]), &[0, 0]).unwrap();
        let spec = FairnessSpec::uniform(2, &ds).unwrap();
        assert!(AssignmentInstance::new(ds.clone(), vec![vec![0.0]], spec.clone(), Norm::L1).is_err());
        assert!(AssignmentInstance::new(ds, vec![vec![0.0], vec![1.0]], spec, Norm::L1).is_ok());
    }
}
