//! Exact fair assignment on small instances, instance generators, and the
//! approximation-ratio experiment comparing the round-robin assignment
//! against the exact optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::trial_seed;
use crate::fair::{round_robin_assign, RoundRobinOrder};
use crate::lloyd::assign_nearest;
use crate::model::{AssignmentInstance, Clustering, Dataset, FairnessSpec, Norm};

/// Largest group the per-group enumeration accepts.
pub const MAX_GROUP_SIZE: usize = 12;
/// Largest `k` the enumeration accepts.
pub const MAX_K: usize = 3;
/// Leaf budget for [`brute_force_monolithic`].
pub const MAX_MONOLITHIC_LEAVES: u64 = 5_000_000;

/// Relative slack on the approximation bound comparison.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    /// The instance's centers with the optimal assignment.
    pub clustering: Clustering,
    /// Raw cost of the assignment, summed in point order.
    pub opt_cost: f64,
}

fn check_guards(instance: &AssignmentInstance) -> Result<()> {
    let k = instance.k();
    if k > MAX_K {
        return Err(Error::TooLarge(format!("k = {k} exceeds {MAX_K}")));
    }
    for g in 0..instance.dataset.m() {
        let size = instance.dataset.group_count(g);
        if size > MAX_GROUP_SIZE {
            return Err(Error::TooLarge(format!(
                "group {g} has {size} points, limit {MAX_GROUP_SIZE}"
            )));
        }
    }
    Ok(())
}

struct GroupSearch {
    costs: Vec<Vec<f64>>,
    /// `suffix_min[i]`: sum of each remaining point's cheapest cost from `i`.
    suffix_min: Vec<f64>,
    quota: usize,
    k: usize,
    current: Vec<usize>,
    counts: Vec<usize>,
    best: f64,
    best_assignment: Vec<usize>,
}

impl GroupSearch {
    fn descend(&mut self, pos: usize, partial: f64) {
        let remaining = self.costs.len() - pos;
        let deficit: usize = self.counts.iter().map(|&c| self.quota.saturating_sub(c)).sum();
        if deficit > remaining || partial + self.suffix_min[pos] >= self.best {
            return;
        }
        if pos == self.costs.len() {
            self.best = partial;
            self.best_assignment.clone_from(&self.current);
            return;
        }
        for j in 0..self.k {
            self.current[pos] = j;
            self.counts[j] += 1;
            self.descend(pos + 1, partial + self.costs[pos][j]);
            self.counts[j] -= 1;
        }
    }
}

/// Cheapest assignment of `members` to the instance centers giving every
/// center at least `quota` of them. Returns one center per member.
fn solve_group(instance: &AssignmentInstance, members: &[usize], quota: usize) -> Vec<usize> {
    let k = instance.k();
    let costs: Vec<Vec<f64>> = members
        .iter()
        .map(|&i| (0..k).map(|j| instance.cost(i, j)).collect())
        .collect();
    let mut suffix_min = vec![0.0; members.len() + 1];
    for p in (0..members.len()).rev() {
        let cheapest = costs[p].iter().copied().fold(f64::INFINITY, f64::min);
        suffix_min[p] = suffix_min[p + 1] + cheapest;
    }
    let mut search = GroupSearch {
        costs,
        suffix_min,
        quota,
        k,
        current: vec![0; members.len()],
        counts: vec![0; k],
        best: f64::INFINITY,
        best_assignment: Vec::new(),
    };
    search.descend(0, 0.0);
    assert_eq!(
        search.best_assignment.len(),
        members.len(),
        "quota {quota} infeasible for {} points",
        members.len()
    );
    search.best_assignment
}

/// Exact minimum-cost tau-ratio fair assignment to the instance's fixed
/// centers. The constraint and the cost separate by group, so each group is
/// solved on its own by a pruned depth-first enumeration.
pub fn brute_force_fair_assignment(instance: &AssignmentInstance) -> Result<OracleSolution> {
    check_guards(instance)?;
    let ds = &instance.dataset;
    let mut assignment = vec![0; ds.n()];
    for g in 0..ds.m() {
        let members = ds.members(g);
        for (&i, j) in members
            .iter()
            .zip(solve_group(instance, members, instance.spec.quota(g)))
        {
            assignment[i] = j;
        }
    }
    Ok(finish(instance, assignment))
}

/// Exact optimum by plain enumeration of all `k^n` assignments, without
/// using the per-group structure.
pub fn brute_force_monolithic(instance: &AssignmentInstance) -> Result<OracleSolution> {
    let (n, k) = (instance.dataset.n(), instance.k());
    let leaves = (k as u64)
        .checked_pow(n as u32)
        .filter(|&l| l <= MAX_MONOLITHIC_LEAVES);
    if leaves.is_none() {
        return Err(Error::TooLarge(format!(
            "{k}^{n} assignments exceed {MAX_MONOLITHIC_LEAVES}"
        )));
    }
    let spec = &instance.spec;
    let mut current = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut best_assignment = None;
    loop {
        let counts = crate::model::composition(&instance.dataset, &current, k);
        let fair = counts
            .iter()
            .all(|row| row.iter().enumerate().all(|(g, &c)| c >= spec.quota(g)));
        if fair {
            let cost = instance.assignment_cost(&current);
            if cost < best {
                best = cost;
                best_assignment = Some(current.clone());
            }
        }
        // odometer increment, last point fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                let assignment = best_assignment.expect("feasible instance has a fair assignment");
                return Ok(finish(instance, assignment));
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < k {
                break;
            }
            current[pos] = 0;
        }
    }
}

fn finish(instance: &AssignmentInstance, assignment: Vec<usize>) -> OracleSolution {
    OracleSolution {
        opt_cost: instance.assignment_cost(&assignment),
        clustering: Clustering {
            centers: instance.centers.clone(),
            assignment,
        },
    }
}

/// Split of an optimal fair assignment into its quota part and the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCheck {
    pub opt_cost: f64,
    /// Optimum over the quota points alone, with every center taking
    /// exactly its quota of each group.
    pub quota_cost: f64,
    /// Nearest-center cost of the remaining points.
    pub remainder_cost: f64,
}

impl SplitCheck {
    pub fn relative_gap(&self) -> f64 {
        let total = self.quota_cost + self.remainder_cost;
        if self.opt_cost == 0.0 {
            total.abs()
        } else {
            ((total - self.opt_cost) / self.opt_cost).abs()
        }
    }
}

/// Takes the optimal assignment, marks the lowest-index `quota_l` members
/// of every (cluster, group) cell as the quota part, and re-solves both
/// parts independently: the quota part exactly, the remainder by nearest
/// center. The two optima sum to the full optimum.
pub fn split_check(instance: &AssignmentInstance) -> Result<SplitCheck> {
    let solution = brute_force_fair_assignment(instance)?;
    let ds = &instance.dataset;
    let k = instance.k();
    let assignment = &solution.clustering.assignment;
    let mut quota_cost = 0.0;
    let mut remainder_cost = 0.0;
    for g in 0..ds.m() {
        let quota = instance.spec.quota(g);
        let mut taken = vec![0usize; k];
        let mut quota_part = Vec::new();
        for &i in ds.members(g) {
            let j = assignment[i];
            if taken[j] < quota {
                taken[j] += 1;
                quota_part.push(i);
            } else {
                remainder_cost += (0..k).map(|j| instance.cost(i, j)).fold(f64::INFINITY, f64::min);
            }
        }
        if !quota_part.is_empty() {
            let local = solve_group(instance, &quota_part, quota);
            quota_cost += quota_part
                .iter()
                .zip(local)
                .map(|(&i, j)| instance.cost(i, j))
                .sum::<f64>();
        }
    }
    Ok(SplitCheck {
        opt_cost: solution.opt_cost,
        quota_cost,
        remainder_cost,
    })
}

/// One-dimensional instance on which the round-robin assignment costs twice
/// the optimum: centers at `0, delta, .., (k-1) delta`, `n` points on each of
/// the first `k - 1` centers, and `n` points at distance
/// `(k-1) delta` beyond the last one. Single group, `tau = 1/k`, `p = 1`.
/// Points are numbered center by center.
pub fn worst_case_instance(k: usize, n: usize, delta: f64) -> Result<AssignmentInstance> {
    if k < 2 || n < k || !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!(
            "worst case needs k >= 2, n >= k and delta > 0 (got k = {k}, n = {n}, delta = {delta})"
        )));
    }
    let far = (k - 1) as f64 * delta;
    let mut rows = Vec::with_capacity(k * n);
    for j in 0..k {
        let x = j as f64 * delta + if j == k - 1 { far } else { 0.0 };
        rows.extend(std::iter::repeat_n(vec![x], n));
    }
    let ds = Dataset::new(&rows, &vec![0; rows.len()])?;
    let spec = FairnessSpec::uniform(k, &ds)?;
    let centers = (0..k).map(|j| vec![j as f64 * delta]).collect();
    AssignmentInstance::new(ds, centers, spec, Norm::L1)
}

/// Centers and points drawn uniformly from `[0, spread]^d`; group `l` gets
/// `per_group_sizes[l]` points, listed group by group. `tau = 1/k`.
pub fn random_instance(
    seed: u64,
    k: usize,
    per_group_sizes: &[usize],
    d: usize,
    spread: f64,
    norm: Norm,
) -> Result<AssignmentInstance> {
    if per_group_sizes.is_empty() || per_group_sizes.contains(&0) {
        return Err(Error::Config("every group needs at least one point".into()));
    }
    if d == 0 {
        return Err(Error::ZeroDimensions);
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::Config(format!("spread must be positive, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| rng.gen_range(0.0..spread)).collect() };
    let centers: Vec<Vec<f64>> = (0..k).map(|_| draw(&mut rng)).collect();
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for (g, &size) in per_group_sizes.iter().enumerate() {
        for _ in 0..size {
            rows.push(draw(&mut rng));
            groups.push(g);
        }
    }
    let ds = Dataset::new(&rows, &groups)?;
    let spec = FairnessSpec::uniform(k, &ds)?;
    AssignmentInstance::new(ds, centers, spec, norm)
}

/// Round-robin cost against the exact optimum on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    pub alg_cost: f64,
    pub opt_cost: f64,
    /// Twice the largest pairwise point distance.
    pub beta: f64,
    pub ratio: f64,
    /// `alg_cost <= 2 opt_cost + beta`.
    pub bound_satisfied: bool,
}

impl RatioReport {
    /// Scores the round-robin assignment (nearest-center prior, order drawn
    /// from `seed`) on `instance`.
    pub fn measure(instance: &AssignmentInstance, trial: usize, seed: u64) -> Result<Self> {
        let prior = assign_nearest(&instance.dataset, &instance.centers);
        let order = RoundRobinOrder::from_seed(instance.k(), seed);
        let alg = round_robin_assign(instance, &prior, &order);
        let alg_cost = instance.assignment_cost(&alg);
        let opt_cost = brute_force_fair_assignment(instance)?.opt_cost;
        Ok(Self::from_costs(instance, trial, seed, alg_cost, opt_cost))
    }

    pub fn from_costs(
        instance: &AssignmentInstance,
        trial: usize,
        seed: u64,
        alg_cost: f64,
        opt_cost: f64,
    ) -> Self {
        let beta = 2.0 * instance.dataset.diameter();
        let bound = 2.0 * opt_cost + beta;
        Self {
            trial,
            seed,
            k: instance.k(),
            n: instance.dataset.n(),
            alg_cost,
            opt_cost,
            beta,
            ratio: ratio(alg_cost, opt_cost),
            bound_satisfied: alg_cost <= bound + BOUND_SLACK * bound.max(1.0),
        }
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// `alg / opt`, with `0 / 0 = 1`.
pub(crate) fn ratio(alg: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        alg / opt
    } else if alg == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub trials: usize,
    pub violations: usize,
    pub max_ratio: f64,
    /// Trials where the exact optimum exceeded the round-robin cost.
    pub oracle_inversions: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioExperiment {
    pub reports: Vec<RatioReport>,
    pub summary: RatioSummary,
}

impl RatioExperiment {
    pub fn json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&r.to_json_line()?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Dimension and coordinate range of the instances drawn by
/// [`ratio_experiment`].
pub const RATIO_DIM: usize = 2;
pub const RATIO_SPREAD: f64 = 10.0;

/// Random instances with one or two groups whose sizes lie in
/// `size_bounds`; `p = 1`. Trials are independent and seeded from
/// `(seed, trial)`.
pub fn ratio_experiment(
    num_trials: usize,
    k: usize,
    size_bounds: (usize, usize),
    seed: u64,
) -> Result<RatioExperiment> {
    let (lo, hi) = size_bounds;
    if k == 0 {
        return Err(Error::ZeroClusters);
    }
    if k > MAX_K || hi > MAX_GROUP_SIZE {
        return Err(Error::TooLarge(format!(
            "ratio experiment needs k <= {MAX_K} and group sizes <= {MAX_GROUP_SIZE}"
        )));
    }
    if lo == 0 || lo > hi {
        return Err(Error::Config(format!("bad size bounds ({lo}, {hi})")));
    }
    let reports = (0..num_trials)
        .into_par_iter()
        .map(|trial| {
            let s = trial_seed(seed, trial as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let m = rng.gen_range(1..=2);
            let sizes: Vec<usize> = (0..m).map(|_| rng.gen_range(lo..=hi)).collect();
            let instance = random_instance(rng.gen(), k, &sizes, RATIO_DIM, RATIO_SPREAD, Norm::L1)?;
            RatioReport::measure(&instance, trial, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = RatioSummary {
        trials: reports.len(),
        violations: reports.iter().filter(|r| !r.bound_satisfied).count(),
        max_ratio: reports.iter().map(|r| r.ratio).fold(0.0, f64::max),
        oracle_inversions: reports
            .iter()
            .filter(|r| r.opt_cost > r.alg_cost * (1.0 + BOUND_SLACK))
            .count(),
    };
    Ok(RatioExperiment { reports, summary })
}
