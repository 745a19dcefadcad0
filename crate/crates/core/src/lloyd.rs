//! Unconstrained Lloyd-style (k, p)-clustering: mean updates for `p = 2`,
//! coordinate-wise median updates for `p = 1`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::raw_cost;
use crate::model::{squared_distance, Clustering, Dataset, Norm};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitMethod {
    /// `k` distinct data points drawn uniformly.
    #[default]
    #[serde(rename = "uniform")]
    UniformSample,
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub k: usize,
    pub norm: Norm,
    pub max_iters: usize,
    /// Stop once the relative change of `L_p` between iterations drops
    /// below this.
    pub rel_tol: f64,
    pub seed: u64,
    pub init: InitMethod,
}

impl LloydConfig {
    pub const DEFAULT_MAX_ITERS: usize = 100;
    pub const DEFAULT_REL_TOL: f64 = 1e-4;

    pub fn new(k: usize, norm: Norm) -> Self {
        Self {
            k,
            norm,
            max_iters: Self::DEFAULT_MAX_ITERS,
            rel_tol: Self::DEFAULT_REL_TOL,
            seed: 0,
            init: InitMethod::UniformSample,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_init(mut self, init: InitMethod) -> Self {
        self.init = init;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::ZeroClusters);
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.rel_tol.is_nan() || self.rel_tol < 0.0 {
            return Err(Error::Config("rel_tol must be nonnegative".into()));
        }
        Ok(())
    }

    /// Generator for center initialization.
    pub(crate) fn init_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Independent generator for round-robin orders, derived from the same
    /// seed on a separate stream.
    pub(crate) fn order_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }
}

/// Picks `k` distinct data points as starting centers.
pub fn initialize_centers(dataset: &Dataset, config: &LloydConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let (n, k) = (dataset.n(), config.k);
    if n < k {
        return Err(Error::TooFewPoints { n, k });
    }
    let mut rng = config.init_rng();
    let chosen = match config.init {
        InitMethod::UniformSample => index::sample(&mut rng, n, k).into_vec(),
        InitMethod::KMeansPlusPlus => plus_plus(dataset, k, config.norm, &mut rng),
    };
    Ok(chosen.iter().map(|&i| dataset.point(i).to_vec()).collect())
}

fn plus_plus(dataset: &Dataset, k: usize, norm: Norm, rng: &mut impl Rng) -> Vec<usize> {
    let n = dataset.n();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut taken = vec![false; n];
    taken[chosen[0]] = true;
    let mut weight: Vec<f64> = (0..n)
        .map(|i| norm.cost(dataset.point(i), dataset.point(chosen[0])))
        .collect();
    while chosen.len() < k {
        for (i, w) in weight.iter_mut().enumerate() {
            if taken[i] {
                *w = 0.0;
            }
        }
        let next = match WeightedIndex::new(&weight) {
            Ok(dist) => dist.sample(rng),
            // every remaining point coincides with a chosen one
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
                free[rng.gen_range(0..free.len())]
            }
        };
        taken[next] = true;
        chosen.push(next);
        let c = dataset.point(next);
        for (i, w) in weight.iter_mut().enumerate() {
            *w = w.min(norm.cost(dataset.point(i), c));
        }
    }
    chosen
}

/// Index of the nearest center for every point; ties go to the lowest index.
pub fn assign_nearest(dataset: &Dataset, centers: &[Vec<f64>]) -> Vec<usize> {
    (0..dataset.n())
        .into_par_iter()
        .map(|i| nearest_center(dataset.point(i), centers))
        .collect()
}

pub fn nearest_center(x: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let d = squared_distance(x, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct CenterUpdate {
    pub centers: Vec<Vec<f64>>,
    /// Clusters that had no members and were moved onto a data point.
    pub reseeded: Vec<usize>,
}

/// Recomputes every center from its members. An empty cluster is moved onto
/// the point farthest from its currently assigned center in `previous`;
/// several empty clusters take distinct points in descending-distance order.
pub fn update_centers(
    dataset: &Dataset,
    assignment: &[usize],
    k: usize,
    norm: Norm,
    previous: &[Vec<f64>],
) -> CenterUpdate {
    let dim = dataset.dim();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &j) in assignment.iter().enumerate() {
        members[j].push(i);
    }
    let mut centers = Vec::with_capacity(k);
    let mut reseeded = Vec::new();
    for (j, idx) in members.iter().enumerate() {
        if idx.is_empty() {
            reseeded.push(j);
            centers.push(previous[j].clone());
            continue;
        }
        centers.push(match norm {
            Norm::L2 => mean(dataset, idx, dim),
            Norm::L1 => median(dataset, idx, dim),
        });
    }
    if !reseeded.is_empty() {
        let mut by_distance: Vec<(f64, usize)> = assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| (squared_distance(dataset.point(i), &previous[j]), i))
            .collect();
        by_distance.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (&j, &(_, i)) in reseeded.iter().zip(&by_distance) {
            centers[j] = dataset.point(i).to_vec();
        }
    }
    CenterUpdate { centers, reseeded }
}

fn mean(dataset: &Dataset, idx: &[usize], dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for &i in idx {
        for (a, v) in acc.iter_mut().zip(dataset.point(i)) {
            *a += v;
        }
    }
    let n = idx.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

fn median(dataset: &Dataset, idx: &[usize], dim: usize) -> Vec<f64> {
    let mut column = Vec::with_capacity(idx.len());
    (0..dim)
        .map(|c| {
            column.clear();
            column.extend(idx.iter().map(|&i| dataset.point(i)[c]));
            column.sort_by(f64::total_cmp);
            let mid = column.len() / 2;
            if column.len() % 2 == 1 {
                column[mid]
            } else {
                (column[mid - 1] + column[mid]) / 2.0
            }
        })
        .collect()
}

/// Result of an iterated clustering run.
#[derive(Clone, Debug, PartialEq)]
pub struct LloydRun {
    /// Final centers and the assignment they were computed from.
    pub clustering: Clustering,
    /// `L_p` after each center update.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Iterations (1-based) in which an empty cluster was re-seeded.
    pub reseed_iterations: Vec<usize>,
}

impl LloydRun {
    pub fn final_cost(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Runs vanilla Lloyd iterations from seeded initial centers.
pub fn run_lloyd(dataset: &Dataset, config: &LloydConfig) -> Result<LloydRun> {
    let centers = initialize_centers(dataset, config)?;
    Ok(iterate(dataset, config, centers, |_, nearest| nearest))
}

pub(crate) fn relative_change(previous: f64, current: f64) -> f64 {
    if previous == current {
        0.0
    } else if previous == 0.0 {
        f64::INFINITY
    } else {
        ((previous - current) / previous).abs()
    }
}

/// Shared assign/refine/update loop. `refine` receives the current centers
/// and the nearest-center assignment and returns the assignment to use for
/// the next center update.
pub(crate) fn iterate<F>(
    dataset: &Dataset,
    config: &LloydConfig,
    mut centers: Vec<Vec<f64>>,
    mut refine: F,
) -> LloydRun
where
    F: FnMut(&[Vec<f64>], Vec<usize>) -> Vec<usize>,
{
    let norm = config.norm;
    let mut trace: Vec<f64> = Vec::new();
    let mut assignment: Vec<usize> = Vec::new();
    let mut reseed_iterations = Vec::new();
    let mut last_reseeded = false;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iters {
        let nearest = assign_nearest(dataset, &centers);
        let next = refine(&centers, nearest);
        if it > 1 && !last_reseeded && next == assignment {
            // centers are already the update of this assignment
            converged = true;
            break;
        }
        let update = update_centers(dataset, &next, config.k, norm, &centers);
        centers = update.centers;
        assignment = next;
        iterations = it;
        last_reseeded = !update.reseeded.is_empty();
        if last_reseeded {
            reseed_iterations.push(it);
        }
        let cost = norm.root(raw_cost(dataset, &centers, &assignment, norm));
        let settled = trace
            .last()
            .is_some_and(|&prev| relative_change(prev, cost) < config.rel_tol);
        trace.push(cost);
        if settled && !last_reseeded {
            converged = true;
            break;
        }
    }

    LloydRun {
        clustering: Clustering { centers, assignment },
        trace,
        iterations,
        converged,
        reseed_iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Dataset;

    fn line(xs: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Dataset::new(&rows, &vec![0; xs.len()]).unwrap()
    }

    #[test]
    fn n_equals_k_uses_every_point() {
        let ds = line(&[3.0, 1.0, 4.0, 1.5]);
        let centers = initialize_centers(&ds, &LloydConfig::new(4, Norm::L2).with_seed(9)).unwrap();
        let mut xs: Vec<f64> = centers.iter().map(|c| c[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![1.0, 1.5, 3.0, 4.0]);
    }

    #[test]
    fn initialization_is_seeded() {
        let ds = line(&(0..50).map(f64::from).collect::<Vec<_>>());
        for init in [InitMethod::UniformSample, InitMethod::KMeansPlusPlus] {
            let cfg = LloydConfig::new(5, Norm::L2).with_seed(77).with_init(init);
            assert_eq!(
                initialize_centers(&ds, &cfg).unwrap(),
                initialize_centers(&ds, &cfg).unwrap()
            );
        }
        assert!(matches!(
            initialize_centers(&ds, &LloydConfig::new(51, Norm::L2)),
            Err(Error::TooFewPoints { n: 50, k: 51 })
        ));
    }

    #[test]
    fn plus_plus_prefers_the_far_point() {
        // Points {0, 0, 100}, k = 2. Uniform sampling includes 100 in 2 of
        // the 3 index pairs; D^2 weighting always includes it (either it is
        // drawn first, or it is the only point with positive weight).
        let ds = line(&[0.0, 0.0, 100.0]);
        let (p_uniform, p_plus) = (2.0 / 3.0, 1.0);
        let trials = 1000;
        let hits = |init| {
            (0..trials)
                .filter(|&s| {
                    let cfg = LloydConfig::new(2, Norm::L2).with_seed(s).with_init(init);
                    initialize_centers(&ds, &cfg)
                        .unwrap()
                        .iter()
                        .any(|c| c[0] == 100.0)
                })
                .count() as f64
                / trials as f64
        };
        let (f_uniform, f_plus) = (hits(InitMethod::UniformSample), hits(InitMethod::KMeansPlusPlus));
        assert!((f_uniform - p_uniform).abs() < 0.05, "uniform {f_uniform}");
        assert!((f_plus - p_plus).abs() < 1e-12, "k-means++ {f_plus}");
    }

    #[test]
    fn plus_plus_with_duplicates_stays_distinct() {
        let ds = line(&[1.0, 1.0, 1.0]);
        let cfg = LloydConfig::new(3, Norm::L1).with_init(InitMethod::KMeansPlusPlus);
        assert_eq!(initialize_centers(&ds, &cfg).unwrap().len(), 3);
    }

    #[test]
    fn nearest_assignment() {
        let ds = line(&[5.0, 1.0, 9.0]);
        assert_eq!(assign_nearest(&ds, &[vec![0.0], vec![10.0]]), vec![0, 0, 1]);
        let ds = line(&[1.0, 9.0]);
        assert_eq!(assign_nearest(&ds, &[vec![0.0], vec![10.0]]), vec![0, 1]);
        let ds = line(&[2.0, 2.0, 2.0]);
        assert_eq!(assign_nearest(&ds, &[vec![7.0], vec![2.0]]), vec![1, 1, 1]);
    }

    #[test]
    fn center_updates() {
        let ds = Dataset::new(&[vec![0.0, 0.0], vec![2.0, 2.0]], &[0, 0]).unwrap();
        let up = update_centers(&ds, &[0, 0], 1, Norm::L2, &[vec![9.0, 9.0]]);
        assert_eq!(up.centers, vec![vec![1.0, 1.0]]);

        let ds = line(&[0.0, 1.0, 100.0]);
        let up = update_centers(&ds, &[0, 0, 0], 1, Norm::L1, &[vec![0.0]]);
        assert_eq!(up.centers, vec![vec![1.0]]);

        let ds = line(&[0.0, 1.0, 3.0, 100.0]);
        let up = update_centers(&ds, &[0, 0, 0, 0], 1, Norm::L1, &[vec![0.0]]);
        assert_eq!(up.centers, vec![vec![2.0]]);
    }

    #[test]
    fn empty_cluster_reseed_takes_farthest_point() {
        let ds = line(&[0.0, 1.0, 2.0, 30.0]);
        let previous = vec![vec![1.0], vec![500.0]];
        let assignment = assign_nearest(&ds, &previous);
        assert_eq!(assignment, vec![0, 0, 0, 0]);
        let up = update_centers(&ds, &assignment, 2, Norm::L2, &previous);
        assert_eq!(up.reseeded, vec![1]);
        assert_eq!(up.centers[1], vec![30.0]);
        let next = assign_nearest(&ds, &up.centers);
        assert!(next.contains(&1), "re-seeded cluster gains members");
    }

    #[test]
    fn two_blobs_recovered() {
        // Exhaustive oracle: the best split of {0, 1, 10, 11} into two
        // nonempty parts by sum of squared deviations.
        let xs = [0.0, 1.0, 10.0, 11.0];
        let mut best = (f64::INFINITY, vec![]);
        for mask in 1u32..(1 << 4) - 1 {
            let part =
                |bit: u32| -> Vec<f64> { (0..4).filter(|i| (mask >> i) & 1 == bit).map(|i| xs[i]).collect() };
            let sse = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
            };
            let (a, b) = (part(0), part(1));
            let cost = sse(&a) + sse(&b);
            if cost < best.0 {
                let mut means = vec![
                    a.iter().sum::<f64>() / a.len() as f64,
                    b.iter().sum::<f64>() / b.len() as f64,
                ];
                means.sort_by(f64::total_cmp);
                best = (cost, means);
            }
        }
        assert_eq!(best.1, vec![0.5, 10.5]);

        let ds = line(&xs);
        for seed in 0..30 {
            for init in [InitMethod::UniformSample, InitMethod::KMeansPlusPlus] {
                let cfg = LloydConfig::new(2, Norm::L2).with_seed(seed).with_init(init);
                let run = run_lloyd(&ds, &cfg).unwrap();
                let mut got: Vec<f64> = run.clustering.centers.iter().map(|c| c[0]).collect();
                got.sort_by(f64::total_cmp);
                assert_eq!(got, best.1, "seed {seed} {init:?}");
                assert!(run.converged);
            }
        }
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let ds = line(&[1.0, 2.0, 6.0]);
        let run = run_lloyd(&ds, &LloydConfig::new(1, Norm::L2).with_seed(4)).unwrap();
        assert_eq!(run.clustering.centers, vec![vec![3.0]]);
        assert_eq!(run.iterations, 1);
        assert!(run.converged);
    }

    #[test]
    fn config_validation() {
        let ds = line(&[1.0, 2.0]);
        let cfg = LloydConfig::new(1, Norm::L2).with_max_iters(0);
        assert!(matches!(run_lloyd(&ds, &cfg), Err(Error::Config(_))));
        let cfg = LloydConfig::new(1, Norm::L2).with_rel_tol(-1.0);
        assert!(run_lloyd(&ds, &cfg).is_err());
        let cfg = LloydConfig::new(1, Norm::L2).with_rel_tol(f64::NAN);
        assert!(run_lloyd(&ds, &cfg).is_err());
    }

    #[test]
    fn stops_at_max_iters() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let ds = line(&xs);
        let cfg = LloydConfig::new(7, Norm::L2).with_rel_tol(0.0).with_max_iters(2);
        let run = run_lloyd(&ds, &cfg).unwrap();
        assert!(run.iterations <= 2);
        assert_eq!(run.trace.len(), run.iterations);
    }
}
