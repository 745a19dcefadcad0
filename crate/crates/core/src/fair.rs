//! Round-robin tau-ratio fair assignment and the two clustering schemes
//! built on it: post-processing a vanilla solution once (`frac_oe`) and
//! applying the fair assignment inside every iteration (`frac`).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lloyd::{initialize_centers, iterate, run_lloyd, update_centers, LloydConfig, LloydRun};
use crate::metrics::{evaluate, raw_cost};
use crate::model::{composition, AssignmentInstance, Clustering, Dataset, FairnessSpec, MetricsReport, Norm};

/// Order in which centers take turns during the round-robin phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRobinOrder {
    permutation: Vec<usize>,
    seed: Option<u64>,
}

impl RoundRobinOrder {
    pub fn new(permutation: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; permutation.len()];
        for &j in &permutation {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::Config(format!("{permutation:?} is not a permutation")));
            }
        }
        Ok(Self {
            permutation,
            seed: None,
        })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            permutation: (0..k).collect(),
            seed: None,
        }
    }

    /// Uniformly random order drawn from the order stream of `seed`.
    pub fn from_seed(k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut order = Self::random(k, &mut rng);
        order.seed = Some(seed);
        order
    }

    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let mut permutation: Vec<usize> = (0..k).collect();
        permutation.shuffle(rng);
        Self {
            permutation,
            seed: None,
        }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn k(&self) -> usize {
        self.permutation.len()
    }
}

/// Outcome of [`check_tau_ratio`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauCheck {
    pub satisfied: bool,
    /// `max(0, quota_l - count_j(l))`, indexed `[cluster][group]`.
    pub deficits: Vec<Vec<usize>>,
}

/// Whether every cluster holds at least `quota_l` points of every group.
pub fn check_tau_ratio(dataset: &Dataset, assignment: &[usize], spec: &FairnessSpec) -> TauCheck {
    let deficits: Vec<Vec<usize>> = composition(dataset, assignment, spec.k())
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(g, &c)| spec.quota(g).saturating_sub(c))
                .collect()
        })
        .collect();
    let satisfied = deficits.iter().flatten().all(|&d| d == 0);
    TauCheck { satisfied, deficits }
}

/// Round-robin phase plus reversion, against fixed centers. Returns the new
/// assignment and the number of points placed by the round-robin phase.
pub(crate) fn round_robin(
    dataset: &Dataset,
    centers: &[Vec<f64>],
    spec: &FairnessSpec,
    norm: Norm,
    prior: &[usize],
    order: &RoundRobinOrder,
) -> (Vec<usize>, usize) {
    assert_eq!(order.k(), centers.len(), "order length must equal k");
    assert_eq!(prior.len(), dataset.n(), "prior assignment must be total");
    let mut assignment = prior.to_vec();
    let mut placed = 0;
    for g in 0..dataset.m() {
        let quota = spec.quota(g);
        if quota == 0 {
            continue;
        }
        let members = dataset.members(g);
        // each center's view of the group, nearest first, ties by index
        let views: Vec<Vec<usize>> = centers
            .par_iter()
            .map(|c| {
                let mut keyed: Vec<(f64, usize)> = members
                    .iter()
                    .enumerate()
                    .map(|(local, &i)| (norm.cost(dataset.point(i), c), local))
                    .collect();
                keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                keyed.into_iter().map(|(_, local)| local).collect()
            })
            .collect();
        let mut claimed = vec![false; members.len()];
        let mut cursor = vec![0; centers.len()];
        for _ in 0..quota {
            for &j in &order.permutation {
                let view = &views[j];
                while claimed[view[cursor[j]]] {
                    cursor[j] += 1;
                }
                let local = view[cursor[j]];
                claimed[local] = true;
                assignment[members[local]] = j;
                placed += 1;
            }
        }
    }
    (assignment, placed)
}

/// Fair assignment to the instance's fixed centers, without recomputing
/// them.
pub fn round_robin_assign(
    instance: &AssignmentInstance,
    prior: &[usize],
    order: &RoundRobinOrder,
) -> Vec<usize> {
    round_robin(
        &instance.dataset,
        &instance.centers,
        &instance.spec,
        instance.norm,
        prior,
        order,
    )
    .0
}

/// Fair assignment followed by a center update from the new assignment.
pub fn fair_assignment(
    instance: &AssignmentInstance,
    prior: &[usize],
    order: &RoundRobinOrder,
) -> Clustering {
    let assignment = round_robin_assign(instance, prior, order);
    let centers = update_centers(
        &instance.dataset,
        &assignment,
        instance.k(),
        instance.norm,
        &instance.centers,
    )
    .centers;
    Clustering { centers, assignment }
}

fn check_inputs(dataset: &Dataset, spec: &FairnessSpec, config: &LloydConfig) -> Result<()> {
    config.validate()?;
    if spec.k() != config.k {
        return Err(Error::Config(format!(
            "fairness spec has k = {} but the clustering config has k = {}",
            spec.k(),
            config.k
        )));
    }
    if dataset.n() < config.k {
        return Err(Error::TooFewPoints {
            n: dataset.n(),
            k: config.k,
        });
    }
    spec.check_feasible(dataset)
}

#[derive(Clone, Debug)]
pub struct FracOeOutcome {
    pub vanilla: LloydRun,
    pub clustering: Clustering,
    /// The vanilla result violated the constraint and was reassigned.
    pub corrected: bool,
    pub order: Option<RoundRobinOrder>,
    /// Vanilla trace, followed by the corrected `L_p` when `corrected`.
    pub trace: Vec<f64>,
    pub report: MetricsReport,
}

/// Vanilla clustering, then one fair assignment to its centers if the
/// result is not already fair. The order comes from the config seed.
pub fn frac_oe(dataset: &Dataset, spec: &FairnessSpec, config: &LloydConfig) -> Result<FracOeOutcome> {
    check_inputs(dataset, spec, config)?;
    let vanilla = run_lloyd(dataset, config)?;
    let order = RoundRobinOrder::from_seed(config.k, config.seed);
    correct_vanilla(dataset, spec, config.norm, vanilla, &order)
}

/// The correction step of [`frac_oe`] applied to an existing vanilla run.
pub fn correct_vanilla(
    dataset: &Dataset,
    spec: &FairnessSpec,
    norm: Norm,
    vanilla: LloydRun,
    order: &RoundRobinOrder,
) -> Result<FracOeOutcome> {
    spec.check_feasible(dataset)?;
    vanilla.clustering.check_shape(dataset)?;
    if vanilla.clustering.k() != spec.k() || order.k() != spec.k() {
        return Err(Error::LengthMismatch {
            expected: spec.k(),
            found: vanilla.clustering.k(),
        });
    }
    let mut trace = vanilla.trace.clone();
    let (clustering, corrected, order) =
        if check_tau_ratio(dataset, &vanilla.clustering.assignment, spec).satisfied {
            (vanilla.clustering.clone(), false, None)
        } else {
            let centers = &vanilla.clustering.centers;
            let (assignment, _) = round_robin(
                dataset,
                centers,
                spec,
                norm,
                &vanilla.clustering.assignment,
                order,
            );
            let centers = update_centers(dataset, &assignment, spec.k(), norm, centers).centers;
            trace.push(norm.root(raw_cost(dataset, &centers, &assignment, norm)));
            (Clustering { centers, assignment }, true, Some(order.clone()))
        };
    let report = evaluate(dataset, &clustering, spec, norm)?;
    Ok(FracOeOutcome {
        vanilla,
        clustering,
        corrected,
        order,
        trace,
        report,
    })
}

#[derive(Clone, Debug)]
pub struct FracOutcome {
    pub run: LloydRun,
    pub report: MetricsReport,
}

/// Lloyd iterations in which every nearest-center assignment is replaced by
/// its fair assignment before the center update. A fresh order is drawn from
/// the config's order stream at every iteration.
pub fn frac(dataset: &Dataset, spec: &FairnessSpec, config: &LloydConfig) -> Result<FracOutcome> {
    check_inputs(dataset, spec, config)?;
    let centers = initialize_centers(dataset, config)?;
    let mut rng = config.order_rng();
    let run = iterate(dataset, config, centers, |centers, nearest| {
        let order = RoundRobinOrder::random(config.k, &mut rng);
        round_robin(dataset, centers, spec, config.norm, &nearest, &order).0
    });
    let report = evaluate(dataset, &run.clustering, spec, config.norm)?;
    Ok(FracOutcome { run, report })
}
