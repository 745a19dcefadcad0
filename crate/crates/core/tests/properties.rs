use fairclust::data_io::{dataset_balance, read_dataset};
use fairclust::experiment::ExperimentConfig;
use fairclust::fair::round_robin_assign;
use fairclust::lloyd::{assign_nearest, run_lloyd, LloydConfig};
use fairclust::metrics::{balance, balance_lower_bound, fairness_error, mp_rd_check, pair_balance};
use fairclust::model::{AssignmentInstance, Clustering, Dataset, FairnessSpec, Norm, TauSpec};
use fairclust::oracle::{brute_force_fair_assignment, brute_force_monolithic, random_instance};
use fairclust::{check_tau_ratio, frac, frac_oe, Recipe, RoundRobinOrder};
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Case {
    dataset: Dataset,
    k: usize,
    tau_fracs: Vec<f64>,
    seed: u64,
    norm: Norm,
}

impl Case {
    /// `tau_l = frac_l / k`; `frac = 1` gives the uniform target.
    fn spec(&self) -> FairnessSpec {
        let tau: Vec<f64> = self.tau_fracs.iter().map(|f| f / self.k as f64).collect();
        FairnessSpec::new(&tau, self.k, &self.dataset).unwrap()
    }

    fn lloyd(&self) -> LloydConfig {
        LloydConfig::new(self.k, self.norm)
            .with_seed(self.seed)
            .with_max_iters(30)
    }
}

/// Points on a coarse 2-D grid (so ties happen), groups interleaved.
fn dataset_from(sizes: &[usize], cells: &[(u8, u8)]) -> Dataset {
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    let mut c = cells.iter().cycle();
    for (g, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let &(x, y) = c.next().unwrap();
            rows.push(vec![f64::from(x), f64::from(y) * 0.5]);
            groups.push(g);
        }
    }
    Dataset::new(&rows, &groups).unwrap()
}

fn case(uniform: bool, multiple_of_k: bool) -> impl Strategy<Value = Case> {
    (2usize..=4, 1usize..=3)
        .prop_flat_map(move |(k, m)| {
            let sizes = prop::collection::vec(1usize..=8, m);
            let fracs = prop::collection::vec(0.0f64..=1.0, m);
            (
                Just(k),
                sizes,
                fracs,
                prop::collection::vec((0u8..12, 0u8..12), 1..40),
                any::<u64>(),
                any::<bool>(),
            )
        })
        .prop_map(move |(k, units, fracs, cells, seed, l1)| {
            let sizes: Vec<usize> = units
                .iter()
                .map(|&u| if multiple_of_k { u * k } else { u * k + u % k })
                .collect();
            let m = sizes.len();
            Case {
                dataset: dataset_from(&sizes, &cells),
                k,
                tau_fracs: if uniform { vec![1.0; m] } else { fracs },
                seed,
                norm: if l1 { Norm::L1 } else { Norm::L2 },
            }
        })
}

fn any_case() -> impl Strategy<Value = Case> {
    any::<bool>().prop_flat_map(|uniform| case(uniform, false))
}

/// Oracle-sized instance: k <= 3 and at most 7 points per group.
fn tiny_instance() -> impl Strategy<Value = AssignmentInstance> {
    (
        2usize..=3,
        prop::collection::vec(1usize..=7, 1..=2),
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(|(k, sizes, seed, l1)| {
            let norm = if l1 { Norm::L1 } else { Norm::L2 };
            random_instance(seed, k, &sizes, 2, 10.0, norm).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn revalidation_is_identity(c in any_case()) {
        prop_assert_eq!(c.dataset.revalidate().unwrap(), c.dataset.clone());
    }

    #[test]
    fn quotas_are_feasible(c in any_case()) {
        let spec = c.spec();
        for g in 0..c.dataset.m() {
            prop_assert!(c.k * spec.quota(g) <= c.dataset.group_count(g));
        }
    }

    #[test]
    fn both_algorithms_are_always_fair(c in any_case()) {
        let spec = c.spec();
        let oe = frac_oe(&c.dataset, &spec, &c.lloyd()).unwrap();
        prop_assert!(check_tau_ratio(&c.dataset, &oe.clustering.assignment, &spec).satisfied);
        prop_assert!(oe.report.tau_satisfied);
        let fr = frac(&c.dataset, &spec, &c.lloyd()).unwrap();
        prop_assert!(check_tau_ratio(&c.dataset, &fr.run.clustering.assignment, &spec).satisfied);
        prop_assert!(fr.run.iterations <= 30);
    }

    #[test]
    fn round_robin_places_every_point_once(c in any_case(), perm_seed in any::<u64>()) {
        let spec = c.spec();
        let vanilla = run_lloyd(&c.dataset, &c.lloyd()).unwrap();
        let inst = AssignmentInstance::new(c.dataset.clone(), vanilla.clustering.centers.clone(), spec.clone(), c.norm).unwrap();
        let order = RoundRobinOrder::from_seed(c.k, perm_seed);
        let a = round_robin_assign(&inst, &vanilla.clustering.assignment, &order);
        prop_assert_eq!(a.len(), c.dataset.n());
        prop_assert!(a.iter().all(|&j| j < c.k));
        let counts = fairclust::model::composition(&c.dataset, &a, c.k);
        for row in &counts {
            for (g, &n) in row.iter().enumerate() {
                prop_assert!(n >= spec.quota(g));
            }
        }
    }

    #[test]
    fn per_pair_balance_respects_lower_bound(c in any_case()) {
        prop_assume!(c.dataset.m() >= 2);
        let spec = c.spec();
        for cl in [
            frac_oe(&c.dataset, &spec, &c.lloyd()).unwrap().clustering,
            frac(&c.dataset, &spec, &c.lloyd()).unwrap().run.clustering,
        ] {
            for a in 0..c.dataset.m() {
                for b in 0..c.dataset.m() {
                    if a == b {
                        continue;
                    }
                    let bound = balance_lower_bound(&spec, &c.dataset, a, b).unwrap();
                    prop_assert!(pair_balance(&c.dataset, &cl, a, b) >= bound - 1e-12);
                }
            }
        }
    }

    #[test]
    fn balance_never_exceeds_dataset_balance(
        c in any_case(),
        labels in prop::collection::vec(0usize..4, 1..200),
    ) {
        prop_assume!(c.dataset.m() >= 2);
        let assignment: Vec<usize> = (0..c.dataset.n()).map(|i| labels[i % labels.len()] % c.k).collect();
        let cl = Clustering { centers: vec![vec![0.0, 0.0]; c.k], assignment };
        let b = balance(&c.dataset, &cl).unwrap().value;
        prop_assert!(b <= dataset_balance(&c.dataset).unwrap() + 1e-12);
    }

    #[test]
    fn uniform_tau_with_divisible_groups_is_perfectly_balanced(c in case(true, true)) {
        let spec = c.spec();
        let tau = spec.tau().to_vec();
        for cl in [
            frac_oe(&c.dataset, &spec, &c.lloyd()).unwrap().clustering,
            frac(&c.dataset, &spec, &c.lloyd()).unwrap().run.clustering,
        ] {
            prop_assert!(fairness_error(&c.dataset, &cl, &tau).unwrap().abs() <= 1e-9);
            if c.dataset.m() >= 2 {
                let b = balance(&c.dataset, &cl).unwrap().value;
                prop_assert!((b - dataset_balance(&c.dataset).unwrap()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn fairness_error_nonnegative_for_uniform_target(c in case(true, false)) {
        let spec = c.spec();
        let cl = frac_oe(&c.dataset, &spec, &c.lloyd()).unwrap().clustering;
        prop_assert!(fairness_error(&c.dataset, &cl, spec.tau()).unwrap() >= -1e-9);
    }

    #[test]
    fn mp_rd_hold_at_achieved_shares(c in any_case()) {
        let cl = run_lloyd(&c.dataset, &c.lloyd()).unwrap().clustering;
        let m = c.dataset.m();
        let (mut lo, mut hi) = (vec![f64::INFINITY; m], vec![0.0f64; m]);
        for row in cl.composition(&c.dataset) {
            let size: usize = row.iter().sum();
            if size == 0 {
                continue;
            }
            for g in 0..m {
                let share = row[g] as f64 / size as f64;
                lo[g] = lo[g].min(share);
                hi[g] = hi[g].max(share);
            }
        }
        prop_assert_eq!(mp_rd_check(&c.dataset, &cl, &lo, &hi).unwrap(), (true, true));
    }

    #[test]
    fn l2_lloyd_trace_is_monotone_without_reseeds(c in any_case()) {
        let cfg = LloydConfig::new(c.k, Norm::L2).with_seed(c.seed).with_max_iters(30);
        let run = run_lloyd(&c.dataset, &cfg).unwrap();
        prop_assert_eq!(&run, &run_lloyd(&c.dataset, &cfg).unwrap());
        for (i, w) in run.trace.windows(2).enumerate() {
            if !run.reseed_iterations.contains(&(i + 2)) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn nearest_assignment_is_a_lower_bound(inst in tiny_instance(), labels in prop::collection::vec(0usize..3, 1..20)) {
        let nearest = assign_nearest(&inst.dataset, &inst.centers);
        let other: Vec<usize> = (0..inst.dataset.n()).map(|i| labels[i % labels.len()] % inst.k()).collect();
        prop_assert!(inst.assignment_cost(&nearest) <= inst.assignment_cost(&other) + 1e-9);
    }

    #[test]
    fn oracle_beats_round_robin_and_matches_monolithic(inst in tiny_instance(), perm_seed in any::<u64>()) {
        let sol = brute_force_fair_assignment(&inst).unwrap();
        prop_assert!(check_tau_ratio(&inst.dataset, &sol.clustering.assignment, &inst.spec).satisfied);
        let prior = assign_nearest(&inst.dataset, &inst.centers);
        let rr = round_robin_assign(&inst, &prior, &RoundRobinOrder::from_seed(inst.k(), perm_seed));
        prop_assert!(sol.opt_cost <= inst.assignment_cost(&rr) + 1e-9);
        let mono = brute_force_monolithic(&inst).unwrap();
        prop_assert_eq!(sol.opt_cost, mono.opt_cost);
    }

    #[test]
    fn csv_reader_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let recipe = Recipe::new("fuzz", &["a", "b"], "g").unwrap();
        let _ = read_dataset(bytes.as_slice(), &recipe);
    }

    #[test]
    fn config_parsers_never_panic(s in ".{0,200}") {
        let _ = Recipe::from_toml_str(&s);
        let _ = ExperimentConfig::from_toml_str(&s);
        let _ = TauSpec::parse(&s);
    }

    #[test]
    fn tau_display_round_trips(v in prop::collection::vec(0.0f64..1.0, 1..5)) {
        let spec = TauSpec::Explicit(v);
        prop_assert_eq!(TauSpec::parse(&spec.to_string()).unwrap(), spec);
    }
}
