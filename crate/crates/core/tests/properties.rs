//! Randomized invariant checks. Each property here is something the solvers
//! promise for *every* input, so the generators aim for breadth (degenerate
//! weights, coincident points, sparse and dense plans) rather than realism.

use std::sync::atomic::{AtomicU64, Ordering};

use linfty_ot::costs::Cost;
use linfty_ot::io;
use linfty_ot::mapping::extract_map;
use linfty_ot::measures::{Coupling, DiscreteMeasure, Point};
use linfty_ot::monotonicity::{
    check_cyclically_monotone, check_pair_monotone, destination_preimage, witness_reproduces,
};
use linfty_ot::pnorm::{plan_value, solve_p};
use linfty_ot::{solve_bottleneck, ArcOrder};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    while pts.len() < n {
        let coords: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
        let p = Point::new(coords).unwrap();
        let fresh = !pts
            .iter()
            .any(|q| q.coords().iter().zip(p.coords()).all(|(a, b)| a.to_bits() == b.to_bits()));
        if fresh {
            pts.push(p);
        }
    }
    pts
}

fn random_measure(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DiscreteMeasure {
    let pts = cloud(rng, n, d);
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    DiscreteMeasure::new_normalized(pts, weights).unwrap()
}

/// A coupling whose marginals *are* the measures: entries first, measures after.
fn random_coupling(rng: &mut ChaCha8Rng, m: usize, n: usize, d: usize) -> Coupling {
    let source_pts = cloud(rng, m, d);
    let target_pts = cloud(rng, n, d);
    let mut mass = vec![vec![0.0f64; n]; m];
    // Guarantee every row and column carries mass, then sprinkle extras.
    for row in mass.iter_mut() {
        row[rng.random_range(0..n)] += rng.random_range(0.1..1.0);
    }
    let col_rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
    for (j, &i) in col_rows.iter().enumerate() {
        mass[i][j] += rng.random_range(0.1..1.0);
    }
    let extras = rng.random_range(0..=m * n / 2);
    for _ in 0..extras {
        mass[rng.random_range(0..m)][rng.random_range(0..n)] += rng.random_range(0.05..0.5);
    }
    let total: f64 = mass.iter().flatten().sum();
    let mut entries = Vec::new();
    let mut mu_w = vec![0.0; m];
    let mut nu_w = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            let w = mass[i][j] / total;
            if w > 0.0 {
                entries.push((i, j, w));
                mu_w[i] += w;
                nu_w[j] += w;
            }
        }
    }
    let mu = DiscreteMeasure::new(source_pts, mu_w).unwrap();
    let nu = DiscreteMeasure::new(target_pts, nu_w).unwrap();
    Coupling::new(mu, nu, entries).unwrap()
}

static FILE_SEQ: AtomicU64 = AtomicU64::new(0);

fn scratch_path(stem: &str) -> std::path::PathBuf {
    let k = FILE_SEQ.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("linfty-prop-{}-{}-{}.csv", std::process::id(), stem, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// For a fixed plan the p-cost is a power mean of the entry costs, so it
    /// can only grow with p.
    #[test]
    fn plan_cost_is_nondecreasing_in_p(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..6);
        let n = rng.random_range(2..6);
        let plan = random_coupling(&mut rng, m, n, 2);
        let cost = Cost::euclidean(2);
        let mut prev = f64::NEG_INFINITY;
        for p in [1.0, 2.0, 4.0, 8.0, 32.0] {
            let v = plan_value(&plan, &cost, p);
            prop_assert!(v >= prev - 1e-9, "p={}: {} < {}", p, v, prev);
            prev = v;
        }
    }

    /// Solver output is a genuine coupling and no entry pays more than the
    /// reported threshold.
    #[test]
    fn bottleneck_plans_are_couplings_under_the_threshold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..7);
        let n = rng.random_range(2..7);
        let mu = random_measure(&mut rng, m, 2);
        let nu = random_measure(&mut rng, n, 2);
        let cost = Cost::euclidean(2);
        let sol = solve_bottleneck(&mu, &nu, &cost).unwrap();
        let report = sol.plan.validate(1e-9);
        prop_assert!(report.pass, "marginal drift: {:?}", report);
        for e in sol.plan.entries() {
            let c = cost.evaluate(mu.point(e.i), nu.point(e.j)).unwrap();
            prop_assert!(c <= sol.value + 1e-12, "entry cost {} above value {}", c, sol.value);
        }
    }

    /// Mean-power optima never beat the bottleneck value, and they respect
    /// their own marginals too.
    #[test]
    fn mean_power_optima_stay_below_the_bottleneck(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..6);
        let n = rng.random_range(2..6);
        let mu = random_measure(&mut rng, m, 2);
        let nu = random_measure(&mut rng, n, 2);
        let cost = Cost::euclidean(2);
        let cap = solve_bottleneck(&mu, &nu, &cost).unwrap().value;
        for p in [1.0, 4.0] {
            let sol = solve_p(&mu, &nu, &cost, p, ArcOrder::Forward).unwrap();
            prop_assert!(sol.value <= cap + 1e-6, "p={}: {} > {}", p, sol.value, cap);
            prop_assert!(sol.plan.validate(1e-9).pass);
        }
    }

    /// No cycle of length two beats the plan if no cycle of any length does.
    #[test]
    fn cyclic_monotonicity_implies_the_pairwise_kind(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..6);
        let n = rng.random_range(2..6);
        let plan = random_coupling(&mut rng, m, n, 2);
        let cost = Cost::euclidean(2);
        let cm = check_cyclically_monotone(&plan, &cost, 1e-9);
        let pm = check_pair_monotone(&plan, &cost, 1e-9);
        if cm.holds {
            prop_assert!(pm.holds, "pair witness on a cyclically monotone plan: {:?}", pm.witness);
        }
        if !pm.holds {
            prop_assert!(!cm.holds);
        }
    }

    /// Every reported witness must actually beat the plan when re-evaluated
    /// from scratch.
    #[test]
    fn failed_certificates_carry_reproducible_witnesses(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..6);
        let n = rng.random_range(2..6);
        let plan = random_coupling(&mut rng, m, n, 2);
        let cost = Cost::euclidean(2);
        for cert in [
            check_pair_monotone(&plan, &cost, 1e-9),
            check_cyclically_monotone(&plan, &cost, 1e-9),
        ] {
            if !cert.holds {
                let witness = cert.witness.as_ref().expect("failed certificate without witness");
                prop_assert!(witness_reproduces(&plan, &cost, witness, cert.tolerance));
            }
        }
    }

    /// Measures and couplings survive a CSV round trip bit for bit.
    #[test]
    fn csv_round_trips_are_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(1..4);
        let m = rng.random_range(2..5);
        let n = rng.random_range(2..5);
        let plan = random_coupling(&mut rng, m, n, d);

        let mpath = scratch_path("measure");
        io::write_measure_csv(plan.source(), &mpath).unwrap();
        let back = io::read_measure_csv(&mpath).unwrap();
        std::fs::remove_file(&mpath).ok();
        prop_assert_eq!(back.len(), plan.source().len());
        for i in 0..back.len() {
            let same = back
                .point(i)
                .coords()
                .iter()
                .zip(plan.source().point(i).coords())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same, "coordinate drift at {}", i);
            prop_assert_eq!(back.weight(i).to_bits(), plan.source().weight(i).to_bits());
        }

        let cpath = scratch_path("plan");
        io::write_coupling_csv(&plan, &cpath).unwrap();
        let back =
            io::read_coupling_csv(&cpath, plan.source().clone(), plan.target().clone()).unwrap();
        std::fs::remove_file(&cpath).ok();
        prop_assert_eq!(back.entries().len(), plan.entries().len());
        for (a, b) in back.entries().iter().zip(plan.entries()) {
            prop_assert_eq!((a.i, a.j), (b.i, b.j));
            prop_assert_eq!(a.mass.to_bits(), b.mass.to_bits());
        }
    }

    /// Growing the ball can only grow the preimage, and a ball covering the
    /// whole target pulls in every source.
    #[test]
    fn preimages_grow_with_the_radius(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..6);
        let n = rng.random_range(2..6);
        let plan = random_coupling(&mut rng, m, n, 2);
        let center =
            Point::new(vec![rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]).unwrap();
        let mut prev: Vec<usize> = Vec::new();
        for r in [0.5, 1.5, 4.0, 20.0] {
            let cur = destination_preimage(&plan, &center, r);
            prop_assert!(prev.iter().all(|i| cur.contains(i)), "preimage shrank at r={}", r);
            prev = cur;
        }
        prop_assert_eq!(prev.len(), m);
    }

    /// On a plan whose rows are singletons the extracted map is exact: it is
    /// deterministic and pushes each source weight onto its assigned target.
    #[test]
    fn single_target_rows_extract_to_exact_maps(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..7);
        let mu = random_measure(&mut rng, n, 2);
        let nu_pts = cloud(&mut rng, n, 2);
        // Route row i to a random target, whole row in one entry.
        let targets: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut nu_w = vec![0.0; n];
        let mut entries = Vec::new();
        for i in 0..n {
            nu_w[targets[i]] += mu.weight(i);
            entries.push((i, targets[i], mu.weight(i)));
        }
        prop_assume!(nu_w.iter().all(|w| *w > 0.0));
        let nu = DiscreteMeasure::new(nu_pts, nu_w).unwrap();
        let plan = Coupling::new(mu.clone(), nu, entries).unwrap();

        let map = extract_map(&plan, 0.0);
        prop_assert!(map.is_map);
        prop_assert!(map.nondeterministic_mass.abs() <= 1e-15);
        prop_assert_eq!(&map.assignment, &targets);
        for i in 0..n {
            prop_assert!((map.dominant_mass[i] - mu.weight(i)).abs() <= 1e-15);
        }
    }
}
