mod common;

use common::*;
use online_tsp::array::{CellView, PlacementArray};
use online_tsp::harness::{aggregate, execute, run_instance, sweep, RunConfig};
use online_tsp::metric::{MetricSpace, MetricSpaceSpec, PointId};
use online_tsp::net::Net;
use online_tsp::oracle::{minimum_spanning_tree, mst_weight, opt_bounds, IncrementalMst};
use online_tsp::placer::PlacerKind;
use online_tsp::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-9;

fn kind() -> impl Strategy<Value = Kind> {
    prop::sample::select(KINDS.to_vec())
}

fn instance(kind: Kind, len: usize, seed: u64) -> (MetricSpace, Vec<PointId>) {
    stream_of(kind, len, len, &mut seeded(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(kind in kind(), k in 1usize..25, seed: u64) {
        let space = space_of(kind, k, &mut seeded(seed));
        let ids: Vec<PointId> = space.ids().collect();
        for &p in &ids {
            prop_assert_eq!(space.dist(p, p), 0.0);
            for &q in &ids {
                let d = space.dist(p, q);
                prop_assert!(d >= 0.0);
                prop_assert_eq!(d.to_bits(), space.dist(q, p).to_bits());
                for &r in &ids {
                    prop_assert!(le_rel(d, space.dist(p, r) + space.dist(r, q), TOL));
                }
            }
        }
    }

    #[test]
    fn memo_is_transparent(dim in 1usize..4, k in 1usize..40, seed: u64) {
        let plain = space_of(Kind::Euclidean(dim), k, &mut seeded(seed)).with_memo(false);
        let memo = space_of(Kind::Euclidean(dim), k, &mut seeded(seed)).with_memo(true);
        prop_assert!(memo.is_memoized());
        for p in plain.ids() {
            for q in plain.ids() {
                prop_assert_eq!(plain.dist(p, q).to_bits(), memo.dist(p, q).to_bits());
            }
        }
    }

    #[test]
    fn mst_matches_kruskal_and_incremental(kind in kind(), len in 1usize..60, seed: u64) {
        let (space, ids) = instance(kind, len, seed);
        let reference = kruskal_mst(&space, &ids);
        let tree = minimum_spanning_tree(&space, &ids).unwrap();
        prop_assert!(rel_close(tree.weight, reference, TOL) || reference == 0.0 && tree.weight == 0.0);
        let summed: f64 = tree.edges().map(|(a, b)| space.dist(a, b)).sum();
        prop_assert!(rel_close(summed, tree.weight, TOL) || summed == 0.0);
        prop_assert_eq!(tree.nodes.len(), dedupe(&space, &ids).len());

        let mut inc = IncrementalMst::new();
        for (i, &x) in ids.iter().enumerate() {
            inc.insert(x, &space);
            let want = kruskal_mst(&space, &ids[..=i]);
            prop_assert!((inc.weight() - want).abs() <= TOL * want.max(1.0));
        }
    }

    #[test]
    fn small_mst_matches_enumeration(kind in kind(), len in 1usize..8, seed: u64) {
        let (space, ids) = instance(kind, len, seed);
        let want = enumerated_mst(&space, &ids);
        let got = mst_weight(&space, &ids).unwrap();
        prop_assert!((got - want).abs() <= TOL * want.max(1.0));
    }

    #[test]
    fn bounds_sandwich_opt(kind in kind(), len in 1usize..10, seed: u64) {
        let (space, ids) = instance(kind, len, seed);
        let opt = brute_force_opt(&space, &ids);
        let b = opt_bounds(&space, &ids, true).unwrap();
        prop_assert!(le_rel(b.lower, opt, TOL));
        prop_assert!(le_rel(opt, b.upper, TOL));
        prop_assert!(le_rel(b.upper, 2.0 * b.mst, TOL));
        prop_assert!(rel_close(b.exact.unwrap(), opt, TOL) || opt == 0.0);
    }

    #[test]
    fn net_laws_hold_online(kind in kind(), len in 1usize..50, r in 0.0f64..2.0, seed: u64) {
        let (space, ids) = instance(kind, len, seed);
        let mut net = Net::new(r);
        for (i, &x) in ids.iter().enumerate() {
            let before = net.len();
            let inserted = net.increase(x, &space);
            prop_assert_eq!(net.len(), before + usize::from(inserted));
            let seen = &ids[..=i];
            prop_assert!(net.verify(seen, &space));
            for &p in seen {
                prop_assert!(net.centers().iter().any(|&c| space.le(space.dist(p, c), r)));
            }
            prop_assert!(net.size_slack(seen, &space).unwrap() >= -TOL * (1.0 + r));
        }
    }

    #[test]
    fn view_composition_is_order_preserving(n in 1usize..60, seed: u64) {
        let mut rng = seeded(seed);
        let outer = CellView::identity(n);
        let keep: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        let mid = outer.restrict(keep.iter().copied());
        let inner_keep: Vec<usize> = (0..mid.len()).filter(|_| rng.gen_bool(0.5)).collect();
        let inner = mid.restrict(inner_keep.iter().copied());
        let expect: Vec<usize> = inner_keep.iter().map(|&i| keep[i]).collect();
        prop_assert_eq!(inner.to_indices(), expect.clone());
        prop_assert!(expect.windows(2).all(|w| w[0] < w[1]));

        let mut array = PlacementArray::new(n);
        for i in 0..n {
            if rng.gen_bool(0.4) {
                array.place(i, PointId(0)).unwrap();
            }
        }
        let empty = outer.empty_view(&array).to_indices();
        let want: Vec<usize> = (0..n).filter(|&i| array.get(i).is_none()).collect();
        prop_assert_eq!(empty, want);
    }

    #[test]
    fn placements_fill_distinct_cells(
        algorithm in prop::sample::select(vec!["rfmb", "leftmost"]),
        kind in kind(),
        n in 1usize..120,
        seed: u64,
    ) {
        let (space, ids) = instance(kind, n, seed);
        let kind: PlacerKind = algorithm.parse().unwrap();
        let mut placer = kind.build(n);
        let run = execute(placer.as_mut(), n, &space, &ids, true).unwrap();
        prop_assert!(run.array.is_full());
        let mut cells = run.cells.clone();
        cells.sort_unstable();
        cells.dedup();
        prop_assert_eq!(cells.len(), n);
        for (i, &c) in run.cells.iter().enumerate() {
            prop_assert_eq!(run.array.get(c), Some(ids[i]));
        }
        prop_assert!(rel_close(run.array.cost(&space), scan_cost(run.array.cells(), &space), TOL)
            || scan_cost(run.array.cells(), &space) == 0.0);
    }

    #[test]
    fn gap_trace_matches_scan(kind in kind(), n in 1usize..120, seed: u64) {
        let (space, ids) = instance(kind, n, seed);
        let mut placer = PlacerKind::Rfmb.build(n);
        let mut array = PlacementArray::new(n);
        let run = execute(placer.as_mut(), n, &space, &ids, true).unwrap();
        for (i, &c) in run.cells.iter().enumerate() {
            array.place(c, ids[i]).unwrap();
            prop_assert_eq!(run.gap_trace[i], scan_gaps(array.cells()));
            prop_assert_eq!(array.gaps(), scan_gaps(array.cells()));
        }
    }

    /// A decision never depends on later arrivals: two streams sharing a
    /// prefix get the same cells for that prefix.
    #[test]
    fn placement_is_online(kind in kind(), n in 2usize..100, cut in 0.0f64..1.0, seed: u64, other: u64) {
        let (space, ids) = instance(kind, n, seed);
        let split = ((n as f64 * cut) as usize).min(n - 1);
        let mut rng = seeded(other);
        let mut alt = ids.clone();
        for x in &mut alt[split..] {
            *x = PointId::from(rng.gen_range(0..space.len()));
        }
        for algorithm in [PlacerKind::Rfmb, PlacerKind::Leftmost] {
            let a = execute(algorithm.build(n).as_mut(), n, &space, &ids, false).unwrap();
            let b = execute(algorithm.build(n).as_mut(), n, &space, &alt, false).unwrap();
            prop_assert_eq!(&a.cells[..split], &b.cells[..split]);
        }
    }

    #[test]
    fn ratio_bounds_are_ordered(kind in kind(), len in 1usize..40, seed: u64) {
        let (space, ids) = instance(kind, len, seed);
        for algorithm in ["rfmb", "leftmost", "fmb-half"] {
            let r = run_instance(algorithm, &space, &ids, len <= 12).unwrap();
            let lo = r.ratio_lower.unwrap();
            let hi = r.ratio_upper.unwrap();
            prop_assert!(lo <= hi, "{} {} {}", algorithm, lo, hi);
            // A full array is a Hamiltonian path, so against an exact OPT the
            // ratio is at least one. Half placements may leave every point
            // isolated.
            let exact = r.bounds.as_ref().is_some_and(|b| b.exact.is_some());
            if exact && algorithm != "fmb-half" {
                prop_assert!(lo >= 1.0 - TOL, "{} {}", algorithm, lo);
            }
            prop_assert_eq!(r.gaps_max, r.gap_trace.iter().copied().max().unwrap_or(0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn aggregates_recompute_from_rows(trials in 1u64..4, seed: u64) {
        let mut configs = Vec::new();
        for algorithm in ["rfmb", "leftmost", "nope"] {
            for generator in ["euclidean:2", "uniform:4", "comb"] {
                for n in [9usize, 30] {
                    for t in 0..trials {
                        configs.push(RunConfig::new(algorithm, generator, n, seed ^ t));
                    }
                }
            }
        }
        let table = sweep(&configs).unwrap();
        prop_assert_eq!(table.rows.len(), configs.len());
        prop_assert_eq!(&table.aggregates, &aggregate(&table.rows));
        for agg in &table.aggregates {
            let rows: Vec<_> = table
                .rows
                .iter()
                .filter(|r| {
                    r.config.algorithm == agg.algorithm
                        && r.config.generator == agg.generator
                        && r.config.n == agg.n
                })
                .collect();
            prop_assert_eq!(rows.len(), agg.trials);
            let ok: Vec<_> = rows.iter().filter_map(|r| r.result.as_ref().ok()).collect();
            prop_assert_eq!(agg.errors, rows.len() - ok.len());
            if ok.is_empty() {
                prop_assert!(agg.mean_cost.is_none());
                continue;
            }
            let mean = ok.iter().map(|r| r.cost).sum::<f64>() / ok.len() as f64;
            prop_assert!(rel_close(agg.mean_cost.unwrap(), mean, TOL) || mean == 0.0);
            let max_hi = ok.iter().filter_map(|r| r.ratio_upper).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(agg.max_ratio_upper.unwrap(), max_hi);
            prop_assert_eq!(agg.max_gaps.unwrap(), ok.iter().map(|r| r.gaps_max).max().unwrap());
        }
    }
}

#[test]
fn duplicate_coordinates_collapse_to_one_node() {
    let space = MetricSpace::build(MetricSpaceSpec::Euclidean {
        dim: 2,
        points: vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![0.0, 0.0]],
    })
    .unwrap();
    let ids = [PointId(0), PointId(1), PointId(2), PointId(1)];
    assert_eq!(space.distinct(&ids).len(), 2);
    assert_eq!(mst_weight(&space, &ids).unwrap(), 5.0);
}
