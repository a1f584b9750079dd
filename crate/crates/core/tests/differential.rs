mod common;

use common::*;
use lookahead_matching::matcher::Fault;
use lookahead_matching::{
    generate, Baseline, IndicatorStrategy, Matcher, MatcherConfig, MateStrategy, UpdateOp,
    WorkloadConfig,
};
use proptest::prelude::*;

fn op_strategy(n: u64) -> impl Strategy<Value = UpdateOp> {
    (0..n, 0..n, any::<bool>())
        .prop_filter("no self-loops", |(u, v, _)| u != v)
        .prop_map(|(u, v, ins)| {
            if ins {
                UpdateOp::insert(u, v).unwrap()
            } else {
                UpdateOp::delete(u, v).unwrap()
            }
        })
}

fn small_case() -> impl Strategy<Value = (u64, Vec<UpdateOp>, usize, Option<usize>, bool)> {
    (3u64..14).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(op_strategy(n), 0..250),
            1usize..6,
            prop::option::of(1usize..5),
            any::<bool>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_update_agrees_with_recompute((n, ops, threshold, block, sparse) in small_case()) {
        let (mate, ind) = if sparse {
            (MateStrategy::OrderedMap, IndicatorStrategy::OrderedSet)
        } else {
            (MateStrategy::Dense, IndicatorStrategy::LazyMatrix)
        };
        let cfg = config(n as usize, mate, ind)
            .with_threshold(threshold)
            .with_phase_override(block);
        let mut audit = Audit::new(n as usize, n);
        audit.check_isolation = true;
        let (m, rep) = audited_run(cfg, ops.clone(), audit);
        prop_assert_eq!(rep.failure, None);
        prop_assert_eq!(m.counters().updates_processed, ops.len() as u64);
    }

    #[test]
    fn pushing_in_pieces_matches_one_stream((n, ops, threshold, _, _) in small_case(), cut in 0usize..250) {
        let cut = cut.min(ops.len());
        let cfg = MatcherConfig::dense(n as usize).with_threshold(threshold);
        let mut whole = Matcher::new(cfg.clone()).unwrap();
        whole.run_stream(ops.clone(), &mut ()).unwrap();

        let mut pieces = Matcher::new(cfg).unwrap();
        for op in &ops[..cut] {
            pieces.push_update(*op).unwrap();
        }
        pieces.run_until_buffer_consumed().unwrap();
        for op in &ops[cut..] {
            pieces.push_update(*op).unwrap();
        }
        pieces.run_until_buffer_consumed().unwrap();
        prop_assert_eq!(whole.snapshot_graph().sorted(), pieces.snapshot_graph().sorted());
        let mut baseline = Baseline::dense(n as usize);
        for op in &ops {
            baseline.step(*op);
        }
        prop_assert_eq!(pieces.snapshot_graph().sorted(), baseline.graph().sorted());
        prop_assert_eq!(pieces.pending(), 0);
    }
}

#[test]
fn levels_stay_isolated_on_larger_streams() {
    for (i, p) in [0.0, 0.2, 0.45].into_iter().enumerate() {
        let cfg = WorkloadConfig::new(120, 6_000, 40 + i as u64).with_p_delete(p);
        let updates: Vec<UpdateOp> = generate(&cfg).unwrap().updates().collect();
        let mut audit = Audit::new(cfg.n, 3);
        audit.check_isolation = true;
        audit.ownership_every = 5;
        let (m, rep) = audited_run(
            MatcherConfig::dense(cfg.n).with_threshold(8),
            updates,
            audit,
        );
        assert_eq!(rep.failure, None, "p_delete={p}");
        assert!(
            m.counters().recursion_depth_max >= 2,
            "stream too easy to exercise recursion"
        );
    }
}

#[test]
fn audit_catches_injected_faults() {
    let cfg = WorkloadConfig::new(60, 3_000, 11).with_p_delete(0.3);
    let updates: Vec<UpdateOp> = generate(&cfg).unwrap().updates().collect();
    for fault in [Fault::SkipDifferenceGreedy, Fault::KeepStaleMates] {
        let mut config = MatcherConfig::dense(cfg.n).with_threshold(4);
        config.fault = Some(fault);
        let (_, rep) = audited_run(config, updates.clone(), Audit::new(cfg.n, 1));
        assert!(rep.failure.is_some(), "{fault:?} went unnoticed");
    }
}

#[test]
fn noop_heavy_streams_keep_graph_in_step() {
    let cfg = WorkloadConfig::new(10, 4_000, 99)
        .with_p_delete(0.5)
        .with_noops(true);
    let stream = generate(&cfg).unwrap();
    let updates: Vec<UpdateOp> = stream.updates().collect();
    let (m, rep) = audited_run(
        MatcherConfig::dense(10).with_threshold(3),
        updates,
        Audit::new(10, 2),
    );
    assert_eq!(rep.failure, None);
    assert_eq!(m.counters().updates_processed, stream.update_count() as u64);
}
