use serde::{Deserialize, Serialize};

use crate::graph::{IndicatorStats, MateStats};

/// Work tallied directly by the matcher and the baseline; store and
/// indicator costs are tracked by those structures themselves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Work {
    pub updates_processed: u64,
    pub greedy_edge_visits: u64,
    pub list_writes: u64,
    pub single_phases: u64,
    pub batch_phases: u64,
    pub recursion_depth_max: u64,
    pub lookahead_max: u64,
}

/// Operation counters of a run. All fields are monotone over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub updates_processed: u64,
    pub greedy_edge_visits: u64,
    /// Edge-list element writes plus elements scanned by membership searches.
    pub list_writes: u64,
    /// Indicator work units (matrix accesses, or set comparisons).
    pub indicator_ops: u64,
    /// Mate store work units (dense slot accesses, or map comparisons).
    pub mate_ops: u64,
    pub recursion_depth_max: u64,
    pub mate_gets: u64,
    pub mate_comparisons: u64,
    pub setup_ops: u64,
    pub single_phases: u64,
    pub batch_phases: u64,
    /// Largest number of not-yet-consumed updates ever buffered.
    pub lookahead_max: u64,
}

impl OpCounters {
    pub fn assemble(work: &Work, mate: &MateStats, indicator: Option<&IndicatorStats>) -> Self {
        let ind = indicator.copied().unwrap_or_default();
        OpCounters {
            updates_processed: work.updates_processed,
            greedy_edge_visits: work.greedy_edge_visits,
            list_writes: work.list_writes,
            indicator_ops: ind.cost,
            mate_ops: mate.cost,
            recursion_depth_max: work.recursion_depth_max,
            mate_gets: mate.gets,
            mate_comparisons: mate.comparisons,
            setup_ops: mate.setup_ops + ind.setup_ops,
            single_phases: work.single_phases,
            batch_phases: work.batch_phases,
            lookahead_max: work.lookahead_max,
        }
    }

    /// Sum of the four work counters used for amortized-cost comparisons.
    pub fn total_work(&self) -> u64 {
        self.greedy_edge_visits + self.list_writes + self.indicator_ops + self.mate_ops
    }

    /// `total_work / updates_processed`, or 0 for an empty run.
    pub fn amortized_work(&self) -> f64 {
        if self.updates_processed == 0 {
            0.0
        } else {
            self.total_work() as f64 / self.updates_processed as f64
        }
    }
}
