use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseMode {
    /// Apply one update directly and recompute this level's matching.
    Single,
    /// Split off the edges a batch touches and recurse on them.
    Batch,
}

/// What the next phase of a level does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhasePlan {
    /// Number of updates the phase consumes.
    pub t_prime: usize,
    pub mode: PhaseMode,
    /// Edge count of the level at phase start.
    pub m0: usize,
}

impl PhasePlan {
    fn single(m0: usize) -> Self {
        PhasePlan {
            t_prime: 1,
            mode: PhaseMode::Single,
            m0,
        }
    }

    fn batch(m0: usize, t_prime: usize) -> Self {
        PhasePlan {
            t_prime,
            mode: PhaseMode::Batch,
            m0,
        }
    }
}

/// Decides the next phase from the level size `m0` and the number of
/// updates still owed to the level.
///
/// * below `threshold` edges, or with fewer than two updates left: one update;
/// * with a fixed block size `block`: `min(block, remaining, ⌈m0/2⌉)`;
/// * more updates left than edges: `⌊m0/2⌋` (at least one);
/// * otherwise the first half, `⌈remaining/2⌉`, of a two-phase finish.
pub fn plan_phase(
    m0: usize,
    remaining: usize,
    threshold: usize,
    block: Option<usize>,
) -> Result<PhasePlan> {
    if remaining == 0 {
        return Err(Error::NoWork);
    }
    if m0 < threshold || remaining < 2 {
        return Ok(PhasePlan::single(m0));
    }
    if let Some(block) = block {
        // Capped at half the level so every child gets strictly less work.
        let t = block.min(remaining).min(m0.div_ceil(2)).max(1);
        return Ok(PhasePlan::batch(m0, t));
    }
    if remaining > m0 {
        return Ok(PhasePlan::batch(m0, (m0 / 2).max(1)));
    }
    Ok(PhasePlan::batch(m0, remaining.div_ceil(2)))
}

/// Per-level phase sequencing on top of [`plan_phase`].
///
/// Once a level has at most `m0` updates left it finishes in exactly two
/// batch phases: the second one takes whatever the first left over.
#[derive(Debug, Clone)]
pub struct PhaseScheduler {
    threshold: usize,
    block: Option<usize>,
    pending: Option<usize>,
}

impl PhaseScheduler {
    pub fn new(threshold: usize, block: Option<usize>) -> Self {
        PhaseScheduler {
            threshold,
            block,
            pending: None,
        }
    }

    /// Number of updates a top-level caller must look ahead to plan the next
    /// phase exactly.
    pub fn lookahead_needed(&self, m0: usize) -> usize {
        m0.max(self.pending.unwrap_or(0)) + 1
    }

    pub fn next(&mut self, m0: usize, remaining: usize) -> Result<PhasePlan> {
        if remaining == 0 {
            return Err(Error::NoWork);
        }
        if let Some(rest) = self.pending.take() {
            if rest == remaining && remaining >= 2 && m0 >= self.threshold {
                return Ok(PhasePlan::batch(m0, rest));
            }
        }
        let plan = plan_phase(m0, remaining, self.threshold, self.block)?;
        if plan.mode == PhaseMode::Batch && self.block.is_none() && remaining <= m0 {
            self.pending = Some(remaining - plan.t_prime);
        }
        Ok(plan)
    }
}
