use serde::{Deserialize, Serialize};

use crate::centrality::CentralityRanking;
use crate::error::{Error, Result};
use crate::features::PointId;
use crate::scalar::Scalar;

/// Partition of the centrality-ordered ids into a base stage followed by
/// equal increments; the last increment holds the remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumSchedule {
    pub base_size: usize,
    pub increment: usize,
    pub stages: Vec<Vec<PointId>>,
}

impl CurriculumSchedule {
    /// Splits `order` (most central first).
    pub fn from_order(order: &[PointId], base_size: usize, increment: usize) -> Result<Self> {
        let m = order.len();
        if base_size == 0 || base_size >= m {
            return Err(Error::param(format!(
                "base size must satisfy 0 < base < m (base = {base_size}, m = {m})"
            )));
        }
        if increment == 0 || increment > m - base_size {
            return Err(Error::param(format!(
                "increment must satisfy 0 < increment <= m - base (increment = {increment}, m - base = {})",
                m - base_size
            )));
        }
        let mut stages = vec![order[..base_size].to_vec()];
        stages.extend(order[base_size..].chunks(increment).map(<[PointId]>::to_vec));
        Ok(Self {
            base_size,
            increment,
            stages,
        })
    }

    /// Number of increments `l`; the schedule has `l + 1` stages.
    pub fn increments(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn total(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    /// Data seen after each stage.
    pub fn cumulative_sizes(&self) -> Vec<usize> {
        self.stages
            .iter()
            .scan(0, |acc, s| {
                *acc += s.len();
                Some(*acc)
            })
            .collect()
    }

    /// Union of stages `0..=stage`, in centrality order.
    pub fn prefix(&self, stage: usize) -> Vec<PointId> {
        self.stages[..=stage].iter().flatten().copied().collect()
    }

    /// Checks the structural invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::input(format!("invalid schedule: {msg}")));
        if self.stages.is_empty() || self.stages[0].len() != self.base_size || self.base_size == 0 {
            return bad("stage 0 must hold base_size ids".into());
        }
        let l = self.stages.len() - 1;
        for (i, stage) in self.stages.iter().enumerate().skip(1) {
            let ok = if i < l {
                stage.len() == self.increment
            } else {
                (1..=self.increment).contains(&stage.len())
            };
            if !ok {
                return bad(format!("stage {i} has {} ids", stage.len()));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(id) = self.stages.iter().flatten().find(|id| !seen.insert(**id)) {
            return bad(format!("id {id} appears twice"));
        }
        Ok(())
    }
}

/// Cuts the ranking's descending-centrality order into a schedule.
pub fn build_schedule<W: Scalar>(
    ranking: &CentralityRanking<W>,
    base_size: usize,
    increment: usize,
) -> Result<CurriculumSchedule> {
    CurriculumSchedule::from_order(&ranking.order(), base_size, increment)
}
