//! Samplers: free and marked triangulations of polygons, and layered growth
//! of the UIPT.

mod free;
mod growth;
mod height;
mod marked;
mod size;

pub use free::{sample_free, sample_free_full, FreeSample, SampleMode};
pub use growth::{grow_uipt, Growth, GrowthMode, GrowthOptions, LayerRecord, PeelRule, PeelTrace, Start, StepRecord};
pub use height::height_profile;
pub use marked::{sample_free_marked, sample_marked_full, sample_marked_size, sample_marked_size_capped, MarkedSample};
pub use size::FreeSizeSampler;

pub(crate) use free::fill_free;

use crate::error::{Error, Result};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

/// Cap on elementary peel steps for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepBudget {
    limit: u64,
    used: u64,
}

impl StepBudget {
    pub fn new(limit: u64) -> Self {
        StepBudget { limit, used: 0 }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn spend(&mut self, steps: u64) -> Result<()> {
        self.used += steps;
        if self.used > self.limit {
            Err(Error::StepBudgetExceeded { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

impl Default for StepBudget {
    fn default() -> Self {
        StepBudget::new(DEFAULT_STEP_BUDGET)
    }
}
