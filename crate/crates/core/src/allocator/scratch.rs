//! Demand accounting for ancilla distillation in the scratch partition.
//!
//! Distillation is a black box that occupies a fixed cell volume per ancilla
//! produced. A demand of `rate` ancillae per layer therefore needs
//! `rate * volume` cell-layers every layer, which the scratch cross-section
//! supplies at `area` cells per layer.

use crate::geometry::{PartitionLayout, RegionKind};

/// Placeholder distillation volume per ancilla: a 50x20 block over 50 layers.
pub const DEFAULT_DISTILL_VOLUME: u64 = 50 * 20 * 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AncillaDemand {
    /// `|A>` ancillae per layer.
    pub rate_a: u64,
    /// `|Y>` ancillae per layer.
    pub rate_y: u64,
    pub distill_volume_a: u64,
    pub distill_volume_y: u64,
}

impl AncillaDemand {
    pub fn new(rate_a: u64, rate_y: u64) -> Self {
        Self {
            rate_a,
            rate_y,
            ..Self::default()
        }
    }

    pub fn cells_per_layer(&self) -> u128 {
        self.rate_a as u128 * self.distill_volume_a as u128
            + self.rate_y as u128 * self.distill_volume_y as u128
    }
}

impl Default for AncillaDemand {
    fn default() -> Self {
        Self {
            rate_a: 0,
            rate_y: 0,
            distill_volume_a: DEFAULT_DISTILL_VOLUME,
            distill_volume_y: DEFAULT_DISTILL_VOLUME,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScratchFeasibility {
    pub scratch_cells_per_layer: u128,
    pub demand_cells_per_layer: u128,
    pub feasible: bool,
    /// Largest sustainable `|A>`-only rate.
    pub max_rate_a: u128,
    /// Largest sustainable `|Y>`-only rate.
    pub max_rate_y: u128,
}

impl ScratchFeasibility {
    /// Demand over supply; `0` for no demand, infinite when there is demand
    /// but no scratch.
    pub fn utilization(&self) -> f64 {
        match (self.demand_cells_per_layer, self.scratch_cells_per_layer) {
            (0, _) => 0.0,
            (_, 0) => f64::INFINITY,
            (d, s) => d as f64 / s as f64,
        }
    }
}

pub fn scratch_feasibility(layout: &PartitionLayout, demand: &AncillaDemand) -> ScratchFeasibility {
    let supply: u128 = layout
        .regions_of(RegionKind::Scratch)
        .map(|r| r.dims.area())
        .sum();
    let need = demand.cells_per_layer();
    let per = |v: u64| if v == 0 { 0 } else { supply / v as u128 };
    ScratchFeasibility {
        scratch_cells_per_layer: supply,
        demand_cells_per_layer: need,
        feasible: need <= supply,
        max_rate_a: per(demand.distill_volume_a),
        max_rate_y: per(demand.distill_volume_y),
    }
}
