//! Train/test splits, k-fold cross-validation over the regularization
//! weights, and observation-level sweeps comparing method variants.

mod cv;
mod split;
mod sweep;

pub use cv::{cross_validate, fold_partition, CellScore, CvConfig, CvResult, Grid, GridCell};
pub use split::{make_split, EvalSplit};
pub use sweep::{
    observation_sweep, sample_training_cells, write_sweep_csv, SweepConfig, SweepRow, SweepSampling,
    SWEEP_CSV_HEADER,
};

use serde::{Deserialize, Serialize};

use crate::graphs::WeightedGraph;

/// Which regularizers a fit may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodVariant {
    /// Nuclear norm only (`γ_r = γ_c = 0`).
    NuclearOnly,
    /// Graph smoothness only (`γ_n = 0`).
    GraphsOnly,
    /// Nuclear norm and both graphs.
    Combined,
}

impl MethodVariant {
    pub fn name(self) -> &'static str {
        match self {
            MethodVariant::NuclearOnly => "nuclear_only",
            MethodVariant::GraphsOnly => "graphs_only",
            MethodVariant::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nuclear_only" | "nuclear" => Some(MethodVariant::NuclearOnly),
            "graphs_only" | "graphs" => Some(MethodVariant::GraphsOnly),
            "combined" => Some(MethodVariant::Combined),
            _ => None,
        }
    }

    /// Forces the weights this variant disables to zero.
    pub fn constrain(self, cell: GridCell) -> GridCell {
        match self {
            MethodVariant::NuclearOnly => GridCell {
                gamma_r: 0.0,
                gamma_c: 0.0,
                ..cell
            },
            MethodVariant::GraphsOnly => GridCell { gamma_n: 0.0, ..cell },
            MethodVariant::Combined => cell,
        }
    }
}

/// Optional row and column graphs shared by every fit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Graphs<'a> {
    pub row: Option<&'a WeightedGraph>,
    pub col: Option<&'a WeightedGraph>,
}
