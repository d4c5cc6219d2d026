//! Thread-pool setup and order-preserving parallel drivers.
//!
//! Every parallel map here collects results in input order and derives all
//! randomness from per-item seeds, so output does not depend on the number
//! of threads.

use cascadekit_core::cascade::{compute_metrics, CascadeMetrics, CascadeTree};
use cascadekit_core::classify::{
    assemble_forest, check_training_set, train_tree, Dataset, ForestConfig, ForestModel, ForestTrainer,
};
use cascadekit_core::Result;
use rayon::prelude::*;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "CASCADEKIT_THREADS";

/// Configures the global pool. `None` or `0` keeps rayon's default.
pub fn init_threads(threads: Option<usize>) -> anyhow::Result<()> {
    match threads {
        Some(n) if n > 0 => {
            // A second initialization (e.g. in tests) is harmless.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Trains the trees of a forest in parallel.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParallelTrainer;

impl ForestTrainer for ParallelTrainer {
    fn train(&self, data: &Dataset, config: &ForestConfig) -> Result<ForestModel> {
        check_training_set(data, config)?;
        let trees = (0..config.trees).into_par_iter().map(|i| train_tree(data, config, config.tree_seed(i))).collect();
        Ok(assemble_forest(trees, data, config))
    }
}

pub fn metrics_par(trees: &[CascadeTree]) -> Vec<CascadeMetrics> {
    trees.par_iter().map(compute_metrics).collect()
}
