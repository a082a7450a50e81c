//! Multi-swap local search for k-means.
//!
//! The pipeline: seed k centers with k-means++, then repeatedly D²-sample a
//! batch of p candidate points and swap them against the p centers whose
//! removal hurts least, keeping the move only when the total cost drops.
//! Exhaustive (`Msls`) and greedy (`MslsG`) swap engines are provided, along
//! with Lloyd refinement, a grid-search candidate generator for small ε
//! guarantees (`nine_eps`), benchmark drivers, and a CLI.
//!
//! ```
//! use mskmeans::{kmeanspp_seed, rng_from_seed, run_local_search};
//! use mskmeans::{LsConfig, LsVariant};
//! use mskmeans::synthetic::MixtureSpec;
//!
//! let (data, _) = MixtureSpec::standard(300, 4, 5, 7).generate();
//! let mut rng = rng_from_seed(7);
//! let init = kmeanspp_seed(&data, 5, &mut rng).unwrap();
//! let cfg = LsConfig { p: 2, steps: 25, ..LsConfig::default() };
//! let (state, trajectory) = run_local_search(&data, init, &cfg, LsVariant::MslsG);
//! assert!(trajectory.non_increasing());
//! assert!(state.total_cost.is_finite());
//! ```

pub mod bench;
pub mod dataset;
mod error;
pub mod lloyd;
pub mod local_search;
pub mod nine_eps;
pub mod seeding;
pub mod state;
pub mod synthetic;

pub use dataset::{centroid, cost, nearest_center, pairwise_sum, sq_dist, Dataset, Point};
pub use error::{Error, Result};
pub use lloyd::lloyd_iterate;
pub use local_search::{
    eta_bound, msls_g_step, msls_step, run_local_search, run_steps, AcceptRule, BoundVariant,
    LsConfig, LsVariant, StepRecord, SwapBudget, SwapProposal, Trajectory,
};
pub use nine_eps::{
    apx_centers, coefficient_grid, nine_eps_run_steps, nine_eps_step, partition_fcn, radius_grid,
    run_nine_eps, CandidateCenter, NineEpsConfig,
};
pub use seeding::{d2_sample, kmeanspp_seed, rng_from_seed, SeedRng};
pub use state::{CentersState, CostDelta, RemovalCharges};
