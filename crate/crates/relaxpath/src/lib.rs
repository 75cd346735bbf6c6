//! Exact relaxation paths for box-constrained maximum entropy and
//! squared-loss projection problems, with path-based model selection.

pub mod cascade;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod io;
pub mod path;
pub mod selection;
pub mod solve;
pub mod sqpath;
pub mod sweepline;

pub use cascade::{cascade_eval, cascade_step, CascadeStage};
pub use error::{Error, Result};
pub use experiment::{
    multinomial_draw, sparse_zipf_instance, zipf_base, zipf_prior, zipf_sweep, SweepRow,
    GENERATOR_ID,
};
pub use instance::{theta, weighted_transform, ProblemInstance, SignVector};
pub use io::{objective_from_name, to_json_17, InstanceFile, PathFile};
pub use path::{
    apply_transition, first_breakpoint_check, next_intersection, track_local, track_sparse,
    track_uniform, Breakpoint, Direction, Objective, RelaxationPath, SegmentSums, Transition,
};
pub use selection::{
    lambda_segments, segment_minimize, select_models, validation_loss, LambdaSegment,
    ModelOption, SegmentMin, ValidationCounts,
};
pub use solve::{dual_from, evaluate_g, kkt_check, primal_from, solve_mu_at, PrimalDualPoint};
pub use sqpath::{sq_primal_from, sq_projection_oracle, sq_track_local};
pub use sweepline::{track_global, GlobalTracker, SweepEvent};
