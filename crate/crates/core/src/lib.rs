//! Uplink SINR and spectral-efficiency models for massive MIMO, in both
//! co-located (cellular) and distributed (cell-free) deployments, with
//! maximum-ratio and zero-forcing decoding and full-power or max-min uplink
//! power control.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `mmimo-sim` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod math;
pub mod montecarlo;
pub mod power_control;
pub mod propagation;
pub mod rng;
pub mod sinr_mr;
pub mod sinr_zf;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub mod prelude {
    //! The types most callers need.
    pub use crate::channel::{draw_channel, gamma_from_beta, ChannelRealization, ChannelStats};
    pub use crate::geometry::{
        link_distance, place_colocated, place_uniform_disk, Placement, Point2,
    };
    pub use crate::montecarlo::{
        likely_rate, pool_outputs, rank_percentile, run_experiment, run_realization,
        throughput_from_se, CdfSummary, ConfigBlock, Configuration, ExperimentPlan,
        RealizationOutput, DEFAULT_PERCENTILES,
    };
    pub use crate::power_control::{
        full_power, maxmin_cf_mr, maxmin_cf_zf, maxmin_cl, MaxMinResult, SolverOptions,
    };
    pub use crate::propagation::{
        compute_rho_u, draw_beta, path_loss_db, Deployment, LargeScaleFading, LinkBudget,
        Morphology, MorphologyParams,
    };
    pub use crate::rng::{Stream, StreamPurpose};
    pub use crate::sinr_mr::{
        mr_upper_bound, sinr_cf_mr, sinr_cl_mr, ConfigTag, Decoder, MrBound, PowerControlVector,
        PowerTag, SinrReport,
    };
    pub use crate::sinr_zf::{estimate_zf_expectations, sinr_cf_zf, sinr_cl_zf, ZfExpectations};
    pub use crate::{Error, Result};
}
