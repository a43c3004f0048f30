//! Multiscale flatness analysis for discrete measures in Euclidean space.
//!
//! The crate measures how closely a weighted point cloud resembles a constant
//! multiple of `d`-dimensional surface measure on a plane, scale by scale:
//!
//! - [`flat::bl_distance`]: the localized bounded-Lipschitz distance `F_B`
//!   between two measures, solved exactly as a transport problem with mass
//!   release at the ball boundary.
//! - [`coefficients::alpha`]: the flatness number of a ball together with its
//!   minimizing flat measure `(c, L)`; [`coefficients::beta`] for the
//!   distance-to-plane numbers; [`coefficients::alpha_tilde`] for the
//!   normalized Wasserstein variant.
//! - [`multiscale::profile`]: coefficient scans over log-uniform radius grids
//!   with Jones square-function sums, boundedness classification
//!   ([`multiscale::classify`]) and density/angle stopping-time diagnostics
//!   ([`multiscale::stopping_time`]).
//! - [`generators`]: reference measures — a line-splitting cascade with
//!   vanishing density but bounded alpha square function, a Koch variant with
//!   slowly decaying bump angles, and random Lipschitz graphs.
//!
//! Measures are immutable and every operation is a pure function, so
//! everything here can be called from parallel code freely.

pub mod coefficients;
pub mod error;
pub mod flat;
pub mod generators;
pub mod geometry;
pub mod io;
pub mod measure;
pub mod multiscale;

mod la;
mod optimize;
mod transport;

pub use coefficients::{
    alpha, alpha_seeded, alpha_tilde, beta, weighted_pca_plane, AlphaResult, BetaResult,
    FitConfig, FitStatus,
};
pub use error::{Error, Result};
pub use flat::{bl_distance, w1_distance, BlResult, BlStatus, FlatMeasure, WitnessAtom};
pub use generators::{
    counterexample, default_parameters, koch_variant, lipschitz_graph, CounterexampleSpec,
    KochStage, LevelMeasure,
};
pub use geometry::{
    besicovitch_subcover, local_hausdorff, plane_angle, separated_net, AffinePlane, NetResult,
};
pub use measure::{
    ball_mass, density_ratio, rescale, restrict, Ball, DensityStats, DiscreteMeasure,
};
pub use multiscale::{
    classify, nearest_neighbor_spacing, profile, profiles, stopping_time, ClassifyReport,
    ClassifyThresholds, MultiscaleProfile, PointVerdict, RadiusFlags, RadiusGrid, ScaleFlag,
    StopDiagnosis, StopThresholds,
};
