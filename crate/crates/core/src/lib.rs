//! Positive solutions of `f_t = Δf + af − bf³` on periodic grids, and
//! numerical checks that `H = αΔl + β|∇l|² + γf² + gauge(t)` with `l = ln f`
//! stays nonnegative.
//!
//! The pipeline is: validate parameters ([`params`]), build the time gauge
//! ([`gauge`]), integrate the equation ([`solver`]), then evaluate the Harnack
//! quantity and its consequences on the snapshots ([`harnack`], [`waves`]).
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix `f64`.
//!
//! ```
//! use nwh_core::{evolve, certify, Grid, HarnackParams, InitialCondition, PdeParams, SolverConfig, TimeGauge};
//!
//! let pde = PdeParams::new(1.0, 1.0, 1).unwrap();
//! let params = HarnackParams::classical_choice(1.0, pde).unwrap();
//! let grid = Grid::new(1, 64, 20.0).unwrap();
//! let ic = InitialCondition::SinePerturbed { amplitude: 0.3, mode: 1 };
//! let cfg = SolverConfig::new(pde, grid, ic, 1.0).with_snapshot_interval(0.1);
//! let traj = evolve(&cfg).unwrap();
//! let report = certify(&traj, &TimeGauge::new(params), 0.05, 5e-3).unwrap();
//! assert!(report.passed());
//! ```

pub mod field;
pub mod gauge;
pub mod harnack;
pub mod params;
pub mod scalar;
pub mod solver;
pub mod waves;

pub use field::{Field, FieldError, Grid};
pub use gauge::{GaugeError, GaugeKind, TimeGauge};
pub use harnack::{
    certify, classical_bound, classical_check, classical_log_bound, evolution_residuals, harnack_field,
    harnack_field_fform, lemma_residuals, path_bound_numeric, random_queries, ClassicalQuery, ClassicalReport,
    HarnackError, HarnackField, HarnackReport,
};
pub use params::{Branch, GaugeConstants, HarnackParams, ParamError, PdeParams};
pub use scalar::Scalar;
pub use solver::{evolve, pde_rhs, relax_steady, stable_dt, InitialCondition, SolverConfig, SolverError, Trajectory};
pub use waves::{
    check_gradient_bound, check_speed_bound, measure_front_speed, shoot_profile, ExactFront, ShootOutcome,
    WaveError, WaveProfile,
};

pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type PdeParams64 = PdeParams<f64>;
pub type HarnackParams64 = HarnackParams<f64>;
pub type TimeGauge64 = TimeGauge<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type WaveProfile64 = WaveProfile<f64>;
