//! Energy efficiency (goodput-to-power ratio) of MIMO links over static,
//! fast-fading and slow-fading Rayleigh channels.
//!
//! * [`system`]: link parameters and shared value types.
//! * [`channel`]: channel sampling and Monte Carlo outage / GPR.
//! * [`closed_form`]: Erlang-based closed forms.
//! * [`solvers`]: characteristic roots and optimal MISO precoding.
//! * [`asymptotics`]: large-system Gaussian approximations.
//! * [`search`]: maximization, exhaustive allocation search, structural checks.

pub mod asymptotics;
pub mod channel;
pub mod closed_form;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod search;
pub mod solvers;
pub mod system;

pub use channel::{
    gpr_mc, mutual_information, outage_probability_mc, rate_thresholds, sample_channel,
    ChannelBank, McConfig, RateThresholds,
};
pub use error::{Error, Result};
pub use search::{GridMode, Objective, SimplexGrid, Structure};
pub use system::{
    majorizes, sigma2_from_rho_db, validate_params, ChannelSample, GprCurve, Majorization,
    McEstimate, PowerAllocation, RawParams, SystemParams,
};
