//! Seeded Monte Carlo studies over the THz and Rayleigh scenarios.
//!
//! Every table is a pure function of the [`Scenario`] (which carries its
//! master seed). Trial `t` draws from its own ChaCha stream `(seed, t)`, trials
//! run in parallel, and results are reduced in trial order, so thread count
//! never changes a single output bit.

mod oracle_check;
mod output;
mod placement;
mod scenario;
mod studies;

pub use oracle_check::{oracle_check, OracleReport};
pub use output::{format_sig9, run, write_table, FileNaming, ResultTable};
pub use placement::{place_users, place_users_seeded, PlacementConfig};
pub use scenario::{
    Band, Interference, IqiConfig, IrrFallback, NullingPolicy, ResolvedIqi, Scenario, SweepRange,
    Sweeps,
};
pub use studies::{
    band_rate, sweep_nulling, sweep_rate_vs_snr, sweep_se_vs_ebn0, sweep_slope_vs_g, trial_channels,
    SeCurves, SeSummary, Study,
};
