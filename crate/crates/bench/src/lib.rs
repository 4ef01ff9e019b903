//! Fixtures shared by the benchmarks.

use noma_vlc::experiment::{realization_scenario, ExperimentConfig};
use noma_vlc::Scenario;

/// Default-configuration scenario with `num_users` users.
pub fn scenario(num_users: usize) -> Scenario {
    let cfg = ExperimentConfig {
        num_users,
        ..ExperimentConfig::default()
    };
    realization_scenario(&cfg, 0)
        .expect("valid default configuration")
        .0
}
