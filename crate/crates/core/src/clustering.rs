//! User grouping: the centroid pre-placement of the UAV, the sort-and-split
//! pairing, a uniformly random pairing and the single grand cluster.
//!
//! Pairing sorts users by their gain at the centroid placement and splits
//! the sorted list into a weak half and a strong half. The `k`-th weakest
//! user of the weak half is paired with the `k`-th weakest user of the strong
//! half, so the last cluster holds the strongest member of each half.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noma::{Clustering, SystemConfig};
use crate::vlc::{ChannelModel, Position3D, VlcParams};

/// An immutable problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    users: Vec<Position3D>,
    uav_altitude: f64,
    pub config: SystemConfig,
    pub vlc: VlcParams,
}

impl Scenario {
    pub fn new(
        users: Vec<Position3D>,
        uav_altitude: f64,
        config: SystemConfig,
        vlc: VlcParams,
    ) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::NoUsers);
        }
        if !(uav_altitude > 0.0 && uav_altitude.is_finite()) {
            return Err(Error::Domain(format!(
                "UAV altitude must be positive, got {uav_altitude}"
            )));
        }
        if let Some(u) = users
            .iter()
            .find(|u| !(u.x.is_finite() && u.y.is_finite()) || u.z != 0.0)
        {
            return Err(Error::Domain(format!(
                "user positions must be finite and on the ground, got {u:?}"
            )));
        }
        config.validate()?;
        vlc.validate()?;
        Ok(Self {
            users,
            uav_altitude,
            config,
            vlc,
        })
    }

    pub fn users(&self) -> &[Position3D] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn uav_altitude(&self) -> f64 {
        self.uav_altitude
    }

    pub fn channel_model(&self) -> ChannelModel {
        // parameters were validated on construction
        ChannelModel::new(&self.vlc).expect("validated VLC parameters")
    }

    /// Gains of every user for a UAV hovering at horizontal `(x, y)`.
    pub fn gains_at(&self, x: f64, y: f64) -> Vec<f64> {
        let model = self.channel_model();
        self.users
            .iter()
            .map(|u| model.gain(x, y, self.uav_altitude, u))
            .collect()
    }

    /// Replaces the deployment parameters while keeping the user drop.
    pub fn with_params(&self, config: SystemConfig, vlc: VlcParams) -> Result<Self> {
        Self::new(self.users.clone(), self.uav_altitude, config, vlc)
    }
}

/// UAV position above the mean user location.
pub fn centroid_placement(scenario: &Scenario) -> Result<Position3D> {
    let users = scenario.users();
    if users.is_empty() {
        return Err(Error::NoUsers);
    }
    let n = users.len() as f64;
    let x = users.iter().map(|u| u.x).sum::<f64>() / n;
    let y = users.iter().map(|u| u.y).sum::<f64>() / n;
    Ok(Position3D::new(x, y, scenario.uav_altitude()))
}

/// User indices sorted by ascending gain, ties broken by index.
fn ascending_by_gain(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[a].total_cmp(&gains[b]).then(a.cmp(&b)));
    order
}

fn order_pair(a: usize, b: usize, gains: &[f64]) -> Vec<usize> {
    if (gains[a], a) <= (gains[b], b) {
        vec![a, b]
    } else {
        vec![b, a]
    }
}

/// Sort-and-split pairing with gains evaluated at `uav`.
pub fn sort_and_pair(scenario: &Scenario, uav: Position3D) -> Result<Clustering> {
    let n = scenario.num_users();
    if !n.is_multiple_of(2) {
        return Err(Error::OddUserCount(n));
    }
    let gains = scenario.gains_at(uav.x, uav.y);
    let order = ascending_by_gain(&gains);
    let (weak, strong) = order.split_at(n / 2);
    let clusters = weak.iter().zip(strong).map(|(&f, &s)| vec![f, s]).collect();
    Clustering::new(clusters, gains)
}

/// Uniformly random perfect matching, members ordered by their gain at the
/// centroid placement.
pub fn random_pairing(scenario: &Scenario, rng_seed: u64) -> Result<Clustering> {
    let n = scenario.num_users();
    if !n.is_multiple_of(2) {
        return Err(Error::OddUserCount(n));
    }
    let centroid = centroid_placement(scenario)?;
    let gains = scenario.gains_at(centroid.x, centroid.y);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut users: Vec<usize> = (0..n).collect();
    users.shuffle(&mut rng);
    let clusters = users
        .chunks_exact(2)
        .map(|p| order_pair(p[0], p[1], &gains))
        .collect();
    Clustering::new(clusters, gains)
}

/// One cluster holding every user, weakest first.
pub fn grand_cluster(scenario: &Scenario, uav: Position3D) -> Result<Clustering> {
    let gains = scenario.gains_at(uav.x, uav.y);
    let order = ascending_by_gain(&gains);
    Clustering::new(vec![order], gains)
}
