//! Power-domain NOMA rates, SIC feasibility margins, decoding-order weights and
//! the optical intensity limits of an intensity-modulated LED.
//!
//! Inside a cluster users are indexed weakest first. User `i` decodes and
//! cancels the messages of users `1..i` and treats the messages of stronger
//! users `i+1..M` as noise, so its rate is
//!
//! ```text
//! R_i = log2(1 + h_i p_i / (n0 + h_i Σ_{j>i} p_j))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// System-level constants shared by every scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Receiver noise power, watts.
    pub noise_power: f64,
    /// Total transmit power budget of the LED, watts.
    pub max_total_power: f64,
    /// DC bias of the LED drive signal.
    pub dc_offset: f64,
    /// Peak optical intensity allowed for eye safety.
    pub peak_intensity: f64,
    /// PAM-order dependent scaling between power and intensity swing.
    pub pam_coefficient: f64,
    /// Minimum normalized power gap for SIC to separate two signals.
    pub min_sic_gap: f64,
    /// Per-user minimum rate, bits/s/Hz.
    pub qos_min_rate: f64,
    /// Total system bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Radius of the disc the UAV must hover within, meters.
    pub cell_radius: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            noise_power: dbm_to_watts(-104.0),
            max_total_power: 0.02,
            dc_offset: 20.0,
            peak_intensity: 30.0,
            pam_coefficient: 3.0 * 5f64.sqrt() / 5.0,
            min_sic_gap: 1.0,
            qos_min_rate: 0.1,
            bandwidth_hz: 20e6,
            cell_radius: 10.0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("noise_power", self.noise_power),
            ("max_total_power", self.max_total_power),
            ("dc_offset", self.dc_offset),
            ("peak_intensity", self.peak_intensity),
            ("pam_coefficient", self.pam_coefficient),
            ("min_sic_gap", self.min_sic_gap),
            ("qos_min_rate", self.qos_min_rate),
            ("bandwidth_hz", self.bandwidth_hz),
            ("cell_radius", self.cell_radius),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.peak_intensity <= self.dc_offset {
            return Err(Error::InvalidConfig(format!(
                "peak_intensity ({}) must exceed dc_offset ({})",
                self.peak_intensity, self.dc_offset
            )));
        }
        Ok(())
    }

    /// Bound `C = min(A, B − A) / δ` on `Σ √p`.
    pub fn intensity_limit(&self) -> f64 {
        self.dc_offset.min(self.peak_intensity - self.dc_offset) / self.pam_coefficient
    }
}

/// Ordered partition of the users into clusters.
///
/// Each inner list holds user indices weakest first, judged by the gains the
/// clustering was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    clusters: Vec<Vec<usize>>,
    channel_gains: Vec<f64>,
}

impl Clustering {
    /// Validates that the clusters partition `0..channel_gains.len()` and are
    /// ordered by non-decreasing gain.
    pub fn new(clusters: Vec<Vec<usize>>, channel_gains: Vec<f64>) -> Result<Self> {
        let n = channel_gains.len();
        let mut seen = vec![false; n];
        for cluster in &clusters {
            if cluster.is_empty() {
                return Err(Error::InvalidConfig("empty cluster".into()));
            }
            for &u in cluster {
                if u >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "user",
                        index: u,
                        len: n,
                    });
                }
                if std::mem::replace(&mut seen[u], true) {
                    return Err(Error::InvalidConfig(format!("user {u} appears twice")));
                }
            }
            if cluster
                .windows(2)
                .any(|w| channel_gains[w[0]] > channel_gains[w[1]])
            {
                return Err(Error::InvalidConfig(format!(
                    "cluster {cluster:?} is not ordered by ascending gain"
                )));
            }
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidConfig(format!("user {u} is not clustered")));
        }
        Ok(Self {
            clusters,
            channel_gains,
        })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn channel_gains(&self) -> &[f64] {
        &self.channel_gains
    }

    /// Number of clusters `K`.
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Number of users `N`.
    pub fn num_users(&self) -> usize {
        self.channel_gains.len()
    }

    /// Cluster size `M` when all clusters have the same size.
    pub fn uniform_size(&self) -> Option<usize> {
        let m = self.clusters.first()?.len();
        self.clusters.iter().all(|c| c.len() == m).then_some(m)
    }

    /// Gain of the `user`-th member (0-based, weakest first) of `cluster`.
    pub fn gain(&self, cluster: usize, user: usize) -> Result<f64> {
        let members = self.clusters.get(cluster).ok_or(Error::IndexOutOfRange {
            what: "cluster",
            index: cluster,
            len: self.clusters.len(),
        })?;
        let u = members.get(user).ok_or(Error::IndexOutOfRange {
            what: "cluster member",
            index: user,
            len: members.len(),
        })?;
        Ok(self.channel_gains[*u])
    }

    /// Same partition, evaluated with a different set of per-user gains. The
    /// decoding order is kept even if the new gains reorder a cluster.
    pub fn with_gains(&self, channel_gains: Vec<f64>) -> Result<Self> {
        if channel_gains.len() != self.channel_gains.len() {
            return Err(Error::DimensionMismatch {
                expected: self.channel_gains.len(),
                got: channel_gains.len(),
            });
        }
        Ok(Self {
            clusters: self.clusters.clone(),
            channel_gains,
        })
    }

    /// Per-cluster gains in decoding order.
    pub fn cluster_gains(&self, cluster: usize) -> Vec<f64> {
        self.clusters[cluster]
            .iter()
            .map(|&u| self.channel_gains[u])
            .collect()
    }
}

/// Transmit powers, `p[k][i]` for member `i` (weakest first) of cluster `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    p: Vec<Vec<f64>>,
}

impl PowerAllocation {
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(v) = p.iter().flatten().find(|v| !(**v >= 0.0)) {
            return Err(Error::Domain(format!(
                "transmit power must be non-negative, got {v}"
            )));
        }
        Ok(Self { p })
    }

    /// All-zero allocation shaped like `clustering`.
    pub fn zeros(clustering: &Clustering) -> Self {
        Self {
            p: clustering
                .clusters()
                .iter()
                .map(|c| vec![0.0; c.len()])
                .collect(),
        }
    }

    pub fn get(&self, cluster: usize, user: usize) -> Option<f64> {
        self.p.get(cluster)?.get(user).copied()
    }

    pub fn cluster(&self, cluster: usize) -> &[f64] {
        &self.p[cluster]
    }

    pub fn clusters(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.p.iter().flatten().copied()
    }

    pub fn total(&self) -> f64 {
        self.iter().sum()
    }

    fn check_shape(&self, clustering: &Clustering) -> Result<()> {
        let ok = self.p.len() == clustering.num_clusters()
            && self
                .p
                .iter()
                .zip(clustering.clusters())
                .all(|(p, c)| p.len() == c.len());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "power allocation does not match the clustering shape".into(),
            ))
        }
    }
}

/// Rate of member `i` given the cluster's gains and powers, weakest first.
#[inline]
pub(crate) fn member_rate(gains: &[f64], powers: &[f64], i: usize, noise: f64) -> f64 {
    let interference: f64 = powers[i + 1..].iter().sum();
    let h = gains[i];
    (1.0 + h * powers[i] / (noise + h * interference)).log2()
}

/// Decoding-order weight `K / order` with a 1-based intra-cluster order.
pub fn user_weight(num_clusters: usize, order: usize) -> f64 {
    num_clusters as f64 / order as f64
}

/// Achievable rate (bits/s/Hz) of member `user` (0-based, weakest first) of
/// `cluster`.
pub fn achievable_rate(
    clustering: &Clustering,
    powers: &PowerAllocation,
    config: &SystemConfig,
    cluster: usize,
    user: usize,
) -> Result<f64> {
    clustering.gain(cluster, user)?;
    powers.check_shape(clustering)?;
    let gains = clustering.cluster_gains(cluster);
    Ok(member_rate(
        &gains,
        powers.cluster(cluster),
        user,
        config.noise_power,
    ))
}

/// SIC margins `h̄_{i+1}(p_i − Σ_{j>i} p_j) − θ` for every cluster and every
/// member except the strongest, flattened cluster by cluster. A margin is
/// satisfied when it is non-negative.
pub fn sic_margins(
    clustering: &Clustering,
    powers: &PowerAllocation,
    config: &SystemConfig,
) -> Result<Vec<f64>> {
    powers.check_shape(clustering)?;
    let mut out = Vec::new();
    for k in 0..clustering.num_clusters() {
        let gains = clustering.cluster_gains(k);
        cluster_sic_margins(&gains, powers.cluster(k), config, &mut out);
    }
    Ok(out)
}

pub(crate) fn cluster_sic_margins(
    gains: &[f64],
    powers: &[f64],
    config: &SystemConfig,
    out: &mut Vec<f64>,
) {
    for i in 0..gains.len().saturating_sub(1) {
        let normalized = gains[i + 1] / config.noise_power;
        let rest: f64 = powers[i + 1..].iter().sum();
        out.push(normalized * (powers[i] - rest) - config.min_sic_gap);
    }
}

/// Weighted sum-rate `Σ_k Σ_i η_ik R_ik` in bits/s/Hz.
pub fn weighted_sum_rate(
    clustering: &Clustering,
    powers: &PowerAllocation,
    config: &SystemConfig,
) -> Result<f64> {
    powers.check_shape(clustering)?;
    Ok(rate_breakdown(clustering, powers, config).weighted)
}

/// Weighted sum-rate in bits/s/Hz and in bits/s, where each cluster occupies
/// `bandwidth / K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub weighted: f64,
    pub weighted_bps: f64,
}

pub(crate) fn rate_breakdown(
    clustering: &Clustering,
    powers: &PowerAllocation,
    config: &SystemConfig,
) -> RateBreakdown {
    let k_total = clustering.num_clusters();
    let mut weighted = 0.0;
    for k in 0..k_total {
        let gains = clustering.cluster_gains(k);
        let p = powers.cluster(k);
        for i in 0..gains.len() {
            weighted += user_weight(k_total, i + 1) * member_rate(&gains, p, i, config.noise_power);
        }
    }
    RateBreakdown {
        weighted,
        weighted_bps: weighted * config.bandwidth_hz / k_total as f64,
    }
}

/// Slack of the DC-offset and peak-intensity limits on `Σ √p`. Both are
/// non-negative exactly when the allocation is optically feasible.
pub fn optical_intensity_slack(
    powers: &PowerAllocation,
    config: &SystemConfig,
) -> Result<(f64, f64)> {
    let mut root_sum = 0.0;
    for p in powers.iter() {
        if !(p >= 0.0) {
            return Err(Error::Domain(format!(
                "transmit power must be non-negative, got {p}"
            )));
        }
        root_sum += p.sqrt();
    }
    let slack_dc = config.dc_offset / config.pam_coefficient - root_sum;
    let slack_peak = (config.peak_intensity - config.dc_offset) / config.pam_coefficient - root_sum;
    Ok((slack_dc, slack_peak))
}

/// Interference-free rate (bits/s) of a user holding `1/num_users` of the band.
pub fn oma_rate(gain: f64, power: f64, config: &SystemConfig, num_users: usize) -> f64 {
    config.bandwidth_hz / num_users as f64 * oma_spectral_efficiency(gain, power, config)
}

#[inline]
pub(crate) fn oma_spectral_efficiency(gain: f64, power: f64, config: &SystemConfig) -> f64 {
    (1.0 + gain * power / config.noise_power).log2()
}
