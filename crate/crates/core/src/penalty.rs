//! Penalty formulation of the joint UAV placement and power allocation
//! problem.
//!
//! A candidate is a flat vector `[x_u, y_u, p_11, p_21, p_12, p_22, …]`: the
//! UAV's horizontal position followed by the transmit powers cluster by
//! cluster, weakest member first. Its fitness is the weighted sum-rate plus
//!
//! ```text
//! P(X) = −μ Σ_c max(v_c, 0)²
//! ```
//!
//! over the violations `v_c` of the total power budget, the optical intensity
//! limit `Σ √p ≤ C`, each SIC gap, each user's minimum rate and the disc that
//! bounds the UAV. Power non-negativity is left to the search box.
//!
//! Channel gains are re-evaluated at the candidate UAV position for every
//! evaluation while the cluster membership and decoding order stay fixed.

use serde::{Deserialize, Serialize};

use crate::clustering::Scenario;
use crate::error::{Error, Result};
use crate::hho::SearchSpace;
use crate::noma::{
    cluster_sic_margins, member_rate, oma_spectral_efficiency, user_weight, Clustering,
    PowerAllocation,
};
use crate::vlc::ChannelModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// Penalty factor `μ`.
    pub mu: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self { mu: 1e14 }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu > 0.0 && self.mu.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "penalty factor must be positive, got {}",
                self.mu
            )))
        }
    }
}

/// Flat decision vector: UAV `(x, y)` followed by the per-user powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionVector(pub Vec<f64>);

impl SolutionVector {
    pub fn encode(x: f64, y: f64, powers: &PowerAllocation) -> Self {
        let mut v = Vec::with_capacity(2 + powers.iter().count());
        v.push(x);
        v.push(y);
        v.extend(powers.iter());
        Self(v)
    }

    /// Splits the vector into the UAV position and a power allocation shaped
    /// like `clustering`.
    pub fn decode(&self, clustering: &Clustering) -> Result<(f64, f64, PowerAllocation)> {
        let expected = clustering.num_users() + 2;
        if self.0.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.0.len(),
            });
        }
        let mut rest = &self.0[2..];
        let mut p = Vec::with_capacity(clustering.num_clusters());
        for cluster in clustering.clusters() {
            let (head, tail) = rest.split_at(cluster.len());
            p.push(head.to_vec());
            rest = tail;
        }
        Ok((self.0[0], self.0[1], PowerAllocation::new(p)?))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Constraint violations of one candidate. Each entry is satisfied when it
/// is at most zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `Σ p − P_max`
    pub total_power: f64,
    /// `Σ √p − C`
    pub optical_intensity: f64,
    /// `θ − h̄_{i+1}(p_i − Σ_{j>i} p_j)` per cluster and non-strongest member.
    pub sic: Vec<f64>,
    /// `R_req − R` per user, in solution-vector order.
    pub qos: Vec<f64>,
    /// `x_u² + y_u² − R²`
    pub disc: f64,
    pub overall_feasible: bool,
}

impl FeasibilityReport {
    fn new(
        total_power: f64,
        optical_intensity: f64,
        sic: Vec<f64>,
        qos: Vec<f64>,
        disc: f64,
    ) -> Self {
        let mut report = Self {
            total_power,
            optical_intensity,
            sic,
            qos,
            disc,
            overall_feasible: false,
        };
        let feasible = report.violations().all(|v| v <= 0.0);
        report.overall_feasible = feasible;
        report
    }

    pub fn violations(&self) -> impl Iterator<Item = f64> + '_ {
        [self.total_power, self.optical_intensity]
            .into_iter()
            .chain(self.sic.iter().copied())
            .chain(self.qos.iter().copied())
            .chain(std::iter::once(self.disc))
    }

    /// Number of penalized constraints, `K + MK + 3` for pairs.
    pub fn constraint_count(&self) -> usize {
        self.violations().count()
    }

    /// `−μ Σ max(v, 0)²`
    pub fn penalty(&self, config: &PenaltyConfig) -> f64 {
        -config.mu
            * self
                .violations()
                .filter(|v| *v > 0.0)
                .map(|v| v * v)
                .sum::<f64>()
    }
}

/// Rate part of the objective at one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    /// Objective rate term, bits/s/Hz.
    pub spectral: f64,
    /// Same term converted to bits/s.
    pub bps: f64,
}

/// How users share the channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Access {
    /// Superposition within each cluster; clusters split the band equally.
    Noma(Clustering),
    /// Every user holds `1/N` of the band with no interference.
    Oma,
}

/// One optimization problem: a scenario, an access scheme and a penalty.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    scenario: &'a Scenario,
    access: Access,
    penalty: PenaltyConfig,
    model: ChannelModel,
}

impl<'a> Problem<'a> {
    pub fn noma(
        scenario: &'a Scenario,
        clustering: Clustering,
        penalty: PenaltyConfig,
    ) -> Result<Self> {
        if clustering.num_users() != scenario.num_users() {
            return Err(Error::DimensionMismatch {
                expected: scenario.num_users(),
                got: clustering.num_users(),
            });
        }
        Self::new(scenario, Access::Noma(clustering), penalty)
    }

    pub fn oma(scenario: &'a Scenario, penalty: PenaltyConfig) -> Result<Self> {
        Self::new(scenario, Access::Oma, penalty)
    }

    fn new(scenario: &'a Scenario, access: Access, penalty: PenaltyConfig) -> Result<Self> {
        penalty.validate()?;
        Ok(Self {
            scenario,
            access,
            penalty,
            model: scenario.channel_model(),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn access(&self) -> &Access {
        &self.access
    }

    pub fn penalty_config(&self) -> &PenaltyConfig {
        &self.penalty
    }

    /// `N + 2`
    pub fn dimension(&self) -> usize {
        self.scenario.num_users() + 2
    }

    /// UAV coordinates in `[−R, R]`, powers in `[0, P_max]`.
    pub fn search_space(&self) -> SearchSpace {
        let cfg = &self.scenario.config;
        let n = self.scenario.num_users();
        let mut lower = vec![-cfg.cell_radius, -cfg.cell_radius];
        let mut upper = vec![cfg.cell_radius, cfg.cell_radius];
        lower.extend(std::iter::repeat_n(0.0, n));
        upper.extend(std::iter::repeat_n(cfg.max_total_power, n));
        SearchSpace::new(lower, upper).expect("validated config gives a non-empty box")
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dimension() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            })
        }
    }

    /// Gains at the candidate's UAV position, in solution-vector order.
    fn ordered_gains(&self, x: &[f64]) -> Vec<f64> {
        let users = self.scenario.users();
        let h = self.scenario.uav_altitude();
        let gain = |u: usize| self.model.gain(x[0], x[1], h, &users[u]);
        match &self.access {
            Access::Noma(c) => c.clusters().iter().flatten().map(|&u| gain(u)).collect(),
            Access::Oma => (0..users.len()).map(gain).collect(),
        }
    }

    fn evaluate(&self, x: &[f64]) -> (RateSummary, FeasibilityReport) {
        let cfg = &self.scenario.config;
        let powers = &x[2..];
        let gains = self.ordered_gains(x);
        let mut qos = Vec::with_capacity(powers.len());
        let mut sic = Vec::new();
        let mut spectral = 0.0;
        let bps;
        match &self.access {
            Access::Noma(c) => {
                let k_total = c.num_clusters();
                let mut offset = 0;
                for cluster in c.clusters() {
                    let m = cluster.len();
                    let g = &gains[offset..offset + m];
                    let p = &powers[offset..offset + m];
                    for i in 0..m {
                        let r = member_rate(g, p, i, cfg.noise_power);
                        spectral += user_weight(k_total, i + 1) * r;
                        qos.push(cfg.qos_min_rate - r);
                    }
                    cluster_sic_margins(g, p, cfg, &mut sic);
                    offset += m;
                }
                for v in &mut sic {
                    *v = -*v;
                }
                bps = spectral * cfg.bandwidth_hz / k_total as f64;
            }
            Access::Oma => {
                for (g, p) in gains.iter().zip(powers) {
                    let r = oma_spectral_efficiency(*g, *p, cfg);
                    spectral += r;
                    qos.push(cfg.qos_min_rate - r);
                }
                bps = spectral * cfg.bandwidth_hz / powers.len() as f64;
            }
        }
        let total: f64 = powers.iter().sum();
        let root_sum: f64 = powers.iter().map(|p| p.max(0.0).sqrt()).sum();
        let report = FeasibilityReport::new(
            total - cfg.max_total_power,
            root_sum - cfg.intensity_limit(),
            sic,
            qos,
            x[0] * x[0] + x[1] * x[1] - cfg.cell_radius * cfg.cell_radius,
        );
        (RateSummary { spectral, bps }, report)
    }

    pub fn report(&self, x: &[f64]) -> Result<FeasibilityReport> {
        self.check(x)?;
        Ok(self.evaluate(x).1)
    }

    pub fn rates(&self, x: &[f64]) -> Result<RateSummary> {
        self.check(x)?;
        Ok(self.evaluate(x).0)
    }

    pub fn penalty(&self, x: &[f64]) -> Result<f64> {
        Ok(self.report(x)?.penalty(&self.penalty))
    }

    /// Rate term plus penalty. Panics if `x` has the wrong length; this is the
    /// optimizer's hot path.
    pub fn fitness(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension(), "solution vector length");
        let (rates, report) = self.evaluate(x);
        rates.spectral + report.penalty(&self.penalty)
    }
}

/// Penalty `P(X) ≤ 0` of a NOMA candidate.
pub fn penalty(
    solution: &SolutionVector,
    clustering: &Clustering,
    scenario: &Scenario,
    config: &PenaltyConfig,
) -> Result<f64> {
    Problem::noma(scenario, clustering.clone(), *config)?.penalty(solution.as_slice())
}

/// Weighted sum-rate plus penalty of a NOMA candidate.
pub fn fitness(
    solution: &SolutionVector,
    clustering: &Clustering,
    scenario: &Scenario,
    config: &PenaltyConfig,
) -> Result<f64> {
    let problem = Problem::noma(scenario, clustering.clone(), *config)?;
    problem.check(solution.as_slice())?;
    Ok(problem.fitness(solution.as_slice()))
}

pub fn feasibility_report(
    solution: &SolutionVector,
    clustering: &Clustering,
    scenario: &Scenario,
) -> Result<FeasibilityReport> {
    Problem::noma(scenario, clustering.clone(), PenaltyConfig::default())?
        .report(solution.as_slice())
}

/// Optimizer box for a NOMA problem over `clustering`.
pub fn build_search_space(scenario: &Scenario, clustering: &Clustering) -> Result<SearchSpace> {
    Ok(Problem::noma(scenario, clustering.clone(), PenaltyConfig::default())?.search_space())
}
