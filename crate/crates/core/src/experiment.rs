//! Scenario generation, the five schemes, parameter sweeps and CSV output.
//!
//! Schemes:
//!
//! * `upup`: centroid placement, sort-and-split pairing, then HHO over UAV
//!   position and powers.
//! * `oma`: every user gets `1/N` of the band; HHO over UAV position and
//!   powers of the interference-free sum rate.
//! * `cnoma`: one cluster holding all users, otherwise as `upup`.
//! * `fixedp`: UAV pinned to a random point on the cell edge; HHO over powers.
//! * `rclustering`: random pairs, otherwise as `upup`.
//!
//! Every realization derives its seeds from the master seed, so the same
//! user drop is shared by all schemes and all sweep values.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    centroid_placement, grand_cluster, random_pairing, sort_and_pair, Scenario,
};
use crate::error::{Error, Result};
use crate::hho::{optimize, HhoConfig, OptimizationTrace, SearchSpace};
use crate::noma::{dbm_to_watts, SystemConfig};
use crate::penalty::{FeasibilityReport, PenaltyConfig, Problem};
use crate::vlc::{Position3D, VlcParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Upup,
    Oma,
    Cnoma,
    FixedP,
    RClustering,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Upup,
        Scheme::Oma,
        Scheme::Cnoma,
        Scheme::FixedP,
        Scheme::RClustering,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Upup => "upup",
            Scheme::Oma => "oma",
            Scheme::Cnoma => "cnoma",
            Scheme::FixedP => "fixedp",
            Scheme::RClustering => "rclustering",
        }
    }

    /// Whether the scheme needs an even number of users.
    pub fn needs_pairs(self) -> bool {
        matches!(self, Scheme::Upup | Scheme::FixedP | Scheme::RClustering)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme {s:?}")))
    }
}

/// Parses `"all"` or a comma-separated scheme list.
pub fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Scheme::ALL.to_vec());
    }
    s.split(',').map(str::parse).collect()
}

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVar {
    None,
    /// Total power budget, milliwatts.
    Pmax,
    /// Receiver field of view, degrees.
    Fov,
    /// Cell radius, meters.
    Radius,
    NumUsers,
}

impl SweepVar {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVar::None => "none",
            SweepVar::Pmax => "pmax_mw",
            SweepVar::Fov => "fov_deg",
            SweepVar::Radius => "radius_m",
            SweepVar::NumUsers => "num_users",
        }
    }

    /// Values used for the published figures.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVar::None => vec![0.0],
            SweepVar::Pmax => vec![20.0, 40.0, 60.0, 80.0, 100.0],
            SweepVar::Fov => vec![40.0, 45.0, 50.0, 55.0, 60.0, 65.0],
            SweepVar::Radius => vec![4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
            SweepVar::NumUsers => vec![4.0, 8.0, 12.0, 16.0, 20.0],
        }
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(SweepVar::None),
            "pmax" | "pmax_mw" => Ok(SweepVar::Pmax),
            "fov" | "fov_deg" => Ok(SweepVar::Fov),
            "radius" | "radius_m" => Ok(SweepVar::Radius),
            "num_users" | "users" => Ok(SweepVar::NumUsers),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep variable {other:?}"
            ))),
        }
    }
}

/// Full parameter set of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub vlc: VlcParams,
    pub hho: HhoConfig,
    pub penalty: PenaltyConfig,
    pub uav_altitude: f64,
    /// Side of the square users are dropped in; follows the cell radius when
    /// unset.
    pub user_area_side: Option<f64>,
    pub num_users: usize,
    pub realizations: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            vlc: VlcParams::default(),
            hho: HhoConfig::default(),
            penalty: PenaltyConfig::default(),
            uav_altitude: 3.0,
            user_area_side: None,
            num_users: 20,
            realizations: 100,
            master_seed: 1,
        }
    }
}

const CONFIG_KEYS: &[&str] = &[
    "num_users",
    "realizations",
    "seed",
    "noise_power_dbm",
    "max_total_power_w",
    "dc_offset",
    "peak_intensity",
    "pam_coefficient",
    "min_sic_gap",
    "qos_min_rate",
    "bandwidth_hz",
    "cell_radius_m",
    "user_area_side_m",
    "uav_altitude_m",
    "semiangle_deg",
    "fov_deg",
    "detection_area_m2",
    "optical_filter_gain",
    "refractive_index",
    "population",
    "max_iterations",
    "levy_beta",
    "penalty_factor",
];

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.vlc.validate()?;
        self.hho.validate()?;
        self.penalty.validate()?;
        if !(self.uav_altitude > 0.0) {
            return Err(Error::InvalidConfig(
                "uav_altitude_m must be positive".into(),
            ));
        }
        if let Some(side) = self.user_area_side {
            if !(side > 0.0) {
                return Err(Error::InvalidConfig(
                    "user_area_side_m must be positive".into(),
                ));
            }
        }
        if self.num_users < 2 {
            return Err(Error::InvalidConfig("num_users must be at least 2".into()));
        }
        if self.realizations < 1 {
            return Err(Error::InvalidConfig(
                "realizations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn area_side(&self) -> f64 {
        self.user_area_side.unwrap_or(self.system.cell_radius)
    }

    /// Sets one `key = value` entry. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse()
                .map_err(|_| format!("cannot parse {v:?} as a number"))
        }
        let v = value.trim();
        match key.trim() {
            "num_users" => self.num_users = num(v)?,
            "realizations" => self.realizations = num(v)?,
            "seed" => self.master_seed = num(v)?,
            "noise_power_dbm" => self.system.noise_power = dbm_to_watts(num(v)?),
            "max_total_power_w" => self.system.max_total_power = num(v)?,
            "dc_offset" => self.system.dc_offset = num(v)?,
            "peak_intensity" => self.system.peak_intensity = num(v)?,
            "pam_coefficient" => self.system.pam_coefficient = num(v)?,
            "min_sic_gap" => self.system.min_sic_gap = num(v)?,
            "qos_min_rate" => self.system.qos_min_rate = num(v)?,
            "bandwidth_hz" => self.system.bandwidth_hz = num(v)?,
            "cell_radius_m" => self.system.cell_radius = num(v)?,
            "user_area_side_m" => self.user_area_side = Some(num(v)?),
            "uav_altitude_m" => self.uav_altitude = num(v)?,
            "semiangle_deg" => self.vlc.semiangle_half_power = num(v)?,
            "fov_deg" => self.vlc.fov = num(v)?,
            "detection_area_m2" => self.vlc.detection_area = num(v)?,
            "optical_filter_gain" => self.vlc.optical_filter_gain = num(v)?,
            "refractive_index" => self.vlc.refractive_index = num(v)?,
            "population" => self.hho.population = num(v)?,
            "max_iterations" => self.hho.max_iterations = num(v)?,
            "levy_beta" => self.hho.levy_beta = num(v)?,
            "penalty_factor" => self.penalty.mu = num(v)?,
            other => {
                return Err(format!(
                    "unknown key {other:?}; expected one of {}",
                    CONFIG_KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` text. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::ConfigFile {
                path: path.to_path_buf(),
                line: i + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            self.set(key, value).map_err(err)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(&std::fs::read_to_string(path)?, path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration at one sweep point.
    pub fn at(&self, var: SweepVar, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        match var {
            SweepVar::None => {}
            SweepVar::Pmax => cfg.system.max_total_power = value * 1e-3,
            SweepVar::Fov => cfg.vlc.fov = value,
            SweepVar::Radius => cfg.system.cell_radius = value,
            SweepVar::NumUsers => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(Error::InvalidConfig(format!("invalid user count {value}")));
                }
                cfg.num_users = value as usize;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// What to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub schemes: Vec<Scheme>,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub base: ExperimentConfig,
    /// Record wall-clock time per run. Disable for byte-reproducible output.
    pub record_wall_time: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes selected".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep has no values".into()));
        }
        self.base.validate()?;
        for &v in &self.values {
            self.base.at(self.sweep, v)?;
        }
        Ok(())
    }
}

/// Mixes `tags` into `seed` (SplitMix64 finalizer per step).
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut s = seed;
    for &t in tags {
        let mut z = s
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(t.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        s = z ^ (z >> 31);
    }
    s
}

const TAG_HHO: u64 = 1;
const TAG_PAIRING: u64 = 2;
const TAG_FIXED_UAV: u64 = 3;

/// Seed of the user drop for one realization.
pub fn realization_seed(master_seed: u64, realization: usize) -> u64 {
    derive_seed(master_seed, &[realization as u64])
}

/// Drops `num_users` users uniformly in a square of side `area_side`
/// centered at the origin.
///
/// Positions are drawn on the unit square and then scaled, so the same seed
/// gives geometrically similar drops for different area sizes.
pub fn generate_scenario(
    num_users: usize,
    area_side: f64,
    altitude: f64,
    seed: u64,
    config: SystemConfig,
    vlc: VlcParams,
) -> Result<Scenario> {
    if num_users < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 users, got {num_users}"
        )));
    }
    if !(area_side > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "area side must be positive, got {area_side}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = (0..num_users)
        .map(|_| {
            let u: f64 = rng.random::<f64>() - 0.5;
            let v: f64 = rng.random::<f64>() - 0.5;
            Position3D::ground(u * area_side, v * area_side)
        })
        .collect();
    Scenario::new(users, altitude, config, vlc)
}

/// Outcome of one scheme on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: Scheme,
    /// Weighted sum-rate, bits/s.
    pub weighted_sum_rate_bps: f64,
    /// Objective rate term, bits/s/Hz.
    pub weighted_sum_rate_bpshz: f64,
    pub feasible: bool,
    pub penalty: f64,
    pub report: FeasibilityReport,
    /// Full `[x, y, powers…]` vector of the best candidate.
    pub solution: Vec<f64>,
    /// Cluster membership used, weakest first; one singleton per user for OMA.
    pub clusters: Vec<Vec<usize>>,
    pub trace: OptimizationTrace,
    pub wall_time: Duration,
}

impl SchemeResult {
    pub fn uav(&self) -> (f64, f64) {
        (self.solution[0], self.solution[1])
    }

    pub fn powers(&self) -> &[f64] {
        &self.solution[2..]
    }
}

fn finish(
    scheme: Scheme,
    problem: &Problem<'_>,
    solution: Vec<f64>,
    trace: OptimizationTrace,
    started: Instant,
) -> Result<SchemeResult> {
    let rates = problem.rates(&solution)?;
    let report = problem.report(&solution)?;
    let penalty = report.penalty(problem.penalty_config());
    let clusters = match problem.access() {
        crate::penalty::Access::Noma(c) => c.clusters().to_vec(),
        crate::penalty::Access::Oma => (0..problem.scenario().num_users())
            .map(|u| vec![u])
            .collect(),
    };
    Ok(SchemeResult {
        scheme,
        weighted_sum_rate_bps: rates.bps,
        weighted_sum_rate_bpshz: rates.spectral,
        feasible: report.overall_feasible,
        penalty,
        report,
        solution,
        clusters,
        trace,
        wall_time: started.elapsed(),
    })
}

fn joint(
    scheme: Scheme,
    problem: &Problem<'_>,
    hho: &HhoConfig,
    started: Instant,
) -> Result<SchemeResult> {
    let trace = optimize(&problem.search_space(), hho, |x| problem.fitness(x))?;
    let solution = trace.best_point.clone();
    finish(scheme, problem, solution, trace, started)
}

/// Centroid placement, sort-and-split pairing, joint HHO search.
pub fn run_upup(
    scenario: &Scenario,
    hho: &HhoConfig,
    penalty: &PenaltyConfig,
) -> Result<SchemeResult> {
    let started = Instant::now();
    let clustering = sort_and_pair(scenario, centroid_placement(scenario)?)?;
    let problem = Problem::noma(scenario, clustering, *penalty)?;
    joint(Scheme::Upup, &problem, hho, started)
}

/// A point on the cell edge at a uniformly random angle, nudged inward by at
/// most a few ulps so that it never violates the disc constraint.
pub fn random_edge_point(radius: f64, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = rng.random::<f64>() * std::f64::consts::TAU;
    let (mut x, mut y) = (radius * angle.cos(), radius * angle.sin());
    while x * x + y * y > radius * radius {
        x = x.next_down_toward_zero();
        y = y.next_down_toward_zero();
    }
    (x, y)
}

trait TowardZero {
    fn next_down_toward_zero(self) -> Self;
}

impl TowardZero for f64 {
    fn next_down_toward_zero(self) -> Self {
        if self == 0.0 {
            self
        } else {
            f64::from_bits(self.to_bits() - 1)
        }
    }
}

/// Runs one of the comparison schemes. `seed` drives the random elements of
/// `fixedp` (edge point) and `rclustering` (pairing).
pub fn run_baseline(
    scheme: Scheme,
    scenario: &Scenario,
    hho: &HhoConfig,
    penalty: &PenaltyConfig,
    seed: u64,
) -> Result<SchemeResult> {
    let started = Instant::now();
    match scheme {
        Scheme::Upup => run_upup(scenario, hho, penalty),
        Scheme::Oma => {
            let problem = Problem::oma(scenario, *penalty)?;
            joint(scheme, &problem, hho, started)
        }
        Scheme::Cnoma => {
            let clustering = grand_cluster(scenario, centroid_placement(scenario)?)?;
            let problem = Problem::noma(scenario, clustering, *penalty)?;
            joint(scheme, &problem, hho, started)
        }
        Scheme::RClustering => {
            let clustering = random_pairing(scenario, seed)?;
            let problem = Problem::noma(scenario, clustering, *penalty)?;
            joint(scheme, &problem, hho, started)
        }
        Scheme::FixedP => {
            let clustering = sort_and_pair(scenario, centroid_placement(scenario)?)?;
            let problem = Problem::noma(scenario, clustering, *penalty)?;
            let (ux, uy) = random_edge_point(scenario.config.cell_radius, seed);
            let full = problem.search_space();
            let space = SearchSpace::new(full.lower()[2..].to_vec(), full.upper()[2..].to_vec())?;
            let with_uav = |p: &[f64]| {
                let mut x = Vec::with_capacity(p.len() + 2);
                x.extend([ux, uy]);
                x.extend_from_slice(p);
                x
            };
            let trace = optimize(&space, hho, |p| problem.fitness(&with_uav(p)))?;
            let solution = with_uav(&trace.best_point);
            finish(scheme, &problem, solution, trace, started)
        }
    }
}

/// Runs `scheme` with seeds derived from the realization seed.
pub fn run_scheme(
    scheme: Scheme,
    scenario: &Scenario,
    cfg: &ExperimentConfig,
    scenario_seed: u64,
) -> Result<SchemeResult> {
    let hho = cfg.hho.with_seed(derive_seed(scenario_seed, &[TAG_HHO]));
    let aux = match scheme {
        Scheme::FixedP => derive_seed(scenario_seed, &[TAG_FIXED_UAV]),
        _ => derive_seed(scenario_seed, &[TAG_PAIRING]),
    };
    run_baseline(scheme, scenario, &hho, &cfg.penalty, aux)
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub realization: usize,
    pub seed: u64,
    pub weighted_sum_rate_bps: f64,
    pub weighted_sum_rate_bpshz: f64,
    pub feasible: bool,
    pub uav_x: f64,
    pub uav_y: f64,
    pub wall_time_ms: f64,
}

/// Scenario for one realization of `cfg`.
pub fn realization_scenario(cfg: &ExperimentConfig, realization: usize) -> Result<(Scenario, u64)> {
    let seed = realization_seed(cfg.master_seed, realization);
    let scenario = generate_scenario(
        cfg.num_users,
        cfg.area_side(),
        cfg.uav_altitude,
        seed,
        cfg.system,
        cfg.vlc,
    )?;
    Ok((scenario, seed))
}

/// Runs every (sweep value × realization × scheme) combination. Rows come
/// back ordered by sweep value, then realization, then scheme order in the
/// `ExperimentSpec`, independent of scheduling.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    run_sweep_detailed(spec).map(|runs| runs.into_iter().map(|r| r.row).collect())
}

/// A results row together with the full scheme result, when the run succeeded.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub row: ResultRow,
    pub result: Option<SchemeResult>,
}

pub fn run_sweep_detailed(spec: &ExperimentSpec) -> Result<Vec<SweepRun>> {
    spec.validate()?;
    let mut tasks = Vec::new();
    for &value in &spec.values {
        for realization in 0..spec.base.realizations {
            for &scheme in &spec.schemes {
                tasks.push((value, realization, scheme));
            }
        }
    }
    let runs = tasks
        .into_par_iter()
        .map(|(value, realization, scheme)| -> Result<SweepRun> {
            let cfg = spec.base.at(spec.sweep, value)?;
            let (scenario, seed) = realization_scenario(&cfg, realization)?;
            let outcome = run_scheme(scheme, &scenario, &cfg, seed);
            let (rate_bps, rate_bpshz, feasible, (uav_x, uav_y), wall) = match &outcome {
                Ok(r) => (
                    r.weighted_sum_rate_bps,
                    r.weighted_sum_rate_bpshz,
                    r.feasible,
                    r.uav(),
                    r.wall_time,
                ),
                Err(_) => (
                    f64::NAN,
                    f64::NAN,
                    false,
                    (f64::NAN, f64::NAN),
                    Duration::ZERO,
                ),
            };
            Ok(SweepRun {
                row: ResultRow {
                    scheme,
                    sweep_var: spec.sweep.as_str().to_string(),
                    sweep_value: value,
                    realization,
                    seed,
                    weighted_sum_rate_bps: rate_bps,
                    weighted_sum_rate_bpshz: rate_bpshz,
                    feasible,
                    uav_x,
                    uav_y,
                    wall_time_ms: if spec.record_wall_time {
                        wall.as_secs_f64() * 1e3
                    } else {
                        0.0
                    },
                },
                result: outcome.ok(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(runs)
}

/// Mean over realizations for one (scheme, sweep value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub realizations: usize,
    pub mean_weighted_sum_rate_bps: f64,
    pub mean_weighted_sum_rate_bpshz: f64,
    pub feasible_fraction: f64,
}

/// Averages rows per (scheme, sweep value), in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out: Vec<(SummaryRow, usize)> = Vec::new();
    for r in rows {
        let idx = out.iter().position(|(s, _)| {
            s.scheme == r.scheme && s.sweep_value.to_bits() == r.sweep_value.to_bits()
        });
        let idx = idx.unwrap_or_else(|| {
            out.push((
                SummaryRow {
                    scheme: r.scheme,
                    sweep_var: r.sweep_var.clone(),
                    sweep_value: r.sweep_value,
                    realizations: 0,
                    mean_weighted_sum_rate_bps: 0.0,
                    mean_weighted_sum_rate_bpshz: 0.0,
                    feasible_fraction: 0.0,
                },
                0,
            ));
            out.len() - 1
        });
        let (s, feasible) = &mut out[idx];
        s.realizations += 1;
        s.mean_weighted_sum_rate_bps += r.weighted_sum_rate_bps;
        s.mean_weighted_sum_rate_bpshz += r.weighted_sum_rate_bpshz;
        *feasible += usize::from(r.feasible);
    }
    out.into_iter()
        .map(|(mut s, feasible)| {
            let n = s.realizations as f64;
            s.mean_weighted_sum_rate_bps /= n;
            s.mean_weighted_sum_rate_bpshz /= n;
            s.feasible_fraction = feasible as f64 / n;
            s
        })
        .collect()
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ConvergenceRow {
    iteration: usize,
    best_fitness: f64,
}

/// Writes `iteration,best_fitness` with 1-based iterations.
pub fn write_convergence_series<W: Write>(values: &[f64], writer: W) -> Result<()> {
    let rows: Vec<ConvergenceRow> = values
        .iter()
        .enumerate()
        .map(|(i, &best_fitness)| ConvergenceRow {
            iteration: i + 1,
            best_fitness,
        })
        .collect();
    write_csv(&rows, writer)
}

pub fn write_convergence(trace: &OptimizationTrace, path: &Path) -> Result<()> {
    write_convergence_series(
        &trace.best_fitness_per_iteration,
        std::fs::File::create(path)?,
    )
}

pub fn read_convergence(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<ConvergenceRow>()
        .map(|row| Ok(row?.best_fitness))
        .collect()
}

/// Best-so-far traces of UPUP for one user count, averaged over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub num_users: usize,
    pub mean_trace: Vec<f64>,
    /// Final results of every realization.
    pub finals: Vec<ResultRow>,
}

/// Runs UPUP for each user count and averages the convergence traces.
pub fn run_convergence(
    base: &ExperimentConfig,
    user_counts: &[usize],
    record_wall_time: bool,
) -> Result<Vec<ConvergenceCurve>> {
    let spec = ExperimentSpec {
        schemes: vec![Scheme::Upup],
        sweep: SweepVar::NumUsers,
        values: user_counts.iter().map(|&n| n as f64).collect(),
        base: base.clone(),
        record_wall_time,
    };
    let runs = run_sweep_detailed(&spec)?;
    let iterations = base.hho.max_iterations;
    user_counts
        .iter()
        .map(|&n| {
            let group: Vec<&SweepRun> = runs
                .iter()
                .filter(|r| r.row.sweep_value == n as f64)
                .collect();
            let mut mean = vec![0.0; iterations];
            for run in &group {
                let result = run
                    .result
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig(format!("UPUP failed for {n} users")))?;
                for (m, v) in mean
                    .iter_mut()
                    .zip(&result.trace.best_fitness_per_iteration)
                {
                    *m += v / group.len() as f64;
                }
            }
            Ok(ConvergenceCurve {
                num_users: n,
                mean_trace: mean,
                finals: group.iter().map(|r| r.row.clone()).collect(),
            })
        })
        .collect()
}
