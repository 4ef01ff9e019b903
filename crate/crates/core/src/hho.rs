//! Harris Hawks Optimization over a bounded box, maximizing a fitness.
//!
//! Each iteration evaluates every hawk, updates the prey (best point so far)
//! and then moves every hawk according to its escaping energy
//! `E = 2·E0·(1 − t/T)`, `E0 ~ U(−1, 1)`:
//!
//! * `|E| ≥ 1`: exploration, either perching relative to a random hawk or
//!   relative to the prey and the flock mean (equiprobable).
//! * `|E| < 1`: exploitation. With escape draw `r ≥ 0.5` the hawk performs a
//!   soft (`|E| ≥ 0.5`) or hard (`|E| < 0.5`) besiege. With `r < 0.5` it
//!   tries progressive rapid dives: a besiege step and, failing that, the same
//!   step plus a Lévy flight, each kept only when it improves the hawk.
//!
//! Every candidate is clamped to the box before evaluation.
//!
//! Random numbers come from one `ChaCha8Rng` seeded with `rng_seed` and are
//! drawn in a fixed order: the initial population row by row, then per
//! iteration and per hawk `E0`, the branch draw(s) and the step vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidConfig(
                "search space has no dimensions".into(),
            ));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if let Some(d) = (0..lower.len())
            .find(|&d| !(lower[d] < upper[d] && lower[d].is_finite() && upper[d].is_finite()))
        {
            return Err(Error::InvalidConfig(format!(
                "dimension {d}: lower bound {} must be below upper bound {}",
                lower[d], upper[d]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval in every dimension.
    pub fn uniform(dimension: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dimension], vec![upper; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HhoConfig {
    /// Number of hawks.
    pub population: usize,
    pub max_iterations: usize,
    pub rng_seed: u64,
    /// Lévy flight index.
    pub levy_beta: f64,
}

impl Default for HhoConfig {
    fn default() -> Self {
        Self {
            population: 30,
            max_iterations: 350,
            rng_seed: 0,
            levy_beta: 1.5,
        }
    }
}

impl HhoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidConfig(format!(
                "population must be at least 2, got {}",
                self.population
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.levy_beta > 0.0 && self.levy_beta <= 2.0) {
            return Err(Error::InvalidConfig(format!(
                "levy_beta must lie in (0, 2], got {}",
                self.levy_beta
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self }
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    /// Best fitness found up to and including each iteration.
    pub best_fitness_per_iteration: Vec<f64>,
    pub best_point: Vec<f64>,
    pub best_fitness: f64,
    /// Fitness evaluations of the hawks' positions, one per hawk per iteration.
    pub population_evaluations: usize,
    /// Extra evaluations spent on rapid-dive candidates.
    pub dive_evaluations: usize,
}

impl OptimizationTrace {
    /// Total number of fitness evaluations.
    pub fn evaluations(&self) -> usize {
        self.population_evaluations + self.dive_evaluations
    }
}

/// Mantegna's generator for Lévy-stable steps.
struct Levy {
    beta: f64,
    sigma: f64,
}

impl Levy {
    fn new(beta: f64) -> Self {
        let num = gamma(1.0 + beta) * (std::f64::consts::PI * beta / 2.0).sin();
        let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
        Self {
            beta,
            sigma: (num / den).powf(1.0 / beta),
        }
    }

    fn step<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample::<f64, _>(StandardNormal) * self.sigma;
        let v: f64 = rng.sample(StandardNormal);
        0.01 * u / v.abs().powf(1.0 / self.beta)
    }
}

struct Best {
    point: Vec<f64>,
    fitness: f64,
}

impl Best {
    fn offer(&mut self, point: &[f64], fitness: f64) {
        if fitness > self.fitness {
            self.fitness = fitness;
            self.point.copy_from_slice(point);
        }
    }
}

/// Maximizes `fitness` over `space`.
///
/// `fitness` must be defined on the whole box. NaN values are treated as
/// `-inf`.
pub fn optimize<F>(space: &SearchSpace, config: &HhoConfig, fitness: F) -> Result<OptimizationTrace>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let dim = space.dimension();
    let pop = config.population;
    let iterations = config.max_iterations;
    let (lb, ub) = (space.lower(), space.upper());
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let levy = Levy::new(config.levy_beta);

    let eval = |x: &[f64]| {
        let f = fitness(x);
        if f.is_nan() {
            f64::NEG_INFINITY
        } else {
            f
        }
    };

    let mut hawks: Vec<Vec<f64>> = (0..pop)
        .map(|_| {
            (0..dim)
                .map(|d| lb[d] + rng.random::<f64>() * (ub[d] - lb[d]))
                .collect()
        })
        .collect();
    let mut scores = vec![f64::NEG_INFINITY; pop];
    let mut best = Best {
        point: hawks[0].clone(),
        fitness: f64::NEG_INFINITY,
    };
    let mut trace = Vec::with_capacity(iterations);
    let mut population_evaluations = 0;
    let mut dive_evaluations = 0;

    let mut mean = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut z = vec![0.0; dim];

    for t in 0..iterations {
        for (hawk, score) in hawks.iter_mut().zip(scores.iter_mut()) {
            space.clamp(hawk);
            *score = eval(hawk);
            population_evaluations += 1;
            best.offer(hawk, *score);
        }

        let decay = 2.0 * (1.0 - t as f64 / iterations as f64);
        for (d, m) in mean.iter_mut().enumerate() {
            *m = hawks.iter().map(|h| h[d]).sum::<f64>() / pop as f64;
        }
        let prey = best.point.clone();

        for i in 0..pop {
            let e0 = 2.0 * rng.random::<f64>() - 1.0;
            let energy = decay * e0;

            if energy.abs() >= 1.0 {
                let q: f64 = rng.random();
                let partner = rng.random_range(0..pop);
                if q < 0.5 {
                    let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                    let partner = hawks[partner].clone();
                    let hawk = &mut hawks[i];
                    for d in 0..dim {
                        hawk[d] = partner[d] - r1 * (partner[d] - 2.0 * r2 * hawk[d]).abs();
                    }
                } else {
                    let (r3, r4): (f64, f64) = (rng.random(), rng.random());
                    let hawk = &mut hawks[i];
                    for d in 0..dim {
                        hawk[d] = (prey[d] - mean[d]) - r3 * (lb[d] + r4 * (ub[d] - lb[d]));
                    }
                }
                continue;
            }

            let r: f64 = rng.random();
            let jump = 2.0 * (1.0 - rng.random::<f64>());
            let soft = energy.abs() >= 0.5;
            let hawk = &mut hawks[i];

            if r >= 0.5 {
                if soft {
                    for d in 0..dim {
                        hawk[d] = (prey[d] - hawk[d]) - energy * (jump * prey[d] - hawk[d]).abs();
                    }
                } else {
                    for d in 0..dim {
                        hawk[d] = prey[d] - energy * (prey[d] - hawk[d]).abs();
                    }
                }
                continue;
            }

            // progressive rapid dives
            for d in 0..dim {
                let anchor = if soft { hawk[d] } else { mean[d] };
                y[d] = prey[d] - energy * (jump * prey[d] - anchor).abs();
            }
            space.clamp(&mut y);
            let fy = eval(&y);
            dive_evaluations += 1;
            best.offer(&y, fy);
            if fy > scores[i] {
                hawk.copy_from_slice(&y);
                scores[i] = fy;
                continue;
            }
            for d in 0..dim {
                let s: f64 = rng.random();
                z[d] = y[d] + s * levy.step(&mut rng);
            }
            space.clamp(&mut z);
            let fz = eval(&z);
            dive_evaluations += 1;
            best.offer(&z, fz);
            if fz > scores[i] {
                hawk.copy_from_slice(&z);
                scores[i] = fz;
            }
        }

        trace.push(best.fitness);
    }

    Ok(OptimizationTrace {
        best_fitness_per_iteration: trace,
        best_point: best.point,
        best_fitness: best.fitness,
        population_evaluations,
        dive_evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    fn sphere(x: &[f64]) -> f64 {
        -x.iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn levy_sigma_for_default_beta() {
        // Mantegna's σ for β = 1.5
        let l = Levy::new(1.5);
        assert!((l.sigma - 0.6965745025576967).abs() < 1e-12, "{}", l.sigma);
    }

    #[test]
    fn sphere_2d_reaches_origin() {
        let space = SearchSpace::uniform(2, -10.0, 10.0).unwrap();
        for seed in 0..20 {
            let t = optimize(&space, &HhoConfig::default().with_seed(seed), sphere).unwrap();
            assert!(t.best_fitness >= -1e-2, "seed {seed}: {}", t.best_fitness);
        }
    }

    #[test]
    fn shifted_parabola_1d() {
        let space = SearchSpace::uniform(1, 0.0, 10.0).unwrap();
        let t = optimize(&space, &HhoConfig::default().with_seed(3), |x| {
            -(x[0] - 3.0).powi(2)
        })
        .unwrap();
        assert!((t.best_point[0] - 3.0).abs() < 0.1);
    }

    #[test]
    fn constant_fitness_gives_flat_trace() {
        let space = SearchSpace::uniform(3, -1.0, 1.0).unwrap();
        let cfg = HhoConfig {
            max_iterations: 20,
            ..HhoConfig::default()
        };
        let t = optimize(&space, &cfg, |_| 4.2).unwrap();
        assert!(t.best_fitness_per_iteration.iter().all(|&f| f == 4.2));
        assert_eq!(t.best_fitness_per_iteration.len(), 20);
    }

    #[test]
    fn evaluations_stay_in_box_and_trace_is_monotone() {
        let space = SearchSpace::new(vec![-1.0, 0.0, 5.0], vec![1.0, 0.02, 6.0]).unwrap();
        let cfg = HhoConfig {
            population: 10,
            max_iterations: 60,
            rng_seed: 11,
            levy_beta: 1.5,
        };
        let seen = RefCell::new(0usize);
        let t = optimize(&space, &cfg, |x| {
            assert!(space.contains(x), "{x:?}");
            *seen.borrow_mut() += 1;
            (x[0] * 3.0).sin() + x[1] * 10.0 - (x[2] - 5.5).powi(2)
        })
        .unwrap();
        assert!(t
            .best_fitness_per_iteration
            .windows(2)
            .all(|w| w[1] >= w[0]));
        assert_eq!(*seen.borrow(), t.evaluations());
        assert_eq!(t.population_evaluations, 600);
        assert!(t.evaluations() <= 3 * 600);
        assert!(space.contains(&t.best_point));
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let space = SearchSpace::uniform(4, -5.0, 5.0).unwrap();
        let cfg = HhoConfig::default().with_seed(99);
        let f = |x: &[f64]| -x.iter().map(|v| (v - 1.0).abs()).sum::<f64>();
        let a = optimize(&space, &cfg, f).unwrap();
        let b = optimize(&space, &cfg, f).unwrap();
        let bits = |t: &OptimizationTrace| -> Vec<u64> {
            t.best_fitness_per_iteration
                .iter()
                .map(|v| v.to_bits())
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.best_point, b.best_point);
    }

    #[test]
    fn invalid_config_rejected_before_evaluation() {
        let space = SearchSpace::uniform(2, -1.0, 1.0).unwrap();
        for cfg in [
            HhoConfig {
                population: 1,
                ..HhoConfig::default()
            },
            HhoConfig {
                max_iterations: 0,
                ..HhoConfig::default()
            },
            HhoConfig {
                levy_beta: 0.0,
                ..HhoConfig::default()
            },
        ] {
            let r = optimize(&space, &cfg, |_| panic!("evaluated"));
            assert!(matches!(r, Err(Error::InvalidConfig(_))));
        }
        assert!(SearchSpace::new(vec![1.0], vec![1.0]).is_err());
        assert!(SearchSpace::new(vec![], vec![]).is_err());
        assert!(SearchSpace::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn nan_fitness_never_becomes_best() {
        let space = SearchSpace::uniform(1, -1.0, 1.0).unwrap();
        let cfg = HhoConfig {
            max_iterations: 30,
            ..HhoConfig::default()
        };
        let t = optimize(&space, &cfg, |x| if x[0] > 0.0 { f64::NAN } else { x[0] }).unwrap();
        assert!(t.best_point[0] <= 0.0);
        assert!(t.best_fitness.is_finite());
    }
}
