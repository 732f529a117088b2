//! Bounded particle swarm maximization with seeded, order-stable evaluation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub particles: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Iterations after the initial evaluation (which counts as iteration 0).
    pub iterations: usize,
    /// Relative improvement of the best value below which the swarm counts as stalled.
    pub plateau_tol: f64,
    /// Consecutive stalled iterations before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            particles: 30,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            iterations: 20,
            plateau_tol: 1e-3,
            patience: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    /// Best value after each iteration, starting with iteration 0.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub failures: usize,
}

/// Maximizes `objective` over the box `[lower, upper]`. `None` marks a failed
/// evaluation, scored as minus infinity. Particles of one iteration are
/// evaluated in parallel and merged in particle order, so the result depends
/// only on the seed.
pub fn maximize<F>(objective: F, lower: &[f64], upper: &[f64], params: &PsoParams) -> Result<PsoResult>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let dim = lower.len();
    if dim == 0 || upper.len() != dim || lower.iter().zip(upper).any(|(l, u)| !(u > l)) {
        return Err(Error::InvalidInput("PSO needs non-empty bounds with lower < upper".into()));
    }
    if params.particles == 0 {
        return Err(Error::InvalidInput("PSO needs at least one particle".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let range: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    let mut x: Vec<Vec<f64>> = (0..params.particles)
        .map(|_| (0..dim).map(|d| rng.random_range(lower[d]..=upper[d])).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..params.particles)
        .map(|_| (0..dim).map(|d| rng.random_range(-0.2..=0.2) * range[d]).collect())
        .collect();

    let evaluate = |pts: &[Vec<f64>]| -> Vec<f64> {
        pts.par_iter()
            .map(|p| match objective(p) {
                Some(val) if val.is_finite() => val,
                _ => f64::NEG_INFINITY,
            })
            .collect()
    };

    let mut vals = evaluate(&x);
    let mut evaluations = vals.len();
    let mut failures = vals.iter().filter(|v| **v == f64::NEG_INFINITY).count();
    if failures == vals.len() {
        return Err(Error::AllParticlesFailed(format!("{failures} initial particles")));
    }
    let mut pbest = x.clone();
    let mut pbest_val = vals.clone();
    let mut g = argmax(&vals);
    let mut gbest = x[g].clone();
    let mut gbest_val = vals[g];
    let mut trace = vec![gbest_val];
    let mut stalled = 0;

    for _ in 0..params.iterations {
        for i in 0..params.particles {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                v[i][d] = params.inertia * v[i][d]
                    + params.cognitive * r1 * (pbest[i][d] - x[i][d])
                    + params.social * r2 * (gbest[d] - x[i][d]);
                x[i][d] += v[i][d];
                if x[i][d] < lower[d] {
                    x[i][d] = lower[d];
                    v[i][d] = 0.0;
                } else if x[i][d] > upper[d] {
                    x[i][d] = upper[d];
                    v[i][d] = 0.0;
                }
            }
        }
        vals = evaluate(&x);
        evaluations += vals.len();
        let failed_now = vals.iter().filter(|v| **v == f64::NEG_INFINITY).count();
        failures += failed_now;
        if failed_now > 0 {
            log::warn!("{failed_now} particle evaluations failed");
        }
        for i in 0..params.particles {
            if vals[i] > pbest_val[i] {
                pbest_val[i] = vals[i];
                pbest[i] = x[i].clone();
            }
        }
        let prev = gbest_val;
        g = argmax(&pbest_val);
        if pbest_val[g] > gbest_val {
            gbest_val = pbest_val[g];
            gbest = pbest[g].clone();
        }
        trace.push(gbest_val);
        let gain = (gbest_val - prev) / prev.abs().max(f64::MIN_POSITIVE);
        if gain < params.plateau_tol {
            stalled += 1;
            if stalled >= params.patience {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    Ok(PsoResult {
        best_x: gbest,
        best_value: gbest_val,
        trace,
        evaluations,
        failures,
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}
