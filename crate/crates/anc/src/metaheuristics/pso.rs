//! Particle swarm optimization.

use super::{clamp_box, mse_objective, Candidate, Objective, OptimizerRun};
use crate::error::{Error, Result};
use crate::rng::substream;
use rand::Rng;
use std::time::Instant;

/// PSO parameters.
///
/// Velocity and position recursions, with fresh `r1, r2` in [0, 1] per
/// coordinate per step:
///
/// ```text
/// v <- w*v + c1*r1*(p_best - x) + c2*r2*(g_best - x)
/// x <- x + v
/// ```
///
/// Positions clamp to the symmetric box `[-bounds, bounds]`; velocities
/// clamp to half the box to keep the swarm from exploding. Initial
/// velocities are zero. The global best is updated once per iteration
/// (synchronous), so candidate evaluations can be reordered or parallelized
/// without changing the result.
#[derive(Debug, Clone)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    /// Inertia weight.
    pub inertia: f64,
    /// Cognitive factor, in [0, 1].
    pub c1: f64,
    /// Social factor, in [0, 1].
    pub c2: f64,
    /// Symmetric box limit per coordinate.
    pub bounds: f64,
    pub seed: u64,
    /// Explicit starting positions (cycled through the swarm); `None` draws
    /// uniformly inside the box.
    pub initial_positions: Option<Vec<Vec<f64>>>,
}

impl PsoParams {
    pub fn new(seed: u64) -> Self {
        PsoParams {
            swarm_size: 30,
            iterations: 200,
            inertia: 0.7,
            c1: 0.9,
            c2: 0.9,
            bounds: 2.0,
            seed,
            initial_positions: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::Argument("swarm_size must be >= 2".into()));
        }
        if !self.bounds.is_finite() || self.bounds <= 0.0 {
            return Err(Error::Argument("bounds must be > 0".into()));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Argument(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if !self.inertia.is_finite() || self.inertia < 0.0 {
            return Err(Error::Argument("inertia must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Minimize the objective with a particle swarm. Deterministic per seed.
pub fn pso_optimize(obj: &Objective, params: &PsoParams) -> Result<OptimizerRun> {
    params.validate()?;
    let start = Instant::now();
    let dims = obj.num_taps();
    let vmax = params.bounds / 2.0;

    let mut rngs: Vec<_> = (0..params.swarm_size)
        .map(|i| substream(params.seed, i as u64))
        .collect();

    let mut positions: Vec<Vec<f64>> = (0..params.swarm_size)
        .map(|i| match &params.initial_positions {
            Some(init) => init[i % init.len()]
                .iter()
                .map(|&v| clamp_box(v, params.bounds))
                .collect(),
            None => (0..dims)
                .map(|_| rngs[i].gen_range(-params.bounds..=params.bounds))
                .collect(),
        })
        .collect();
    let mut velocities: Vec<Vec<f64>> = vec![vec![0.0; dims]; params.swarm_size];

    let mut evaluations = 0u64;
    let mut fitness: Vec<f64> = positions
        .iter()
        .map(|p| mse_objective(p, obj))
        .collect::<Result<_>>()?;
    evaluations += params.swarm_size as u64;

    let mut pbest = positions.clone();
    let mut pbest_fit = fitness.clone();
    let mut gbest_idx = (0..params.swarm_size)
        .min_by(|&a, &b| pbest_fit[a].total_cmp(&pbest_fit[b]))
        .unwrap();
    let mut gbest = pbest[gbest_idx].clone();
    let mut gbest_fit = pbest_fit[gbest_idx];

    let mut history = vec![gbest_fit];
    let mut history_evaluations = vec![evaluations];
    let mut history_elapsed = vec![start.elapsed().as_secs_f64()];

    for _ in 0..params.iterations {
        // Synchronous update: every particle sees the same g_best snapshot.
        for i in 0..params.swarm_size {
            for j in 0..dims {
                let r1: f64 = rngs[i].gen();
                let r2: f64 = rngs[i].gen();
                let v = params.inertia * velocities[i][j]
                    + params.c1 * r1 * (pbest[i][j] - positions[i][j])
                    + params.c2 * r2 * (gbest[j] - positions[i][j]);
                velocities[i][j] = v.clamp(-vmax, vmax);
                positions[i][j] = clamp_box(positions[i][j] + velocities[i][j], params.bounds);
            }
            fitness[i] = mse_objective(&positions[i], obj)?;
        }
        evaluations += params.swarm_size as u64;

        for i in 0..params.swarm_size {
            if fitness[i] < pbest_fit[i] {
                pbest_fit[i] = fitness[i];
                pbest[i].clone_from(&positions[i]);
            }
        }
        gbest_idx = (0..params.swarm_size)
            .min_by(|&a, &b| pbest_fit[a].total_cmp(&pbest_fit[b]))
            .unwrap();
        if pbest_fit[gbest_idx] < gbest_fit {
            gbest_fit = pbest_fit[gbest_idx];
            gbest.clone_from(&pbest[gbest_idx]);
        }
        history.push(gbest_fit);
        history_evaluations.push(evaluations);
        history_elapsed.push(start.elapsed().as_secs_f64());
    }

    Ok(OptimizerRun {
        best: Candidate {
            position: gbest,
            fitness: gbest_fit,
            velocity: None,
        },
        history,
        history_evaluations,
        history_elapsed,
        evaluations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
