//! JAYA optimizer.

use super::{clamp_box, mse_objective, Candidate, Objective, OptimizerRun};
use crate::error::{Error, Result};
use crate::rng::substream;
use rand::Rng;
use std::time::Instant;

/// JAYA parameters. The algorithm itself has no tuning knobs beyond
/// population size and iteration count.
///
/// Each candidate proposes, per coordinate `j` with fresh `r1, r2` in [0, 1]:
///
/// ```text
/// x'_j = x_j + r1 * (best_j - |x_j|) - r2 * (worst_j - |x_j|)
/// ```
///
/// with the absolute value on the candidate's own coordinate. The proposal
/// replaces the candidate only if its fitness improves (greedy acceptance),
/// and best/worst are recomputed each iteration.
#[derive(Debug, Clone)]
pub struct JayaParams {
    pub population: usize,
    pub iterations: usize,
    /// Symmetric box limit per coordinate.
    pub bounds: f64,
    pub seed: u64,
    /// Explicit starting positions (cycled); `None` draws uniformly.
    pub initial_positions: Option<Vec<Vec<f64>>>,
}

impl JayaParams {
    pub fn new(seed: u64) -> Self {
        JayaParams {
            population: 20,
            iterations: 300,
            bounds: 2.0,
            seed,
            initial_positions: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Argument("population must be >= 2".into()));
        }
        if !self.bounds.is_finite() || self.bounds <= 0.0 {
            return Err(Error::Argument("bounds must be > 0".into()));
        }
        Ok(())
    }
}

/// Minimize the objective with JAYA. Deterministic per seed.
pub fn jaya_optimize(obj: &Objective, params: &JayaParams) -> Result<OptimizerRun> {
    params.validate()?;
    let start = Instant::now();
    let dims = obj.num_taps();

    let mut rngs: Vec<_> = (0..params.population)
        .map(|i| substream(params.seed, i as u64))
        .collect();

    let mut positions: Vec<Vec<f64>> = (0..params.population)
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

    let mut fitness: Vec<f64> = positions
        .iter()
        .map(|p| mse_objective(p, obj))
        .collect::<Result<_>>()?;
    let mut evaluations = params.population as u64;

    let best_of = |fit: &[f64]| {
        (0..fit.len())
            .min_by(|&a, &b| fit[a].total_cmp(&fit[b]))
            .unwrap()
    };
    let worst_of = |fit: &[f64]| {
        (0..fit.len())
            .max_by(|&a, &b| fit[a].total_cmp(&fit[b]))
            .unwrap()
    };

    let mut best_idx = best_of(&fitness);
    let mut history = vec![fitness[best_idx]];
    let mut history_evaluations = vec![evaluations];
    let mut history_elapsed = vec![start.elapsed().as_secs_f64()];

    let mut proposal = vec![0.0; dims];
    for _ in 0..params.iterations {
        let best = positions[best_of(&fitness)].clone();
        let worst = positions[worst_of(&fitness)].clone();
        for i in 0..params.population {
            for j in 0..dims {
                let r1: f64 = rngs[i].gen();
                let r2: f64 = rngs[i].gen();
                let xj = positions[i][j];
                let moved = xj + r1 * (best[j] - xj.abs()) - r2 * (worst[j] - xj.abs());
                proposal[j] = clamp_box(moved, params.bounds);
            }
            let f = mse_objective(&proposal, obj)?;
            if f < fitness[i] {
                positions[i].copy_from_slice(&proposal);
                fitness[i] = f;
            }
        }
        evaluations += params.population as u64;
        best_idx = best_of(&fitness);
        history.push(fitness[best_idx]);
        history_evaluations.push(evaluations);
        history_elapsed.push(start.elapsed().as_secs_f64());
    }

    Ok(OptimizerRun {
        best: Candidate {
            position: positions[best_idx].clone(),
            fitness: fitness[best_idx],
            velocity: None,
        },
        history,
        history_evaluations,
        history_elapsed,
        evaluations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
