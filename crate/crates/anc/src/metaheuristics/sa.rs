//! Simulated annealing.

use super::{mse_objective, Candidate, Objective, OptimizerRun};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, standard_normal};
use rand::Rng;
use std::time::Instant;

/// Simulated-annealing schedule and move parameters.
///
/// A single candidate random-walks from the zero vector: each move perturbs
/// one uniformly chosen coordinate by a Gaussian of scale `perturb_scale`.
/// Downhill moves are always accepted; uphill moves with probability
/// `exp(-dE/T)`. After `steps_per_temp` moves the temperature cools
/// geometrically, `T <- alpha * T`, and the walk stops once `T` falls below
/// `min_temp`. The best-ever candidate is tracked separately from the
/// current one.
#[derive(Debug, Clone)]
pub struct SaParams {
    /// Initial temperature, > 0.
    pub t0: f64,
    /// Cooling multiplier, in (0, 1).
    pub alpha: f64,
    pub steps_per_temp: usize,
    /// Stop once the temperature falls below this, > 0.
    pub min_temp: f64,
    /// Gaussian move scale; 0 degenerates to a frozen walk.
    pub perturb_scale: f64,
    pub seed: u64,
}

impl SaParams {
    /// Conventional schedule anchored at the objective's starting error:
    /// t0 = initial MSE, alpha = 0.95, 50 steps per level, min_temp = t0e-4.
    pub fn from_initial_mse(initial_mse: f64, seed: u64) -> Self {
        let t0 = initial_mse.max(1e-12);
        SaParams {
            t0,
            alpha: 0.95,
            steps_per_temp: 50,
            min_temp: t0 * 1e-4,
            perturb_scale: 0.1,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.t0.is_finite() || self.t0 <= 0.0 {
            return Err(Error::Argument("t0 must be > 0".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Argument("alpha must be in (0, 1)".into()));
        }
        if self.steps_per_temp == 0 {
            return Err(Error::Argument("steps_per_temp must be >= 1".into()));
        }
        if !self.min_temp.is_finite() || self.min_temp <= 0.0 {
            return Err(Error::Argument("min_temp must be > 0".into()));
        }
        if self.t0 <= self.min_temp {
            return Err(Error::Argument("t0 must exceed min_temp".into()));
        }
        if !self.perturb_scale.is_finite() || self.perturb_scale < 0.0 {
            return Err(Error::Argument("perturb_scale must be >= 0".into()));
        }
        Ok(())
    }

    /// Temperature levels the schedule will visit.
    pub fn cooling_stages(&self) -> usize {
        let mut t = self.t0;
        let mut stages = 0;
        while t >= self.min_temp {
            stages += 1;
            t *= self.alpha;
        }
        stages
    }
}

/// Metropolis acceptance probability for an error increase `delta_e` at
/// temperature `t`: 1 for downhill moves, `exp(-delta_e / t)` otherwise.
pub fn sa_acceptance_probability(delta_e: f64, t: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        (-delta_e / t).exp()
    }
}

/// One acceptance decision, consuming a uniform draw only for uphill moves.
pub fn sa_accept<R: Rng>(delta_e: f64, t: f64, rng: &mut R) -> bool {
    if delta_e <= 0.0 {
        true
    } else {
        rng.gen::<f64>() < sa_acceptance_probability(delta_e, t)
    }
}

/// Minimize the objective by simulated annealing. Deterministic per seed.
pub fn sa_optimize(obj: &Objective, params: &SaParams) -> Result<OptimizerRun> {
    params.validate()?;
    let start = Instant::now();
    let dims = obj.num_taps();
    let mut rng = rng_from_seed(params.seed);

    let mut current = vec![0.0; dims];
    let mut current_fit = mse_objective(&current, obj)?;
    let mut best = current.clone();
    let mut best_fit = current_fit;
    let mut evaluations = 1u64;

    let mut history = vec![best_fit];
    let mut history_evaluations = vec![evaluations];
    let mut history_elapsed = vec![start.elapsed().as_secs_f64()];

    let mut t = params.t0;
    while t >= params.min_temp {
        for _ in 0..params.steps_per_temp {
            let coord = rng.gen_range(0..dims);
            let old = current[coord];
            current[coord] = old + params.perturb_scale * standard_normal(&mut rng);
            let fit = mse_objective(&current, obj)?;
            evaluations += 1;
            let delta = fit - current_fit;
            if sa_accept(delta, t, &mut rng) {
                current_fit = fit;
                if fit < best_fit {
                    best_fit = fit;
                    best.clone_from(&current);
                }
            } else {
                current[coord] = old;
            }
        }
        // One history point per temperature level.
        history.push(best_fit);
        history_evaluations.push(evaluations);
        history_elapsed.push(start.elapsed().as_secs_f64());
        t *= params.alpha;
    }

    Ok(OptimizerRun {
        best: Candidate {
            position: best,
            fitness: best_fit,
            velocity: None,
        },
        history,
        history_evaluations,
        history_elapsed,
        evaluations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_objective(taps: &[f64], n: usize) -> Objective {
        let mut rng = crate::rng::rng_from_seed(55);
        let x: Vec<f64> = (0..n)
            .map(|_| crate::rng::standard_normal(&mut rng))
            .collect();
        let d = crate::synth::fir_channel(&x, taps).unwrap();
        Objective::new(x, d, taps.len()).unwrap()
    }

    #[test]
    fn downhill_moves_are_always_accepted() {
        let mut rng = crate::rng::rng_from_seed(1);
        for _ in 0..1000 {
            assert!(sa_accept(-0.1, 1.0, &mut rng));
            assert!(sa_accept(0.0, 0.001, &mut rng));
        }
        assert_eq!(sa_acceptance_probability(-5.0, 0.1), 1.0);
    }

    #[test]
    fn acceptance_at_delta_equal_temperature_is_one_over_e() {
        let mut rng = crate::rng::rng_from_seed(2);
        let trials = 100_000;
        let accepted = (0..trials).filter(|_| sa_accept(0.7, 0.7, &mut rng)).count();
        let rate = accepted as f64 / trials as f64;
        let expected = (-1.0f64).exp();
        assert!(
            (rate - expected).abs() < 0.01,
            "empirical acceptance {rate:.4} vs e^-1 = {expected:.4}"
        );
    }

    #[test]
    fn frozen_walk_never_moves() {
        let obj = toy_objective(&[0.5, -0.25], 128);
        let mut params = SaParams::from_initial_mse(1.0, 4);
        params.perturb_scale = 0.0;
        let run = sa_optimize(&obj, &params).unwrap();
        assert!(run.history.iter().all(|&f| f == run.history[0]));
        assert_eq!(run.best.position, vec![0.0, 0.0]);
    }

    #[test]
    fn budget_matches_the_schedule_exactly() {
        let obj = toy_objective(&[0.5], 64);
        let params = SaParams {
            t0: 1.0,
            alpha: 0.5,
            steps_per_temp: 7,
            min_temp: 0.1,
            perturb_scale: 0.1,
            seed: 6,
        };
        // Levels: 1.0, 0.5, 0.25, 0.125 -> 4 stages.
        assert_eq!(params.cooling_stages(), 4);
        let run = sa_optimize(&obj, &params).unwrap();
        assert_eq!(run.evaluations, 4 * 7 + 1);
        assert_eq!(run.history.len(), 5); // initial + one per stage
    }

    #[test]
    fn best_fitness_is_monotone_and_deterministic() {
        let obj = toy_objective(&[0.6, -0.3, 0.1], 256);
        let params = SaParams::from_initial_mse(mse_objective(&[0.0; 3], &obj).unwrap(), 9);
        let a = sa_optimize(&obj, &params).unwrap();
        let b = sa_optimize(&obj, &params).unwrap();
        assert_eq!(a.best.position, b.best.position);
        assert_eq!(a.history, b.history);
        for w in a.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(a.best.fitness < a.history[0], "SA made no progress");
    }

    #[test]
    fn invalid_schedules_are_rejected() {
        let mut p = SaParams::from_initial_mse(1.0, 0);
        p.alpha = 1.0;
        assert!(p.validate().is_err());
        let mut p = SaParams::from_initial_mse(1.0, 0);
        p.min_temp = 2.0;
        assert!(p.validate().is_err());
        let mut p = SaParams::from_initial_mse(1.0, 0);
        p.steps_per_temp = 0;
        assert!(p.validate().is_err());
    }
}
