//! Offline filter-weight optimizers: PSO, JAYA, simulated annealing.
//!
//! These search a fixed weight vector minimizing block MSE against a
//! recorded signal window. They are evaluation-hungry by nature - thousands
//! of full-window MSE computations per solution - which is exactly the
//! trade-off the runtime comparison quantifies against the streaming
//! filters. Each candidate draws from its own ChaCha substream of the master
//! seed, so results are reproducible and independent of evaluation order.

mod jaya;
mod pso;
mod sa;

pub use jaya::{jaya_optimize, JayaParams};
pub use pso::{pso_optimize, PsoParams};
pub use sa::{sa_accept, sa_acceptance_probability, sa_optimize, SaParams};

use crate::error::{Error, Result};

/// The block-MSE objective: how well do fixed weights map the reference
/// window `x` onto the desired window `d`?
#[derive(Debug, Clone)]
pub struct Objective {
    x: Vec<f64>,
    d: Vec<f64>,
    num_taps: usize,
}

impl Objective {
    pub fn new(x: Vec<f64>, d: Vec<f64>, num_taps: usize) -> Result<Self> {
        if x.len() != d.len() {
            return Err(Error::Argument(
                "objective windows must have equal length".into(),
            ));
        }
        if num_taps == 0 {
            return Err(Error::Argument("num_taps must be >= 1".into()));
        }
        if x.len() < num_taps {
            return Err(Error::Argument(format!(
                "window length {} is shorter than num_taps {num_taps}",
                x.len()
            )));
        }
        Ok(Objective { x, d, num_taps })
    }

    pub fn num_taps(&self) -> usize {
        self.num_taps
    }

    pub fn window_len(&self) -> usize {
        self.x.len()
    }
}

/// Mean squared error of `d[n] - sum_k weights[k] * x[n-k]` over the window
/// (zero pre-history, all samples count).
pub fn mse_objective(weights: &[f64], obj: &Objective) -> Result<f64> {
    if weights.len() != obj.num_taps {
        return Err(Error::Argument(format!(
            "weight vector has {} taps, objective expects {}",
            weights.len(),
            obj.num_taps
        )));
    }
    let n = obj.d.len();
    let mut sum = 0.0;
    for i in 0..n {
        let mut y = 0.0;
        for (k, &w) in weights.iter().enumerate().take(i + 1) {
            y += w * obj.x[i - k];
        }
        let e = obj.d[i] - y;
        sum += e * e;
    }
    Ok(sum / n as f64)
}

/// One member of an optimizer population.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub position: Vec<f64>,
    pub fitness: f64,
    /// PSO only.
    pub velocity: Option<Vec<f64>>,
}

/// The result of one optimizer execution.
#[derive(Debug, Clone)]
pub struct OptimizerRun {
    pub best: Candidate,
    /// Best-so-far fitness per iteration (index 0 = after initialization).
    /// Non-increasing by construction.
    pub history: Vec<f64>,
    /// Cumulative objective evaluations at each history point.
    pub history_evaluations: Vec<u64>,
    /// Cumulative wall-clock seconds at each history point (measurement;
    /// varies run to run).
    pub history_elapsed: Vec<f64>,
    /// Total objective evaluations.
    pub evaluations: u64,
    /// Total wall-clock seconds (measurement; varies run to run).
    pub wall_time: f64,
}

impl OptimizerRun {
    /// History as plot-ready CSV: `iteration,best_mse,evaluations,elapsed_seconds`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,best_mse,evaluations,elapsed_seconds\n");
        for (i, f) in self.history.iter().enumerate() {
            out.push_str(&format!(
                "{i},{f},{},{}\n",
                self.history_evaluations[i], self.history_elapsed[i]
            ));
        }
        out
    }
}

/// Clamp a coordinate into the symmetric box [-bound, bound].
pub(crate) fn clamp_box(v: f64, bound: f64) -> f64 {
    v.clamp(-bound, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mse_at_true_channel_is_zero() {
        let taps = [0.5, -0.25, 0.125];
        let x: Vec<f64> = (0..256).map(|i| ((i * 37) % 97) as f64 / 97.0 - 0.5).collect();
        let d = crate::synth::fir_channel(&x, &taps).unwrap();
        let obj = Objective::new(x, d, 3).unwrap();
        let mse = mse_objective(&taps, &obj).unwrap();
        assert!(mse < 1e-12, "mse {mse}");
    }

    #[test]
    fn mse_at_zero_weights_is_signal_power() {
        let d = vec![1.0, -1.0, 2.0, 0.0];
        let x = vec![0.3; 4];
        let obj = Objective::new(x, d.clone(), 2).unwrap();
        let expected = d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64;
        assert_abs_diff_eq!(
            mse_objective(&[0.0, 0.0], &obj).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mse_two_tap_toy_by_enumeration() {
        let obj = Objective::new(vec![1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0], 2).unwrap();
        let mse = mse_objective(&[0.5, 0.0], &obj).unwrap();
        assert_abs_diff_eq!(mse, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn mse_rejects_wrong_length() {
        let obj = Objective::new(vec![0.0; 8], vec![0.0; 8], 4).unwrap();
        assert!(mse_objective(&[0.0; 3], &obj).is_err());
    }

    #[test]
    fn objective_validation() {
        assert!(Objective::new(vec![0.0; 4], vec![0.0; 5], 2).is_err());
        assert!(Objective::new(vec![0.0; 4], vec![0.0; 4], 0).is_err());
        assert!(Objective::new(vec![0.0; 2], vec![0.0; 2], 4).is_err());
    }
}
