//! Objective evaluation: SNR, learning curves, convergence detection, and
//! runtime benchmarking.
//!
//! SNR is measured against the scenario's ground-truth clean signal. The
//! denoise evaluation discards a warm-up prefix (default 25%) from both the
//! before and after measurements, so adaptation transients don't count
//! against either side. Segmental SNR (frame-wise, clamped, averaged in dB)
//! is provided as a rough perceptual-adjacent figure; it is not comparable
//! to standardized intelligibility metrics.

use crate::error::{Error, Result};
use crate::filters::{filter_init, FilterConfig, FilterKind};
use crate::metaheuristics::{
    jaya_optimize, mse_objective, pso_optimize, sa_optimize, JayaParams, Objective, PsoParams,
    SaParams,
};
use crate::pipeline::budget;
use crate::synth::{fir_channel, Scenario};
use std::time::Instant;

/// Fraction of samples discarded as adaptation warm-up by
/// [`evaluate_denoise`].
pub const DEFAULT_WARMUP_FRAC: f64 = 0.25;

/// Before/after SNR pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub snr_in_db: f64,
    pub snr_out_db: f64,
    pub improvement_db: f64,
}

/// `10*log10(sum clean^2 / sum (test - clean)^2)`; +inf when the residual
/// is exactly zero. An all-zero clean reference is an error.
pub fn snr_db(clean: &[f64], test: &[f64]) -> Result<f64> {
    if clean.len() != test.len() {
        return Err(Error::Argument(format!(
            "length mismatch: clean {} vs test {}",
            clean.len(),
            test.len()
        )));
    }
    let sig: f64 = clean.iter().map(|v| v * v).sum();
    if sig == 0.0 {
        return Err(Error::UndefinedReference);
    }
    let res: f64 = clean
        .iter()
        .zip(test)
        .map(|(c, t)| (t - c) * (t - c))
        .sum();
    if res == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (sig / res).log10())
    }
}

/// Frame-wise SNR averaged in dB over 20 ms frames, each frame clamped to
/// [-10, 35] dB. Frames with zero clean energy are skipped.
pub fn segmental_snr_db(clean: &[f64], test: &[f64], sample_rate: u32) -> Result<f64> {
    if clean.len() != test.len() {
        return Err(Error::Argument("length mismatch".into()));
    }
    let frame = (sample_rate as usize / 50).max(1);
    let mut acc = 0.0;
    let mut frames = 0usize;
    let mut i = 0;
    while i + frame <= clean.len() {
        let c = &clean[i..i + frame];
        let t = &test[i..i + frame];
        let sig: f64 = c.iter().map(|v| v * v).sum();
        if sig > 0.0 {
            let res: f64 = c.iter().zip(t).map(|(a, b)| (b - a) * (b - a)).sum();
            let snr = if res == 0.0 {
                35.0
            } else {
                (10.0 * (sig / res).log10()).clamp(-10.0, 35.0)
            };
            acc += snr;
            frames += 1;
        }
        i += frame;
    }
    if frames == 0 {
        return Err(Error::UndefinedReference);
    }
    Ok(acc / frames as f64)
}

/// Before/after SNR with the default 25% warm-up discarded.
pub fn evaluate_denoise(scenario: &Scenario, output: &[f64]) -> Result<SnrReport> {
    evaluate_denoise_with(scenario, output, DEFAULT_WARMUP_FRAC)
}

/// Before/after SNR. The first `warmup_frac` of samples is discarded from
/// both the `snr_in` and `snr_out` measurements, so identity processing
/// yields exactly 0 dB improvement regardless of the warm-up setting.
pub fn evaluate_denoise_with(
    scenario: &Scenario,
    output: &[f64],
    warmup_frac: f64,
) -> Result<SnrReport> {
    let n = scenario.len();
    if output.len() != n {
        return Err(Error::Argument(format!(
            "output length {} does not match scenario length {n}",
            output.len()
        )));
    }
    if !(0.0..1.0).contains(&warmup_frac) {
        return Err(Error::Argument("warmup fraction must be in [0, 1)".into()));
    }
    let skip = (n as f64 * warmup_frac) as usize;
    let clean = &scenario.clean.samples()[skip..];
    let primary = &scenario.primary.samples()[skip..];
    let out = &output[skip..];
    let snr_in_db = snr_db(clean, primary)?;
    let snr_out_db = snr_db(clean, out)?;
    Ok(SnrReport {
        snr_in_db,
        snr_out_db,
        improvement_db: snr_out_db - snr_in_db,
    })
}

/// Per-block MSE of an error signal plus a smoothed view and its floor.
#[derive(Debug, Clone)]
pub struct LearningCurve {
    /// MSE of each block of the error signal.
    pub block_mse: Vec<f64>,
    /// Centered moving average of `block_mse`, window clamped at the edges.
    pub smoothed: Vec<f64>,
    /// Median of the final 10% of `smoothed`.
    pub floor: f64,
}

/// Block the error signal and smooth it. `block` and `window` must be >= 1;
/// a trailing partial block contributes its own (shorter) mean.
pub fn learning_curve(e: &[f64], block: usize, window: usize) -> LearningCurve {
    assert!(block >= 1, "block size must be >= 1");
    assert!(window >= 1, "smoothing window must be >= 1");
    let block_mse: Vec<f64> = e
        .chunks(block)
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64)
        .collect();
    let n = block_mse.len();
    let half = window / 2;
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            block_mse[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let floor = if n == 0 {
        0.0
    } else {
        let tail_len = (n as f64 * 0.1).ceil() as usize;
        let mut tail = smoothed[n - tail_len.max(1)..].to_vec();
        tail.sort_by(f64::total_cmp);
        let m = tail.len();
        if m % 2 == 1 {
            tail[m / 2]
        } else {
            0.5 * (tail[m / 2 - 1] + tail[m / 2])
        }
    };
    LearningCurve {
        block_mse,
        smoothed,
        floor,
    }
}

impl LearningCurve {
    /// Plot-ready CSV: `block_index,block_mse,smoothed_mse`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block_index,block_mse,smoothed_mse\n");
        for (i, (b, s)) in self.block_mse.iter().zip(&self.smoothed).enumerate() {
            out.push_str(&format!("{i},{b},{s}\n"));
        }
        out
    }
}

/// Smallest block index from which the smoothed curve stays within
/// `margin_db` of its floor. Errors if the curve never settles.
pub fn convergence_point(curve: &LearningCurve, margin_db: f64) -> Result<usize> {
    if !margin_db.is_finite() || margin_db <= 0.0 {
        return Err(Error::Argument("margin_db must be > 0".into()));
    }
    let bound = curve.floor * 10f64.powf(margin_db / 10.0);
    // Find the last block above the bound; convergence starts just after.
    let last_above = curve
        .smoothed
        .iter()
        .rposition(|&v| v > bound);
    match last_above {
        None => Ok(0),
        Some(i) if i + 1 < curve.smoothed.len() => Ok(i + 1),
        Some(_) => Err(Error::NoConvergence),
    }
}

/// Streaming filters and offline optimizers the benchmark knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    Lms,
    Nlms,
    Rls,
    LmsQ15,
    Pso,
    Jaya,
    Sa,
}

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Lms => "lms",
            AlgorithmId::Nlms => "nlms",
            AlgorithmId::Rls => "rls",
            AlgorithmId::LmsQ15 => "lms-q15",
            AlgorithmId::Pso => "pso",
            AlgorithmId::Jaya => "jaya",
            AlgorithmId::Sa => "sa",
        }
    }

    pub fn is_streaming(self) -> bool {
        matches!(
            self,
            AlgorithmId::Lms | AlgorithmId::Nlms | AlgorithmId::Rls | AlgorithmId::LmsQ15
        )
    }

    fn filter_kind(self) -> Option<FilterKind> {
        match self {
            AlgorithmId::Lms => Some(FilterKind::Lms),
            AlgorithmId::Nlms => Some(FilterKind::Nlms),
            AlgorithmId::Rls => Some(FilterKind::Rls),
            AlgorithmId::LmsQ15 => Some(FilterKind::LmsQ15),
            _ => None,
        }
    }
}

/// Whether a cost is per processed sample or per optimized solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    PerSample,
    PerSolution,
}

impl CostKind {
    pub fn name(self) -> &'static str {
        match self {
            CostKind::PerSample => "per_sample",
            CostKind::PerSolution => "per_solution",
        }
    }
}

/// One benchmark row.
#[derive(Debug, Clone)]
pub struct RuntimeRecord {
    pub name: String,
    pub cost_kind: CostKind,
    /// Median-of-repetitions wall seconds per output (sample or solution).
    pub seconds_per_output: f64,
    /// Objective evaluations (offline optimizers only).
    pub evaluations: Option<u64>,
    /// Per-sample cost below the single-sample deadline (streaming only).
    pub realtime_feasible: Option<bool>,
}

/// Benchmark rows sorted by ascending cost.
#[derive(Debug, Clone)]
pub struct RuntimeTable {
    pub records: Vec<RuntimeRecord>,
    /// Single-sample real-time budget at the scenario rate.
    pub sample_budget_seconds: f64,
}

impl RuntimeTable {
    pub fn record(&self, name: &str) -> Option<&RuntimeRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Plot-ready CSV:
    /// `algorithm,cost_kind,seconds_per_output,evaluations,realtime_feasible`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,cost_kind,seconds_per_output,evaluations,realtime_feasible\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.name,
                r.cost_kind.name(),
                r.seconds_per_output,
                r.evaluations.map_or(String::new(), |e| e.to_string()),
                r.realtime_feasible.map_or(String::new(), |f| f.to_string()),
            ));
        }
        out
    }
}

/// Knobs for [`bench_runtime`].
#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Filter parameters shared by the streaming algorithms.
    pub filter: FilterConfig,
    /// Objective window length for the offline optimizers.
    pub objective_window: usize,
    pub pso: PsoParams,
    pub jaya: JayaParams,
    /// `None` derives the schedule from the window's initial MSE.
    pub sa: Option<SaParams>,
}

impl BenchOptions {
    pub fn new(filter: FilterConfig, seed: u64) -> Self {
        BenchOptions {
            filter,
            objective_window: 2048,
            pso: PsoParams::new(seed),
            jaya: JayaParams::new(seed),
            sa: None,
        }
    }
}

/// Time every requested algorithm on the scenario.
///
/// Streaming filters report median wall seconds per sample over full-block
/// passes of the scenario; offline optimizers report median wall seconds per
/// optimized solution plus their evaluation count. One untimed warm-up run
/// precedes the timed repetitions. The table is sorted by ascending cost.
pub fn bench_runtime(
    algorithms: &[AlgorithmId],
    scenario: &Scenario,
    repetitions: usize,
    opts: &BenchOptions,
) -> Result<RuntimeTable> {
    if repetitions < 3 {
        return Err(Error::Argument("repetitions must be >= 3".into()));
    }
    let sample_budget = budget(1, scenario.sample_rate());
    let mut records = Vec::new();

    for &algo in algorithms {
        let record = if let Some(kind) = algo.filter_kind() {
            let b = opts.filter.block_size;
            let n = scenario.len() / b * b;
            if n == 0 {
                return Err(Error::Argument(
                    "scenario shorter than one filter block".into(),
                ));
            }
            let run_once = || -> Result<f64> {
                let mut state = filter_init(kind, opts.filter.clone())?;
                let x = scenario.reference.samples();
                let d = scenario.primary.samples();
                let t = Instant::now();
                for i in (0..n).step_by(b) {
                    state.process_block(&x[i..i + b], &d[i..i + b])?;
                }
                Ok(t.elapsed().as_secs_f64() / n as f64)
            };
            run_once()?; // warm-up
            let mut times: Vec<f64> = (0..repetitions)
                .map(|_| run_once())
                .collect::<Result<_>>()?;
            times.sort_by(f64::total_cmp);
            let median = times[times.len() / 2];
            RuntimeRecord {
                name: algo.name().to_string(),
                cost_kind: CostKind::PerSample,
                seconds_per_output: median,
                evaluations: None,
                realtime_feasible: Some(median < sample_budget),
            }
        } else {
            let taps = opts.filter.num_taps;
            let offset = scenario.len() / 4;
            let window = opts
                .objective_window
                .min(scenario.len().saturating_sub(offset));
            if window < taps {
                return Err(Error::Argument(
                    "objective window shorter than the filter".into(),
                ));
            }
            let obj = Objective::new(
                scenario.reference.samples()[offset..offset + window].to_vec(),
                scenario.primary.samples()[offset..offset + window].to_vec(),
                taps,
            )?;
            let sa_params = match &opts.sa {
                Some(p) => p.clone(),
                None => {
                    let initial = mse_objective(&vec![0.0; taps], &obj)?;
                    SaParams::from_initial_mse(initial, opts.pso.seed)
                }
            };
            let run_once = || -> Result<(f64, u64)> {
                let t = Instant::now();
                let run = match algo {
                    AlgorithmId::Pso => pso_optimize(&obj, &opts.pso)?,
                    AlgorithmId::Jaya => jaya_optimize(&obj, &opts.jaya)?,
                    AlgorithmId::Sa => sa_optimize(&obj, &sa_params)?,
                    _ => unreachable!(),
                };
                Ok((t.elapsed().as_secs_f64(), run.evaluations))
            };
            run_once()?; // warm-up
            let mut evals = 0;
            let mut times: Vec<f64> = Vec::with_capacity(repetitions);
            for _ in 0..repetitions {
                let (t, e) = run_once()?;
                times.push(t);
                evals = e;
            }
            times.sort_by(f64::total_cmp);
            RuntimeRecord {
                name: algo.name().to_string(),
                cost_kind: CostKind::PerSolution,
                seconds_per_output: times[times.len() / 2],
                evaluations: Some(evals),
                realtime_feasible: None,
            }
        };
        records.push(record);
    }

    records.sort_by(|a, b| a.seconds_per_output.total_cmp(&b.seconds_per_output));
    Ok(RuntimeTable {
        records,
        sample_budget_seconds: sample_budget,
    })
}

/// Aggregate evaluation of one denoising run.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub snr: SnrReport,
    pub seg_snr_in_db: f64,
    pub seg_snr_out_db: f64,
    pub curve: LearningCurve,
    /// Block index where the residual-noise curve settles, if it does.
    pub convergence_block: Option<usize>,
}

/// Evaluate a denoised output against its scenario.
///
/// The learning curve is computed on the residual noise `output - clean`
/// (available because scenarios carry ground truth), which stays stationary
/// under modulated speech and so gives a usable convergence index.
pub fn evaluate_run(
    scenario: &Scenario,
    output: &[f64],
    warmup_frac: f64,
    curve_block: usize,
    curve_window: usize,
) -> Result<EvalReport> {
    let snr = evaluate_denoise_with(scenario, output, warmup_frac)?;
    let clean = scenario.clean.samples();
    let residual: Vec<f64> = output.iter().zip(clean).map(|(o, c)| o - c).collect();
    let curve = learning_curve(&residual, curve_block, curve_window);
    let convergence_block = convergence_point(&curve, 3.0).ok();
    let seg_snr_in_db = segmental_snr_db(clean, scenario.primary.samples(), scenario.sample_rate())?;
    let seg_snr_out_db = segmental_snr_db(clean, output, scenario.sample_rate())?;
    Ok(EvalReport {
        snr,
        seg_snr_in_db,
        seg_snr_out_db,
        curve,
        convergence_block,
    })
}

/// Denoise by applying a fixed weight vector (an optimizer's solution) to
/// the whole scenario: `output = primary - weights * reference`.
pub fn apply_fixed_weights(scenario: &Scenario, weights: &[f64]) -> Result<Vec<f64>> {
    let estimate = fir_channel(scenario.reference.samples(), weights)?;
    Ok(scenario
        .primary
        .samples()
        .iter()
        .zip(&estimate)
        .map(|(d, y)| d - y)
        .collect())
}
