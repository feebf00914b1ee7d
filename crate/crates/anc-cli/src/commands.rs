//! The four subcommands.

use crate::manifest::Manifest;
use crate::report::{cell, write_text, write_wav};
use anc::audio::decode_wav;
use anc::beamforming::{
    delay_and_sum, filter_and_sum_adaptive, max_spacing, steering_delays, ArrayGeometry,
};
use anc::config::Config;
use anc::error::{Error, Result};
use anc::filters::{FilterConfig, FilterKind};
use anc::metaheuristics::{
    jaya_optimize, mse_objective, pso_optimize, sa_optimize, JayaParams, Objective, OptimizerRun,
    PsoParams, SaParams,
};
use anc::metrics::{
    apply_fixed_weights, bench_runtime, evaluate_run, AlgorithmId, BenchOptions, EvalReport,
};
use anc::pipeline::{run_stream, ExecMode, StreamOptions};
use anc::synth::{synth_scenario, Scenario, ScenarioSpec};
use std::fmt::Write as _;
use std::path::Path;

/// Everything a command needs besides its own arguments.
pub struct Context {
    pub argv: Vec<String>,
    pub config: Config,
    pub seed_override: Option<u64>,
    pub out_dir: std::path::PathBuf,
    pub paced: bool,
}

impl Context {
    fn stream_options(&self) -> StreamOptions {
        StreamOptions {
            mode: ExecMode::Threaded,
            paced: self.paced,
        }
    }

    fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        Ok(())
    }
}

/// Synthesize a scenario and write its three mono WAVs.
pub fn cmd_synth(ctx: &Context) -> Result<()> {
    let mut spec = ScenarioSpec::from_config(&ctx.config)?;
    if let Some(seed) = ctx.seed_override {
        spec.seed = seed;
    }
    let scenario = synth_scenario(&spec)?;

    ctx.ensure_out_dir()?;
    write_wav(&ctx.out_dir.join("clean.wav"), &scenario.clean)?;
    write_wav(&ctx.out_dir.join("reference.wav"), &scenario.reference)?;
    write_wav(&ctx.out_dir.join("primary.wav"), &scenario.primary)?;

    let mut manifest = Manifest::new(&ctx.argv, Some(spec.seed));
    manifest.snapshot_config(&ctx.config);
    manifest.set("param.duration_s", spec.duration_s.to_string());
    manifest.set("param.sample_rate", spec.sample_rate.to_string());
    manifest.set("param.channel_taps", spec.channel_taps.to_string());
    manifest.set(
        "param.target_snr_in_db",
        spec.target_snr_in_db.map_or("inf".into(), |v| v.to_string()),
    );
    manifest.set("measured.snr_in_db", scenario.snr_in_db.to_string());
    for name in ["clean.wav", "reference.wav", "primary.wav", "manifest.txt"] {
        manifest.record_output(name);
    }
    manifest.write(&ctx.out_dir)
}

/// Load the three scenario WAVs written by `synth`.
fn load_scenario(dir: &Path) -> Result<Scenario> {
    let read = |name: &str| -> Result<anc::AudioClip> {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        decode_wav(&bytes)
    };
    Scenario::from_clips(read("clean.wav")?, read("reference.wav")?, read("primary.wav")?)
}

fn scenario_id(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

fn eval_csv(id: &str, algo: &str, report: &EvalReport, saturations: Option<u64>) -> String {
    let mut header = String::from(
        "scenario_id,algorithm,snr_in_db,snr_out_db,improvement_db,\
         seg_snr_in_db,seg_snr_out_db,convergence_block",
    );
    let mut row = format!(
        "{id},{algo},{},{},{},{},{},{}",
        report.snr.snr_in_db,
        report.snr.snr_out_db,
        report.snr.improvement_db,
        report.seg_snr_in_db,
        report.seg_snr_out_db,
        report
            .convergence_block
            .map_or(String::new(), |b| b.to_string()),
    );
    if let Some(s) = saturations {
        header.push_str(",saturations");
        let _ = write!(row, ",{s}");
    }
    format!("{header}\n{row}\n")
}

/// Learning-curve parameters for evaluation. The curve is computed on
/// residual noise; its floor still breathes with the clean signal's
/// amplitude envelope (adaptation noise scales with the disturbance), so
/// the default smoothing window spans 0.6 s - longer than one period of
/// the slowest envelope the synthesizer produces.
fn curve_params(cfg: &Config, sample_rate: u32) -> Result<(usize, usize)> {
    let block = cfg.usize_or("eval.curve_block", 128)?;
    if block == 0 {
        return Err(cfg.invalid("eval.curve_block", "must be >= 1"));
    }
    let default_window = ((0.6 * sample_rate as f64 / block as f64).ceil() as usize).max(9) | 1;
    let window = cfg.usize_or("eval.curve_window", default_window)?;
    if window == 0 {
        return Err(cfg.invalid("eval.curve_window", "must be >= 1"));
    }
    Ok((block, window))
}

/// Run one filter over a scenario directory through the streaming pipeline.
pub fn cmd_denoise(ctx: &Context, scenario_dir: &Path, algo: &str) -> Result<()> {
    let kind = FilterKind::parse(algo)?;
    let scenario = load_scenario(scenario_dir)?;
    let config = FilterConfig::from_config(&ctx.config)?;
    let (curve_block, curve_window) = curve_params(&ctx.config, scenario.sample_rate())?;

    let out = run_stream(&scenario, kind, &config, &ctx.stream_options())?;
    let report = evaluate_run(
        &scenario,
        out.denoised.samples(),
        anc::metrics::DEFAULT_WARMUP_FRAC,
        curve_block,
        curve_window,
    )?;

    ctx.ensure_out_dir()?;
    write_wav(&ctx.out_dir.join("output.wav"), &out.denoised)?;
    let id = scenario_id(scenario_dir);
    write_text(
        &ctx.out_dir.join("eval.csv"),
        &eval_csv(&id, kind.name(), &report, out.filter.saturations()),
    )?;
    write_text(&ctx.out_dir.join("deadline.csv"), &out.deadline.to_csv())?;

    let mut weights = String::from("tap,weight\n");
    for (i, w) in out.filter.weights().iter().enumerate() {
        let _ = writeln!(weights, "{i},{w}");
    }
    write_text(&ctx.out_dir.join("weights.csv"), &weights)?;

    let mut manifest = Manifest::new(&ctx.argv, ctx.seed_override);
    manifest.snapshot_config(&ctx.config);
    manifest.set("param.algorithm", kind.name());
    manifest.set("param.num_taps", config.num_taps.to_string());
    manifest.set("param.block_size", config.block_size.to_string());
    manifest.set("param.mu", config.mu.to_string());
    manifest.set("param.warmup_frac", anc::metrics::DEFAULT_WARMUP_FRAC.to_string());
    manifest.set("measured.improvement_db", report.snr.improvement_db.to_string());
    manifest.set("measured.overruns", out.deadline.overruns.to_string());
    manifest.set("measured.headroom", out.deadline.headroom.to_string());
    for name in [
        "output.wav",
        "eval.csv",
        "deadline.csv",
        "weights.csv",
        "manifest.txt",
    ] {
        manifest.record_output(name);
    }
    manifest.write(&ctx.out_dir)
}

struct CompareDefaults {
    filter: FilterConfig,
    nlms_mu: f64,
    window: usize,
    seed: u64,
}

fn compare_defaults(ctx: &Context) -> Result<CompareDefaults> {
    let filter = FilterConfig::from_config(&ctx.config)?;
    let nlms_mu = ctx.config.f64_or("compare.nlms_mu", 0.05)?;
    let window = ctx.config.usize_or("optimizer.window", 2048)?;
    let seed = match ctx.seed_override {
        Some(s) => s,
        None => ctx.config.u64_or("optimizer.seed", 42)?,
    };
    Ok(CompareDefaults {
        filter,
        nlms_mu,
        window,
        seed,
    })
}

fn pso_from_config(cfg: &Config, seed: u64) -> Result<PsoParams> {
    let mut p = PsoParams::new(seed);
    p.swarm_size = cfg.usize_or("pso.swarm", p.swarm_size)?;
    p.iterations = cfg.usize_or("pso.iterations", p.iterations)?;
    p.inertia = cfg.f64_or("pso.inertia", p.inertia)?;
    p.c1 = cfg.f64_or("pso.c1", p.c1)?;
    p.c2 = cfg.f64_or("pso.c2", p.c2)?;
    p.bounds = cfg.f64_or("pso.bounds", p.bounds)?;
    Ok(p)
}

fn jaya_from_config(cfg: &Config, seed: u64) -> Result<JayaParams> {
    let mut p = JayaParams::new(seed);
    p.population = cfg.usize_or("jaya.population", p.population)?;
    p.iterations = cfg.usize_or("jaya.iterations", p.iterations)?;
    p.bounds = cfg.f64_or("jaya.bounds", p.bounds)?;
    Ok(p)
}

fn sa_from_config(cfg: &Config, initial_mse: f64, seed: u64) -> Result<SaParams> {
    let mut p = SaParams::from_initial_mse(initial_mse, seed);
    p.alpha = cfg.f64_or("sa.alpha", p.alpha)?;
    p.steps_per_temp = cfg.usize_or("sa.steps_per_temp", p.steps_per_temp)?;
    p.perturb_scale = cfg.f64_or("sa.perturb_scale", p.perturb_scale)?;
    Ok(p)
}

/// Run every streaming filter and every optimizer over one scenario; emit
/// the three comparison tables plus per-optimizer histories.
pub fn cmd_compare(ctx: &Context, scenario_dir: &Path) -> Result<()> {
    let scenario = load_scenario(scenario_dir)?;
    let d = compare_defaults(ctx)?;
    let id = scenario_id(scenario_dir);
    let warmup = anc::metrics::DEFAULT_WARMUP_FRAC;
    let (curve_block, curve_window) = curve_params(&ctx.config, scenario.sample_rate())?;

    let tag = |e: Error, algo: &str| -> Error {
        match e {
            Error::Config { line, message } => Error::Config {
                line,
                message: format!("[{algo}] {message}"),
            },
            other => Error::Data(format!("[{algo}] {other}")),
        }
    };

    struct Row {
        algo: &'static str,
        report: EvalReport,
        seconds_per_output: f64,
        cost_kind: &'static str,
        params: String,
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut convergence_csv = String::from("algorithm,block_index,block_mse,smoothed_mse\n");

    // Streaming filters, fixed order.
    let streaming: [(AlgorithmId, FilterKind); 4] = [
        (AlgorithmId::Lms, FilterKind::Lms),
        (AlgorithmId::Nlms, FilterKind::Nlms),
        (AlgorithmId::Rls, FilterKind::Rls),
        (AlgorithmId::LmsQ15, FilterKind::LmsQ15),
    ];
    for (algo, kind) in streaming {
        let mut config = d.filter.clone();
        if kind == FilterKind::Nlms {
            config.mu = d.nlms_mu;
        }
        let out = run_stream(&scenario, kind, &config, &ctx.stream_options())
            .map_err(|e| tag(e, algo.name()))?;
        let report = evaluate_run(
            &scenario,
            out.denoised.samples(),
            warmup,
            curve_block,
            curve_window,
        )
        .map_err(|e| tag(e, algo.name()))?;
        for (i, (b, s)) in report
            .curve
            .block_mse
            .iter()
            .zip(&report.curve.smoothed)
            .enumerate()
        {
            let _ = writeln!(convergence_csv, "{},{i},{b},{s}", algo.name());
        }
        let total: f64 = out.deadline.per_block_times.iter().sum();
        let processed = out.deadline.per_block_times.len() * config.block_size;
        rows.push(Row {
            algo: algo.name(),
            report,
            seconds_per_output: total / processed as f64,
            cost_kind: "per_sample",
            params: format!(
                "seed={};taps={};block={};mu={}",
                d.seed, config.num_taps, config.block_size, config.mu
            ),
        });
    }

    // Offline optimizers on a window starting after the warm-up region.
    let taps = d.filter.num_taps;
    let offset = scenario.len() / 4;
    let window = d.window.min(scenario.len() - offset);
    let objective = Objective::new(
        scenario.reference.samples()[offset..offset + window].to_vec(),
        scenario.primary.samples()[offset..offset + window].to_vec(),
        taps,
    )?;
    let initial_mse = mse_objective(&vec![0.0; taps], &objective)?;

    let pso_params = pso_from_config(&ctx.config, d.seed)?;
    let jaya_params = jaya_from_config(&ctx.config, d.seed)?;
    let sa_params = sa_from_config(&ctx.config, initial_mse, d.seed)?;

    ctx.ensure_out_dir()?;
    let optimizers: [(&'static str, OptimizerRun, String); 3] = [
        (
            "pso",
            pso_optimize(&objective, &pso_params).map_err(|e| tag(e, "pso"))?,
            format!(
                "seed={};swarm={};iterations={};inertia={};c1={};c2={};bounds={};window={window};taps={taps}",
                d.seed, pso_params.swarm_size, pso_params.iterations, pso_params.inertia,
                pso_params.c1, pso_params.c2, pso_params.bounds
            ),
        ),
        (
            "jaya",
            jaya_optimize(&objective, &jaya_params).map_err(|e| tag(e, "jaya"))?,
            format!(
                "seed={};population={};iterations={};bounds={};window={window};taps={taps}",
                d.seed, jaya_params.population, jaya_params.iterations, jaya_params.bounds
            ),
        ),
        (
            "sa",
            sa_optimize(&objective, &sa_params).map_err(|e| tag(e, "sa"))?,
            format!(
                "seed={};t0={};alpha={};steps_per_temp={};min_temp={};perturb_scale={};window={window};taps={taps}",
                d.seed, sa_params.t0, sa_params.alpha, sa_params.steps_per_temp,
                sa_params.min_temp, sa_params.perturb_scale
            ),
        ),
    ];

    for (name, run, params) in &optimizers {
        write_text(
            &ctx.out_dir.join(format!("history_{name}.csv")),
            &run.history_csv(),
        )?;
        let output = apply_fixed_weights(&scenario, &run.best.position)?;
        let report = evaluate_run(&scenario, &output, warmup, curve_block, curve_window)
            .map_err(|e| tag(e, name))?;
        rows.push(Row {
            algo: name,
            report,
            seconds_per_output: run.wall_time,
            cost_kind: "per_solution",
            params: params.clone(),
        });
    }

    let mut snr_csv = String::from(
        "scenario_id,algorithm,seed,snr_in_db,snr_out_db,improvement_db,\
         convergence_block,seconds_per_output,cost_kind,params\n",
    );
    for row in &rows {
        let _ = writeln!(
            snr_csv,
            "{id},{},{},{},{},{},{},{},{},{}",
            row.algo,
            d.seed,
            row.report.snr.snr_in_db,
            row.report.snr.snr_out_db,
            row.report.snr.improvement_db,
            row.report
                .convergence_block
                .map_or(String::new(), |b| b.to_string()),
            row.seconds_per_output,
            row.cost_kind,
            row.params,
        );
    }

    // Dedicated runtime benchmark (medians over repetitions).
    let mut bench = BenchOptions::new(d.filter.clone(), d.seed);
    bench.objective_window = window;
    bench.pso = pso_params.clone();
    bench.jaya = jaya_params.clone();
    bench.sa = Some(sa_params.clone());
    let table = bench_runtime(
        &[
            AlgorithmId::Lms,
            AlgorithmId::Nlms,
            AlgorithmId::Rls,
            AlgorithmId::LmsQ15,
            AlgorithmId::Pso,
            AlgorithmId::Jaya,
            AlgorithmId::Sa,
        ],
        &scenario,
        3,
        &bench,
    )?;

    write_text(&ctx.out_dir.join("convergence.csv"), &convergence_csv)?;
    write_text(&ctx.out_dir.join("snr.csv"), &snr_csv)?;
    write_text(&ctx.out_dir.join("runtime.csv"), &table.to_csv())?;

    let mut manifest = Manifest::new(&ctx.argv, Some(d.seed));
    manifest.snapshot_config(&ctx.config);
    manifest.set("param.curve_block", curve_block.to_string());
    manifest.set("param.curve_window", curve_window.to_string());
    manifest.set("param.warmup_frac", warmup.to_string());
    manifest.set("param.objective_window", window.to_string());
    for name in [
        "convergence.csv",
        "snr.csv",
        "runtime.csv",
        "history_pso.csv",
        "history_jaya.csv",
        "history_sa.csv",
        "manifest.txt",
    ] {
        manifest.record_output(name);
    }
    manifest.write(&ctx.out_dir)
}

/// Beamform a set of mono channel recordings.
pub fn cmd_beamform(ctx: &Context, channels: &[std::path::PathBuf], clean: Option<&Path>) -> Result<()> {
    if channels.len() < 2 {
        return Err(Error::Argument(
            "beamform needs at least 2 channel WAVs".into(),
        ));
    }
    let mut signals: Vec<Vec<f64>> = Vec::with_capacity(channels.len());
    let mut sample_rate = 0u32;
    for path in channels {
        let clip = decode_wav(&std::fs::read(path)?)?;
        if clip.channel_count() != 1 {
            return Err(Error::Data(format!(
                "{}: beamform inputs must be mono",
                path.display()
            )));
        }
        if sample_rate == 0 {
            sample_rate = clip.sample_rate();
        } else if clip.sample_rate() != sample_rate {
            return Err(Error::Data(format!(
                "{}: sample rate {} differs from {}",
                path.display(),
                clip.sample_rate(),
                sample_rate
            )));
        }
        signals.push(clip.samples().to_vec());
    }
    let n = signals[0].len();
    if signals.iter().any(|s| s.len() != n) {
        return Err(Error::Data(
            "channel WAVs must all have the same length".into(),
        ));
    }

    let cfg = &ctx.config;
    let spacing = cfg.f64_or("array.spacing", 0.05)?;
    let angle = cfg.f64_or("array.angle", 0.0)?;
    let f_max = cfg.f64_or("array.f_max", 4000.0)?;
    let speed = cfg.f64_or("array.speed_of_sound", 343.0)?;
    let adaptive = cfg.u64_or("array.adaptive", 0)? != 0;
    if !spacing.is_finite() || spacing <= 0.0 {
        return Err(cfg.invalid("array.spacing", "must be > 0"));
    }
    if !f_max.is_finite() || f_max <= 0.0 {
        return Err(cfg.invalid("array.f_max", "must be > 0"));
    }
    if angle.abs() > std::f64::consts::FRAC_PI_2 {
        return Err(cfg.invalid("array.angle", "must be in [-pi/2, pi/2] radians"));
    }

    let mut geom = ArrayGeometry::new(signals.len(), spacing, sample_rate)?;
    geom.speed_of_sound = speed;

    let alias_free = max_spacing(f_max, speed);
    let spacing_ok = spacing <= alias_free;
    if !spacing_ok {
        eprintln!(
            "warning: spacing {spacing} m exceeds the alias-free limit {alias_free:.4} m \
             for content up to {f_max} Hz; spatial aliasing is possible"
        );
    }

    let output = if adaptive {
        let filter = FilterConfig::from_config(cfg)?;
        filter_and_sum_adaptive(&signals, &geom, angle, &filter)?
    } else {
        let delays = steering_delays(&geom, angle);
        delay_and_sum(&signals, &delays)?
    };

    // Power ratio is always measurable; SNR gain needs the clean reference.
    let mean_in_power: f64 = signals
        .iter()
        .map(|s| s.iter().map(|v| v * v).sum::<f64>() / n as f64)
        .sum::<f64>()
        / signals.len() as f64;
    let out_power: f64 = output.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let power_ratio_db = 10.0 * (out_power / mean_in_power).log10();

    let (snr_in_db, snr_out_db, gain_db) = match clean {
        None => (None, None, None),
        Some(path) => {
            let clip = decode_wav(&std::fs::read(path)?)?;
            if clip.len() != n {
                return Err(Error::Data(format!(
                    "{}: clean length {} does not match channels ({n})",
                    path.display(),
                    clip.len()
                )));
            }
            let clean_samples = clip.samples();
            let mut snr_in_sum = 0.0;
            for s in &signals {
                snr_in_sum += anc::metrics::snr_db(clean_samples, s)?;
            }
            let snr_in = snr_in_sum / signals.len() as f64;
            let snr_out = anc::metrics::snr_db(clean_samples, &output)?;
            (Some(snr_in), Some(snr_out), Some(snr_out - snr_in))
        }
    };

    ctx.ensure_out_dir()?;
    write_wav(
        &ctx.out_dir.join("beamformed.wav"),
        &anc::AudioClip::mono(output, sample_rate),
    )?;

    let gain_csv = format!(
        "mic_count,angle_rad,spacing_m,max_spacing_m,spacing_ok,adaptive,\
         power_ratio_db,snr_in_db,snr_out_db,gain_db\n\
         {},{angle},{spacing},{alias_free},{spacing_ok},{adaptive},{power_ratio_db},{},{},{}\n",
        signals.len(),
        cell(snr_in_db),
        cell(snr_out_db),
        cell(gain_db),
    );
    write_text(&ctx.out_dir.join("gain.csv"), &gain_csv)?;

    let mut manifest = Manifest::new(&ctx.argv, ctx.seed_override);
    manifest.snapshot_config(&ctx.config);
    manifest.set("param.mic_count", signals.len().to_string());
    manifest.set("param.spacing_m", spacing.to_string());
    manifest.set("param.angle_rad", angle.to_string());
    manifest.set("param.adaptive", adaptive.to_string());
    if let Some(g) = gain_db {
        manifest.set("measured.gain_db", g.to_string());
    }
    for name in ["beamformed.wav", "gain.csv", "manifest.txt"] {
        manifest.record_output(name);
    }
    manifest.write(&ctx.out_dir)
}
