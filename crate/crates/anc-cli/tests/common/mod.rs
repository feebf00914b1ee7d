//! Shared test utilities: independent reference implementations (oracles)
//! and helpers for driving the CLI binary.
//!
//! The oracles deliberately avoid the library's delay-line machinery: they
//! index straight into the full signal history, so they can disagree with
//! the implementation if the implementation's buffering is wrong.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

/// Per-sample LMS over full signals. Returns (errors, final weights).
pub fn lms_reference(x: &[f64], d: &[f64], taps: usize, mu: f64) -> (Vec<f64>, Vec<f64>) {
    let mut w = vec![0.0; taps];
    let mut e = Vec::with_capacity(d.len());
    for n in 0..d.len() {
        let mut y = 0.0;
        for k in 0..taps.min(n + 1) {
            y += w[k] * x[n - k];
        }
        let err = d[n] - y;
        for k in 0..taps.min(n + 1) {
            w[k] += mu * err * x[n - k];
        }
        e.push(err);
    }
    (e, w)
}

/// Per-sample NLMS (window-energy normalization) over full signals.
pub fn nlms_reference(
    x: &[f64],
    d: &[f64],
    taps: usize,
    mu: f64,
    epsilon: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut w = vec![0.0; taps];
    let mut e = Vec::with_capacity(d.len());
    for n in 0..d.len() {
        let mut y = 0.0;
        let mut energy = 0.0;
        for k in 0..taps.min(n + 1) {
            y += w[k] * x[n - k];
            energy += x[n - k] * x[n - k];
        }
        let err = d[n] - y;
        let denom = epsilon + energy;
        if denom > 0.0 {
            let g = mu * err / denom;
            for k in 0..taps.min(n + 1) {
                w[k] += g * x[n - k];
            }
        }
        e.push(err);
    }
    (e, w)
}

/// Per-sample exponentially-weighted RLS over full signals.
#[allow(clippy::needless_range_loop)]
pub fn rls_reference(
    x: &[f64],
    d: &[f64],
    taps: usize,
    lambda: f64,
    delta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut w = vec![0.0; taps];
    let mut p = vec![vec![0.0; taps]; taps];
    for (i, row) in p.iter_mut().enumerate() {
        row[i] = delta;
    }
    let mut e = Vec::with_capacity(d.len());
    let mut u = vec![0.0; taps];
    for n in 0..d.len() {
        for (k, slot) in u.iter_mut().enumerate() {
            *slot = if n >= k { x[n - k] } else { 0.0 };
        }
        let pu: Vec<f64> = p
            .iter()
            .map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum())
            .collect();
        let upu: f64 = u.iter().zip(&pu).map(|(a, b)| a * b).sum();
        let denom = lambda + upu;
        let y: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
        let err = d[n] - y;
        for i in 0..taps {
            let gain = pu[i] / denom;
            w[i] += gain * err;
            for j in 0..taps {
                p[i][j] = (p[i][j] - gain * pu[j]) / lambda;
            }
        }
        for i in 0..taps {
            for j in i + 1..taps {
                let m = 0.5 * (p[i][j] + p[j][i]);
                p[i][j] = m;
                p[j][i] = m;
            }
        }
        e.push(err);
    }
    (e, w)
}

/// Batch least squares `min ||d - U w||` with zero pre-history windows,
/// solved by Gaussian elimination on the normal equations.
#[allow(clippy::needless_range_loop)]
pub fn normal_equation_weights(x: &[f64], d: &[f64], taps: usize) -> Vec<f64> {
    let n = d.len();
    let mut a = vec![vec![0.0; taps]; taps];
    let mut b = vec![0.0; taps];
    for t in 0..n {
        for i in 0..taps.min(t + 1) {
            b[i] += d[t] * x[t - i];
            for j in 0..taps.min(t + 1) {
                a[i][j] += x[t - i] * x[t - j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(&b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..taps {
        let pivot = (col..taps)
            .max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        assert!(m[col][col].abs() > 1e-12, "singular normal equations");
        for row in col + 1..taps {
            let f = m[row][col] / m[col][col];
            for k in col..=taps {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut w = vec![0.0; taps];
    for row in (0..taps).rev() {
        let mut acc = m[row][taps];
        for k in row + 1..taps {
            acc -= m[row][k] * w[k];
        }
        w[row] = acc / m[row][row];
    }
    w
}

pub fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    (a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64)
        .sqrt()
}

pub fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = anc::rng::rng_from_seed(seed);
    (0..n)
        .map(|_| anc::rng::standard_normal(&mut rng))
        .collect()
}

/// Random-sign exponentially decaying unit-energy channel.
pub fn decaying_channel(taps: usize, seed: u64) -> Vec<f64> {
    use rand_like::SignSource;
    let mut src = SignSource::new(seed);
    let mut h: Vec<f64> = (0..taps)
        .map(|k| src.sign() * 0.7f64.powi(k as i32))
        .collect();
    let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut h {
        *v /= norm;
    }
    h
}

/// Minimal deterministic sign source so the channel helper does not depend
/// on the library's generator choices.
mod rand_like {
    pub struct SignSource(u64);
    impl SignSource {
        pub fn new(seed: u64) -> Self {
            SignSource(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).max(1))
        }
        pub fn sign(&mut self) -> f64 {
            // xorshift64
            let mut v = self.0;
            v ^= v << 13;
            v ^= v >> 7;
            v ^= v << 17;
            self.0 = v;
            if v & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        }
    }
}

pub fn anc_bin() -> &'static str {
    env!("CARGO_BIN_EXE_anc")
}

/// Run the CLI with the given arguments in `cwd`.
pub fn run_anc(cwd: &Path, args: &[&str]) -> Output {
    std::process::Command::new(anc_bin())
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("failed to spawn anc binary")
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().unwrap_or(-1)
}

pub fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Columns whose values are wall-clock measurements and therefore the only
/// CSV content allowed to differ between identically-seeded runs.
const TIMING_COLUMNS: [&str; 3] = ["elapsed_seconds", "seconds_per_output", "overrun_flag"];

/// Canonicalize a CSV for determinism comparison: blank the wall-clock
/// columns, then sort the data rows (runtime tables are sorted by measured
/// cost, so their row order is itself a measurement).
pub fn mask_timing_csv(text: &str) -> String {
    let mut lines = text.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let cols: Vec<&str> = header.split(',').collect();
    let masked: Vec<usize> = cols
        .iter()
        .enumerate()
        .filter(|(_, c)| TIMING_COLUMNS.contains(c))
        .map(|(i, _)| i)
        .collect();
    let mut rows: Vec<String> = lines
        .map(|line| {
            let mut cells: Vec<&str> = line.split(',').collect();
            for &i in &masked {
                if i < cells.len() {
                    cells[i] = "";
                }
            }
            cells.join(",")
        })
        .collect();
    rows.sort();
    format!("{header}\n{}", rows.join("\n"))
}

/// Compare two output directories: WAVs byte-identical, CSVs identical
/// after timing-column masking. The manifest (which carries the timestamp)
/// is excluded. Returns a list of mismatch descriptions.
pub fn compare_run_dirs(a: &Path, b: &Path) -> Vec<String> {
    let mut problems = Vec::new();
    let mut names: Vec<PathBuf> = std::fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().path().file_name().unwrap().into())
        .collect();
    names.sort();
    for name in names {
        let name_str = name.to_string_lossy();
        if name_str == "manifest.txt" {
            continue;
        }
        let fa = std::fs::read(a.join(&name)).unwrap();
        let fb = match std::fs::read(b.join(&name)) {
            Ok(f) => f,
            Err(_) => {
                problems.push(format!("{name_str}: missing in second run"));
                continue;
            }
        };
        if name_str.ends_with(".csv") {
            let ca = mask_timing_csv(&String::from_utf8_lossy(&fa));
            let cb = mask_timing_csv(&String::from_utf8_lossy(&fb));
            if ca != cb {
                problems.push(format!("{name_str}: CSV content differs beyond timing columns"));
            }
        } else if fa != fb {
            problems.push(format!("{name_str}: bytes differ"));
        }
    }
    problems
}
