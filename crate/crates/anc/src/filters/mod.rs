//! Adaptive noise-cancelling filters: LMS, NLMS, RLS, and a Q15 LMS.
//!
//! All four share the same tapped-delay-line structure and per-sample
//! recursion:
//!
//! ```text
//! y[n]   = sum_k w[k] * x[n-k]      (filter output)
//! e[n]   = d[n] - y[n]              (error = denoised estimate)
//! w[k]  += step * e[n] * x[n-k]     (weight update)
//! ```
//!
//! where `step` is `mu` for LMS, `mu / (eps + ||window||^2)` for NLMS, and
//! the Kalman-style gain for RLS. Blocks are processed sample-recursively,
//! so block size never changes the result - processing N samples in blocks
//! of any size matches per-sample processing bit for bit.
//!
//! The delay line holds `num_taps + block_size - 1` samples: the tail of the
//! previous block followed by the staging area for the current one.

mod q15;

use crate::config::Config;
use crate::error::{Error, Result};
pub(crate) use q15::Q15State;

/// Which adaptation rule a [`FilterState`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Lms,
    Nlms,
    Rls,
    /// LMS computed in 16-bit fixed point with saturation accounting.
    LmsQ15,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Lms => "lms",
            FilterKind::Nlms => "nlms",
            FilterKind::Rls => "rls",
            FilterKind::LmsQ15 => "lms-q15",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lms" => Ok(FilterKind::Lms),
            "nlms" => Ok(FilterKind::Nlms),
            "rls" => Ok(FilterKind::Rls),
            "lms-q15" | "lms_q15" => Ok(FilterKind::LmsQ15),
            other => Err(Error::Argument(format!(
                "unknown filter kind '{other}' (expected lms | nlms | rls | lms-q15)"
            ))),
        }
    }
}

/// Shared filter parameters. Fields irrelevant to a kind are ignored by it.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    /// Filter length L.
    pub num_taps: usize,
    /// Samples per processing block B.
    pub block_size: usize,
    /// Step size (LMS, NLMS, Q15 LMS).
    pub mu: f64,
    /// NLMS normalization regularizer; 0 is allowed and simply disables the
    /// guard (zero-energy windows then skip the update outright).
    pub nlms_epsilon: f64,
    /// RLS forgetting factor, in (0, 1].
    pub rls_lambda: f64,
    /// Initial inverse-correlation scale: P(0) = delta * I.
    pub rls_delta: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            num_taps: 96,
            block_size: 256,
            mu: 0.01,
            nlms_epsilon: 1e-6,
            rls_lambda: 0.999,
            rls_delta: 100.0,
        }
    }
}

impl FilterConfig {
    /// Read `filter.*` keys: `num_taps`, `block_size`, `mu`, `nlms_epsilon`,
    /// `rls_lambda`, `rls_delta`. Missing keys keep defaults.
    pub fn from_config(cfg: &Config) -> Result<FilterConfig> {
        let d = FilterConfig::default();
        let out = FilterConfig {
            num_taps: cfg.usize_or("filter.num_taps", d.num_taps)?,
            block_size: cfg.usize_or("filter.block_size", d.block_size)?,
            mu: cfg.f64_or("filter.mu", d.mu)?,
            nlms_epsilon: cfg.f64_or("filter.nlms_epsilon", d.nlms_epsilon)?,
            rls_lambda: cfg.f64_or("filter.rls_lambda", d.rls_lambda)?,
            rls_delta: cfg.f64_or("filter.rls_delta", d.rls_delta)?,
        };
        if out.num_taps == 0 {
            return Err(cfg.invalid("filter.num_taps", "must be >= 1"));
        }
        if out.block_size == 0 {
            return Err(cfg.invalid("filter.block_size", "must be >= 1"));
        }
        Ok(out)
    }

    fn validate(&self, kind: FilterKind) -> Result<()> {
        if self.num_taps == 0 {
            return Err(Error::Argument("num_taps must be >= 1".into()));
        }
        if self.block_size == 0 {
            return Err(Error::Argument("block_size must be >= 1".into()));
        }
        match kind {
            FilterKind::Lms | FilterKind::Nlms => {
                // mu = 0 is the degenerate fixed-filter case, kept legal so
                // pass-through runs can be expressed.
                if !self.mu.is_finite() || self.mu < 0.0 {
                    return Err(Error::Argument(format!(
                        "mu must be non-negative and finite for {}, got {}",
                        kind.name(),
                        self.mu
                    )));
                }
                if kind == FilterKind::Nlms
                    && (!self.nlms_epsilon.is_finite() || self.nlms_epsilon < 0.0)
                {
                    return Err(Error::Argument(
                        "nlms_epsilon must be non-negative".into(),
                    ));
                }
            }
            FilterKind::LmsQ15 => {
                if !self.mu.is_finite() || self.mu < 0.0 || self.mu >= 1.0 {
                    return Err(Error::Argument(format!(
                        "Q15 mu must lie in [0, 1), got {}",
                        self.mu
                    )));
                }
                if self.mu > 0.0 && (self.mu * 32768.0).round() < 1.0 {
                    return Err(Error::Argument(format!(
                        "mu = {} is below Q15 resolution (2^-15)",
                        self.mu
                    )));
                }
            }
            FilterKind::Rls => {
                if !self.rls_lambda.is_finite()
                    || self.rls_lambda <= 0.0
                    || self.rls_lambda > 1.0
                {
                    return Err(Error::Argument(format!(
                        "rls_lambda must be in (0, 1], got {}",
                        self.rls_lambda
                    )));
                }
                if !self.rls_delta.is_finite() || self.rls_delta <= 0.0 {
                    return Err(Error::Argument(format!(
                        "rls_delta must be positive, got {}",
                        self.rls_delta
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Output of one processed block: `e[n] = d[n] - y[n]` elementwise.
#[derive(Debug, Clone)]
pub struct BlockResult {
    pub y: Vec<f64>,
    pub e: Vec<f64>,
}

/// An adaptive filter's complete memory between blocks.
#[derive(Debug)]
pub struct FilterState {
    kind: FilterKind,
    config: FilterConfig,
    weights: Vec<f64>,
    /// `[previous-block tail (L-1) | staging area (B)]`.
    delay_line: Vec<f64>,
    /// Inverse correlation matrix, row-major L x L (RLS only).
    rls_p: Option<Vec<f64>>,
    q15: Option<Q15State>,
}

/// Zero-initialized filter state for the given kind.
///
/// Weights and delay line start at zero; for RLS the inverse-correlation
/// matrix starts as `delta * I`.
pub fn filter_init(kind: FilterKind, config: FilterConfig) -> Result<FilterState> {
    config.validate(kind)?;
    let l = config.num_taps;
    let state_len = l + config.block_size - 1;
    let rls_p = (kind == FilterKind::Rls).then(|| {
        let mut p = vec![0.0; l * l];
        for i in 0..l {
            p[i * l + i] = config.rls_delta;
        }
        p
    });
    let q15 = (kind == FilterKind::LmsQ15).then(|| Q15State::new(l, state_len, config.mu));
    Ok(FilterState {
        kind,
        config,
        weights: vec![0.0; l],
        delay_line: vec![0.0; state_len],
        rls_p,
        q15,
    })
}

impl FilterState {
    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn delay_line(&self) -> &[f64] {
        &self.delay_line
    }

    /// Row-major L x L inverse-correlation matrix (RLS only).
    pub fn rls_p(&self) -> Option<&[f64]> {
        self.rls_p.as_deref()
    }

    /// Saturation events so far (Q15 only).
    pub fn saturations(&self) -> Option<u64> {
        self.q15.as_ref().map(|q| q.saturations)
    }

    /// Process one block with whatever rule this state was initialized for.
    pub fn process_block(&mut self, x: &[f64], d: &[f64]) -> Result<BlockResult> {
        match self.kind {
            FilterKind::Lms => lms_process_block(self, x, d),
            FilterKind::Nlms => nlms_process_block(self, x, d),
            FilterKind::Rls => rls_process_block(self, x, d),
            FilterKind::LmsQ15 => lms_process_block_q15(self, x, d),
        }
    }

    fn check_block(&self, expected: FilterKind, x: &[f64], d: &[f64]) -> Result<()> {
        if self.kind != expected {
            return Err(Error::Argument(format!(
                "state was initialized as {}, not {}",
                self.kind.name(),
                expected.name()
            )));
        }
        let b = self.config.block_size;
        if x.len() != b || d.len() != b {
            return Err(Error::Argument(format!(
                "block length mismatch: expected {b}, got x={}, d={}",
                x.len(),
                d.len()
            )));
        }
        if x.iter().chain(d).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite sample in input block".into()));
        }
        Ok(())
    }

    /// Stage `x` after the history tail and return (L, B).
    fn stage(&mut self, x: &[f64]) -> (usize, usize) {
        let l = self.config.num_taps;
        let b = self.config.block_size;
        self.delay_line[l - 1..].copy_from_slice(x);
        (l, b)
    }

    /// Keep the last L-1 samples as history for the next block.
    fn retire(&mut self) {
        let b = self.config.block_size;
        self.delay_line.copy_within(b.., 0);
    }
}

/// LMS: `w[k] += mu * e[n] * x[n-k]`, updated every sample within the block.
pub fn lms_process_block(state: &mut FilterState, x: &[f64], d: &[f64]) -> Result<BlockResult> {
    state.check_block(FilterKind::Lms, x, d)?;
    let (l, b) = state.stage(x);
    let mu = state.config.mu;
    let mut y = Vec::with_capacity(b);
    let mut e = Vec::with_capacity(b);
    for (i, &dn) in d.iter().enumerate() {
        let win = &state.delay_line[i..i + l]; // win[l-1] is x[n], win[l-1-k] is x[n-k]
        let out: f64 = state
            .weights
            .iter()
            .zip(win.iter().rev())
            .map(|(w, v)| w * v)
            .sum();
        let err = dn - out;
        let g = mu * err;
        for (w, v) in state.weights.iter_mut().zip(win.iter().rev()) {
            *w += g * v;
        }
        y.push(out);
        e.push(err);
    }
    state.retire();
    Ok(BlockResult { y, e })
}

/// NLMS: the LMS step scaled by the energy of the current input window,
/// `w[k] += mu / (eps + ||window||^2) * e[n] * x[n-k]`.
pub fn nlms_process_block(state: &mut FilterState, x: &[f64], d: &[f64]) -> Result<BlockResult> {
    state.check_block(FilterKind::Nlms, x, d)?;
    let (l, b) = state.stage(x);
    let mu = state.config.mu;
    let eps = state.config.nlms_epsilon;
    let mut y = Vec::with_capacity(b);
    let mut e = Vec::with_capacity(b);
    for (i, &dn) in d.iter().enumerate() {
        let win = &state.delay_line[i..i + l];
        let out: f64 = state
            .weights
            .iter()
            .zip(win.iter().rev())
            .map(|(w, v)| w * v)
            .sum();
        let err = dn - out;
        let energy: f64 = win.iter().map(|v| v * v).sum();
        let denom = eps + energy;
        if denom > 0.0 {
            let g = mu * err / denom;
            for (w, v) in state.weights.iter_mut().zip(win.iter().rev()) {
                *w += g * v;
            }
        }
        y.push(out);
        e.push(err);
    }
    state.retire();
    Ok(BlockResult { y, e })
}

/// Exponentially-weighted RLS.
///
/// Per sample, with `u` the current input window and `P` the inverse
/// correlation matrix: `k = P u / (lambda + u' P u)`, `w += k e`,
/// `P = (P - k u' P) / lambda`. `P` is re-symmetrized after every update
/// and adaptation aborts if its diagonal stops being positive.
pub fn rls_process_block(state: &mut FilterState, x: &[f64], d: &[f64]) -> Result<BlockResult> {
    state.check_block(FilterKind::Rls, x, d)?;
    let (l, b) = state.stage(x);
    let lambda = state.config.rls_lambda;
    let mut y = Vec::with_capacity(b);
    let mut e = Vec::with_capacity(b);
    let mut u = vec![0.0; l];
    let mut pu = vec![0.0; l];
    for (i, &dn) in d.iter().enumerate() {
        let win = &state.delay_line[i..i + l];
        for (k, slot) in u.iter_mut().enumerate() {
            *slot = win[l - 1 - k]; // u[k] = x[n-k]
        }
        let p = state.rls_p.as_mut().expect("RLS state carries P");

        for (row, pu_i) in pu.iter_mut().enumerate() {
            let r = &p[row * l..(row + 1) * l];
            *pu_i = r.iter().zip(&u).map(|(a, b)| a * b).sum();
        }
        let upu: f64 = u.iter().zip(&pu).map(|(a, b)| a * b).sum();
        let denom = lambda + upu;
        if !denom.is_finite() {
            return Err(Error::Numeric("RLS gain denominator diverged".into()));
        }

        let out: f64 = state.weights.iter().zip(&u).map(|(w, v)| w * v).sum();
        let err = dn - out;

        // With P symmetric, u'P equals (P u)', so `pu` serves both roles.
        for row in 0..l {
            let gain = pu[row] / denom;
            state.weights[row] += gain * err;
            for col in 0..l {
                p[row * l + col] = (p[row * l + col] - gain * pu[col]) / lambda;
            }
        }
        for row in 0..l {
            for col in row + 1..l {
                let m = 0.5 * (p[row * l + col] + p[col * l + row]);
                p[row * l + col] = m;
                p[col * l + row] = m;
            }
            let diag = p[row * l + row];
            if !diag.is_finite() || diag <= 0.0 {
                return Err(Error::Numeric(format!(
                    "RLS inverse-correlation matrix lost positive-definiteness \
                     (diagonal entry {row} = {diag})"
                )));
            }
        }
        y.push(out);
        e.push(err);
    }
    state.retire();
    Ok(BlockResult { y, e })
}

/// LMS computed in Q15 fixed point.
///
/// Products are Q15 x Q15 with a 32-bit accumulator, post-shifted back to
/// Q15; every add and store saturates, and saturation events are counted
/// rather than raised (see [`FilterState::saturations`]). Returned samples
/// are converted back to normalized reals; `e` is formed in float from the
/// caller's `d`, so `e + y == d` holds exactly.
pub fn lms_process_block_q15(
    state: &mut FilterState,
    x: &[f64],
    d: &[f64],
) -> Result<BlockResult> {
    state.check_block(FilterKind::LmsQ15, x, d)?;
    let l = state.config.num_taps;
    let b = state.config.block_size;
    let q = state.q15.as_mut().expect("Q15 state present");
    let result = q.process_block(l, b, x, d);
    // Mirror the integer state into the float views.
    for (wf, wq) in state.weights.iter_mut().zip(&q.weights) {
        *wf = f64::from(*wq) / 32768.0;
    }
    for (df, dq) in state.delay_line.iter_mut().zip(&q.delay) {
        *df = f64::from(*dq) / 32768.0;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::rng_from_seed(seed);
        (0..n)
            .map(|_| crate::rng::standard_normal(&mut rng))
            .collect()
    }

    fn cfg(taps: usize, block: usize, mu: f64) -> FilterConfig {
        FilterConfig {
            num_taps: taps,
            block_size: block,
            mu,
            ..FilterConfig::default()
        }
    }

    #[test]
    fn init_sizes_match_the_state_formula() {
        let s = filter_init(FilterKind::Lms, cfg(96, 256, 0.01)).unwrap();
        assert_eq!(s.delay_line().len(), 351);
        assert!(s.weights().iter().all(|&w| w == 0.0));

        let s = filter_init(FilterKind::Lms, cfg(1, 1, 0.5)).unwrap();
        assert_eq!(s.delay_line().len(), 1);
    }

    #[test]
    fn rls_init_is_delta_times_identity() {
        let mut c = cfg(4, 8, 0.0);
        c.mu = 0.0; // unused by RLS
        c.rls_delta = 100.0;
        let s = filter_init(FilterKind::Rls, c).unwrap();
        let p = s.rls_p().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 100.0 } else { 0.0 };
                assert_eq!(p[i * 4 + j], expected);
            }
        }
    }

    #[test]
    fn config_validation_per_kind() {
        assert!(filter_init(FilterKind::Lms, cfg(0, 1, 0.1)).is_err());
        assert!(filter_init(FilterKind::Lms, cfg(1, 0, 0.1)).is_err());
        assert!(filter_init(FilterKind::Lms, cfg(1, 1, -0.1)).is_err());
        assert!(filter_init(FilterKind::Lms, cfg(1, 1, f64::NAN)).is_err());
        let mut bad = cfg(1, 1, 0.1);
        bad.rls_lambda = 1.5;
        assert!(filter_init(FilterKind::Rls, bad).is_err());
        let mut bad = cfg(1, 1, 0.1);
        bad.rls_delta = 0.0;
        assert!(filter_init(FilterKind::Rls, bad).is_err());
        // mu below Q15 resolution
        assert!(filter_init(FilterKind::LmsQ15, cfg(1, 1, 1e-6)).is_err());
    }

    #[test]
    fn lms_single_tap_hand_example() {
        let mut s = filter_init(FilterKind::Lms, cfg(1, 1, 0.5)).unwrap();
        let r = lms_process_block(&mut s, &[1.0], &[2.0]).unwrap();
        assert_eq!(r.y, vec![0.0]);
        assert_eq!(r.e, vec![2.0]);
        assert_eq!(s.weights(), &[1.0]);
    }

    #[test]
    fn zero_mu_freezes_the_filter() {
        // The degenerate fixed-filter case: weights never move and the
        // output is the (zero) fixed filter's output.
        let mut s = filter_init(FilterKind::Lms, cfg(2, 4, 0.0)).unwrap();
        let x = [1.0, -1.0, 0.5, 0.25];
        let d = [0.3, 0.3, 0.3, 0.3];
        let r = s.process_block(&x, &d).unwrap();
        assert_eq!(s.weights(), &[0.0, 0.0]);
        assert_eq!(r.y, vec![0.0; 4]);
        assert_eq!(r.e, d.to_vec());
    }

    #[test]
    fn block_length_mismatch_is_an_argument_error() {
        let mut s = filter_init(FilterKind::Lms, cfg(4, 8, 0.01)).unwrap();
        assert!(matches!(
            lms_process_block(&mut s, &[0.0; 7], &[0.0; 8]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn non_finite_input_is_a_numeric_error() {
        let mut s = filter_init(FilterKind::Lms, cfg(1, 2, 0.01)).unwrap();
        assert!(matches!(
            lms_process_block(&mut s, &[0.0, f64::NAN], &[0.0, 0.0]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let mut s = filter_init(FilterKind::Lms, cfg(1, 1, 0.5)).unwrap();
        assert!(nlms_process_block(&mut s, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn nlms_single_step_algebra() {
        let mut c = cfg(1, 1, 1.0);
        c.nlms_epsilon = 0.0;
        let mut s = filter_init(FilterKind::Nlms, c).unwrap();
        let r = nlms_process_block(&mut s, &[2.0], &[4.0]).unwrap();
        assert_eq!(r.y, vec![0.0]);
        assert_eq!(r.e, vec![4.0]);
        assert_eq!(s.weights(), &[2.0]); // w = 0 + (1/4) * 4 * 2
        // a-posteriori error d - w*x = 0
        assert_abs_diff_eq!(4.0 - s.weights()[0] * 2.0, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nlms_zero_excitation_changes_nothing() {
        let mut c = cfg(4, 8, 0.5);
        c.nlms_epsilon = 1e-6;
        let mut s = filter_init(FilterKind::Nlms, c).unwrap();
        let r = nlms_process_block(&mut s, &[0.0; 8], &[0.5; 8]).unwrap();
        assert!(s.weights().iter().all(|&w| w == 0.0));
        assert_eq!(r.e, vec![0.5; 8]);
    }

    #[test]
    fn nlms_posteriori_contraction() {
        // Single tap, eps = 0: after each update the a-posteriori error is
        // (1 - mu) times the a-priori error.
        for mu in [0.1, 0.5, 1.0, 1.9] {
            let mut c = cfg(1, 1, mu);
            c.nlms_epsilon = 0.0;
            let mut s = filter_init(FilterKind::Nlms, c).unwrap();
            let x = 1.3;
            let d = 0.7;
            let r = nlms_process_block(&mut s, &[x], &[d]).unwrap();
            let e_pre = r.e[0];
            let e_post = d - s.weights()[0] * x;
            assert_abs_diff_eq!(
                e_post.abs(),
                (1.0 - mu).abs() * e_pre.abs(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn rls_single_tap_matches_least_squares() {
        let mut c = cfg(1, 1, 0.0);
        c.mu = 0.1; // unused
        c.rls_lambda = 1.0;
        c.rls_delta = 1e6;
        let mut s = filter_init(FilterKind::Rls, c).unwrap();
        for _ in 0..3 {
            rls_process_block(&mut s, &[1.0], &[2.0]).unwrap();
        }
        // Least-squares solution of d = w*x over the data is exactly 2.
        assert_abs_diff_eq!(s.weights()[0], 2.0, epsilon = 1e-5);
    }

    #[test]
    fn rls_zero_block_freezes_weights() {
        let mut c = cfg(3, 4, 0.0);
        c.mu = 0.1;
        let mut s = filter_init(FilterKind::Rls, c).unwrap();
        let r = rls_process_block(&mut s, &[0.0; 4], &[1.0; 4]).unwrap();
        assert!(s.weights().iter().all(|&w| w == 0.0));
        assert_eq!(r.e, vec![1.0; 4]);
    }

    #[test]
    fn rls_identifies_a_known_channel() {
        let taps = [0.6, -0.3, 0.15, 0.05];
        let n = 200;
        let x = white(n, 5);
        let d = crate::synth::fir_channel(&x, &taps).unwrap();
        let mut c = cfg(4, 1, 0.0);
        c.mu = 0.1;
        c.rls_lambda = 1.0;
        c.rls_delta = 1e6;
        let mut s = filter_init(FilterKind::Rls, c).unwrap();
        for i in 0..n {
            rls_process_block(&mut s, &x[i..=i], &d[i..=i]).unwrap();
        }
        for (w, t) in s.weights().iter().zip(&taps) {
            assert_abs_diff_eq!(w, t, epsilon = 1e-4);
        }
    }

    #[test]
    fn rls_p_stays_symmetric_positive_on_diagonal() {
        let n = 400;
        let x = white(n, 9);
        let d = crate::synth::fir_channel(&x, &[0.5, 0.2]).unwrap();
        let mut c = cfg(2, 4, 0.0);
        c.mu = 0.1;
        let mut s = filter_init(FilterKind::Rls, c).unwrap();
        for i in (0..n).step_by(4) {
            rls_process_block(&mut s, &x[i..i + 4], &d[i..i + 4]).unwrap();
            let p = s.rls_p().unwrap();
            assert_eq!(p[1], p[2], "P must stay symmetric");
            assert!(p[0] > 0.0 && p[3] > 0.0);
        }
    }

    #[test]
    fn block_processing_equals_per_sample_processing() {
        // The same 2000 samples through B=1 and B=50 must give identical
        // weight trajectories for all three float filters.
        let n = 2000;
        let x = white(n, 21);
        let d = crate::synth::fir_channel(&x, &[0.4, -0.2, 0.1]).unwrap();
        for kind in [FilterKind::Lms, FilterKind::Nlms, FilterKind::Rls] {
            let mut c1 = cfg(8, 1, 0.02);
            let mut c2 = cfg(8, 50, 0.02);
            c1.rls_delta = 100.0;
            c2.rls_delta = 100.0;
            let mut s1 = filter_init(kind, c1).unwrap();
            let mut s2 = filter_init(kind, c2).unwrap();
            let mut e1 = Vec::new();
            let mut e2 = Vec::new();
            for i in 0..n {
                e1.extend(s1.process_block(&x[i..=i], &d[i..=i]).unwrap().e);
            }
            for i in (0..n).step_by(50) {
                e2.extend(s2.process_block(&x[i..i + 50], &d[i..i + 50]).unwrap().e);
            }
            let rms: f64 = (e1
                .iter()
                .zip(&e2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / n as f64)
                .sqrt();
            assert!(rms < 1e-12, "{}: block/sample RMS {rms}", kind.name());
            for (a, b) in s1.weights().iter().zip(s2.weights()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn error_identity_holds_for_all_kinds() {
        let x = white(64, 33);
        let d = white(64, 34);
        for kind in [
            FilterKind::Lms,
            FilterKind::Nlms,
            FilterKind::Rls,
            FilterKind::LmsQ15,
        ] {
            let mut c = cfg(6, 64, 0.05);
            c.nlms_epsilon = 1e-6;
            let mut s = filter_init(kind, c).unwrap();
            // Q15 inputs must be representable; scale into [-1, 1).
            let scale = 0.2;
            let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let ds: Vec<f64> = d.iter().map(|v| v * scale).collect();
            let r = s.process_block(&xs, &ds).unwrap();
            for (i, ((ev, yv), dv)) in r.e.iter().zip(&r.y).zip(&ds).enumerate() {
                // e is defined as d - y; adding y back recovers d up to
                // one rounding of the subtraction.
                assert!(
                    (ev + yv - dv).abs() < 1e-12,
                    "{}: e + y != d at {i}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn q15_single_tap_tracks_float() {
        let mut s15 = filter_init(FilterKind::LmsQ15, cfg(1, 1, 0.5)).unwrap();
        let mut sf = filter_init(FilterKind::Lms, cfg(1, 1, 0.5)).unwrap();
        let x = [0.9999];
        let d = [0.5];
        let r15 = lms_process_block_q15(&mut s15, &x, &d).unwrap();
        let rf = lms_process_block(&mut sf, &x, &d).unwrap();
        assert_abs_diff_eq!(r15.y[0], rf.y[0], epsilon = 2f64.powi(-14));
        assert_abs_diff_eq!(
            s15.weights()[0],
            sf.weights()[0],
            epsilon = 2f64.powi(-14)
        );
        assert_eq!(s15.saturations(), Some(0));
    }

    #[test]
    fn q15_zero_input_is_silent_and_saturation_free() {
        let mut s = filter_init(FilterKind::LmsQ15, cfg(8, 16, 0.01)).unwrap();
        let r = lms_process_block_q15(&mut s, &[0.0; 16], &[0.0; 16]).unwrap();
        assert!(r.y.iter().all(|&v| v == 0.0));
        assert!(r.e.iter().all(|&v| v == 0.0));
        assert_eq!(s.saturations(), Some(0));
    }

    #[test]
    fn q15_counts_saturations_on_hot_input() {
        let mut s = filter_init(FilterKind::LmsQ15, cfg(2, 4, 0.9)).unwrap();
        // +1.0 is not representable in Q15; conversion alone must saturate.
        let r = lms_process_block_q15(&mut s, &[1.0; 4], &[1.0; 4]).unwrap();
        assert!(s.saturations().unwrap() > 0);
        assert!(r.y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn lms_weights_stay_bounded_on_long_run() {
        // One million samples at the default configuration: no divergence.
        let spec = crate::synth::ScenarioSpec {
            duration_s: 1_000_000.0 / 48_000.0,
            ..Default::default()
        };
        let sc = crate::synth::synth_scenario(&spec).unwrap();
        let mut s = filter_init(FilterKind::Lms, FilterConfig::default()).unwrap();
        let b = 256;
        let n = sc.len() / b * b;
        for i in (0..n).step_by(b) {
            s.process_block(
                &sc.reference.samples()[i..i + b],
                &sc.primary.samples()[i..i + b],
            )
            .unwrap();
        }
        let max_w = s.weights().iter().fold(0.0f64, |m, &w| m.max(w.abs()));
        assert!(max_w < 10.0, "weights grew to {max_w}");
    }

    #[test]
    fn lms_q15_full_scenario_stays_close_to_float() {
        let spec = crate::synth::ScenarioSpec {
            duration_s: 1.0,
            ..Default::default()
        };
        let sc = crate::synth::synth_scenario(&spec).unwrap();
        let mut s15 = filter_init(FilterKind::LmsQ15, FilterConfig::default()).unwrap();
        let mut sf = filter_init(FilterKind::Lms, FilterConfig::default()).unwrap();
        let b = 256;
        let n = sc.len() / b * b;
        let mut sum_sq = 0.0;
        for i in (0..n).step_by(b) {
            let x = &sc.reference.samples()[i..i + b];
            let d = &sc.primary.samples()[i..i + b];
            let r15 = s15.process_block(x, d).unwrap();
            let rf = sf.process_block(x, d).unwrap();
            sum_sq += r15
                .y
                .iter()
                .zip(&rf.y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        let rms = (sum_sq / n as f64).sqrt();
        assert!(rms < 1e-3, "Q15 vs float output RMS {rms}");
    }

    #[test]
    fn weights_update_within_blocks_not_once_per_block() {
        // Two samples in one block: the second output must already see the
        // weight change caused by the first sample.
        let mut s = filter_init(FilterKind::Lms, cfg(1, 2, 0.5)).unwrap();
        let r = lms_process_block(&mut s, &[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r.y[0], 0.0);
        assert_eq!(r.y[1], 1.0); // w became 1.0 after the first sample
    }

    #[test]
    fn determinism_same_inputs_same_trajectory() {
        let x = white(512, 77);
        let d = white(512, 78);
        let run = |kind| {
            let mut s = filter_init(kind, cfg(16, 64, 0.05)).unwrap();
            for i in (0..512).step_by(64) {
                s.process_block(&x[i..i + 64], &d[i..i + 64]).unwrap();
            }
            s.weights().to_vec()
        };
        assert_eq!(run(FilterKind::Lms), run(FilterKind::Lms));
        assert_eq!(run(FilterKind::Rls), run(FilterKind::Rls));
    }
}
