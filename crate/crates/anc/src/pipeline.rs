//! Simulated real-time data path: ping-pong double buffering.
//!
//! The embedded original moves microphone samples by DMA into one half of a
//! shared buffer while the CPU filters the other half, swapping on every
//! half-transfer interrupt so the stream never gaps:
//!
//! ```text
//!            +-----------+-----------+
//!  producer  |  half A   |  half B   |  consumer
//!  (DMA) --> |  filling  |  ready    | --> filter --> e[n]
//!            +-----------+-----------+
//!                 swap on half-complete
//! ```
//!
//! Here the producer is a paced reader over a pre-synthesized scenario and
//! the consumer is an adaptive filter. Both microphone streams (reference
//! and primary) advance in lockstep through one shared schedule, the
//! software equivalent of hardware-synchronized dual inputs. A half is owned
//! by exactly one side at a time; the scheduler asserts every ownership
//! transition. The threaded mode runs producer and consumer concurrently,
//! the interleaved mode runs the same schedule on one thread and must
//! produce bit-identical output.

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::filters::{filter_init, FilterConfig, FilterKind, FilterState};
use crate::synth::Scenario;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Real-time budget for one block: `block_size / sample_rate` seconds.
pub fn budget(block_size: usize, sample_rate: u32) -> f64 {
    assert!(block_size > 0, "block size must be positive");
    assert!(sample_rate > 0, "sample rate must be positive");
    block_size as f64 / f64::from(sample_rate)
}

/// Timing record of one streaming run.
#[derive(Debug, Clone)]
pub struct DeadlineReport {
    /// Seconds available per block at the stream rate.
    pub block_budget: f64,
    /// Measured consumer seconds per block (wall clock; varies per run).
    pub per_block_times: Vec<f64>,
    pub max_time: f64,
    /// Blocks whose processing time exceeded the budget.
    pub overruns: usize,
    /// `block_budget / max_time`; how many times over real time the
    /// consumer ran.
    pub headroom: f64,
    /// Zeros appended to complete the trailing partial block (0 if none).
    pub padded_tail: usize,
}

impl DeadlineReport {
    fn from_times(block_budget: f64, per_block_times: Vec<f64>, padded_tail: usize) -> Self {
        let max_time = per_block_times.iter().cloned().fold(0.0f64, f64::max);
        let overruns = per_block_times
            .iter()
            .filter(|&&t| t > block_budget)
            .count();
        let headroom = if max_time > 0.0 {
            block_budget / max_time
        } else {
            f64::INFINITY
        };
        DeadlineReport {
            block_budget,
            per_block_times,
            max_time,
            overruns,
            headroom,
            padded_tail,
        }
    }

    /// Plot-ready CSV: `block_index,elapsed_seconds,budget_seconds,overrun_flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block_index,elapsed_seconds,budget_seconds,overrun_flag\n");
        for (i, t) in self.per_block_times.iter().enumerate() {
            out.push_str(&format!(
                "{i},{t},{},{}\n",
                self.block_budget,
                (*t > self.block_budget) as u8
            ));
        }
        out
    }
}

/// How [`run_stream`] schedules the producer and consumer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// One thread alternating producer and consumer steps.
    Interleaved,
    /// Producer thread and consumer thread sharing the ping-pong buffer.
    Threaded,
}

/// Streaming options.
#[derive(Debug, Clone, Copy)]
pub struct StreamOptions {
    pub mode: ExecMode,
    /// Pace the producer at the real-time rate (for demonstrations); off by
    /// default so tests and CI run as fast as possible.
    pub paced: bool,
}

impl Default for StreamOptions {
    fn default() -> Self {
        StreamOptions {
            mode: ExecMode::Threaded,
            paced: false,
        }
    }
}

/// Result of a streaming run.
#[derive(Debug)]
pub struct StreamOutput {
    /// The concatenated error signal - the denoised estimate - trimmed to
    /// the scenario length.
    pub denoised: AudioClip,
    pub deadline: DeadlineReport,
    /// Final filter state (weights, saturation counts).
    pub filter: FilterState,
}

#[derive(Debug)]
struct HalfBuf {
    x: Vec<f64>,
    d: Vec<f64>,
    block_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HalfState {
    Free,
    Filling,
    Ready,
    Processing,
}

struct Inner {
    halves: [Option<HalfBuf>; 2],
    state: [HalfState; 2],
    fill_counts: [usize; 2],
    abort: bool,
}

/// Two block-sized halves alternately filled by the producer and drained by
/// the consumer. Every ownership transition is checked; a producer and the
/// consumer can never address the same half at the same time.
pub struct PingPongBuffer {
    inner: Mutex<Inner>,
    cv: Condvar,
}

impl PingPongBuffer {
    pub fn new(block_size: usize) -> Self {
        let make = || {
            Some(HalfBuf {
                x: vec![0.0; block_size],
                d: vec![0.0; block_size],
                block_index: usize::MAX,
            })
        };
        PingPongBuffer {
            inner: Mutex::new(Inner {
                halves: [make(), make()],
                state: [HalfState::Free; 2],
                fill_counts: [0; 2],
                abort: false,
            }),
            cv: Condvar::new(),
        }
    }

    /// Times each half has been handed to the producer.
    pub fn fill_counts(&self) -> [usize; 2] {
        self.inner.lock().unwrap().fill_counts
    }

    /// Producer side: wait for `half` to be free and take exclusive access.
    fn producer_claim(&self, half: usize) -> Option<HalfBuf> {
        let mut inner = self.inner.lock().unwrap();
        loop {
            if inner.abort {
                return None;
            }
            if inner.state[half] == HalfState::Free {
                break;
            }
            inner = self.cv.wait(inner).unwrap();
        }
        assert_eq!(
            inner.state[half],
            HalfState::Free,
            "producer claimed a half it does not own"
        );
        inner.state[half] = HalfState::Filling;
        inner.fill_counts[half] += 1;
        inner.halves[half].take()
    }

    fn producer_release(&self, half: usize, buf: HalfBuf) {
        let mut inner = self.inner.lock().unwrap();
        assert_eq!(
            inner.state[half],
            HalfState::Filling,
            "producer released a half it was not filling"
        );
        inner.halves[half] = Some(buf);
        inner.state[half] = HalfState::Ready;
        self.cv.notify_all();
    }

    /// Consumer side: wait until the half holding `expected_block` is ready.
    fn consumer_claim(&self, expected_block: usize) -> Option<(usize, HalfBuf)> {
        let mut inner = self.inner.lock().unwrap();
        loop {
            if inner.abort {
                return None;
            }
            let hit = (0..2).find(|&h| {
                inner.state[h] == HalfState::Ready
                    && inner.halves[h].as_ref().map(|b| b.block_index) == Some(expected_block)
            });
            if let Some(h) = hit {
                assert_eq!(
                    inner.state[h],
                    HalfState::Ready,
                    "consumer claimed a half that was not ready"
                );
                inner.state[h] = HalfState::Processing;
                return Some((h, inner.halves[h].take().unwrap()));
            }
            inner = self.cv.wait(inner).unwrap();
        }
    }

    fn consumer_release(&self, half: usize, buf: HalfBuf) {
        let mut inner = self.inner.lock().unwrap();
        assert_eq!(
            inner.state[half],
            HalfState::Processing,
            "consumer released a half it was not processing"
        );
        inner.halves[half] = Some(buf);
        inner.state[half] = HalfState::Free;
        self.cv.notify_all();
    }

    fn abort(&self) {
        self.inner.lock().unwrap().abort = true;
        self.cv.notify_all();
    }
}

/// Copy block `k` of the scenario into a half, zero-padding past the end.
fn fill_half(buf: &mut HalfBuf, scenario: &Scenario, k: usize, block_size: usize) {
    let n = scenario.len();
    let start = k * block_size;
    let end = (start + block_size).min(n);
    let valid = end - start;
    buf.x[..valid].copy_from_slice(&scenario.reference.samples()[start..end]);
    buf.d[..valid].copy_from_slice(&scenario.primary.samples()[start..end]);
    buf.x[valid..].fill(0.0);
    buf.d[valid..].fill(0.0);
    buf.block_index = k;
}

/// Stream the scenario through the ping-pong discipline.
///
/// While the producer stages block k+1, the consumer filters block k. The
/// output is the concatenated error signal trimmed to the scenario length;
/// a trailing partial block is zero-padded (and flagged in the report)
/// before filtering, exactly as offline block processing would pad it, so
/// streaming and offline results are bit-identical.
pub fn run_stream(
    scenario: &Scenario,
    kind: FilterKind,
    config: &FilterConfig,
    opts: &StreamOptions,
) -> Result<StreamOutput> {
    let b = config.block_size;
    let n = scenario.len();
    if b == 0 {
        return Err(Error::Argument("block size must be positive".into()));
    }
    if n < 2 * b {
        return Err(Error::Argument(format!(
            "scenario has {n} samples; streaming needs at least 2 blocks of {b}"
        )));
    }
    let total_blocks = n.div_ceil(b);
    let padded_tail = total_blocks * b - n;
    let block_budget = budget(b, scenario.sample_rate());

    let mut filter = filter_init(kind, config.clone())?;
    let buffer = PingPongBuffer::new(b);
    let mut output: Vec<f64> = Vec::with_capacity(total_blocks * b);
    let mut per_block_times: Vec<f64> = Vec::with_capacity(total_blocks);

    let consume =
        |filter: &mut FilterState, buf: &HalfBuf| -> Result<(Vec<f64>, f64)> {
            let t = Instant::now();
            let result = filter.process_block(&buf.x, &buf.d).map_err(|e| {
                Error::NumericAt {
                    block: buf.block_index,
                    message: e.to_string(),
                }
            })?;
            Ok((result.e, t.elapsed().as_secs_f64()))
        };

    match opts.mode {
        ExecMode::Interleaved => {
            // Producer stays one block ahead, same schedule as the threaded
            // mode: stage k+1, then filter k.
            let mut buf = buffer.producer_claim(0).unwrap();
            fill_half(&mut buf, scenario, 0, b);
            if opts.paced {
                std::thread::sleep(Duration::from_secs_f64(block_budget));
            }
            buffer.producer_release(0, buf);
            for k in 0..total_blocks {
                if k + 1 < total_blocks {
                    let half = (k + 1) % 2;
                    let mut buf = buffer.producer_claim(half).unwrap();
                    fill_half(&mut buf, scenario, k + 1, b);
                    if opts.paced {
                        std::thread::sleep(Duration::from_secs_f64(block_budget));
                    }
                    buffer.producer_release(half, buf);
                }
                let (half, buf) = buffer.consumer_claim(k).unwrap();
                let step = consume(&mut filter, &buf);
                buffer.consumer_release(half, buf);
                let (e, secs) = step?;
                output.extend_from_slice(&e);
                per_block_times.push(secs);
            }
        }
        ExecMode::Threaded => {
            let result: Result<()> = std::thread::scope(|scope| {
                scope.spawn(|| {
                    for k in 0..total_blocks {
                        let half = k % 2;
                        let Some(mut buf) = buffer.producer_claim(half) else {
                            return; // consumer aborted
                        };
                        fill_half(&mut buf, scenario, k, b);
                        if opts.paced {
                            std::thread::sleep(Duration::from_secs_f64(block_budget));
                        }
                        buffer.producer_release(half, buf);
                    }
                });
                for k in 0..total_blocks {
                    let (half, buf) = buffer
                        .consumer_claim(k)
                        .expect("consumer is the only aborter");
                    let step = consume(&mut filter, &buf);
                    buffer.consumer_release(half, buf);
                    match step {
                        Ok((e, secs)) => {
                            output.extend_from_slice(&e);
                            per_block_times.push(secs);
                        }
                        Err(err) => {
                            buffer.abort();
                            return Err(err);
                        }
                    }
                }
                Ok(())
            });
            result?;
        }
    }

    output.truncate(n);
    Ok(StreamOutput {
        denoised: AudioClip::mono(output, scenario.sample_rate()),
        deadline: DeadlineReport::from_times(block_budget, per_block_times, padded_tail),
        filter,
    })
}

/// Offline reference path: the same blocks through the same filter without
/// the ping-pong machinery. Used to check that the streaming discipline
/// never alters results.
pub fn process_offline(
    scenario: &Scenario,
    kind: FilterKind,
    config: &FilterConfig,
) -> Result<(Vec<f64>, FilterState)> {
    let b = config.block_size;
    let n = scenario.len();
    let total_blocks = n.div_ceil(b);
    let mut filter = filter_init(kind, config.clone())?;
    let mut output = Vec::with_capacity(total_blocks * b);
    for k in 0..total_blocks {
        let start = k * b;
        let end = (start + b).min(n);
        let mut x = scenario.reference.samples()[start..end].to_vec();
        let mut d = scenario.primary.samples()[start..end].to_vec();
        x.resize(b, 0.0);
        d.resize(b, 0.0);
        let r = filter.process_block(&x, &d)?;
        output.extend_from_slice(&r.e);
    }
    output.truncate(n);
    Ok((output, filter))
}
