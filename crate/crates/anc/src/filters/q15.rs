//! Q15 fixed-point LMS kernel.
//!
//! Q15 is the 16-bit format with 15 fractional bits, range [-1, 1). The
//! recursion matches the float LMS but every product is i16 x i16 into a
//! 32-bit accumulator, post-shifted (with rounding - a truncating shift
//! biases the weight updates and the LMS feedback loop amplifies the bias
//! into a visible offset) back to Q15, and every add or store saturates
//! instead of wrapping. Saturation events are counted, not raised: an
//! overdriven fixed-point filter clips audibly but keeps running.

use super::BlockResult;

#[derive(Debug)]
pub(crate) struct Q15State {
    pub weights: Vec<i16>,
    /// Same layout as the float delay line: `[tail (L-1) | staging (B)]`.
    pub delay: Vec<i16>,
    pub mu: i16,
    pub saturations: u64,
}

const ONE: f64 = 32768.0;

impl Q15State {
    pub fn new(num_taps: usize, state_len: usize, mu: f64) -> Self {
        Q15State {
            weights: vec![0; num_taps],
            delay: vec![0; state_len],
            mu: (mu * ONE).round() as i16,
            saturations: 0,
        }
    }

    fn sat_from_f64(&mut self, v: f64) -> i16 {
        let scaled = (v * ONE).round();
        if scaled > 32767.0 {
            self.saturations += 1;
            32767
        } else if scaled < -32768.0 {
            self.saturations += 1;
            -32768
        } else {
            scaled as i16
        }
    }

    fn sat16(&mut self, v: i32) -> i16 {
        if v > 32767 {
            self.saturations += 1;
            32767
        } else if v < -32768 {
            self.saturations += 1;
            -32768
        } else {
            v as i16
        }
    }

    fn sat_add32(&mut self, a: i32, b: i32) -> i32 {
        let (sum, overflow) = a.overflowing_add(b);
        if overflow {
            self.saturations += 1;
            if a >= 0 {
                i32::MAX
            } else {
                i32::MIN
            }
        } else {
            sum
        }
    }

    /// Q30 -> Q15 with round-to-nearest.
    fn rshift15(v: i32) -> i32 {
        v.saturating_add(1 << 14) >> 15
    }

    pub fn process_block(&mut self, l: usize, b: usize, x: &[f64], d: &[f64]) -> BlockResult {
        debug_assert_eq!(x.len(), b);
        for (i, &xn) in x.iter().enumerate() {
            let q = self.sat_from_f64(xn);
            self.delay[l - 1 + i] = q;
        }

        let mut y = Vec::with_capacity(b);
        let mut e = Vec::with_capacity(b);
        for (i, &dn) in d.iter().enumerate() {
            // y[n] = sum_k w[k] * x[n-k], products in Q30, 32-bit accumulate.
            let mut acc: i32 = 0;
            for k in 0..l {
                let xv = self.delay[i + l - 1 - k];
                let prod = i32::from(self.weights[k]) * i32::from(xv);
                acc = self.sat_add32(acc, prod);
            }
            let y_q = self.sat16(Self::rshift15(acc));
            let d_q = self.sat_from_f64(dn);
            let e_q = self.sat16(i32::from(d_q) - i32::from(y_q));

            // w[k] += ((mu * e) >> 15 * x[n-k]) >> 15, saturating stores.
            let mu_e = Self::rshift15(i32::from(self.mu) * i32::from(e_q));
            for k in 0..l {
                let xv = self.delay[i + l - 1 - k];
                let delta = Self::rshift15(mu_e * i32::from(xv));
                let w = i32::from(self.weights[k]) + delta;
                self.weights[k] = self.sat16(w);
            }

            let y_f = f64::from(y_q) / ONE;
            y.push(y_f);
            // Error formed from the caller's float d so e + y == d exactly;
            // the recursion above used the quantized error.
            e.push(dn - y_f);
        }
        self.delay.copy_within(b.., 0);
        BlockResult { y, e }
    }
}
