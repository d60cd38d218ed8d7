//! Fast trigonometric sums on the uniform grid `x_j = j·π/N_g`.
//!
//! Every transform in the sine basis reduces to lane sums of the form
//! `out[j] = Σ_k c[k] · trig((k + offset)·j·π/N_g)`, which are read off a
//! zero-padded complex FFT of length `2·N_g`. Two real lanes share one
//! complex FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::exec::{for_each_chunk_init, Execution};

/// Trigonometric factor of one axis of a separable basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Parity {
    Sin,
    Cos,
}

impl Parity {
    /// Parity after one differentiation.
    pub fn differentiated(self) -> Parity {
        match self {
            Parity::Sin => Parity::Cos,
            Parity::Cos => Parity::Sin,
        }
    }

    #[inline]
    pub fn eval(self, arg: f64) -> f64 {
        match self {
            Parity::Sin => arg.sin(),
            Parity::Cos => arg.cos(),
        }
    }
}

/// FFT plan shared by all lane transforms on one grid size.
#[derive(Clone)]
pub struct TrigTransform {
    ng: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TrigTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrigTransform").field("ng", &self.ng).finish()
    }
}

struct Scratch {
    buf: Vec<Complex<f64>>,
    work: Vec<Complex<f64>>,
}

impl TrigTransform {
    pub fn new(ng: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * ng);
        TrigTransform { ng, fft }
    }

    pub fn ng(&self) -> usize {
        self.ng
    }

    /// Lane sums over contiguous input lanes of length `in_len`.
    ///
    /// Returns `lanes × out_len` values, row-major.
    pub fn lanes(
        &self,
        exec: Execution,
        input: &[f64],
        in_len: usize,
        offset: usize,
        kind: Parity,
        out_len: usize,
    ) -> Vec<f64> {
        let len = 2 * self.ng;
        assert!(in_len + offset <= len, "lane does not fit the FFT length");
        assert!(out_len <= len);
        assert_eq!(input.len() % in_len, 0);
        let n_lanes = input.len() / in_len;
        let mut out = vec![0.0; n_lanes * out_len];
        if n_lanes == 0 || out_len == 0 {
            return out;
        }
        let scratch_len = self.fft.get_inplace_scratch_len();
        for_each_chunk_init(
            exec,
            &mut out,
            2 * out_len,
            || Scratch {
                buf: vec![Complex::new(0.0, 0.0); len],
                work: vec![Complex::new(0.0, 0.0); scratch_len],
            },
            |s, pair, chunk| {
                let la = 2 * pair;
                let has_b = chunk.len() == 2 * out_len;
                s.buf.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
                let a = &input[la * in_len..(la + 1) * in_len];
                if has_b {
                    let b = &input[(la + 1) * in_len..(la + 2) * in_len];
                    for k in 0..in_len {
                        s.buf[k + offset] = Complex::new(a[k], b[k]);
                    }
                } else {
                    for k in 0..in_len {
                        s.buf[k + offset] = Complex::new(a[k], 0.0);
                    }
                }
                self.fft.process_with_scratch(&mut s.buf, &mut s.work);
                let (oa, ob) = chunk.split_at_mut(out_len);
                for j in 0..out_len {
                    let zj = s.buf[j];
                    let zc = s.buf[(len - j) % len].conj();
                    let sa = 0.5 * (zj + zc);
                    match kind {
                        Parity::Sin => oa[j] = -sa.im,
                        Parity::Cos => oa[j] = sa.re,
                    }
                    if has_b {
                        // (zj - zc) / (2i)
                        let d = zj - zc;
                        let sb = Complex::new(0.5 * d.im, -0.5 * d.re);
                        match kind {
                            Parity::Sin => ob[j] = -sb.im,
                            Parity::Cos => ob[j] = sb.re,
                        }
                    }
                }
            },
        );
        out
    }
}

/// Row-major transpose of a `rows × cols` array.
pub fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    debug_assert_eq!(data.len(), rows * cols);
    let mut out = vec![0.0; rows * cols];
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    out[c * rows + r] = data[r * cols + c];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct(c: &[f64], offset: usize, kind: Parity, ng: usize, out_len: usize) -> Vec<f64> {
        (0..out_len)
            .map(|j| {
                c.iter()
                    .enumerate()
                    .map(|(k, &ck)| ck * kind.eval((k + offset) as f64 * j as f64 * PI / ng as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn lanes_match_direct_sums() {
        let ng = 16;
        let t = TrigTransform::new(ng);
        let input: Vec<f64> = (0..3 * 7).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        for kind in [Parity::Sin, Parity::Cos] {
            let got = t.lanes(Execution::Sequential, &input, 7, 1, kind, ng);
            for lane in 0..3 {
                let want = direct(&input[lane * 7..(lane + 1) * 7], 1, kind, ng, ng);
                for j in 0..ng {
                    assert!((got[lane * ng + j] - want[j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let d: Vec<f64> = (0..35).map(|i| i as f64).collect();
        let t = transpose(&d, 5, 7);
        assert_eq!(t[1], 7.0);
        assert_eq!(transpose(&t, 7, 5), d);
    }
}
