//! Iterative radix-2 complex FFT.
//!
//! Transforms are unnormalised here; the spectral layer applies the `1/N`
//! factor on the forward transform.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Fft {
    /// `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft length must be a power of two");
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Self { n, twiddles, bitrev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `X_k = sum_j x_j exp(-2 pi i jk / n)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    /// `x_j = sum_k X_k exp(+2 pi i jk / n)` (no `1/n`).
    pub fn backward(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let theta = -2.0 * PI * (j * k) as f64 / n as f64;
                    acc + v * Complex64::new(libm::cos(theta), libm::sin(theta))
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 8, 64] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(libm::sin(j as f64 * 0.7) + 0.1, libm::cos(j as f64 * 1.3)))
                .collect();
            let expect = naive_dft(&x);
            let mut got = x.clone();
            Fft::new(n).forward(&mut got);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10 * n as f64);
            }
        }
    }

    #[test]
    fn backward_inverts_forward() {
        let n = 32;
        let fft = Fft::new(n);
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new(j as f64, -(j as f64) * 0.5)).collect();
        let mut y = x.clone();
        fft.forward(&mut y);
        fft.backward(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b / n as f64).norm() < 1e-12);
        }
    }
}
