//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 kernel, every other length
//! goes through Bluestein's chirp-z reduction onto a power-of-two kernel.
//! Both directions are unnormalized:
//! `forward: X_k = sum_m x_m e^{-2 pi i k m / n}` and
//! `inverse: x_m = sum_k X_k e^{+2 pi i k m / n}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

/// Precomputed transform of one fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    chirp: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
}

fn unit_root(num: usize, den: usize) -> Complex64 {
    let theta = -2.0 * PI * (num as f64) / (den as f64);
    Complex64::new(theta.cos(), theta.sin())
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let twiddles = (0..len / 2).map(|k| unit_root(k, len)).collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Self {
            len,
            twiddles,
            bitrev,
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let m = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // w_k = exp(-i pi k^2 / n), with k^2 reduced mod 2n to keep the angle small.
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                let r = ((k as u128 * k as u128) % (2 * len as u128)) as usize;
                unit_root(r, 2 * len)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.run(&mut kernel, false);
        Self {
            inner,
            chirp,
            kernel_hat: kernel,
        }
    }

    fn forward(&self, data: &mut [Complex64]) {
        let n = self.chirp.len();
        let m = self.inner.len;
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            a[k] = data[k] * self.chirp[k];
        }
        self.inner.run(&mut a, false);
        for (x, h) in a.iter_mut().zip(&self.kernel_hat) {
            *x *= h;
        }
        self.inner.run(&mut a, true);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            data[k] = a[k] * self.chirp[k] * scale;
        }
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let kind = if len.is_power_of_two() {
            Kind::Radix2(Radix2::new(len))
        } else {
            Kind::Bluestein(Bluestein::new(len))
        };
        Self { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len);
        match &self.kind {
            Kind::Radix2(r) => r.run(data, false),
            Kind::Bluestein(b) => b.forward(data),
        }
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len);
        match &self.kind {
            Kind::Radix2(r) => r.run(data, true),
            Kind::Bluestein(b) => {
                for x in data.iter_mut() {
                    *x = x.conj();
                }
                b.forward(data);
                for x in data.iter_mut() {
                    *x = x.conj();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (m, v)| {
                    let theta = sign * 2.0 * PI * ((k * m) % n) as f64 / n as f64;
                    acc + v * Complex64::new(theta.cos(), theta.sin())
                })
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|m| Complex64::new((0.7 * m as f64).sin() + 0.1, (1.3 * m as f64).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_many_lengths() {
        for n in [1usize, 2, 3, 5, 8, 12, 17, 64, 65, 100, 129] {
            let x = sample(n);
            let mut f = x.clone();
            FftPlan::new(n).forward(&mut f);
            let want = naive(&x, -1.0);
            for (a, b) in f.iter().zip(&want) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n={n}");
            }
            let mut g = x.clone();
            FftPlan::new(n).inverse(&mut g);
            let want = naive(&x, 1.0);
            for (a, b) in g.iter().zip(&want) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n={n}");
            }
        }
    }

    #[test]
    fn round_trip_scales_by_length() {
        for n in [16usize, 33] {
            let plan = FftPlan::new(n);
            let x = sample(n);
            let mut y = x.clone();
            plan.forward(&mut y);
            plan.inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a / n as f64 - b).norm() < 1e-13);
            }
        }
    }
}
