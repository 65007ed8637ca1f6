//! Uniform periodic discretization of one optical wavelength.
//!
//! The kinetic operator `-d^2/dtheta^2` is represented spectrally: on the
//! grid it is the circulant matrix whose eigenvalues are `k^2` for the
//! resolved harmonics `|k| < n/2` and `(n/2)^2` for the Nyquist cosine.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub const DEFAULT_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    n_points: usize,
    theta: Vec<f64>,
    cos: Vec<f64>,
    cos2: Vec<f64>,
    kinetic: Vec<f64>,
}

impl Default for SpatialGrid {
    fn default() -> Self {
        Self::new(DEFAULT_POINTS).expect("default grid is valid")
    }
}

impl SpatialGrid {
    /// Grid with `n_points` samples `theta_j = 2 pi j / n_points`.
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 4 {
            return Err(Error::InvalidParameter("grid needs at least 4 points"));
        }
        let h = 2.0 * PI / n_points as f64;
        let theta: Vec<f64> = (0..n_points).map(|j| j as f64 * h).collect();
        let cos: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let cos2 = cos.iter().map(|c| c * c).collect();
        let kinetic = kinetic_kernel(n_points);
        Ok(Self {
            n_points,
            theta,
            cos,
            cos2,
            kinetic,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Quadrature weight `1/n` of the normalized measure `d theta / 2 pi`.
    pub fn weight(&self) -> f64 {
        1.0 / self.n_points as f64
    }

    /// Samples of the cavity mode function `cos theta`.
    pub fn cos(&self) -> &[f64] {
        &self.cos
    }

    /// Samples of `cos^2 theta`.
    pub fn cos2(&self) -> &[f64] {
        &self.cos2
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_points,
                found: len,
            });
        }
        Ok(())
    }

    /// Index of the mirror image `theta -> -theta`.
    pub fn mirror(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }

    /// First row of the kinetic circulant, `T[0][d]`.
    pub fn kinetic_kernel(&self) -> &[f64] {
        &self.kinetic
    }

    /// Kinetic matrix element `T[j][l]`.
    pub fn kinetic_entry(&self, j: usize, l: usize) -> f64 {
        self.kinetic[(l + self.n_points - j) % self.n_points]
    }

    /// Dense row-major kinetic matrix.
    pub fn kinetic_matrix(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut t = vec![0.0; n * n];
        for j in 0..n {
            for l in 0..n {
                t[j * n + l] = self.kinetic_entry(j, l);
            }
        }
        t
    }

    /// `out = -phi''` evaluated spectrally.
    ///
    /// The rows sum to zero, so the product is accumulated from symmetric
    /// second differences `phi[j+d] + phi[j-d] - 2 phi[j]`; this avoids the
    /// cancellation against the `O(n^2)` diagonal.
    pub fn apply_kinetic(&self, phi: &[Complex64], out: &mut [Complex64]) {
        second_differences(&self.kinetic, phi, out);
    }

    /// Real-valued variant of [`Self::apply_kinetic`].
    pub fn apply_kinetic_real(&self, phi: &[f64], out: &mut [f64]) {
        second_differences(&self.kinetic, phi, out);
    }

    /// First row of the imaginary-time kinetic propagator `exp(-T dtau)`.
    pub fn kinetic_propagator(&self, dtau: f64) -> Vec<f64> {
        circulant_kernel(self.n_points, |k| (-((k * k) as f64) * dtau).exp())
    }

    /// Trapezoidal quadrature `(1/n) sum_j f_j` of real samples.
    pub fn integrate(&self, f: impl IntoIterator<Item = f64>) -> f64 {
        f.into_iter().sum::<f64>() * self.weight()
    }
}

fn second_differences<T>(kernel: &[f64], phi: &[T], out: &mut [T])
where
    T: Copy + Default + core::ops::Add<Output = T> + core::ops::Sub<Output = T> + core::ops::Mul<f64, Output = T>,
{
    let n = kernel.len();
    let pairs = (n - 1) / 2;
    for (j, o) in out.iter_mut().enumerate() {
        let centre = phi[j];
        let mut acc = T::default();
        for (d, k) in kernel.iter().enumerate().take(pairs + 1).skip(1) {
            let up = phi[(j + d) % n];
            let down = phi[(j + n - d) % n];
            acc = acc + ((up - centre) + (down - centre)) * *k;
        }
        if n % 2 == 0 {
            acc = acc + (phi[(j + n / 2) % n] - centre) * kernel[n / 2];
        }
        *o = acc;
    }
}

/// First row of `-d^2/dtheta^2` for trigonometric interpolation, in closed
/// form (Nyquist harmonic of even grids kept as a cosine).
fn kinetic_kernel(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let nf = n as f64;
    (0..n)
        .map(|d| {
            if d == 0 {
                return if n % 2 == 0 { (nf * nf + 2.0) / 12.0 } else { (nf * nf - 1.0) / 12.0 };
            }
            let half = d as f64 * h / 2.0;
            let s = half.sin();
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            if n % 2 == 0 {
                sign * 0.5 / (s * s)
            } else {
                sign * 0.5 * half.cos() / (s * s)
            }
        })
        .collect()
}

/// First row of the real symmetric circulant whose eigenvalue on `e^{ik theta}`
/// is `symbol(|k|)`, with the Nyquist harmonic of even grids kept as a cosine.
fn circulant_kernel(n: usize, symbol: impl Fn(usize) -> f64) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let half = n / 2;
    let symbols: Vec<f64> = (0..=half).map(&symbol).collect();
    let mut kernel: Vec<f64> = (0..n)
        .map(|d| {
            let mut s = symbols[0];
            for k in 1..=half {
                let c = ((k * d) % n) as f64 * h;
                let weight = if 2 * k == n { 1.0 } else { 2.0 };
                s += weight * symbols[k] * c.cos();
            }
            s / n as f64
        })
        .collect();
    // Make the action on constants exact despite cancellation in the sums.
    let row_sum: f64 = kernel.iter().sum();
    kernel[0] += symbols[0] - row_sum;
    kernel
}

/// `out[j] = sum_l kernel[(l - j) mod n] * phi[l]` for a symmetric kernel.
#[cfg(test)]
fn apply_circulant(kernel: &[f64], phi: &[Complex64], out: &mut [Complex64]) {
    let n = kernel.len();
    for (j, o) in out.iter_mut().enumerate() {
        let (head, tail) = kernel.split_at(n - j);
        // l runs over j..n with kernel[l - j], then 0..j with kernel[n - j + l].
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, p) in head.iter().zip(&phi[j..]) {
            acc += p * *k;
        }
        for (k, p) in tail.iter().zip(&phi[..j]) {
            acc += p * *k;
        }
        *o = acc;
    }
}
