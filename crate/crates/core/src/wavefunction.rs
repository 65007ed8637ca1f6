use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::SpatialGrid;
use crate::{Error, Result};

/// Condensate wavefunction sampled on a [`SpatialGrid`], normalized so that
/// `(1/n) sum_j |phi_j|^2 = 1` (the uniform state is `phi = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    values: Vec<Complex64>,
}

impl Wavefunction {
    /// Wraps raw samples without normalizing them.
    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        Self {
            values: values.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Samples `f(theta_j)` and normalizes.
    pub fn from_fn(grid: &SpatialGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let mut psi = Self {
            values: grid.theta().iter().map(|&t| f(t)).collect(),
        };
        psi.normalize(grid)?;
        Ok(psi)
    }

    pub fn uniform(grid: &SpatialGrid) -> Self {
        Self::from_real((0..grid.n_points()).map(|_| 1.0))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sqr(&self, grid: &SpatialGrid) -> f64 {
        grid.integrate(self.values.iter().map(|z| z.norm_sqr()))
    }

    /// Rescales to unit norm.
    pub fn normalize(&mut self, grid: &SpatialGrid) -> Result<()> {
        grid.check_len(self.values.len())?;
        let norm = self.norm_sqr(grid).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter("wavefunction has zero or non-finite norm"));
        }
        let inv = 1.0 / norm;
        self.values.iter_mut().for_each(|z| *z *= inv);
        Ok(())
    }

    /// Wavefunction translated by half a wavelength, `phi(theta + pi)`.
    /// Requires an even number of grid points.
    pub fn shifted_by_half_period(&self) -> Self {
        let n = self.values.len();
        debug_assert!(n % 2 == 0);
        Self {
            values: (0..n).map(|j| self.values[(j + n / 2) % n]).collect(),
        }
    }
}

/// Cavity field amplitude per square-root atom, `a = alpha / sqrt(N)`;
/// `|a|^2` is the photon number per atom.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CavityAmplitude(pub Complex64);

impl CavityAmplitude {
    pub const ZERO: Self = Self(Complex64 { re: 0.0, im: 0.0 });

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn photons_per_atom(self) -> f64 {
        self.0.norm_sqr()
    }
}
