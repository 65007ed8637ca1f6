//! Wavefunction moments, the adiabatically eliminated cavity field and the
//! mean-field right-hand sides.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::grid::SpatialGrid;
use crate::steady_state::SteadyState;
use crate::{CavityAmplitude, Error, ModelParams, Result, Wavefunction};

/// `<f|h> = (1/n) sum_j conj(f_j) h_j`.
pub fn inner_product(f: &[Complex64], h: &[Complex64], grid: &SpatialGrid) -> Result<Complex64> {
    grid.check_len(f.len())?;
    grid.check_len(h.len())?;
    let s: Complex64 = f.iter().zip(h).map(|(a, b)| a.conj() * b).sum();
    Ok(s * grid.weight())
}

fn expectation(phi: &Wavefunction, weights: &[f64], grid: &SpatialGrid) -> Result<f64> {
    grid.check_len(phi.len())?;
    Ok(grid.integrate(
        phi.values()
            .iter()
            .zip(weights)
            .map(|(z, w)| z.norm_sqr() * w),
    ))
}

/// Order parameter `Theta = <phi|cos theta|phi>`.
pub fn order_parameter(phi: &Wavefunction, grid: &SpatialGrid) -> Result<f64> {
    expectation(phi, grid.cos(), grid)
}

/// Bunching parameter `B = <phi|cos^2 theta|phi>`.
pub fn bunching_parameter(phi: &Wavefunction, grid: &SpatialGrid) -> Result<f64> {
    expectation(phi, grid.cos2(), grid)
}

/// Denominator `Delta_C - u0 B + i kappa` of the stationary field.
fn cavity_denominator(bunching: f64, p: &ModelParams) -> Result<Complex64> {
    let detuning = p.delta_c - p.u0 * bunching;
    let scale = p.delta_c.abs().max(p.u0.abs());
    if p.kappa == 0.0 && detuning.abs() <= 1e-12 * scale {
        return Err(Error::SingularParameters);
    }
    Ok(Complex64::new(detuning, p.kappa))
}

/// Stationary cavity amplitude for given moments,
/// `a = eta Theta / (Delta_C - u0 B + i kappa)`.
pub fn field_from_moments(theta: f64, bunching: f64, p: &ModelParams) -> Result<CavityAmplitude> {
    let den = cavity_denominator(bunching, p)?;
    Ok(CavityAmplitude(Complex64::new(p.eta * theta, 0.0) / den))
}

/// Cavity amplitude slaved to the instantaneous wavefunction.
pub fn adiabatic_field(phi: &Wavefunction, p: &ModelParams, grid: &SpatialGrid) -> Result<CavityAmplitude> {
    let theta = order_parameter(phi, grid)?;
    let bunching = bunching_parameter(phi, grid)?;
    field_from_moments(theta, bunching, p)
}

/// Self-consistent optical potential `V = u1 cos theta + u2 cos^2 theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticPotential {
    pub u1: f64,
    pub u2: f64,
    /// `eta^2 / [(Delta_C - u0 B)^2 + kappa^2]`, the largest photon number
    /// per atom the pump can scatter into the cavity.
    pub max_photons_per_atom: f64,
    pub samples: Vec<f64>,
}

impl AdiabaticPotential {
    /// Potential at an arbitrary phase.
    pub fn at(&self, theta: f64) -> f64 {
        let c = num_traits::Float::cos(theta);
        self.u1 * c + self.u2 * c * c
    }

    /// Curvature `V''` at `theta = 0` or `pi`.
    pub fn curvature_at_antinode(&self, theta: f64) -> f64 {
        let c = num_traits::Float::cos(theta);
        -self.u1 * c - 2.0 * self.u2
    }
}

/// Potential coefficients for given moments.
pub fn potential_from_moments(
    theta: f64,
    bunching: f64,
    p: &ModelParams,
    grid: &SpatialGrid,
) -> Result<AdiabaticPotential> {
    let den = cavity_denominator(bunching, p)?;
    let i0 = p.eta * p.eta / den.norm_sqr();
    let u1 = 2.0 * theta * i0 * den.re;
    let u2 = theta * theta * i0 * p.u0;
    let samples = grid
        .cos()
        .iter()
        .zip(grid.cos2())
        .map(|(c, c2)| u1 * c + u2 * c2)
        .collect();
    Ok(AdiabaticPotential {
        u1,
        u2,
        max_photons_per_atom: i0,
        samples,
    })
}

/// Adiabatic potential of a (self-consistent) state.
pub fn adiabatic_potential(state: &SteadyState, p: &ModelParams, grid: &SpatialGrid) -> Result<AdiabaticPotential> {
    grid.check_len(state.phi0.len())?;
    potential_from_moments(state.theta_op, state.bunching, p, grid)
}

/// Optical potential `u0 |a|^2 cos^2 + 2 eta Re(a) cos` for a given field.
pub fn optical_potential(a: CavityAmplitude, p: &ModelParams, grid: &SpatialGrid) -> Vec<f64> {
    let depth2 = p.u0 * a.photons_per_atom();
    let depth1 = 2.0 * p.eta * a.0.re;
    grid.cos()
        .iter()
        .zip(grid.cos2())
        .map(|(c, c2)| depth1 * c + depth2 * c2)
        .collect()
}

/// `H[phi] phi` with `H = -d^2/dtheta^2 + u0|a|^2 cos^2 + 2 eta Re(a) cos + g|phi|^2`.
pub fn gp_rhs(
    phi: &Wavefunction,
    a: CavityAmplitude,
    p: &ModelParams,
    grid: &SpatialGrid,
) -> Result<Vec<Complex64>> {
    grid.check_len(phi.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); phi.len()];
    grid.apply_kinetic(phi.values(), &mut out);
    let v = optical_potential(a, p, grid);
    for ((o, z), vj) in out.iter_mut().zip(phi.values()).zip(&v) {
        *o += z * (vj + p.g * z.norm_sqr());
    }
    Ok(out)
}

/// Right-hand side of the cavity equation,
/// `i da/dt = (-Delta_C + u0 B - i kappa) a + eta Theta`, returned as `da/dt`.
pub fn field_rhs(phi: &Wavefunction, a: CavityAmplitude, p: &ModelParams, grid: &SpatialGrid) -> Result<Complex64> {
    let theta = order_parameter(phi, grid)?;
    let bunching = bunching_parameter(phi, grid)?;
    let a_dot_times_i = Complex64::new(-p.delta_c + p.u0 * bunching, -p.kappa) * a.0 + p.eta * theta;
    Ok(a_dot_times_i * Complex64::new(0.0, -1.0))
}
