//! Quantum depletion of the conservative (lossless, collisionless) system.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::analytics::quartic_roots;
use crate::grid::SpatialGrid;
use crate::linear_response::{build_matrix, eigendecompose, to_fluctuation_basis, BogoliubovMode};
use crate::steady_state::{sweep_states, SolverOptions, SteadyState, SweepRecord};
use crate::{Error, ModelParams, Result};

/// Frequencies below this are treated as zero modes and left out.
const ZERO_MODE_FREQUENCY: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DepletionResult {
    pub eta: f64,
    /// Number of atoms outside the condensate mode.
    pub n_prime: f64,
    /// `(mode index, contribution)` for every quasiparticle mode, indices
    /// referring to the classified mode list.
    pub per_mode: Vec<(usize, f64)>,
}

struct Split {
    a_plus: Complex64,
    a_minus: Complex64,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

fn split(mode: &BogoliubovMode) -> Split {
    let (a_plus, a_minus, u, v) = to_fluctuation_basis(&mode.vector);
    Split { a_plus, a_minus, u, v }
}

/// Symplectic product `<x| diag(1, -1, w, -w) |y>`.
fn symplectic(x: &Split, y: &Split, w: f64) -> Complex64 {
    let atoms_u: Complex64 = x.u.iter().zip(&y.u).map(|(a, b)| a.conj() * b).sum();
    let atoms_v: Complex64 = x.v.iter().zip(&y.v).map(|(a, b)| a.conj() * b).sum();
    x.a_plus.conj() * y.a_plus - x.a_minus.conj() * y.a_minus + (atoms_u - atoms_v) * w
}

fn plain_norm(x: &Split, w: f64) -> f64 {
    x.a_plus.norm_sqr()
        + x.a_minus.norm_sqr()
        + w * (x.u.iter().map(|z| z.norm_sqr()).sum::<f64>() + x.v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

fn axpy(target: &mut Split, alpha: Complex64, x: &Split) {
    target.a_plus -= alpha * x.a_plus;
    target.a_minus -= alpha * x.a_minus;
    for (t, s) in target.u.iter_mut().zip(&x.u) {
        *t -= alpha * s;
    }
    for (t, s) in target.v.iter_mut().zip(&x.v) {
        *t -= alpha * s;
    }
}

/// Number of non-condensed atoms from the Bogoliubov eigenvectors.
///
/// Quasiparticle modes are the eigenvectors of positive symplectic norm
/// `|da+|^2 - |da-|^2 + <u|u> - <v|v>`; each is normalized to unit norm
/// (orthogonalized within degenerate groups) and contributes `<v|v>`.
/// The global-phase direction and zero modes are excluded.
pub fn quantum_depletion(state: &SteadyState, p: &ModelParams, grid: &SpatialGrid) -> Result<DepletionResult> {
    if p.kappa != 0.0 {
        return Err(Error::UnsupportedRegime("depletion requires kappa = 0"));
    }
    if p.g != 0.0 {
        return Err(Error::UnsupportedRegime("depletion requires g = 0"));
    }
    // Without pump the atoms neither see the field nor collide, so the
    // linearized dynamics has no u-v coupling and every quasiparticle is a
    // bare particle with v = 0; eigenvector rounding would otherwise leave
    // contributions of order 1e-27.
    let number_conserving = p.eta == 0.0;
    let bm = build_matrix(state, p, grid)?;
    let modes = eigendecompose(&bm)?;
    let w = grid.weight();

    let mut selected: Vec<(usize, Split)> = Vec::new();
    for (idx, mode) in modes.iter().enumerate() {
        if mode.gauge || mode.omega.norm() < ZERO_MODE_FREQUENCY {
            continue;
        }
        let s = split(mode);
        let norm = symplectic(&s, &s, w).re;
        if norm.abs() <= 1e-8 * plain_norm(&s, w) {
            return Err(Error::NumericalDegeneracy {
                index: idx,
                re: mode.omega.re,
                im: mode.omega.im,
            });
        }
        if norm > 0.0 {
            selected.push((idx, s));
        }
    }

    // Symplectic Gram-Schmidt within groups of (numerically) equal frequency.
    let scale = modes.iter().map(|m| m.omega.norm()).fold(1.0, f64::max);
    let mut per_mode = Vec::with_capacity(selected.len());
    let mut done: Vec<(Complex64, Split)> = Vec::new();
    for (idx, mut s) in selected {
        let omega = modes[idx].omega;
        for (o, prev) in &done {
            if (*o - omega).norm() <= 1e-8 * scale {
                let c = symplectic(prev, &s, w);
                axpy(&mut s, c, prev);
            }
        }
        let norm = symplectic(&s, &s, w).re;
        if !(norm > 0.0) {
            return Err(Error::NumericalDegeneracy {
                index: idx,
                re: omega.re,
                im: omega.im,
            });
        }
        let inv = 1.0 / norm.sqrt();
        s.a_plus *= inv;
        s.a_minus *= inv;
        s.u.iter_mut().for_each(|z| *z *= inv);
        s.v.iter_mut().for_each(|z| *z *= inv);
        let contribution = if number_conserving {
            0.0
        } else {
            w * s.v.iter().map(|z| z.norm_sqr()).sum::<f64>()
        };
        per_mode.push((idx, contribution));
        done.push((omega, s));
    }
    Ok(DepletionResult {
        eta: p.eta,
        n_prime: per_mode.iter().map(|(_, c)| c).sum(),
        per_mode,
    })
}

/// Lowest positive real root of the conservative quartic; zero once the
/// lowest pair has left the real axis.
pub fn lowest_conservative_frequency(p: &ModelParams) -> Result<f64> {
    let roots = quartic_roots(&ModelParams { kappa: 0.0, ..*p })?.roots;
    let lowest = roots
        .iter()
        .filter(|z| z.re > 0.0 && z.im.abs() <= 1e-9 * z.norm())
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    let smallest = roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    Ok(if lowest <= smallest * (1.0 + 1e-9) { lowest } else { 0.0 })
}

/// Divergence law `1 / (8 lambda_1)` for the depletion near threshold.
pub fn asymptotic_depletion(p: &ModelParams) -> Result<Option<f64>> {
    let l1 = lowest_conservative_frequency(p)?;
    Ok((l1 > 0.0 && l1.is_finite()).then(|| 1.0 / (8.0 * l1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepletionRow {
    pub record: SweepRecord,
    pub n_prime: Option<f64>,
    pub lambda1: Option<f64>,
    pub asymptotic: Option<f64>,
    pub error: Option<String>,
}

/// Depletion along an ascending pump axis.
pub fn depletion_sweep(
    p: &ModelParams,
    grid: &SpatialGrid,
    opts: &SolverOptions,
    eta_values: &[f64],
) -> Result<Vec<DepletionRow>> {
    if p.kappa != 0.0 || p.g != 0.0 {
        return Err(Error::UnsupportedRegime("depletion requires kappa = 0 and g = 0"));
    }
    let states = sweep_states(p, grid, opts, eta_values)?;
    let mut rows = Vec::with_capacity(states.len());
    for (eta, outcome) in &states {
        let pe = p.with_eta(*eta);
        let record = SweepRecord::from_outcome(*eta, outcome, p, grid);
        let below = crate::analytics::critical_eta(&pe).map_or(false, |c| *eta < c);
        let lambda1 = if below { lowest_conservative_frequency(&pe).ok() } else { None };
        let asymptotic = lambda1.filter(|l| *l > 0.0).map(|l| 1.0 / (8.0 * l));
        let result = outcome
            .as_ref()
            .map_err(|e| e.to_string())
            .and_then(|s| quantum_depletion(s, &pe, grid).map_err(|e| e.to_string()));
        let (n_prime, error) = match result {
            Ok(d) => (Some(d.n_prime), None),
            Err(e) => (None, Some(e)),
        };
        rows.push(DepletionRow {
            record,
            n_prime,
            lambda1,
            asymptotic,
            error,
        });
    }
    Ok(rows)
}
