//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use cavity_selforg_core::linear_response::{build_matrix, from_fluctuation_basis};
use cavity_selforg_core::observables::{field_rhs, gp_rhs};
use cavity_selforg_core::steady_state::SteadyState;
use cavity_selforg_core::{CavityAmplitude, Complex64, ModelParams, SpatialGrid, Wavefunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense second-derivative matrix of trigonometric interpolation on an even
/// periodic grid (closed form from Trefethen, "Spectral Methods in MATLAB").
pub fn spectral_second_derivative(n: usize) -> Vec<Vec<f64>> {
    assert!(n % 2 == 0);
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|j| {
            (0..n)
                .map(|l| {
                    let k = (j as i64 - l as i64).rem_euclid(n as i64) as usize;
                    if k == 0 {
                        -PI * PI / (3.0 * h * h) - 1.0 / 6.0
                    } else {
                        // sin(k h / 2) = sin((n - k) h / 2); the smaller
                        // argument keeps full relative precision.
                        let s = (k.min(n - k) as f64 * h / 2.0).sin();
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        -0.5 * sign / (s * s)
                    }
                })
                .collect()
        })
        .collect()
}

/// Steady state computed without the imaginary-time machinery: for a frozen
/// optical potential the condensate minimizes
/// `<-phi''> + <V phi^2> + g/2 <phi^4>` over even trigonometric polynomials of
/// degree < `harmonics` (derivative-free Nelder-Mead); the potential is then
/// updated from the minimizer until the moments are self-consistent.
pub struct OracleState {
    pub theta: f64,
    pub bunching: f64,
    pub coefficients: Vec<f64>,
}

struct FrozenEnergy<'a> {
    grid: &'a SpatialGrid,
    basis: &'a [Vec<f64>],
    potential: Vec<f64>,
    g: f64,
}

fn normalized_samples(c: &[f64], basis: &[Vec<f64>], n: usize) -> (Vec<f64>, f64) {
    let mut phi = vec![0.0; n];
    for (cm, bm) in c.iter().zip(basis) {
        for (x, b) in phi.iter_mut().zip(bm) {
            *x += cm * b;
        }
    }
    let norm = (phi.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    phi.iter_mut().for_each(|x| *x /= norm);
    (phi, norm)
}

impl CostFunction for FrozenEnergy<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, c: &Self::Param) -> Result<f64, argmin::core::Error> {
        let n = self.grid.n_points();
        let (phi, norm) = normalized_samples(c, self.basis, n);
        // Kinetic energy of sum_m c_m cos(m theta): (1/2) sum m^2 c_m^2.
        let kinetic = c.iter().enumerate().map(|(m, cm)| 0.5 * (m * m) as f64 * cm * cm).sum::<f64>() / (norm * norm);
        let rest = phi
            .iter()
            .zip(&self.potential)
            .map(|(x, v)| v * x * x + 0.5 * self.g * x.powi(4))
            .sum::<f64>()
            / n as f64;
        Ok(kinetic + rest)
    }
}

fn potential(theta: f64, bunching: f64, p: &ModelParams, grid: &SpatialGrid) -> Vec<f64> {
    let s = p.delta_c - p.u0 * bunching;
    let i0 = p.eta * p.eta / (s * s + p.kappa * p.kappa);
    let u1 = 2.0 * theta * i0 * s;
    let u2 = theta * theta * i0 * p.u0;
    grid.theta().iter().map(|t| u1 * t.cos() + u2 * t.cos().powi(2)).collect()
}

pub fn self_consistent_oracle(p: &ModelParams, grid: &SpatialGrid, harmonics: usize, start_theta: f64) -> OracleState {
    let n = grid.n_points();
    let basis: Vec<Vec<f64>> = (0..harmonics)
        .map(|m| grid.theta().iter().map(|t| (m as f64 * t).cos()).collect())
        .collect();
    let mut theta = start_theta;
    let mut bunching = 0.5 + 0.5 * start_theta * start_theta;
    let mut coeffs: Vec<f64> = (0..harmonics).map(|m| if m == 0 { 1.0 } else { 0.0 }).collect();
    coeffs[1] = start_theta.signum() * 0.5;
    for _ in 0..200 {
        let cost = FrozenEnergy {
            grid,
            basis: &basis,
            potential: potential(theta, bunching, p, grid),
            g: p.g,
        };
        let mut simplex = vec![coeffs.clone()];
        for k in 0..harmonics {
            let mut v = coeffs.clone();
            v[k] += 0.05;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).unwrap();
        let res = Executor::new(cost, solver)
            .configure(|s| s.max_iters(40_000))
            .run()
            .unwrap();
        coeffs = res.state().get_best_param().unwrap().clone();
        let (phi, _) = normalized_samples(&coeffs, &basis, n);
        let new_theta = phi.iter().zip(grid.cos()).map(|(x, c)| x * x * c).sum::<f64>() / n as f64;
        let new_b = phi.iter().zip(grid.cos2()).map(|(x, c)| x * x * c).sum::<f64>() / n as f64;
        let shift = (new_theta - theta).abs() + (new_b - bunching).abs();
        theta = 0.5 * (theta + new_theta);
        bunching = 0.5 * (bunching + new_b);
        if shift < 1e-9 {
            break;
        }
    }
    OracleState { theta, bunching, coefficients: coeffs }
}

/// The uniform condensate with an empty cavity: stationary for every pump.
pub fn uniform_state(p: &ModelParams, grid: &SpatialGrid) -> SteadyState {
    let mut s = SteadyState::from_wavefunction(Wavefunction::uniform(grid), p, grid, 0).unwrap();
    assert!(s.residual < 1e-9);
    s.converged = true;
    s
}

pub fn contains(values: &[Complex64], target: Complex64, tol: f64) -> usize {
    values.iter().filter(|v| (*v - target).norm() <= tol).count()
}

/// `i dy/dt` for `y = (a, a*, phi, phi*)` in the frame rotating with `mu`.
fn nonlinear_rhs(
    a: Complex64,
    phi: &[Complex64],
    mu: f64,
    p: &ModelParams,
    grid: &SpatialGrid,
) -> (Complex64, Complex64, Vec<Complex64>, Vec<Complex64>) {
    let wf = Wavefunction::from_values(phi.to_vec());
    let ga = I * field_rhs(&wf, CavityAmplitude(a), p, grid).unwrap();
    let gphi: Vec<Complex64> = gp_rhs(&wf, CavityAmplitude(a), p, grid)
        .unwrap()
        .iter()
        .zip(phi)
        .map(|(h, z)| h - z * mu)
        .collect();
    let gconj = gphi.iter().map(|z| -z.conj()).collect();
    (ga, -ga.conj(), gphi, gconj)
}

pub fn linearization_errors(p: &ModelParams, grid: &SpatialGrid, state: &SteadyState, seed: u64) -> Vec<[f64; 3]> {
    let bm = build_matrix(state, p, grid).unwrap();
    let phi0: Vec<Complex64> = bm.phi0().iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let a0 = state.a0.0;
    let base = nonlinear_rhs(a0, &phi0, state.mu, p, grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..20 {
        let coeffs: Vec<(Complex64, Complex64)> = (0..6)
            .map(|_| {
                (
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        let mut u: Vec<Complex64> = grid
            .theta()
            .iter()
            .map(|t| coeffs.iter().enumerate().map(|(k, (c, s))| c * (k as f64 * t).cos() + s * (k as f64 * t).sin()).sum())
            .collect();
        let mut da = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let norm = (da.norm_sqr() + grid.weight() * u.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        da /= norm;
        u.iter_mut().for_each(|z| *z /= norm);
        let v: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        let mv = bm.matrix().mul_vec(&from_fluctuation_basis(da, da.conj(), &u, &v)).unwrap();

        let mut errs = [0.0; 3];
        for (k, eps) in [1e-4, 1e-5, 1e-6].into_iter().enumerate() {
            let phi: Vec<Complex64> = phi0.iter().zip(&u).map(|(p0, du)| p0 + du * eps).collect();
            let moved = nonlinear_rhs(a0 + da * eps, &phi, state.mu, p, grid);
            let quotient = from_fluctuation_basis(
                (moved.0 - base.0) / eps,
                (moved.1 - base.1) / eps,
                &moved.2.iter().zip(&base.2).map(|(x, y)| (x - y) / eps).collect::<Vec<_>>(),
                &moved.3.iter().zip(&base.3).map(|(x, y)| (x - y) / eps).collect::<Vec<_>>(),
            );
            errs[k] = quotient.iter().zip(&mv).map(|(q, m)| (q - m).norm()).fold(0.0, f64::max);
        }
        out.push(errs);
    }
    out
}

/// `err(eps) <= C eps` with one constant `C` for all steps, and the error
/// shrinking with the step until rounding takes over.
pub fn is_first_order(e: &[f64; 3]) -> bool {
    let c = e[0] / 1e-4;
    c < 1e4 && e[1] <= 2.0 * c * 1e-5 + 1e-7 && e[2] <= 2.0 * c * 1e-6 + 1e-7 && e[1] < 0.2 * e[0]
}

pub fn assert_first_order(errors: &[[f64; 3]]) {
    for e in errors {
        assert!(is_first_order(e), "{e:?}");
    }
}
