//! Self-consistent ground state of the coupled condensate and cavity field.
//!
//! The condensate is relaxed in imaginary time with a Strang split-step
//! scheme while the cavity amplitude is re-evaluated from the instantaneous
//! wavefunction once per step. Once the iteration has settled into a basin,
//! a Newton iteration on the discretized stationary equations removes the
//! residual time-step bias of the splitting.
//!
//! The stationary wavefunction is real up to a global phase because the
//! optical potential is real; the iteration therefore works on real samples.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::SpatialGrid;
use crate::linalg::lu_solve;
use crate::observables::{field_from_moments, gp_rhs, potential_from_moments};
use crate::{CavityAmplitude, Error, ModelParams, Result, StallReason, Wavefunction};

const CHECK_INTERVAL: usize = 100;
const STALL_WINDOW: usize = 10_000;
const POLISH_RESIDUAL_GATE: f64 = 1e-3;
const POLISH_MAX_DISTANCE: f64 = 1e-2;
const NEWTON_MAX_ITER: usize = 40;
const MAX_POTENTIAL_PHASE: f64 = 1.0;
const MAX_STEP_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Imaginary-time step; halved automatically while the spread of the
    /// potential times the step exceeds one.
    pub dtau: f64,
    pub max_iter: usize,
    /// Tolerance on the largest pointwise wavefunction change per step,
    /// relative to the peak amplitude.
    pub tol_psi: f64,
    /// Relative tolerance on the stationary-equation residual, measured
    /// against `max(|mu|, 1)`.
    pub tol_mu: f64,
    /// Amplitude of the `cos theta` seed multiplied into the initial state.
    pub seed_epsilon: f64,
    /// `+1` or `-1`; selects the symmetry-broken branch.
    pub seed_sign: f64,
    /// Refine the split-step result with Newton iterations.
    pub newton_polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dtau: 1e-3,
            max_iter: 1_000_000,
            tol_psi: 1e-10,
            tol_mu: 1e-10,
            seed_epsilon: 1e-2,
            seed_sign: 1.0,
            newton_polish: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0 && self.dtau.is_finite()) {
            return Err(Error::InvalidParameter("dtau must be positive"));
        }
        if !(self.tol_psi > 0.0 && self.tol_mu > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive"));
        }
        if !(self.seed_epsilon.abs() < 1.0) {
            return Err(Error::InvalidParameter("|seed_epsilon| must be below 1"));
        }
        if self.seed_sign != 1.0 && self.seed_sign != -1.0 {
            return Err(Error::InvalidParameter("seed_sign must be +1 or -1"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive"));
        }
        Ok(())
    }
}

/// Stationary condensate wavefunction, cavity amplitude and observables.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub phi0: Wavefunction,
    pub a0: CavityAmplitude,
    pub mu: f64,
    pub theta_op: f64,
    pub bunching: f64,
    /// `|a0|^2`.
    pub photons_per_atom: f64,
    pub iterations: usize,
    /// Largest pointwise value of `|H[phi] phi - mu phi|`.
    pub residual: f64,
    pub converged: bool,
}

impl SteadyState {
    /// Evaluates the field, observables, chemical potential and residual of
    /// an arbitrary wavefunction, normalizing it first. `converged` is left
    /// `false`.
    pub fn from_wavefunction(
        mut phi: Wavefunction,
        p: &ModelParams,
        grid: &SpatialGrid,
        iterations: usize,
    ) -> Result<Self> {
        phi.normalize(grid)?;
        let (theta_op, bunching) = moments(phi.values(), grid);
        let a0 = field_from_moments(theta_op, bunching, p)?;
        let (mu, residual) = mu_and_residual(&phi, a0, p, grid)?;
        Ok(Self {
            phi0: phi,
            a0,
            mu,
            theta_op,
            bunching,
            photons_per_atom: a0.photons_per_atom(),
            iterations,
            residual,
            converged: false,
        })
    }

    /// Residual tolerance implied by `opts` for this state.
    pub fn residual_bound(&self, opts: &SolverOptions) -> f64 {
        opts.tol_mu * self.mu.abs().max(1.0)
    }
}

fn moments(phi: &[Complex64], grid: &SpatialGrid) -> (f64, f64) {
    let mut t = 0.0;
    let mut b = 0.0;
    for ((z, c), c2) in phi.iter().zip(grid.cos()).zip(grid.cos2()) {
        let d = z.norm_sqr();
        t += d * c;
        b += d * c2;
    }
    (t * grid.weight(), b * grid.weight())
}

fn real_moments(phi: &[f64], grid: &SpatialGrid) -> (f64, f64) {
    let mut t = 0.0;
    let mut b = 0.0;
    for ((x, c), c2) in phi.iter().zip(grid.cos()).zip(grid.cos2()) {
        let d = x * x;
        t += d * c;
        b += d * c2;
    }
    (t * grid.weight(), b * grid.weight())
}

fn mu_and_residual(phi: &Wavefunction, a: CavityAmplitude, p: &ModelParams, grid: &SpatialGrid) -> Result<(f64, f64)> {
    let hphi = gp_rhs(phi, a, p, grid)?;
    let mu = grid.weight() * phi.values().iter().zip(&hphi).map(|(z, h)| (z.conj() * h).re).sum::<f64>();
    let residual = hphi
        .iter()
        .zip(phi.values())
        .map(|(h, z)| (h - z * mu).norm())
        .fold(0.0, f64::max);
    Ok((mu, residual))
}

/// `mu = Re <phi| H[phi] phi>`, the kinetic and optical energies plus
/// `g <|phi|^4>`.
pub fn chemical_potential(phi: &Wavefunction, a: CavityAmplitude, p: &ModelParams, grid: &SpatialGrid) -> Result<f64> {
    let hphi = gp_rhs(phi, a, p, grid)?;
    Ok(grid.weight() * phi.values().iter().zip(&hphi).map(|(z, h)| (z.conj() * h).re).sum::<f64>())
}

/// Ground state started from the uniform condensate plus the seed.
pub fn solve_steady(p: &ModelParams, grid: &SpatialGrid, opts: &SolverOptions) -> Result<SteadyState> {
    solve_steady_from(p, grid, opts, None)
}

/// Rotates a wavefunction so that its mean is real and non-negative and
/// returns the real parts.
fn phase_fixed_real(values: &[Complex64]) -> Vec<f64> {
    let mean: Complex64 = values.iter().sum();
    let rot = if mean.norm() > 0.0 {
        mean.conj() / mean.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    values.iter().map(|z| (z * rot).re).collect()
}

fn normalize_real(phi: &mut [f64], grid: &SpatialGrid) -> Result<()> {
    let norm = grid.integrate(phi.iter().map(|x| x * x)).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter("wavefunction has zero or non-finite norm"));
    }
    let inv = 1.0 / norm;
    phi.iter_mut().for_each(|x| *x *= inv);
    Ok(())
}

fn circulant_real(kernel: &[f64], phi: &[f64], out: &mut [f64]) {
    let n = kernel.len();
    for (j, o) in out.iter_mut().enumerate() {
        let (head, tail) = kernel.split_at(n - j);
        let mut acc = 0.0;
        for (k, x) in head.iter().zip(&phi[j..]) {
            acc += k * x;
        }
        for (k, x) in tail.iter().zip(&phi[..j]) {
            acc += k * x;
        }
        *o = acc;
    }
}

/// Ground state started from `start` (or the uniform state) multiplied by
/// `1 + seed_sign * seed_epsilon * cos theta`.
///
/// A complex starting wavefunction is rotated to a real-positive mean and
/// its real part is used.
pub fn solve_steady_from(
    p: &ModelParams,
    grid: &SpatialGrid,
    opts: &SolverOptions,
    start: Option<&Wavefunction>,
) -> Result<SteadyState> {
    p.validate()?;
    opts.validate()?;
    let n = grid.n_points();
    let mut phi: Vec<f64> = match start {
        Some(w) => {
            grid.check_len(w.len())?;
            phase_fixed_real(w.values())
        }
        None => vec![1.0; n],
    };
    for (x, c) in phi.iter_mut().zip(grid.cos()) {
        *x *= 1.0 + opts.seed_sign * opts.seed_epsilon * c;
    }
    normalize_real(&mut phi, grid)?;

    // Propagators for dtau / 2^k; the step is halved while the spread of
    // the potential times the step exceeds MAX_POTENTIAL_PHASE.
    let mut props: Vec<Vec<f64>> = vec![grid.kinetic_propagator(opts.dtau)];
    let mut buf = vec![0.0; n];
    let mut half = vec![0.0; n];
    let mut before = vec![0.0; n];
    let mut changes: Vec<f64> = Vec::new();
    let mut last_polish_failed_at = 0usize;

    let finish = |phi: &[f64], iterations: usize, converged: bool| -> Result<SteadyState> {
        let wf = Wavefunction::from_real(phi.iter().copied());
        let mut state = SteadyState::from_wavefunction(wf, p, grid, iterations)?;
        state.converged = converged && state.residual <= state.residual_bound(opts);
        Ok(state)
    };

    for it in 1..=opts.max_iter {
        let checking = it % CHECK_INTERVAL == 0;
        if checking {
            before.copy_from_slice(&phi);
        }
        let (theta, bunching) = real_moments(&phi, grid);
        let pot = potential_from_moments(theta, bunching, p, grid)?;
        for ((h, v), x) in half.iter_mut().zip(&pot.samples).zip(&phi) {
            *h = v + p.g * x * x;
        }
        let vmin = half.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = half.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut level = 0usize;
        while level < MAX_STEP_HALVINGS && (vmax - vmin) * opts.dtau / (1u64 << level) as f64 > MAX_POTENTIAL_PHASE {
            level += 1;
        }
        while props.len() <= level {
            let k = props.len();
            props.push(grid.kinetic_propagator(opts.dtau / (1u64 << k) as f64));
        }
        let dtau = opts.dtau / (1u64 << level) as f64;
        for h in half.iter_mut() {
            *h = (-(*h - vmin) * 0.5 * dtau).exp();
        }
        for (x, h) in phi.iter_mut().zip(&half) {
            *x *= h;
        }
        circulant_real(&props[level], &phi, &mut buf);
        for ((x, b), h) in phi.iter_mut().zip(&buf).zip(&half) {
            *x = b * h;
        }
        normalize_real(&mut phi, grid)?;

        if !checking {
            continue;
        }
        // Largest change relative to the peak amplitude, per default step.
        let peak = phi.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let change = phi
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / peak
            * (opts.dtau / dtau);
        if !change.is_finite() {
            return Err(Error::InvalidParameter("imaginary-time iteration produced non-finite values"));
        }
        changes.push(change);
        let k = changes.len();
        let decreasing = k >= 3 && changes[k - 1] < 0.999 * changes[k - 2] && changes[k - 2] < 0.999 * changes[k - 3];
        let settled = change <= opts.tol_psi;

        if settled || (opts.newton_polish && decreasing && it >= last_polish_failed_at + 10 * CHECK_INTERVAL) {
            let current = finish(&phi, it, true)?;
            if current.converged {
                return Ok(current);
            }
            let gate = current.residual <= POLISH_RESIDUAL_GATE * current.mu.abs().max(1.0);
            if opts.newton_polish && (settled || gate) {
                if let Some(polished) = newton_polish(&phi, p, grid, opts) {
                    let state = finish(&polished, it, true)?;
                    if state.converged {
                        return Ok(state);
                    }
                }
                last_polish_failed_at = it;
            }
            if settled {
                return Err(Error::NotConverged {
                    state: Box::new(current),
                    reason: StallReason::Stagnated,
                });
            }
        }

        let window = STALL_WINDOW / CHECK_INTERVAL;
        if k > window {
            let recent = &changes[k - 1 - window..];
            let hi = recent.iter().copied().fold(0.0, f64::max);
            let lo = recent.iter().copied().fold(f64::INFINITY, f64::min);
            if lo > 0.0 && hi <= lo * (1.0 + 1e-3) {
                return Err(Error::NotConverged {
                    state: Box::new(finish(&phi, it, false)?),
                    reason: StallReason::Stagnated,
                });
            }
        }
    }
    Err(Error::NotConverged {
        state: Box::new(finish(&phi, opts.max_iter, false)?),
        reason: StallReason::MaxIterations,
    })
}

/// Newton iteration on `(T + V[phi] + g phi^2 - mu) phi = 0`, `<phi|phi> = 1`
/// for real `phi`. Returns `None` unless it converges close to `start`
/// without flipping the sign of the order parameter.
fn newton_polish(start: &[f64], p: &ModelParams, grid: &SpatialGrid, opts: &SolverOptions) -> Option<Vec<f64>> {
    let n = grid.n_points();
    let w = grid.weight();
    let c = grid.cos();
    let c2 = grid.cos2();
    let tmat = grid.kinetic_matrix();
    let mut phi = start.to_vec();
    let (theta_start, _) = real_moments(&phi, grid);
    let mut tphi = vec![0.0; n];
    let mut mu = {
        grid.apply_kinetic_real(&phi, &mut tphi);
        let (t, b) = real_moments(&phi, grid);
        let pot = potential_from_moments(t, b, p, grid).ok()?;
        w * (0..n)
            .map(|i| phi[i] * (tphi[i] + (pot.samples[i] + p.g * phi[i] * phi[i]) * phi[i]))
            .sum::<f64>()
    };
    let m = n + 1;
    let mut jac = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for _ in 0..NEWTON_MAX_ITER {
        let (theta, bunching) = real_moments(&phi, grid);
        let pot = potential_from_moments(theta, bunching, p, grid).ok()?;
        grid.apply_kinetic_real(&phi, &mut tphi);
        let mut fmax = 0.0f64;
        for i in 0..n {
            let f = tphi[i] + (pot.samples[i] + p.g * phi[i] * phi[i] - mu) * phi[i];
            rhs[i] = -f;
            fmax = fmax.max(f.abs());
        }
        rhs[n] = -(grid.integrate(phi.iter().map(|x| x * x)) - 1.0);
        if fmax <= 0.1 * opts.tol_mu * mu.abs().max(1.0) && rhs[n].abs() < 1e-14 {
            break;
        }

        // Derivatives of the potential coefficients with respect to the moments.
        let s = p.delta_c - p.u0 * bunching;
        let d = s * s + p.kappa * p.kappa;
        let e2 = p.eta * p.eta;
        let du1_dt = 2.0 * e2 * s / d;
        let du1_db = 2.0 * theta * e2 * p.u0 * (s * s - p.kappa * p.kappa) / (d * d);
        let du2_dt = 2.0 * theta * e2 * p.u0 / d;
        let du2_db = 2.0 * theta * theta * e2 * p.u0 * p.u0 * s / (d * d);

        for i in 0..n {
            let row = &mut jac[i * m..(i + 1) * m];
            row[..n].copy_from_slice(&tmat[i * n..(i + 1) * n]);
            row[i] += pot.samples[i] + 3.0 * p.g * phi[i] * phi[i] - mu;
            let dv_dt = du1_dt * c[i] + du2_dt * c2[i];
            let dv_db = du1_db * c[i] + du2_db * c2[i];
            for j in 0..n {
                let dt = 2.0 * w * phi[j] * c[j];
                let db = 2.0 * w * phi[j] * c2[j];
                row[j] += phi[i] * (dv_dt * dt + dv_db * db);
            }
            row[n] = -phi[i];
        }
        for j in 0..n {
            jac[n * m + j] = 2.0 * w * phi[j];
        }
        jac[n * m + n] = 0.0;

        let delta = lu_solve(&jac, &rhs)?;
        for (x, dx) in phi.iter_mut().zip(&delta) {
            *x += dx;
        }
        mu += delta[n];
        if !mu.is_finite() || phi.iter().any(|x| !x.is_finite()) {
            return None;
        }
    }
    let peak = start.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let distance = phi.iter().zip(start).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / peak;
    let (theta_end, _) = real_moments(&phi, grid);
    let flipped = theta_start.abs().min(theta_end.abs()) > 1e-8 && theta_end * theta_start < 0.0;
    if distance > POLISH_MAX_DISTANCE || flipped {
        return None;
    }
    Some(phi)
}

/// One row of a pump sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub eta: f64,
    pub theta: f64,
    pub bunching: f64,
    pub mu: f64,
    pub photons_per_atom: f64,
    pub u1: f64,
    pub u2: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Failure description when no state (not even a non-converged one)
    /// was produced.
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn from_outcome(eta: f64, outcome: &Result<SteadyState>, p: &ModelParams, grid: &SpatialGrid) -> Self {
        let state = match outcome {
            Ok(s) => Some(s),
            Err(Error::NotConverged { state, .. }) => Some(state.as_ref()),
            Err(_) => None,
        };
        match state {
            Some(s) => {
                let pot = potential_from_moments(s.theta_op, s.bunching, &p.with_eta(eta), grid).ok();
                Self {
                    eta,
                    theta: s.theta_op,
                    bunching: s.bunching,
                    mu: s.mu,
                    photons_per_atom: s.photons_per_atom,
                    u1: pot.as_ref().map_or(f64::NAN, |v| v.u1),
                    u2: pot.as_ref().map_or(f64::NAN, |v| v.u2),
                    iterations: s.iterations,
                    residual: s.residual,
                    converged: s.converged,
                    error: outcome.as_ref().err().map(|e| e.to_string()),
                }
            }
            None => Self {
                eta,
                theta: f64::NAN,
                bunching: f64::NAN,
                mu: f64::NAN,
                photons_per_atom: f64::NAN,
                u1: f64::NAN,
                u2: f64::NAN,
                iterations: 0,
                residual: f64::NAN,
                converged: false,
                error: outcome.as_ref().err().map(|e| e.to_string()),
            },
        }
    }
}

fn check_sorted(eta_values: &[f64]) -> Result<()> {
    if eta_values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter("eta values must be sorted ascending"));
    }
    Ok(())
}

/// Solves along an ascending pump axis, warm-starting every point from the
/// last converged wavefunction. Failures are returned in place.
pub fn sweep_states(
    p: &ModelParams,
    grid: &SpatialGrid,
    opts: &SolverOptions,
    eta_values: &[f64],
) -> Result<Vec<(f64, Result<SteadyState>)>> {
    check_sorted(eta_values)?;
    let mut out = Vec::with_capacity(eta_values.len());
    let mut warm: Option<Wavefunction> = None;
    for &eta in eta_values {
        let outcome = solve_steady_from(&p.with_eta(eta), grid, opts, warm.as_ref());
        if let Ok(state) = &outcome {
            warm = Some(state.phi0.clone());
        }
        out.push((eta, outcome));
    }
    Ok(out)
}

/// Order-parameter sweep over the pump amplitude.
pub fn sweep_eta(
    p: &ModelParams,
    grid: &SpatialGrid,
    opts: &SolverOptions,
    eta_values: &[f64],
) -> Result<Vec<SweepRecord>> {
    Ok(sweep_states(p, grid, opts, eta_values)?
        .iter()
        .map(|(eta, outcome)| SweepRecord::from_outcome(*eta, outcome, p, grid))
        .collect())
}
