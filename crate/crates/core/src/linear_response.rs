//! Collective excitations around a stationary state.
//!
//! Fluctuations `(da, da*, dphi, dphi*)` obey `i dy/dt = M y`. The matrix is
//! assembled in the quadrature basis
//! `a_a = da - da*`, `a_s = da + da*`, `f = u + v`, `g = v - u`
//! (with `u = dphi`, `v = dphi*`), ordered as `[a_a, a_s, f_0..f_n, g_0..g_n]`.
//! The matrix is not Hermitian: eigenvalues `omega = nu - i gamma` come in
//! pairs `omega, -conj(omega)`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::SpatialGrid;
use crate::linalg::{eigen, vec_norm, CMatrix};
use crate::steady_state::{sweep_states, SolverOptions, SteadyState, SweepRecord};
use crate::{Error, ModelParams, Result, Wavefunction};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Largest tolerated imaginary part of the phase-fixed stationary state.
const REALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct BogoliubovMatrix {
    matrix: CMatrix,
    n_points: usize,
    /// Stationary state with its global phase fixed (real, positive mean).
    state: SteadyState,
    params: ModelParams,
}

impl BogoliubovMatrix {
    pub fn dimension(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn state(&self) -> &SteadyState {
        &self.state
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// The real stationary wavefunction used for the assembly.
    pub fn phi0(&self) -> Vec<f64> {
        self.state.phi0.values().iter().map(|z| z.re).collect()
    }

    fn reflection_symmetric(&self) -> bool {
        let n = self.n_points;
        let phi = self.state.phi0.values();
        let scale = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (0..n).all(|j| (phi[j] - phi[(n - j) % n]).norm() <= 1e-10 * scale)
    }
}

/// Converts a quadrature-basis vector to `(da, da*, dphi, dphi*)` components.
pub fn to_fluctuation_basis(vector: &[Complex64]) -> (Complex64, Complex64, Vec<Complex64>, Vec<Complex64>) {
    let n = (vector.len() - 2) / 2;
    let (aa, as_) = (vector[0], vector[1]);
    let f = &vector[2..2 + n];
    let g = &vector[2 + n..];
    (
        (as_ + aa) * 0.5,
        (as_ - aa) * 0.5,
        f.iter().zip(g).map(|(f, g)| (f - g) * 0.5).collect(),
        f.iter().zip(g).map(|(f, g)| (f + g) * 0.5).collect(),
    )
}

/// Inverse of [`to_fluctuation_basis`].
pub fn from_fluctuation_basis(a_plus: Complex64, a_minus: Complex64, u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(2 * u.len() + 2);
    out.push(a_plus - a_minus);
    out.push(a_plus + a_minus);
    out.extend(u.iter().zip(v).map(|(u, v)| u + v));
    out.extend(u.iter().zip(v).map(|(u, v)| v - u));
    out
}

/// Rotates the wavefunction to a real, positive mean and checks that it is
/// real afterwards.
fn phase_fixed(phi: &Wavefunction) -> Result<Wavefunction> {
    let mean: Complex64 = phi.values().iter().sum();
    let rot = if mean.norm() > 0.0 { mean.conj() / mean.norm() } else { Complex64::new(1.0, 0.0) };
    let scale = phi.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rotated: Vec<Complex64> = phi.values().iter().map(|z| z * rot).collect();
    let max_im = rotated.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_im > REALITY_TOL * scale.max(1.0) {
        return Err(Error::NonRealState(max_im));
    }
    Ok(Wavefunction::from_real(rotated.iter().map(|z| z.re)))
}

/// Assembles the linearized matrix around a converged stationary state.
pub fn build_matrix(state: &SteadyState, p: &ModelParams, grid: &SpatialGrid) -> Result<BogoliubovMatrix> {
    if !state.converged {
        return Err(Error::StateNotConverged);
    }
    grid.check_len(state.phi0.len())?;
    let phi_wf = phase_fixed(&state.phi0)?;
    let mut state = state.clone();
    state.phi0 = phi_wf;
    let phi: Vec<f64> = state.phi0.values().iter().map(|z| z.re).collect();

    let n = grid.n_points();
    let w = grid.weight();
    let c = grid.cos();
    let c2 = grid.cos2();
    let a0 = state.a0.0;
    let (u0, g, eta) = (p.u0, p.g, p.eta);
    let re_a = -p.delta_c + u0 * state.bunching;
    let diag: Vec<f64> = (0..n)
        .map(|j| g * phi[j] * phi[j] - state.mu + u0 * a0.norm_sqr() * c2[j] + 2.0 * eta * a0.re * c[j])
        .collect();

    let dim = 2 * n + 2;
    let mut m = CMatrix::zeros(dim);
    let kappa = Complex64::new(0.0, -p.kappa);
    m[(0, 0)] = kappa;
    m[(0, 1)] = Complex64::new(re_a, 0.0);
    m[(1, 0)] = Complex64::new(re_a, 0.0);
    m[(1, 1)] = kappa;
    let (fo, go) = (2, 2 + n);
    for j in 0..n {
        let x = w * phi[j] * c2[j];
        let y = w * phi[j] * c[j];
        m[(0, fo + j)] = Complex64::new(2.0 * (a0.re * u0 * x + eta * y), 0.0);
        m[(1, fo + j)] = I * (2.0 * a0.im * u0 * x);

        m[(go + j, 0)] = I * (2.0 * phi[j] * u0 * c2[j] * a0.im);
        m[(go + j, 1)] = Complex64::new(-2.0 * phi[j] * (u0 * c2[j] * a0.re + eta * c[j]), 0.0);
        for l in 0..n {
            let h0 = grid.kinetic_entry(j, l) + if j == l { diag[j] } else { 0.0 };
            m[(fo + j, go + l)] = Complex64::new(-h0, 0.0);
            let extra = if j == l { 2.0 * g * phi[j] * phi[j] } else { 0.0 };
            m[(go + j, fo + l)] = Complex64::new(-h0 - extra, 0.0);
        }
    }
    Ok(BogoliubovMatrix {
        matrix: m,
        n_points: n,
        state,
        params: *p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Condensate,
    Field,
}

/// Behaviour under the reflection `theta -> -theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMode {
    /// `omega = nu - i gamma`.
    pub omega: Complex64,
    pub nu: f64,
    pub gamma: f64,
    /// Unit-norm right eigenvector in the quadrature basis.
    pub vector: Vec<Complex64>,
    pub kind: ModeKind,
    /// Share of the field quadratures in the norm, with the atomic part
    /// measured by the grid quadrature `(1/n) sum |.|^2`.
    pub field_weight: f64,
    /// Index of the `-conj(omega)` partner within the same list.
    pub paired_with: Option<usize>,
    /// Set when the stationary state is reflection symmetric.
    pub parity: Option<Parity>,
    /// Global-phase (normalization) direction of the condensate.
    pub gauge: bool,
    /// `||M v - omega v||`.
    pub residual: f64,
}

/// Orthonormal real basis of one reflection sector: every column has one or
/// two nonzero entries, stored as `(index, weight)` lists.
fn sector_basis(n: usize, parity: Parity) -> Vec<Vec<(usize, f64)>> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut cols = Vec::new();
    if parity == Parity::Even {
        cols.push(vec![(0, 1.0)]);
        cols.push(vec![(1, 1.0)]);
    }
    for offset in [2, 2 + n] {
        for j in 0..n {
            let mj = (n - j) % n;
            if j == mj {
                if parity == Parity::Even {
                    cols.push(vec![(offset + j, 1.0)]);
                }
            } else if j < mj {
                let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
                cols.push(vec![(offset + j, s), (offset + mj, sign * s)]);
            }
        }
    }
    cols
}

fn project(m: &CMatrix, basis: &[Vec<(usize, f64)>]) -> CMatrix {
    let k = basis.len();
    let mut out = CMatrix::zeros(k);
    for (r, br) in basis.iter().enumerate() {
        for (c, bc) in basis.iter().enumerate() {
            let mut acc = ZERO;
            for &(i, wi) in br {
                for &(j, wj) in bc {
                    acc += m[(i, j)] * (wi * wj);
                }
            }
            out[(r, c)] = acc;
        }
    }
    out
}

fn field_weight(vector: &[Complex64], n: usize) -> f64 {
    let field = vector[0].norm_sqr() + vector[1].norm_sqr();
    let atoms: f64 = vector[2..].iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let total = field + atoms;
    if total > 0.0 {
        field / total
    } else {
        0.0
    }
}

fn residual(m: &CMatrix, omega: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.mul_vec(v).expect("dimension checked");
    mv.iter().zip(v).map(|(a, b)| (a - omega * b).norm_sqr()).sum::<f64>().sqrt()
}

/// All eigenpairs of the matrix, classified and paired.
///
/// A reflection-symmetric stationary state is diagonalized sector by sector
/// (even and odd under `theta -> -theta`), which also labels each mode's
/// parity.
pub fn eigendecompose(bm: &BogoliubovMatrix) -> Result<Vec<BogoliubovMode>> {
    let m = &bm.matrix;
    let n = bm.n_points;
    let dim = m.dim();
    let mut raw: Vec<(Complex64, Vec<Complex64>, Option<Parity>)> = Vec::with_capacity(dim);
    if bm.reflection_symmetric() {
        for parity in [Parity::Even, Parity::Odd] {
            let basis = sector_basis(n, parity);
            let sub = project(m, &basis);
            let e = eigen(&sub)?;
            for (value, y) in e.values.into_iter().zip(e.vectors) {
                let mut v = vec![ZERO; dim];
                for (col, yc) in basis.iter().zip(&y) {
                    for &(i, wi) in col {
                        v[i] += yc * wi;
                    }
                }
                raw.push((value, v, Some(parity)));
            }
        }
    } else {
        let e = eigen(m)?;
        for (value, v) in e.values.into_iter().zip(e.vectors) {
            raw.push((value, v, None));
        }
    }

    let phi0 = bm.phi0();
    let phi_norm = phi0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = m.frobenius_norm();
    let modes = raw
        .into_iter()
        .map(|(omega, mut vector, parity)| {
            let nv = vec_norm(&vector);
            vector.iter_mut().for_each(|z| *z /= nv);
            let gauge_overlap: f64 = [2usize, 2 + n]
                .iter()
                .map(|&off| {
                    phi0.iter()
                        .zip(&vector[off..off + n])
                        .map(|(p, z)| z * (p / phi_norm))
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum();
            let fw = field_weight(&vector, n);
            BogoliubovMode {
                omega,
                nu: omega.re,
                gamma: -omega.im,
                residual: residual(m, omega, &vector),
                kind: if fw > 0.5 { ModeKind::Field } else { ModeKind::Condensate },
                field_weight: fw,
                vector,
                paired_with: None,
                parity,
                gauge: omega.norm() <= 1e-6 * scale.max(1.0) && gauge_overlap > 0.9,
            }
        })
        .collect();
    Ok(classify_and_pair(modes))
}

/// Recomputes kinds, sorts (condensate modes first, then by decreasing `nu`)
/// and pairs every mode with its `-conj(omega)` partner.
pub fn classify_and_pair(mut modes: Vec<BogoliubovMode>) -> Vec<BogoliubovMode> {
    for m in modes.iter_mut() {
        m.kind = if m.field_weight > 0.5 { ModeKind::Field } else { ModeKind::Condensate };
        m.paired_with = None;
    }
    modes.sort_by(|a, b| {
        let ka = (a.kind == ModeKind::Field) as u8;
        let kb = (b.kind == ModeKind::Field) as u8;
        ka.cmp(&kb)
            .then(b.nu.partial_cmp(&a.nu).unwrap_or(core::cmp::Ordering::Equal))
            .then(a.gamma.partial_cmp(&b.gamma).unwrap_or(core::cmp::Ordering::Equal))
    });
    let k = modes.len();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..k {
        for j in i..k {
            let d = (modes[i].omega + modes[j].omega.conj()).norm();
            let tol = 1e-6 * (1.0 + modes[i].omega.norm());
            if d <= tol {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    for (_, i, j) in candidates {
        if modes[i].paired_with.is_none() && modes[j].paired_with.is_none() {
            modes[i].paired_with = Some(j);
            modes[j].paired_with = Some(i);
        }
    }
    modes
}

/// Spectrum of a single stationary state.
pub fn spectrum(state: &SteadyState, p: &ModelParams, grid: &SpatialGrid) -> Result<Vec<BogoliubovMode>> {
    eigendecompose(&build_matrix(state, p, grid)?)
}

/// Tolerance below which a frequency is treated as zero.
fn zero_tol(modes: &[BogoliubovMode]) -> f64 {
    let scale = modes.iter().map(|m| m.omega.norm()).fold(1.0, f64::max);
    1e-9 * scale
}

/// Non-gauge condensate modes with `nu >= 0`, ordered by increasing `nu`;
/// purely damped pairs keep both members.
pub fn positive_condensate_modes(modes: &[BogoliubovMode]) -> Vec<&BogoliubovMode> {
    let tol = zero_tol(modes);
    let mut out: Vec<&BogoliubovMode> = modes
        .iter()
        .filter(|m| m.kind == ModeKind::Condensate && !m.gauge && m.nu > -tol)
        .collect();
    out.sort_by(|a, b| a.nu.partial_cmp(&b.nu).unwrap_or(core::cmp::Ordering::Equal));
    out
}

/// Positive-frequency mode with the largest field weight. Deep in the
/// organized phase the cavity excitation is strongly dressed by the atoms
/// and can drop below half field weight; it is still the one returned here.
pub fn field_mode(modes: &[BogoliubovMode]) -> Option<&BogoliubovMode> {
    modes
        .iter()
        .filter(|m| m.nu > 0.0 && !m.gauge)
        .max_by(|a, b| a.field_weight.partial_cmp(&b.field_weight).unwrap_or(core::cmp::Ordering::Equal))
}

/// One pump value of a tracked spectrum sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub record: SweepRecord,
    /// `(nu, gamma)` of each tracked condensate branch.
    pub condensate: Vec<(f64, f64)>,
    /// `(nu, gamma)` of the field-dominated mode.
    pub field: Option<(f64, f64)>,
    pub error: Option<String>,
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

/// Lowest condensate excitations along an ascending pump axis, following
/// each branch by maximal eigenvector overlap with the previous point.
pub fn spectrum_sweep(
    p: &ModelParams,
    grid: &SpatialGrid,
    opts: &SolverOptions,
    eta_values: &[f64],
    n_lowest: usize,
) -> Result<Vec<SpectrumRow>> {
    let states = sweep_states(p, grid, opts, eta_values)?;
    let mut rows = Vec::with_capacity(states.len());
    let mut tracked: Option<Vec<Vec<Complex64>>> = None;
    for (eta, outcome) in &states {
        let record = SweepRecord::from_outcome(*eta, outcome, p, grid);
        let pe = p.with_eta(*eta);
        let result = outcome
            .as_ref()
            .map_err(|e| e.to_string())
            .and_then(|s| spectrum(s, &pe, grid).map_err(|e| e.to_string()));
        match result {
            Err(error) => rows.push(SpectrumRow {
                record,
                condensate: Vec::new(),
                field: None,
                error: Some(error),
            }),
            Ok(modes) => {
                let candidates = positive_condensate_modes(&modes);
                let chosen: Vec<&BogoliubovMode> = match &tracked {
                    Some(prev) if prev.len() <= candidates.len() => {
                        let pool = &candidates[..candidates.len().min(2 * n_lowest + 6)];
                        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
                        for (b, pv) in prev.iter().enumerate() {
                            for (c, cand) in pool.iter().enumerate() {
                                pairs.push((overlap(pv, &cand.vector), b, c));
                            }
                        }
                        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(core::cmp::Ordering::Equal));
                        let mut assign: Vec<Option<usize>> = vec![None; prev.len()];
                        let mut used = vec![false; pool.len()];
                        for (_, b, c) in pairs {
                            if assign[b].is_none() && !used[c] {
                                assign[b] = Some(c);
                                used[c] = true;
                            }
                        }
                        assign.iter().map(|c| pool[c.expect("pool is large enough")]).collect()
                    }
                    _ => candidates.iter().take(n_lowest).copied().collect(),
                };
                tracked = Some(chosen.iter().map(|m| m.vector.clone()).collect());
                rows.push(SpectrumRow {
                    record,
                    condensate: chosen.iter().map(|m| (m.nu, m.gamma)).collect(),
                    field: field_mode(&modes).map(|m| (m.nu, m.gamma)),
                    error: None,
                });
            }
        }
    }
    Ok(rows)
}
