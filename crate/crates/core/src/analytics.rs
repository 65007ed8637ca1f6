//! Closed-form threshold and spectrum results, and the defect criteria.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::grid::SpatialGrid;
use crate::linalg::{eigenvalues, CMatrix};
use crate::observables::{potential_from_moments, AdiabaticPotential};
use crate::steady_state::{solve_steady, SolverOptions, SteadyState};
use crate::{Error, ModelParams, Result};

/// Critical pump `eta_c = sqrt[((Delta_C - u0/2)^2 + kappa^2) (1 + 2g) / (u0 - 2 Delta_C)]`.
pub fn critical_eta(p: &ModelParams) -> Result<f64> {
    let den = p.u0 - 2.0 * p.delta_c;
    if !(den > 0.0) {
        return Err(Error::NoTransition);
    }
    let d = p.delta_c_eff();
    Ok(((d * d + p.kappa * p.kappa) * (1.0 + 2.0 * p.g) / den).sqrt())
}

/// Bogoliubov frequency `sqrt(n^2 (n^2 + 2g))` of the `n`-th harmonic of a
/// uniform condensate.
pub fn box_spectrum(n: u32, g: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("harmonic index must be at least 1"));
    }
    let n2 = (n as f64) * (n as f64);
    Ok((n2 * (n2 + 2.0 * g)).sqrt())
}

/// Roots of the characteristic polynomial of the `cos theta` sector of the
/// uniform state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticRoots {
    /// Sorted by decreasing real part, then by decreasing imaginary part.
    pub roots: [Complex64; 4],
    /// `-Delta_C + u0/2`.
    pub delta_c_eff: f64,
    /// `sqrt(1 + 2g)`.
    pub omega1: f64,
}

/// Coefficients `[c0, c1, c2, c3]` of the monic quartic
/// `(l^2 - W^2)((l + i kappa)^2 - d^2) - 2 eta^2 d`, `W^2 = 1 + 2g`.
pub fn quartic_coefficients(p: &ModelParams) -> [Complex64; 4] {
    let w2 = 1.0 + 2.0 * p.g;
    let d = p.delta_c_eff();
    let k = p.kappa;
    [
        Complex64::new(w2 * (k * k + d * d) - 2.0 * p.eta * p.eta * d, 0.0),
        Complex64::new(0.0, -2.0 * k * w2),
        Complex64::new(-(k * k + d * d + w2), 0.0),
        Complex64::new(0.0, 2.0 * k),
    ]
}

/// Value of the quartic at `l`.
pub fn quartic_value(p: &ModelParams, l: Complex64) -> Complex64 {
    let c = quartic_coefficients(p);
    (((l + c[3]) * l + c[2]) * l + c[1]) * l + c[0]
}

fn quartic_derivative(p: &ModelParams, l: Complex64) -> Complex64 {
    let c = quartic_coefficients(p);
    ((l * 4.0 + c[3] * 3.0) * l + c[2] * 2.0) * l + c[1]
}

/// The 4x4 linearized matrix restricted to `(a_a, a_s, f, g)` with `f`, `g`
/// proportional to `cos theta`, around the uniform state.
pub fn restricted_matrix(p: &ModelParams) -> CMatrix {
    let d = p.delta_c_eff();
    let e = p.eta;
    let z = Complex64::new(0.0, 0.0);
    let r = |x: f64| Complex64::new(x, 0.0);
    let k = Complex64::new(0.0, -p.kappa);
    CMatrix::from_rows(
        4,
        alloc::vec![
            k, r(d), r(e), z, //
            r(d), k, z, z, //
            z, z, z, r(-1.0), //
            z, r(-2.0 * e), r(-1.0 - 2.0 * p.g), z,
        ],
    )
    .expect("4x4")
}

/// Roots of the quartic from the companion-matrix eigenvalues, refined by
/// Newton steps on the polynomial.
pub fn quartic_roots(p: &ModelParams) -> Result<QuarticRoots> {
    p.validate()?;
    let c = quartic_coefficients(p);
    let mut comp = CMatrix::zeros(4);
    for j in 0..4 {
        comp[(0, j)] = -c[3 - j];
    }
    for i in 1..4 {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let ev = eigenvalues(&comp)?;
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    for (r, l0) in roots.iter_mut().zip(ev) {
        let mut l = l0;
        for _ in 0..4 {
            let d = quartic_derivative(p, l);
            if d.norm() == 0.0 {
                break;
            }
            let step = quartic_value(p, l) / d;
            let next = l - step;
            if quartic_value(p, next).norm() < quartic_value(p, l).norm() {
                l = next;
            } else {
                break;
            }
        }
        *r = l;
    }
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(core::cmp::Ordering::Equal))
    });
    Ok(QuarticRoots {
        roots,
        delta_c_eff: p.delta_c_eff(),
        omega1: (1.0 + 2.0 * p.g).sqrt(),
    })
}

/// Small-coupling approximation of the lowest excitation below threshold.
pub fn lambda1_approx(p: &ModelParams) -> Result<Complex64> {
    let eta_c = critical_eta(p)?;
    if p.eta > eta_c {
        return Err(Error::Domain("pump above threshold"));
    }
    let w2 = 1.0 + 2.0 * p.g;
    let d = p.delta_c_eff();
    let r = (p.eta / eta_c).powi(2);
    Ok(Complex64::new(
        w2.sqrt() * (1.0 - r).sqrt(),
        -p.kappa * w2 / (d * d + p.kappa * p.kappa) * r,
    ))
}

/// `eta_c^2 - eta_*^2 = eta_c^2 (kappa W / (d^2 + kappa^2))^2`: the width of
/// the pump interval in which the lowest mode is purely damped.
pub fn eta_star_gap(p: &ModelParams) -> Result<f64> {
    let eta_c = critical_eta(p)?;
    let d = p.delta_c_eff();
    let ratio = p.kappa * (1.0 + 2.0 * p.g).sqrt() / (d * d + p.kappa * p.kappa);
    Ok(eta_c * eta_c * ratio * ratio)
}

/// The two quartic roots of smallest modulus (the condensate-like pair).
fn condensate_pair(p: &ModelParams) -> Result<[Complex64; 2]> {
    let mut r = quartic_roots(p)?.roots;
    r.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(core::cmp::Ordering::Equal));
    Ok([r[0], r[1]])
}

fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pump at which the real part of the lowest quartic root first vanishes.
pub fn eta_star_numeric(p: &ModelParams) -> Result<f64> {
    let eta_c = critical_eta(p)?;
    let w = (1.0 + 2.0 * p.g).sqrt();
    bisect(0.0, eta_c, |eta| {
        let pair = condensate_pair(&p.with_eta(eta))?;
        Ok(pair.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min) < 1e-7 * w)
    })
}

/// Pump at which the imaginary part of a quartic root crosses zero.
pub fn eta_c_numeric(p: &ModelParams) -> Result<f64> {
    let eta_c = critical_eta(p)?;
    bisect(0.0, 2.0 * eta_c, |eta| {
        let pair = condensate_pair(&p.with_eta(eta))?;
        Ok(pair.iter().any(|z| z.im > 0.0))
    })
}

/// Detuning `Delta_C = u0 - kappa` that keeps the cavity red detuned for
/// every density distribution.
pub fn recommended_detuning(p: &ModelParams) -> f64 {
    p.u0 - p.kappa
}

/// Perfect-localization limit of the defect criterion, `|u0| > kappa`.
pub fn defect_criterion_asymptotic(p: &ModelParams) -> bool {
    p.u0.abs() > p.kappa
}

/// Positions of the strict local minima of `V` on a uniform scan of
/// `samples` points.
pub fn potential_minima(pot: &AdiabaticPotential, samples: usize) -> Vec<f64> {
    let h = 2.0 * core::f64::consts::PI / samples as f64;
    let v: Vec<f64> = (0..samples).map(|k| pot.at(k as f64 * h)).collect();
    (0..samples)
        .filter(|&k| {
            let prev = v[(k + samples - 1) % samples];
            let next = v[(k + 1) % samples];
            v[k] < prev && v[k] < next
        })
        .map(|k| k as f64 * h)
        .collect()
}

const SCAN_POINTS: usize = 4096;

/// Whether the self-consistent potential has a strict local minimum at the
/// antinode opposite to the one occupied by the condensate.
///
/// The potential is scanned on a dense grid; the complementary antinode is
/// then tested at sub-grid offsets, which resolves arbitrarily shallow wells.
pub fn has_secondary_minimum(state: &SteadyState, p: &ModelParams, grid: &SpatialGrid) -> Result<bool> {
    if state.theta_op.abs() <= 1e-12 {
        return Ok(false);
    }
    let pot = potential_from_moments(state.theta_op, state.bunching, p, grid)?;
    let site = if state.theta_op > 0.0 { core::f64::consts::PI } else { 0.0 };
    let minima = potential_minima(&pot, SCAN_POINTS);
    let h = 2.0 * core::f64::consts::PI / SCAN_POINTS as f64;
    let near = |t: f64| {
        let d = (t - site).abs();
        d.min(2.0 * core::f64::consts::PI - d) <= h
    };
    let scanned = minima.iter().any(|&t| near(t));
    let delta = 1e-4 * h;
    let v0 = pot.at(site);
    let refined = pot.at(site + delta) > v0 && pot.at(site - delta) > v0;
    Ok(scanned || refined)
}

/// Closed-form counterpart of [`has_secondary_minimum`]: positive curvature
/// of `V` at the complementary antinode, `Delta_C - u0 B > |Theta| u0`,
/// which for red detuning reads `|Delta_C - u0 B| < |Theta| |u0|`.
pub fn secondary_minimum_closed_form(theta: f64, bunching: f64, p: &ModelParams) -> bool {
    theta != 0.0 && p.delta_c - p.u0 * bunching > theta.abs() * p.u0
}

/// Interval of `u0` in which the uniform state is unstable at pump `eta`
/// for fixed `Delta_C`, `kappa` and `g`. `None` when no `u0` organizes.
pub fn organization_window(p: &ModelParams) -> Option<(f64, f64)> {
    // With w = u0 - 2 Delta_C the threshold condition reads
    // w^2 / 4 - e^2 w + kappa^2 < 0, e^2 = eta^2 / (1 + 2g).
    let e2 = p.eta * p.eta / (1.0 + 2.0 * p.g);
    let disc = e2 * e2 - p.kappa * p.kappa;
    if !(disc > 0.0) {
        return None;
    }
    let root = disc.sqrt();
    Some((2.0 * (e2 - root) + 2.0 * p.delta_c, 2.0 * (e2 + root) + 2.0 * p.delta_c))
}

/// Location of the defect boundary at one pump value.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectBoundaryPoint {
    pub eta: f64,
    /// Smallest `|u0|` (red detuning) beyond which the organized state has a
    /// secondary potential minimum; `None` if no probed state has one.
    pub u0_abs_boundary: Option<f64>,
    /// Self-organization window in `u0` at this pump.
    pub window: Option<(f64, f64)>,
    /// Probes whose steady state failed to converge.
    pub failed_probes: usize,
}

const COARSE_PROBES: usize = 16;
const BISECTION_REL_TOL: f64 = 1e-6;

/// Defect boundary at one pump value, searched over `|u0|` within
/// `u0_abs_range` intersected with the self-organization window
/// (negative `u0` only).
pub fn defect_boundary_at(
    p_base: &ModelParams,
    grid: &SpatialGrid,
    opts: &SolverOptions,
    eta: f64,
    u0_abs_range: (f64, f64),
) -> Result<DefectBoundaryPoint> {
    let p_eta = p_base.with_eta(eta);
    let window = organization_window(&p_eta);
    let mut point = DefectBoundaryPoint {
        eta,
        u0_abs_boundary: None,
        window,
        failed_probes: 0,
    };
    let Some((w_lo, w_hi)) = window else {
        return Ok(point);
    };
    // |u0| interval with u0 < 0 inside the window, kept slightly away from
    // its edges where the order parameter vanishes.
    let neg_hi = w_hi.min(0.0);
    let inset = 1e-3 * (neg_hi - w_lo);
    let abs_lo = if w_hi < 0.0 { -(w_hi - inset) } else { 0.0 }.max(u0_abs_range.0);
    let abs_hi = (-(w_lo + inset)).min(u0_abs_range.1);
    if !(abs_hi > abs_lo) {
        return Ok(point);
    }

    let mut failed = 0usize;
    let mut probe = |u: f64| -> Result<Option<bool>> {
        let p = p_eta.with_u0(-u);
        match solve_steady(&p, grid, opts) {
            Ok(s) => Ok(Some(has_secondary_minimum(&s, &p, grid)?)),
            Err(Error::NotConverged { .. }) => {
                failed += 1;
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };

    let mut last_false: Option<f64> = None;
    let mut first_true: Option<f64> = None;
    for k in 0..COARSE_PROBES {
        let u = abs_lo + (abs_hi - abs_lo) * k as f64 / (COARSE_PROBES - 1) as f64;
        match probe(u)? {
            Some(true) => {
                first_true = Some(u);
                break;
            }
            Some(false) => last_false = Some(u),
            None => {}
        }
    }
    let boundary = match (last_false, first_true) {
        (_, None) => None,
        (None, Some(t)) => Some(t),
        (Some(mut lo), Some(mut hi)) => {
            while hi - lo > BISECTION_REL_TOL * hi {
                let mid = 0.5 * (lo + hi);
                match probe(mid)? {
                    Some(true) => hi = mid,
                    Some(false) => lo = mid,
                    None => break,
                }
            }
            Some(0.5 * (lo + hi))
        }
    };
    point.u0_abs_boundary = boundary;
    point.failed_probes = failed;
    Ok(point)
}

/// Defect boundary for every pump value.
pub fn defect_phase_boundary(
    p_base: &ModelParams,
    grid: &SpatialGrid,
    opts: &SolverOptions,
    eta_values: &[f64],
    u0_abs_range: (f64, f64),
) -> Result<Vec<DefectBoundaryPoint>> {
    eta_values
        .iter()
        .map(|&eta| defect_boundary_at(p_base, grid, opts, eta, u0_abs_range))
        .collect()
}
