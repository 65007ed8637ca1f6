use cavity_selforg_core::analytics::{
    critical_eta, defect_boundary_at, eta_star_gap, lambda1_approx, quartic_roots, DefectBoundaryPoint,
};
use cavity_selforg_core::depletion::depletion_sweep;
use cavity_selforg_core::linear_response::spectrum_sweep;
use cavity_selforg_core::steady_state::{solve_steady, sweep_eta, SweepRecord};
use cavity_selforg_core::{Error, SpatialGrid};
use rayon::prelude::*;

use crate::config::{Axis, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

/// A finished table together with how many of its rows succeeded.
pub struct Outcome {
    pub table: Table,
    pub ok_rows: usize,
}

fn grid(cfg: &RunConfig) -> Result<SpatialGrid, CliError> {
    SpatialGrid::new(cfg.grid.n_points).map_err(|e| CliError::Config(e.to_string()))
}

fn require_eta_axis(axis: Axis, command: &str) -> Result<(), CliError> {
    if axis == Axis::Eta {
        Ok(())
    } else {
        Err(CliError::Config(format!("{command} sweeps the pump; set sweep.axis = \"eta\"")))
    }
}

fn regime(e: Error) -> CliError {
    match e {
        Error::InvalidParameter(_) | Error::UnsupportedRegime(_) => CliError::Config(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

const RECORD_COLUMNS: [&str; 12] = [
    "eta",
    "theta",
    "bunching",
    "mu",
    "photons_per_atom",
    "u1",
    "u2",
    "iterations",
    "residual",
    "converged",
    "status",
    "message",
];

fn status(converged: bool, error: &Option<String>) -> (&'static str, String) {
    match (converged, error) {
        (true, _) => ("ok", String::new()),
        (false, Some(e)) if e.contains("did not converge") => ("not_converged", e.clone()),
        (false, e) => ("failed", e.clone().unwrap_or_default()),
    }
}

fn record_cells(r: &SweepRecord) -> Vec<Cell> {
    let (s, msg) = status(r.converged, &r.error);
    vec![
        r.eta.into(),
        r.theta.into(),
        r.bunching.into(),
        r.mu.into(),
        r.photons_per_atom.into(),
        r.u1.into(),
        r.u2.into(),
        r.iterations.into(),
        r.residual.into(),
        r.converged.into(),
        s.into(),
        msg.into(),
    ]
}

fn axis_columns(axis: Axis, rest: &[&str]) -> Vec<String> {
    let mut cols = Vec::with_capacity(rest.len() + 1);
    if !rest.contains(&axis.name()) {
        cols.push(axis.name().to_string());
    }
    cols.extend(rest.iter().map(|c| c.to_string()));
    cols
}

fn with_axis(value: f64, rest_has_axis: bool, mut cells: Vec<Cell>) -> Vec<Cell> {
    if !rest_has_axis {
        cells.insert(0, value.into());
    }
    cells
}

pub fn steady(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model_params()?;
    let grid = grid(cfg)?;
    let outcome = solve_steady(&p, &grid, &cfg.solver_options());
    if let Err(e @ (Error::InvalidParameter(_) | Error::UnsupportedRegime(_))) = outcome {
        return Err(CliError::Config(e.to_string()));
    }
    let record = SweepRecord::from_outcome(p.eta, &outcome, &p, &grid);
    let mut table = Table::new(RECORD_COLUMNS);
    table.push(record_cells(&record));
    Ok(Outcome { table, ok_rows: usize::from(record.converged) })
}

pub fn order_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model_params()?;
    let grid = grid(cfg)?;
    let opts = cfg.solver_options();
    let (axis, values) = cfg.sweep()?;
    let records: Vec<(f64, SweepRecord)> = if axis == Axis::Eta {
        // Warm-started along the pump so the organized branch is followed.
        let records = sweep_eta(&p, &grid, &opts, &values).map_err(regime)?;
        values.iter().copied().zip(records).collect()
    } else {
        values
            .par_iter()
            .map(|&v| {
                let q = axis.apply(p, v);
                let outcome = match q.validate() {
                    Ok(()) => solve_steady(&q, &grid, &opts),
                    Err(e) => Err(e),
                };
                (v, SweepRecord::from_outcome(q.eta, &outcome, &q, &grid))
            })
            .collect()
    };
    let mut table = Table::new(axis_columns(axis, &RECORD_COLUMNS));
    let has_axis = axis == Axis::Eta;
    for (v, r) in &records {
        table.push(with_axis(*v, has_axis, record_cells(r)));
    }
    let ok_rows = records.iter().filter(|(_, r)| r.converged).count();
    Ok(Outcome { table, ok_rows })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model_params()?;
    let grid = grid(cfg)?;
    let (axis, values) = cfg.sweep()?;
    require_eta_axis(axis, "spectrum")?;
    let n = cfg.spectrum.modes;
    let rows = spectrum_sweep(&p, &grid, &cfg.solver_options(), &values, n).map_err(regime)?;

    let mut columns = vec!["eta".to_string(), "theta".into(), "converged".into()];
    for k in 1..=n {
        columns.push(format!("nu_{k}"));
        columns.push(format!("gamma_{k}"));
    }
    columns.extend(["field_nu", "field_gamma", "status", "message"].map(String::from));
    let mut table = Table::new(columns);
    let mut ok_rows = 0;
    for row in &rows {
        let mut cells: Vec<Cell> = vec![row.record.eta.into(), row.record.theta.into(), row.record.converged.into()];
        for k in 0..n {
            let branch = row.condensate.get(k);
            cells.push(branch.map(|b| b.0).into());
            cells.push(branch.map(|b| b.1).into());
        }
        cells.push(row.field.map(|f| f.0).into());
        cells.push(row.field.map(|f| f.1).into());
        match &row.error {
            None => {
                ok_rows += 1;
                cells.push("ok".into());
                cells.push(Cell::Empty);
            }
            Some(e) => {
                cells.push("failed".into());
                cells.push(e.as_str().into());
            }
        }
        table.push(cells);
    }
    Ok(Outcome { table, ok_rows })
}

pub fn quartic(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model_params()?;
    let (axis, values) = match &cfg.sweep {
        Some(_) => cfg.sweep()?,
        None => (Axis::Eta, vec![p.eta]),
    };
    let mut rest: Vec<String> = Vec::new();
    for k in 1..=4 {
        rest.push(format!("root{k}_re"));
        rest.push(format!("root{k}_im"));
    }
    rest.extend(["delta_c_eff", "lambda1_approx_re", "lambda1_approx_im", "status", "message"].map(String::from));
    let rest_refs: Vec<&str> = rest.iter().map(String::as_str).collect();
    let mut table = Table::new(axis_columns(axis, &rest_refs));

    let rows: Vec<(Vec<Cell>, bool)> = values
        .par_iter()
        .map(|&v| {
            let q = axis.apply(p, v);
            let result = q.validate().and_then(|()| quartic_roots(&q));
            let mut cells = Vec::new();
            let ok = match &result {
                Ok(r) => {
                    let mut roots = r.roots;
                    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                    for z in roots {
                        cells.push(z.re.into());
                        cells.push(z.im.into());
                    }
                    cells.push(r.delta_c_eff.into());
                    let l1 = lambda1_approx(&q).ok();
                    cells.push(l1.map(|z| z.re).into());
                    cells.push(l1.map(|z| z.im).into());
                    cells.push("ok".into());
                    cells.push(Cell::Empty);
                    true
                }
                Err(e) => {
                    cells.extend((0..11).map(|_| Cell::Empty));
                    cells.push("failed".into());
                    cells.push(e.to_string().into());
                    false
                }
            };
            (with_axis(v, false, cells), ok)
        })
        .collect();
    let ok_rows = rows.iter().filter(|r| r.1).count();
    for (cells, _) in rows {
        table.push(cells);
    }
    Ok(Outcome { table, ok_rows })
}

pub fn critical(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model_params()?;
    let swept = cfg.sweep.is_some();
    let (axis, values) = if swept { cfg.sweep()? } else { (Axis::Eta, vec![p.eta]) };
    if swept && axis == Axis::Eta {
        return Err(CliError::Config("the threshold does not depend on the pump; sweep another axis".into()));
    }
    let rest = ["eta_c", "eta_star", "eta_c2_minus_eta_star2", "status", "message"];
    let mut table = Table::new(if swept { axis_columns(axis, &rest) } else { rest.map(String::from).to_vec() });
    let mut ok_rows = 0;
    for &v in &values {
        let q = axis.apply(p, v);
        let result = q.validate().and_then(|()| Ok((critical_eta(&q)?, eta_star_gap(&q)?)));
        let cells = match result {
            Ok((eta_c, gap)) => {
                ok_rows += 1;
                vec![
                    eta_c.into(),
                    (eta_c * eta_c - gap).max(0.0).sqrt().into(),
                    gap.into(),
                    "ok".into(),
                    Cell::Empty,
                ]
            }
            Err(e) => vec![Cell::Empty, Cell::Empty, Cell::Empty, "failed".into(), e.to_string().into()],
        };
        table.push(with_axis(v, !swept, cells));
    }
    Ok(Outcome { table, ok_rows })
}

pub fn phase_diagram(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model_params()?;
    let grid = grid(cfg)?;
    let opts = cfg.solver_options();
    let (axis, values) = cfg.sweep()?;
    require_eta_axis(axis, "phase-diagram")?;
    let range = cfg
        .phase_diagram
        .as_ref()
        .ok_or_else(|| CliError::Config("phase-diagram needs a [phase_diagram] section with u0_abs_min, u0_abs_max".into()))?;
    if !(range.u0_abs_min >= 0.0 && range.u0_abs_max > range.u0_abs_min) {
        return Err(CliError::Config("phase_diagram needs 0 <= u0_abs_min < u0_abs_max".into()));
    }
    let bounds = (range.u0_abs_min, range.u0_abs_max);
    let points: Vec<(f64, Result<DefectBoundaryPoint, Error>)> = values
        .par_iter()
        .map(|&eta| (eta, defect_boundary_at(&p, &grid, &opts, eta, bounds)))
        .collect();

    let mut table = Table::new(["eta", "u0_abs_boundary", "window_lo", "window_hi", "failed_probes", "status", "message"]);
    let mut ok_rows = 0;
    for (eta, point) in points {
        let cells = match point {
            Ok(b) => {
                ok_rows += 1;
                let s = match (b.window, b.u0_abs_boundary) {
                    (None, _) => "not_organized",
                    (Some(_), None) => "no_defects",
                    (Some(_), Some(_)) => "ok",
                };
                vec![
                    eta.into(),
                    b.u0_abs_boundary.into(),
                    b.window.map(|w| w.0).into(),
                    b.window.map(|w| w.1).into(),
                    b.failed_probes.into(),
                    s.into(),
                    Cell::Empty,
                ]
            }
            Err(e) => vec![eta.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, "failed".into(), e.to_string().into()],
        };
        table.push(cells);
    }
    Ok(Outcome { table, ok_rows })
}

pub fn depletion(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.model_params()?;
    let grid = grid(cfg)?;
    let (axis, values) = cfg.sweep()?;
    require_eta_axis(axis, "depletion")?;
    let rows = depletion_sweep(&p, &grid, &cfg.solver_options(), &values).map_err(regime)?;
    let mut table = Table::new(["eta", "theta", "converged", "n_prime", "lambda1", "asymptotic", "status", "message"]);
    let mut ok_rows = 0;
    for r in &rows {
        let (s, msg) = match (&r.n_prime, &r.error) {
            (Some(_), _) => {
                ok_rows += 1;
                ("ok", String::new())
            }
            (None, e) => ("failed", e.clone().unwrap_or_default()),
        };
        table.push(vec![
            r.record.eta.into(),
            r.record.theta.into(),
            r.record.converged.into(),
            r.n_prime.into(),
            r.lambda1.into(),
            r.asymptotic.into(),
            s.into(),
            msg.into(),
        ]);
    }
    Ok(Outcome { table, ok_rows })
}
