//! Deterministic artifact emission: fixed float formatting (17 significant
//! digits, '.' decimal separator), fixed column orders, no timestamps.

use crate::eikonal::{CharacteristicBundle, EikonalFields};
use crate::error::Result;
use crate::solver::{metric_fields, RadialSnapshot, Trajectory};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// 17 significant digits, scientific, locale-independent.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Snapshot CSV: t, r, phi, dphi_dt, dphi_dr, dphi_dq, H_LL.
pub fn write_snapshot_csv(path: &Path, snap: &RadialSnapshot, traj: &Trajectory) -> Result<()> {
    let mf = metric_fields(snap, &traj.scenario.nonlinearity)?;
    let dr_row = snap.dphi_dr();
    let dq_row = snap.dphi_dq();
    let rows = (0..snap.n()).map(|j| {
        vec![
            fmt_f64(snap.t),
            fmt_f64(snap.r_at(j)),
            fmt_f64(snap.phi[j]),
            fmt_f64(snap.dphi_dt[j]),
            fmt_f64(dr_row[j]),
            fmt_f64(dq_row[j]),
            fmt_f64(mf.h_ll[j]),
        ]
    });
    write_csv(
        path,
        &["t", "r", "phi", "dphi_dt", "dphi_dr", "dphi_dq", "H_LL"],
        rows,
    )
}

/// Bundle CSV: label_rho, s, t, r, q.
pub fn write_bundle_csv(path: &Path, bundle: &CharacteristicBundle) -> Result<()> {
    let mut rows = Vec::new();
    for curve in &bundle.curves {
        for sample in &curve.samples {
            rows.push(vec![
                fmt_f64(curve.rho),
                fmt_f64(sample[0]),
                fmt_f64(sample[1]),
                fmt_f64(sample[2]),
                fmt_f64(sample[3]),
            ]);
        }
    }
    write_csv(path, &["label_rho", "s", "t", "r", "q"], rows)
}

/// Fields CSV: t, r, rho, rho_q_fd, rho_q_factor, valid.
pub fn write_fields_csv(path: &Path, fields: &EikonalFields) -> Result<()> {
    let mut rows = Vec::new();
    for (k, &t) in fields.times.iter().enumerate() {
        for j in 0..fields.rho[k].len() {
            rows.push(vec![
                fmt_f64(t),
                fmt_f64(fields.r_at(j)),
                fmt_f64(fields.rho[k][j]),
                fmt_f64(fields.rho_q_fd[k][j]),
                fmt_f64(fields.rho_q_factor[k][j]),
                if fields.valid[k][j] { "1" } else { "0" }.to_string(),
            ]);
        }
    }
    write_csv(
        path,
        &["t", "r", "rho", "rho_q_fd", "rho_q_factor", "valid"],
        rows,
    )
}

/// Flat CSV for all inequality reports: id, t, lhs, rhs, margin.
pub fn reports_flat_csv(reports: &[crate::reports::InequalityReport]) -> String {
    let mut out = String::from("inequality_id,t,lhs,rhs,margin\n");
    for rep in reports {
        for i in 0..rep.times.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                rep.id,
                fmt_f64(rep.times[i]),
                fmt_f64(rep.lhs[i]),
                fmt_f64(rep.rhs[i]),
                fmt_f64(rep.margin[i]),
            );
        }
    }
    out
}
