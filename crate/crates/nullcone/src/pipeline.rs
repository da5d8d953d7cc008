//! Orchestration of solver → eikonal → diagnostics runs, ε-sweeps, and
//! aggregation of existing run directories.

use crate::asymptotic::{classify, parse_nonlinearity, Classification, ClassifyParams};
use crate::config::{parse_fit_quantity, RunConfig};
use crate::diagnostics::{
    decay_fit, energy, energy_inequality_check, growth_exponent, hormander_check,
    hormander_corollary_check, klainerman_sobolev_check, poincare_check,
};
use crate::eikonal::{
    rho_fields, seed_labels, trace_characteristics, verify_eikonal_bounds, EikonalBoundsReport,
};
use crate::error::{Error, Result};
use crate::output::{
    fmt_f64, reports_flat_csv, write_bundle_csv, write_csv, write_fields_csv, write_snapshot_csv,
};
use crate::reports::{DecayFitReport, InequalityReport};
use crate::solver::{run, Termination};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Machine-readable run summary written next to the artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub epsilon: f64,
    pub termination: serde_json::Value,
    pub blowup: Option<(f64, f64)>,
    pub energy_growth_exponent: Option<f64>,
    pub energy_growth_residual: Option<f64>,
    pub decay_fits: Vec<serde_json::Value>,
    pub inequality_margins: Vec<(String, f64, f64)>,
    pub eikonal: Option<serde_json::Value>,
}

/// Trajectory manifest: scenario echo, termination, snapshot file list.
#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'a crate::solver::Scenario,
    termination: &'a Termination,
    snapshots: Vec<String>,
}

fn info(quiet: bool, msg: &str) {
    if !quiet {
        println!("{msg}");
    }
}

/// Execute the full pipeline for one config, writing artifacts under
/// `out_dir`. Returns the summary for exit-code decisions and sweep rows.
pub fn execute_run(config: &RunConfig, out_dir: &Path, quiet: bool) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let scenario = &config.scenario;
    info(quiet, &format!("solving to t_end = {}", scenario.t_end));
    let traj = run(scenario)?;

    let mut snapshot_files = Vec::new();
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let name = format!("snap_{i:05}.csv");
        write_snapshot_csv(&out_dir.join(&name), snap, &traj)?;
        snapshot_files.push(name);
    }
    let manifest = Manifest {
        scenario,
        termination: &traj.termination,
        snapshots: snapshot_files,
    };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    info(quiet, &format!("termination: {:?}", traj.termination));

    // Eikonal stage (also required by any weighted diagnostics).
    let needs_eikonal = config.eikonal.is_some() || config.diagnostics.is_some();
    let mut fields = None;
    let mut bounds: Option<EikonalBoundsReport> = None;
    if needs_eikonal && traj.snapshots.len() >= 2 {
        let eik = config.eikonal.clone().unwrap_or_default();
        info(quiet, "tracing characteristics");
        let seeds = seed_labels(scenario.t_end, scenario.dr);
        let bundle = trace_characteristics(&traj, &seeds)?;
        write_bundle_csv(&out_dir.join("bundle.csv"), &bundle)?;
        let f = rho_fields(&bundle, &traj)?;
        write_fields_csv(&out_dir.join("fields.csv"), &f)?;
        if config.eikonal.is_some() {
            let rep = verify_eikonal_bounds(&f, &traj, scenario.epsilon.max(1e-300), eik.nu)?;
            std::fs::write(
                out_dir.join("eikonal_report.json"),
                serde_json::to_string_pretty(&rep).expect("report serializes"),
            )?;
            bounds = Some(rep);
        }
        fields = Some(f);
    }

    // Diagnostics stage.
    let mut inequality_reports: Vec<InequalityReport> = Vec::new();
    let mut fits: Vec<DecayFitReport> = Vec::new();
    let mut gamma = None;
    let mut gamma_residual = None;
    if let Some(diag) = &config.diagnostics {
        info(quiet, "running diagnostics");
        let eps = scenario.epsilon.max(1e-300);
        if let Some(f) = &fields {
            for id in &diag.inequalities {
                let rep = match id.as_str() {
                    "energy_weighted" => {
                        energy_inequality_check(&traj, f, diag.kappa, eps, diag.nu_prime)?
                    }
                    "poincare_32" => {
                        let c2 = bounds.as_ref().map(|b| b.c2_fitted).unwrap_or(0.0);
                        poincare_check(&traj, f, diag.kappa, eps, diag.nu_prime, c2)?
                    }
                    "klainerman_sobolev" => klainerman_sobolev_check(&traj)?,
                    "hormander" => hormander_check(&traj)?,
                    "hormander_cor" => hormander_corollary_check(&traj)?,
                    other => return Err(Error::Config(format!("unknown inequality {other}"))),
                };
                inequality_reports.push(rep);
            }
        }

        let window = diag
            .fit_window
            .unwrap_or((scenario.t_end / 10.0, scenario.t_end));
        for q in &diag.fit_quantities {
            let (quantity, near_cone) = parse_fit_quantity(q)?;
            match decay_fit(&traj, fields.as_ref(), quantity, window, near_cone) {
                Ok(fit) => fits.push(fit),
                Err(Error::TooFewSamples { .. }) => {
                    info(quiet, &format!("skipping fit {q}: too few samples"));
                }
                Err(e) => return Err(e),
            }
        }

        // Unweighted E_N growth series over the fit window.
        let mut series = Vec::new();
        for snap in &traj.snapshots {
            if snap.t >= window.0 && snap.t <= window.1 {
                series.push((snap.t, energy(scenario, snap, None, 0, diag.energy_order)?));
            }
        }
        match growth_exponent(&series) {
            Ok((g, res)) => {
                gamma = Some(g);
                gamma_residual = Some(res);
            }
            Err(Error::TooFewSamples { .. }) | Err(Error::InvariantViolation(_)) => {}
            Err(e) => return Err(e),
        }

        std::fs::write(
            out_dir.join("reports.json"),
            serde_json::to_string_pretty(&inequality_reports).expect("reports serialize"),
        )?;
        std::fs::write(
            out_dir.join("reports.csv"),
            reports_flat_csv(&inequality_reports),
        )?;
    }

    let summary = RunSummary {
        epsilon: scenario.epsilon,
        termination: serde_json::to_value(&traj.termination).expect("termination serializes"),
        blowup: crate::solver::detect_blowup(&traj).map(|(t, r, _)| (t, r)),
        energy_growth_exponent: gamma,
        energy_growth_residual: gamma_residual,
        decay_fits: fits
            .iter()
            .map(|f| serde_json::to_value(f).expect("fit serializes"))
            .collect(),
        inequality_margins: inequality_reports
            .iter()
            .map(|r| (r.id.clone(), r.min_margin(), r.min_constant))
            .collect(),
        eikonal: bounds
            .as_ref()
            .map(|b| serde_json::to_value(b).expect("bounds serialize")),
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(summary)
}

/// Exit code for a completed run per the CLI contract.
pub fn exit_code_for(traj_termination: &serde_json::Value) -> i32 {
    match traj_termination.get("kind").and_then(|k| k.as_str()) {
        Some("completed") => 0,
        Some("blow_up") => 2,
        _ => 1,
    }
}

const SWEEP_HEADER: [&str; 7] = [
    "epsilon",
    "termination",
    "blew_up",
    "t_star",
    "gamma",
    "gamma_residual",
    "sup_dphi_exponent",
];

fn sweep_row(summary: &RunSummary) -> Vec<String> {
    let term = summary
        .termination
        .get("kind")
        .and_then(|k| k.as_str())
        .unwrap_or("unknown")
        .to_string();
    let sup_dphi = summary
        .decay_fits
        .iter()
        .find(|f| {
            f.get("quantity")
                .and_then(|q| q.as_str())
                .map(|q| q.starts_with("sup|dphi|"))
                .unwrap_or(false)
        })
        .and_then(|f| f.get("exponent").and_then(|e| e.as_f64()));
    vec![
        fmt_f64(summary.epsilon),
        term,
        if summary.blowup.is_some() { "1" } else { "0" }.to_string(),
        summary.blowup.map(|(t, _)| fmt_f64(t)).unwrap_or_default(),
        summary
            .energy_growth_exponent
            .map(fmt_f64)
            .unwrap_or_default(),
        summary
            .energy_growth_residual
            .map(fmt_f64)
            .unwrap_or_default(),
        sup_dphi.map(fmt_f64).unwrap_or_default(),
    ]
}

/// Run every ε of a sweep (parallel up to the configured degree), write one
/// aggregate CSV. Returns summaries in ε order and whether any child errored.
pub fn execute_sweep(
    config: &RunConfig,
    out_dir: &Path,
    parallel_override: Option<usize>,
    quiet: bool,
) -> Result<(Vec<RunSummary>, bool)> {
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
    std::fs::create_dir_all(out_dir)?;
    let parallel = parallel_override.unwrap_or(sweep.parallel).max(1);

    let jobs: Vec<(usize, f64)> = sweep.epsilons.iter().copied().enumerate().collect();
    let queue: Mutex<VecDeque<(usize, f64)>> = Mutex::new(jobs.iter().copied().collect());
    let results: Mutex<Vec<Option<Result<RunSummary>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..parallel.min(jobs.len()) {
            scope.spawn(|| loop {
                let job = queue.lock().expect("queue lock").pop_front();
                let Some((idx, eps)) = job else { break };
                let mut child = config.clone();
                child.scenario.epsilon = eps;
                child.sweep = None;
                let dir = out_dir.join(format!("eps_{idx:02}"));
                let res = execute_run(&child, &dir, quiet);
                results.lock().expect("results lock")[idx] = Some(res);
            });
        }
    });

    let collected = results.into_inner().expect("results");
    let mut summaries = Vec::new();
    let mut any_error = false;
    let mut rows = Vec::new();
    for res in collected.into_iter().flatten() {
        match res {
            Ok(s) => {
                if exit_code_for(&s.termination) == 1 {
                    any_error = true;
                }
                rows.push(sweep_row(&s));
                summaries.push(s);
            }
            Err(e) => {
                eprintln!("sweep child failed: {e}");
                any_error = true;
            }
        }
    }
    write_csv(&out_dir.join("sweep.csv"), &SWEEP_HEADER, rows)?;
    Ok((summaries, any_error))
}

/// Aggregate all `*/summary.json` under a directory into one CSV.
pub fn aggregate_report(dir: &Path) -> Result<String> {
    let mut paths: Vec<PathBuf> = Vec::new();
    collect_summaries(dir, &mut paths)?;
    paths.sort();
    let mut out = String::new();
    out.push_str(&format!("run,{}\n", SWEEP_HEADER.join(",")));
    for p in paths {
        let text = std::fs::read_to_string(&p)?;
        let summary: RunSummary = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad summary {}: {e}", p.display())))?;
        let rel = p
            .parent()
            .and_then(|d| d.strip_prefix(dir).ok())
            .map(|d| d.display().to_string())
            .unwrap_or_else(|| p.display().to_string());
        out.push_str(&format!("{rel},{}\n", sweep_row(&summary).join(",")));
    }
    Ok(out)
}

fn collect_summaries(dir: &Path, acc: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_summaries(&path, acc)?;
        } else if path
            .file_name()
            .map(|n| n == "summary.json")
            .unwrap_or(false)
        {
            acc.push(path);
        }
    }
    Ok(())
}

/// Classify a nonlinearity file and return the JSON verdict.
pub fn classify_from_text(
    text: &str,
    params: &ClassifyParams,
    growth_threshold: Option<f64>,
) -> Result<serde_json::Value> {
    let nl = parse_nonlinearity(text)?;
    let classification = classify(&nl, params)?;
    let mut value = serde_json::to_value(&classification).expect("classification serializes");
    if let (Some(threshold), Classification::WeakNullEvidence { growth_exponent }) =
        (growth_threshold, &classification)
    {
        if let Some(obj) = value.as_object_mut() {
            obj.insert(
                "within_growth_threshold".into(),
                serde_json::Value::Bool(*growth_exponent <= threshold),
            );
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DiagnosticsConfig, EikonalConfig};

    fn tiny_config() -> RunConfig {
        RunConfig {
            scenario: crate::solver::Scenario::linear(0.05, 0.1, 4.0),
            eikonal: Some(EikonalConfig::default()),
            diagnostics: Some(DiagnosticsConfig {
                inequalities: vec!["poincare_32".into(), "klainerman_sobolev".into()],
                fit_quantities: vec!["sup_dphi_near_cone".into()],
                fit_window: Some((0.5, 4.0)),
                ..Default::default()
            }),
            sweep: None,
            out_dir: None,
        }
    }

    #[test]
    fn run_emits_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let summary = execute_run(&tiny_config(), dir.path(), true).unwrap();
        assert_eq!(exit_code_for(&summary.termination), 0);
        for name in [
            "manifest.json",
            "bundle.csv",
            "fields.csv",
            "eikonal_report.json",
            "reports.json",
            "reports.csv",
            "summary.json",
            "snap_00000.csv",
        ] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert!(manifest["snapshots"].as_array().unwrap().len() >= 4);
    }

    #[test]
    fn run_is_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        execute_run(&tiny_config(), d1.path(), true).unwrap();
        execute_run(&tiny_config(), d2.path(), true).unwrap();
        let mut names: Vec<String> = std::fs::read_dir(d1.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let a = std::fs::read(d1.path().join(&name)).unwrap();
            let b = std::fs::read(d2.path().join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }

    #[test]
    fn sweep_single_epsilon_matches_run() {
        let mut config = tiny_config();
        config.sweep = Some(crate::config::SweepConfig {
            epsilons: vec![0.05],
            parallel: 1,
        });
        let sweep_dir = tempfile::tempdir().unwrap();
        let (summaries, any_error) = execute_sweep(&config, sweep_dir.path(), None, true).unwrap();
        assert!(!any_error);
        assert_eq!(summaries.len(), 1);

        let run_dir = tempfile::tempdir().unwrap();
        let mut solo = tiny_config();
        solo.scenario.epsilon = 0.05;
        let solo_summary = execute_run(&solo, run_dir.path(), true).unwrap();
        assert_eq!(sweep_row(&summaries[0]), sweep_row(&solo_summary));
        assert!(sweep_dir.path().join("sweep.csv").exists());
    }

    #[test]
    fn blowup_run_pipeline_survives_diagnostics() {
        // A blow-up trajectory still flows through eikonal + diagnostics
        // without panicking; the summary records the blow-up point.
        let config = RunConfig {
            scenario: crate::solver::Scenario::semilinear(0.9, 0.05, 10.0),
            eikonal: Some(EikonalConfig::default()),
            diagnostics: Some(DiagnosticsConfig {
                inequalities: vec!["poincare_32".into()],
                fit_quantities: vec!["sup_dphi".into()],
                energy_order: 0,
                ..Default::default()
            }),
            sweep: None,
            out_dir: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let summary = execute_run(&config, dir.path(), true).unwrap();
        assert_eq!(exit_code_for(&summary.termination), 2);
        assert!(summary.blowup.is_some());
    }

    #[test]
    fn report_aggregates_runs() {
        let dir = tempfile::tempdir().unwrap();
        execute_run(&tiny_config(), &dir.path().join("a"), true).unwrap();
        execute_run(&tiny_config(), &dir.path().join("b"), true).unwrap();
        let csv = aggregate_report(dir.path()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a,"));
        assert!(lines[2].starts_with("b,"));
    }

    #[test]
    fn classify_text_outputs() {
        let v = classify_from_text("t,t,1.0\n", &ClassifyParams::default(), None).unwrap();
        assert_eq!(v["kind"], "BlowUp");
        let v =
            classify_from_text(",xx+yy+zz,-2.0\n", &ClassifyParams::default(), Some(0.5)).unwrap();
        assert_eq!(v["kind"], "WeakNullEvidence");
        assert!(v["within_growth_threshold"].is_boolean());
        assert!(classify_from_text("t,,oops\n", &ClassifyParams::default(), None).is_err());
    }
}
