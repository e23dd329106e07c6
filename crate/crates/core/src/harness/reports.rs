use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::ScenarioConfig;
use super::experiments::{
    ConvergenceReport, GeometryReport, PdeReport, PhaseReport, SimulationReport, SpectrumRun,
};
use crate::error::{Error, Result};
use crate::pde::write_fields_csv;
use crate::spectral::{write_identity_csv, write_spectrum_csv};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Machine-readable run record. Holds no timestamps or host details so that
/// reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub config: ScenarioConfig,
    pub files: Vec<String>,
    pub summary: serde_json::Value,
}

fn write_with(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<String> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
    Ok(name.to_string())
}

fn finish(dir: &Path, command: &str, cfg: &ScenarioConfig, mut files: Vec<String>, summary: serde_json::Value) -> Result<Vec<PathBuf>> {
    let manifest = Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        master_seed: cfg.master_seed,
        config: cfg.clone(),
        files: files.clone(),
        summary,
    };
    files.push(write_with(dir, MANIFEST_FILE, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
        writeln!(w)
    })?);
    Ok(files.into_iter().map(|f| dir.join(f)).collect())
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `convergence.csv` plus manifest.
pub fn emit_convergence(report: &ConvergenceReport, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let csv = write_with(dir, "convergence.csv", |w| {
        writeln!(w, "beta,alpha,N,observable,sup_t_error,mean,std,replicas")?;
        for r in &report.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.beta, r.alpha, r.n, r.observable, r.sup_t_error, r.mean, r.std, r.replicas
            )?;
        }
        Ok(())
    })?;
    let errors: Vec<_> = cfg
        .n_list
        .iter()
        .map(|&n| json!({ "N": n, "error": report.error(n) }))
        .collect();
    let summary = json!({
        "mode": report.mode,
        "grid_side": report.grid_side,
        "self_convergence": report.self_convergence,
        "max_mass_drift": report.max_mass_drift,
        "particles_conserved": report.particles_conserved,
        "inside_conserved": report.inside_conserved,
        "errors": errors,
    });
    finish(dir, "converge", cfg, vec![csv], summary)
}

/// `phase.csv` plus manifest.
pub fn emit_phase(report: &PhaseReport, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let csv = write_with(dir, "phase.csv", |w| {
        writeln!(w, "beta,reference_mode,error")?;
        for r in &report.rows {
            writeln!(w, "{},{},{}", r.beta, r.reference_mode, r.error)?;
        }
        Ok(())
    })?;
    let closest: Vec<_> = cfg
        .beta_list
        .iter()
        .map(|&b| json!({ "beta": b, "closest": report.closest(b) }))
        .collect();
    let summary = json!({
        "N": report.n,
        "reference_gap": report.reference_gap,
        "regimes_separate": report.regimes_separate(),
        "closest": closest,
    });
    finish(dir, "phase", cfg, vec![csv], summary)
}

/// `trajectory.csv`, the final configuration of replica 0 as a raw snapshot,
/// and manifest.
pub fn emit_simulation(report: &SimulationReport, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let csv = write_with(dir, "trajectory.csv", |w| {
        writeln!(w, "replica,t,observable_name,value")?;
        for tr in &report.traces {
            for (k, t) in report.times.iter().enumerate() {
                for (name, series) in report.observables.iter().zip(&tr.pairings) {
                    writeln!(w, "{},{},{},{}", tr.replica, t, name, series[k])?;
                }
                writeln!(w, "{},{},particle_count,{}", tr.replica, t, tr.particle_counts[k])?;
                writeln!(w, "{},{},inside_count,{}", tr.replica, t, tr.inside_counts[k])?;
                if let Some(rep) = &tr.replacement {
                    writeln!(w, "{},{},replacement_membrane,{}", tr.replica, t, rep[k])?;
                }
            }
        }
        Ok(())
    })?;
    let mut files = vec![csv];
    if let Some(first) = report.traces.first() {
        let t_end = report.times.last().copied().unwrap_or(0.0);
        files.push(write_with(dir, "snapshot.bin", |w| {
            first.final_config.write_snapshot(&report.lattice, t_end, w)
        })?);
    }
    let summary = json!({
        "N": report.n,
        "replicas": report.traces.len(),
        "recorded_times": report.times.len(),
    });
    finish(dir, "simulate", cfg, files, summary)
}

/// `fields.csv`, `pairings.csv` and manifest.
pub fn emit_pde(report: &PdeReport, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let fields = write_with(dir, "fields.csv", |w| write_fields_csv(&report.lattice, &report.fields, w))?;
    let pairings = write_with(dir, "pairings.csv", |w| {
        writeln!(w, "t,observable_name,value")?;
        for (k, f) in report.fields.iter().enumerate() {
            for (name, series) in report.observables.iter().zip(&report.pairings) {
                writeln!(w, "{},{},{}", f.t, name, series[k])?;
            }
        }
        Ok(())
    })?;
    let summary = json!({
        "mode": report.mode,
        "grid_side": report.lattice.side(),
        "max_mass_drift": report.max_mass_drift,
        "max_principle_flags": report.max_principle_flags,
    });
    finish(dir, "solve-pde", cfg, vec![fields, pairings], summary)
}

/// `spectrum.csv` plus manifest with the operator checks.
pub fn emit_spectrum(run: &SpectrumRun, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let csv = write_with(dir, "spectrum.csv", |w| write_spectrum_csv(&run.spectra, w))?;
    let modes: Vec<_> = run
        .spectra
        .iter()
        .zip(&run.operators)
        .map(|(s, (mode, op))| {
            json!({
                "mode": mode,
                "zero_modes": s.zero_modes,
                "gap": s.gap,
                "max_residual": s.max_residual,
                "operator": op,
                "operator_passed": op.passed(),
            })
        })
        .collect();
    let summary = json!({ "grid_side": run.side, "modes": modes });
    finish(dir, "spectrum", cfg, vec![csv], summary)
}

/// `gamma.csv`, `boundary_sums.csv`, `identities.csv` and manifest.
pub fn emit_geometry(report: &GeometryReport, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let gamma = write_with(dir, "gamma.csv", |w| report.classification.write_csv(&report.lattice, w))?;
    let sums = write_with(dir, "boundary_sums.csv", |w| {
        writeln!(w, "N,axis,side,lattice_sum,surface_integral,error")?;
        for r in &report.boundary_sums {
            let side = match r.side {
                crate::geometry::Side::Minus => "minus",
                crate::geometry::Side::Plus => "plus",
            };
            writeln!(w, "{},{},{},{},{},{}", r.n, r.axis + 1, side, r.lattice_sum, r.surface_integral, r.error)?;
        }
        Ok(())
    })?;
    let mut files = vec![gamma, sums];
    if !report.green.is_empty() {
        files.push(write_with(dir, "identities.csv", |w| write_identity_csv(&report.green, w))?);
    }
    let summary = json!({
        "N": report.lattice.side(),
        "gamma_sites": report.classification.gamma().len(),
        "slow_bonds": report.classification.num_slow(),
        "max_green_residual_finest": report.green.iter().filter(|g| g.level == report.green.last().map_or(0, |l| l.level)).map(|g| g.residual).fold(0.0, f64::max),
    });
    finish(dir, "geometry-check", cfg, files, summary)
}
