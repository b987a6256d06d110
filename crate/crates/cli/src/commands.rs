//! Subcommand implementations. Each returns its results and writes its
//! artifacts under the output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use rodhopf::sim::{run, write_tip_csv, Outcome, PerturbationShape, RunMetadata};
use rodhopf::spectrum::{assemble_operator, critical_mode, find_hopf_threshold, transverse_eigenvalues, HopfPoint};
use rodhopf::weakly_nonlinear::{analyze_hopf, predict_tip, Criticality, ForcingForm, LandauModel};
use rodhopf::{Error, Grid, Result, RodParams};
use serde::{Deserialize, Serialize};

use crate::config::{CompareTolerances, SweepSpec};
use crate::fit::{fit_scaling, ScalingFit};

/// Settings from the global command-line flags.
#[derive(Debug, Clone)]
pub struct Context {
    pub grid_n: usize,
    pub jobs: usize,
    pub out: PathBuf,
}

impl Context {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_n)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {} workers: {e}", self.jobs)))
    }

    fn ensure_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Least stable transverse eigenvalue pair at one force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub force_tilde: f64,
    pub re_w1: f64,
    pub im_w1: f64,
    pub re_w2: f64,
    pub im_w2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub grid_n: usize,
    pub force_star: f64,
    pub force_crit: f64,
    pub omega_c: f64,
    pub rows: usize,
}

pub fn spectrum(spec: &SweepSpec, ctx: &Context) -> Result<(Vec<SpectrumRow>, SpectrumSummary)> {
    let forces = spec.force_values()?;
    let template = spec.params.at(0.0)?;
    let grid = ctx.grid()?;
    let rows: Vec<SpectrumRow> = ctx.pool()?.install(|| {
        forces
            .par_iter()
            .map(|&f| {
                let ev = transverse_eigenvalues(&template.with_force(f), &grid)?;
                if ev.len() < 2 {
                    return Err(Error::EigenSolver {
                        size: ev.len(),
                        condition_estimate: f64::NAN,
                    });
                }
                Ok(SpectrumRow {
                    force_tilde: f,
                    re_w1: ev[0].re,
                    im_w1: ev[0].im,
                    re_w2: ev[1].re,
                    im_w2: ev[1].im,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let hopf = find_hopf_threshold(&template, &grid)?;
    let summary = SpectrumSummary {
        grid_n: ctx.grid_n,
        force_star: hopf.force_star,
        force_crit: hopf.force_crit,
        omega_c: hopf.omega_c,
        rows: rows.len(),
    };
    ctx.ensure_out()?;
    write_csv(&rows, &ctx.out.join("spectrum.csv"))?;
    write_json(&summary, &ctx.out.join("spectrum_summary.json"))?;
    Ok((rows, summary))
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

/// Landau coefficients and the limit-cycle predictions derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandauRecord {
    pub k1_tilde: f64,
    pub k2_tilde: f64,
    pub gamma1_tilde: f64,
    pub gamma3_tilde: f64,
    pub grid_n: usize,
    pub force_star: f64,
    pub force_crit: f64,
    pub omega_c: f64,
    pub alpha: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
    pub normalization: Option<[f64; 2]>,
    pub criticality: Option<Criticality>,
    pub rho_abs: Option<f64>,
    pub sigma: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub notice: Option<String>,
}

impl LandauRecord {
    fn base(params: &RodParams, hopf: &HopfPoint, grid_n: usize) -> Self {
        Self {
            k1_tilde: params.k1_tilde,
            k2_tilde: params.k2_tilde,
            gamma1_tilde: params.gamma1_tilde,
            gamma3_tilde: params.gamma3_tilde,
            grid_n,
            force_star: hopf.force_star,
            force_crit: hopf.force_crit,
            omega_c: hopf.omega_c,
            alpha: None,
            beta: None,
            normalization: None,
            criticality: None,
            rho_abs: None,
            sigma: None,
            c: None,
            notice: None,
        }
    }

    /// Landau model view of the record, when coefficients are present.
    pub fn model(&self) -> Option<LandauModel> {
        let (a, b, n) = (self.alpha?, self.beta?, self.normalization?);
        Some(LandauModel::from_coefficients(
            Complex64::new(a[0], a[1]),
            Complex64::new(b[0], b[1]),
            Complex64::new(n[0], n[1]),
            self.omega_c,
            self.force_crit,
            ForcingForm::Anisotropic,
        ))
    }
}

pub fn landau(spec: &SweepSpec, ctx: &Context) -> Result<LandauRecord> {
    let template = spec.params.at(0.0)?;
    let grid = ctx.grid()?;
    let record = match analyze_hopf(&template, &grid, ForcingForm::Anisotropic) {
        Ok(a) => {
            let l = &a.landau;
            let mut r = LandauRecord::base(&a.params, &a.hopf, ctx.grid_n);
            r.alpha = Some(pair(l.alpha));
            r.beta = Some(pair(l.beta));
            r.normalization = Some(pair(l.normalization));
            r.criticality = Some(l.criticality);
            r.rho_abs = l.rho_abs;
            r.sigma = l.sigma;
            r.c = l.amplitude_constant();
            r.notice = match l.criticality {
                Criticality::Supercritical => None,
                Criticality::Subcritical => Some("subcritical bifurcation: no small stable limit cycle".into()),
                Criticality::Degenerate => Some("degenerate bifurcation: Re alpha or Re beta vanishes or has the wrong sign".into()),
            };
            r
        }
        Err(Error::DegenerateNormalization { magnitude }) => {
            let hopf = find_hopf_threshold(&template, &grid)?;
            let mut r = LandauRecord::base(&template.with_force(hopf.force_crit), &hopf, ctx.grid_n);
            r.notice = Some(format!(
                "degenerate normalization (relative overlap {magnitude:.3e}); coefficients undefined"
            ));
            r
        }
        Err(e) => return Err(e),
    };
    ctx.ensure_out()?;
    write_json(&record, &ctx.out.join("landau.json"))?;
    Ok(record)
}

/// One nonlinear run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub force_tilde: f64,
    pub delta_force: f64,
    pub outcome: Outcome,
    pub saturated: bool,
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    pub saturation_time: Option<f64>,
    pub force_crit: f64,
    pub k1_tilde: f64,
    pub k2_tilde: f64,
    pub gamma1_tilde: f64,
    pub gamma3_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFitReport {
    pub force_crit: f64,
    pub omega_c: f64,
    pub fit: Option<ScalingFit>,
    /// Forces whose runs did not saturate.
    pub excluded: Vec<f64>,
    pub notice: Option<String>,
}

fn run_dir_name(force: f64) -> String {
    format!("F_{force:.6}")
}

pub fn sweep(spec: &SweepSpec, ctx: &Context) -> Result<(Vec<SweepRow>, SweepFitReport)> {
    let forces = spec.force_values()?;
    let template = spec.params.at(0.0)?;
    let grid = ctx.grid()?;
    let hopf = find_hopf_threshold(&template, &grid)?;
    let mode = critical_mode(&assemble_operator(&template.with_force(hopf.force_crit), &grid), hopf.omega_c)?;
    let shape = PerturbationShape::Profile {
        y: mode.y.iter().map(|v| v.re).collect(),
        theta: mode.theta.iter().map(|v| v.re).collect(),
    };
    let configs: Vec<_> = forces
        .iter()
        .map(|&f| {
            spec.sim
                .config(template.with_force(f), ctx.grid_n, shape.clone(), Some(hopf.omega_c))
        })
        .collect();
    for c in &configs {
        c.validate()?;
        c.validate_horizon(hopf.omega_c)?;
    }
    ctx.ensure_out()?;
    let runs_dir = ctx.out.join("runs");
    let rows: Vec<SweepRow> = ctx.pool()?.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let record = run(c)?;
                let f = c.params.force_tilde;
                let dir = runs_dir.join(run_dir_name(f));
                fs::create_dir_all(&dir)?;
                write_tip_csv(&record, &dir.join("tip.csv"))?;
                RunMetadata::new(c, &record).write(&dir.join("meta.json"))?;
                Ok(SweepRow {
                    force_tilde: f,
                    delta_force: f - hopf.force_crit,
                    outcome: record.outcome,
                    saturated: record.saturated,
                    amplitude: record.amplitude,
                    frequency: record.frequency,
                    saturation_time: record.saturation_time,
                    force_crit: hopf.force_crit,
                    k1_tilde: template.k1_tilde,
                    k2_tilde: template.k2_tilde,
                    gamma1_tilde: template.gamma1_tilde,
                    gamma3_tilde: template.gamma3_tilde,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let report = fit_rows(&rows, hopf.force_crit, hopf.omega_c, spec.fit_window);
    write_csv(&rows, &ctx.out.join("sweep.csv"))?;
    write_json(&report, &ctx.out.join("sweep_fit.json"))?;
    Ok((rows, report))
}

/// Scaling fit over the saturated rows.
pub fn fit_rows(rows: &[SweepRow], force_crit: f64, omega_c: f64, window: f64) -> SweepFitReport {
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| if r.saturated { r.amplitude.map(|a| (r.force_tilde, a)) } else { None })
        .collect();
    let excluded = rows.iter().filter(|r| !r.saturated).map(|r| r.force_tilde).collect();
    let fit = fit_scaling(force_crit, &samples, window);
    let notice = fit.is_none().then(|| "no supercritical points in the fit window".to_string());
    SweepFitReport {
        force_crit,
        omega_c,
        fit,
        excluded,
        notice,
    }
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize::<SweepRow>()
        .map(|row| {
            row.map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
        })
        .collect()
}

pub fn read_landau_json(path: &Path) -> Result<LandauRecord> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub force_tilde: f64,
    pub delta_force: f64,
    pub sim_amplitude: Option<f64>,
    pub pred_amplitude: f64,
    pub amplitude_rel_error: Option<f64>,
    pub sim_frequency: Option<f64>,
    pub pred_frequency: f64,
    pub frequency_rel_error: Option<f64>,
    pub graded: bool,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub force_crit: f64,
    pub tolerances: CompareTolerances,
    pub graded: usize,
    pub passed: usize,
    pub pass: bool,
}

fn fingerprint_diff(landau: &LandauRecord, row: &SweepRow, tol: &CompareTolerances) -> Vec<String> {
    let mut diff = Vec::new();
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    for (name, a, b) in [
        ("k1_tilde", landau.k1_tilde, row.k1_tilde),
        ("k2_tilde", landau.k2_tilde, row.k2_tilde),
        ("gamma1_tilde", landau.gamma1_tilde, row.gamma1_tilde),
        ("gamma3_tilde", landau.gamma3_tilde, row.gamma3_tilde),
    ] {
        if !same(a, b) {
            diff.push(format!("{name}: landau {a} vs sweep {b}"));
        }
    }
    if (landau.force_crit - row.force_crit).abs() > tol.force_crit_match {
        diff.push(format!(
            "force_crit: landau {} vs sweep {} (tolerance {})",
            landau.force_crit, row.force_crit, tol.force_crit_match
        ));
    }
    diff
}

pub fn compare(landau: &LandauRecord, rows: &[SweepRow], tol: &CompareTolerances) -> Result<(Vec<CompareRow>, CompareSummary)> {
    for r in rows {
        let diff = fingerprint_diff(landau, r, tol);
        if !diff.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "parameter fingerprints differ at F = {}:\n  {}",
                r.force_tilde,
                diff.join("\n  ")
            )));
        }
    }
    let model = landau.model().ok_or_else(|| {
        Error::NotApplicable(landau.notice.clone().unwrap_or_else(|| "no Landau coefficients".into()))
    })?;
    let rel = |sim: f64, pred: f64| (sim - pred).abs() / pred.abs();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let delta = r.force_tilde - landau.force_crit;
        let (pa, pw) = predict_tip(&model, r.force_tilde)?;
        let (ea, ew) = match (r.saturated, r.amplitude, r.frequency) {
            (true, Some(a), Some(w)) if pa > 0.0 => (Some(rel(a, pa)), Some(rel(w, pw))),
            _ => (None, None),
        };
        let (graded, pass, note) = match (ea, ew) {
            (Some(a), Some(w)) if delta <= tol.asymptotic_range => {
                let ok = a <= tol.amplitude_rel && w <= tol.frequency_rel;
                (true, ok, if ok { "ok".into() } else { "outside tolerance".into() })
            }
            (Some(_), _) => (false, false, "beyond asymptotic range".to_string()),
            _ => (false, false, "not saturated".to_string()),
        };
        out.push(CompareRow {
            force_tilde: r.force_tilde,
            delta_force: delta,
            sim_amplitude: r.amplitude,
            pred_amplitude: pa,
            amplitude_rel_error: ea,
            sim_frequency: r.frequency,
            pred_frequency: pw,
            frequency_rel_error: ew,
            graded,
            pass,
            note,
        });
    }
    let graded = out.iter().filter(|r| r.graded).count();
    let passed = out.iter().filter(|r| r.pass).count();
    let summary = CompareSummary {
        force_crit: landau.force_crit,
        tolerances: *tol,
        graded,
        passed,
        pass: graded > 0 && passed == graded,
    };
    Ok((out, summary))
}

pub fn compare_files(landau_path: &Path, sweep_path: &Path, tol: &CompareTolerances, ctx: &Context) -> Result<(Vec<CompareRow>, CompareSummary)> {
    let landau = read_landau_json(landau_path)?;
    let rows = read_sweep_csv(sweep_path)?;
    let (table, summary) = compare(&landau, &rows, tol)?;
    ctx.ensure_out()?;
    write_csv(&table, &ctx.out.join("compare.csv"))?;
    write_json(&summary, &ctx.out.join("compare_summary.json"))?;
    Ok((table, summary))
}
