//! Experiment presets reproducing the reference tables at desk scale, the
//! single-run pipeline, report output and convergence-rate fits.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{assemble_a_obs, assemble_system, energy_norm, WeightMode};
use crate::config::load_config;
use crate::control::{extract_control, pnorm_distance, ControlTrace};
use crate::error::{Error, Result};
use crate::field::FieldPh;
use crate::forward::{eval_cost_j, forward_solve, norm_hminus1_final_velocity, norm_l2_final, WaveTrajectory};
use crate::linalg::{condition_estimate, factorize, observability_constant};
use crate::mesh::{DofMap, SpaceTimeMesh};
use crate::problem::{
    CoefficientField, InitialData, PotentialField, ProblemConfig, Profile, WeightParams,
};

/// The built-in experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetId {
    /// Observability-constant ladder for T = 2.2 and T = 1.5.
    Table1,
    /// (sin(pi x), 0), a = b = 1.
    Smooth,
    /// (exp(-500 (x - 0.2)^2), 0), a = b = 1.
    Gaussian,
    /// Hat initial state with a piecewise-constant velocity, b = 0.
    H1xL2,
    /// Indicator initial state, b = 0.
    Discontinuous,
    /// Gaussian data with the 1 -> 5 transition coefficient, b = 0.
    VarCoef,
}

impl std::str::FromStr for PresetId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "table1" => Ok(PresetId::Table1),
            "smooth" => Ok(PresetId::Smooth),
            "gaussian" => Ok(PresetId::Gaussian),
            "h1xl2" => Ok(PresetId::H1xL2),
            "discontinuous" => Ok(PresetId::Discontinuous),
            "varcoef" => Ok(PresetId::VarCoef),
            other => Err(Error::UnknownPreset(other.into())),
        }
    }
}

impl std::fmt::Display for PresetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PresetId::Table1 => "table1",
            PresetId::Smooth => "smooth",
            PresetId::Gaussian => "gaussian",
            PresetId::H1xL2 => "h1xl2",
            PresetId::Discontinuous => "discontinuous",
            PresetId::VarCoef => "varcoef",
        };
        write!(f, "{name}")
    }
}

/// A preset binds problem data to a refinement ladder. Ladder entries are
/// the N of dx = dt = 1/N; the time mesh is Nt = round(T N).
#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    pub id: PresetId,
    pub coefficient: CoefficientField,
    pub potential: PotentialField,
    pub data: InitialData,
    pub t_values: Vec<f64>,
    pub ladder: Vec<usize>,
    pub reference: Option<usize>,
    /// dt_f = dx / dtf_divisor in the forward verification.
    pub dtf_divisor: usize,
    pub observability_only: bool,
    pub allow_short_horizon: bool,
}

impl ExperimentPreset {
    pub fn get(id: PresetId) -> Self {
        match id {
            PresetId::Table1 => ExperimentPreset {
                id,
                coefficient: CoefficientField::constant(1.0),
                potential: PotentialField::constant(1.0),
                data: InitialData::new(Profile::Zero, Profile::Zero),
                t_values: vec![2.2, 1.5],
                ladder: vec![10, 20, 40, 80],
                reference: None,
                dtf_divisor: 4,
                observability_only: true,
                allow_short_horizon: true,
            },
            PresetId::Smooth => ExperimentPreset {
                id,
                coefficient: CoefficientField::constant(1.0),
                potential: PotentialField::constant(1.0),
                data: InitialData::new(Profile::SinePi, Profile::Zero),
                t_values: vec![2.2],
                ladder: vec![10, 20, 40, 80],
                reference: Some(160),
                dtf_divisor: 4,
                observability_only: false,
                allow_short_horizon: false,
            },
            PresetId::Gaussian => ExperimentPreset {
                id,
                coefficient: CoefficientField::constant(1.0),
                potential: PotentialField::constant(1.0),
                data: InitialData::new(
                    Profile::Gaussian {
                        coeff: 500.0,
                        center: 0.2,
                    },
                    Profile::Zero,
                ),
                t_values: vec![2.2],
                ladder: vec![10, 20, 40, 80],
                reference: Some(160),
                dtf_divisor: 4,
                observability_only: false,
                allow_short_horizon: false,
            },
            PresetId::H1xL2 => ExperimentPreset {
                id,
                coefficient: CoefficientField::constant(1.0),
                potential: PotentialField::constant(0.0),
                data: InitialData::new(
                    Profile::hat(),
                    Profile::Indicator {
                        lo: 0.2,
                        hi: 0.5,
                        scale: 10.0,
                    },
                ),
                t_values: vec![2.2],
                ladder: vec![10, 20, 40, 80],
                reference: Some(160),
                dtf_divisor: 4,
                observability_only: false,
                allow_short_horizon: false,
            },
            PresetId::Discontinuous => ExperimentPreset {
                id,
                coefficient: CoefficientField::constant(1.0),
                potential: PotentialField::constant(0.0),
                data: InitialData::new(
                    Profile::Indicator {
                        lo: 0.5,
                        hi: 0.7,
                        scale: 1.0,
                    },
                    Profile::Zero,
                ),
                t_values: vec![2.2],
                ladder: vec![10, 20, 40, 80],
                reference: Some(160),
                dtf_divisor: 4,
                observability_only: false,
                allow_short_horizon: false,
            },
            PresetId::VarCoef => ExperimentPreset {
                id,
                coefficient: CoefficientField::transition_1_to_5(),
                potential: PotentialField::constant(0.0),
                data: InitialData::new(
                    Profile::Gaussian {
                        coeff: 500.0,
                        center: 0.2,
                    },
                    Profile::Zero,
                ),
                t_values: vec![2.2],
                ladder: vec![10, 20, 40, 80],
                // the transition wave speed makes the fine solve expensive;
                // the forward step must satisfy dt_f < 0.309 dx / sqrt(a_max)
                reference: Some(160),
                dtf_divisor: 12,
                observability_only: false,
                allow_short_horizon: true,
            },
        }
    }

    /// Problem configuration for one ladder entry.
    pub fn config(&self, t_final: f64, n: usize) -> ProblemConfig {
        let nt = (t_final * n as f64).round() as usize;
        ProblemConfig {
            coefficient: self.coefficient.clone(),
            potential: self.potential.clone(),
            data: self.data.clone(),
            weights: WeightParams::paper_defaults(t_final),
            nx: n,
            nt,
            allow_short_horizon: self.allow_short_horizon,
        }
    }

    fn check_ladder(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::DegenerateLadder { needed: 1, got: 0 });
        }
        if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "mesh ladder must refine strictly".into(),
            ));
        }
        if let Some(r) = self.reference {
            if r <= *self.ladder.last().unwrap() {
                return Err(Error::InvalidParameter(
                    "reference mesh must be strictly finer than the ladder".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn substeps(&self, config: &ProblemConfig) -> usize {
        let dx = 1.0 / config.nx as f64;
        let dt = config.weights.t_final / config.nt as f64;
        (self.dtf_divisor as f64 * dt / dx).round().max(1.0) as usize
    }
}

/// Parameter overrides accepted by the runners.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Replace the whole ladder (and drop the reference) by one mesh.
    pub mesh: Option<(usize, usize)>,
    pub s: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
}

impl Overrides {
    fn apply(&self, config: &mut ProblemConfig) {
        if let Some(s) = self.s {
            config.weights.s = s;
        }
        if let Some(l) = self.lambda {
            config.weights.lambda = l;
        }
        if let Some(d) = self.delta {
            config.weights.delta = d;
        }
        if let Some((nx, nt)) = self.mesh {
            config.nx = nx;
            config.nt = nt;
        }
    }
}

/// One line of the run report.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub t_horizon: f64,
    pub nx: usize,
    pub nt: usize,
    pub c0h: Option<f64>,
    pub c0h_iterations: Option<usize>,
    pub kappa: Option<f64>,
    pub norm_p: Option<f64>,
    pub err_p: Option<f64>,
    pub norm_v: Option<f64>,
    pub err_v: Option<f64>,
    pub norm_y_final: Option<f64>,
    pub norm_yt_final: Option<f64>,
    pub cost_j: Option<f64>,
    pub wall_ms: u128,
    pub is_reference: bool,
}

/// Full artifacts of one pipeline run.
pub struct SingleRun {
    pub config: ProblemConfig,
    pub row: ReportRow,
    pub field: FieldPh,
    pub trace: Option<ControlTrace>,
    pub trajectory: Option<WaveTrajectory>,
}

/// What the pipeline should compute.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub with_c0h: bool,
    pub with_kappa: bool,
    pub with_forward: bool,
    pub substeps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            with_c0h: true,
            with_kappa: true,
            with_forward: true,
            substeps: 4,
        }
    }
}

/// assemble -> factorize -> solve -> extract -> forward-verify for one mesh.
pub fn run_single(config: &ProblemConfig, opts: &RunOptions) -> Result<SingleRun> {
    let inner = || -> Result<SingleRun> {
        config.validate()?;
        let start = Instant::now();
        let mesh = SpaceTimeMesh::new(config.nx, config.nt, config.weights.t_final)?;
        let dofs = Arc::new(DofMap::new(mesh));
        let sys = assemble_system(&dofs, config, WeightMode::Interpolated)?;
        let factor = factorize(&sys.matrix)?;

        let (c0h, c0h_iterations) = if opts.with_c0h {
            let a = assemble_a_obs(&dofs);
            let est = observability_constant(&a, &sys.matrix, &factor)?;
            (Some(est.value), Some(est.iterations))
        } else {
            (None, None)
        };
        let kappa = if opts.with_kappa {
            Some(condition_estimate(&sys.matrix, &factor)?)
        } else {
            None
        };

        let solve_pipeline = !(matches!(config.data.y0, Profile::Zero)
            && matches!(config.data.y1, Profile::Zero));
        let (field, norm_p, trace, trajectory, norm_v, norm_y, norm_yt, cost) = if solve_pipeline {
            let coeffs = factor.solve_refined(&sys.matrix, &sys.rhs)?;
            let norm_p = energy_norm(&sys.matrix, &coeffs);
            let field = FieldPh::from_coeffs(dofs.clone(), coeffs)?;
            let trace = extract_control(&field, config)?;
            let norm_v = trace.l2_norm();
            if opts.with_forward {
                let traj = forward_solve(config, &trace, opts.substeps)?;
                let ny = norm_l2_final(&traj);
                let nyt = norm_hminus1_final_velocity(&traj);
                let cost = eval_cost_j(&traj, &trace, config)?;
                (
                    field,
                    Some(norm_p),
                    Some(trace),
                    Some(traj),
                    Some(norm_v),
                    Some(ny),
                    Some(nyt),
                    Some(cost),
                )
            } else {
                (
                    field,
                    Some(norm_p),
                    Some(trace),
                    None,
                    Some(norm_v),
                    None,
                    None,
                    None,
                )
            }
        } else {
            (
                FieldPh::zero(dofs.clone()),
                None,
                None,
                None,
                None,
                None,
                None,
                None,
            )
        };

        Ok(SingleRun {
            config: config.clone(),
            row: ReportRow {
                t_horizon: config.weights.t_final,
                nx: config.nx,
                nt: config.nt,
                c0h,
                c0h_iterations,
                kappa,
                norm_p,
                err_p: None,
                norm_v,
                err_v: None,
                norm_y_final: norm_y,
                norm_yt_final: norm_yt,
                cost_j: cost,
                wall_ms: start.elapsed().as_millis(),
                is_reference: false,
            },
            field,
            trace,
            trajectory,
        })
    };
    inner().map_err(|e| e.with_mesh(config.nx, config.nt))
}

/// Whole-preset report.
pub struct RunReport {
    pub preset: String,
    pub rows: Vec<ReportRow>,
    pub p_rate: Option<f64>,
    pub v_rate: Option<f64>,
}

/// Least-squares slope of log(err) against log(h).
pub fn fit_rate(hs: &[f64], errs: &[f64]) -> Result<f64> {
    if hs.len() != errs.len() || hs.len() < 2 {
        return Err(Error::DegenerateLadder {
            needed: 2,
            got: hs.len().min(errs.len()),
        });
    }
    if errs.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidParameter(
            "nonpositive error in the rate fit".into(),
        ));
    }
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(num / den)
}

/// Observed convergence rates from the err columns of ladder rows.
pub fn convergence_rates(rows: &[ReportRow]) -> (Option<f64>, Option<f64>) {
    let fit_col = |pick: &dyn Fn(&ReportRow) -> Option<f64>| -> Option<f64> {
        let mut hs = Vec::new();
        let mut es = Vec::new();
        for r in rows.iter().filter(|r| !r.is_reference) {
            if let Some(e) = pick(r) {
                hs.push(1.0 / r.nx as f64);
                es.push(e);
            }
        }
        if hs.len() >= 3 {
            fit_rate(&hs, &es).ok()
        } else {
            None
        }
    };
    (fit_col(&|r| r.err_p), fit_col(&|r| r.err_v))
}

fn mesh_tag(nx: usize) -> String {
    format!("1_{nx}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.8e}"),
        None => String::new(),
    }
}

fn write_report_csv(report: &RunReport, dir: &Path) -> Result<()> {
    // wall time stays out of the file so identical configs produce
    // identical bytes; the CLI table prints it instead
    let mut out = String::new();
    out.push_str("T,nx,nt,c0h,kappa,norm_p,err_p,norm_v,err_v,norm_y_T,norm_yt_T,cost_J,reference\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.t_horizon,
            r.nx,
            r.nt,
            fmt_opt(r.c0h),
            fmt_opt(r.kappa),
            fmt_opt(r.norm_p),
            fmt_opt(r.err_p),
            fmt_opt(r.norm_v),
            fmt_opt(r.err_v),
            fmt_opt(r.norm_y_final),
            fmt_opt(r.norm_yt_final),
            fmt_opt(r.cost_j),
            r.is_reference as u8,
        ));
    }
    std::fs::write(dir.join("report.csv"), out)?;
    if report.p_rate.is_some() || report.v_rate.is_some() {
        let mut out = String::from("quantity,rate\n");
        if let Some(p) = report.p_rate {
            out.push_str(&format!("p,{p:.4}\n"));
        }
        if let Some(v) = report.v_rate {
            out.push_str(&format!("v,{v:.4}\n"));
        }
        std::fs::write(dir.join("rates.csv"), out)?;
    }
    Ok(())
}

fn write_surface_p(run: &SingleRun, path: &Path) -> Result<()> {
    let mesh = &run.field.dofs.mesh;
    let mut out = String::new();
    for l in 0..=mesh.nt {
        for k in 0..=mesh.nx {
            out.push_str(&format!(
                "{:.6e} {:.6e} {:.10e}\n",
                mesh.node_x(k),
                mesh.node_t(l),
                run.field.dof(k, l, 0)
            ));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_surface_y(traj: &WaveTrajectory, substeps: usize, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (n, state) in traj.states.iter().enumerate().step_by(substeps.max(1)) {
        let t = n as f64 * traj.dt_f;
        for k in 0..=traj.nx {
            out.push_str(&format!(
                "{:.6e} {:.6e} {:.10e}\n",
                k as f64 * traj.dx,
                t,
                state[2 * k]
            ));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_run_files(run: &SingleRun, dir: &Path, substeps: usize, tag: &str) -> Result<()> {
    let mut field_csv = Vec::new();
    run.field.write_csv(&mut field_csv)?;
    std::fs::write(dir.join(format!("field_{tag}.csv")), field_csv)?;
    if let Some(trace) = &run.trace {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        std::fs::write(dir.join(format!("control_{tag}.csv")), buf)?;
    }
    if let Some(traj) = &run.trajectory {
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, substeps)?;
        std::fs::write(dir.join(format!("state_{tag}.csv")), buf)?;
        write_surface_y(traj, substeps, &dir.join(format!("y_surface_{tag}.dat")))?;
    }
    write_surface_p(run, &dir.join(format!("p_surface_{tag}.dat")))?;
    Ok(())
}

/// Run a whole preset: every ladder entry (in parallel), the reference mesh
/// when one is defined, error norms against it, rates, and file output.
pub fn run_preset(
    id: PresetId,
    overrides: &Overrides,
    out_dir: Option<&Path>,
) -> Result<RunReport> {
    let mut preset = ExperimentPreset::get(id);
    if overrides.mesh.is_some() {
        preset.ladder = vec![0]; // one synthetic entry; mesh comes from the override
        preset.reference = None;
    }
    preset.check_ladder()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut rows: Vec<ReportRow> = Vec::new();
    for &t_final in &preset.t_values.clone() {
        // build configs for this horizon
        let configs: Vec<ProblemConfig> = preset
            .ladder
            .iter()
            .map(|&n| {
                let mut c = if n == 0 {
                    let (nx, nt) = overrides.mesh.unwrap();
                    let mut c = preset.config(t_final, nx);
                    c.nt = nt;
                    c
                } else {
                    preset.config(t_final, n)
                };
                overrides.apply(&mut c);
                c
            })
            .collect();
        let opts_for = |cfg: &ProblemConfig| RunOptions {
            with_c0h: true,
            with_kappa: !preset.observability_only,
            with_forward: !preset.observability_only,
            substeps: preset.substeps(cfg),
        };
        let mut runs: Vec<SingleRun> = configs
            .par_iter()
            .map(|cfg| run_single(cfg, &opts_for(cfg)))
            .collect::<Result<Vec<_>>>()?;

        // reference solve and error norms
        if let Some(ref_n) = preset.reference {
            let mut ref_cfg = preset.config(t_final, ref_n);
            overrides.apply(&mut ref_cfg);
            let ref_opts = RunOptions {
                with_c0h: false,
                with_kappa: false,
                with_forward: true,
                substeps: preset.substeps(&ref_cfg),
            };
            let mut ref_run = run_single(&ref_cfg, &ref_opts)?;
            ref_run.row.is_reference = true;
            for run in runs.iter_mut() {
                run.row.err_p = Some(pnorm_distance(&run.field, &ref_run.field, &ref_cfg)?);
                if let (Some(tc), Some(tr)) = (&run.trace, &ref_run.trace) {
                    run.row.err_v = Some(tc.l2_distance(tr));
                }
            }
            if let Some(dir) = out_dir {
                write_run_files(&ref_run, dir, ref_opts.substeps, &format!("ref_{}", mesh_tag(ref_cfg.nx)))?;
            }
            runs.push(ref_run);
        }

        if let Some(dir) = out_dir {
            for run in runs.iter().filter(|r| !r.row.is_reference) {
                if !preset.observability_only {
                    write_run_files(run, dir, preset.substeps(&run.config), &mesh_tag(run.config.nx))?;
                }
            }
        }
        rows.extend(runs.into_iter().map(|r| r.row));
    }

    let (p_rate, v_rate) = convergence_rates(&rows);
    let report = RunReport {
        preset: id.to_string(),
        rows,
        p_rate,
        v_rate,
    };
    if let Some(dir) = out_dir {
        write_report_csv(&report, dir)?;
    }
    Ok(report)
}

/// Run a configuration file through the same pipeline (single mesh).
pub fn run_config(path: &Path, out_dir: Option<&Path>) -> Result<RunReport> {
    let config = load_config(path)?;
    let substeps = crate::forward::default_substeps(&config);
    let run = run_single(
        &config,
        &RunOptions {
            with_c0h: true,
            with_kappa: true,
            with_forward: true,
            substeps,
        },
    )?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        write_run_files(&run, dir, substeps, &mesh_tag(config.nx))?;
    }
    let report = RunReport {
        preset: format!("config:{}", path.display()),
        rows: vec![run.row],
        p_rate: None,
        v_rate: None,
    };
    if let Some(dir) = out_dir {
        write_report_csv(&report, dir)?;
    }
    Ok(report)
}

/// Fit rates from a previously written report.csv.
pub fn rates_from_report(dir: &Path) -> Result<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(dir.join("report.csv"))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::ConfigParse {
            line: 1,
            message: "empty report".into(),
        })?
        .split(',')
        .collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(nx_col), Some(ref_col)) = (col("nx"), col("reference")) else {
        return Err(Error::ConfigParse {
            line: 1,
            message: "report.csv missing nx/reference columns".into(),
        });
    };
    let err_cols: Vec<(String, usize)> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("err_"))
        .map(|(i, h)| (h.trim_start_matches("err_").to_string(), i))
        .collect();
    let mut out = Vec::new();
    for (name, ci) in err_cols {
        let mut hs = Vec::new();
        let mut es = Vec::new();
        for (ln, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts[ref_col].trim() == "1" {
                continue;
            }
            if let Ok(e) = parts[ci].trim().parse::<f64>() {
                let nx: f64 = parts[nx_col].parse().map_err(|_| Error::ConfigParse {
                    line: ln + 1,
                    message: "bad nx".into(),
                })?;
                hs.push(1.0 / nx);
                es.push(e);
            }
        }
        if hs.len() >= 3 {
            out.push((name, fit_rate(&hs, &es)?));
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateLadder { needed: 3, got: 0 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_rate_is_two() {
        let hs = [1.0, 0.5, 0.25];
        let errs = [1.0, 0.25, 0.0625];
        let r = fit_rate(&hs, &errs).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_ladder_is_an_error() {
        assert!(matches!(
            fit_rate(&[1.0], &[1.0]),
            Err(Error::DegenerateLadder { .. })
        ));
    }

    #[test]
    fn preset_ladders_are_wellformed() {
        for id in [
            PresetId::Table1,
            PresetId::Smooth,
            PresetId::Gaussian,
            PresetId::H1xL2,
            PresetId::Discontinuous,
            PresetId::VarCoef,
        ] {
            let p = ExperimentPreset::get(id);
            p.check_ladder().unwrap();
            let cfg = p.config(p.t_values[0], 10);
            assert_eq!(cfg.nt, (p.t_values[0] * 10.0).round() as usize);
        }
    }

    #[test]
    fn preset_names_round_trip() {
        for name in ["table1", "smooth", "gaussian", "h1xl2", "discontinuous", "varcoef"] {
            let id: PresetId = name.parse().unwrap();
            assert_eq!(id.to_string(), name);
        }
        assert!("bogus".parse::<PresetId>().is_err());
    }

    #[test]
    fn smoke_tiny_smooth_run() {
        // a 1/4-mesh pipeline completes quickly and produces finite numbers
        let overrides = Overrides {
            mesh: Some((4, 9)),
            ..Default::default()
        };
        let report = run_preset(PresetId::Smooth, &overrides, None).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert!(row.c0h.unwrap() > 0.0);
        assert!(row.norm_p.unwrap() > 0.0);
        assert!(row.norm_v.unwrap() > 0.0);
        assert!(row.norm_y_final.unwrap().is_finite());
        assert!(row.cost_j.unwrap() > 0.0);
    }
}
