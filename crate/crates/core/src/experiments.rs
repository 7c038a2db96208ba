//! The two canned experiments (a multiplicative flux with one coefficient
//! jump and a two-flux rational model), fine-grid references, L1 errors and
//! refinement studies.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{Diagnostics, DiagnosticsConfig, DiagnosticsReport};
use crate::error::{DfluxError, Result};
use crate::flux::{Coefficient, FluxModel, ModelSelector};
use crate::grid::{InitialData, Mesh, Parity, StaggeredState};
use crate::limiter::LimiterConfig;
use crate::scheme::{march, CflLevel, MarchInfo, Observer, Scheme, SchemeConfig};

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: ModelSelector,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    /// `dt / dx`.
    pub lambda: f64,
    pub initial: InitialData,
    pub times: Vec<f64>,
    /// Spacing of the LF reference; must divide `dx`.
    pub reference_dx: f64,
    /// Limiter used by NT runs.
    pub limiter: LimiterConfig,
    pub cfl_level: CflLevel,
    /// Half-width of the cubic accumulator window; `None` covers the mesh.
    pub window_x: Option<f64>,
}

/// Multiplicative flux `k u (1 - u)`, `k = 3` left of 0 and 1 right of it,
/// constant data 0.15 on `[-1, 1]`, `dx = 0.04`, `dt = 1/750`.
pub fn example_1() -> ExperimentSpec {
    ExperimentSpec {
        name: "example-1".to_string(),
        model: ModelSelector::Multiplicative {
            k_left: 3.0,
            k_right: 1.0,
        },
        x_min: -1.0,
        x_max: 1.0,
        dx: 2.0 / 50.0,
        lambda: (1.0 / 750.0) / (2.0 / 50.0),
        initial: InitialData::Constant(0.15),
        times: vec![0.8, 1.6],
        reference_dx: 2.0 / 1000.0,
        limiter: LimiterConfig::minmod(),
        cfl_level: CflLevel::MaxPrinciple,
        window_x: None,
    }
}

/// Two-flux rational model, Riemann data 0.9 | 0.2 at 0 on `[-4, 4]`,
/// `dx = 0.16`, `dt = 0.008`.
pub fn example_2() -> ExperimentSpec {
    ExperimentSpec {
        name: "example-2".to_string(),
        model: ModelSelector::TwoFluxRational,
        x_min: -4.0,
        x_max: 4.0,
        dx: 8.0 / 50.0,
        lambda: 0.008 / (8.0 / 50.0),
        initial: InitialData::step(0.0, 0.9, 0.2),
        times: vec![1.0, 2.0],
        reference_dx: 8.0 / 2000.0,
        limiter: LimiterConfig::minmod(),
        cfl_level: CflLevel::MaxPrinciple,
        window_x: None,
    }
}

pub fn example(id: u32) -> Result<ExperimentSpec> {
    match id {
        1 => Ok(example_1()),
        2 => Ok(example_2()),
        _ => Err(DfluxError::InvalidParameter(format!("unknown example {id}; expected 1 or 2"))),
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(DfluxError::InvalidParameter("output times must be >= 0".to_string()));
        }
        nesting_ratio(self.dx, self.reference_dx)?;
        Ok(())
    }

    pub fn build_model(&self) -> Result<(FluxModel, Coefficient)> {
        self.model.build()
    }

    pub fn mesh(&self, dx: f64) -> Result<Mesh> {
        Mesh::with_spacing(self.x_min, self.x_max, dx)
    }

    pub fn scheme_config(&self, scheme: Scheme) -> SchemeConfig {
        let cfg = match scheme {
            Scheme::LaxFriedrichs => SchemeConfig::lax_friedrichs(self.lambda),
            Scheme::NessyahuTadmor => SchemeConfig::nessyahu_tadmor(self.lambda, self.limiter),
        };
        cfg.with_cfl_level(self.cfl_level)
    }

    pub fn dt(&self) -> f64 {
        self.lambda * self.dx
    }
}

/// Integer `coarse / fine`, or an error when the grids do not nest.
fn nesting_ratio(coarse_dx: f64, fine_dx: f64) -> Result<usize> {
    if !(coarse_dx > 0.0 && fine_dx > 0.0) {
        return Err(DfluxError::InvalidParameter("spacings must be positive".to_string()));
    }
    let r = coarse_dx / fine_dx;
    let n = r.round();
    if n < 1.0 || (r - n).abs() > 1e-9 * n {
        return Err(DfluxError::NonNestedGrids(format!(
            "dx = {coarse_dx} is not a multiple of reference dx = {fine_dx}"
        )));
    }
    Ok(n as usize)
}

/// `dx_ref * sum |u_ref - u_coarse|` over reference cells, with the coarse
/// solution taken piecewise constant.
pub fn l1_error(coarse: &StaggeredState, reference: &StaggeredState) -> Result<f64> {
    if coarse.parity != Parity::Base || reference.parity != Parity::Base {
        return Err(DfluxError::ParityMismatch("L1 error needs base-parity states".to_string()));
    }
    let r = nesting_ratio(coarse.mesh.dx, reference.mesh.dx)?;
    let span = |m: &Mesh| m.x_max - m.x_min;
    if (coarse.mesh.x_min - reference.mesh.x_min).abs() > 1e-9 * span(&coarse.mesh)
        || coarse.mesh.n_cells * r != reference.mesh.n_cells
    {
        return Err(DfluxError::NonNestedGrids(format!(
            "domains differ: [{}, {}] vs [{}, {}]",
            coarse.mesh.x_min, coarse.mesh.x_max, reference.mesh.x_min, reference.mesh.x_max
        )));
    }
    if coarse.step_index > 0 {
        let dt = coarse.time / coarse.step_index as f64;
        if (coarse.time - reference.time).abs() > dt * (1.0 + 1e-9) {
            return Err(DfluxError::InvalidParameter(format!(
                "times {} and {} differ by more than one coarse step",
                coarse.time, reference.time
            )));
        }
    }
    let sum: f64 = reference
        .values
        .iter()
        .enumerate()
        .map(|(i, u)| (u - coarse.values[i / r]).abs())
        .sum();
    Ok(reference.mesh.dx * sum)
}

/// Solution at one output time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub requested_time: f64,
    pub state: StaggeredState,
    pub info: MarchInfo,
    /// Cubic accumulator up to this snapshot, when diagnostics are on.
    pub cubic_accumulator: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scheme: Scheme,
    pub dx: f64,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Option<DiagnosticsReport>,
}

/// Which diagnostics a run collects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticsMode {
    Off,
    /// Only extrema and the cubic accumulator.
    Light,
    Full,
}

/// Marches `spec`'s initial data with `scheme` on spacing `dx` through every
/// output time (sorted), resuming from the previous snapshot.
pub fn run_at(spec: &ExperimentSpec, scheme: Scheme, dx: f64, mode: DiagnosticsMode) -> Result<RunOutput> {
    let (model, coeff) = spec.build_model()?;
    let mesh = spec.mesh(dx)?;
    let cfg = spec.scheme_config(scheme);
    let mut state = StaggeredState::initial(mesh, &spec.initial, &coeff)?;
    let mut times = spec.times.clone();
    times.sort_by(f64::total_cmp);

    let mut diag = match mode {
        DiagnosticsMode::Off => None,
        DiagnosticsMode::Light | DiagnosticsMode::Full => {
            let mut dcfg = DiagnosticsConfig::all(&model, &mesh);
            if let Some(x) = spec.window_x {
                dcfg.window_x = x;
            }
            if mode == DiagnosticsMode::Light {
                dcfg.onesided = false;
                dcfg.nu = false;
                dcfg.entropy = false;
                dcfg.correction = false;
            }
            Some(Diagnostics::new(&model, &coeff, &cfg, &state, dcfg))
        }
    };
    let mut snapshots = Vec::with_capacity(times.len());
    for &t in &times {
        let mut observers: Vec<&mut dyn Observer> = Vec::new();
        if let Some(d) = diag.as_mut() {
            observers.push(d);
        }
        let (next, info) = march(state, &model, &coeff, &cfg, t, &mut observers)?;
        drop(observers);
        if let Some(d) = diag.as_mut() {
            d.update_from(&next, &info);
        }
        snapshots.push(Snapshot {
            requested_time: t,
            state: next.clone(),
            info,
            cubic_accumulator: diag.as_ref().map(|d| d.report().cubic_accumulator),
        });
        state = next;
    }
    let diagnostics = diag.map(|d| d.report().clone());
    Ok(RunOutput {
        scheme,
        dx,
        snapshots,
        diagnostics,
    })
}

/// LF on the reference spacing.
pub fn reference_run(spec: &ExperimentSpec, mode: DiagnosticsMode) -> Result<RunOutput> {
    run_at(spec, Scheme::LaxFriedrichs, spec.reference_dx, mode)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ErrorRow {
    pub dx: f64,
    pub scheme: Scheme,
    /// Requested output time.
    pub time: f64,
    pub coarse_time: f64,
    pub reference_time: f64,
    pub l1_error: f64,
    /// `log2(e_i / e_{i+1})`; `None` on the finest row.
    pub observed_order: Option<f64>,
    pub cubic_accumulator: f64,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

pub const ERROR_TABLE_HEADER: &str = "dx,scheme,time,l1_error,observed_order";

impl ErrorTable {
    /// Fills `observed_order` within each (scheme, time) group, ordered by
    /// decreasing `dx`.
    fn fill_orders(&mut self) {
        let n = self.rows.len();
        for i in 0..n {
            let next = (i + 1..n)
                .filter(|&j| self.rows[j].scheme == self.rows[i].scheme && self.rows[j].time == self.rows[i].time)
                .find(|&j| self.rows[j].dx < self.rows[i].dx);
            self.rows[i].observed_order = next.map(|j| (self.rows[i].l1_error / self.rows[j].l1_error).log2());
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{ERROR_TABLE_HEADER}")?;
        for r in &self.rows {
            let order = r.observed_order.map(|o| format!("{o:.16e}")).unwrap_or_default();
            writeln!(
                w,
                "{:.16e},{},{:.16e},{:.16e},{}",
                r.dx,
                r.scheme.label(),
                r.time,
                r.l1_error,
                order
            )?;
        }
        Ok(())
    }
}

fn rows_for(run: &RunOutput, reference: &RunOutput) -> Result<Vec<ErrorRow>> {
    run.snapshots
        .iter()
        .zip(&reference.snapshots)
        .map(|(c, r)| {
            Ok(ErrorRow {
                dx: run.dx,
                scheme: run.scheme,
                time: c.requested_time,
                coarse_time: c.state.time,
                reference_time: r.state.time,
                l1_error: l1_error(&c.state, &r.state)?,
                observed_order: None,
                cubic_accumulator: c.cubic_accumulator.unwrap_or(0.0),
            })
        })
        .collect()
}

/// Runs `scheme` at `dx, dx/2, ..., dx/2^(halvings-1)` and compares every
/// output time against the LF reference. Runs execute concurrently.
pub fn refinement_study(spec: &ExperimentSpec, scheme: Scheme, halvings: usize) -> Result<ErrorTable> {
    if halvings < 2 {
        return Err(DfluxError::InvalidParameter(format!("halvings must be >= 2, got {halvings}")));
    }
    spec.validate()?;
    let spacings: Vec<f64> = (0..halvings).map(|i| spec.dx / (1u64 << i) as f64).collect();
    for &dx in &spacings {
        nesting_ratio(dx, spec.reference_dx)?;
    }
    let (reference, runs) = std::thread::scope(|s| {
        let reference = s.spawn(|| reference_run(spec, DiagnosticsMode::Off));
        let handles: Vec<_> = spacings
            .iter()
            .map(|&dx| s.spawn(move || run_at(spec, scheme, dx, DiagnosticsMode::Light)))
            .collect();
        let runs: Vec<Result<RunOutput>> = handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect();
        (reference.join().expect("reference thread panicked"), runs)
    });
    let reference = reference?;
    let mut table = ErrorTable::default();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    // group by time, then by decreasing dx
    for ti in 0..reference.snapshots.len() {
        for run in &runs {
            let mut rows = rows_for(run, &reference)?;
            table.rows.push(rows.swap_remove(ti));
        }
    }
    table.fill_orders();
    Ok(table)
}

/// File name for a solution dump, e.g. `u_t0.800000.csv`.
pub fn solution_file_name(prefix: &str, time: f64) -> String {
    format!("{prefix}u_t{time:.6}.csv")
}

pub fn write_solution(dir: &Path, prefix: &str, snap: &Snapshot) -> Result<PathBuf> {
    let path = dir.join(solution_file_name(prefix, snap.requested_time));
    let mut w = BufWriter::new(fs::File::create(&path)?);
    snap.state.write_csv(&mut w)?;
    w.flush()?;
    Ok(path)
}

pub fn write_report(path: &Path, report: &DiagnosticsReport) -> Result<()> {
    fs::write(path, report.to_json()? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Reproduction {
    pub lf: RunOutput,
    pub nt: RunOutput,
    pub reference: RunOutput,
    pub table: ErrorTable,
    pub files: Vec<PathBuf>,
}

/// LF and NT at the experiment's spacing plus the LF reference, all with
/// diagnostics; writes solutions, `errors.csv` and one JSON report per run.
pub fn reproduce(spec: &ExperimentSpec, out_dir: &Path) -> Result<Reproduction> {
    spec.validate()?;
    fs::create_dir_all(out_dir)?;
    let (lf, nt, reference) = std::thread::scope(|s| {
        let lf = s.spawn(|| run_at(spec, Scheme::LaxFriedrichs, spec.dx, DiagnosticsMode::Full));
        let nt = s.spawn(|| run_at(spec, Scheme::NessyahuTadmor, spec.dx, DiagnosticsMode::Full));
        let reference = s.spawn(|| reference_run(spec, DiagnosticsMode::Full));
        (
            lf.join().expect("LF thread panicked"),
            nt.join().expect("NT thread panicked"),
            reference.join().expect("reference thread panicked"),
        )
    });
    let (lf, nt, reference) = (lf?, nt?, reference?);
    let mut table = ErrorTable::default();
    for ti in 0..reference.snapshots.len() {
        for run in [&lf, &nt] {
            table.rows.push(rows_for(run, &reference)?.swap_remove(ti));
        }
    }

    let mut files = Vec::new();
    for (prefix, run) in [("lf_", &lf), ("nt_", &nt), ("ref_", &reference)] {
        for snap in &run.snapshots {
            files.push(write_solution(out_dir, prefix, snap)?);
        }
        if let Some(report) = &run.diagnostics {
            let path = out_dir.join(format!("diagnostics_{}.json", prefix.trim_end_matches('_')));
            write_report(&path, report)?;
            files.push(path);
        }
    }
    let table_path = out_dir.join("errors.csv");
    let mut w = BufWriter::new(fs::File::create(&table_path)?);
    table.write_csv(&mut w)?;
    w.flush()?;
    files.push(table_path);
    Ok(Reproduction {
        lf,
        nt,
        reference,
        table,
        files,
    })
}
