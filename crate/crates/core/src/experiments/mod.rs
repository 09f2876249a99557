//! Sweeps over the lossy GHZ preparation, the dissipation-free m scan, the
//! truth-table suite and the dispersive-regime report, with JSON configs
//! and CSV output.

pub mod cli;
mod config;
mod output;

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{load_config, load_config_with, parse_config, ConfigOverrides, LISTED_DETUNING_TOL};
pub use output::{format_float, partial_path, runtime_path, write_results, write_table};

use crate::dynamics::{IntegratorConfig, Trajectory};
use crate::encoding::{make_encoding, EncodingFamilySpec, ParityEncoding};
use crate::error::{Error, Result};
use crate::gate::{hybridization_class, ideal_phase, verify_truth_table, GateSpec, TruthTable};
use crate::ghz::{build_scenario, prepare_full, prepare_pure, GhzKind, ScenarioInput};
use crate::hilbert::HilbertLayout;
use crate::model::{
    check_regime, derive_detunings, effective_params, solve_coupling, DecoherenceParams, HamiltonianTier, SystemParams,
    TargetParity, Toggles, DEFAULT_REGIME_THRESHOLD,
};
use crate::{ghz_to_rad_per_s, rad_per_s_to_ghz, C64};

/// Spacing of consecutive target detunings in the m scan (GHz).
pub const FIG8_TARGET_SPACING_GHZ: f64 = 0.4;
/// Amplitude of the coherent components in the lossy sweeps.
pub const DEFAULT_ALPHA: f64 = 1.1;
/// Declared wall-time budget per smoke-profile row (s).
pub const SMOKE_ROW_BUDGET_S: f64 = 600.0;
/// Steps per fastest period in the m scan. The scan runs for up to tens of
/// microseconds, so the default of 20 leaves visible phase error.
pub const SCAN_RESOLUTION: u32 = 60;
/// Cavity dimension of the truth-table suite.
pub const TRUTH_TABLE_DIM: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig6,
    Fig7,
    Fig8,
    TruthTable,
    RegimeReport,
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("unknown experiment {s:?}")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
            Self::TruthTable => "truth_table",
            Self::RegimeReport => "regime_report",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Qutrit ⊗ [4, 10, 10], coarse grids.
    Smoke,
    /// Qutrit ⊗ [5, 15, 15], full grids.
    Reproduce,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Self::Smoke),
            "reproduce" => Ok(Self::Reproduce),
            other => Err(Error::Config(format!("unknown profile {other:?}"))),
        }
    }
}

/// Sweep axes. Only the axes an experiment uses are iterated.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub kappa_inv_us: Vec<f64>,
    pub t_us: Vec<f64>,
    pub x: Vec<f64>,
    pub m: Vec<u32>,
    /// Crosstalk off/on variants of the m scan.
    pub crosstalk: Vec<bool>,
    /// Cavity counts of the truth-table suite.
    pub n: Vec<usize>,
}

impl Grid {
    pub fn defaults(experiment: Experiment, profile: Profile) -> Self {
        let smoke = profile == Profile::Smoke;
        let (t_us, kappa_inv_us, x) = match (experiment, smoke) {
            (Experiment::Fig7, true) => (vec![10.0], vec![20.0], vec![-0.1, 0.0, 0.1]),
            (Experiment::Fig7, false) => (vec![10.0], vec![20.0, 50.0, 100.0], vec![-0.1, -0.05, 0.0, 0.05, 0.1]),
            (_, true) => (vec![10.0, 20.0], vec![20.0, 100.0], vec![0.0]),
            (_, false) => (vec![10.0, 15.0, 20.0], vec![20.0, 40.0, 60.0, 80.0, 100.0], vec![0.0]),
        };
        let m = match (experiment, smoke) {
            (Experiment::Fig8, true) => vec![10, 20, 30],
            (Experiment::Fig8, false) => vec![10, 20, 30, 40, 50, 60],
            _ => vec![10],
        };
        Self {
            kappa_inv_us,
            t_us,
            x,
            m,
            crosstalk: vec![false, true],
            n: vec![2, 3, 4],
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub profile: Profile,
    pub grid: Grid,
    /// Cavity dimensions, control first.
    pub truncations: Vec<usize>,
    /// Hamiltonian imperfections of the lossy sweeps.
    pub toggles: Toggles,
    pub alpha: C64,
    pub integrator: IntegratorConfig,
    pub budget_s: Option<f64>,
    pub output_path: Option<PathBuf>,
    /// Families of the truth-table suite; empty means the catalogue.
    pub encodings: Vec<EncodingFamilySpec>,
    pub truth_dim: usize,
    pub jobs: usize,
}

impl SweepSpec {
    /// Profile defaults for `n_cavities` cavities.
    pub fn new(experiment: Experiment, profile: Profile, n_cavities: usize) -> Self {
        let (control, target) = match profile {
            Profile::Smoke => (4, 10),
            Profile::Reproduce => (5, 15),
        };
        let mut truncations = vec![target; n_cavities];
        if let Some(c) = truncations.first_mut() {
            *c = control;
        }
        let mut integrator = IntegratorConfig::default();
        if experiment == Experiment::Fig8 {
            integrator.max_frequency_resolution = SCAN_RESOLUTION;
        }
        Self {
            experiment,
            profile,
            grid: Grid::defaults(experiment, profile),
            truncations,
            toggles: Toggles::all(),
            alpha: C64::new(DEFAULT_ALPHA, 0.0),
            integrator,
            budget_s: (profile == Profile::Smoke).then_some(SMOKE_ROW_BUDGET_S),
            output_path: None,
            encodings: Vec::new(),
            truth_dim: TRUTH_TABLE_DIM,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let empty = match self.experiment {
            Experiment::Fig6 | Experiment::Fig7 => {
                [("kappa_inv_us", g.kappa_inv_us.len()), ("T_us", g.t_us.len()), ("x", g.x.len())]
                    .into_iter()
                    .find(|(_, l)| *l == 0)
            }
            Experiment::Fig8 => [("m", g.m.len()), ("crosstalk", g.crosstalk.len())]
                .into_iter()
                .find(|(_, l)| *l == 0),
            Experiment::TruthTable => [("n", g.n.len())].into_iter().find(|(_, l)| *l == 0),
            Experiment::RegimeReport => [("m", g.m.len())].into_iter().find(|(_, l)| *l == 0),
        };
        if let Some((axis, _)) = empty {
            return Err(Error::Config(format!("grid axis {axis} is empty")));
        }
        if let Some(&d) = self.truncations.iter().find(|&&d| d < 2) {
            return Err(Error::Config(format!("truncation {d} is below 2")));
        }
        if self.truth_dim < 2 {
            return Err(Error::Config(format!("truth_dim {} is below 2", self.truth_dim)));
        }
        if g.n.iter().any(|&n| n < 2) {
            return Err(Error::Config("truth-table cavity counts must be at least 2".into()));
        }
        if g.m.contains(&0) {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }

    fn families(&self) -> Vec<EncodingFamilySpec> {
        if self.encodings.is_empty() {
            EncodingFamilySpec::catalogue()
        } else {
            self.encodings.clone()
        }
    }
}

/// A CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub coords: Vec<(String, Value)>,
    pub fidelity: f64,
    pub fidelity_at_max: f64,
    pub trace_drift: f64,
    pub runtime_s: f64,
    pub converged: bool,
    pub within_budget: bool,
    pub diagnostics: Vec<(String, Value)>,
    /// `ok`, or the error that stopped this point.
    pub status: String,
}

impl ResultRow {
    pub fn coord(&self, name: &str) -> Option<&Value> {
        self.coords.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn diagnostic(&self, name: &str) -> Option<&Value> {
        self.diagnostics.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok" && self.converged
    }
}

#[derive(Clone, Debug)]
enum Point {
    Lossy { t_us: f64, kappa_inv_us: f64, x: f64 },
    Scan { crosstalk: bool, m: u32 },
    Truth { n: usize, family: Option<usize> },
    Regime { m: u32 },
}

impl Point {
    fn coords(&self, families: &[EncodingFamilySpec]) -> Vec<(String, Value)> {
        let c = |k: &str, v: Value| (k.to_string(), v);
        match *self {
            Point::Lossy { t_us, kappa_inv_us, x } => vec![
                c("T_us", Value::Num(t_us)),
                c("kappa_inv_us", Value::Num(kappa_inv_us)),
                c("x", Value::Num(x)),
            ],
            Point::Scan { crosstalk, m } => vec![c("crosstalk", Value::Bool(crosstalk)), c("m", Value::Int(m as i64))],
            Point::Truth { n, family } => vec![
                c("n", Value::Int(n as i64)),
                c(
                    "family",
                    Value::Text(family.map_or("hybrid".to_string(), |f| families[f].label().to_string())),
                ),
            ],
            Point::Regime { m } => vec![c("m", Value::Int(m as i64))],
        }
    }
}

fn points(spec: &SweepSpec) -> Vec<Point> {
    let g = &spec.grid;
    let mut out = Vec::new();
    match spec.experiment {
        Experiment::Fig6 | Experiment::Fig7 => {
            for &t_us in &g.t_us {
                for &kappa_inv_us in &g.kappa_inv_us {
                    for &x in &g.x {
                        out.push(Point::Lossy { t_us, kappa_inv_us, x });
                    }
                }
            }
        }
        Experiment::Fig8 => {
            for &crosstalk in &g.crosstalk {
                for &m in &g.m {
                    out.push(Point::Scan { crosstalk, m });
                }
            }
        }
        Experiment::TruthTable => {
            let k = spec.families().len();
            for &n in &g.n {
                out.extend((0..k).map(|f| Point::Truth { n, family: Some(f) }));
                out.push(Point::Truth { n, family: None });
            }
        }
        Experiment::RegimeReport => out.extend(g.m.iter().map(|&m| Point::Regime { m })),
    }
    out
}

fn diagnostic_names(experiment: Experiment, n_cavities: usize) -> Vec<String> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    match experiment {
        Experiment::Fig6 | Experiment::Fig7 => s(&[
            "gate_time_us",
            "steps",
            "convergence_error",
            "min_eigenvalue",
            "max_excited_population",
            "tail_mass",
        ]),
        Experiment::Fig8 => {
            let mut v = s(&["gate_time_us", "steps", "convergence_error", "max_excited_population"]);
            v.extend((2..=n_cavities).map(|l| format!("g{l}_ghz")));
            v
        }
        Experiment::TruthTable => s(&["max_deviation", "eigen_residual", "hybridization"]),
        Experiment::RegimeReport => {
            let mut v = s(&["gate_time_us", "s", "flagged"]);
            v.extend((2..=n_cavities).map(|l| format!("g{l}_ghz")));
            v.extend(regime_names(n_cavities));
            v
        }
    }
}

fn regime_names(n: usize) -> Vec<String> {
    // evaluated once on a dummy system so the column set is fixed
    let mut p = SystemParams::table1();
    if n != p.n_cavities() {
        return Vec::new();
    }
    p.g_cross = None;
    let det = derive_detunings(&p).expect("table values are valid");
    let eff = effective_params(&p, &det).expect("table values are valid");
    check_regime(&p, &det, &eff, DEFAULT_REGIME_THRESHOLD)
        .entries
        .into_iter()
        .map(|e| e.name)
        .collect()
}

struct Outcome {
    fidelity: f64,
    fidelity_at_max: f64,
    trace_drift: f64,
    converged: bool,
    diagnostics: Vec<(String, Value)>,
}

/// Runs every grid point of `spec` and returns the rows in grid order. The
/// lossy sweeps take T and κ⁻¹ from the grid in place of those in `dec`.
/// Rows are appended to the [`partial_path`] log of `spec.output_path` as
/// they complete. A failing point yields a flagged row and the sweep goes on.
pub fn run_experiment(spec: &SweepSpec, params: &SystemParams, dec: &DecoherenceParams) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let n = params.n_cavities();
    if spec.truncations.len() != n && matches!(spec.experiment, Experiment::Fig6 | Experiment::Fig7 | Experiment::Fig8) {
        return Err(Error::Config(format!("{} truncations for {n} cavities", spec.truncations.len())));
    }
    let pts = points(spec);
    let families = spec.families();
    let names = diagnostic_names(spec.experiment, n);
    let log = match &spec.output_path {
        Some(p) => Some(Mutex::new(output::PartialLog::create(&partial_path(p))?)),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    log::info!("{} sweep: {} points on {} workers", spec.experiment, pts.len(), spec.jobs);
    let rows: Vec<Result<ResultRow>> = pool.install(|| {
        pts.par_iter()
            .enumerate()
            .map(|(i, pt)| {
                let start = Instant::now();
                let outcome = run_point(spec, params, dec, pt, &families);
                let runtime_s = start.elapsed().as_secs_f64();
                let row = assemble(pt.coords(&families), outcome, &names, runtime_s, spec.budget_s);
                log::info!("{} point {i}: fidelity {:.6} ({})", spec.experiment, row.fidelity, row.status);
                if let Some(log) = &log {
                    log.lock().expect("partial log poisoned").append(i, &row)?;
                }
                Ok(row)
            })
            .collect()
    });
    rows.into_iter().collect()
}

/// [`run_experiment`] followed by [`write_results`] to `spec.output_path`.
/// The partial log is removed once the final file is written.
pub fn run_and_write(spec: &SweepSpec, params: &SystemParams, dec: &DecoherenceParams) -> Result<Vec<ResultRow>> {
    let rows = run_experiment(spec, params, dec)?;
    if let Some(path) = &spec.output_path {
        write_results(&rows, path)?;
        let partial = partial_path(path);
        if partial.exists() {
            std::fs::remove_file(partial)?;
        }
    }
    Ok(rows)
}

fn assemble(
    coords: Vec<(String, Value)>,
    outcome: Result<Outcome>,
    names: &[String],
    runtime_s: f64,
    budget: Option<f64>,
) -> ResultRow {
    let within_budget = budget.is_none_or(|b| runtime_s <= b);
    if !within_budget {
        log::warn!("point {coords:?} took {runtime_s:.1} s, over the {:.0} s budget", budget.unwrap_or(0.0));
    }
    let (o, status) = match outcome {
        Ok(o) => (o, "ok".to_string()),
        Err(e) => {
            log::warn!("point {coords:?} failed: {e}");
            (
                Outcome {
                    fidelity: f64::NAN,
                    fidelity_at_max: f64::NAN,
                    trace_drift: f64::NAN,
                    converged: false,
                    diagnostics: Vec::new(),
                },
                format!("error: {e}"),
            )
        }
    };
    let diagnostics = names
        .iter()
        .map(|name| {
            let v = o
                .diagnostics
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| v.clone())
                .unwrap_or(Value::Num(f64::NAN));
            (name.clone(), v)
        })
        .collect();
    ResultRow {
        coords,
        fidelity: o.fidelity,
        fidelity_at_max: o.fidelity_at_max,
        trace_drift: o.trace_drift,
        runtime_s,
        converged: o.converged,
        within_budget,
        diagnostics,
        status,
    }
}

fn run_point(
    spec: &SweepSpec,
    params: &SystemParams,
    dec: &DecoherenceParams,
    pt: &Point,
    families: &[EncodingFamilySpec],
) -> Result<Outcome> {
    match *pt {
        Point::Lossy { t_us, kappa_inv_us, x } => lossy_point(spec, params, dec, t_us, kappa_inv_us, x),
        Point::Scan { crosstalk, m } => scan_point(spec, params, crosstalk, m),
        Point::Truth { n, family } => truth_point(spec, params, families, n, family),
        Point::Regime { m } => regime_point(params, m),
    }
}

fn trajectory_fidelities(traj: &Trajectory) -> (f64, f64) {
    let at_t = traj
        .records
        .last()
        .and_then(|r| r.fidelity)
        .unwrap_or(f64::NAN);
    (at_t, traj.max_fidelity().unwrap_or(f64::NAN))
}

fn num(k: &str, v: f64) -> (String, Value) {
    (k.to_string(), Value::Num(v))
}

fn lossy_point(
    spec: &SweepSpec,
    params: &SystemParams,
    dec: &DecoherenceParams,
    t_us: f64,
    kappa_inv_us: f64,
    x: f64,
) -> Result<Outcome> {
    let dec = DecoherenceParams::from_t(t_us * 1e-6, kappa_inv_us * 1e-6, dec.kappa.len())?;
    let layout = HilbertLayout::new(&spec.truncations)?;
    let scenario = build_scenario(GhzKind::SpinCoherent, ScenarioInput::Alpha(spec.alpha), x, &layout)?;
    let (_, traj) = prepare_full(&scenario, params, &dec, spec.toggles, &spec.integrator)?;
    let (fidelity, fidelity_at_max) = trajectory_fidelities(&traj);
    let t = crate::ghz::gate_duration(params)?;
    Ok(Outcome {
        fidelity,
        fidelity_at_max,
        trace_drift: traj.final_drift,
        converged: traj.converged,
        diagnostics: vec![
            num("gate_time_us", t * 1e6),
            ("steps".into(), Value::Int(traj.steps as i64)),
            num("convergence_error", traj.convergence_error.unwrap_or(f64::NAN)),
            num("min_eigenvalue", traj.min_eigenvalue.unwrap_or(f64::NAN)),
            num("max_excited_population", traj.max_excited_population().unwrap_or(f64::NAN)),
            num("tail_mass", scenario.tail_mass),
        ],
    })
}

/// Parameters of one point of the m scan: `δ₁ = m g₁`, target detunings
/// spaced by [`FIG8_TARGET_SPACING_GHZ`], target couplings from the even
/// gate condition, `g′ = g`, crosstalk at the configured fraction of the
/// new `g_max`. Returns the parameters and the gate time `2m²π/g₁`.
pub fn scan_params(base: &SystemParams, m: u32) -> Result<(SystemParams, f64)> {
    let n = base.n_cavities();
    let g1 = base.g[0];
    let d1 = m as f64 * g1;
    let mut p = base.clone();
    p.omega_c[0] = p.omega_fg - d1;
    for l in 1..n {
        let dl = d1 + ghz_to_rad_per_s(FIG8_TARGET_SPACING_GHZ * l as f64);
        p.omega_c[l] = p.omega_fe - dl;
        p.g[l] = solve_coupling(TargetParity::Even, m, d1, dl)?;
    }
    if let Some(&bad) = p.omega_c.iter().find(|&&w| w <= 0.0) {
        return Err(Error::Regime(format!(
            "m = {m} puts a cavity at {:.3} GHz",
            rad_per_s_to_ghz(bad)
        )));
    }
    p.g_prime = Some(p.g.clone());
    p.set_uniform_crosstalk(base.crosstalk_fraction().unwrap_or(0.01));
    let t = 2.0 * (m as f64).powi(2) * PI / g1;
    Ok((p, t))
}

fn scan_point(spec: &SweepSpec, base: &SystemParams, crosstalk: bool, m: u32) -> Result<Outcome> {
    let (p, t) = scan_params(base, m)?;
    let layout = HilbertLayout::new(&spec.truncations)?;
    let scenario = build_scenario(GhzKind::SpinCoherent, ScenarioInput::Alpha(spec.alpha), 0.0, &layout)?;
    let toggles = Toggles {
        unwanted_couplings: false,
        crosstalk,
    };
    let (_, traj) = prepare_pure(&scenario, &p, HamiltonianTier::Full, toggles, t, &spec.integrator)?;
    let (fidelity, fidelity_at_max) = trajectory_fidelities(&traj);
    let mut diagnostics = vec![
        num("gate_time_us", t * 1e6),
        ("steps".into(), Value::Int(traj.steps as i64)),
        num("convergence_error", traj.convergence_error.unwrap_or(f64::NAN)),
        num("max_excited_population", traj.max_excited_population().unwrap_or(f64::NAN)),
    ];
    diagnostics.extend((1..p.n_cavities()).map(|l| num(&format!("g{}_ghz", l + 1), rad_per_s_to_ghz(p.g[l]))));
    Ok(Outcome {
        fidelity,
        fidelity_at_max,
        trace_drift: traj.final_drift,
        converged: traj.converged,
        diagnostics,
    })
}

/// Gate time, `s` and `m` of the configured system.
fn gate_numbers(params: &SystemParams) -> Result<(f64, i64, u32)> {
    let det = derive_detunings(params)?;
    let eff = effective_params(params, &det)?;
    let t = eff.gate_time()?;
    let s = (eff.eta * t / (2.0 * PI)).round() as i64;
    let m = (eff.lambda_1 / (2.0 * eff.chi_1l[0])).round().max(0.0) as u32;
    Ok((t, s, m))
}

/// `|Σ conj(ideal) · phase| / 2ⁿ`, the overlap of the measured phase table
/// with the controlled-phase table.
pub fn table_fidelity(table: &TruthTable) -> f64 {
    let sum: C64 = table.entries.iter().map(|e| ideal_phase(&e.bits).conj() * e.phase).sum();
    sum.norm() / table.entries.len() as f64
}

fn truth_point(
    spec: &SweepSpec,
    params: &SystemParams,
    families: &[EncodingFamilySpec],
    n: usize,
    family: Option<usize>,
) -> Result<Outcome> {
    let (t, s, m) = gate_numbers(params)?;
    let encodings: Vec<ParityEncoding> = (0..n)
        .map(|j| make_encoding(&families[family.unwrap_or(j % families.len())], spec.truth_dim))
        .collect::<Result<_>>()?;
    let hyb = hybridization_class(&encodings);
    let gate = GateSpec::exact(encodings, t, s, m);
    let (table, residual) = verify_truth_table(&gate)?;
    let deviation = table.deviation_from_ideal();
    let fidelity = table_fidelity(&table);
    Ok(Outcome {
        fidelity,
        fidelity_at_max: fidelity,
        trace_drift: 0.0,
        converged: true,
        diagnostics: vec![
            num("max_deviation", deviation),
            num("eigen_residual", residual),
            ("hybridization".into(), Value::Text(format!("{hyb:?}").to_lowercase())),
        ],
    })
}

fn regime_point(base: &SystemParams, m: u32) -> Result<Outcome> {
    let p = base.clone().with_solved_couplings(TargetParity::Even, m)?;
    let det = derive_detunings(&p)?;
    let eff = effective_params(&p, &det)?;
    let t = eff.gate_time()?;
    let s = (eff.eta * t / (2.0 * PI)).round() as i64;
    let report = check_regime(&p, &det, &eff, DEFAULT_REGIME_THRESHOLD);
    for e in report.flagged() {
        log::warn!("m = {m}: {} = {:.3} is below {}", e.name, e.ratio, report.threshold);
    }
    let n = p.n_cavities();
    let encodings = (0..n)
        .map(|_| make_encoding(&EncodingFamilySpec::Fock01, 2))
        .collect::<Result<Vec<_>>>()?;
    let gate = GateSpec {
        encodings,
        chi: eff.chi_1l.clone(),
        eta: eff.eta,
        t,
        s,
        m_or_mprime: m,
        exact: false,
    };
    let (table, _) = verify_truth_table(&gate)?;
    let fidelity = table_fidelity(&table);
    let mut diagnostics = vec![
        num("gate_time_us", t * 1e6),
        ("s".into(), Value::Int(s)),
        ("flagged".into(), Value::Int(report.flagged().count() as i64)),
    ];
    diagnostics.extend((1..n).map(|l| num(&format!("g{}_ghz", l + 1), rad_per_s_to_ghz(p.g[l]))));
    diagnostics.extend(report.entries.iter().map(|e| num(&e.name, e.ratio)));
    Ok(Outcome {
        fidelity,
        fidelity_at_max: fidelity,
        trace_drift: 0.0,
        converged: true,
        diagnostics,
    })
}
