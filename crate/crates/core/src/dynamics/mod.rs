//! Time-dependent Schrödinger and Lindblad integration, a dense
//! matrix-exponential oracle for small static problems, and fidelity.
//!
//! Both integrators use classical fourth-order Runge–Kutta with a fixed step
//! and never renormalize the state; drift in norm or trace is measured and
//! reported. Every run is repeated at a second step size and the two final
//! states are compared to decide whether the result is converged.

mod compiled;
mod lindblad;
mod oracle;
mod schrodinger;

pub use lindblad::{evolve_lindblad, evolve_lindblad_observed, LINDBLAD_NEGATIVITY_LIMIT, LINDBLAD_TRACE_LIMIT};
pub use oracle::{expm_oracle, ORACLE_MAX_DIM};
pub use schrodinger::{evolve_schrodinger, evolve_schrodinger_observed, SCHRODINGER_NORM_LIMIT};

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, HilbertLayout, Ket, Operator};
use crate::C64;
use serde::Serialize;
use std::f64::consts::PI;

/// One term of `H(t)`: either a static Hermitian operator (`frequency == 0`)
/// or `A e^{iνt} + A† e^{−iνt}`.
#[derive(Clone, Debug)]
pub struct HamiltonianTerm {
    pub operator: Operator,
    pub frequency: f64,
}

#[derive(Clone, Debug)]
pub struct TimeDependentHamiltonian {
    layout: HilbertLayout,
    terms: Vec<HamiltonianTerm>,
}

pub const HERMITICITY_TOL: f64 = 1e-12;

impl TimeDependentHamiltonian {
    pub fn new(layout: HilbertLayout) -> Self {
        Self {
            layout,
            terms: Vec::new(),
        }
    }

    /// Static Hermitian operator from a single term.
    pub fn from_static(op: Operator) -> Result<Self> {
        let mut h = Self::new(op.layout().clone());
        h.add_static(op)?;
        Ok(h)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    fn check_dim(&self, op: &Operator) -> Result<()> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                subsystem: format!("Hamiltonian term {}", op.label()),
                expected: self.dim(),
                found: op.dim(),
            });
        }
        Ok(())
    }

    pub fn add_static(&mut self, op: Operator) -> Result<()> {
        self.check_dim(&op)?;
        let scale = op.matrix().max_abs().max(1.0);
        let deviation = op.hermiticity_defect();
        if deviation > HERMITICITY_TOL * scale {
            return Err(Error::NonHermitian { deviation });
        }
        self.terms.push(HamiltonianTerm {
            operator: op,
            frequency: 0.0,
        });
        Ok(())
    }

    /// Adds `A e^{iνt} + A† e^{−iνt}`. With `ν = 0` the pair is added as the
    /// single static term `A + A†`.
    pub fn add_oscillating(&mut self, op: Operator, frequency: f64) -> Result<()> {
        self.check_dim(&op)?;
        if frequency == 0.0 {
            let label = op.label().to_string();
            let herm = op.add(&op.adjoint()).with_label(label);
            return self.add_static(herm);
        }
        self.terms.push(HamiltonianTerm {
            operator: op,
            frequency,
        });
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.frequency == 0.0)
    }

    /// Largest `|ν|` among oscillating terms.
    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max)
    }

    /// Upper bound on `‖H(t)‖` from absolute row sums.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        let mut rows = vec![0.0; n];
        for term in &self.terms {
            let m = term.operator.matrix();
            let factor = if term.frequency == 0.0 { 1.0 } else { 2.0 };
            for (i, _, v) in m.triplets() {
                rows[i] += factor * v.norm();
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// `H(t)` as a single operator.
    pub fn evaluate(&self, t: f64) -> Operator {
        let mut acc = Operator::zero(self.layout.clone());
        for term in &self.terms {
            if term.frequency == 0.0 {
                acc = acc.add(&term.operator);
            } else {
                let p = C64::from_polar(1.0, term.frequency * t);
                acc = acc
                    .add(&term.operator.scale(p))
                    .add(&term.operator.adjoint().scale(p.conj()));
            }
        }
        acc.with_label("H(t)")
    }
}

/// Dissipation channel `rate · D[L]`.
#[derive(Clone, Debug)]
pub struct CollapseChannel {
    pub operator: Operator,
    pub rate: f64,
}

impl CollapseChannel {
    pub fn new(operator: Operator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::Config(format!("negative rate {rate} for {}", operator.label())));
        }
        Ok(Self { operator, rate })
    }
}

/// How the step-size verification run is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceCheck {
    /// Repeat at `dt/2` and report the `dt` result.
    HalfStep,
    /// Repeat at `2dt`; the reported `dt` result is the finer of the pair.
    DoubleStep,
    Off,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Base step; derived from the resolution when absent.
    pub dt: Option<f64>,
    /// Minimum steps per period of the fastest oscillation.
    pub max_frequency_resolution: u32,
    pub convergence_tol: f64,
    /// Steps between trajectory records; 0 picks about 200 records.
    pub record_stride: usize,
    pub check: ConvergenceCheck,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: None,
            max_frequency_resolution: 20,
            convergence_tol: 1e-6,
            record_stride: 0,
            check: ConvergenceCheck::HalfStep,
        }
    }
}

impl IntegratorConfig {
    /// Number of steps covering `t_final` for a problem with fastest
    /// frequency `nu_max` and generator scale `scale`.
    pub fn steps_for(&self, t_final: f64, nu_max: f64, scale: f64) -> Result<usize> {
        if !(t_final >= 0.0) {
            return Err(Error::Config(format!("final time {t_final} must be nonnegative")));
        }
        if t_final == 0.0 {
            return Ok(0);
        }
        let r = self.max_frequency_resolution.max(1) as f64;
        let limit = if nu_max > 0.0 { 2.0 * PI / nu_max / r } else { f64::INFINITY };
        match self.dt {
            Some(dt) => {
                if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
                    return Err(Error::Config(format!(
                        "dt = {dt:e} s violates the resolution limit {limit:e} s"
                    )));
                }
                Ok((t_final / dt).ceil().max(1.0) as usize)
            }
            None => {
                let omega = nu_max.max(scale);
                let by_freq = (t_final * omega * r / (2.0 * PI)).ceil();
                Ok(by_freq.max(1.0) as usize)
            }
        }
    }

    pub(crate) fn stride(&self, steps: usize) -> usize {
        if self.record_stride > 0 {
            self.record_stride
        } else {
            (steps / 200).max(1)
        }
    }
}

/// Observables at one recorded time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub time: f64,
    /// Fidelity against the monitored target, if any.
    pub fidelity: Option<f64>,
    /// Norm squared for kets, trace for density matrices.
    pub trace: f64,
    pub purity: f64,
    /// Populations of `|g⟩, |e⟩, |f⟩` when a qutrit is present.
    pub qutrit_populations: Option<[f64; 3]>,
    /// Mean photon number per cavity.
    pub photon_numbers: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub steps: usize,
    pub dt: f64,
    /// `|‖ψ‖² − 1|` or `|tr ρ − 1|` at the end.
    pub final_drift: f64,
    /// Norm of the difference to the verification run.
    pub convergence_error: Option<f64>,
    pub converged: bool,
    /// Smallest eigenvalue of the final density matrix.
    pub min_eigenvalue: Option<f64>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn max_fidelity(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.fidelity).reduce(f64::max)
    }

    /// Largest summed `|e⟩ + |f⟩` population over the records.
    pub fn max_excited_population(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.qutrit_populations.map(|p| p[1] + p[2]))
            .reduce(f64::max)
    }
}

/// `√⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &DensityMatrix, psi_id: &Ket) -> Result<f64> {
    if !psi_id.is_normalized() {
        return Err(Error::InvalidState(format!("target norm {}", psi_id.norm())));
    }
    let e = rho.expectation(psi_id);
    if e.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!("imaginary expectation {:e}", e.im)));
    }
    if e.re < -1e-8 {
        return Err(Error::InvalidState(format!("negative expectation {:e}", e.re)));
    }
    Ok(e.re.max(0.0).sqrt())
}

/// `|⟨ψ_id|ψ⟩|`, the pure-state fidelity.
pub fn fidelity_pure(psi: &Ket, psi_id: &Ket) -> f64 {
    psi_id.inner(psi).norm()
}

/// Photon numbers and qutrit populations from a diagonal.
pub(crate) fn diagonal_observables(layout: &HilbertLayout, diag: impl Fn(usize) -> f64) -> (Option<[f64; 3]>, Vec<f64>) {
    let mut qutrit = [0.0; 3];
    let mut photons = vec![0.0; layout.n_cavities()];
    let off = usize::from(layout.has_qutrit());
    for i in 0..layout.total_dim() {
        let p = diag(i);
        if p == 0.0 {
            continue;
        }
        let m = layout.unflatten(i);
        if layout.has_qutrit() {
            qutrit[m[0]] += p;
        }
        for (j, n) in photons.iter_mut().enumerate() {
            *n += p * m[off + j] as f64;
        }
    }
    (layout.has_qutrit().then_some(qutrit), photons)
}
