//! System parameters, derived detunings and effective couplings, the
//! gate-condition solvers, regime diagnostics, and the Hamiltonian tiers.
//!
//! All rates are angular frequencies in rad/s; times are in seconds. Cavity
//! index 0 is the control cavity, indices `1..n` are the targets.

use crate::dynamics::TimeDependentHamiltonian;
use crate::error::{Error, Result};
use crate::hilbert::{embed, mode_operators, qutrit_operators, CsrMatrix, HilbertLayout, Operator, E, F, G};
use crate::{ghz_to_rad_per_s, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Qutrit and cavity frequencies plus coupling strengths.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub omega_eg: f64,
    pub omega_fe: f64,
    pub omega_fg: f64,
    pub omega_c: Vec<f64>,
    /// Wanted couplings: cavity 0 to `|g⟩↔|f⟩`, targets to `|e⟩↔|f⟩`.
    pub g: Vec<f64>,
    /// Unwanted couplings: cavity 0 to `|e⟩↔|f⟩`, targets to `|g⟩↔|f⟩`.
    pub g_prime: Option<Vec<f64>>,
    /// Symmetric intercavity crosstalk strengths, zero diagonal.
    pub g_cross: Option<Vec<Vec<f64>>>,
}

impl SystemParams {
    /// Table I values with the control cavity at 18.4 GHz so that
    /// `δ₁/2π = 1.6 GHz` holds. Target couplings are the rounded table values;
    /// see [`SystemParams::with_solved_couplings`] for the exact ones.
    pub fn table1() -> Self {
        let w = ghz_to_rad_per_s;
        let g = vec![w(0.16), w(0.198), w(0.303)];
        let mut p = Self {
            omega_eg: w(8.0),
            omega_fe: w(12.0),
            omega_fg: w(20.0),
            omega_c: vec![w(18.4), w(10.0), w(9.6)],
            g: g.clone(),
            g_prime: Some(g),
            g_cross: None,
        };
        p.set_uniform_crosstalk(0.01);
        p
    }

    pub fn n_cavities(&self) -> usize {
        self.omega_c.len()
    }

    /// Largest wanted coupling.
    pub fn g_max(&self) -> f64 {
        self.g.iter().copied().fold(0.0, f64::max)
    }

    /// Sets every crosstalk strength to `fraction · g_max`.
    pub fn set_uniform_crosstalk(&mut self, fraction: f64) {
        let n = self.n_cavities();
        let g = fraction * self.g_max();
        self.g_cross = Some(
            (0..n)
                .map(|k| (0..n).map(|l| if k == l { 0.0 } else { g }).collect())
                .collect(),
        );
    }

    /// Replaces the target couplings by the exact solution of the gate
    /// condition and sets `g′ = g`, keeping the crosstalk fraction.
    pub fn with_solved_couplings(mut self, parity: TargetParity, m: u32) -> Result<Self> {
        let crosstalk_fraction = self.crosstalk_fraction();
        let det = derive_detunings(&self)?;
        for l in 1..self.n_cavities() {
            self.g[l] = solve_coupling(parity, m, det.delta[0], det.delta[l])?;
        }
        if self.g_prime.is_some() {
            self.g_prime = Some(self.g.clone());
        }
        if let Some(f) = crosstalk_fraction {
            self.set_uniform_crosstalk(f);
        }
        Ok(self)
    }

    /// `g̃/g_max` when every off-diagonal crosstalk entry is equal.
    pub fn crosstalk_fraction(&self) -> Option<f64> {
        let gc = self.g_cross.as_ref()?;
        let first = *gc.first()?.get(1)?;
        let uniform = gc
            .iter()
            .enumerate()
            .all(|(k, row)| row.iter().enumerate().all(|(l, &v)| k == l || v == first));
        uniform.then(|| first / self.g_max())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_cavities();
        if n == 0 {
            return Err(Error::Config("at least one cavity is required".into()));
        }
        if self.g.len() != n {
            return Err(Error::Config(format!("{} couplings for {n} cavities", self.g.len())));
        }
        if let Some(gp) = &self.g_prime {
            if gp.len() != n {
                return Err(Error::Config(format!("{} unwanted couplings for {n} cavities", gp.len())));
            }
        }
        if let Some(gc) = &self.g_cross {
            if gc.len() != n || gc.iter().any(|r| r.len() != n) {
                return Err(Error::Config(format!("crosstalk matrix must be {n}x{n}")));
            }
        }
        let sum = self.omega_eg + self.omega_fe;
        if (sum - self.omega_fg).abs() > 1e-9 * self.omega_fg.abs() {
            return Err(Error::Consistency(format!(
                "omega_fg = {:.6} GHz but omega_eg + omega_fe = {:.6} GHz",
                crate::rad_per_s_to_ghz(self.omega_fg),
                crate::rad_per_s_to_ghz(sum)
            )));
        }
        Ok(())
    }
}

/// Detunings indexed by cavity. Entry 0 of `gate` is unused (zero).
#[derive(Clone, Debug, PartialEq)]
pub struct Detunings {
    /// `δ₁ = ω_fg − ω_c1`, `δ_l = ω_fe − ω_cl`.
    pub delta: Vec<f64>,
    /// `δ′₁ = ω_fe − ω_c1`, `δ′_l = ω_fg − ω_cl`.
    pub delta_prime: Vec<f64>,
    /// `Δ_{1l} = δ_l − δ₁`.
    pub gate: Vec<f64>,
    /// `Δ̃_{kl} = ω_ck − ω_cl`.
    pub cross: Vec<Vec<f64>>,
}

impl Detunings {
    pub fn delta_1(&self) -> f64 {
        self.delta[0]
    }
}

pub fn derive_detunings(params: &SystemParams) -> Result<Detunings> {
    params.validate()?;
    let n = params.n_cavities();
    let wc = &params.omega_c;
    let delta: Vec<f64> = (0..n)
        .map(|j| if j == 0 { params.omega_fg - wc[0] } else { params.omega_fe - wc[j] })
        .collect();
    let delta_prime: Vec<f64> = (0..n)
        .map(|j| if j == 0 { params.omega_fe - wc[0] } else { params.omega_fg - wc[j] })
        .collect();
    if let Some(j) = delta.iter().position(|&d| d <= 0.0) {
        return Err(Error::Regime(format!(
            "detuning of cavity {j} is {} GHz; the dispersive scheme needs it positive",
            crate::rad_per_s_to_ghz(delta[j])
        )));
    }
    let gate = delta.iter().map(|&d| d - delta[0]).collect();
    let cross = (0..n).map(|k| (0..n).map(|l| wc[k] - wc[l]).collect()).collect();
    Ok(Detunings {
        delta,
        delta_prime,
        gate,
        cross,
    })
}

/// Second-order rates. Vectors are indexed by target (`l − 2` in one-based
/// cavity labels).
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveParams {
    pub lambda_1: f64,
    pub lambda_l: Vec<f64>,
    pub lambda_1l: Vec<f64>,
    pub chi_1l: Vec<f64>,
    pub eta: f64,
}

impl EffectiveParams {
    pub fn n_targets(&self) -> usize {
        self.chi_1l.len()
    }

    /// `π/χ₁₂`, the duration giving the first target a π cross-Kerr phase.
    pub fn gate_time(&self) -> Result<f64> {
        match self.chi_1l.first() {
            Some(&chi) if chi > 0.0 => Ok(PI / chi),
            _ => Err(Error::Singularity("gate time needs a positive chi_12".into())),
        }
    }

    /// Rates chosen so that `χ t = π` for every target and `η t = 2sπ`, for
    /// use in exact-condition tests.
    pub fn exact(n: usize, t: f64, s: i64) -> Self {
        let chi = PI / t;
        let eta = 2.0 * s as f64 * PI / t;
        let lambda_1 = -eta + (n as f64 - 1.0) * chi;
        Self {
            lambda_1,
            lambda_l: vec![0.0; n - 1],
            lambda_1l: vec![0.0; n - 1],
            chi_1l: vec![chi; n - 1],
            eta,
        }
    }
}

pub fn effective_params(params: &SystemParams, det: &Detunings) -> Result<EffectiveParams> {
    let n = params.n_cavities();
    let (g1, d1) = (params.g[0], det.delta[0]);
    let lambda_1 = g1 * g1 / d1;
    let mut lambda_l = Vec::with_capacity(n.saturating_sub(1));
    let mut lambda_1l = Vec::with_capacity(n.saturating_sub(1));
    let mut chi_1l = Vec::with_capacity(n.saturating_sub(1));
    for l in 1..n {
        let (gl, dl) = (params.g[l], det.delta[l]);
        if det.gate[l] == 0.0 {
            return Err(Error::Singularity(format!("Delta_1{} = 0", l + 1)));
        }
        let l1l = 0.5 * g1 * gl * (1.0 / d1 + 1.0 / dl);
        lambda_l.push(gl * gl / dl);
        lambda_1l.push(l1l);
        chi_1l.push(l1l * l1l / det.gate[l]);
    }
    let eta = -lambda_1 + chi_1l.iter().sum::<f64>();
    Ok(EffectiveParams {
        lambda_1,
        lambda_l,
        lambda_1l,
        chi_1l,
        eta,
    })
}

/// Which gate-condition branch fixes the target couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetParity {
    /// `χ_{1l} = λ₁/(2m)`.
    Even,
    /// `χ_{1l} = λ₁/(2m′+1)`.
    Odd,
}

/// Target coupling `g_l` for which `χ_{1l}` satisfies the chosen branch.
pub fn solve_coupling(parity: TargetParity, m: u32, delta_1: f64, delta_l: f64) -> Result<f64> {
    if !(delta_1 > 0.0) || delta_l <= delta_1 {
        return Err(Error::Regime(format!(
            "coupling solver needs delta_l > delta_1 > 0 (got {delta_1:e}, {delta_l:e})"
        )));
    }
    let gap = delta_l - delta_1;
    let ratio = delta_l / (delta_1 + delta_l);
    match parity {
        TargetParity::Even => {
            if m == 0 {
                return Err(Error::Config("even branch needs m >= 1".into()));
            }
            Ok(ratio * (2.0 * gap * delta_1 / m as f64).sqrt())
        }
        TargetParity::Odd => Ok(2.0 * ratio * (gap * delta_1 / (2 * m + 1) as f64).sqrt()),
    }
}

/// Residuals of the phase conditions `χ_{1l}t = π` and `ηt = 2sπ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateConditionReport {
    /// `χ_{1l}t − π`, per target.
    pub chi_residuals: Vec<f64>,
    /// Nearest integer to `ηt/2π`.
    pub s: i64,
    /// `ηt − 2sπ`.
    pub eta_residual: f64,
    pub passed: bool,
}

pub const GATE_CONDITION_TOL: f64 = 1e-6;

pub fn check_gate_condition(eff: &EffectiveParams, t: f64, n: usize) -> GateConditionReport {
    let chi_residuals: Vec<f64> = eff.chi_1l.iter().map(|&c| c * t - PI).collect();
    let eta_t = eff.eta * t;
    let s = (eta_t / (2.0 * PI)).round() as i64;
    let eta_residual = eta_t - 2.0 * PI * s as f64;
    let passed = eff.chi_1l.len() + 1 == n
        && chi_residuals.iter().all(|r| (r / PI).abs() <= GATE_CONDITION_TOL)
        && (eta_residual / PI).abs() <= GATE_CONDITION_TOL;
    GateConditionReport {
        chi_residuals,
        s,
        eta_residual,
        passed,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeEntry {
    pub name: String,
    pub ratio: f64,
    pub flagged: bool,
}

/// Dimensionless ratios that should be large in the dispersive regime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub threshold: f64,
    pub entries: Vec<RegimeEntry>,
}

impl RegimeReport {
    pub fn flagged(&self) -> impl Iterator<Item = &RegimeEntry> {
        self.entries.iter().filter(|e| e.flagged)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.ratio)
    }
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 10.0;

pub fn check_regime(params: &SystemParams, det: &Detunings, eff: &EffectiveParams, threshold: f64) -> RegimeReport {
    let n = params.n_cavities();
    let mut entries = Vec::new();
    let mut push = |name: String, ratio: f64| {
        entries.push(RegimeEntry {
            name,
            ratio,
            flagged: ratio < threshold,
        })
    };
    for j in 0..n {
        push(format!("delta_{0}/g_{0}", j + 1), det.delta[j] / params.g[j]);
    }
    for p in 1..n {
        for q in p + 1..n {
            let (dp, dq) = (det.delta[p], det.delta[q]);
            let lhs = (dp - dq).abs() / (1.0 / dp + 1.0 / dq);
            push(format!("pair_{}{}", p + 1, q + 1), lhs / (params.g[p] * params.g[q]));
        }
    }
    for l in 1..n {
        let k = l - 1;
        let biggest = eff.lambda_1.max(eff.lambda_l[k]).max(eff.lambda_1l[k]);
        push(format!("Delta_1{}/lambda_max", l + 1), det.gate[l] / biggest);
    }
    RegimeReport { threshold, entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianTier {
    /// Qutrit-cavity exchange in the interaction picture.
    Ideal,
    /// Static Stark-shift and cross-Kerr form after adiabatic elimination.
    Dispersive,
    /// Cavity-only `ηn̂₁ + Σχn̂₁n̂_l`.
    Effective,
    /// Ideal terms plus unwanted couplings and crosstalk.
    Full,
}

impl FromStr for HamiltonianTier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "dispersive" => Ok(Self::Dispersive),
            "effective" => Ok(Self::Effective),
            "full" => Ok(Self::Full),
            other => Err(Error::Config(format!("unknown Hamiltonian tier {other:?}"))),
        }
    }
}

impl fmt::Display for HamiltonianTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Ideal => "ideal",
            Self::Dispersive => "dispersive",
            Self::Effective => "effective",
            Self::Full => "full",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toggles {
    #[serde(default)]
    pub unwanted_couplings: bool,
    #[serde(default)]
    pub crosstalk: bool,
}

impl Toggles {
    pub fn all() -> Self {
        Self {
            unwanted_couplings: true,
            crosstalk: true,
        }
    }
}

fn check_layout(params: &SystemParams, layout: &HilbertLayout, needs_qutrit: bool) -> Result<()> {
    if layout.n_cavities() != params.n_cavities() {
        return Err(Error::DimensionMismatch {
            subsystem: "cavity count".into(),
            expected: params.n_cavities(),
            found: layout.n_cavities(),
        });
    }
    if needs_qutrit && !layout.has_qutrit() {
        return Err(Error::Config("this Hamiltonian tier needs the qutrit in the layout".into()));
    }
    Ok(())
}

/// `a_j†` embedded in the layout.
fn creation(layout: &HilbertLayout, j: usize) -> Result<Operator> {
    let m = mode_operators(layout.cavity_dims()[j])?;
    embed(&m.creation, layout.cavity_position(j), layout)
}

fn annihilation(layout: &HilbertLayout, j: usize) -> Result<Operator> {
    let m = mode_operators(layout.cavity_dims()[j])?;
    embed(&m.annihilation, layout.cavity_position(j), layout)
}

/// Diagonal operator with entries `f(multi-index)`.
fn diagonal_from(layout: &HilbertLayout, label: &str, f: impl Fn(&[usize]) -> f64) -> Result<Operator> {
    let diag: Vec<C64> = (0..layout.total_dim())
        .map(|i| C64::new(f(&layout.unflatten(i)), 0.0))
        .collect();
    Operator::new(layout.clone(), CsrMatrix::from_diagonal(&diag), label)
}

pub fn build_hamiltonian(
    tier: HamiltonianTier,
    params: &SystemParams,
    det: &Detunings,
    layout: &HilbertLayout,
    toggles: Toggles,
) -> Result<TimeDependentHamiltonian> {
    let n = params.n_cavities();
    let mut h = TimeDependentHamiltonian::new(layout.clone());
    match tier {
        HamiltonianTier::Ideal | HamiltonianTier::Full => {
            check_layout(params, layout, true)?;
            let q = qutrit_operators();
            let s_fg = embed(&q.sigma_fg, 0, layout)?;
            let s_fe = embed(&q.sigma_fe, 0, layout)?;
            let g1 = C64::new(params.g[0], 0.0);
            h.add_oscillating(creation(layout, 0)?.mul(&s_fg).scale(g1), -det.delta[0])?;
            for l in 1..n {
                let gl = C64::new(params.g[l], 0.0);
                h.add_oscillating(creation(layout, l)?.mul(&s_fe).scale(gl), -det.delta[l])?;
            }
            if tier == HamiltonianTier::Full && toggles.unwanted_couplings {
                let gp = params
                    .g_prime
                    .as_ref()
                    .ok_or_else(|| Error::Config("unwanted couplings enabled but g_prime is absent".into()))?;
                h.add_oscillating(
                    creation(layout, 0)?.mul(&s_fe).scale(C64::new(gp[0], 0.0)),
                    -det.delta_prime[0],
                )?;
                for l in 1..n {
                    h.add_oscillating(
                        creation(layout, l)?.mul(&s_fg).scale(C64::new(gp[l], 0.0)),
                        -det.delta_prime[l],
                    )?;
                }
            }
            if tier == HamiltonianTier::Full && toggles.crosstalk {
                let gc = params
                    .g_cross
                    .as_ref()
                    .ok_or_else(|| Error::Config("crosstalk enabled but g_cross is absent".into()))?;
                for k in 0..n {
                    for l in k + 1..n {
                        let term = creation(layout, k)?
                            .mul(&annihilation(layout, l)?)
                            .scale(C64::new(gc[k][l], 0.0));
                        h.add_oscillating(term, det.cross[k][l])?;
                    }
                }
            }
        }
        HamiltonianTier::Dispersive => {
            check_layout(params, layout, true)?;
            let eff = effective_params(params, det)?;
            let diag = diagonal_from(layout, "H_dispersive", |m| {
                let (q, ns) = (m[0], &m[1..]);
                let n1 = ns[0] as f64;
                let mut v = 0.0;
                match q {
                    G => {
                        v -= eff.lambda_1 * n1;
                        for l in 1..n {
                            v += eff.chi_1l[l - 1] * n1 * (1.0 + ns[l] as f64);
                        }
                    }
                    E => {
                        for l in 1..n {
                            let nl = ns[l] as f64;
                            v -= eff.lambda_l[l - 1] * nl;
                            v -= eff.chi_1l[l - 1] * (1.0 + n1) * nl;
                        }
                    }
                    F => {
                        v += eff.lambda_1 * (1.0 + n1);
                        for l in 1..n {
                            v += eff.lambda_l[l - 1] * (1.0 + ns[l] as f64);
                        }
                    }
                    _ => unreachable!("qutrit level"),
                }
                v
            })?;
            h.add_static(diag)?;
        }
        HamiltonianTier::Effective => {
            check_layout(params, layout, false)?;
            let eff = effective_params(params, det)?;
            let off = usize::from(layout.has_qutrit());
            let diag = diagonal_from(layout, "H_effective", |m| effective_energy(&eff, &m[off..]))?;
            h.add_static(diag)?;
        }
    }
    Ok(h)
}

/// `ηn₁ + Σχ_{1l}n₁n_l` at the given photon numbers.
pub fn effective_energy(eff: &EffectiveParams, photons: &[usize]) -> f64 {
    let n1 = photons[0] as f64;
    eff.eta * n1
        + eff
            .chi_1l
            .iter()
            .zip(&photons[1..])
            .map(|(c, &nl)| c * n1 * nl as f64)
            .sum::<f64>()
}

/// `Q = ω_c κ⁻¹`.
pub fn quality_factor(omega_c: f64, kappa_inverse: f64) -> Result<f64> {
    if !(omega_c > 0.0) || !(kappa_inverse > 0.0) {
        return Err(Error::Config(format!(
            "quality factor needs positive inputs (omega_c = {omega_c}, kappa_inverse = {kappa_inverse})"
        )));
    }
    Ok(omega_c * kappa_inverse)
}

/// Cavity decay and qutrit relaxation/dephasing rates (1/s).
#[derive(Clone, Debug, PartialEq)]
pub struct DecoherenceParams {
    pub t_base: f64,
    pub kappa: Vec<f64>,
    pub gamma_eg: f64,
    pub gamma_fe: f64,
    pub gamma_fg: f64,
    pub gamma_phi_e: f64,
    pub gamma_phi_f: f64,
}

impl DecoherenceParams {
    /// Qutrit rates from the base time `T` and equal cavity lifetimes.
    pub fn from_t(t_base: f64, kappa_inverse: f64, n_cavities: usize) -> Result<Self> {
        if !(t_base > 0.0) || !(kappa_inverse > 0.0) {
            return Err(Error::Config("T and kappa^-1 must be positive".into()));
        }
        Ok(Self {
            t_base,
            kappa: vec![1.0 / kappa_inverse; n_cavities],
            gamma_eg: 1.0 / (10.0 * t_base),
            gamma_fe: 1.0 / t_base,
            gamma_fg: 1.0 / t_base,
            gamma_phi_e: 2.0 / t_base,
            gamma_phi_f: 2.0 / t_base,
        })
    }

    /// All rates zero.
    pub fn none(n_cavities: usize) -> Self {
        Self {
            t_base: f64::INFINITY,
            kappa: vec![0.0; n_cavities],
            gamma_eg: 0.0,
            gamma_fe: 0.0,
            gamma_fg: 0.0,
            gamma_phi_e: 0.0,
            gamma_phi_f: 0.0,
        }
    }
}
