//! GHZ states of the cavities produced by one application of the gate:
//! scenario construction, ideal preparation through the diagonal gate, and
//! lossy preparation under the full Hamiltonian.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    evolve_lindblad_observed, evolve_schrodinger_observed, CollapseChannel, IntegratorConfig, Trajectory,
};
use crate::encoding::{logical_rotation, make_encoding_with_tail_limit, rotated_states, EncodingFamilySpec, ParityEncoding};
use crate::error::{Error, Result};
use crate::gate::{diagonal_gate, exact_diagonal_gate, hybridization_class, GateSpec, Hybridization};
use crate::hilbert::{coherent_state, embed, qutrit_operators, tensor_state, DensityMatrix, HilbertLayout, Ket, Operator, G};
use crate::model::{
    build_hamiltonian, derive_detunings, effective_params, DecoherenceParams, HamiltonianTier, SystemParams, Toggles,
};
use crate::C64;

/// Bound on `|⟨α|−α⟩|²` below which coherent branches count as distinguishable.
pub const QUASI_ORTHOGONALITY_LIMIT: f64 = 1e-2;
/// Default bound on the summed `|e⟩ + |f⟩` population during a full run.
pub const EXCITED_POPULATION_LIMIT: f64 = 5e-2;
/// Discarded-norm bound for coherent and cat components of scenarios. Coarse
/// sweep truncations lose more than the encoding default; the loss is kept
/// on the scenario and reported.
pub const SCENARIO_TAIL_LIMIT: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzKind {
    General,
    Nonhybrid,
    CatCoherent,
    CatSpin,
    SpinCoherent,
}

impl FromStr for GhzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "nonhybrid" => Ok(Self::Nonhybrid),
            "cat_coherent" => Ok(Self::CatCoherent),
            "cat_spin" => Ok(Self::CatSpin),
            "spin_coherent" => Ok(Self::SpinCoherent),
            other => Err(Error::Config(format!("unknown GHZ scenario kind {other:?}"))),
        }
    }
}

/// What a scenario is built from: explicit encodings for `general` and
/// `nonhybrid`, a coherent amplitude for the others.
#[derive(Clone, Debug)]
pub enum ScenarioInput {
    Encodings(Vec<ParityEncoding>),
    Alpha(C64),
}

#[derive(Clone, Debug)]
pub struct GhzScenario {
    pub kind: GhzKind,
    pub encodings: Vec<ParityEncoding>,
    pub n: usize,
    pub alpha: Option<C64>,
    pub x: f64,
    /// Qutrit first, then the cavities.
    pub layout: HilbertLayout,
    pub initial: Ket,
    /// Cavity-only GHZ state.
    pub target: Ket,
    /// `target ⊗ |g⟩`.
    pub target_full: Ket,
    /// For `nonhybrid`: the GHZ state after the logical rotation of the targets.
    pub target_rotated: Option<Ket>,
    /// `|⟨α|−α⟩|²` of the truncated coherent states, where they occur.
    pub quasi_orthogonality: Option<f64>,
    /// Largest discarded norm among the single-cavity components.
    pub tail_mass: f64,
}

fn sqrt_half() -> C64 {
    C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

fn check_dims(encodings: &[ParityEncoding], dims: &[usize]) -> Result<Vec<ParityEncoding>> {
    if encodings.len() != dims.len() {
        return Err(Error::Config(format!(
            "{} encodings for {} cavities",
            encodings.len(),
            dims.len()
        )));
    }
    encodings.iter().zip(dims).map(|(e, &d)| e.padded(d)).collect()
}

/// `(a ⊗ b₂ ⊗ … + c ⊗ d₂ ⊗ …)/√2` on the cavities.
fn two_branch(first: [&Ket; 2], rest: [&[Ket]; 2], layout: &HilbertLayout) -> Result<Ket> {
    let branch = |k: usize| -> Result<Ket> {
        let mut parts: Vec<&Ket> = vec![first[k]];
        parts.extend(rest[k].iter());
        tensor_state(&parts, layout)
    };
    let sum = branch(0)?.add_scaled(&branch(1)?, C64::new(1.0, 0.0)).scale(sqrt_half());
    Ok(sum.normalized())
}

/// `|g⟩ ⊗ ψ` for a cavity-only `ψ`; the qutrit is the slowest index.
fn ground_times(psi: &Ket, layout: &HilbertLayout) -> Result<Ket> {
    let mut amps = vec![C64::new(0.0, 0.0); layout.total_dim()];
    let d = psi.dim();
    amps[G * d..(G + 1) * d].copy_from_slice(psi.amplitudes());
    Ket::new(layout.clone(), amps)
}

fn with_ground(cavities: &[Ket], layout: &HilbertLayout) -> Result<Ket> {
    let g = Ket::qutrit(G);
    let mut parts: Vec<&Ket> = vec![&g];
    parts.extend(cavities.iter());
    tensor_state(&parts, layout)
}

pub fn build_scenario(kind: GhzKind, input: ScenarioInput, x: f64, layout: &HilbertLayout) -> Result<GhzScenario> {
    if !layout.has_qutrit() {
        return Err(Error::Config("GHZ scenarios need the qutrit in the layout".into()));
    }
    let n = layout.n_cavities();
    if n < 2 {
        return Err(Error::Config(format!("GHZ scenarios need at least two cavities, got {n}")));
    }
    if x != 0.0 && kind != GhzKind::SpinCoherent {
        return Err(Error::Config(format!("initial-state imperfection x applies to spin_coherent only, not {kind:?}")));
    }
    if !(x.abs() < 1.0) {
        return Err(Error::Config(format!("x = {x} must lie in (-1, 1)")));
    }
    let dims = layout.cavity_dims().to_vec();
    let cav_layout = layout.without_qutrit()?;
    let alpha = match (&input, kind) {
        (ScenarioInput::Alpha(a), GhzKind::CatCoherent | GhzKind::CatSpin | GhzKind::SpinCoherent) => Some(*a),
        (ScenarioInput::Encodings(_), GhzKind::General | GhzKind::Nonhybrid) => None,
        _ => return Err(Error::Config(format!("scenario kind {kind:?} does not accept this input"))),
    };
    let cat = |d: usize| make_encoding_with_tail_limit(&EncodingFamilySpec::CatPair { alpha: alpha.unwrap() }, d, SCENARIO_TAIL_LIMIT);
    let fock = |d: usize| make_encoding_with_tail_limit(&EncodingFamilySpec::Fock01, d, SCENARIO_TAIL_LIMIT);
    let encodings: Vec<ParityEncoding> = match (&input, kind) {
        (ScenarioInput::Encodings(e), GhzKind::General) => check_dims(e, &dims)?,
        (ScenarioInput::Encodings(e), _) => {
            let e = check_dims(e, &dims)?;
            if hybridization_class(&e) != Hybridization::Nonhybrid {
                return Err(Error::Config("nonhybrid scenario needs identical encodings".into()));
            }
            e
        }
        (_, GhzKind::CatCoherent) => dims.iter().map(|&d| cat(d)).collect::<Result<_>>()?,
        (_, GhzKind::CatSpin) => std::iter::once(cat(dims[0]))
            .chain(dims[1..].iter().map(|&d| fock(d)))
            .collect::<Result<_>>()?,
        (_, _) => std::iter::once(fock(dims[0]))
            .chain(dims[1..].iter().map(|&d| cat(d)))
            .collect::<Result<_>>()?,
    };
    let plus_minus: Vec<(Ket, Ket)> = encodings.iter().map(rotated_states).collect();
    let coherent = |sign: f64, d: usize| coherent_state(alpha.unwrap() * sign, d);
    let control = &encodings[0];

    // single-cavity initial states and the two target branches
    let (initial_parts, branch_targets): (Vec<Ket>, [Vec<Ket>; 2]) = match kind {
        GhzKind::General | GhzKind::Nonhybrid | GhzKind::CatSpin => (
            plus_minus.iter().map(|(p, _)| p.clone()).collect(),
            [
                plus_minus[1..].iter().map(|(p, _)| p.clone()).collect(),
                plus_minus[1..].iter().map(|(_, m)| m.clone()).collect(),
            ],
        ),
        GhzKind::CatCoherent | GhzKind::SpinCoherent => {
            let plus_a: Vec<Ket> = dims[1..].iter().map(|&d| coherent(1.0, d)).collect::<Result<_>>()?;
            let minus_a: Vec<Ket> = dims[1..].iter().map(|&d| coherent(-1.0, d)).collect::<Result<_>>()?;
            let first = if kind == GhzKind::SpinCoherent {
                let nx = 1.0 / (2.0 * (1.0 + x * x)).sqrt();
                control
                    .phi_e()
                    .scale(C64::new(nx * (1.0 + x), 0.0))
                    .add_scaled(control.phi_o(), C64::new(nx * (1.0 - x), 0.0))
            } else {
                plus_minus[0].0.clone()
            };
            let mut parts = vec![first];
            parts.extend(plus_a.iter().cloned());
            (parts, [plus_a, minus_a])
        }
    };
    let initial = with_ground(&initial_parts, layout)?;
    let target = two_branch(
        [control.phi_e(), control.phi_o()],
        [&branch_targets[0], &branch_targets[1]],
        &cav_layout,
    )?;
    let target_full = ground_times(&target, layout)?;
    let target_rotated = if kind == GhzKind::Nonhybrid {
        let e: Vec<Ket> = encodings[1..].iter().map(|e| e.phi_e().clone()).collect();
        let o: Vec<Ket> = encodings[1..].iter().map(|e| e.phi_o().clone()).collect();
        Some(two_branch([control.phi_e(), control.phi_o()], [&e, &o], &cav_layout)?)
    } else {
        None
    };
    let quasi_orthogonality = match alpha {
        Some(_) if kind != GhzKind::CatSpin => {
            let d = dims[1];
            let q = coherent(1.0, d)?.inner(&coherent(-1.0, d)?).norm_sqr();
            if q > QUASI_ORTHOGONALITY_LIMIT {
                log::warn!("|<alpha|-alpha>|^2 = {q:.3e} exceeds {QUASI_ORTHOGONALITY_LIMIT:e}; coherent branches overlap");
            }
            Some(q)
        }
        _ => None,
    };
    let tail_mass = initial_parts
        .iter()
        .chain(encodings.iter().flat_map(|e| [e.phi_e(), e.phi_o()]))
        .map(|k| k.tail_mass())
        .fold(0.0, f64::max);
    Ok(GhzScenario {
        kind,
        encodings,
        n,
        alpha,
        x,
        layout: layout.clone(),
        initial,
        target,
        target_full,
        target_rotated,
        quasi_orthogonality,
        tail_mass,
    })
}

impl GhzScenario {
    /// Applies the logical rotation of every target cavity to a cavity-only state.
    pub fn rotate_targets(&self, cavities: &Ket) -> Result<Ket> {
        let layout = cavities.layout().clone();
        let mut out = cavities.clone();
        for (j, enc) in self.encodings.iter().enumerate().skip(1) {
            let r = embed(&logical_rotation(enc), layout.cavity_position(j), &layout)?;
            out = r.apply(&out);
        }
        Ok(out)
    }
}

/// Applies the diagonal gate to the initial state (the qutrit stays in
/// `|g⟩`) and returns the result with its overlap against `target_full`.
pub fn prepare_ideal(scenario: &GhzScenario, gate: &GateSpec) -> Result<(Ket, f64)> {
    let u = if gate.exact {
        gate.check_conditions()?;
        exact_diagonal_gate(&scenario.layout)?
    } else {
        diagonal_gate(&gate.effective(), gate.t, &scenario.layout)?
    };
    let out = u.apply(&scenario.initial);
    let f = scenario.target_full.inner(&out).norm();
    Ok((out, f))
}

/// Collapse channels and dephasing projectors of the master equation on `layout`.
pub fn dissipators(layout: &HilbertLayout, dec: &DecoherenceParams) -> Result<(Vec<CollapseChannel>, Vec<(Operator, f64)>)> {
    let n = layout.n_cavities();
    if dec.kappa.len() != n {
        return Err(Error::Config(format!("{} cavity decay rates for {n} cavities", dec.kappa.len())));
    }
    let q = qutrit_operators();
    let qpos = layout
        .qutrit_position()
        .ok_or_else(|| Error::Config("dissipators need the qutrit in the layout".into()))?;
    let mut channels = Vec::new();
    for (j, &kappa) in dec.kappa.iter().enumerate() {
        let pos = layout.cavity_position(j);
        let a = crate::hilbert::mode_operators(layout.dims()[pos])?.annihilation;
        channels.push(CollapseChannel::new(embed(&a, pos, layout)?, kappa)?);
    }
    for (op, rate) in [(&q.sigma_eg, dec.gamma_eg), (&q.sigma_fe, dec.gamma_fe), (&q.sigma_fg, dec.gamma_fg)] {
        channels.push(CollapseChannel::new(embed(op, qpos, layout)?, rate)?);
    }
    let dephasing = vec![
        (embed(&q.proj_ee, qpos, layout)?, dec.gamma_phi_e),
        (embed(&q.proj_ff, qpos, layout)?, dec.gamma_phi_f),
    ];
    Ok((channels, dephasing))
}

/// Duration `π/χ₁₂` of the gate for `params`.
pub fn gate_duration(params: &SystemParams) -> Result<f64> {
    let det = derive_detunings(params)?;
    effective_params(params, &det)?.gate_time()
}

/// Evolves `|initial⟩⟨initial|` under the full Hamiltonian and every
/// dissipator for `t = π/χ₁₂`, recording the fidelity against `target_full`.
pub fn prepare_full(
    scenario: &GhzScenario,
    params: &SystemParams,
    dec: &DecoherenceParams,
    toggles: Toggles,
    cfg: &IntegratorConfig,
) -> Result<(DensityMatrix, Trajectory)> {
    if scenario.n != params.n_cavities() {
        return Err(Error::Config(format!(
            "scenario has {} cavities, parameters {}",
            scenario.n,
            params.n_cavities()
        )));
    }
    let det = derive_detunings(params)?;
    let t = effective_params(params, &det)?.gate_time()?;
    let h = build_hamiltonian(HamiltonianTier::Full, params, &det, &scenario.layout, toggles)?;
    let (channels, dephasing) = dissipators(&scenario.layout, dec)?;
    let rho0 = DensityMatrix::from_ket(&scenario.initial);
    let (rho, traj) = evolve_lindblad_observed(&h, &channels, &dephasing, &rho0, t, cfg, Some(&scenario.target_full))?;
    warn_if_excited(&traj, EXCITED_POPULATION_LIMIT);
    Ok((rho, traj))
}

/// Dissipation-free evolution of the initial state under `tier` for `t`.
pub fn prepare_pure(
    scenario: &GhzScenario,
    params: &SystemParams,
    tier: HamiltonianTier,
    toggles: Toggles,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<(Ket, Trajectory)> {
    let det = derive_detunings(params)?;
    let h = build_hamiltonian(tier, params, &det, &scenario.layout, toggles)?;
    let out = evolve_schrodinger_observed(&h, &scenario.initial, t, cfg, Some(&scenario.target_full))?;
    warn_if_excited(&out.1, EXCITED_POPULATION_LIMIT);
    Ok(out)
}

/// Whether the qutrit stayed mostly in `|g⟩`; logs a warning otherwise.
pub fn warn_if_excited(traj: &Trajectory, limit: f64) -> bool {
    match traj.max_excited_population() {
        Some(p) if p > limit => {
            log::warn!("qutrit |e>+|f> population reached {p:.3e} (limit {limit:e})");
            false
        }
        _ => true,
    }
}
