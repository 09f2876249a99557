//! The diagonal cross-Kerr gate on the cavities, its truth table on encoded
//! basis states, and the hybrid/nonhybrid classification of an encoding set.

use std::f64::consts::PI;

use serde::Serialize;

use crate::encoding::ParityEncoding;
use crate::error::{Error, Result};
use crate::hilbert::{tensor_state, CsrMatrix, HilbertLayout, Ket, Operator};
use crate::model::EffectiveParams;
use crate::C64;

/// Largest tolerated eigenvector residual of an encoded basis state.
pub const PHASE_COHERENCE_TOL: f64 = 1e-6;
/// Relative tolerance on `χt = π` and `ηt = 2sπ` for exact specs.
pub const GATE_CONDITION_REL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GateSpec {
    /// Control first, then targets.
    pub encodings: Vec<ParityEncoding>,
    pub chi: Vec<f64>,
    pub eta: f64,
    pub t: f64,
    pub s: i64,
    pub m_or_mprime: u32,
    /// Assemble phases from integer multiples of π.
    pub exact: bool,
}

impl GateSpec {
    /// A spec meeting the gate conditions exactly.
    pub fn exact(encodings: Vec<ParityEncoding>, t: f64, s: i64, m_or_mprime: u32) -> Self {
        let eff = EffectiveParams::exact(encodings.len(), t, s);
        Self {
            encodings,
            chi: eff.chi_1l,
            eta: eff.eta,
            t,
            s,
            m_or_mprime,
            exact: true,
        }
    }

    pub fn n(&self) -> usize {
        self.encodings.len()
    }

    pub fn layout(&self) -> Result<HilbertLayout> {
        let dims: Vec<usize> = self.encodings.iter().map(|e| e.dim()).collect();
        HilbertLayout::cavities_only(&dims)
    }

    /// Exact conditions for `n` cavities without encodings, for gates applied
    /// to arbitrary states.
    pub fn for_cavities(n: usize, t: f64, s: i64) -> Self {
        let eff = EffectiveParams::exact(n, t, s);
        Self {
            encodings: Vec::new(),
            chi: eff.chi_1l,
            eta: eff.eta,
            t,
            s,
            m_or_mprime: 0,
            exact: true,
        }
    }

    pub(crate) fn effective(&self) -> EffectiveParams {
        let k = self.chi.len();
        EffectiveParams {
            lambda_1: -self.eta + self.chi.iter().sum::<f64>(),
            lambda_l: vec![0.0; k],
            lambda_1l: vec![0.0; k],
            chi_1l: self.chi.clone(),
            eta: self.eta,
        }
    }

    pub(crate) fn check_conditions(&self) -> Result<()> {
        if !self.encodings.is_empty() && self.chi.len() + 1 != self.n() {
            return Err(Error::Config(format!(
                "{} cavities need {} cross-Kerr rates, got {}",
                self.n(),
                self.n() - 1,
                self.chi.len()
            )));
        }
        for (l, &chi) in self.chi.iter().enumerate() {
            let rel = (chi * self.t - PI).abs() / PI;
            if rel > GATE_CONDITION_REL_TOL {
                return Err(Error::Consistency(format!(
                    "chi_1{} t = {:.9} differs from pi (relative {rel:.2e})",
                    l + 2,
                    chi * self.t
                )));
            }
        }
        let target = 2.0 * self.s as f64 * PI;
        let scale = target.abs().max(PI);
        let rel = (self.eta * self.t - target).abs() / scale;
        if rel > GATE_CONDITION_REL_TOL {
            return Err(Error::Consistency(format!(
                "eta t = {:.9} differs from 2 s pi with s = {} (relative {rel:.2e})",
                self.eta * self.t,
                self.s
            )));
        }
        Ok(())
    }
}

/// Phases of `exp(−i[η n₁ + Σ χ_{1l} n₁ n_l] t)` on every Fock multi-index.
/// A qutrit factor, if present, is left untouched.
pub fn diagonal_gate(eff: &EffectiveParams, t: f64, layout: &HilbertLayout) -> Result<Operator> {
    let k = eff.n_targets();
    if layout.n_cavities() != k + 1 {
        return Err(Error::DimensionMismatch {
            subsystem: "cavities".into(),
            expected: k + 1,
            found: layout.n_cavities(),
        });
    }
    let eta_t = eff.eta * t;
    let chi_t: Vec<f64> = eff.chi_1l.iter().map(|c| c * t).collect();
    diagonal_from(layout, |n| {
        let n1 = n[0] as f64;
        let phase = eta_t * n1 + chi_t.iter().zip(&n[1..]).map(|(c, &nl)| c * n1 * nl as f64).sum::<f64>();
        C64::from_polar(1.0, -phase)
    })
}

/// The gate under exact conditions: `exp(−iπ[2s n₁ + n₁ Σ n_l]) = (−1)^{n₁ Σ n_l}`.
pub fn exact_diagonal_gate(layout: &HilbertLayout) -> Result<Operator> {
    diagonal_from(layout, |n| {
        let exponent: usize = n[0] * n[1..].iter().sum::<usize>();
        if exponent % 2 == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    })
}

fn diagonal_from(layout: &HilbertLayout, phase: impl Fn(&[usize]) -> C64) -> Result<Operator> {
    let positions: Vec<usize> = (0..layout.n_cavities()).map(|j| layout.cavity_position(j)).collect();
    let mut photons = vec![0; positions.len()];
    let diag: Vec<C64> = (0..layout.total_dim())
        .map(|i| {
            let multi = layout.unflatten(i);
            for (p, &pos) in photons.iter_mut().zip(&positions) {
                *p = multi[pos];
            }
            phase(&photons)
        })
        .collect();
    Operator::new(layout.clone(), CsrMatrix::from_diagonal(&diag), "U_gate")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruthEntry {
    /// Logical values `(i₁, …, i_n)`, control first.
    pub bits: Vec<u8>,
    pub phase: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruthTable {
    pub entries: Vec<TruthEntry>,
}

impl TruthTable {
    pub fn phase(&self, bits: &[u8]) -> Option<C64> {
        self.entries.iter().find(|e| e.bits == bits).map(|e| e.phase)
    }

    /// Largest distance to the multi-target controlled-phase table.
    pub fn deviation_from_ideal(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| (e.phase - ideal_phase(&e.bits)).norm())
            .fold(0.0, f64::max)
    }
}

/// `(−1)^{i₂+…+i_n}` when `i₁ = 1`, else `+1`.
pub fn ideal_phase(bits: &[u8]) -> C64 {
    let flips: u32 = if bits[0] == 1 {
        bits[1..].iter().map(|&b| b as u32).sum()
    } else {
        0
    };
    if flips % 2 == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::new(-1.0, 0.0)
    }
}

/// Logical basis states in binary order, `i₁` most significant.
pub fn logical_basis(encodings: &[ParityEncoding], layout: &HilbertLayout) -> Result<Vec<(Vec<u8>, Ket)>> {
    let n = encodings.len();
    (0..1usize << n)
        .map(|code| {
            let bits: Vec<u8> = (0..n).map(|j| ((code >> (n - 1 - j)) & 1) as u8).collect();
            let parts: Vec<&Ket> = encodings.iter().zip(&bits).map(|(e, &b)| e.logical(b)).collect();
            Ok((bits, tensor_state(&parts, layout)?))
        })
        .collect()
}

/// Applies the gate to every encoded basis state and reads off its phase
/// relative to the largest amplitude. Returns the table and the worst
/// eigenvector residual.
pub fn verify_truth_table(spec: &GateSpec) -> Result<(TruthTable, f64)> {
    let layout = spec.layout()?;
    let gate = if spec.exact {
        spec.check_conditions()?;
        exact_diagonal_gate(&layout)?
    } else {
        diagonal_gate(&spec.effective(), spec.t, &layout)?
    };
    let mut entries = Vec::new();
    let mut worst = 0.0f64;
    for (index, (bits, psi)) in logical_basis(&spec.encodings, &layout)?.into_iter().enumerate() {
        let out = gate.apply(&psi);
        let (k, _) = psi
            .amplitudes()
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, a)| if a.norm() > best.1 { (i, a.norm()) } else { best });
        let ratio = out.amplitudes()[k] / psi.amplitudes()[k];
        let phase = ratio / ratio.norm();
        let deviation = out.distance(&psi.scale(phase));
        if deviation > PHASE_COHERENCE_TOL {
            return Err(Error::PhaseCoherence { index, deviation });
        }
        worst = worst.max(deviation);
        entries.push(TruthEntry { bits, phase });
    }
    Ok((TruthTable { entries }, worst))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hybridization {
    Nonhybrid,
    Partial,
    Maximal,
}

const SAME_ENCODING_TOL: f64 = 1e-8;

fn same_encoding(a: &ParityEncoding, b: &ParityEncoding) -> bool {
    let dim = a.dim().max(b.dim());
    let (Ok(a), Ok(b)) = (a.padded(dim), b.padded(dim)) else {
        return false;
    };
    a.phi_e().inner(b.phi_e()).norm() >= 1.0 - SAME_ENCODING_TOL && a.phi_o().inner(b.phi_o()).norm() >= 1.0 - SAME_ENCODING_TOL
}

pub fn hybridization_class(encodings: &[ParityEncoding]) -> Hybridization {
    let n = encodings.len();
    let mut equal_pairs = 0;
    let mut pairs = 0;
    for i in 0..n {
        for j in i + 1..n {
            pairs += 1;
            if same_encoding(&encodings[i], &encodings[j]) {
                equal_pairs += 1;
            }
        }
    }
    if equal_pairs == pairs {
        Hybridization::Nonhybrid
    } else if equal_pairs == 0 {
        Hybridization::Maximal
    } else {
        Hybridization::Partial
    }
}
