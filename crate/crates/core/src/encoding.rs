//! Photonic-qubit encodings in two opposite-parity eigenstates of a cavity.
//!
//! Logical `|0⟩` is an even-parity state `phi_e` and logical `|1⟩` an
//! odd-parity state `phi_o`. Seven construction families are provided; every
//! constructed pair is checked against the parity, orthogonality,
//! normalization and truncation-tail tolerances before it is returned.

use crate::error::{Error, Result};
use crate::hilbert::{mode_operators, HilbertLayout, Ket, Operator, CsrMatrix, TAIL_LIMIT};
use crate::C64;
use num_complex::ComplexFloat;
use serde::{Deserialize, Serialize};

pub const PARITY_TOL: f64 = 1e-9;
pub const OVERLAP_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-9;

/// Extra levels used to measure how much of a state the truncation drops.
const TAIL_PROBE_LEVELS: usize = 160;

/// Family and parameters of an encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EncodingFamilySpec {
    /// `|0⟩`, `|1⟩`.
    Fock01,
    /// `|2m⟩`, `|2n+1⟩`.
    FockPair { m: usize, n: usize },
    /// `c0|0⟩ + c2|2⟩ + …` and `c1|1⟩ + c3|3⟩ + …`; `even[k]` multiplies
    /// `|2k⟩`, `odd[k]` multiplies `|2k+1⟩`.
    FockSuperposition { even: Vec<C64>, odd: Vec<C64> },
    /// Even and odd cats `|α⟩ ± |−α⟩`.
    CatPair { alpha: C64 },
    /// `c0|2m⟩ + c1(|α⟩+|−α⟩)` and `d0|2n+1⟩ + d1(|α⟩−|−α⟩)`.
    FockCatMix {
        m: usize,
        n: usize,
        c: [C64; 2],
        d: [C64; 2],
        alpha: C64,
    },
    /// Squeezed vacuum `S(ξ)|0⟩` with `ξ = r e^{iθ}` against the odd cat.
    SqueezedVsCat { r: f64, theta: f64, alpha: C64 },
    /// `c0(|α⟩+|−α⟩) + c1(|iα⟩+|−iα⟩)` and `d0(|α⟩−|−α⟩) + d1(|iα⟩−|−iα⟩)`.
    MulticomponentCat { alpha: C64, c: [C64; 2], d: [C64; 2] },
}

impl EncodingFamilySpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Fock01 => "fock01",
            Self::FockPair { .. } => "fock_pair",
            Self::FockSuperposition { .. } => "fock_superposition",
            Self::CatPair { .. } => "cat_pair",
            Self::FockCatMix { .. } => "fock_cat_mix",
            Self::SqueezedVsCat { .. } => "squeezed_vs_cat",
            Self::MulticomponentCat { .. } => "multicomponent_cat",
        }
    }

    /// One representative parameter choice per family.
    pub fn catalogue() -> Vec<Self> {
        let one = C64::new(1.0, 0.0);
        let alpha = C64::new(1.1, 0.0);
        vec![
            Self::Fock01,
            Self::FockPair { m: 1, n: 1 },
            Self::FockSuperposition {
                even: vec![one, C64::new(0.5, 0.2), C64::new(-0.3, 0.0)],
                odd: vec![C64::new(0.8, 0.0), C64::new(0.0, -0.6)],
            },
            Self::CatPair { alpha },
            Self::FockCatMix {
                m: 1,
                n: 0,
                c: [C64::new(0.6, 0.0), C64::new(0.8, 0.0)],
                d: [C64::new(0.5, 0.0), C64::new(0.0, 0.7)],
                alpha,
            },
            Self::SqueezedVsCat {
                r: 0.3,
                theta: 0.0,
                alpha,
            },
            Self::MulticomponentCat {
                alpha,
                c: [one, C64::new(0.5, 0.0)],
                d: [one, C64::new(0.0, 0.5)],
            },
        ]
    }
}

/// A validated pair of opposite-parity single-mode states.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityEncoding {
    phi_e: Ket,
    phi_o: Ket,
    family_label: String,
}

impl ParityEncoding {
    /// Wraps two states without validating them. Use [`validate_encoding`] to
    /// check the result.
    pub fn from_states(phi_e: Ket, phi_o: Ket, family_label: impl Into<String>) -> Result<Self> {
        if phi_e.dim() != phi_o.dim() {
            return Err(Error::DimensionMismatch {
                subsystem: "encoding pair".into(),
                expected: phi_e.dim(),
                found: phi_o.dim(),
            });
        }
        Ok(Self {
            phi_e,
            phi_o,
            family_label: family_label.into(),
        })
    }

    pub fn phi_e(&self) -> &Ket {
        &self.phi_e
    }

    pub fn phi_o(&self) -> &Ket {
        &self.phi_o
    }

    pub fn dim(&self) -> usize {
        self.phi_e.dim()
    }

    pub fn family_label(&self) -> &str {
        &self.family_label
    }

    /// Logical basis state: `phi_e` for bit 0, `phi_o` for bit 1.
    pub fn logical(&self, bit: u8) -> &Ket {
        if bit == 0 {
            &self.phi_e
        } else {
            &self.phi_o
        }
    }

    /// Same encoding zero-padded to a larger truncation.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        Ok(Self {
            phi_e: crate::hilbert::resize_mode(&self.phi_e, dim)?,
            phi_o: crate::hilbert::resize_mode(&self.phi_o, dim)?,
            family_label: self.family_label.clone(),
        })
    }
}

/// Untruncated-coherent amplitudes `e^{−|α|²/2} αⁿ/√n!` for `n < len`.
fn coherent_amplitudes(alpha: C64, len: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(len);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..len {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// `|α⟩ + s|−α⟩` amplitudes (unnormalized), `s = ±1`.
fn cat_amplitudes(alpha: C64, sign: f64, len: usize) -> Vec<C64> {
    coherent_amplitudes(alpha, len)
        .into_iter()
        .enumerate()
        .map(|(n, c)| {
            let p = if n % 2 == 0 { 1.0 } else { -1.0 };
            c * (1.0 + sign * p)
        })
        .collect()
}

fn fock_amplitudes(n: usize, len: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); len];
    v[n] = C64::new(1.0, 0.0);
    v
}

/// Squeezed vacuum `S(ξ)|0⟩`, `S(ξ) = exp[(ξ* a² − ξ a†²)/2]`.
fn squeezed_vacuum_amplitudes(r: f64, theta: f64, len: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); len];
    let ratio = -C64::from_polar(r.tanh(), theta);
    let mut c = C64::new(r.cosh().powf(-0.5), 0.0);
    let mut k = 0;
    while 2 * k < len {
        if k > 0 {
            let two_k = (2 * k) as f64;
            c = c * ratio * ((two_k - 1.0) / two_k).sqrt();
        }
        v[2 * k] = c;
        k += 1;
    }
    v
}

fn combine(terms: &[(C64, Vec<C64>)], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    for (w, v) in terms {
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// Truncates a long amplitude vector to `dim`, renormalizes, and records the
/// discarded fraction of the norm.
fn truncate(amps: Vec<C64>, dim: usize, what: &str, limit: f64) -> Result<Ket> {
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::Config(format!("{what} has zero norm")));
    }
    let kept: f64 = amps[..dim].iter().map(|a| a.norm_sqr()).sum();
    let tail = (total - kept).max(0.0) / total;
    if tail > limit {
        return Err(Error::Truncation { tail, limit, dim });
    }
    let scale = 1.0 / kept.sqrt();
    let v: Vec<C64> = amps[..dim].iter().map(|a| a * scale).collect();
    Ok(Ket::new(HilbertLayout::single_mode(dim)?, v)?.with_tail_mass(tail))
}

fn check_alpha(alpha: C64) -> Result<()> {
    if alpha.norm() == 0.0 {
        Err(Error::Config("cat families require |alpha| > 0".into()))
    } else {
        Ok(())
    }
}

fn check_level(level: usize, dim: usize) -> Result<()> {
    if level >= dim {
        Err(Error::InvalidDimension {
            what: format!("Fock level {level} in truncation"),
            dim,
        })
    } else {
        Ok(())
    }
}

/// Builds and validates an encoding from its family parameters.
pub fn make_encoding(spec: &EncodingFamilySpec, dim: usize) -> Result<ParityEncoding> {
    make_encoding_with_tail_limit(spec, dim, TAIL_LIMIT)
}

/// As [`make_encoding`] with a caller-chosen bound on the discarded norm, for
/// deliberately coarse truncations. The discarded mass stays on the states.
pub fn make_encoding_with_tail_limit(spec: &EncodingFamilySpec, dim: usize, tail_limit: f64) -> Result<ParityEncoding> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            what: "encoding truncation".into(),
            dim,
        });
    }
    let alpha_extent = |a: C64| (4.0 * a.norm_sqr()).ceil() as usize;
    let len = match spec {
        EncodingFamilySpec::CatPair { alpha }
        | EncodingFamilySpec::FockCatMix { alpha, .. }
        | EncodingFamilySpec::SqueezedVsCat { alpha, .. }
        | EncodingFamilySpec::MulticomponentCat { alpha, .. } => dim + TAIL_PROBE_LEVELS + alpha_extent(*alpha),
        _ => dim + TAIL_PROBE_LEVELS,
    };
    let (e, o) = match spec {
        EncodingFamilySpec::Fock01 => (fock_amplitudes(0, len), fock_amplitudes(1, len)),
        EncodingFamilySpec::FockPair { m, n } => {
            check_level(2 * m, dim)?;
            check_level(2 * n + 1, dim)?;
            (fock_amplitudes(2 * m, len), fock_amplitudes(2 * n + 1, len))
        }
        EncodingFamilySpec::FockSuperposition { even, odd } => {
            if even.is_empty() || odd.is_empty() {
                return Err(Error::Config("fock_superposition needs even and odd coefficients".into()));
            }
            check_level(2 * (even.len() - 1), dim)?;
            check_level(2 * (odd.len() - 1) + 1, dim)?;
            let mut e = vec![C64::new(0.0, 0.0); len];
            let mut o = vec![C64::new(0.0, 0.0); len];
            for (k, c) in even.iter().enumerate() {
                e[2 * k] = *c;
            }
            for (k, c) in odd.iter().enumerate() {
                o[2 * k + 1] = *c;
            }
            (e, o)
        }
        EncodingFamilySpec::CatPair { alpha } => {
            check_alpha(*alpha)?;
            (cat_amplitudes(*alpha, 1.0, len), cat_amplitudes(*alpha, -1.0, len))
        }
        EncodingFamilySpec::FockCatMix { m, n, c, d, alpha } => {
            check_alpha(*alpha)?;
            check_level(2 * m, dim)?;
            check_level(2 * n + 1, dim)?;
            (
                combine(&[(c[0], fock_amplitudes(2 * m, len)), (c[1], cat_amplitudes(*alpha, 1.0, len))], len),
                combine(&[(d[0], fock_amplitudes(2 * n + 1, len)), (d[1], cat_amplitudes(*alpha, -1.0, len))], len),
            )
        }
        EncodingFamilySpec::SqueezedVsCat { r, theta, alpha } => {
            check_alpha(*alpha)?;
            (squeezed_vacuum_amplitudes(*r, *theta, len), cat_amplitudes(*alpha, -1.0, len))
        }
        EncodingFamilySpec::MulticomponentCat { alpha, c, d } => {
            check_alpha(*alpha)?;
            let i_alpha = *alpha * C64::i();
            (
                combine(
                    &[(c[0], cat_amplitudes(*alpha, 1.0, len)), (c[1], cat_amplitudes(i_alpha, 1.0, len))],
                    len,
                ),
                combine(
                    &[(d[0], cat_amplitudes(*alpha, -1.0, len)), (d[1], cat_amplitudes(i_alpha, -1.0, len))],
                    len,
                ),
            )
        }
    };
    let enc = ParityEncoding {
        phi_e: truncate(e, dim, "phi_e", tail_limit)?,
        phi_o: truncate(o, dim, "phi_o", tail_limit)?,
        family_label: spec.label().to_string(),
    };
    let report = validate_encoding_with_tail_limit(&enc, tail_limit);
    if !report.passed {
        return Err(Error::Consistency(format!(
            "{} encoding failed validation: {report:?}",
            spec.label()
        )));
    }
    Ok(enc)
}

/// Residuals of an encoding against the parity-qubit invariants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EncodingReport {
    pub family: String,
    /// `‖π φ_e − φ_e‖`
    pub parity_residual_e: f64,
    /// `‖π φ_o + φ_o‖`
    pub parity_residual_o: f64,
    /// `|⟨φ_e|φ_o⟩|`
    pub overlap: f64,
    pub norm_e: f64,
    pub norm_o: f64,
    pub tail_e: f64,
    pub tail_o: f64,
    pub passed: bool,
}

pub fn validate_encoding(enc: &ParityEncoding) -> EncodingReport {
    validate_encoding_with_tail_limit(enc, TAIL_LIMIT)
}

pub fn validate_encoding_with_tail_limit(enc: &ParityEncoding, tail_limit: f64) -> EncodingReport {
    let parity = mode_operators(enc.dim())
        .expect("encoding dimension is at least 2")
        .parity;
    let pe = parity.apply(&enc.phi_e);
    let po = parity.apply(&enc.phi_o);
    let parity_residual_e = pe.distance(&enc.phi_e);
    let parity_residual_o = po.distance(&enc.phi_o.scale(C64::new(-1.0, 0.0)));
    let overlap = enc.phi_e.inner(&enc.phi_o).abs();
    let norm_e = enc.phi_e.norm();
    let norm_o = enc.phi_o.norm();
    let (tail_e, tail_o) = (enc.phi_e.tail_mass(), enc.phi_o.tail_mass());
    let passed = parity_residual_e <= PARITY_TOL
        && parity_residual_o <= PARITY_TOL
        && overlap <= OVERLAP_TOL
        && (norm_e - 1.0).abs() <= NORM_TOL
        && (norm_o - 1.0).abs() <= NORM_TOL
        && tail_e <= tail_limit
        && tail_o <= tail_limit;
    EncodingReport {
        family: enc.family_label.clone(),
        parity_residual_e,
        parity_residual_o,
        overlap,
        norm_e,
        norm_o,
        tail_e,
        tail_o,
        passed,
    }
}

/// `(φ_e ± φ_o)/√2`.
pub fn rotated_states(enc: &ParityEncoding) -> (Ket, Ket) {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let plus = enc.phi_e.add_scaled(&enc.phi_o, C64::new(1.0, 0.0)).scale(s);
    let minus = enc.phi_e.add_scaled(&enc.phi_o, C64::new(-1.0, 0.0)).scale(s);
    (plus, minus)
}

/// Unitary taking `|+⟩ → φ_e` and `|−⟩ → φ_o`, identity off the logical
/// subspace.
pub fn logical_rotation(enc: &ParityEncoding) -> Operator {
    let d = enc.dim();
    let (plus, minus) = rotated_states(enc);
    let (e, o) = (enc.phi_e.amplitudes(), enc.phi_o.amplitudes());
    let (p, m) = (plus.amplitudes(), minus.amplitudes());
    let mut dense = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            let id = if i == j { 1.0 } else { 0.0 };
            dense[i * d + j] = C64::new(id, 0.0) - e[i] * e[j].conj() - o[i] * o[j].conj()
                + e[i] * p[j].conj()
                + o[i] * m[j].conj();
        }
    }
    Operator::new(
        enc.phi_e.layout().clone(),
        CsrMatrix::from_dense(d, d, &dense),
        format!("R[{}]", enc.family_label),
    )
    .expect("logical rotation is square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::coherent_state;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn fock01_is_vacuum_and_single_photon() {
        let enc = make_encoding(&EncodingFamilySpec::Fock01, 4).unwrap();
        assert_eq!(enc.phi_e(), &Ket::fock(4, 0).unwrap());
        assert_eq!(enc.phi_o(), &Ket::fock(4, 1).unwrap());
        let r = validate_encoding(&enc);
        assert_eq!(r.parity_residual_e, 0.0);
        assert_eq!(r.parity_residual_o, 0.0);
        assert_eq!(r.overlap, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn cat_normalization_matches_closed_form() {
        let alpha = 1.1f64;
        let enc = make_encoding(&EncodingFamilySpec::CatPair { alpha: c(alpha) }, 16).unwrap();
        assert_abs_diff_eq!(enc.phi_e().norm(), 1.0, epsilon = 1e-8);
        // closed-form even-cat normalization N = 1/sqrt(2(1+e^{-2|α|²}))
        let n_even = 1.0 / (2.0 * (1.0 + (-2.0 * alpha * alpha).exp())).sqrt();
        let a = coherent_state(c(alpha), 16).unwrap();
        let b = coherent_state(c(-alpha), 16).unwrap();
        let manual = a.add_scaled(&b, c(1.0)).scale(c(n_even));
        assert!(manual.distance(enc.phi_e()) < 1e-8);
        let n_odd = 1.0 / (2.0 * (1.0 - (-2.0 * alpha * alpha).exp())).sqrt();
        let manual_odd = a.add_scaled(&b, c(-1.0)).scale(c(n_odd));
        assert!(manual_odd.distance(enc.phi_o()) < 1e-8);
        assert!(validate_encoding(&enc).overlap <= 1e-10);
    }

    #[test]
    fn squeezed_vacuum_is_even() {
        let enc = make_encoding(
            &EncodingFamilySpec::SqueezedVsCat {
                r: 0.5,
                theta: 0.3,
                alpha: c(1.1),
            },
            40,
        )
        .unwrap();
        for (n, a) in enc.phi_e().amplitudes().iter().enumerate() {
            if n % 2 == 1 {
                assert_eq!(*a, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn squeezed_vacuum_matches_operator_exponential() {
        // S(ξ)|0⟩ via dense Taylor series of the generator in a large space
        let (r, theta, dim, big) = (0.4, 0.7, 20, 80);
        let xi = C64::from_polar(r, theta);
        let m = mode_operators(big).unwrap();
        let a2 = m.annihilation.mul(&m.annihilation);
        let ad2 = m.creation.mul(&m.creation);
        let gen = a2.scale(xi.conj() * 0.5).sub(&ad2.scale(xi * 0.5));
        let mut term = Ket::fock(big, 0).unwrap();
        let mut sum = term.clone();
        for k in 1..200 {
            term = gen.apply(&term).scale(c(1.0 / k as f64));
            sum = sum.add_scaled(&term, c(1.0));
        }
        let enc = make_encoding(&EncodingFamilySpec::SqueezedVsCat { r, theta, alpha: c(1.0) }, dim).unwrap();
        for n in 0..dim {
            assert_abs_diff_eq!(
                (enc.phi_e().amplitudes()[n] - sum.amplitudes()[n]).norm(),
                0.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn corrupted_encoding_fails_validation() {
        let enc = make_encoding(&EncodingFamilySpec::Fock01, 4).unwrap();
        let bad = ParityEncoding::from_states(enc.phi_e().clone(), enc.phi_e().clone(), "bad").unwrap();
        let r = validate_encoding(&bad);
        assert_abs_diff_eq!(r.overlap, 1.0, epsilon = 1e-15);
        assert!(!r.passed);
    }

    #[test]
    fn rotated_states_of_fock01() {
        let enc = make_encoding(&EncodingFamilySpec::Fock01, 3).unwrap();
        let (plus, minus) = rotated_states(&enc);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(plus.amplitudes()[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(plus.amplitudes()[1].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(minus.amplitudes()[1].re, -s, epsilon = 1e-15);
        assert_eq!(plus.inner(&minus).norm(), 0.0);
    }

    #[test]
    fn cat_plus_combination_recovers_coherent_state() {
        // |α⟩ = w_e |cat⟩ + w_o |c̄at⟩ with w = sqrt((1 ± e^{-2|α|²})/2)
        let alpha = 1.1f64;
        let enc = make_encoding(&EncodingFamilySpec::CatPair { alpha: c(alpha) }, 16).unwrap();
        let x = (-2.0 * alpha * alpha).exp();
        let we = ((1.0 + x) / 2.0).sqrt();
        let wo = ((1.0 - x) / 2.0).sqrt();
        let recon = enc.phi_e().scale(c(we)).add_scaled(enc.phi_o(), c(wo));
        let coh = coherent_state(c(alpha), 16).unwrap();
        assert!(recon.inner(&coh).norm() >= 1.0 - 1e-6);
        // the equal-weight rotated state is close to, not equal to, |α⟩
        let (plus, _) = rotated_states(&enc);
        assert_abs_diff_eq!(plus.inner(&coh).norm(), (we + wo) / 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn logical_rotation_maps_plus_to_phi_e() {
        for spec in EncodingFamilySpec::catalogue() {
            let enc = make_encoding(&spec, 24).unwrap();
            let u = logical_rotation(&enc);
            let (plus, minus) = rotated_states(&enc);
            assert!(u.apply(&plus).distance(enc.phi_e()) < 1e-10, "{}", spec.label());
            assert!(u.apply(&minus).distance(enc.phi_o()) < 1e-10, "{}", spec.label());
            let udu = u.adjoint().mul(&u);
            let id = Operator::identity(u.layout().clone());
            assert!(udu.max_abs_diff(&id) < 1e-10, "{}", spec.label());
        }
    }

    #[test]
    fn logical_rotation_squared_matches_two_by_two_oracle() {
        // In the (φ_e, φ_o) basis the rotation is R = [[1,1],[1,-1]]/√2 acting
        // on (+,-) coordinates; compose twice with explicit 2x2 matrices.
        let enc = make_encoding(&EncodingFamilySpec::CatPair { alpha: c(1.1) }, 16).unwrap();
        let u = logical_rotation(&enc);
        let (plus, _) = rotated_states(&enc);
        let twice = u.apply(&u.apply(&plus));
        // plus → φ_e = (|+⟩+|−⟩)/√2 → (φ_e + φ_o)/√2 = plus
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = [[s, s], [s, -s]]; // columns: images of + and − in (φ_e, φ_o) coords
        let v0 = [1.0, 0.0]; // plus in (+,−) coords
        let v1 = [m[0][0] * v0[0] + m[0][1] * v0[1], m[1][0] * v0[0] + m[1][1] * v0[1]];
        // v1 is in (φ_e, φ_o) coords; convert to (+,−): + = (e+o)/√2, − = (e−o)/√2
        let v1_pm = [s * (v1[0] + v1[1]), s * (v1[0] - v1[1])];
        let v2 = [m[0][0] * v1_pm[0] + m[0][1] * v1_pm[1], m[1][0] * v1_pm[0] + m[1][1] * v1_pm[1]];
        let expect = enc.phi_e().scale(c(v2[0])).add_scaled(enc.phi_o(), c(v2[1]));
        assert!(twice.distance(&expect) < 1e-10);
    }

    #[test]
    fn multicomponent_cat_is_parity_eigenstate() {
        let enc = make_encoding(
            &EncodingFamilySpec::MulticomponentCat {
                alpha: C64::new(0.9, 0.4),
                c: [c(1.0), c(-0.3)],
                d: [c(0.2), C64::new(0.0, 1.0)],
            },
            24,
        )
        .unwrap();
        let r = validate_encoding(&enc);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn coherent_pair_quasi_orthogonality() {
        for alpha in [0.5, 1.1, 1.7] {
            let a = coherent_state(c(alpha), 24).unwrap();
            let b = coherent_state(c(-alpha), 24).unwrap();
            let ov = a.inner(&b).norm_sqr();
            assert_abs_diff_eq!(ov, (-4.0 * alpha * alpha).exp(), epsilon = 1e-10);
        }
        let a = coherent_state(c(1.1), 24).unwrap();
        let b = coherent_state(c(-1.1), 24).unwrap();
        assert!(a.inner(&b).norm_sqr() < 1e-2);
    }

    #[test]
    fn insufficient_truncation_is_reported() {
        let err = make_encoding(&EncodingFamilySpec::CatPair { alpha: c(2.0) }, 8).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }), "{err}");
        assert!(make_encoding(&EncodingFamilySpec::FockPair { m: 2, n: 0 }, 4).is_err());
        assert!(make_encoding(&EncodingFamilySpec::CatPair { alpha: c(0.0) }, 8).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        for spec in EncodingFamilySpec::catalogue() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: EncodingFamilySpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
    }
}
