//! Truncated Fock-space and qutrit operator algebra on the composite space
//! `qutrit ⊗ cavity_0 ⊗ … ⊗ cavity_{n-1}`.
//!
//! Basis ordering is row-major over the subsystem list with the qutrit as the
//! slowest-varying index, followed by the cavities in ascending order. Cavity
//! index 0 is the control cavity. The qutrit basis is `(|g⟩, |e⟩, |f⟩)`.

mod sparse;

pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::C64;
use num_complex::ComplexFloat;

/// Dimension of the coupler qutrit.
pub const QUTRIT_DIM: usize = 3;
/// Qutrit level indices.
pub const G: usize = 0;
pub const E: usize = 1;
pub const F: usize = 2;

/// Tail mass above which a truncated continuous-variable state is reported.
pub const TAIL_LIMIT: f64 = 1e-8;
/// Norm tolerance for a [`Ket`] to count as normalized.
pub const NORM_TOL: f64 = 1e-9;

/// Ordered subsystem dimensions of a composite space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    dims: Vec<usize>,
    has_qutrit: bool,
}

impl HilbertLayout {
    /// Qutrit followed by the given cavity truncations.
    pub fn new(cavity_dims: &[usize]) -> Result<Self> {
        Self::check_cavities(cavity_dims)?;
        let mut dims = vec![QUTRIT_DIM];
        dims.extend_from_slice(cavity_dims);
        Ok(Self {
            dims,
            has_qutrit: true,
        })
    }

    /// Cavities without the coupler, used for gate-level states.
    pub fn cavities_only(cavity_dims: &[usize]) -> Result<Self> {
        Self::check_cavities(cavity_dims)?;
        if cavity_dims.is_empty() {
            return Err(Error::InvalidDimension {
                what: "cavity count".into(),
                dim: 0,
            });
        }
        Ok(Self {
            dims: cavity_dims.to_vec(),
            has_qutrit: false,
        })
    }

    pub fn single_mode(dim: usize) -> Result<Self> {
        Self::cavities_only(&[dim])
    }

    pub fn qutrit_only() -> Self {
        Self {
            dims: vec![QUTRIT_DIM],
            has_qutrit: true,
        }
    }

    fn check_cavities(cavity_dims: &[usize]) -> Result<()> {
        match cavity_dims.iter().find(|&&d| d < 2) {
            Some(&d) => Err(Error::InvalidDimension {
                what: "cavity truncation".into(),
                dim: d,
            }),
            None => Ok(()),
        }
    }

    /// All subsystem dimensions in basis order.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn has_qutrit(&self) -> bool {
        self.has_qutrit
    }

    pub fn qutrit_dim(&self) -> usize {
        if self.has_qutrit {
            QUTRIT_DIM
        } else {
            1
        }
    }

    pub fn cavity_dims(&self) -> &[usize] {
        &self.dims[self.cavity_offset()..]
    }

    pub fn n_cavities(&self) -> usize {
        self.dims.len() - self.cavity_offset()
    }

    fn cavity_offset(&self) -> usize {
        usize::from(self.has_qutrit)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Subsystem position of cavity `j` (0-based).
    pub fn cavity_position(&self, j: usize) -> usize {
        self.cavity_offset() + j
    }

    /// Subsystem position of the qutrit, if present.
    pub fn qutrit_position(&self) -> Option<usize> {
        self.has_qutrit.then_some(0)
    }

    /// Layout obtained by dropping the qutrit.
    pub fn without_qutrit(&self) -> Result<Self> {
        Self::cavities_only(self.cavity_dims())
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        assert_eq!(multi.len(), self.dims.len());
        multi
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&m, &d)| {
                assert!(m < d, "multi-index component {m} out of range {d}");
                acc * d + m
            })
    }

    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            multi[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        multi
    }

    /// Human-readable subsystem name for error messages.
    pub fn subsystem_name(&self, position: usize) -> String {
        if self.has_qutrit && position == 0 {
            "qutrit".to_string()
        } else {
            format!("cavity {}", position - self.cavity_offset())
        }
    }
}

/// Pure state over a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: Vec<C64>,
    layout: HilbertLayout,
    tail_mass: f64,
}

impl Ket {
    pub fn new(layout: HilbertLayout, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                subsystem: "ket".into(),
                expected: layout.total_dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            amplitudes,
            layout,
            tail_mass: 0.0,
        })
    }

    pub fn basis(layout: HilbertLayout, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); layout.total_dim()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self {
            amplitudes,
            layout,
            tail_mass: 0.0,
        }
    }

    /// Single-mode Fock state `|n⟩`.
    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension {
                what: format!("Fock level {n} in truncation"),
                dim,
            });
        }
        Ok(Self::basis(HilbertLayout::single_mode(dim)?, n))
    }

    /// Qutrit basis state (`G`, `E` or `F`).
    pub fn qutrit(level: usize) -> Self {
        Self::basis(HilbertLayout::qutrit_only(), level)
    }

    pub(crate) fn with_tail_mass(mut self, tail: f64) -> Self {
        self.tail_mass = tail;
        self
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Probability mass lost to truncation when the state was constructed.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale(C64::new(1.0 / n, 0.0))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.amplitudes.iter_mut().for_each(|a| *a *= c);
        out
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Ket, c: C64) -> Self {
        assert_eq!(self.dim(), other.dim());
        let mut out = self.clone();
        for (a, b) in out.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += c * b;
        }
        out.tail_mass = self.tail_mass.max(other.tail_mass);
        out
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Ket) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Reduced density matrix (row-major, `d × d`) of one subsystem.
    pub fn reduced_density(&self, position: usize) -> Vec<C64> {
        let dims = self.layout.dims();
        let d = dims[position];
        let stride = self.layout.strides()[position];
        let outer = dims[..position].iter().product::<usize>();
        let mut rho = vec![C64::new(0.0, 0.0); d * d];
        for o in 0..outer {
            for r in 0..stride {
                let base = o * d * stride + r;
                for i in 0..d {
                    let ai = self.amplitudes[base + i * stride];
                    if ai == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in 0..d {
                        rho[i * d + j] += ai * self.amplitudes[base + j * stride].conj();
                    }
                }
            }
        }
        rho
    }
}

/// Density matrix stored dense and row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: Vec<C64>,
    layout: HilbertLayout,
}

impl DensityMatrix {
    pub fn new(layout: HilbertLayout, entries: Vec<C64>) -> Result<Self> {
        let d = layout.total_dim();
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                subsystem: "density matrix".into(),
                expected: d * d,
                found: entries.len(),
            });
        }
        Ok(Self { entries, layout })
    }

    pub fn from_ket(psi: &Ket) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = a[i] * a[j].conj();
            }
        }
        Self {
            entries,
            layout: psi.layout().clone(),
        }
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            entries[i * d + i] = C64::new(1.0 / d as f64, 0.0);
        }
        Self { entries, layout }
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim() + j]
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.entries[i * d + i]).sum()
    }

    /// Largest entrywise modulus of `ρ − ρ†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let diff = self.entries[i * d + j] - self.entries[j * d + i].conj();
                worst = worst.max(diff.abs());
            }
        }
        worst
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.entries.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &Ket) -> C64 {
        let d = self.dim();
        assert_eq!(psi.dim(), d);
        let a = psi.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            if a[i] == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.entries[i * d..(i + 1) * d];
            let r: C64 = row.iter().zip(a).map(|(x, y)| x * y).sum();
            acc += a[i].conj() * r;
        }
        acc
    }

    /// `tr(ρ A)` for an operator on the same layout.
    pub fn expect_operator(&self, op: &Operator) -> C64 {
        let d = self.dim();
        op.matrix()
            .triplets()
            .map(|(i, j, v)| v * self.entries[j * d + i])
            .sum()
    }

    /// Diagonal populations of each level of one subsystem.
    pub fn subsystem_populations(&self, position: usize) -> Vec<f64> {
        let d = self.dim();
        let sub = self.layout.dims()[position];
        let stride = self.layout.strides()[position];
        let mut pops = vec![0.0; sub];
        for i in 0..d {
            pops[(i / stride) % sub] += self.entries[i * d + i].re;
        }
        pops
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| {
            0.5 * (self.entries[i * d + j] + self.entries[j * d + i].conj())
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Matrix acting on a layout, with a descriptive label.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CsrMatrix,
    layout: HilbertLayout,
    label: String,
}

impl Operator {
    pub fn new(layout: HilbertLayout, matrix: CsrMatrix, label: impl Into<String>) -> Result<Self> {
        let d = layout.total_dim();
        if !matrix.is_square() || matrix.nrows() != d {
            return Err(Error::DimensionMismatch {
                subsystem: "operator".into(),
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            matrix,
            layout,
            label: label.into(),
        })
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: CsrMatrix::identity(d),
            layout,
            label: "I".into(),
        }
    }

    pub fn zero(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: CsrMatrix::zeros(d, d),
            layout,
            label: "0".into(),
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix.get(i, j)
    }

    pub fn apply(&self, psi: &Ket) -> Ket {
        assert_eq!(psi.dim(), self.dim());
        Ket {
            amplitudes: self.matrix.mul_vec(psi.amplitudes()),
            layout: psi.layout().clone(),
            tail_mass: psi.tail_mass(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            layout: self.layout.clone(),
            label: format!("({})^dag", self.label),
        }
    }

    pub fn mul(&self, other: &Operator) -> Self {
        Self {
            matrix: self.matrix.matmul(&other.matrix),
            layout: self.layout.clone(),
            label: format!("{}*{}", self.label, other.label),
        }
    }

    pub fn add(&self, other: &Operator) -> Self {
        Self {
            matrix: self.matrix.add(&other.matrix),
            layout: self.layout.clone(),
            label: format!("{}+{}", self.label, other.label),
        }
    }

    pub fn sub(&self, other: &Operator) -> Self {
        Self {
            matrix: self.matrix.sub(&other.matrix),
            layout: self.layout.clone(),
            label: format!("{}-{}", self.label, other.label),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            matrix: self.matrix.scale(c),
            layout: self.layout.clone(),
            label: self.label.clone(),
        }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

/// Single-mode ladder, number and parity operators.
#[derive(Clone, Debug)]
pub struct ModeOperators {
    pub annihilation: Operator,
    pub creation: Operator,
    pub number: Operator,
    pub parity: Operator,
}

/// Ladder, number and parity operators of a mode truncated to `dim` levels.
pub fn mode_operators(dim: usize) -> Result<ModeOperators> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            what: "mode".into(),
            dim,
        });
    }
    let layout = HilbertLayout::single_mode(dim)?;
    let a = CsrMatrix::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
    );
    let num: Vec<C64> = (0..dim).map(|n| C64::new(n as f64, 0.0)).collect();
    let par: Vec<C64> = (0..dim)
        .map(|n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    Ok(ModeOperators {
        creation: Operator::new(layout.clone(), a.adjoint(), "a^dag")?,
        annihilation: Operator::new(layout.clone(), a, "a")?,
        number: Operator::new(layout.clone(), CsrMatrix::from_diagonal(&num), "n")?,
        parity: Operator::new(layout, CsrMatrix::from_diagonal(&par), "parity")?,
    })
}

/// Poisson mass `Σ_{n ≥ dim} e^{−x} xⁿ/n!` for mean `x`.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    // log-space to stay finite for large dim
    let log_term = |n: usize| -mean + n as f64 * mean.ln() - ln_factorial(n);
    let mut tail = 0.0;
    let mut n = dim;
    loop {
        let t = log_term(n).exp();
        tail += t;
        if (n as f64 > mean && t < tail * 1e-17) || n > dim + 10_000 {
            break;
        }
        n += 1;
    }
    tail
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Coherent state `|α⟩` truncated to `dim` levels and renormalized.
///
/// Logs a warning when the discarded Poisson mass exceeds [`TAIL_LIMIT`]; the
/// discarded mass is kept on the returned ket.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<Ket> {
    let layout = HilbertLayout::single_mode(dim)?;
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let tail = poisson_tail(alpha.norm_sqr(), dim);
    if tail > TAIL_LIMIT {
        log::warn!("coherent state alpha={alpha} truncated at {dim}: tail mass {tail:.3e}");
    }
    Ok(Ket::new(layout, amps)?.normalized().with_tail_mass(tail))
}

/// Transition and projection operators of the qutrit in `(|g⟩, |e⟩, |f⟩)` order.
#[derive(Clone, Debug)]
pub struct QutritOperators {
    /// `|g⟩⟨f|`
    pub sigma_fg: Operator,
    /// `|e⟩⟨f|`
    pub sigma_fe: Operator,
    /// `|g⟩⟨e|`
    pub sigma_eg: Operator,
    pub proj_gg: Operator,
    pub proj_ee: Operator,
    pub proj_ff: Operator,
}

pub fn qutrit_operators() -> QutritOperators {
    let layout = HilbertLayout::qutrit_only();
    let unit = |i: usize, j: usize, label: &str| {
        Operator::new(
            layout.clone(),
            CsrMatrix::from_triplets(3, 3, [(i, j, C64::new(1.0, 0.0))]),
            label,
        )
        .expect("qutrit operator is 3x3")
    };
    QutritOperators {
        sigma_fg: unit(G, F, "sigma_fg"),
        sigma_fe: unit(E, F, "sigma_fe"),
        sigma_eg: unit(G, E, "sigma_eg"),
        proj_gg: unit(G, G, "sigma_gg"),
        proj_ee: unit(E, E, "sigma_ee"),
        proj_ff: unit(F, F, "sigma_ff"),
    }
}

/// Lifts a single-subsystem operator to `I ⊗ … ⊗ op ⊗ … ⊗ I`.
pub fn embed(op: &Operator, position: usize, layout: &HilbertLayout) -> Result<Operator> {
    let dims = layout.dims();
    if position >= dims.len() {
        return Err(Error::InvalidDimension {
            what: "subsystem position".into(),
            dim: position,
        });
    }
    if op.dim() != dims[position] {
        return Err(Error::DimensionMismatch {
            subsystem: layout.subsystem_name(position),
            expected: dims[position],
            found: op.dim(),
        });
    }
    let left: usize = dims[..position].iter().product();
    let right: usize = dims[position + 1..].iter().product();
    let d = dims[position];
    let local: Vec<_> = op.matrix().triplets().collect();
    let mut triplets = Vec::with_capacity(left * right * local.len());
    for l in 0..left {
        for &(i, j, v) in &local {
            for r in 0..right {
                triplets.push(((l * d + i) * right + r, (l * d + j) * right + r, v));
            }
        }
    }
    let n = layout.total_dim();
    Operator::new(
        layout.clone(),
        CsrMatrix::from_triplets(n, n, triplets),
        format!("{}[{}]", op.label(), layout.subsystem_name(position)),
    )
}

/// Kronecker product of per-subsystem kets in layout order.
pub fn tensor_state(parts: &[&Ket], layout: &HilbertLayout) -> Result<Ket> {
    let dims = layout.dims();
    if parts.len() != dims.len() {
        return Err(Error::DimensionMismatch {
            subsystem: "tensor factor count".into(),
            expected: dims.len(),
            found: parts.len(),
        });
    }
    for (k, (p, &d)) in parts.iter().zip(dims).enumerate() {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                subsystem: layout.subsystem_name(k),
                expected: d,
                found: p.dim(),
            });
        }
    }
    let mut amps = vec![C64::new(1.0, 0.0)];
    for p in parts {
        amps = amps
            .iter()
            .flat_map(|&x| p.amplitudes().iter().map(move |&y| x * y))
            .collect();
    }
    let tail = parts.iter().map(|p| p.tail_mass()).fold(0.0, f64::max);
    Ok(Ket::new(layout.clone(), amps)?.with_tail_mass(tail))
}

/// Pads or checks a single-mode ket against a target truncation.
pub fn resize_mode(psi: &Ket, dim: usize) -> Result<Ket> {
    let mut amps = psi.amplitudes().to_vec();
    if dim < amps.len() {
        let dropped: f64 = amps[dim..].iter().map(|a| a.norm_sqr()).sum();
        if dropped > TAIL_LIMIT {
            return Err(Error::Truncation {
                tail: dropped,
                limit: TAIL_LIMIT,
                dim,
            });
        }
    }
    amps.resize(dim, C64::new(0.0, 0.0));
    Ok(Ket::new(HilbertLayout::single_mode(dim)?, amps)?.with_tail_mass(psi.tail_mass()))
}
