//! Lindblad integration on dense density matrices stored as separate real
//! and imaginary planes.
//!
//! The right-hand side is written as `dρ = Kρ + (Kρ)† + Σ r LρL†` with
//! `K = −iH(t) − ½Σ r L†L`. The sparse product `Kρ` runs over packed column
//! panels of `ρ` so the gathered rows stay in cache. A second pass walks
//! lower-triangle tiles, forms `Kρ + (Kρ)†`, adds the jump terms and applies
//! the Runge–Kutta stage update in the same sweep. Jump operators whose
//! entries all sit on one diagonal (ladder operators, qutrit transitions,
//! projectors) take a gather-free path; any other operator falls back to two
//! sparse products.

use super::compiled::CompiledGenerator;
use super::{diagonal_observables, CollapseChannel, ConvergenceCheck, IntegratorConfig, Record, TimeDependentHamiltonian, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::{CsrMatrix, DensityMatrix, HilbertLayout, Ket, Operator};
use crate::C64;

/// Largest tolerated `|tr ρ − 1|` at the end of a run.
pub const LINDBLAD_TRACE_LIMIT: f64 = 1e-6;
/// Smallest tolerated eigenvalue of the final state.
pub const LINDBLAD_NEGATIVITY_LIMIT: f64 = -1e-6;

const PANEL: usize = 64;
const CHUNK: usize = 32;
const TILE: usize = 32;

#[derive(Clone)]
struct Planes {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Planes {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    fn from_density(rho: &DensityMatrix) -> Self {
        let n = rho.dim();
        let e = rho.entries();
        Self {
            n,
            re: e.iter().map(|v| v.re).collect(),
            im: e.iter().map(|v| v.im).collect(),
        }
    }

    fn to_density(&self, layout: &HilbertLayout) -> DensityMatrix {
        let entries = self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect();
        DensityMatrix::new(layout.clone(), entries).expect("dimension fixed")
    }

    fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.re[i * self.n + i]).sum()
    }

    fn purity(&self) -> f64 {
        self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    fn expectation(&self, psi: &[C64]) -> C64 {
        let n = self.n;
        let (pr, pi): (Vec<f64>, Vec<f64>) = psi.iter().map(|c| (c.re, c.im)).unzip();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            if psi[i] == C64::new(0.0, 0.0) {
                continue;
            }
            let (rr, ri) = (&self.re[i * n..(i + 1) * n], &self.im[i * n..(i + 1) * n]);
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..n {
                sr += rr[j] * pr[j] - ri[j] * pi[j];
                si += rr[j] * pi[j] + ri[j] * pr[j];
            }
            acc += psi[i].conj() * C64::new(sr, si);
        }
        acc
    }

    fn frobenius_distance(&self, other: &Self) -> f64 {
        let a: f64 = self.re.iter().zip(&other.re).map(|(x, y)| (x - y) * (x - y)).sum();
        let b: f64 = self.im.iter().zip(&other.im).map(|(x, y)| (x - y) * (x - y)).sum();
        (a + b).sqrt()
    }

    fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                let dr = self.re[i * n + j] - self.re[j * n + i];
                let di = self.im[i * n + j] + self.im[j * n + i];
                worst = worst.max(dr.hypot(di));
            }
            worst = worst.max(self.im[i * n + i].abs());
        }
        worst
    }
}

/// Sparse matrix view with split value planes.
struct SplitCsr<'a> {
    indptr: &'a [usize],
    indices: &'a [usize],
    re: &'a [f64],
    im: &'a [f64],
}

#[inline(always)]
fn fma(a: f64, b: f64, c: f64) -> f64 {
    if cfg!(target_feature = "fma") {
        a.mul_add(b, c)
    } else {
        a * b + c
    }
}

#[inline(always)]
fn micro<const C: usize>(cols: &[usize], vr: &[f64], vi: &[f64], pr: &[f64], pi: &[f64], w: usize, c0: usize, or: &mut [f64], oi: &mut [f64]) {
    let mut ar = [0.0f64; C];
    let mut ai = [0.0f64; C];
    for t in 0..cols.len() {
        let off = cols[t] * w + c0;
        let xr: &[f64; C] = pr[off..off + C].try_into().unwrap();
        let xi: &[f64; C] = pi[off..off + C].try_into().unwrap();
        let (kr, ki) = (vr[t], vi[t]);
        for c in 0..C {
            ar[c] = fma(kr, xr[c], fma(-ki, xi[c], ar[c]));
            ai[c] = fma(kr, xi[c], fma(ki, xr[c], ai[c]));
        }
    }
    or[..C].copy_from_slice(&ar);
    oi[..C].copy_from_slice(&ai);
}

/// `out = A x` for dense `x`. Column panels of `x` are copied into `pack`
/// first so the rows gathered by the sparse pattern sit on few pages.
fn spmm(a: &SplitCsr<'_>, x: &Planes, out: &mut Planes, pack: &mut (Vec<f64>, Vec<f64>)) {
    let n = x.n;
    pack.0.resize(n * PANEL, 0.0);
    pack.1.resize(n * PANEL, 0.0);
    let mut p0 = 0;
    while p0 < n {
        let p1 = (p0 + PANEL).min(n);
        let w = p1 - p0;
        for k in 0..n {
            pack.0[k * w..(k + 1) * w].copy_from_slice(&x.re[k * n + p0..k * n + p1]);
            pack.1[k * w..(k + 1) * w].copy_from_slice(&x.im[k * n + p0..k * n + p1]);
        }
        let (pr, pi) = (&pack.0[..n * w], &pack.1[..n * w]);
        for i in 0..n {
            let (s, e) = (a.indptr[i], a.indptr[i + 1]);
            let (cols, vr, vi) = (&a.indices[s..e], &a.re[s..e], &a.im[s..e]);
            let row = i * n + p0;
            let mut c = 0;
            while c + CHUNK <= w {
                let (or, oi) = (&mut out.re[row + c..row + c + CHUNK], &mut out.im[row + c..row + c + CHUNK]);
                micro::<CHUNK>(cols, vr, vi, pr, pi, w, c, or, oi);
                c += CHUNK;
            }
            for cc in c..w {
                let (mut sr, mut si) = (0.0, 0.0);
                for t in 0..cols.len() {
                    let off = cols[t] * w + cc;
                    sr += vr[t] * pr[off] - vi[t] * pi[off];
                    si += vr[t] * pi[off] + vi[t] * pr[off];
                }
                out.re[row + cc] = sr;
                out.im[row + cc] = si;
            }
        }
        p0 = p1;
    }
}

/// Jump `L = Σ_x w_x |x⟩⟨x+s|` with real weights; `u = √rate · w`.
struct ShiftJump {
    shift: isize,
    u: Vec<f64>,
}

struct GeneralJump {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
    rate: f64,
}

impl GeneralJump {
    fn view(&self) -> SplitCsr<'_> {
        SplitCsr {
            indptr: &self.indptr,
            indices: &self.indices,
            re: &self.re,
            im: &self.im,
        }
    }
}

fn classify(l: &CsrMatrix, rate: f64) -> std::result::Result<ShiftJump, GeneralJump> {
    let n = l.nrows();
    let mut shift: Option<isize> = None;
    let mut u = vec![0.0; n];
    let mut ok = true;
    for i in 0..n {
        let mut row = l.row(i);
        if let Some((j, v)) = row.next() {
            let s = j as isize - i as isize;
            if row.next().is_some() || v.im != 0.0 || shift.is_some_and(|t| t != s) {
                ok = false;
                break;
            }
            shift = Some(s);
            u[i] = rate.sqrt() * v.re;
        }
    }
    if ok {
        Ok(ShiftJump {
            shift: shift.unwrap_or(0),
            u,
        })
    } else {
        Err(GeneralJump {
            indptr: l.indptr().to_vec(),
            indices: l.indices().to_vec(),
            re: l.values().iter().map(|v| v.re).collect(),
            im: l.values().iter().map(|v| v.im).collect(),
            rate,
        })
    }
}

/// Buffers and operators of one Lindblad problem.
struct Engine {
    gen: CompiledGenerator,
    shifts: Vec<ShiftJump>,
    generals: Vec<GeneralJump>,
    m: Planes,
    pack: (Vec<f64>, Vec<f64>),
    scratch: Option<(Planes, Planes)>,
}

struct StageTargets<'a> {
    rho0: &'a Planes,
    acc: &'a mut Planes,
    acc_weight: f64,
    acc_init: bool,
    acc_mirror: bool,
    out: Option<(&'a mut Planes, f64)>,
}

impl Engine {
    fn new(h: &TimeDependentHamiltonian, channels: &[(CsrMatrix, f64)]) -> Self {
        let n = h.dim();
        let mut extra = CsrMatrix::zeros(n, n);
        let mut shifts = Vec::new();
        let mut generals = Vec::new();
        for (l, rate) in channels {
            if *rate == 0.0 || l.nnz() == 0 {
                continue;
            }
            let ldl = l.adjoint().matmul(l);
            extra = extra.add_scaled(&ldl, C64::new(0.0, -0.5 * rate));
            match classify(l, *rate) {
                Ok(s) => shifts.push(s),
                Err(g) => generals.push(g),
            }
        }
        let gen = CompiledGenerator::new(h, C64::new(0.0, -1.0), Some(&extra));
        let scratch = (!generals.is_empty()).then(|| (Planes::zeros(n), Planes::zeros(n)));
        Self {
            gen,
            shifts,
            generals,
            m: Planes::zeros(n),
            pack: (Vec::new(), Vec::new()),
            scratch,
        }
    }

    /// One right-hand-side evaluation at time `t` on `input`, fused with the
    /// Runge–Kutta bookkeeping in `targets`.
    fn stage(&mut self, t: f64, input: &Planes, targets: StageTargets<'_>) {
        self.gen.update(t);
        let k = SplitCsr {
            indptr: self.gen.indptr(),
            indices: self.gen.indices(),
            re: &self.gen.re,
            im: &self.gen.im,
        };
        spmm(&k, input, &mut self.m, &mut self.pack);
        if let Some((t1, t2)) = self.scratch.as_mut() {
            for g in &self.generals {
                spmm(&g.view(), input, t1, &mut self.pack);
                conj_transpose(t1, t2);
                spmm(&g.view(), t2, t1, &mut self.pack);
                let half = 0.5 * g.rate;
                for (m, v) in self.m.re.iter_mut().zip(&t1.re) {
                    *m += half * v;
                }
                for (m, v) in self.m.im.iter_mut().zip(&t1.im) {
                    *m += half * v;
                }
            }
        }
        tile_pass(&self.m, input, &self.shifts, targets);
    }
}

fn conj_transpose(a: &Planes, out: &mut Planes) {
    let n = a.n;
    for i0 in (0..n).step_by(TILE) {
        for j0 in (0..n).step_by(TILE) {
            for i in i0..(i0 + TILE).min(n) {
                for j in j0..(j0 + TILE).min(n) {
                    out.re[j * n + i] = a.re[i * n + j];
                    out.im[j * n + i] = -a.im[i * n + j];
                }
            }
        }
    }
}

fn tile_pass(m: &Planes, input: &Planes, jumps: &[ShiftJump], tg: StageTargets<'_>) {
    let n = m.n;
    let nt = n.div_ceil(TILE);
    let mut dr = [0.0f64; TILE * TILE];
    let mut di = [0.0f64; TILE * TILE];
    let StageTargets {
        rho0,
        acc,
        acc_weight: wa,
        acc_init,
        acc_mirror,
        mut out,
    } = tg;
    for ti in 0..nt {
        for tj in 0..=ti {
            let (x0, x1) = (ti * TILE, (ti * TILE + TILE).min(n));
            let (y0, y1) = (tj * TILE, (tj * TILE + TILE).min(n));
            let w = y1 - y0;
            // Kρ + (Kρ)†
            for x in x0..x1 {
                let r = (x - x0) * TILE;
                dr[r..r + w].copy_from_slice(&m.re[x * n + y0..x * n + y1]);
                di[r..r + w].copy_from_slice(&m.im[x * n + y0..x * n + y1]);
            }
            for y in y0..y1 {
                let (mr, mi) = (&m.re[y * n + x0..y * n + x1], &m.im[y * n + x0..y * n + x1]);
                for (k, (&a, &b)) in mr.iter().zip(mi).enumerate() {
                    let idx = k * TILE + (y - y0);
                    dr[idx] += a;
                    di[idx] -= b;
                }
            }
            // Σ r L ρ L†
            for jump in jumps {
                let s = jump.shift;
                let ylo = (y0 as isize).max(-s) as usize;
                let yhi = (y1 as isize).min(n as isize - s).max(ylo as isize) as usize;
                if ylo >= yhi {
                    continue;
                }
                for x in x0..x1 {
                    let ux = jump.u[x];
                    if ux == 0.0 {
                        continue;
                    }
                    let base = ((x as isize + s) * n as isize + s) as usize;
                    let r = (x - x0) * TILE;
                    let (ir, ii) = (&input.re[base + ylo..base + yhi], &input.im[base + ylo..base + yhi]);
                    let uy = &jump.u[ylo..yhi];
                    let tr = &mut dr[r + ylo - y0..r + yhi - y0];
                    for ((t, &a), &u) in tr.iter_mut().zip(ir).zip(uy) {
                        *t = fma(ux * u, a, *t);
                    }
                    let tim = &mut di[r + ylo - y0..r + yhi - y0];
                    for ((t, &a), &u) in tim.iter_mut().zip(ii).zip(uy) {
                        *t = fma(ux * u, a, *t);
                    }
                }
            }
            // Runge–Kutta bookkeeping on the lower triangle
            for x in x0..x1 {
                let r = (x - x0) * TILE;
                let len = if ti == tj { x + 1 - y0 } else { w };
                let row = x * n + y0;
                let (d_re, d_im) = (&dr[r..r + len], &di[r..r + len]);
                let (z_re, z_im) = (&rho0.re[row..row + len], &rho0.im[row..row + len]);
                if acc_init {
                    axpy_into(&mut acc.re[row..row + len], z_re, wa, d_re);
                    axpy_into(&mut acc.im[row..row + len], z_im, wa, d_im);
                } else {
                    axpy_in_place(&mut acc.re[row..row + len], wa, d_re);
                    axpy_in_place(&mut acc.im[row..row + len], wa, d_im);
                }
                if let Some((o, c)) = out.as_mut() {
                    axpy_into(&mut o.re[row..row + len], z_re, *c, d_re);
                    axpy_into(&mut o.im[row..row + len], z_im, *c, d_im);
                }
            }
            if acc_mirror {
                mirror_tile(acc, x0, x1, y0, y1);
            }
            if let Some((o, _)) = out.as_mut() {
                mirror_tile(o, x0, x1, y0, y1);
            }
        }
    }
}

#[inline(always)]
fn axpy_into(dst: &mut [f64], z: &[f64], a: f64, d: &[f64]) {
    for ((o, &zv), &dv) in dst.iter_mut().zip(z).zip(d) {
        *o = fma(a, dv, zv);
    }
}

#[inline(always)]
fn axpy_in_place(dst: &mut [f64], a: f64, d: &[f64]) {
    for (o, &dv) in dst.iter_mut().zip(d) {
        *o = fma(a, dv, *o);
    }
}

/// Copies the conjugate of the lower part of a tile into its upper image.
#[inline(always)]
fn mirror_tile(p: &mut Planes, x0: usize, x1: usize, y0: usize, y1: usize) {
    let n = p.n;
    for y in y0..y1 {
        let from = x0.max(y + 1);
        for x in from..x1 {
            p.re[y * n + x] = p.re[x * n + y];
            p.im[y * n + x] = -p.im[x * n + y];
        }
    }
}

/// Integrates the master equation
/// `ρ̇ = −i[H(t), ρ] + Σ r D[L]ρ + Σ γ_φ (PρP − ½{P, ρ})`.
pub fn evolve_lindblad(
    h: &TimeDependentHamiltonian,
    channels: &[CollapseChannel],
    dephasing: &[(Operator, f64)],
    rho0: &DensityMatrix,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<(DensityMatrix, Trajectory)> {
    evolve_lindblad_observed(h, channels, dephasing, rho0, t_final, cfg, None)
}

/// As [`evolve_lindblad`], recording the fidelity against `target`.
pub fn evolve_lindblad_observed(
    h: &TimeDependentHamiltonian,
    channels: &[CollapseChannel],
    dephasing: &[(Operator, f64)],
    rho0: &DensityMatrix,
    t_final: f64,
    cfg: &IntegratorConfig,
    target: Option<&Ket>,
) -> Result<(DensityMatrix, Trajectory)> {
    let n = h.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            subsystem: "initial density matrix".into(),
            expected: n,
            found: rho0.dim(),
        });
    }
    let defect = rho0.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::InvalidState(format!("initial state not Hermitian ({defect:.3e})")));
    }
    let trace0 = rho0.trace();
    if (trace0.re - 1.0).abs() > 1e-8 || trace0.im.abs() > 1e-8 {
        return Err(Error::InvalidState(format!("initial trace {trace0}")));
    }
    let mut ops: Vec<(CsrMatrix, f64)> = Vec::new();
    for c in channels {
        check_operator(&c.operator, n)?;
        ops.push((c.operator.matrix().clone(), c.rate));
    }
    for (p, rate) in dephasing {
        check_operator(p, n)?;
        if !(*rate >= 0.0) {
            return Err(Error::Config(format!("negative dephasing rate {rate}")));
        }
        ops.push((p.matrix().clone(), *rate));
    }
    let dissipative_scale: f64 = ops.iter().map(|(l, r)| r * l.adjoint().matmul(l).max_abs()).sum();
    let steps = cfg.steps_for(t_final, h.max_frequency(), h.norm_bound() + dissipative_scale)?;
    let mut engine = Engine::new(h, &ops);
    // hermitize exactly so the mirrored updates start from a consistent state
    let mut start = Planes::from_density(rho0);
    for i in 0..n {
        for j in 0..i {
            let (r, im) = (
                0.5 * (start.re[i * n + j] + start.re[j * n + i]),
                0.5 * (start.im[i * n + j] - start.im[j * n + i]),
            );
            start.re[i * n + j] = r;
            start.im[i * n + j] = im;
            start.re[j * n + i] = r;
            start.im[j * n + i] = -im;
        }
        start.im[i * n + i] = 0.0;
    }
    let layout = rho0.layout().clone();
    let stride = cfg.stride(steps);
    let (rho, mut traj) = integrate(&mut engine, &start, t_final, steps, Some(stride), target, &layout);
    traj.final_drift = (rho.trace() - 1.0).abs();
    if traj.final_drift > LINDBLAD_TRACE_LIMIT {
        return Err(Error::IntegrationAccuracy(format!(
            "trace drift {:.3e} exceeds {LINDBLAD_TRACE_LIMIT:e}",
            traj.final_drift
        )));
    }
    let herm = rho.hermiticity_defect();
    if herm > 1e-10 {
        return Err(Error::IntegrationAccuracy(format!("Hermiticity defect {herm:.3e}")));
    }
    let result = rho.to_density(&layout);
    let min_eig = result.min_eigenvalue();
    traj.min_eigenvalue = Some(min_eig);
    if min_eig < LINDBLAD_NEGATIVITY_LIMIT {
        return Err(Error::IntegrationAccuracy(format!("negative eigenvalue {min_eig:.3e}")));
    }
    let other_steps = match cfg.check {
        ConvergenceCheck::HalfStep => Some(2 * steps),
        ConvergenceCheck::DoubleStep => Some((steps / 2).max(1)),
        ConvergenceCheck::Off => None,
    };
    match other_steps {
        Some(s) if steps > 0 => {
            let (other, _) = integrate(&mut engine, &start, t_final, s, None, None, &layout);
            let err = rho.frobenius_distance(&other);
            traj.convergence_error = Some(err);
            traj.converged = err < cfg.convergence_tol;
        }
        _ => traj.converged = true,
    }
    if !traj.converged {
        log::warn!(
            "Lindblad run not converged: difference {:.3e} vs tolerance {:.1e}",
            traj.convergence_error.unwrap_or(f64::NAN),
            cfg.convergence_tol
        );
    }
    Ok((result, traj))
}

fn check_operator(op: &Operator, n: usize) -> Result<()> {
    if op.dim() != n {
        return Err(Error::DimensionMismatch {
            subsystem: format!("dissipator {}", op.label()),
            expected: n,
            found: op.dim(),
        });
    }
    Ok(())
}

fn record(rho: &Planes, time: f64, target: Option<&Ket>, layout: &HilbertLayout) -> Record {
    let n = rho.n;
    let (qutrit_populations, photon_numbers) = diagonal_observables(layout, |i| rho.re[i * n + i]);
    Record {
        time,
        fidelity: target.map(|t| rho.expectation(t.amplitudes()).re.max(0.0).sqrt()),
        trace: rho.trace(),
        purity: rho.purity(),
        qutrit_populations,
        photon_numbers,
    }
}

fn integrate(
    engine: &mut Engine,
    start: &Planes,
    t_final: f64,
    steps: usize,
    stride: Option<usize>,
    target: Option<&Ket>,
    layout: &HilbertLayout,
) -> (Planes, Trajectory) {
    let n = start.n;
    let dt = if steps > 0 { t_final / steps as f64 } else { 0.0 };
    let mut rho = start.clone();
    let mut acc = Planes::zeros(n);
    let mut sa = Planes::zeros(n);
    let mut sb = Planes::zeros(n);
    let mut traj = Trajectory {
        steps,
        dt,
        ..Default::default()
    };
    if stride.is_some() {
        traj.records.push(record(&rho, 0.0, target, layout));
    }
    for step in 0..steps {
        let t = step as f64 * dt;
        engine.stage(
            t,
            &rho,
            StageTargets {
                rho0: &rho,
                acc: &mut acc,
                acc_weight: dt / 6.0,
                acc_init: true,
                acc_mirror: false,
                out: Some((&mut sa, 0.5 * dt)),
            },
        );
        engine.stage(
            t + 0.5 * dt,
            &sa,
            StageTargets {
                rho0: &rho,
                acc: &mut acc,
                acc_weight: dt / 3.0,
                acc_init: false,
                acc_mirror: false,
                out: Some((&mut sb, 0.5 * dt)),
            },
        );
        engine.stage(
            t + 0.5 * dt,
            &sb,
            StageTargets {
                rho0: &rho,
                acc: &mut acc,
                acc_weight: dt / 3.0,
                acc_init: false,
                acc_mirror: false,
                out: Some((&mut sa, dt)),
            },
        );
        engine.stage(
            t + dt,
            &sa,
            StageTargets {
                rho0: &rho,
                acc: &mut acc,
                acc_weight: dt / 6.0,
                acc_init: false,
                acc_mirror: true,
                out: None,
            },
        );
        std::mem::swap(&mut rho, &mut acc);
        if let Some(s) = stride {
            if (step + 1) % s == 0 || step + 1 == steps {
                traj.records.push(record(&rho, (step + 1) as f64 * dt, target, layout));
            }
        }
    }
    (rho, traj)
}
