//! `K(t) = c·(H(t) + X)` on the union sparsity pattern of all terms, with
//! the oscillating coefficients refreshed per evaluation time.

use super::TimeDependentHamiltonian;
use crate::hilbert::CsrMatrix;
use crate::C64;

pub(crate) struct CompiledGenerator {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    base: Vec<C64>,
    contrib_ptr: Vec<usize>,
    contrib_slot: Vec<usize>,
    contrib_value: Vec<C64>,
    frequencies: Vec<f64>,
    phases: Vec<C64>,
    pub(crate) re: Vec<f64>,
    pub(crate) im: Vec<f64>,
    time: Option<f64>,
}

const STATIC: usize = usize::MAX;

impl CompiledGenerator {
    /// Generator `factor·(H(t) + extra)`. Every diagonal position is kept in
    /// the pattern.
    pub(crate) fn new(h: &TimeDependentHamiltonian, factor: C64, extra: Option<&CsrMatrix>) -> Self {
        let n = h.dim();
        let mut frequencies = Vec::new();
        let mut items: Vec<(usize, usize, usize, C64)> = Vec::new();
        for term in h.terms() {
            let m = term.operator.matrix();
            if term.frequency == 0.0 {
                items.extend(m.triplets().map(|(i, j, v)| (i, j, STATIC, factor * v)));
            } else {
                let s = frequencies.len();
                frequencies.push(term.frequency);
                frequencies.push(-term.frequency);
                items.extend(m.triplets().map(|(i, j, v)| (i, j, s, factor * v)));
                items.extend(m.triplets().map(|(i, j, v)| (j, i, s + 1, factor * v.conj())));
            }
        }
        if let Some(x) = extra {
            items.extend(x.triplets().map(|(i, j, v)| (i, j, STATIC, factor * v)));
        }
        items.extend((0..n).map(|i| (i, i, STATIC, C64::new(0.0, 0.0))));
        items.sort_by_key(|&(i, j, s, _)| (i, j, s));

        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::new();
        let mut base = Vec::new();
        let mut contrib_ptr = vec![0];
        let mut contrib_slot = Vec::new();
        let mut contrib_value = Vec::new();
        let mut k = 0;
        while k < items.len() {
            let (i, j) = (items[k].0, items[k].1);
            let mut b = C64::new(0.0, 0.0);
            while k < items.len() && (items[k].0, items[k].1) == (i, j) {
                let (s, v) = (items[k].2, items[k].3);
                if s == STATIC {
                    b += v;
                } else if contrib_slot.len() > *contrib_ptr.last().unwrap() && *contrib_slot.last().unwrap() == s {
                    *contrib_value.last_mut().unwrap() += v;
                } else {
                    contrib_slot.push(s);
                    contrib_value.push(v);
                }
                k += 1;
            }
            indices.push(j);
            base.push(b);
            contrib_ptr.push(contrib_slot.len());
            indptr[i + 1] = indices.len();
        }
        for i in 0..n {
            indptr[i + 1] = indptr[i + 1].max(indptr[i]);
        }
        let nnz = indices.len();
        let phases = vec![C64::new(1.0, 0.0); frequencies.len()];
        let mut g = Self {
            n,
            indptr,
            indices,
            base,
            contrib_ptr,
            contrib_slot,
            contrib_value,
            frequencies,
            phases,
            re: vec![0.0; nnz],
            im: vec![0.0; nnz],
            time: None,
        };
        g.update(0.0);
        g
    }

    pub(crate) fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub(crate) fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Refreshes the numeric values for time `t`.
    pub(crate) fn update(&mut self, t: f64) {
        if self.time == Some(t) {
            return;
        }
        self.time = Some(t);
        for (p, &nu) in self.phases.iter_mut().zip(&self.frequencies) {
            *p = C64::from_polar(1.0, nu * t);
        }
        for e in 0..self.indices.len() {
            let mut v = self.base[e];
            for c in self.contrib_ptr[e]..self.contrib_ptr[e + 1] {
                v += self.contrib_value[c] * self.phases[self.contrib_slot[c]];
            }
            self.re[e] = v.re;
            self.im[e] = v.im;
        }
    }

    /// `y = K x` at the last updated time.
    pub(crate) fn apply(&self, x: &[C64], y: &mut [C64]) {
        for i in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for e in self.indptr[i]..self.indptr[i + 1] {
                acc += C64::new(self.re[e], self.im[e]) * x[self.indices[e]];
            }
            y[i] = acc;
        }
    }
}
