use super::*;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// m×m matrix of trigonometric polynomials Σ_k A_k e^{i<k,x>}.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMat {
    pub m: usize,
    pub modes: BTreeMap<Mode, DMatrix<C64>>,
}

const ZERO_MODE: Mode = [0; 2 * MAX_N];

pub fn mode_neg(k: &Mode) -> Mode {
    let mut r = *k;
    r.iter_mut().for_each(|x| *x = -*x);
    r
}

pub fn mode_add(a: &Mode, b: &Mode) -> Mode {
    let mut r = *a;
    r.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    r
}

pub fn mode_from(k: &[i32]) -> Mode {
    let mut r = ZERO_MODE;
    r[..k.len()].copy_from_slice(k);
    r
}

pub fn mode_inf(k: &Mode) -> i32 {
    k.iter().map(|x| x.abs()).max().unwrap_or(0)
}

fn mat_max(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl TrigMat {
    pub fn single(k: Mode, mat: DMatrix<C64>) -> Self {
        let mut modes = BTreeMap::new();
        let m = mat.nrows();
        if mat_max(&mat) > 0.0 {
            modes.insert(k, mat);
        }
        TrigMat { m, modes }
    }

    pub fn scalar_mode(k: Mode, z: C64) -> Self {
        Self::single(k, DMatrix::from_element(1, 1, z))
    }

    pub fn get(&self, k: &Mode) -> DMatrix<C64> {
        self.modes.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(self.m, self.m))
    }

    pub fn constant_part(&self) -> DMatrix<C64> {
        self.get(&ZERO_MODE)
    }

    /// Pointwise value at real coordinates x ∈ R^{2n}.
    pub fn eval(&self, x: &[f64]) -> DMatrix<C64> {
        let mut r = DMatrix::zeros(self.m, self.m);
        for (k, a) in &self.modes {
            let ph: f64 = x.iter().zip(k.iter()).map(|(xi, ki)| xi * *ki as f64).sum();
            r += a * C64::from_polar(1.0, ph);
        }
        r
    }

    fn add_mode(&mut self, k: Mode, a: DMatrix<C64>) {
        match self.modes.get_mut(&k) {
            Some(b) => {
                *b += a;
                if mat_max(b) == 0.0 {
                    self.modes.remove(&k);
                }
            }
            None => {
                if mat_max(&a) > 0.0 {
                    self.modes.insert(k, a);
                }
            }
        }
    }
}

impl Coeff for TrigMat {
    type Ctx = ();

    fn zero(_: &(), m: usize) -> Self {
        TrigMat { m, modes: BTreeMap::new() }
    }

    fn constant(_: &(), mat: &DMatrix<C64>) -> Self {
        Self::single(ZERO_MODE, mat.clone())
    }

    fn ctx(&self) {}

    fn msize(&self) -> usize {
        self.m
    }

    fn max_abs(&self) -> f64 {
        self.modes.values().map(mat_max).fold(0.0, f64::max)
    }

    fn add_assign(&mut self, o: &Self) {
        assert_eq!(self.m, o.m, "matrix size mismatch");
        for (k, a) in &o.modes {
            self.add_mode(*k, a.clone());
        }
    }

    fn scale(&self, z: C64) -> Self {
        if z == C64::new(0.0, 0.0) {
            return Self::zero(&(), self.m);
        }
        TrigMat { m: self.m, modes: self.modes.iter().map(|(k, a)| (*k, a * z)).collect() }
    }

    fn mul(&self, o: &Self, cap: usize) -> Result<Self> {
        let m = if self.m == 1 { o.m } else { self.m };
        if !(self.m == o.m || self.m == 1 || o.m == 1) {
            return Err(Error::MatrixSize(self.m, o.m));
        }
        let mut r = Self::zero(&(), m);
        for (k1, a) in &self.modes {
            for (k2, b) in &o.modes {
                let prod = if self.m == 1 && o.m != 1 {
                    b * a[(0, 0)]
                } else if o.m == 1 {
                    a * b[(0, 0)]
                } else {
                    a * b
                };
                r.add_mode(mode_add(k1, k2), prod);
                if r.modes.len() > cap {
                    return Err(Error::CapOverflow { modes: r.modes.len(), cap });
                }
            }
        }
        Ok(r)
    }

    fn trace_w(&self, w: &[f64]) -> Self {
        let mut r = Self::zero(&(), 1);
        for (k, a) in &self.modes {
            let t: C64 = (0..self.m).map(|i| a[(i, i)] * w[i]).sum();
            r.add_mode(*k, DMatrix::from_element(1, 1, t));
        }
        r
    }

    fn partial(&self, frame: &Frame, a: usize) -> Self {
        let mut r = Self::zero(&(), self.m);
        for (k, mat) in &self.modes {
            let s = frame.symbol(k, a);
            if s != C64::new(0.0, 0.0) {
                r.add_mode(*k, mat * s);
            }
        }
        r
    }

    fn adjoint(&self) -> Self {
        TrigMat { m: self.m, modes: self.modes.iter().map(|(k, a)| (mode_neg(k), a.adjoint())).collect() }
    }

    fn conj(&self) -> Self {
        TrigMat { m: self.m, modes: self.modes.iter().map(|(k, a)| (mode_neg(k), a.map(|z| z.conj()))).collect() }
    }

    fn prune(&mut self, tol: f64) {
        self.modes.retain(|_, a| mat_max(a) > tol);
    }

    fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }
}

impl TrigForm {
    pub fn trig_zero(frame: Frame, m: usize) -> Self {
        Form::zero(frame, m, ())
    }

    /// Single mode e^{i<k,x>}·mat·e^{blade}.
    pub fn mode(frame: Frame, blade: Blade, k: &[i32], mat: DMatrix<C64>) -> Self {
        Form::from_term(frame, blade, TrigMat::single(mode_from(k), mat))
    }

    pub fn scalar_mode(frame: Frame, blade: Blade, k: &[i32], z: C64) -> Self {
        Self::mode(frame, blade, k, DMatrix::from_element(1, 1, z))
    }

    /// Constant scalar times a real-basis blade dx^{I}.
    pub fn real_blade(frame: Frame, real: Blade, z: C64) -> Self {
        let mut r = Self::trig_zero(frame, 1);
        for (b, w) in real_blade_to_complex(frame.n, real) {
            r.add_term(b, &TrigMat::scalar_mode(ZERO_MODE, z * w));
        }
        r
    }

    /// Terms in the real coordinate basis: (real blade, mode, matrix).
    pub fn to_real_terms(&self) -> Vec<(Blade, Mode, DMatrix<C64>)> {
        let mut acc: BTreeMap<(Blade, Mode), DMatrix<C64>> = BTreeMap::new();
        for (b, c0) in &self.terms {
            for (rb, w) in complex_blade_to_real(self.frame.n, *b) {
                for (k, a) in &c0.modes {
                    let e = acc.entry((rb, *k)).or_insert_with(|| DMatrix::zeros(self.m, self.m));
                    *e += a * w;
                }
            }
        }
        acc.into_iter().filter(|(_, a)| mat_max(a) > 0.0).map(|((b, k), a)| (b, k, a)).collect()
    }

    /// Inverse of [`to_real_terms`].
    pub fn from_real_terms(frame: Frame, m: usize, terms: &[(Blade, Mode, DMatrix<C64>)]) -> Self {
        let mut r = Self::trig_zero(frame, m);
        for (rb, k, a) in terms {
            for (b, w) in real_blade_to_complex(frame.n, *rb) {
                r.add_term(b, &TrigMat::single(*k, a * w));
            }
        }
        r
    }

    /// All modes appearing in any coefficient.
    pub fn support(&self) -> std::collections::BTreeSet<Mode> {
        self.terms.values().flat_map(|c0| c0.modes.keys().cloned()).collect()
    }

    /// Largest |k_j| per real axis.
    pub fn max_mode_per_axis(&self) -> [i32; 2 * MAX_N] {
        let mut r = [0; 2 * MAX_N];
        for k in self.support() {
            for j in 0..2 * MAX_N {
                r[j] = r[j].max(k[j].abs());
            }
        }
        r
    }

    /// Part of the form supported on the single mode k.
    pub fn at_mode(&self, k: &Mode) -> Self {
        let mut r = self.zero_like(self.m);
        for (b, c0) in &self.terms {
            if let Some(a) = c0.modes.get(k) {
                r.add_term(*b, &TrigMat::single(*k, a.clone()));
            }
        }
        r
    }

    pub fn constant_part(&self) -> Self {
        self.at_mode(&ZERO_MODE)
    }

    pub fn is_constant(&self) -> bool {
        self.support().iter().all(|k| *k == ZERO_MODE)
    }

    /// Largest deviation of a scalar form from being real (ᾱ = α).
    pub fn reality_defect(&self) -> f64 {
        self.sub(&self.conj()).max_abs()
    }

    /// Largest deviation of a matrix form from anti-Hermitian (α^† = −α).
    pub fn anti_hermitian_defect(&self) -> f64 {
        self.add(&self.adjoint()).max_abs()
    }

    /// Integral over the torus of a scalar top form, in the complex orientation.
    pub fn integrate(&self) -> Result<C64> {
        self.require_degree(self.frame.dim())?;
        if self.m != 1 {
            return Err(Error::MatrixSize(self.m, 1));
        }
        let top = self.top_coeff();
        Ok(top.get(&ZERO_MODE)[(0, 0)] * self.frame.full_volume_factor())
    }

    /// Sample on a grid; fails unless every mode is resolved (2|k_j| < N_j).
    pub fn to_grid(&self, dims: &GridDims) -> Result<GridForm> {
        let mut r = GridForm::zero(self.frame, self.m, *dims);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            r.terms.insert(*b, GridMat::from_trig(c0, dims)?);
        }
        Ok(r)
    }

    /// Smallest per-axis grid resolving the form, at least `min_n` on active axes.
    pub fn natural_dims(&self, min_n: usize) -> GridDims {
        dims_for(self.frame, &self.max_mode_per_axis(), min_n)
    }
}

/// Per-axis grid dims: 1 on inactive axes, otherwise the least power of two
/// above twice the largest mode (and at least `min_n`).
pub fn dims_for(frame: Frame, kmax: &[i32; 2 * MAX_N], min_n: usize) -> GridDims {
    let mut d = [1usize; 2 * MAX_N];
    for j in 0..frame.dim() {
        if kmax[j] > 0 {
            let mut n = min_n.max(2);
            while n <= 2 * kmax[j] as usize {
                n *= 2;
            }
            d[j] = n;
        }
    }
    d
}

/// Merge per-axis mode bounds.
pub fn kmax_union(a: &[i32; 2 * MAX_N], b: &[i32; 2 * MAX_N]) -> [i32; 2 * MAX_N] {
    let mut r = *a;
    for j in 0..2 * MAX_N {
        r[j] = r[j].max(b[j]);
    }
    r
}
