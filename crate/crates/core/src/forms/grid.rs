use super::*;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Points per real axis; axes beyond 2n are 1.
pub type GridDims = [usize; 2 * MAX_N];

pub fn grid_points(d: &GridDims) -> usize {
    d.iter().product()
}

fn strides(d: &GridDims) -> [usize; 2 * MAX_N] {
    let mut s = [1usize; 2 * MAX_N];
    for j in (0..2 * MAX_N - 1).rev() {
        s[j] = s[j + 1] * d[j + 1];
    }
    s
}

/// Real coordinates of grid point p (x_j = 2π i_j / N_j).
pub fn grid_coords(d: &GridDims, p: usize) -> [f64; 2 * MAX_N] {
    let s = strides(d);
    let mut x = [0.0; 2 * MAX_N];
    for j in 0..2 * MAX_N {
        let i = (p / s[j]) % d[j];
        x[j] = 2.0 * std::f64::consts::PI * i as f64 / d[j] as f64;
    }
    x
}

/// Signed frequency of FFT index i on an axis of n points (Nyquist maps to +n/2).
fn freq(i: usize, n: usize) -> i64 {
    if 2 * i <= n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Matrix field sampled on a regular grid; layout vals[p·m² + r·m + c].
#[derive(Clone, Debug, PartialEq)]
pub struct GridMat {
    pub m: usize,
    pub dims: GridDims,
    pub vals: Vec<C64>,
}

fn fft_axis(vals: &mut [C64], d: &GridDims, m2: usize, axis: usize, inverse: bool) {
    let n = d[axis];
    if n == 1 {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let s = strides(d)[axis];
    let total = grid_points(d);
    let outer = total / (n * s);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        for inner in 0..s {
            let base = o * n * s + inner;
            for e in 0..m2 {
                for t in 0..n {
                    buf[t] = vals[(base + t * s) * m2 + e];
                }
                fft.process(&mut buf);
                for t in 0..n {
                    vals[(base + t * s) * m2 + e] = buf[t];
                }
            }
        }
    }
}

impl GridMat {
    pub fn points(&self) -> usize {
        grid_points(&self.dims)
    }

    pub fn point(&self, p: usize) -> DMatrix<C64> {
        let m2 = self.m * self.m;
        DMatrix::from_row_slice(self.m, self.m, &self.vals[p * m2..(p + 1) * m2])
    }

    pub fn from_points(dims: GridDims, m: usize, mats: &[DMatrix<C64>]) -> Self {
        let mut vals = Vec::with_capacity(mats.len() * m * m);
        for a in mats {
            for r in 0..m {
                for c0 in 0..m {
                    vals.push(a[(r, c0)]);
                }
            }
        }
        GridMat { m, dims, vals }
    }

    /// Apply a pointwise matrix function (parallel over points).
    pub fn map_points(&self, m_out: usize, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64> + Sync) -> Self {
        let mats: Vec<DMatrix<C64>> = (0..self.points()).into_par_iter().map(|p| f(&self.point(p))).collect();
        Self::from_points(self.dims, m_out, &mats)
    }

    /// Fallible pointwise map.
    pub fn try_map_points(
        &self,
        m_out: usize,
        f: impl Fn(usize, &DMatrix<C64>) -> Result<DMatrix<C64>> + Sync,
    ) -> Result<Self> {
        let mats: Result<Vec<DMatrix<C64>>> = (0..self.points()).into_par_iter().map(|p| f(p, &self.point(p))).collect();
        Ok(Self::from_points(self.dims, m_out, &mats?))
    }

    pub fn scalar_values(&self) -> Vec<C64> {
        assert_eq!(self.m, 1);
        self.vals.clone()
    }

    pub fn from_scalars(dims: GridDims, v: Vec<C64>) -> Self {
        GridMat { m: 1, dims, vals: v }
    }

    pub fn mean(&self) -> DMatrix<C64> {
        let m2 = self.m * self.m;
        let mut acc = vec![C64::new(0.0, 0.0); m2];
        for p in 0..self.points() {
            for e in 0..m2 {
                acc[e] += self.vals[p * m2 + e];
            }
        }
        let np = self.points() as f64;
        DMatrix::from_row_slice(self.m, self.m, &acc.iter().map(|z| z / np).collect::<Vec<_>>())
    }

    pub fn from_trig(t: &TrigMat, dims: &GridDims) -> Result<Self> {
        let m2 = t.m * t.m;
        let np = grid_points(dims);
        let st = strides(dims);
        let mut vals = vec![C64::new(0.0, 0.0); np * m2];
        for (k, a) in &t.modes {
            let mut p = 0;
            for j in 0..2 * MAX_N {
                let n = dims[j];
                if 2 * k[j].unsigned_abs() as usize >= n && k[j] != 0 || (n == 1 && k[j] != 0) {
                    return Err(Error::Nyquist { mode: k.to_vec(), axis: j, n });
                }
                p += (k[j].rem_euclid(n as i32) as usize) * st[j];
            }
            for r in 0..t.m {
                for c0 in 0..t.m {
                    vals[p * m2 + r * t.m + c0] += a[(r, c0)];
                }
            }
        }
        for j in 0..2 * MAX_N {
            fft_axis(&mut vals, dims, m2, j, true);
        }
        Ok(GridMat { m: t.m, dims: *dims, vals })
    }

    /// Fourier coefficients (forward FFT / P), dropping entries below `tol` and the
    /// unresolved Nyquist bins.
    pub fn to_trig(&self, tol: f64) -> TrigMat {
        let m2 = self.m * self.m;
        let mut vals = self.vals.clone();
        for j in 0..2 * MAX_N {
            fft_axis(&mut vals, &self.dims, m2, j, false);
        }
        let np = self.points() as f64;
        let st = strides(&self.dims);
        let mut out = TrigMat::zero(&(), self.m);
        for p in 0..self.points() {
            let slice = &vals[p * m2..(p + 1) * m2];
            if slice.iter().all(|z| z.norm() / np <= tol) {
                continue;
            }
            let mut k = [0i32; 2 * MAX_N];
            let mut nyquist = false;
            for j in 0..2 * MAX_N {
                let i = (p / st[j]) % self.dims[j];
                nyquist |= self.dims[j] > 1 && 2 * i == self.dims[j];
                k[j] = freq(i, self.dims[j]) as i32;
            }
            if nyquist {
                continue;
            }
            let a = DMatrix::from_row_slice(self.m, self.m, &slice.iter().map(|z| z / np).collect::<Vec<_>>());
            out.modes.insert(k, a);
        }
        out
    }

    /// Spectral derivative along real axis j (Nyquist symbol set to zero).
    pub fn deriv_axis(&self, axis: usize) -> Self {
        let n = self.dims[axis];
        let mut out = GridMat { m: self.m, dims: self.dims, vals: vec![C64::new(0.0, 0.0); self.vals.len()] };
        if n == 1 {
            return out;
        }
        let m2 = self.m * self.m;
        let mut vals = self.vals.clone();
        fft_axis(&mut vals, &self.dims, m2, axis, false);
        let s = strides(&self.dims)[axis];
        for p in 0..self.points() {
            let i = (p / s) % n;
            let f = if 2 * i == n { 0.0 } else { freq(i, n) as f64 };
            let z = C64::new(0.0, f / n as f64);
            for e in 0..m2 {
                vals[p * m2 + e] *= z;
            }
        }
        fft_axis(&mut vals, &self.dims, m2, axis, true);
        out.vals = vals;
        out
    }
}

impl Coeff for GridMat {
    type Ctx = GridDims;

    fn zero(d: &GridDims, m: usize) -> Self {
        GridMat { m, dims: *d, vals: vec![C64::new(0.0, 0.0); grid_points(d) * m * m] }
    }

    fn constant(d: &GridDims, mat: &DMatrix<C64>) -> Self {
        let m = mat.nrows();
        let mut vals = Vec::with_capacity(grid_points(d) * m * m);
        for _ in 0..grid_points(d) {
            for r in 0..m {
                for c0 in 0..m {
                    vals.push(mat[(r, c0)]);
                }
            }
        }
        GridMat { m, dims: *d, vals }
    }

    fn ctx(&self) -> GridDims {
        self.dims
    }

    fn msize(&self) -> usize {
        self.m
    }

    fn max_abs(&self) -> f64 {
        self.vals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn add_assign(&mut self, o: &Self) {
        assert_eq!(self.m, o.m, "matrix size mismatch");
        self.vals.iter_mut().zip(&o.vals).for_each(|(a, b)| *a += b);
    }

    fn scale(&self, z: C64) -> Self {
        GridMat { m: self.m, dims: self.dims, vals: self.vals.iter().map(|a| a * z).collect() }
    }

    fn mul(&self, o: &Self, _cap: usize) -> Result<Self> {
        if !(self.m == o.m || self.m == 1 || o.m == 1) {
            return Err(Error::MatrixSize(self.m, o.m));
        }
        if self.m == 1 || o.m == 1 {
            let (s, mat) = if self.m == 1 { (self, o) } else { (o, self) };
            let m2 = mat.m * mat.m;
            let vals = mat.vals.iter().enumerate().map(|(i, v)| v * s.vals[i / m2]).collect();
            return Ok(GridMat { m: mat.m, dims: self.dims, vals });
        }
        let m = self.m;
        let m2 = m * m;
        let mut vals = vec![C64::new(0.0, 0.0); self.vals.len()];
        vals.par_chunks_mut(m2).enumerate().for_each(|(p, out)| {
            let a = &self.vals[p * m2..(p + 1) * m2];
            let b = &o.vals[p * m2..(p + 1) * m2];
            for r in 0..m {
                for c0 in 0..m {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..m {
                        acc += a[r * m + t] * b[t * m + c0];
                    }
                    out[r * m + c0] = acc;
                }
            }
        });
        Ok(GridMat { m, dims: self.dims, vals })
    }

    fn trace_w(&self, w: &[f64]) -> Self {
        let m = self.m;
        let m2 = m * m;
        let vals = (0..self.points()).map(|p| (0..m).map(|i| self.vals[p * m2 + i * m + i] * w[i]).sum()).collect();
        GridMat { m: 1, dims: self.dims, vals }
    }

    fn partial(&self, frame: &Frame, a: usize) -> Self {
        let n = frame.n;
        let j = a % n;
        let dx = self.deriv_axis(j);
        let dy = self.deriv_axis(n + j);
        let s = if a < n { -1.0 } else { 1.0 };
        let vals = dx.vals.iter().zip(&dy.vals).map(|(x, y)| (x + C64::new(0.0, s) * y) * 0.5).collect();
        GridMat { m: self.m, dims: self.dims, vals }
    }

    fn adjoint(&self) -> Self {
        self.map_points(self.m, |a| a.adjoint())
    }

    fn conj(&self) -> Self {
        GridMat { m: self.m, dims: self.dims, vals: self.vals.iter().map(|z| z.conj()).collect() }
    }

    fn prune(&mut self, _tol: f64) {}

    fn is_zero(&self) -> bool {
        self.vals.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

impl GridForm {
    pub fn grid_zero(frame: Frame, m: usize, dims: GridDims) -> Self {
        Form::zero(frame, m, dims)
    }

    /// Fourier coefficients of every blade.
    pub fn to_trig(&self, tol: f64) -> TrigForm {
        let mut r = TrigForm::trig_zero(self.frame, self.m);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            r.add_term(*b, &c0.to_trig(tol));
        }
        r
    }

    /// Lattice mean of the top component, in the complex orientation.
    pub fn integrate(&self) -> Result<C64> {
        self.require_degree(self.frame.dim())?;
        if self.m != 1 {
            return Err(Error::MatrixSize(self.m, 1));
        }
        Ok(self.top_coeff().mean()[(0, 0)] * self.frame.full_volume_factor())
    }

    /// Multiply every coefficient by a scalar grid function.
    pub fn times(&self, f: &GridMat) -> Self {
        let mut r = self.zero_like(self.m);
        r.approx = true;
        for (b, c0) in &self.terms {
            r.terms.insert(*b, f.mul(c0, usize::MAX).expect("scalar broadcast"));
        }
        r
    }

    /// Largest pointwise absolute value over all coefficients.
    pub fn sup(&self) -> f64 {
        self.max_abs()
    }
}
