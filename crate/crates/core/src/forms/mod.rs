//! Exterior calculus for matrix-valued forms on the flat torus (R/2πZ)^{2n}.
//!
//! Forms are stored in the complex coframe e^a = dz^{a+1} (a < n) and
//! e^{n+j} = dz̄^{j+1}, with dz^j = dx^j + i dx^{n+j}. Blades are bitmasks over
//! those 2n indices. The real coordinate basis is used only for input/output.

mod blade;
mod grid;
mod json;
mod pointwise;
mod trig;

pub use blade::*;
pub use grid::*;
pub use json::*;
pub use pointwise::*;
pub use trig::*;

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::fmt::Debug;

pub type C64 = num_complex::Complex64;

/// Largest supported complex dimension.
pub const MAX_N: usize = 4;
/// Fourier mode k in Z^{2n}, padded with zeros.
pub type Mode = [i32; 2 * MAX_N];

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Default cap on the number of Fourier modes in one coefficient.
pub const DEFAULT_MODE_CAP: usize = 100_000;

/// d^c = i(∂̄ − ∂).
pub const DC_CONVENTION: &str = "d^c = i(delbar - del)";

/// Complex torus frame: complex dimension and the Fourier support cap.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub n: usize,
    pub cap: usize,
}

impl PartialEq for Frame {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n
    }
}

impl Frame {
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_N).contains(&n), "complex dimension must be in 1..=4");
        Frame { n, cap: DEFAULT_MODE_CAP }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Real dimension 2n.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn full(&self) -> Blade {
        ((1u32 << (2 * self.n)) - 1) as Blade
    }

    pub fn blades(&self, k: usize) -> Vec<Blade> {
        (0..=self.full()).filter(|b| b.count_ones() as usize == k).collect()
    }

    pub fn blades_pq(&self, p: usize, q: usize) -> Vec<Blade> {
        self.blades(p + q).into_iter().filter(|&b| blade_type(self.n, b) == (p, q)).collect()
    }

    /// ∫ e^{full} in the complex orientation dx¹∧dy¹∧…∧dxⁿ∧dyⁿ.
    pub fn full_volume_factor(&self) -> C64 {
        let n = self.n as i32;
        let s = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        c(0.0, -2.0).powi(n) * s
    }

    /// Derivative symbol of the complex-frame partial ∂_a on the mode e^{i<k,x>}.
    pub fn symbol(&self, k: &Mode, a: usize) -> C64 {
        let n = self.n;
        if a < n {
            c(k[n + a] as f64 * 0.5, k[a] as f64 * 0.5)
        } else {
            let j = a - n;
            c(-(k[n + j] as f64) * 0.5, k[j] as f64 * 0.5)
        }
    }
}

/// Coefficient ring of a form: trigonometric polynomials or grid samples, matrix valued.
pub trait Coeff: Clone + Debug + Send + Sync + Sized {
    type Ctx: Clone + Debug + PartialEq + Send + Sync;
    fn zero(ctx: &Self::Ctx, m: usize) -> Self;
    fn constant(ctx: &Self::Ctx, mat: &DMatrix<C64>) -> Self;
    fn ctx(&self) -> Self::Ctx;
    fn msize(&self) -> usize;
    fn max_abs(&self) -> f64;
    fn add_assign(&mut self, o: &Self);
    fn scale(&self, z: C64) -> Self;
    /// Matrix product; a 1×1 factor broadcasts as a scalar.
    fn mul(&self, o: &Self, cap: usize) -> Result<Self>;
    /// Scalar coefficient tr(diag(w)·A).
    fn trace_w(&self, w: &[f64]) -> Self;
    /// Complex-frame partial derivative ∂_a.
    fn partial(&self, frame: &Frame, a: usize) -> Self;
    /// Pointwise conjugate transpose.
    fn adjoint(&self) -> Self;
    /// Pointwise complex conjugate.
    fn conj(&self) -> Self;
    fn prune(&mut self, tol: f64);
    fn is_zero(&self) -> bool;
}

#[derive(Clone, Copy, Debug)]
pub enum Wedge<'a> {
    /// sign(I,J)·a_I b_J
    Prod,
    /// graded commutator [α∧β]
    Comm,
    /// ⟨α∧β⟩ = Σ sign(I,J) tr(W a_I b_J)
    Trace(&'a [f64]),
}

/// Matrix-valued differential form.
#[derive(Clone, Debug)]
pub struct Form<C: Coeff> {
    pub frame: Frame,
    pub m: usize,
    pub ctx: C::Ctx,
    pub terms: BTreeMap<Blade, C>,
    /// Set on anything that passed through a nonlinear grid operation.
    pub approx: bool,
}

pub type TrigForm = Form<TrigMat>;
pub type GridForm = Form<GridMat>;

impl<C: Coeff> Form<C> {
    pub fn zero(frame: Frame, m: usize, ctx: C::Ctx) -> Self {
        Form { frame, m, ctx, terms: BTreeMap::new(), approx: false }
    }

    pub fn zero_like(&self, m: usize) -> Self {
        Self::zero(self.frame, m, self.ctx.clone())
    }

    pub fn from_term(frame: Frame, blade: Blade, coeff: C) -> Self {
        let mut f = Self::zero(frame, coeff.msize(), coeff.ctx());
        f.add_term(blade, &coeff);
        f
    }

    /// Constant matrix times a blade.
    pub fn constant(frame: Frame, ctx: C::Ctx, blade: Blade, mat: &DMatrix<C64>) -> Self {
        Self::from_term(frame, blade, C::constant(&ctx, mat))
    }

    pub fn scalar(frame: Frame, ctx: C::Ctx, blade: Blade, z: C64) -> Self {
        Self::constant(frame, ctx, blade, &DMatrix::from_element(1, 1, z))
    }

    pub fn one(frame: Frame, ctx: C::Ctx, m: usize) -> Self {
        Self::constant(frame, ctx, 0, &DMatrix::identity(m, m))
    }

    pub fn add_term(&mut self, blade: Blade, coeff: &C) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&blade) {
            Some(c0) => {
                c0.add_assign(coeff);
                if c0.is_zero() {
                    self.terms.remove(&blade);
                }
            }
            None => {
                self.terms.insert(blade, coeff.clone());
            }
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.frame != o.frame {
            return Err(Error::FrameMismatch(format!("n = {} vs {}", self.frame.n, o.frame.n)));
        }
        if self.ctx != o.ctx {
            return Err(Error::FrameMismatch("coefficient context differs".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o).expect("form addition");
        assert_eq!(self.m, o.m, "matrix size mismatch in addition");
        let mut r = self.clone();
        for (b, c0) in &o.terms {
            r.add_term(*b, c0);
        }
        r.approx |= o.approx;
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(cr(-1.0)))
    }

    pub fn neg(&self) -> Self {
        self.scale(cr(-1.0))
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut r = self.zero_like(self.m);
        r.approx = self.approx;
        if z == cr(0.0) {
            return r;
        }
        for (b, c0) in &self.terms {
            r.terms.insert(*b, c0.scale(z));
        }
        r
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(cr(x))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c0| c0.max_abs()).fold(0.0, f64::max)
    }

    pub fn prune(&mut self, tol: f64) {
        for c0 in self.terms.values_mut() {
            c0.prune(tol);
        }
        self.terms.retain(|_, c0| !c0.is_zero());
    }

    /// Degree if the form is homogeneous (zero form reports None).
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|b| b.count_ones() as usize);
        let d = it.next()?;
        if it.all(|e| e == d) {
            Some(d)
        } else {
            None
        }
    }

    pub fn require_degree(&self, k: usize) -> Result<()> {
        match self.degree() {
            None if self.is_zero() => Ok(()),
            Some(d) if d == k => Ok(()),
            Some(d) => Err(Error::Degree { expected: k, got: d }),
            None => Err(Error::Invalid("inhomogeneous form".into())),
        }
    }

    pub fn filter(&self, keep: impl Fn(Blade) -> bool) -> Self {
        let mut r = self.zero_like(self.m);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            if keep(*b) {
                r.terms.insert(*b, c0.clone());
            }
        }
        r
    }

    /// Π^{p,q}.
    pub fn proj(&self, p: usize, q: usize) -> Self {
        let n = self.frame.n;
        self.filter(|b| blade_type(n, b) == (p, q))
    }

    /// Degree-k part.
    pub fn deg(&self, k: usize) -> Self {
        self.filter(|b| b.count_ones() as usize == k)
    }

    pub fn wedge(&self, o: &Self, rule: Wedge) -> Result<Self> {
        self.check(o)?;
        let cap = self.frame.cap;
        let m_out = match rule {
            Wedge::Trace(_) => 1,
            _ => {
                if self.m == o.m || o.m == 1 {
                    self.m
                } else if self.m == 1 {
                    o.m
                } else {
                    return Err(Error::MatrixSize(self.m, o.m));
                }
            }
        };
        if let Wedge::Trace(w) = rule {
            if self.m != o.m || w.len() != self.m {
                return Err(Error::MatrixSize(self.m, o.m));
            }
        }
        let mut r = self.zero_like(m_out);
        r.approx = self.approx || o.approx;
        for (bi, ci) in &self.terms {
            for (bj, cj) in &o.terms {
                let s = merge_sign(*bi, *bj);
                if s == 0 {
                    continue;
                }
                let prod = match rule {
                    Wedge::Prod => ci.mul(cj, cap)?,
                    Wedge::Comm => {
                        let mut ab = ci.mul(cj, cap)?;
                        ab.add_assign(&cj.mul(ci, cap)?.scale(cr(-1.0)));
                        ab
                    }
                    Wedge::Trace(w) => ci.mul(cj, cap)?.trace_w(w),
                };
                r.add_term(bi | bj, &prod.scale(cr(s as f64)));
            }
        }
        Ok(r)
    }

    pub fn w(&self, o: &Self) -> Result<Self> {
        self.wedge(o, Wedge::Prod)
    }

    /// Sum over frame indices a in `range` of ∂_a(c_I) e^a ∧ e^I.
    fn deriv_range(&self, range: std::ops::Range<usize>) -> Self {
        let mut r = self.zero_like(self.m);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            for a in range.clone() {
                let s = merge_sign(1 << a, *b);
                if s == 0 {
                    continue;
                }
                let dc0 = c0.partial(&self.frame, a);
                r.add_term(b | (1 << a), &dc0.scale(cr(s as f64)));
            }
        }
        r
    }

    pub fn d(&self) -> Self {
        self.deriv_range(0..2 * self.frame.n)
    }

    pub fn del(&self) -> Self {
        self.deriv_range(0..self.frame.n)
    }

    pub fn delbar(&self) -> Self {
        self.deriv_range(self.frame.n..2 * self.frame.n)
    }

    /// d^c = i(∂̄ − ∂).
    pub fn dc(&self) -> Self {
        self.delbar().sub(&self.del()).scale(I)
    }

    /// Coefficient-wise partial ∂_a.
    pub fn partial(&self, a: usize) -> Self {
        let mut r = self.zero_like(self.m);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            r.add_term(*b, &c0.partial(&self.frame, a));
        }
        r
    }

    /// Interior product with the coordinate vector ∂_a.
    pub fn contract(&self, a: usize) -> Self {
        let mut r = self.zero_like(self.m);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            if b & (1 << a) == 0 {
                continue;
            }
            let below = (b & ((1u16 << a) - 1)).count_ones();
            let s = if below % 2 == 0 { 1.0 } else { -1.0 };
            r.add_term(b & !(1 << a), &c0.scale(cr(s)));
        }
        r
    }

    /// i_V for V = Σ V^a ∂_a with scalar 0-form components.
    pub fn interior(&self, v: &[Self]) -> Result<Self> {
        let mut r = self.zero_like(self.m);
        for (a, va) in v.iter().enumerate() {
            if va.is_zero() {
                continue;
            }
            r = r.add(&va.w(&self.contract(a))?);
        }
        r.approx |= self.approx;
        Ok(r)
    }

    /// Form-level complex conjugation (z ↔ z̄ in the blade, conjugated coefficients).
    pub fn conj(&self) -> Self {
        self.conj_with(|c0| c0.conj())
    }

    /// Conjugate transpose of matrix coefficients combined with form conjugation.
    pub fn adjoint(&self) -> Self {
        self.conj_with(|c0| c0.adjoint())
    }

    fn conj_with(&self, f: impl Fn(&C) -> C) -> Self {
        let mut r = self.zero_like(self.m);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            let (bb, s) = conj_blade(self.frame.n, *b);
            r.add_term(bb, &f(c0).scale(cr(s)));
        }
        r
    }

    /// Real part (α + ᾱ)/2 of a scalar form.
    pub fn re(&self) -> Self {
        self.add(&self.conj()).scale_re(0.5)
    }

    /// Imaginary part (α − ᾱ)/(2i) of a scalar form.
    pub fn im(&self) -> Self {
        self.sub(&self.conj()).scale(c(0.0, -0.5))
    }

    /// Complex structure on 1-forms: J dz = −i dz, J dz̄ = i dz̄.
    pub fn j1(&self) -> Self {
        let n = self.frame.n;
        let mut r = self.zero_like(self.m);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            let (p, q) = blade_type(n, *b);
            let z = C64::new(0.0, 1.0).powi(q as i32 - p as i32);
            r.add_term(*b, &c0.scale(z));
        }
        r
    }

    /// Scalar form tr(W·α).
    pub fn trace_w(&self, w: &[f64]) -> Self {
        let mut r = self.zero_like(1);
        r.approx = self.approx;
        for (b, c0) in &self.terms {
            r.add_term(*b, &c0.trace_w(w));
        }
        r
    }

    /// Left and right multiplication by 0-forms: g·α·h.
    pub fn sandwich(&self, g: &Self, h: &Self) -> Result<Self> {
        g.w(self)?.w(h)
    }

    /// Coefficient of the top blade e^{full} (zero coefficient if absent).
    pub fn top_coeff(&self) -> C {
        self.terms.get(&self.frame.full()).cloned().unwrap_or_else(|| C::zero(&self.ctx, self.m))
    }

    pub fn coeff(&self, b: Blade) -> C {
        self.terms.get(&b).cloned().unwrap_or_else(|| C::zero(&self.ctx, self.m))
    }

    /// k-th wedge power divided by k!.
    pub fn power_over_factorial(&self, k: usize) -> Result<Self> {
        let mut r = Self::one(self.frame, self.ctx.clone(), self.m);
        for j in 1..=k {
            r = r.w(self)?.scale_re(1.0 / j as f64);
        }
        Ok(r)
    }
}
