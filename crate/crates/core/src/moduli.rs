//! Linearized Calabi system, the complex 𝐏̂ → 𝐋, gauge fixing and Condition A on flat
//! backgrounds, variation classes, and the finite-dimensional metrics on the moduli.

use crate::cohomology::{duality_pairing, reduce_class, CohomClass, Flavor};
use crate::dilaton::{Configuration, TangentW};
use crate::error::{Error, Result};
use crate::forms::*;
use crate::gauge::{covariant_d, covariant_delbar, curvature, pair, LieAlgebra, PairingSpec};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Background residual allowed before the linearization is trusted.
pub const BACKGROUND_TOL: f64 = 1e-8;
/// Relative singular-value threshold used for kernels.
pub const KERNEL_TOL: f64 = 1e-9;

/// The four rows of the Calabi system (or of its linearization), as forms.
#[derive(Clone, Debug)]
pub struct LForms<C: Coeff = TrigMat> {
    /// ad-valued top form
    pub hym: Form<C>,
    /// (2n−1)-form
    pub balanced: Form<C>,
    /// ad-valued (0,2)-form
    pub f02: Form<C>,
    /// 3-form (4-form for the nonlinear system)
    pub bianchi: Form<C>,
}

impl<C: Coeff> LForms<C> {
    pub fn sub(&self, o: &Self) -> Self {
        LForms {
            hym: self.hym.sub(&o.hym),
            balanced: self.balanced.sub(&o.balanced),
            f02: self.f02.sub(&o.f02),
            bianchi: self.bianchi.sub(&o.bianchi),
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        LForms {
            hym: self.hym.scale_re(x),
            balanced: self.balanced.scale_re(x),
            f02: self.f02.scale_re(x),
            bianchi: self.bianchi.scale_re(x),
        }
    }

    pub fn norms(&self) -> [f64; 4] {
        [self.hym.max_abs(), self.balanced.max_abs(), self.f02.max_abs(), self.bianchi.max_abs()]
    }

    pub fn max_abs(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// ω^k (no factorial).
fn wpow(omega: &TrigForm, k: usize) -> Result<TrigForm> {
    Ok(omega.power_over_factorial(k)?.scale_re(fact(k)))
}

fn check_background(w: &Configuration) -> Result<()> {
    let r = w.calabi_residual()?.max();
    if r > BACKGROUND_TOL {
        return Err(Error::Constraint { what: "background does not solve the Calabi system".into(), residual: r });
    }
    Ok(())
}

fn tangent_dims(w: &Configuration, v: &TangentW) -> Result<GridDims> {
    w.dims(&[&v.omega, &v.b, &v.a])
}

/// The Calabi system with raw powers: F∧ω^{n−1}, d(e^{−ℓf}ω^{n−1}), F^{0,2}, dd^cω + ⟨F∧F⟩.
pub fn calabi_forms_at(w: &Configuration, dims: &GridDims) -> Result<LForms<GridMat>> {
    let n = w.frame().n;
    let f = curvature(&w.theta_r())?;
    let wn1 = wpow(&w.omega, n - 1)?;
    let e = w.ehat_grid(dims)?;
    Ok(LForms {
        hym: f.w(&wn1)?.to_grid(dims)?,
        balanced: wn1.to_grid(dims)?.times(&e).d(),
        f02: f.proj(0, 2).to_grid(dims)?,
        bianchi: w.omega.dc().d().add(&pair(&f, &f, &w.spec)?).to_grid(dims)?,
    })
}

/// 𝐋(v) on the grid. Works on any background; the balanced row uses pointwise Λ and e^{−ℓf}.
pub fn linearized_l_at(w: &Configuration, v: &TangentW, dims: &GridDims) -> Result<LForms<GridMat>> {
    let n = w.frame().n;
    let l = w.ell();
    let theta = w.theta_r();
    let f = curvature(&theta)?;
    let (wn1, wn2) = (wpow(&w.omega, n - 1)?, wpow(&w.omega, n.saturating_sub(2))?);
    let mut hym = covariant_d(&theta, &v.a)?.w(&wn1)?;
    if n >= 2 {
        hym = hym.add(&f.w(&v.omega)?.w(&wn2)?.scale_re(n as f64 - 1.0));
    }
    let e = w.ehat_grid(dims)?;
    let (lam, _) = lambda_contraction(&w.omega, &v.omega, dims)?;
    let mut inner = wn1.to_grid(dims)?.times(&lam).scale_re(-0.5 * l);
    if n >= 2 {
        inner = inner.add(&v.omega.w(&wn2)?.to_grid(dims)?.scale_re(n as f64 - 1.0));
    }
    let balanced = inner.times(&e).d();
    let f02 = covariant_delbar(&theta, &v.a.proj(0, 1))?;
    let bianchi = v.omega.dc().add(&pair(&v.a, &f, &w.spec)?.scale_re(2.0)).sub(&v.b.d());
    Ok(LForms { hym: hym.to_grid(dims)?, balanced, f02: f02.to_grid(dims)?, bianchi: bianchi.to_grid(dims)? })
}

/// 𝐋(v) at a background solving the Calabi system.
pub fn linearized_l(w: &Configuration, v: &TangentW) -> Result<LForms<GridMat>> {
    check_background(w)?;
    linearized_l_at(w, v, &tangent_dims(w, v)?)
}

/// An element (u, ξ) of Ω⁰(ad) ⊕ Ω¹.
#[derive(Clone, Debug)]
pub struct GaugeVector {
    pub u: TrigForm,
    pub xi: TrigForm,
}

impl GaugeVector {
    pub fn add(&self, o: &Self) -> Self {
        GaugeVector { u: self.u.add(&o.u), xi: self.xi.add(&o.xi) }
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.xi.max_abs())
    }
}

/// Per-mode matrices of the complex and of 𝓛 = 𝐏̂*𝐏̂ on Ω⁰(ad) × Im d*.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub mode: Mode,
    /// 𝐋: tangent coordinates → residual coordinates
    pub l: DMatrix<C64>,
    /// 𝐏̂: (u, ξ) coordinates → tangent coordinates
    pub p_hat: DMatrix<C64>,
    /// 𝐏̂*: tangent coordinates → (u, ξ) coordinates
    pub p_hat_star: DMatrix<C64>,
    /// 𝓛 in (u, coexact ξ) coordinates
    pub cal_l: DMatrix<C64>,
    /// columns span the coexact 1-forms at this mode (real-axis coordinates)
    pub coexact: DMatrix<C64>,
}

/// Kernel count of one mode of 𝓛.
#[derive(Clone, Debug, Serialize)]
pub struct ModeKernel {
    pub mode: Vec<i32>,
    pub size: usize,
    pub kernel: usize,
    pub smin: f64,
    pub square: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionAReport {
    pub kmax: i32,
    pub modes: Vec<ModeKernel>,
    pub constant_kernel: usize,
    pub nonconstant_kernel: usize,
    pub all_square: bool,
    pub threshold: f64,
}

impl ConditionAReport {
    /// Condition A: only constant modes contribute to the kernel.
    pub fn holds(&self) -> bool {
        self.nonconstant_kernel == 0 && self.all_square
    }
}

/// Gauge-fixed tangent together with the removed gauge direction.
#[derive(Clone, Debug)]
pub struct GaugeFixed {
    pub v: TangentW,
    pub y: GaugeVector,
    pub constant_kernel: usize,
    /// max of the two gauge-condition residuals after fixing
    pub residual: f64,
}

/// Aeppli classes 𝔞̇ and Bott–Chern classes 𝔟̇ of a fibre variation.
#[derive(Clone, Debug)]
pub struct VariationClasses {
    pub a_re: CohomClass,
    pub a_im: CohomClass,
    pub b_re: CohomClass,
    pub b_im: CohomClass,
}

/// The four pairings entering the fibre metric.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ClassPairings {
    /// Re𝔞̇·𝔟
    pub re_a_b: f64,
    /// Re𝔞̇·Re𝔟̇
    pub re_a_re_b: f64,
    /// Im𝔞̇·𝔟
    pub im_a_b: f64,
    /// Im𝔞̇·Im𝔟̇
    pub im_a_im_b: f64,
}

/// A background with constant ω and constant flat connection, where every operator is
/// diagonal in Fourier modes.
#[derive(Clone, Debug)]
pub struct FlatBackground {
    pub w: Configuration,
    pub alg: LieAlgebra,
    theta: TrigForm,
    f: TrigForm,
    ehat: f64,
    m_ell: f64,
    vol: C64,
    pw: Vec<TrigForm>,
    star_inv: DMatrix<C64>,
    ginv: DMatrix<f64>,
    ad_pinv: DMatrix<C64>,
}

impl FlatBackground {
    pub fn new(w: Configuration, alg: LieAlgebra) -> Result<Self> {
        if alg.pairing != w.spec {
            return Err(Error::Invalid("Lie algebra pairing differs from the configuration".into()));
        }
        let theta = w.theta_r();
        if !w.omega.is_constant() || !theta.is_constant() {
            return Err(Error::Invalid("flat background needs constant ω and connection".into()));
        }
        let f = curvature(&theta)?;
        if f.max_abs() > 1e-12 {
            return Err(Error::Invalid("flat background needs F = 0".into()));
        }
        check_background(&w)?;
        let frame = w.frame();
        let n = frame.n;
        let dims = w.dims(&[])?;
        let ehat = w.ehat_grid(&dims)?.mean()[(0, 0)].re;
        let m_ell = w.m_ell()?;
        let pw = (0..=n).map(|k| wpow(&w.omega, k)).collect::<Result<Vec<_>>>()?;
        let vol = pw[n].top_coeff().constant_part()[(0, 0)] / fact(n);

        let wn1f = pw[n - 1].scale_re(1.0 / fact(n - 1));
        let full = frame.full();
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..2 * n {
            let e = TrigForm::scalar_mode(frame, 1 << a, &[], cr(1.0)).j1().w(&wn1f)?;
            for b in 0..2 * n {
                s[(b, a)] = e.coeff(full ^ (1 << b)).constant_part()[(0, 0)];
            }
        }
        let star_inv = s.try_inverse().ok_or_else(|| Error::Singular(vec![]))?;

        let mut om = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for (rb, _, a) in w.omega.to_real_terms() {
            let idx = blade_indices(rb);
            om[(idx[0], idx[1])] = a[(0, 0)].re;
            om[(idx[1], idx[0])] = -a[(0, 0)].re;
        }
        let mut jm = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            jm[(n + j, j)] = 1.0;
            jm[(j, n + j)] = -1.0;
        }
        let g = &om * &jm;
        let ginv = g.try_inverse().ok_or_else(|| Error::NotPositive("degenerate metric".into()))?;

        let m = alg.dim_matrix();
        let mut bmat = DMatrix::<C64>::zeros(m * m, alg.dim());
        for (i, e) in alg.basis.iter().enumerate() {
            for (r, z) in e.iter().enumerate() {
                bmat[(r, i)] = *z;
            }
        }
        let ad_pinv = bmat.pseudo_inverse(1e-12).map_err(|e| Error::Invalid(e.into()))?;
        Ok(FlatBackground { w, alg, theta, f, ehat, m_ell, vol, pw, star_inv, ginv, ad_pinv })
    }

    pub fn n(&self) -> usize {
        self.w.frame().n
    }

    fn frame(&self) -> Frame {
        self.w.frame()
    }

    pub fn ehat(&self) -> f64 {
        self.ehat
    }

    pub fn m_ell(&self) -> f64 {
        self.m_ell
    }

    fn wp(&self, k: usize) -> &TrigForm {
        &self.pw[k]
    }

    /// Λα for a 2-form α, exact since ω is constant.
    pub fn lambda(&self, alpha: &TrigForm) -> Result<TrigForm> {
        let n = self.n();
        let top = alpha.proj(1, 1).w(self.wp(n - 1))?.scale_re(1.0 / fact(n - 1)).top_coeff();
        Ok(TrigForm::from_term(self.frame(), 0, top.scale(cr(1.0) / self.vol)))
    }

    /// Hodge star of a (possibly ad-valued) top form.
    fn star_top(&self, t: &TrigForm) -> TrigForm {
        TrigForm::from_term(self.frame(), 0, t.top_coeff().scale(cr(1.0) / self.vol))
    }

    /// Hodge star of a scalar (2n−1)-form, using ⋆ξ = Jξ∧ω^{n−1}/(n−1)! and ⋆⋆ = −1.
    fn star_odd(&self, t: &TrigForm) -> TrigForm {
        let frame = self.frame();
        let n = self.n();
        let full = frame.full();
        let mut r = TrigForm::trig_zero(frame, 1);
        for k in t.support() {
            let tv = DVector::from_iterator(2 * n, (0..2 * n).map(|b| t.coeff(full ^ (1 << b)).get(&k)[(0, 0)]));
            let xi = &self.star_inv * tv;
            for a in 0..2 * n {
                r.add_term(1 << a, &TrigMat::scalar_mode(k, -xi[a]));
            }
        }
        r
    }

    /// e^{−ℓf}((n−1)β^{1,1}∧ω^{n−2} − (ℓ/2)(Λβ)ω^{n−1}), the form whose d is the balanced row.
    fn balanced_inner(&self, beta: &TrigForm) -> Result<TrigForm> {
        let n = self.n();
        let l = self.w.ell();
        let mut r = self.lambda(beta)?.w(self.wp(n - 1))?.scale_re(-0.5 * l);
        if n >= 2 {
            r = r.add(&beta.proj(1, 1).w(self.wp(n - 2))?.scale_re(n as f64 - 1.0));
        }
        Ok(r.scale_re(self.ehat))
    }

    /// 𝐋(v), exact on trigonometric polynomials.
    pub fn l(&self, v: &TangentW) -> Result<LForms> {
        let n = self.n();
        let mut hym = covariant_d(&self.theta, &v.a)?.w(self.wp(n - 1))?;
        if n >= 2 {
            hym = hym.add(&self.f.w(&v.omega)?.w(self.wp(n - 2))?.scale_re(n as f64 - 1.0));
        }
        let balanced = self.balanced_inner(&v.omega)?.d();
        let f02 = covariant_delbar(&self.theta, &v.a.proj(0, 1))?;
        let bianchi = v.omega.dc().add(&pair(&v.a, &self.f, &self.w.spec)?.scale_re(2.0)).sub(&v.b.d());
        Ok(LForms { hym, balanced, f02, bianchi })
    }

    /// 𝐏̂(u, ξ) = (0, dξ + 2⟨u, F⟩, d^h u).
    pub fn p_hat(&self, y: &GaugeVector) -> Result<TangentW> {
        Ok(TangentW {
            omega: TrigForm::trig_zero(self.frame(), 1),
            b: y.xi.d().add(&pair(&y.u, &self.f, &self.w.spec)?.scale_re(2.0)),
            a: covariant_d(&self.theta, &y.u)?,
        })
    }

    /// d^hJȧ∧ω^{n−1} − (n−1)F∧ḃ∧ω^{n−2}.
    fn gauge_form_a(&self, v: &TangentW) -> Result<TrigForm> {
        let n = self.n();
        let mut r = covariant_d(&self.theta, &v.a.j1())?.w(self.wp(n - 1))?;
        if n >= 2 {
            r = r.sub(&self.f.w(&v.b)?.w(self.wp(n - 2))?.scale_re(n as f64 - 1.0));
        }
        Ok(r)
    }

    /// 𝐏̂*(v) for the weighted L² pairings.
    pub fn p_hat_adjoint(&self, v: &TangentW) -> Result<GaugeVector> {
        let c = 1.0 / fact(self.n() - 1);
        let u = self.star_top(&self.gauge_form_a(v)?).scale_re(c * self.ehat);
        let xi = self.star_odd(&self.balanced_inner(&v.b)?.d()).scale_re(c);
        Ok(GaugeVector { u, xi })
    }

    /// 𝓛 = 𝐏̂*𝐏̂.
    pub fn cal_l(&self, y: &GaugeVector) -> Result<GaugeVector> {
        self.p_hat_adjoint(&self.p_hat(y)?)
    }

    /// The two gauge conditions d(e^{−ℓf}(…ḃ…)) and d^hJȧ∧ω^{n−1} − (n−1)F∧ḃ∧ω^{n−2}.
    pub fn gauge_residual(&self, v: &TangentW) -> Result<f64> {
        Ok(self.balanced_inner(&v.b)?.d().max_abs().max(self.gauge_form_a(v)?.max_abs()))
    }

    /// ⟨y₁, y₂⟩ = (2−ℓ)/M (∫⟨u₁,u₂⟩ωⁿ/n! + ½∫ξ₁∧Jξ₂∧e^{−ℓf}ω^{n−1}/(n−1)!).
    pub fn l2_pairing(&self, y1: &GaugeVector, y2: &GaugeVector) -> Result<f64> {
        let n = self.n();
        let l = self.w.ell();
        let uu = pair(&y1.u, &y2.u, &self.w.spec)?.w(self.wp(n))?.scale_re(1.0 / fact(n));
        let xx = y1.xi.w(&y2.xi.j1())?.w(self.wp(n - 1))?.scale_re(self.ehat / fact(n - 1));
        let s = uu.integrate()? + xx.integrate()? * 0.5;
        Ok((2.0 - l) / self.m_ell * s.re)
    }

    // Coordinates at a single mode.

    fn ad_coords(&self, a: &DMatrix<C64>) -> DVector<C64> {
        let v = DVector::from_iterator(a.len(), a.iter().cloned());
        &self.ad_pinv * v
    }

    fn real_coeffs(f: &TrigForm, k: &Mode) -> std::collections::BTreeMap<Blade, DMatrix<C64>> {
        f.at_mode(k).to_real_terms().into_iter().map(|(b, _, a)| (b, a)).collect()
    }

    fn scalar_coords(&self, f: &TrigForm, deg: usize, k: &Mode, out: &mut Vec<C64>) {
        let rc = Self::real_coeffs(f, k);
        for b in self.frame().blades(deg) {
            out.push(rc.get(&b).map(|a| a[(0, 0)]).unwrap_or(cr(0.0)));
        }
    }

    fn ad_real_coords(&self, f: &TrigForm, deg: usize, k: &Mode, out: &mut Vec<C64>) {
        let rc = Self::real_coeffs(f, k);
        let m = self.alg.dim_matrix();
        for b in self.frame().blades(deg) {
            let a = rc.get(&b).cloned().unwrap_or_else(|| DMatrix::zeros(m, m));
            out.extend(self.ad_coords(&a).iter());
        }
    }

    fn tangent_coords(&self, v: &TangentW, k: &Mode) -> DVector<C64> {
        let mut out = Vec::new();
        for b in self.frame().blades_pq(1, 1) {
            out.push(v.omega.coeff(b).get(k)[(0, 0)]);
        }
        self.scalar_coords(&v.b, 2, k, &mut out);
        self.ad_real_coords(&v.a, 1, k, &mut out);
        DVector::from_vec(out)
    }

    fn gauge_coords(&self, y: &GaugeVector, k: &Mode) -> DVector<C64> {
        let mut out = Vec::new();
        self.ad_real_coords(&y.u, 0, k, &mut out);
        self.scalar_coords(&y.xi, 1, k, &mut out);
        DVector::from_vec(out)
    }

    fn residual_coords(&self, r: &LForms, k: &Mode) -> DVector<C64> {
        let n = self.n();
        let mut out = Vec::new();
        self.ad_real_coords(&r.hym, 2 * n, k, &mut out);
        self.scalar_coords(&r.balanced, 2 * n - 1, k, &mut out);
        for b in self.frame().blades_pq(0, 2) {
            out.extend(self.ad_coords(&r.f02.coeff(b).get(k)).iter());
        }
        self.scalar_coords(&r.bianchi, 3, k, &mut out);
        DVector::from_vec(out)
    }

    fn tangent_basis(&self, k: &Mode) -> Vec<TangentW> {
        let frame = self.frame();
        let n = self.n();
        let m = self.alg.dim_matrix();
        let zero = TangentW::zero(frame, m);
        let mut out = Vec::new();
        for b in frame.blades_pq(1, 1) {
            let mut v = zero.clone();
            v.omega = TrigForm::scalar_mode(frame, b, k, cr(1.0));
            out.push(v);
        }
        for b in frame.blades(2) {
            let mut v = zero.clone();
            v.b = TrigForm::from_real_terms(frame, 1, &[(b, *k, DMatrix::from_element(1, 1, cr(1.0)))]);
            out.push(v);
        }
        for a in 0..2 * n {
            for e in &self.alg.basis {
                let mut v = zero.clone();
                v.a = TrigForm::from_real_terms(frame, m, &[(1 << a, *k, e.clone())]);
                out.push(v);
            }
        }
        out
    }

    fn u_basis(&self, k: &Mode) -> Vec<TrigForm> {
        self.alg.basis.iter().map(|e| TrigForm::mode(self.frame(), 0, k, e.clone())).collect()
    }

    fn xi_from(&self, x: &DVector<C64>, k: &Mode) -> TrigForm {
        let terms: Vec<_> =
            (0..x.len()).map(|a| (1 as Blade) << a).zip(x.iter()).map(|(b, z)| (b, *k, DMatrix::from_element(1, 1, *z))).collect();
        TrigForm::from_real_terms(self.frame(), 1, &terms)
    }

    fn gauge_basis(&self, k: &Mode) -> Vec<GaugeVector> {
        let frame = self.frame();
        let m = self.alg.dim_matrix();
        let n = self.n();
        let mut out: Vec<_> = self.u_basis(k).into_iter().map(|u| GaugeVector { u, xi: TrigForm::trig_zero(frame, 1) }).collect();
        for a in 0..2 * n {
            let mut x = DVector::zeros(2 * n);
            x[a] = cr(1.0);
            out.push(GaugeVector { u: TrigForm::trig_zero(frame, m), xi: self.xi_from(&x, k) });
        }
        out
    }

    /// Orthonormal basis of the 1-forms ξ with g^{ab}k_aξ_b = 0, in real-axis coordinates.
    pub fn coexact_basis(&self, k: &Mode) -> DMatrix<C64> {
        let d = 2 * self.n();
        let kv = DVector::from_iterator(d, k[..d].iter().map(|x| *x as f64));
        if kv.norm() == 0.0 {
            return DMatrix::zeros(d, 0);
        }
        let w = (&self.ginv * kv).normalize();
        let mut basis: Vec<DVector<f64>> = vec![w];
        for a in 0..d {
            let mut e = DVector::zeros(d);
            e[a] = 1.0;
            for q in &basis {
                e -= q * q.dot(&e);
            }
            if e.norm() > 1e-8 {
                basis.push(e.normalize());
            }
        }
        let cols: Vec<DVector<C64>> = basis[1..].iter().map(|v| v.map(cr)).collect();
        DMatrix::from_columns(&cols)
    }

    pub fn mode_operator(&self, k: &Mode) -> Result<ModeOperator> {
        let tb = self.tangent_basis(k);
        let gb = self.gauge_basis(k);
        let cols = |vs: Vec<DVector<C64>>| DMatrix::from_columns(&vs);
        let l = cols(tb.iter().map(|v| Ok(self.residual_coords(&self.l(v)?, k))).collect::<Result<_>>()?);
        let p_hat = cols(gb.iter().map(|y| Ok(self.tangent_coords(&self.p_hat(y)?, k))).collect::<Result<_>>()?);
        let p_hat_star = cols(tb.iter().map(|v| Ok(self.gauge_coords(&self.p_hat_adjoint(v)?, k))).collect::<Result<_>>()?);
        let q = self.coexact_basis(k);
        let dim = self.alg.dim();
        let d = 2 * self.n();
        // embedding of (u, coexact) coordinates into (u, ξ) coordinates
        let mut emb = DMatrix::<C64>::zeros(dim + d, dim + q.ncols());
        emb.view_mut((0, 0), (dim, dim)).fill_with_identity();
        emb.view_mut((dim, dim), (d, q.ncols())).copy_from(&q);
        let full = &p_hat_star * &p_hat;
        let cal_l = emb.adjoint() * full * &emb;
        Ok(ModeOperator { mode: *k, l, p_hat, p_hat_star, cal_l, coexact: q })
    }

    /// Kernel of 𝓛 on every mode with |k|_∞ ≤ kmax.
    pub fn condition_a(&self, kmax: i32) -> Result<ConditionAReport> {
        let d = 2 * self.n();
        let side = (2 * kmax + 1) as usize;
        let modes: Vec<Mode> = (0..side.pow(d as u32))
            .map(|mut idx| {
                let mut k = [0i32; 2 * MAX_N];
                for a in k.iter_mut().take(d) {
                    *a = (idx % side) as i32 - kmax;
                    idx /= side;
                }
                k
            })
            .collect();
        let sv: Vec<(Mode, DVector<f64>, bool)> = modes
            .par_iter()
            .map(|k| {
                let op = self.mode_operator(k)?;
                let sq = op.cal_l.is_square();
                Ok((*k, op.cal_l.singular_values(), sq))
            })
            .collect::<Result<_>>()?;
        let smax = sv.iter().map(|(_, s, _)| s.max()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let thr = KERNEL_TOL * smax;
        let mut rep = ConditionAReport {
            kmax,
            modes: Vec::new(),
            constant_kernel: 0,
            nonconstant_kernel: 0,
            all_square: true,
            threshold: thr,
        };
        for (k, s, sq) in sv {
            let kernel = s.iter().filter(|x| **x <= thr).count();
            if k.iter().all(|x| *x == 0) {
                rep.constant_kernel += kernel;
            } else {
                rep.nonconstant_kernel += kernel;
            }
            rep.all_square &= sq;
            let smin = if s.is_empty() { 0.0 } else { s.min() };
            rep.modes.push(ModeKernel { mode: k[..d].to_vec(), size: s.len(), kernel, smin, square: sq });
        }
        Ok(rep)
    }

    /// Project v onto the gauge slice: v − 𝐏̂y with 𝓛y = 𝐏̂*v, solved mode by mode.
    pub fn gauge_fix(&self, v: &TangentW) -> Result<GaugeFixed> {
        let frame = self.frame();
        let m = self.alg.dim_matrix();
        let dim = self.alg.dim();
        let rhs = self.p_hat_adjoint(v)?;
        let mut modes = rhs.u.support();
        modes.extend(rhs.xi.support());
        let modes: Vec<Mode> = modes.into_iter().collect();
        let sols: Vec<(GaugeVector, usize)> = modes
            .par_iter()
            .map(|k| {
                let op = self.mode_operator(k)?;
                let q = &op.coexact;
                let g = self.gauge_coords(&rhs, k);
                let gu = g.rows(0, dim).into_owned();
                let gx = g.rows(dim, g.len() - dim).into_owned();
                let cx = q.adjoint() * &gx;
                let leak = (&gx - q * &cx).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if leak > 1e-9 * gx.iter().map(|z| z.norm()).fold(1.0, f64::max) {
                    return Err(Error::Constraint { what: "𝐏̂*v has a non-coexact part".into(), residual: leak });
                }
                let mut b = DVector::zeros(dim + q.ncols());
                b.rows_mut(0, dim).copy_from(&gu);
                b.rows_mut(dim, q.ncols()).copy_from(&cx);
                let svd = op.cal_l.clone().svd(true, true);
                let smax = svd.singular_values.max();
                let thr = KERNEL_TOL * smax.max(1.0);
                let kernel = svd.singular_values.iter().filter(|s| **s <= thr).count();
                let constant = k.iter().all(|x| *x == 0);
                if kernel > 0 && !constant {
                    return Err(Error::Singular(k[..2 * self.n()].to_vec()));
                }
                let y = if kernel == dim + q.ncols() { DVector::zeros(b.len()) } else { svd.solve(&b, thr).map_err(|e| Error::Invalid(e.into()))? };
                let ub = self.u_basis(k);
                let mut u = TrigForm::trig_zero(frame, m);
                for (i, e) in ub.iter().enumerate() {
                    u = u.add(&e.scale(y[i]));
                }
                let xi = self.xi_from(&(q * y.rows(dim, q.ncols())), k);
                Ok((GaugeVector { u, xi }, if constant { kernel } else { 0 }))
            })
            .collect::<Result<_>>()?;
        let mut y = GaugeVector { u: TrigForm::trig_zero(frame, m), xi: TrigForm::trig_zero(frame, 1) };
        let mut constant_kernel = if modes.iter().any(|k| k.iter().all(|x| *x == 0)) { 0 } else { dim };
        for (s, kc) in sols {
            y = y.add(&s);
            constant_kernel += kc;
        }
        y.u = y.u.sub(&y.u.adjoint()).scale_re(0.5);
        y.xi = y.xi.re();
        y.u.prune(1e-15);
        y.xi.prune(1e-15);
        let mut fixed = v.sub(&self.p_hat(&y)?);
        fixed.b.prune(1e-15);
        fixed.a.prune(1e-15);
        let residual = self.gauge_residual(&fixed)?;
        Ok(GaugeFixed { v: fixed, y, constant_kernel, residual })
    }

    /// Residual of the linearized fibre system for (ω̇, ḃ, s, s′).
    pub fn fibre_residual(&self, omega_dot: &TrigForm, b_dot: &TrigForm, s: &TrigForm, s2: &TrigForm) -> Result<f64> {
        let n = self.n();
        let spec = &self.w.spec;
        let ds = covariant_d(&self.theta, s)?;
        let ds2 = covariant_d(&self.theta, s2)?;
        let row = |x: &TrigForm, dx: &TrigForm| -> Result<TrigForm> {
            let mut r = covariant_d(&self.theta, &dx.j1())?.w(self.wp(n - 1))?.neg();
            if n >= 2 {
                r = r.add(&self.f.w(x)?.w(self.wp(n - 2))?.scale_re(n as f64 - 1.0));
            }
            Ok(r)
        };
        let r1 = row(omega_dot, &ds)?;
        let r2 = self.balanced_inner(omega_dot)?.d();
        let r3 = omega_dot
            .sub(&pair(s, &self.f, spec)?.scale_re(2.0))
            .dc()
            .sub(&b_dot.sub(&pair(s2, &self.f, spec)?.scale_re(2.0)).d());
        let r4 = self.balanced_inner(b_dot)?.d();
        let r5 = row(b_dot, &ds2)?;
        Ok([r1, r2, r3, r4, r5].iter().map(|r| r.max_abs()).fold(0.0, f64::max))
    }

    /// (n−1)! Re ν̇ = e^{−ℓf}((n−1)ω̇₀∧ω^{n−2} + ((n(2−ℓ)−2)/(2n))(Λω̇)ω^{n−1}).
    fn nu_dot(&self, x: &TrigForm) -> Result<TrigForm> {
        let n = self.n();
        let nf = n as f64;
        let l = self.w.ell();
        let lam = self.lambda(x)?;
        let x0 = x.sub(&lam.w(&self.w.omega)?.scale_re(1.0 / nf));
        let mut r = lam.w(self.wp(n - 1))?.scale_re((nf * (2.0 - l) - 2.0) / (2.0 * nf));
        if n >= 2 {
            r = r.add(&x0.w(self.wp(n - 2))?.scale_re(nf - 1.0));
        }
        Ok(r.scale_re(self.ehat / fact(n - 1)))
    }

    /// Classes 𝔞̇ = [ω̇ − 2⟨s,F⟩] + i[ḃ − 2⟨s′,F⟩] and 𝔟̇ = [ν̇] of a fibre variation.
    pub fn variation_classes(&self, omega_dot: &TrigForm, b_dot: &TrigForm, s: &TrigForm, s2: &TrigForm) -> Result<VariationClasses> {
        let r = self.fibre_residual(omega_dot, b_dot, s, s2)?;
        if r > BACKGROUND_TOL {
            return Err(Error::Constraint { what: "variation does not solve the linearized fibre system".into(), residual: r });
        }
        let spec = &self.w.spec;
        let x = omega_dot.sub(&pair(s, &self.f, spec)?.scale_re(2.0)).proj(1, 1);
        let y = b_dot.sub(&pair(s2, &self.f, spec)?.scale_re(2.0)).proj(1, 1);
        Ok(VariationClasses {
            a_re: reduce_class(&x, Flavor::Aeppli)?,
            a_im: reduce_class(&y, Flavor::Aeppli)?,
            b_re: reduce_class(&self.nu_dot(omega_dot)?, Flavor::BottChern)?,
            b_im: reduce_class(&self.nu_dot(b_dot)?, Flavor::BottChern)?,
        })
    }

    /// 𝔟 = [e^{−ℓf}ω^{n−1}]/(n−1)!.
    pub fn balanced_class(&self) -> Result<CohomClass> {
        let n = self.n();
        reduce_class(&self.wp(n - 1).scale_re(self.ehat / fact(n - 1)), Flavor::BottChern)
    }

    pub fn class_pairings(&self, c: &VariationClasses) -> Result<ClassPairings> {
        let b = self.balanced_class()?;
        Ok(ClassPairings {
            re_a_b: duality_pairing(&c.a_re, &b)?.re,
            re_a_re_b: duality_pairing(&c.a_re, &c.b_re)?.re,
            im_a_b: duality_pairing(&c.a_im, &b)?.re,
            im_a_im_b: duality_pairing(&c.a_im, &c.b_im)?.re,
        })
    }

    /// −∫|ω̇₀|²ê vol + ((n(2−ℓ)−2)/(2n))∫ê|Λω̇|² vol + 2∫⟨d^hs∧Jd^hs⟩∧E, pointwise route.
    pub fn pairing_integral(&self, omega_dot: &TrigForm, s: &TrigForm) -> Result<f64> {
        let n = self.n();
        let nf = n as f64;
        let l = self.w.ell();
        let lam = self.lambda(omega_dot)?;
        let x0 = omega_dot.sub(&lam.w(&self.w.omega)?.scale_re(1.0 / nf));
        // |α₀|² vol = −α₀∧α₀∧ω^{n−2}/(n−2)! for primitive real (1,1) α₀
        let mut r = cr(0.0);
        if n >= 2 {
            r += x0.w(&x0)?.w(self.wp(n - 2))?.scale_re(self.ehat / fact(n - 2)).integrate()?;
        }
        let lam2 = lam.w(&lam)?.w(self.wp(n))?.scale_re(self.ehat / fact(n));
        r += lam2.integrate()? * ((nf * (2.0 - l) - 2.0) / (2.0 * nf));
        let ds = covariant_d(&self.theta, s)?;
        let e = self.wp(n - 1).scale_re(self.ehat / fact(n - 1));
        r += pair(&ds, &ds.j1(), &self.w.spec)?.w(&e)?.integrate()? * 2.0;
        Ok(r.re)
    }
}

/// g = c[c((Re𝔞̇·𝔟)² + (Im𝔞̇·𝔟)²) − Re𝔞̇·Re𝔟̇ − Im𝔞̇·Im𝔟̇] with c = (2−ℓ)/(2M).
pub fn fibre_metric(p: &ClassPairings, m: f64, ell: f64) -> f64 {
    let c = (2.0 - ell) / (2.0 * m);
    c * (c * (p.re_a_b * p.re_a_b + p.im_a_b * p.im_a_b) - p.re_a_re_b - p.im_a_im_b)
}

/// RHS − LHS of the conjectured inequality Re𝔞̇·Re𝔟̇ ≤ (Re𝔞̇·𝔟)²/(2M₁).
pub fn conjecture_margin(re_a_b: f64, re_a_re_b: f64, m1: f64) -> f64 {
    re_a_b * re_a_b / (2.0 * m1) - re_a_re_b
}

/// Futaki class [⟨s, F_h⟩] ∈ H^{1,1}_A for ∂̄^h s = 0.
pub fn futaki(s: &TrigForm, theta: &TrigForm, f_h: &TrigForm, spec: &PairingSpec) -> Result<CohomClass> {
    let r = covariant_delbar(theta, s)?.max_abs();
    if r > 1e-10 {
        return Err(Error::Constraint { what: "s is not holomorphic".into(), residual: r });
    }
    reduce_class(&pair(s, f_h, spec)?, Flavor::Aeppli)
}

/// Real dimension 2h + 2 of the local deformation space from h = dim H¹(End).
pub fn deformation_dimension(h1_end: u64) -> u64 {
    2 * h1_end + 2
}

/// Intersection data of a threefold: κ_{ijk} on H^{1,1} and the volume ∫μ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RingSpec {
    pub h11: usize,
    /// (i, j, k, κ_{ijk}); permutations are filled in
    pub kappa: Vec<(usize, usize, usize, f64)>,
    pub vol_mu: f64,
}

#[derive(Clone, Debug)]
pub struct IntersectionRing {
    pub h11: usize,
    kappa: Vec<f64>,
    pub vol_mu: f64,
}

/// 𝔞 ∈ H^{1,1}_A(X, ℂ) in the basis of the ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexifiedClass {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexifiedClass {
    pub fn real(re: Vec<f64>) -> Self {
        let h = re.len();
        ComplexifiedClass { re, im: vec![0.0; h] }
    }
}

impl IntersectionRing {
    pub fn new(spec: &RingSpec) -> Result<Self> {
        let h = spec.h11;
        if h == 0 {
            return Err(Error::Invalid("h11 must be positive".into()));
        }
        if !(spec.vol_mu > 0.0) {
            return Err(Error::NotPositive("∫μ must be positive".into()));
        }
        let mut kappa = vec![f64::NAN; h * h * h];
        for &(i, j, k, v) in &spec.kappa {
            if i >= h || j >= h || k >= h {
                return Err(Error::Invalid(format!("index ({i},{j},{k}) out of range for h11 = {h}")));
            }
            for (a, b, c0) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                let slot = &mut kappa[(a * h + b) * h + c0];
                if !slot.is_nan() && (*slot - v).abs() > 1e-12 {
                    return Err(Error::Invalid(format!("conflicting entries for κ_({i},{j},{k})")));
                }
                *slot = v;
            }
        }
        kappa.iter_mut().filter(|x| x.is_nan()).for_each(|x| *x = 0.0);
        Ok(IntersectionRing { h11: h, kappa, vol_mu: spec.vol_mu })
    }

    /// Single generator with κ₁₁₁ = κ.
    pub fn one_parameter(kappa: f64, vol_mu: f64) -> Result<Self> {
        Self::new(&RingSpec { h11: 1, kappa: vec![(0, 0, 0, kappa)], vol_mu })
    }

    pub fn kappa(&self, i: usize, j: usize, k: usize) -> f64 {
        self.kappa[(i * self.h11 + j) * self.h11 + k]
    }

    /// κ(x, y, z).
    pub fn cubic(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let h = self.h11;
        let mut s = 0.0;
        for i in 0..h {
            for j in 0..h {
                for k in 0..h {
                    s += self.kappa[(i * h + j) * h + k] * x[i] * y[j] * z[k];
                }
            }
        }
        s
    }

    fn check(&self, a: &ComplexifiedClass) -> Result<f64> {
        if a.re.len() != self.h11 || a.im.len() != self.h11 {
            return Err(Error::MatrixSize(a.re.len(), self.h11));
        }
        let v = self.cubic(&a.re, &a.re, &a.re);
        if !(v > 1e-300) {
            return Err(Error::NotPositive(format!("(Re𝔞)³ = {v} is not positive")));
        }
        Ok(v)
    }

    /// K = −((2−ℓ)/2) log((Re𝔞)³/3!) − (ℓ/2) log ∫μ.
    pub fn potential_k(&self, a: &ComplexifiedClass, ell: f64) -> Result<f64> {
        let v = self.check(a)?;
        Ok(-0.5 * (2.0 - ell) * (v / 6.0).ln() - 0.5 * ell * self.vol_mu.ln())
    }

    /// M_ℓ = ((Re𝔞)³/(3!∫μ))^{(2−ℓ)/2} ∫μ.
    pub fn m_ell(&self, a: &ComplexifiedClass, ell: f64) -> Result<f64> {
        let v = self.check(a)?;
        Ok((v / (6.0 * self.vol_mu)).powf(0.5 * (2.0 - ell)) * self.vol_mu)
    }

    /// Lefschetz-primitive part x − (x·a²/a³) a.
    pub fn primitive(&self, a: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let v = self.cubic(a, a, a);
        if v.abs() < 1e-300 {
            return Err(Error::Singular(vec![]));
        }
        let t = self.cubic(x, a, a) / v;
        Ok(x.iter().zip(a).map(|(xi, ai)| xi - t * ai).collect())
    }

    /// The cone metric at 𝔞 on 𝔞̇.
    pub fn cone_metric(&self, a: &ComplexifiedClass, adot: &ComplexifiedClass, ell: f64) -> Result<f64> {
        let v = self.check(a)?;
        if adot.re.len() != self.h11 || adot.im.len() != self.h11 {
            return Err(Error::MatrixSize(adot.re.len(), self.h11));
        }
        let x = &a.re;
        let (r0, i0) = (self.primitive(x, &adot.re)?, self.primitive(x, &adot.im)?);
        let n = 3.0;
        let prim = self.cubic(&r0, &r0, x) + self.cubic(&i0, &i0, x);
        let (pr, pi) = (self.cubic(&adot.re, x, x), self.cubic(&adot.im, x, x));
        Ok(-(2.0 - ell) * 6.0 / (2.0 * v) * prim + n * (2.0 - ell) / (2.0 * v * v) * (pr * pr + pi * pi))
    }

    /// The cone metric as a symmetric matrix on (Re𝔞̇, Im𝔞̇) coordinates.
    pub fn cone_metric_matrix(&self, a: &ComplexifiedClass, ell: f64) -> Result<DMatrix<f64>> {
        let h = self.h11;
        let unit = |i: usize| {
            let mut re = vec![0.0; h];
            let mut im = vec![0.0; h];
            if i < h {
                re[i] = 1.0;
            } else {
                im[i - h] = 1.0;
            }
            (re, im)
        };
        let q = |x: &(Vec<f64>, Vec<f64>)| self.cone_metric(a, &ComplexifiedClass { re: x.0.clone(), im: x.1.clone() }, ell);
        let mut g = DMatrix::zeros(2 * h, 2 * h);
        for i in 0..2 * h {
            g[(i, i)] = q(&unit(i))?;
        }
        for i in 0..2 * h {
            for j in i + 1..2 * h {
                let (ui, uj) = (unit(i), unit(j));
                let s = (ui.0.iter().zip(&uj.0).map(|(p, q)| p + q).collect(), ui.1.iter().zip(&uj.1).map(|(p, q)| p + q).collect());
                let v = 0.5 * (q(&s)? - g[(i, i)] - g[(j, j)]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// 4∂∂̄K(v, v̄) by central differences of K along v and iv.
    pub fn levi_form_fd(&self, a: &ComplexifiedClass, adot: &ComplexifiedClass, ell: f64, h: f64) -> Result<f64> {
        let shifted = |t: f64, dre: &[f64], dim: &[f64]| ComplexifiedClass {
            re: a.re.iter().zip(dre).map(|(x, d)| x + t * d).collect(),
            im: a.im.iter().zip(dim).map(|(x, d)| x + t * d).collect(),
        };
        let k0 = self.potential_k(a, ell)?;
        let d2 = |dre: &[f64], dim: &[f64]| -> Result<f64> {
            Ok((self.potential_k(&shifted(h, dre, dim), ell)? - 2.0 * k0 + self.potential_k(&shifted(-h, dre, dim), ell)?) / (h * h))
        };
        let ire: Vec<f64> = adot.im.iter().map(|x| -x).collect();
        Ok(d2(&adot.re, &adot.im)? + d2(&ire, &adot.re)?)
    }

    /// Pairings of the Kähler trivial-bundle classes on the ring, and M_ℓ.
    pub fn pairings(&self, a: &ComplexifiedClass, adot: &ComplexifiedClass, ell: f64) -> Result<(ClassPairings, f64)> {
        let v = self.check(a)?;
        let x = &a.re;
        let e = (v / (6.0 * self.vol_mu)).powf(-0.5 * ell);
        let m = e * v / 6.0;
        let n = 3.0;
        let half = |d: &[f64]| -> Result<(f64, f64)> {
            let p = self.cubic(d, x, x);
            let d0 = self.primitive(x, d)?;
            let rr = e * (self.cubic(d, &d0, x) + (n * (2.0 - ell) - 2.0) / 2.0 * (p / v) * p / 2.0);
            Ok((e * p / 2.0, rr))
        };
        let (re_a_b, re_a_re_b) = half(&adot.re)?;
        let (im_a_b, im_a_im_b) = half(&adot.im)?;
        Ok((ClassPairings { re_a_b, re_a_re_b, im_a_b, im_a_im_b }, m))
    }
}
