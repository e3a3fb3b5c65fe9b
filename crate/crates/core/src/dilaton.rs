//! Horizontal lifts W ≅ (ω, b, a), the ℓ-dilaton functional M_ℓ, its one-form λ_ℓ,
//! the form Ω_ℓ = dλ_ℓ, the metric g_ℓ, the moment map and the Calabi residuals.

use crate::courant::{CourantData, HoloData, Lifting};
use crate::error::{Error, Result};
use crate::forms::*;
use crate::gauge::{chern_connection, covariant_d, cs_difference, curvature, pair, HermitianReduction, PairingSpec};
use crate::picard::PicLieElement;
use nalgebra::DMatrix;
use serde::Serialize;

/// Default minimum grid size on active axes for non-polynomial integrands.
pub const DEFAULT_MIN_N: usize = 16;

/// A horizontal lift in the chart of a base splitting with connection θ₀.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub omega: TrigForm,
    pub b: TrigForm,
    pub a: TrigForm,
    pub theta0: TrigForm,
    pub spec: PairingSpec,
    pub mu: Volume,
    pub min_n: usize,
    ell: f64,
}

/// Tangent vector (ω̇, ḃ, ȧ).
#[derive(Clone, Debug)]
pub struct TangentW {
    pub omega: TrigForm,
    pub b: TrigForm,
    pub a: TrigForm,
}

impl TangentW {
    pub fn new(omega: TrigForm, b: TrigForm, a: TrigForm) -> Result<Self> {
        check_real_11(&omega, "ω̇")?;
        check_real_2(&b, "ḃ")?;
        a.require_degree(1)?;
        Ok(TangentW { omega, b, a })
    }

    pub fn zero(frame: Frame, m: usize) -> Self {
        TangentW { omega: TrigForm::trig_zero(frame, 1), b: TrigForm::trig_zero(frame, 1), a: TrigForm::trig_zero(frame, m) }
    }

    pub fn add(&self, o: &Self) -> Self {
        TangentW { omega: self.omega.add(&o.omega), b: self.b.add(&o.b), a: self.a.add(&o.a) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, x: f64) -> Self {
        TangentW { omega: self.omega.scale_re(x), b: self.b.scale_re(x), a: self.a.scale_re(x) }
    }

    pub fn max_abs(&self) -> f64 {
        self.omega.max_abs().max(self.b.max_abs()).max(self.a.max_abs())
    }
}

fn check_real_2(f: &TrigForm, what: &str) -> Result<()> {
    if !f.is_zero() {
        f.require_degree(2)?;
    }
    if f.m != 1 || f.reality_defect() > 1e-10 {
        return Err(Error::Invalid(format!("{what} must be a real scalar 2-form")));
    }
    Ok(())
}

fn check_real_11(f: &TrigForm, what: &str) -> Result<()> {
    check_real_2(f, what)?;
    if f.sub(&f.proj(1, 1)).max_abs() > 1e-12 {
        return Err(Error::Invalid(format!("{what} must be of type (1,1)")));
    }
    Ok(())
}

/// Residual norms of the four Calabi equations.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct CalabiResiduals {
    /// F∧ω^{n−1}
    pub hym: f64,
    /// F^{0,2}
    pub f02: f64,
    /// d(e^{−ℓf}ω^{n−1})
    pub balanced: f64,
    /// dd^cω + ⟨F∧F⟩
    pub bianchi: f64,
}

impl CalabiResiduals {
    pub fn max(&self) -> f64 {
        self.hym.max(self.f02).max(self.balanced).max(self.bianchi)
    }
}

/// Grid weights for one configuration: e^{−ℓf}, densities and the forms E₁, E₂.
struct Weights {
    dims: GridDims,
    vd: Vec<f64>,
    ehat: Vec<f64>,
    m: f64,
    e1: GridForm,
    e2: Option<GridForm>,
}

/// Hermitian matrix A of a real (1,1)-form (i/2)Σ A_{jk} dz^j∧dz̄^k at every grid point.
pub fn hermitian_matrices(alpha: &TrigForm, dims: &GridDims) -> Result<Vec<DMatrix<C64>>> {
    let n = alpha.frame.n;
    let g = alpha.proj(1, 1).to_grid(dims)?;
    let pts = grid_points(dims);
    let mut out = vec![DMatrix::zeros(n, n); pts];
    for j in 0..n {
        for k in 0..n {
            let blade = (1 << j) | (1 << (n + k));
            let vals = g.coeff(blade).vals;
            for (p, m) in out.iter_mut().enumerate() {
                m[(j, k)] = vals[p] * c(0.0, -2.0);
            }
        }
    }
    Ok(out)
}

impl Configuration {
    pub fn new(
        omega: TrigForm,
        b: TrigForm,
        a: TrigForm,
        theta0: TrigForm,
        spec: PairingSpec,
        ell: f64,
        mu: Volume,
    ) -> Result<Self> {
        if !ell.is_finite() || (ell - 2.0).abs() < 1e-12 {
            return Err(Error::Invalid(format!("level ℓ = {ell} is excluded (ℓ ≠ 2)")));
        }
        check_real_11(&omega, "ω")?;
        check_real_2(&b, "b")?;
        for (f, what) in [(&a, "a"), (&theta0, "θ₀")] {
            if !f.is_zero() {
                f.require_degree(1)?;
            }
            if f.m != spec.size() {
                return Err(Error::MatrixSize(f.m, spec.size()));
            }
            if f.anti_hermitian_defect() > 1e-10 {
                return Err(Error::Invalid(format!("{what} must be 𝔨-valued")));
            }
        }
        let c = Configuration { omega, b, a, theta0, spec, mu, min_n: DEFAULT_MIN_N, ell };
        c.check_positive(&c.dims(&[])?)?;
        Ok(c)
    }

    /// Kähler-type configuration (ω, 0, 0) over θ₀.
    pub fn kahler(omega: TrigForm, theta0: TrigForm, spec: PairingSpec, ell: f64, mu: Volume) -> Result<Self> {
        let f = omega.frame;
        let m = spec.size();
        Self::new(omega, TrigForm::trig_zero(f, 1), TrigForm::trig_zero(f, m), theta0, spec, ell, mu)
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn frame(&self) -> Frame {
        self.omega.frame
    }

    pub fn m(&self) -> usize {
        self.spec.size()
    }

    pub fn with_ell(&self, ell: f64) -> Result<Self> {
        let mut c = self.clone();
        if !ell.is_finite() || (ell - 2.0).abs() < 1e-12 {
            return Err(Error::Invalid(format!("level ℓ = {ell} is excluded (ℓ ≠ 2)")));
        }
        c.ell = ell;
        Ok(c)
    }

    pub fn with_mu(&self, mu: Volume) -> Self {
        Configuration { mu, ..self.clone() }
    }

    /// θ_ℝ = θ₀ + a.
    pub fn theta_r(&self) -> TrigForm {
        self.theta0.add(&self.a)
    }

    /// The same lift written in its own splitting: (ω, 0, 0) over θ_ℝ.
    pub fn rebased(&self) -> Self {
        let f = self.frame();
        Configuration {
            b: TrigForm::trig_zero(f, 1),
            a: TrigForm::trig_zero(f, self.m()),
            theta0: self.theta_r(),
            ..self.clone()
        }
    }

    /// W + t v in the affine chart.
    pub fn shifted(&self, v: &TangentW, t: f64) -> Result<Self> {
        let c = Configuration {
            omega: self.omega.add(&v.omega.scale_re(t)),
            b: self.b.add(&v.b.scale_re(t)),
            a: self.a.add(&v.a.scale_re(t)),
            ..self.clone()
        };
        c.check_positive(&c.dims(&[])?)?;
        Ok(c)
    }

    /// Grid resolving products of ω^n with the listed forms, at least `min_n` on active axes.
    pub fn dims(&self, extra: &[&TrigForm]) -> Result<GridDims> {
        let n = self.frame().n as i32;
        let kw = self.omega.max_mode_per_axis();
        let mut k = [0i32; 2 * MAX_N];
        let mut ke = [0i32; 2 * MAX_N];
        for f in extra.iter().copied().chain([&self.a, &self.a, &self.b]) {
            ke = kmax_union(&ke, &f.max_mode_per_axis());
        }
        for j in 0..2 * MAX_N {
            k[j] = n * kw[j] + 2 * ke[j];
        }
        Ok(dims_for(self.frame(), &k, self.min_n))
    }

    fn check_positive(&self, dims: &GridDims) -> Result<()> {
        for (p, g) in hermitian_matrices(&self.omega, dims)?.iter().enumerate() {
            let eig = nalgebra::linalg::SymmetricEigen::new((g + g.adjoint()) * cr(0.5));
            if eig.eigenvalues.min() <= 0.0 {
                return Err(Error::NotPositive(format!("ω is not positive at grid point {p}")));
            }
        }
        Ok(())
    }

    fn weights(&self, dims: GridDims) -> Result<Weights> {
        let n = self.frame().n;
        let vd = volume_density(&self.omega, &dims)?;
        let fac = self.mu.factor(n);
        let ehat: Vec<f64> = vd.iter().map(|v| (v / fac).powf(-0.5 * self.ell)).collect();
        let m = vd.iter().zip(&ehat).map(|(v, e)| v * e).sum::<f64>() / vd.len() as f64;
        let eg = GridMat::from_scalars(dims, ehat.iter().map(|e| cr(*e)).collect());
        let e1 = self.omega.power_over_factorial(n - 1)?.to_grid(&dims)?.times(&eg);
        let e2 = if n >= 2 { Some(self.omega.power_over_factorial(n - 2)?.to_grid(&dims)?.times(&eg)) } else { None };
        Ok(Weights { dims, vd, ehat, m, e1, e2 })
    }

    /// e^{−ℓf_ω} sampled on `dims`.
    pub fn ehat_grid(&self, dims: &GridDims) -> Result<GridMat> {
        let w = self.weights(*dims)?;
        Ok(GridMat::from_scalars(*dims, w.ehat.iter().map(|e| cr(*e)).collect()))
    }

    fn int_wedge(w: &Weights, alpha: &TrigForm, e: &GridForm) -> Result<f64> {
        Ok(alpha.to_grid(&w.dims)?.w(e)?.integrate()?.re)
    }

    fn int_fn(w: &Weights, g: &[f64]) -> f64 {
        g.iter().zip(&w.vd).zip(&w.ehat).map(|((g, v), e)| g * v * e).sum::<f64>() / g.len() as f64
    }

    /// f_ω on the configuration grid.
    pub fn dilaton(&self) -> Result<GridMat> {
        dilaton_function(&self.omega, self.mu, &self.dims(&[])?)
    }

    /// M_ℓ = ∫ e^{(2−ℓ)f_ω} μ.
    pub fn m_ell(&self) -> Result<f64> {
        self.m_ell_at(&self.dims(&[])?)
    }

    pub fn m_ell_at(&self, dims: &GridDims) -> Result<f64> {
        let n = self.frame().n;
        let fac = self.mu.factor(n);
        let vd = volume_density(&self.omega, dims)?;
        Ok(vd.iter().map(|v| fac * (v / fac).powf(1.0 - 0.5 * self.ell)).sum::<f64>() / vd.len() as f64)
    }

    /// Relative change of M_ℓ when the grid is doubled on every active axis.
    pub fn m_ell_convergence(&self) -> Result<f64> {
        let d = self.dims(&[])?;
        let mut d2 = d;
        for x in d2.iter_mut() {
            if *x > 1 {
                *x *= 2;
            }
        }
        let (m1, m2) = (self.m_ell_at(&d)?, self.m_ell_at(&d2)?);
        Ok((m2 - m1).abs() / m2.abs())
    }

    /// b̃ = ḃ^{1,1} − ⟨ȧ∧a⟩^{1,1}.
    fn b_tilde(&self, v: &TangentW) -> Result<TrigForm> {
        Ok(v.b.proj(1, 1).sub(&pair(&v.a, &self.a, &self.spec)?.re().proj(1, 1)))
    }

    /// 𝐉(ω̇,ḃ,ȧ) = (−ḃ^{1,1} + ⟨ȧ∧a⟩^{1,1}, ω̇ + ⟨Jȧ∧a⟩^{1,1} + iḃ^{0,2} − i conj(ḃ^{0,2}), Jȧ).
    pub fn complex_structure_j(&self, v: &TangentW) -> Result<TangentW> {
        let ja = v.a.j1();
        let omega = self.b_tilde(v)?.neg();
        let y = v.b.proj(0, 2).scale(c(0.0, 1.0));
        let b = v.omega.add(&pair(&ja, &self.a, &self.spec)?.re().proj(1, 1)).add(&y).add(&y.conj());
        Ok(TangentW { omega, b, a: ja })
    }

    /// λ_ℓ(v) = (ℓ−2)/(2M_ℓ) ∫ b̃ ∧ e^{−ℓf}ω^{n−1}/(n−1)!.
    pub fn lambda_ell(&self, v: &TangentW) -> Result<f64> {
        let bt = self.b_tilde(v)?;
        let w = self.weights(self.dims(&[&bt])?)?;
        Ok((self.ell - 2.0) / (2.0 * w.m) * Self::int_wedge(&w, &bt, &w.e1)?)
    }

    /// Ω_ℓ(v₁, v₂) from the multi-term display.
    pub fn omega_ell(&self, v1: &TangentW, v2: &TangentW) -> Result<f64> {
        let l = self.ell;
        let (b1, b2) = (self.b_tilde(v1)?, self.b_tilde(v2)?);
        let aa = pair(&v1.a, &v2.a, &self.spec)?.re();
        let w = self.weights(self.dims(&[&b1, &b2, &v1.omega, &v2.omega, &aa])?)?;
        let cm = (l - 2.0) / w.m;
        let mut r = cm * Self::int_wedge(&w, &aa, &w.e1)?;
        if let Some(e2) = &w.e2 {
            let x = v1.omega.w(&b2)?.sub(&v2.omega.w(&b1)?);
            r += 0.5 * cm * Self::int_wedge(&w, &x, e2)?;
        }
        let lam = |f: &TrigForm| -> Result<Vec<f64>> {
            Ok(lambda_contraction(&self.omega, f, &w.dims)?.0.vals.iter().map(|z| z.re).collect())
        };
        let (lb1, lb2, lo1, lo2) = (lam(&b1)?, lam(&b2)?, lam(&v1.omega)?, lam(&v2.omega)?);
        let cross: Vec<f64> = (0..lb1.len()).map(|p| lb1[p] * lo2[p] - lb2[p] * lo1[p]).collect();
        r += l * (l - 2.0) / (4.0 * w.m) * Self::int_fn(&w, &cross);
        let q = ((l - 2.0) / (2.0 * w.m)).powi(2);
        let i = |f: &TrigForm| Self::int_wedge(&w, f, &w.e1);
        r += q * (i(&v1.omega)? * i(&b2)? - i(&v2.omega)? * i(&b1)?);
        Ok(r)
    }

    /// g_ℓ(v) from the norm display, evaluated through pointwise Hermitian matrices.
    pub fn g_ell(&self, v: &TangentW) -> Result<f64> {
        let l = self.ell;
        let n = self.frame().n;
        let bt = self.b_tilde(v)?;
        let aja = pair(&v.a, &v.a.j1(), &self.spec)?.re();
        let dims = self.dims(&[&bt, &v.omega, &aja])?;
        let fac = self.mu.factor(n);
        let gs = hermitian_matrices(&self.omega, &dims)?;
        let om = hermitian_matrices(&v.omega, &dims)?;
        let bm = hermitian_matrices(&bt, &dims)?;
        let pts = gs.len();
        let (mut m, mut prim, mut tr2, mut tro, mut trb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in 0..pts {
            let gi = gs[p].clone().try_inverse().ok_or_else(|| Error::NotPositive("ω degenerate".into()))?;
            let det = gs[p].determinant().re;
            let wgt = det * (det / fac).powf(-0.5 * l);
            let (x, y) = (&gi * &om[p], &gi * &bm[p]);
            let (lx, ly) = (x.trace().re, y.trace().re);
            let id = DMatrix::<C64>::identity(n, n);
            let x0 = &x - &id * cr(lx / n as f64);
            let y0 = &y - &id * cr(ly / n as f64);
            m += wgt;
            prim += wgt * ((&x0 * &x0).trace().re + (&y0 * &y0).trace().re);
            tr2 += wgt * (lx * lx + ly * ly);
            tro += wgt * lx;
            trb += wgt * ly;
        }
        let np = pts as f64;
        let (m, prim, tr2, tro, trb) = (m / np, prim / np, tr2 / np, tro / np, trb / np);
        let w = self.weights(dims)?;
        let mut r = (l - 2.0) / m * Self::int_wedge(&w, &aja, &w.e1)?;
        let c = (2.0 - l) / (2.0 * m);
        r += c * prim;
        r += c * (0.5 * l - (n as f64 - 1.0) / n as f64) * tr2;
        r += c * c * (tro * tro + trb * trb);
        Ok(r)
    }

    /// ⟨μ_ℓ(W), z⟩ = −λ_ℓ(z·W) = (2−ℓ)/(2M_ℓ) ∫ B ∧ e^{−ℓf}ω^{n−1}/(n−1)!, B in the W-splitting.
    pub fn moment(&self, z: &PicLieElement) -> Result<f64> {
        let w = self.weights(self.dims(&[&z.b])?)?;
        Ok((2.0 - self.ell) / (2.0 * w.m) * Self::int_wedge(&w, &z.b.re(), &w.e1)?)
    }

    /// z·W = (0, B, d^{θ_ℝ}s), as a tangent vector of the rebased configuration.
    pub fn infinitesimal_action(&self, z: &PicLieElement) -> Result<TangentW> {
        let da = covariant_d(&self.theta_r(), &z.s)?;
        Ok(TangentW { omega: TrigForm::trig_zero(self.frame(), 1), b: z.b.re(), a: da })
    }

    /// |d(B − 2⟨s, F_{θ_ℝ}⟩)| for a candidate Lie element in the W-splitting.
    pub fn lie_residual(&self, z: &PicLieElement) -> Result<f64> {
        let f = curvature(&self.theta_r())?;
        Ok(z.b.sub(&pair(&z.s, &f, &self.spec)?.scale_re(2.0)).d().max_abs())
    }

    pub fn calabi_residual(&self) -> Result<CalabiResiduals> {
        let n = self.frame().n;
        let f = curvature(&self.theta_r())?;
        let wn1 = self.omega.power_over_factorial(n - 1)?;
        let hym = f.w(&wn1)?.max_abs();
        let f02 = f.proj(0, 2).max_abs();
        let w = self.weights(self.dims(&[])?)?;
        let balanced = w.e1.d().sup();
        let bianchi = self.omega.dc().d().add(&pair(&f, &f, &self.spec)?).max_abs();
        Ok(CalabiResiduals { hym, f02, balanced, bianchi })
    }

    /// Calabi residuals at ℓ = 1 with the holomorphic volume.
    pub fn hs_residual(&self) -> Result<CalabiResiduals> {
        self.with_ell(1.0)?.with_mu(Volume::Holomorphic).calabi_residual()
    }
}

/// Flat Hull–Strominger reference: ω₀ on T³_ℂ, trivial connection, μ from dz¹∧dz²∧dz³.
pub fn flat_hs_fixture(spec: PairingSpec) -> Result<Configuration> {
    let frame = Frame::new(3);
    let m = spec.size();
    Configuration::kahler(omega0(frame), TrigForm::trig_zero(frame, m), spec, 1.0, Volume::Holomorphic)
}

/// A compact form (ω + υ, h) on the model Q₀ = (H, θ).
#[derive(Clone, Debug)]
pub struct CompactForm {
    /// Lifting of T^{0,1} in E_{ℝ,h} ⊗ ℂ realizing the holomorphic structure of Q₀.
    pub lifting: Lifting,
    /// Real Courant data (H_ℝ, θ_ℝ) = (d^cω, θ^h).
    pub real: CourantData,
    pub omega: TrigForm,
    pub upsilon: TrigForm,
    /// Sup of the constraint residual on the grid of h.
    pub constraint: f64,
}

impl CompactForm {
    pub fn configuration(&self, ell: f64, mu: Volume) -> Result<Configuration> {
        Configuration::kahler(self.omega.clone(), self.real.theta.clone(), self.real.spec.clone(), ell, mu)
    }
}

/// Realize (ω + υ, h) subject to dυ = H + 2i∂ω + CS(θ) − CS(θ^h) − d⟨θ∧θ^h⟩.
pub fn compact_form_data(
    omega: &TrigForm,
    upsilon: &TrigForm,
    h: &HermitianReduction,
    base: &HoloData,
    tol: f64,
) -> Result<CompactForm> {
    check_real_11(omega, "ω")?;
    if upsilon.terms.keys().any(|b| blade_type(omega.frame.n, *b) != (2, 0)) {
        return Err(Error::Invalid("υ must be of type (2,0)".into()));
    }
    let dims = h.dims();
    let th = chern_connection(h, &base.theta.proj(0, 1))?;
    let theta = base.theta.to_grid(&dims)?;
    let rhs = base
        .h
        .to_grid(&dims)?
        .add(&omega.del().scale(c(0.0, 2.0)).to_grid(&dims)?)
        .add(&cs_difference(&theta, &th, &base.spec)?);
    let constraint = upsilon.d().to_grid(&dims)?.sub(&rhs).sup();
    if constraint > tol {
        return Err(Error::Constraint { what: "dυ = H + 2i∂ω + CS(θ) − CS(θ^h) − d⟨θ∧θ^h⟩".into(), residual: constraint });
    }
    let theta_r = th.to_trig(1e-13);
    let real = CourantData::new(omega.dc(), theta_r, base.spec.clone())?;
    let lifting = Lifting::new(omega.scale(c(0.0, -1.0)), TrigForm::trig_zero(omega.frame, base.spec.size()))?;
    Ok(CompactForm { lifting, real, omega: omega.clone(), upsilon: upsilon.clone(), constraint })
}
