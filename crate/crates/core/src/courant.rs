//! The split string algebroid E₀ = T ⊕ ad P ⊕ T* on a trivial bundle over the torus,
//! its Dorfman bracket and pairing, (γ,β)-automorphisms, liftings of T^{0,1}X,
//! reduction to holomorphic data and the Chern correspondence.
//!
//! Vector fields are tuples of scalar 0-forms in the complex frame ∂_a dual to e^a,
//! so i_V is blade contraction.

use crate::error::{Error, Result};
use crate::forms::*;
use crate::gauge::{covariant_d, cs_difference, curvature, pair, PairingSpec};
use serde::Serialize;

/// Triple (H_c, θ_c, ⟨,⟩) defining the bracket on E₀.
#[derive(Clone, Debug)]
pub struct CourantData<C: Coeff = TrigMat> {
    pub h: Form<C>,
    pub theta: Form<C>,
    pub spec: PairingSpec,
}

/// Section V + r + ξ of E₀.
#[derive(Clone, Debug)]
pub struct CourantSection<C: Coeff = TrigMat> {
    pub v: Vec<Form<C>>,
    pub r: Form<C>,
    pub xi: Form<C>,
}

/// Lifting (−γ,−β)T^{0,1}X of T^{0,1}X to E₀.
#[derive(Clone, Debug)]
pub struct Lifting {
    pub gamma: TrigForm,
    pub beta: TrigForm,
}

/// Holomorphic string algebroid data (H, θ) with H ∈ Ω^{3,0+2,1} and F_θ^{0,2} = 0.
#[derive(Clone, Debug)]
pub struct HoloData {
    pub h: TrigForm,
    pub theta: TrigForm,
    pub spec: PairingSpec,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct AxiomResiduals {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        [self.d1, self.d2, self.d3, self.d4, self.d5].into_iter().fold(0.0, f64::max)
    }

    fn merge(&mut self, o: &Self) {
        self.d1 = self.d1.max(o.d1);
        self.d2 = self.d2.max(o.d2);
        self.d3 = self.d3.max(o.d3);
        self.d4 = self.d4.max(o.d4);
        self.d5 = self.d5.max(o.d5);
    }
}

/// dH + ⟨F_θ∧F_θ⟩.
pub fn anomaly<C: Coeff>(h: &Form<C>, theta: &Form<C>, spec: &PairingSpec) -> Result<Form<C>> {
    let f = curvature(theta)?;
    Ok(h.d().add(&pair(&f, &f, spec)?))
}

impl<C: Coeff> CourantData<C> {
    pub fn new(h: Form<C>, theta: Form<C>, spec: PairingSpec) -> Result<Self> {
        h.require_degree(3)?;
        theta.require_degree(1)?;
        if theta.m != spec.size() {
            return Err(Error::MatrixSize(theta.m, spec.size()));
        }
        Ok(CourantData { h, theta, spec })
    }

    pub fn frame(&self) -> Frame {
        self.theta.frame
    }

    pub fn m(&self) -> usize {
        self.theta.m
    }

    pub fn anomaly_residual(&self) -> Result<f64> {
        Ok(anomaly(&self.h, &self.theta, &self.spec)?.max_abs())
    }

    /// Data with H_c replaced.
    pub fn with_h(&self, h: Form<C>) -> Self {
        CourantData { h, theta: self.theta.clone(), spec: self.spec.clone() }
    }
}

impl CourantData {
    pub fn to_grid(&self, dims: &GridDims) -> Result<CourantData<GridMat>> {
        Ok(CourantData { h: self.h.to_grid(dims)?, theta: self.theta.to_grid(dims)?, spec: self.spec.clone() })
    }
}

impl CourantSection {
    pub fn zero(frame: Frame, m: usize) -> Self {
        Self::zero_in(frame, m, ())
    }

    pub fn vector(v: Vec<TrigForm>, m: usize) -> Self {
        let mut s = Self::zero(v[0].frame, m);
        s.v = v;
        s
    }

    pub fn to_grid(&self, dims: &GridDims) -> Result<CourantSection<GridMat>> {
        Ok(CourantSection {
            v: self.v.iter().map(|a| a.to_grid(dims)).collect::<Result<_>>()?,
            r: self.r.to_grid(dims)?,
            xi: self.xi.to_grid(dims)?,
        })
    }
}

impl CourantSection<GridMat> {
    pub fn to_trig(&self, tol: f64) -> CourantSection {
        CourantSection { v: self.v.iter().map(|a| a.to_trig(tol)).collect(), r: self.r.to_trig(tol), xi: self.xi.to_trig(tol) }
    }
}

impl<C: Coeff> CourantSection<C> {
    pub fn zero_in(frame: Frame, m: usize, ctx: C::Ctx) -> Self {
        CourantSection {
            v: (0..frame.dim()).map(|_| Form::zero(frame, 1, ctx.clone())).collect(),
            r: Form::zero(frame, m, ctx.clone()),
            xi: Form::zero(frame, 1, ctx),
        }
    }

    pub fn frame(&self) -> Frame {
        self.r.frame
    }

    pub fn add(&self, o: &Self) -> Self {
        CourantSection {
            v: self.v.iter().zip(&o.v).map(|(a, b)| a.add(b)).collect(),
            r: self.r.add(&o.r),
            xi: self.xi.add(&o.xi),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(cr(-1.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        CourantSection { v: self.v.iter().map(|a| a.scale(z)).collect(), r: self.r.scale(z), xi: self.xi.scale(z) }
    }

    /// Multiplication by a scalar function.
    pub fn times(&self, f: &Form<C>) -> Result<Self> {
        Ok(CourantSection {
            v: self.v.iter().map(|a| f.w(a)).collect::<Result<_>>()?,
            r: f.w(&self.r)?,
            xi: f.w(&self.xi)?,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().map(|a| a.max_abs()).fold(self.r.max_abs().max(self.xi.max_abs()), f64::max)
    }
}

/// V(f) = Σ V^a ∂_a f, applied coefficient-wise.
pub fn vector_apply<C: Coeff>(v: &[Form<C>], f: &Form<C>) -> Result<Form<C>> {
    let mut r = f.zero_like(f.m);
    for (a, va) in v.iter().enumerate() {
        if !va.is_zero() {
            r = r.add(&va.w(&f.partial(a))?);
        }
    }
    Ok(r)
}

/// Lie bracket of vector fields on the flat torus.
pub fn lie_bracket<C: Coeff>(v: &[Form<C>], w: &[Form<C>]) -> Result<Vec<Form<C>>> {
    v.iter().zip(w).map(|(va, wa)| Ok(vector_apply(v, wa)?.sub(&vector_apply(w, va)?))).collect()
}

/// ½(ξ₁(V₂) + ξ₂(V₁)) + ⟨r₁,r₂⟩.
pub fn e0_pairing<C: Coeff>(s1: &CourantSection<C>, s2: &CourantSection<C>, spec: &PairingSpec) -> Result<Form<C>> {
    let x = s1.xi.interior(&s2.v)?.add(&s2.xi.interior(&s1.v)?).scale_re(0.5);
    Ok(x.add(&pair(&s1.r, &s2.r, spec)?))
}

/// d^θ_V t = V(t) + [i_Vθ, t].
fn cov_along<C: Coeff>(theta: &Form<C>, v: &[Form<C>], t: &Form<C>) -> Result<Form<C>> {
    let tv = theta.interior(v)?;
    Ok(vector_apply(v, t)?.add(&tv.wedge(t, Wedge::Comm)?))
}

/// Dorfman bracket [V + r + ξ, W + t + η] on E₀.
pub fn e0_bracket<C: Coeff>(s1: &CourantSection<C>, s2: &CourantSection<C>, data: &CourantData<C>) -> Result<CourantSection<C>> {
    let (v, r, xi) = (&s1.v, &s1.r, &s1.xi);
    let (w, t, eta) = (&s2.v, &s2.r, &s2.xi);
    let spec = &data.spec;
    let f = curvature(&data.theta)?;
    let ivf = f.interior(v)?;
    let iwf = f.interior(w)?;

    let vec = lie_bracket(v, w)?;

    let lie = ivf
        .interior(w)?
        .neg()
        .add(&cov_along(&data.theta, v, t)?)
        .sub(&cov_along(&data.theta, w, r)?)
        .sub(&r.wedge(t, Wedge::Comm)?);

    let lv_eta = eta.d().interior(v)?.add(&eta.interior(v)?.d());
    let one = lv_eta
        .sub(&xi.d().interior(w)?)
        .add(&data.h.interior(w)?.interior(v)?)
        .add(&pair(&covariant_d(&data.theta, r)?, t, spec)?.scale_re(2.0))
        .add(&pair(&ivf, t, spec)?.scale_re(2.0))
        .sub(&pair(&iwf, r, spec)?.scale_re(2.0));

    Ok(CourantSection { v: vec, r: lie, xi: one })
}

/// Residuals of the string algebroid axioms on the triple (u, v, w) and the function f:
/// (D1) Jacobi, (D2) anchor, (D3) Leibniz, (D4) invariance of the pairing,
/// (D5) [u,v] + [v,u] = 2d⟨u,v⟩.
pub fn axioms_residual_on<C: Coeff>(
    data: &CourantData<C>,
    u: &CourantSection<C>,
    v: &CourantSection<C>,
    w: &CourantSection<C>,
    f: &Form<C>,
) -> Result<AxiomResiduals> {
    let br = |a: &CourantSection<C>, b: &CourantSection<C>| e0_bracket(a, b, data);
    let spec = &data.spec;
    let uv = br(u, v)?;
    let uw = br(u, w)?;

    let d1 = br(u, &br(v, w)?)?.sub(&br(&uv, w)?).sub(&br(v, &uw)?).max_abs();

    let anchor = lie_bracket(&u.v, &v.v)?;
    let d2 = uv.v.iter().zip(&anchor).map(|(a, b)| a.sub(b).max_abs()).fold(0.0, f64::max);

    let fv = v.times(f)?;
    let d3 = br(u, &fv)?.sub(&uv.times(f)?).sub(&v.times(&vector_apply(&u.v, f)?)?).max_abs();

    let lhs = vector_apply(&u.v, &e0_pairing(v, w, spec)?)?;
    let rhs = e0_pairing(&uv, w, spec)?.add(&e0_pairing(v, &uw, spec)?);
    let d4 = lhs.sub(&rhs).max_abs();

    let sym = uv.add(&br(v, u)?);
    let mut target = CourantSection::zero_in(u.frame(), data.m(), u.r.ctx.clone());
    target.xi = e0_pairing(u, v, spec)?.d().scale_re(2.0);
    let d5 = sym.sub(&target).max_abs();

    Ok(AxiomResiduals { d1, d2, d3, d4, d5 })
}

/// Largest residuals over all ordered triples drawn from `sections`, with Leibniz
/// tested against each of `functions`.
pub fn axioms_residual(data: &CourantData, sections: &[CourantSection], functions: &[TrigForm]) -> Result<AxiomResiduals> {
    let mut out = AxiomResiduals::default();
    let k = sections.len();
    if k == 0 {
        return Ok(out);
    }
    let fallback = TrigForm::one(data.frame(), (), 1);
    for i in 0..k {
        let u = &sections[i];
        let v = &sections[(i + 1) % k];
        let w = &sections[(i + 2) % k];
        let f = functions.get(i % functions.len().max(1)).unwrap_or(&fallback);
        out.merge(&axioms_residual_on(data, u, v, w, f)?);
    }
    Ok(out)
}

/// (γ,β)·(V + r + ξ) = V + (r + i_Vβ) + (ξ + i_Vγ − ⟨i_Vβ,β⟩ − 2⟨β,r⟩).
pub fn gb_action<C: Coeff>(gamma: &Form<C>, beta: &Form<C>, s: &CourantSection<C>, spec: &PairingSpec) -> Result<CourantSection<C>> {
    let ivb = beta.interior(&s.v)?;
    let xi = s
        .xi
        .add(&gamma.interior(&s.v)?)
        .sub(&pair(&ivb, beta, spec)?)
        .sub(&pair(beta, &s.r, spec)?.scale_re(2.0));
    Ok(CourantSection { v: s.v.clone(), r: s.r.add(&ivb), xi })
}

/// (γ₁,β₁)∘(γ₂,β₂) = (γ₁ + γ₂ + ⟨β₁∧β₂⟩, β₁ + β₂).
pub fn gb_compose(g1: &TrigForm, b1: &TrigForm, g2: &TrigForm, b2: &TrigForm, spec: &PairingSpec) -> Result<(TrigForm, TrigForm)> {
    Ok((g1.add(g2).add(&pair(b1, b2, spec)?), b1.add(b2)))
}

/// H′ = H + dγ − 2⟨β,F⟩ − ⟨β,d^θβ⟩ − ⅓⟨β,[β,β]⟩, the three-form of the bracket
/// transported by (γ,β), whose connection is θ + β.
pub fn twisted_h(data: &CourantData, gamma: &TrigForm, beta: &TrigForm) -> Result<TrigForm> {
    let theta1 = data.theta.add(beta);
    Ok(data.h.add(&gamma.d()).sub(&cs_difference(&theta1, &data.theta, &data.spec)?))
}

/// Data (H′, θ + β) of the transported bracket.
pub fn twisted_data(data: &CourantData, gamma: &TrigForm, beta: &TrigForm) -> Result<CourantData> {
    Ok(CourantData { h: twisted_h(data, gamma, beta)?, theta: data.theta.add(beta), spec: data.spec.clone() })
}

fn part_12_03(h: &TrigForm) -> TrigForm {
    h.proj(1, 2).add(&h.proj(0, 3))
}

/// Residuals of the lifting equations: |H′^{1,2+0,3}| and |F^{0,2} + ∂̄^θβ + ½[β,β]|.
pub fn lifting_check(l: &Lifting, data: &CourantData) -> Result<(f64, f64)> {
    let h1 = twisted_h(data, &l.gamma, &l.beta)?;
    let f02 = curvature(&data.theta)?.proj(0, 2);
    let beta = &l.beta;
    let dbar = beta.delbar().add(&data.theta.proj(0, 1).wedge(beta, Wedge::Comm)?);
    let e2 = f02.add(&dbar.proj(0, 2)).add(&beta.wedge(beta, Wedge::Comm)?.scale_re(0.5).proj(0, 2));
    Ok((part_12_03(&h1).max_abs(), e2.max_abs()))
}

impl Lifting {
    pub fn new(gamma: TrigForm, beta: TrigForm) -> Result<Self> {
        let n = gamma.frame.n;
        if gamma.terms.keys().any(|b| !matches!(blade_type(n, *b), (1, 1) | (0, 2))) {
            return Err(Error::Invalid("γ must lie in Ω^{1,1+0,2}".into()));
        }
        if beta.terms.keys().any(|b| blade_type(n, *b) != (0, 1)) {
            return Err(Error::Invalid("β must lie in Ω^{0,1}".into()));
        }
        Ok(Lifting { gamma, beta })
    }

    pub fn trivial(frame: Frame, m: usize) -> Self {
        Lifting { gamma: TrigForm::trig_zero(frame, 1), beta: TrigForm::trig_zero(frame, m) }
    }

    /// Image of the basis vector ∂_{z̄_j} of T^{0,1}: (−γ,−β)∂_{z̄_j}.
    pub fn image(&self, j: usize, spec: &PairingSpec) -> Result<CourantSection> {
        let frame = self.beta.frame;
        let mut v: Vec<TrigForm> = (0..frame.dim()).map(|_| TrigForm::trig_zero(frame, 1)).collect();
        v[frame.n + j] = TrigForm::one(frame, (), 1);
        gb_action(&self.gamma.neg(), &self.beta.neg(), &CourantSection::vector(v, self.beta.m), spec)
    }
}

/// Holomorphic representative (H_c^{3,0+2,1} + ∂γ^{1,1} − 2⟨β,F^{2,0}⟩, θ_c + β) of the reduction.
pub fn reduce_lifting(l: &Lifting, data: &CourantData, tol: f64) -> Result<HoloData> {
    let (e1, e2) = lifting_check(l, data)?;
    if e1.max(e2) > tol {
        return Err(Error::Constraint { what: "lifting equations".into(), residual: e1.max(e2) });
    }
    let h = &data.h;
    let f20 = curvature(&data.theta)?.proj(2, 0);
    let hh = h
        .proj(3, 0)
        .add(&h.proj(2, 1))
        .add(&l.gamma.proj(1, 1).del())
        .sub(&pair(&l.beta, &f20, &data.spec)?.scale_re(2.0));
    let out = HoloData { h: hh, theta: data.theta.add(&l.beta), spec: data.spec.clone() };
    let res = out.residual()?;
    if res > tol {
        return Err(Error::Constraint { what: "dH + <F^F> after reduction".into(), residual: res });
    }
    Ok(out)
}

impl HoloData {
    /// max(|dH + ⟨F∧F⟩|, |F^{0,2}|, |H^{1,2+0,3}|).
    pub fn residual(&self) -> Result<f64> {
        let a = anomaly(&self.h, &self.theta, &self.spec)?.max_abs();
        let f02 = curvature(&self.theta)?.proj(0, 2).max_abs();
        Ok(a.max(f02).max(part_12_03(&self.h).max_abs()))
    }

    /// E₀ data of the canonical lift T^{0,1}X; its bracket restricts to that of Q₀.
    pub fn canonical_lift(&self) -> CourantData {
        CourantData { h: self.h.clone(), theta: self.theta.clone(), spec: self.spec.clone() }
    }
}

/// Builds E₀ data with a valid lifting: θ′ ∈ Ω^{1,0}(𝔤), H′ = −CS(θ′) + dκ with κ ∈ Ω^{2,0},
/// then θ_c = θ′ − β and H_c chosen so that (γ,β) transports (H_c, θ_c) to (H′, θ′).
pub fn synthesize_lifting(
    theta_prime: &TrigForm,
    kappa: &TrigForm,
    gamma: &TrigForm,
    beta: &TrigForm,
    spec: &PairingSpec,
) -> Result<(CourantData, Lifting)> {
    let n = theta_prime.frame.n;
    if theta_prime.terms.keys().any(|b| blade_type(n, *b) != (1, 0)) || kappa.terms.keys().any(|b| blade_type(n, *b) != (2, 0)) {
        return Err(Error::Invalid("θ′ must be (1,0) and κ must be (2,0)".into()));
    }
    let hp = crate::gauge::chern_simons(theta_prime, spec)?.neg().add(&kappa.d());
    let theta_c = theta_prime.sub(beta);
    let h_c = hp.sub(&gamma.d()).add(&cs_difference(theta_prime, &theta_c, spec)?);
    Ok((CourantData::new(h_c, theta_c, spec.clone())?, Lifting::new(gamma.clone(), beta.clone())?))
}

/// Horizontal-lift data of a compact form with block-wise anti-Hermitian structure group.
#[derive(Clone, Debug)]
pub struct ChernTriple {
    pub omega: TrigForm,
    pub b: TrigForm,
    pub a: TrigForm,
}

/// β* = −β^† for the anti-Hermitian compact form.
pub fn cartan_star(beta: &TrigForm) -> TrigForm {
    beta.adjoint().neg()
}

/// (γ,β) ↦ (ω, b, a) with ω = −Im(γ^{1,1} − ⟨a^{0,1}∧a^{1,0}⟩),
/// b = Re(γ^{1,1} − ⟨a^{0,1}∧a^{1,0}⟩) + γ^{0,2} + conj(γ^{0,2}), a = β + β*.
pub fn chern_correspondence(l: &Lifting, spec: &PairingSpec) -> Result<ChernTriple> {
    let a = l.beta.add(&cartan_star(&l.beta));
    let x = l.gamma.proj(1, 1).sub(&pair(&a.proj(0, 1), &a.proj(1, 0), spec)?);
    let g02 = l.gamma.proj(0, 2);
    Ok(ChernTriple { omega: x.im().neg(), b: x.re().add(&g02).add(&g02.conj()), a })
}

/// Inverse: γ = −iω + b^{1,1+0,2} + ⟨a^{0,1}∧a^{1,0}⟩, β = a^{0,1}.
pub fn chern_inverse(t: &ChernTriple, spec: &PairingSpec) -> Result<Lifting> {
    let a01 = t.a.proj(0, 1);
    let gamma = t
        .omega
        .scale(c(0.0, -1.0))
        .add(&t.b.proj(1, 1))
        .add(&t.b.proj(0, 2))
        .add(&pair(&a01, &t.a.proj(1, 0), spec)?);
    Ok(Lifting { gamma, beta: a01 })
}
