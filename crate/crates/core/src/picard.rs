//! Picard group of a string algebroid in the (g,τ) model over a trivial bundle:
//! group law, action on E₀, adjoint action, Lie algebra and its Aeppli and de Rham
//! homomorphisms, and exponential paths.
//!
//! Gauge transformations are grid valued; Lie algebra elements may be exact or gridded.

use crate::cohomology::{aeppli_decomposition, reduce_class, reduce_class_with, CohomClass, Flavor, ReduceOptions};
use crate::courant::{CourantSection, HoloData};
use crate::error::{Error, Result};
use crate::forms::*;
use crate::gauge::{covariant_d, cs_difference, curvature, gauge_transform, gauss_legendre, grid_inverse, pair, PairingSpec};

/// Tolerance for the Picard constraint on grid data.
pub const CONSTRAINT_TOL: f64 = 1e-6;

/// Element (g, τ) with dτ = CS(g⁻¹θ) − CS(θ) − d⟨g⁻¹θ∧θ⟩.
#[derive(Clone, Debug)]
pub struct PicardElement {
    pub g: GridMat,
    pub tau: GridForm,
}

/// Lie algebra element (s, B) with d(B − 2⟨s,F_θ⟩) = 0.
#[derive(Clone, Debug)]
pub struct PicLieElement<C: Coeff = TrigMat> {
    pub s: Form<C>,
    pub b: Form<C>,
}

impl PicLieElement<GridMat> {
    pub fn to_trig(&self, tol: f64) -> PicLieElement {
        PicLieElement { s: self.s.to_trig(tol), b: self.b.to_trig(tol) }
    }
}

impl PicLieElement {
    pub fn to_grid(&self, dims: &GridDims) -> Result<PicLieElement<GridMat>> {
        Ok(PicLieElement { s: self.s.to_grid(dims)?, b: self.b.to_grid(dims)? })
    }
}

impl<C: Coeff> PicLieElement<C> {
    pub fn add(&self, o: &Self) -> Self {
        PicLieElement { s: self.s.add(&o.s), b: self.b.add(&o.b) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        PicLieElement { s: self.s.sub(&o.s), b: self.b.sub(&o.b) }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        PicLieElement { s: self.s.scale_re(x), b: self.b.scale_re(x) }
    }

    pub fn max_abs(&self) -> f64 {
        self.s.max_abs().max(self.b.max_abs())
    }
}

/// Reference connection θ with its pairing, on a fixed grid.
#[derive(Clone, Debug)]
pub struct Picard {
    pub theta: TrigForm,
    pub spec: PairingSpec,
    pub dims: GridDims,
    theta_g: GridForm,
}

impl Picard {
    pub fn new(theta: TrigForm, spec: PairingSpec, dims: GridDims) -> Result<Self> {
        theta.require_degree(1)?;
        let theta_g = theta.to_grid(&dims)?;
        Ok(Picard { theta, spec, dims, theta_g })
    }

    pub fn from_holo(q: &HoloData, dims: GridDims) -> Result<Self> {
        Self::new(q.theta.clone(), q.spec.clone(), dims)
    }

    pub fn frame(&self) -> Frame {
        self.theta.frame
    }

    pub fn m(&self) -> usize {
        self.theta.m
    }

    pub fn theta_grid(&self) -> &GridForm {
        &self.theta_g
    }

    pub fn identity(&self) -> PicardElement {
        let m = self.m();
        PicardElement {
            g: GridMat::from_points(self.dims, m, &vec![nalgebra::DMatrix::identity(m, m); grid_points(&self.dims)]),
            tau: GridForm::grid_zero(self.frame(), 1, self.dims),
        }
    }

    fn as_form(&self, g: &GridMat) -> GridForm {
        GridForm::from_term(self.frame(), 0, g.clone())
    }

    /// a^g = g⁻¹θg + g⁻¹dg − θ.
    pub fn a_of(&self, g: &GridMat) -> Result<GridForm> {
        Ok(gauge_transform(&self.theta_g, g)?.sub(&self.theta_g))
    }

    /// |dτ − (CS(g⁻¹θ) − CS(θ) − d⟨g⁻¹θ∧θ⟩)|.
    pub fn constraint_residual(&self, p: &PicardElement) -> Result<f64> {
        let t1 = gauge_transform(&self.theta_g, &p.g)?;
        Ok(p.tau.d().sub(&cs_difference(&t1, &self.theta_g, &self.spec)?).sup())
    }

    /// Element from user data, accepted only if the constraint holds.
    pub fn element(&self, g: GridMat, tau: GridForm) -> Result<PicardElement> {
        let p = PicardElement { g, tau };
        let res = self.constraint_residual(&p)?;
        if res > CONSTRAINT_TOL {
            return Err(Error::Constraint { what: "Picard constraint".into(), residual: res });
        }
        Ok(p)
    }

    /// (g,τ)(g′,τ′) = (gg′, τ + τ′ + ⟨g′⁻¹a^g g′ ∧ a^{g′}⟩).
    pub fn compose_unchecked(&self, p1: &PicardElement, p2: &PicardElement) -> Result<PicardElement> {
        let a1 = self.a_of(&p1.g)?;
        let a2 = self.a_of(&p2.g)?;
        let g2 = self.as_form(&p2.g);
        let g2i = self.as_form(&grid_inverse(&p2.g)?);
        let conj = a1.sandwich(&g2i, &g2)?;
        let tau = p1.tau.add(&p2.tau).add(&pair(&conj, &a2, &self.spec)?);
        Ok(PicardElement { g: p1.g.mul(&p2.g, usize::MAX)?, tau })
    }

    pub fn compose(&self, p1: &PicardElement, p2: &PicardElement) -> Result<PicardElement> {
        let p = self.compose_unchecked(p1, p2)?;
        let res = self.constraint_residual(&p)?;
        if res > CONSTRAINT_TOL {
            return Err(Error::Constraint { what: "Picard product".into(), residual: res });
        }
        Ok(p)
    }

    /// (g,τ)⁻¹ = (g⁻¹, −τ); the correction ⟨g a^g g⁻¹ ∧ a^{g⁻¹}⟩ = −⟨a^g∧a^g⟩ vanishes.
    pub fn inverse(&self, p: &PicardElement) -> Result<PicardElement> {
        Ok(PicardElement { g: grid_inverse(&p.g)?, tau: p.tau.neg() })
    }

    /// V + g(r + i_V a^g)g⁻¹ + ξ + i_Vτ − ⟨i_V a^g, a^g⟩ − 2⟨a^g, r⟩.
    pub fn act(&self, p: &PicardElement, x: &CourantSection<GridMat>) -> Result<CourantSection<GridMat>> {
        let a = self.a_of(&p.g)?;
        let g = self.as_form(&p.g);
        let gi = self.as_form(&grid_inverse(&p.g)?);
        let iva = a.interior(&x.v)?;
        let r = x.r.add(&iva).sandwich(&g, &gi)?;
        let xi = x
            .xi
            .add(&p.tau.interior(&x.v)?)
            .sub(&pair(&iva, &a, &self.spec)?)
            .sub(&pair(&a, &x.r, &self.spec)?.scale_re(2.0));
        Ok(CourantSection { v: x.v.clone(), r, xi })
    }

    /// Ad_{(g,τ)}(s,B) = (gsg⁻¹, B − ⟨a^g∧[s,a^g]⟩ − 2⟨d^θs∧a^g⟩).
    pub fn adjoint(&self, p: &PicardElement, z: &PicLieElement<GridMat>) -> Result<PicLieElement<GridMat>> {
        let a = self.a_of(&p.g)?;
        let g = self.as_form(&p.g);
        let gi = self.as_form(&grid_inverse(&p.g)?);
        let sa = z.s.wedge(&a, Wedge::Comm)?;
        let ds = covariant_d(&self.theta_g, &z.s)?;
        let b = z.b.sub(&pair(&a, &sa, &self.spec)?).sub(&pair(&ds, &a, &self.spec)?.scale_re(2.0));
        let out = PicLieElement { s: z.s.sandwich(&g, &gi)?, b };
        let res = self.lie_residual_grid(&out)?;
        if res > CONSTRAINT_TOL {
            return Err(Error::Constraint { what: "adjoint image off the Lie algebra".into(), residual: res });
        }
        Ok(out)
    }

    /// |d(B − 2⟨s,F_θ⟩)| for exact data.
    pub fn lie_residual(&self, z: &PicLieElement) -> Result<f64> {
        let f = curvature(&self.theta)?;
        Ok(z.b.sub(&pair(&z.s, &f, &self.spec)?.scale_re(2.0)).d().max_abs())
    }

    pub fn lie_residual_grid(&self, z: &PicLieElement<GridMat>) -> Result<f64> {
        let f = curvature(&self.theta_g)?;
        Ok(z.b.sub(&pair(&z.s, &f, &self.spec)?.scale_re(2.0)).d().sup())
    }

    /// Element (s, 2⟨s,F_θ⟩ + C) for a closed 2-form C.
    pub fn lie_element(&self, s: &TrigForm, closed: &TrigForm) -> Result<PicLieElement> {
        let f = curvature(&self.theta)?;
        Ok(PicLieElement { s: s.clone(), b: pair(s, &f, &self.spec)?.scale_re(2.0).add(closed) })
    }

    /// [(s₀,B₀),(s₁,B₁)] = ([s₀,s₁], 2⟨d^θs₀∧d^θs₁⟩).
    pub fn lie_bracket<C: Coeff>(&self, theta: &Form<C>, z0: &PicLieElement<C>, z1: &PicLieElement<C>) -> Result<PicLieElement<C>> {
        let d0 = covariant_d(theta, &z0.s)?;
        let d1 = covariant_d(theta, &z1.s)?;
        Ok(PicLieElement { s: z0.s.wedge(&z1.s, Wedge::Comm)?, b: pair(&d0, &d1, &self.spec)?.scale_re(2.0) })
    }

    pub fn bracket(&self, z0: &PicLieElement, z1: &PicLieElement) -> Result<PicLieElement> {
        self.lie_bracket(&self.theta, z0, z1)
    }

    /// B^{1,1} − 2⟨s,F_θ^{1,1}⟩.
    pub fn aeppli_form(&self, z: &PicLieElement) -> Result<TrigForm> {
        let f = curvature(&self.theta)?.proj(1, 1);
        Ok(z.b.proj(1, 1).sub(&pair(&z.s, &f, &self.spec)?.scale_re(2.0)))
    }

    /// 𝐚(s,B) = [B^{1,1} − 2⟨s,F_θ^{1,1}⟩] ∈ H^{1,1}_A.
    pub fn aeppli_hom(&self, z: &PicLieElement) -> Result<CohomClass> {
        reduce_class(&self.aeppli_form(z)?, Flavor::Aeppli)
    }

    /// 𝐝(s,B) = [B − 2⟨s,F_θ⟩] ∈ H².
    pub fn dr_hom(&self, z: &PicLieElement) -> Result<CohomClass> {
        let f = curvature(&self.theta)?;
        reduce_class(&z.b.sub(&pair(&z.s, &f, &self.spec)?.scale_re(2.0)), Flavor::DeRham)
    }

    /// Same maps for gridded elements, with the closedness test relaxed to grid accuracy.
    pub fn aeppli_hom_grid(&self, z: &PicLieElement<GridMat>) -> Result<CohomClass> {
        let x = self.aeppli_form(&z.to_trig(1e-13))?;
        reduce_class_with(&x, Flavor::Aeppli, ReduceOptions { closed_tol: 1e-8, prune: 1e-10 })
    }

    /// Infinitesimal membership in Lie Pic_A: 𝐚(z) = 0, with the witness (φ, ψ) of
    /// B^{1,1} − 2⟨s,F^{1,1}⟩ = ∂φ + ∂̄ψ.
    pub fn hamiltonian_member(&self, z: &PicLieElement, tol: f64) -> Result<(bool, TrigForm, TrigForm)> {
        let x = self.aeppli_form(z)?;
        let cl = reduce_class(&x, Flavor::Aeppli)?;
        let (phi, psi, _) = aeppli_decomposition(&x)?;
        Ok((cl.is_zero(tol), phi, psi))
    }

    /// g_t = e^{ts}, τ_t = t(B − 2⟨s,F_θ⟩) + μ_t with
    /// μ_t = ∫₀^t 2⟨s,F_{θ_u}⟩ − ⟨a_u∧d^{θ_u}s⟩ du by Gauss–Legendre of the given order.
    /// The sign of the second term is the one for which d/dt C_t = dμ̇_t holds with
    /// C_t = cs_difference(θ_t, θ).
    pub fn exp_path(&self, z: &PicLieElement, ts: &[f64], order: usize) -> Result<Vec<PicardElement>> {
        use rayon::prelude::*;
        let frame = self.frame();
        let s_grid = z.s.to_grid(&self.dims)?;
        let s_mat = s_grid.coeff(0);
        let f0 = curvature(&self.theta_g)?;
        let lin = z.b.to_grid(&self.dims)?.sub(&pair(&s_grid, &f0, &self.spec)?.scale_re(2.0));
        let nodes = gauss_legendre(order);
        let g_at = |t: f64| s_mat.map_points(s_mat.m, |a| expm(&(a * cr(t))));
        let integrand = |u: f64| -> Result<GridForm> {
            let g = g_at(u);
            let th = gauge_transform(&self.theta_g, &g)?;
            let a = th.sub(&self.theta_g);
            let f = curvature(&th)?;
            let ds = covariant_d(&th, &s_grid)?;
            Ok(pair(&s_grid, &f, &self.spec)?.scale_re(2.0).sub(&pair(&a, &ds, &self.spec)?))
        };
        ts.par_iter()
            .map(|&t| {
                let mut mu = GridForm::grid_zero(frame, 1, self.dims);
                if t != 0.0 {
                    for (x, w) in &nodes {
                        mu = mu.add(&integrand(t * x)?.scale_re(w * t));
                    }
                }
                let mut tau = lin.scale_re(t).add(&mu);
                tau.approx = true;
                Ok(PicardElement { g: g_at(t), tau })
            })
            .collect()
    }
}
