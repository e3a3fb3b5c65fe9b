//! Matrix Lie algebras, connections on trivial bundles, curvature, Chern–Simons
//! transgression, Chern connections and Bott–Chern secondary forms.
//!
//! Functions are generic over the coefficient ring, so the same code runs on exact
//! trigonometric forms and on grid samples (gauge transformations, Hermitian metrics).

use crate::error::{Error, Result};
use crate::forms::*;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// ⟨a,b⟩ = Σ_i c_i tr(a_i b_i) over diagonal blocks of sizes m_1..m_r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingSpec {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
}

impl PairingSpec {
    pub fn new(blocks: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if blocks.len() != weights.len() || blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::Invalid("pairing blocks and weights must match".into()));
        }
        Ok(PairingSpec { blocks, weights })
    }

    pub fn single(m: usize, c: f64) -> Self {
        PairingSpec { blocks: vec![m], weights: vec![c] }
    }

    /// −ε tr₀ + ε tr₁.
    pub fn signed_two_block(m0: usize, m1: usize, eps: f64) -> Self {
        PairingSpec { blocks: vec![m0, m1], weights: vec![-eps, eps] }
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Weight attached to each matrix row.
    pub fn row_weights(&self) -> Vec<f64> {
        self.blocks.iter().zip(&self.weights).flat_map(|(m, c)| std::iter::repeat(*c).take(*m)).collect()
    }

    pub fn pair_mat(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
        let ab = a * b;
        self.row_weights().iter().enumerate().map(|(i, w)| ab[(i, i)] * *w).sum()
    }

    /// Largest entry outside the diagonal blocks.
    pub fn block_defect(&self, a: &DMatrix<C64>) -> f64 {
        let owner: Vec<usize> = self.blocks.iter().enumerate().flat_map(|(i, m)| std::iter::repeat(i).take(*m)).collect();
        let mut r = 0.0f64;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if owner[i] != owner[j] {
                    r = r.max(a[(i, j)].norm());
                }
            }
        }
        r
    }
}

/// Real Lie algebra 𝔨 of anti-Hermitian block matrices with a chosen basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebra {
    pub name: String,
    pub basis: Vec<DMatrix<C64>>,
    pub pairing: PairingSpec,
}

fn pauli(k: usize) -> DMatrix<C64> {
    let z = cr(0.0);
    match k {
        0 => DMatrix::from_row_slice(2, 2, &[z, cr(1.0), cr(1.0), z]),
        1 => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        _ => DMatrix::from_row_slice(2, 2, &[cr(1.0), z, z, cr(-1.0)]),
    }
}

impl LieAlgebra {
    /// 𝔲(1) with ⟨a,b⟩ = −ab, positive on 𝔨.
    pub fn u1() -> Self {
        LieAlgebra { name: "u1".into(), basis: vec![DMatrix::from_element(1, 1, I)], pairing: PairingSpec::single(1, -1.0) }
    }

    /// 𝔰𝔲(2) with basis iσ_k/2 and ⟨a,b⟩ = −tr(ab).
    pub fn su2() -> Self {
        LieAlgebra {
            name: "su2".into(),
            basis: (0..3).map(|k| pauli(k) * c(0.0, 0.5)).collect(),
            pairing: PairingSpec::single(2, -1.0),
        }
    }

    /// 𝔲(m) with the standard basis of anti-Hermitian matrices.
    pub fn u(m: usize, weight: f64) -> Self {
        let mut basis = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let mut e = DMatrix::zeros(m, m);
                if i == j {
                    e[(i, i)] = I;
                } else if i < j {
                    e[(i, j)] = cr(1.0);
                    e[(j, i)] = cr(-1.0);
                } else {
                    e[(i, j)] = I;
                    e[(j, i)] = I;
                }
                basis.push(e);
            }
        }
        LieAlgebra { name: format!("u{m}"), basis, pairing: PairingSpec::single(m, weight) }
    }

    /// Block direct sum 𝔨₀ ⊕ 𝔨₁ with the two pairings side by side.
    pub fn direct_sum(a: &Self, b: &Self) -> Self {
        let (ma, mb) = (a.dim_matrix(), b.dim_matrix());
        let embed = |x: &DMatrix<C64>, off: usize| {
            let mut e = DMatrix::zeros(ma + mb, ma + mb);
            e.view_mut((off, off), (x.nrows(), x.ncols())).copy_from(x);
            e
        };
        let mut basis: Vec<_> = a.basis.iter().map(|x| embed(x, 0)).collect();
        basis.extend(b.basis.iter().map(|x| embed(x, ma)));
        let mut blocks = a.pairing.blocks.clone();
        blocks.extend(&b.pairing.blocks);
        let mut weights = a.pairing.weights.clone();
        weights.extend(&b.pairing.weights);
        LieAlgebra { name: format!("{}+{}", a.name, b.name), basis, pairing: PairingSpec { blocks, weights } }
    }

    /// Default signed two-block form −ε tr₀ + ε tr₁ on 𝔲(m0) ⊕ 𝔲(m1).
    pub fn two_block(m0: usize, m1: usize, eps: f64) -> Self {
        let mut a = Self::direct_sum(&Self::u(m0, 1.0), &Self::u(m1, 1.0));
        a.pairing = PairingSpec::signed_two_block(m0, m1, eps);
        a.name = format!("u{m0}+u{m1}");
        a
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_matrix(&self) -> usize {
        self.pairing.size()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.pairing.row_weights()
    }

    /// Σ x_i e_i.
    pub fn element(&self, x: &[f64]) -> DMatrix<C64> {
        let m = self.dim_matrix();
        self.basis.iter().zip(x).fold(DMatrix::zeros(m, m), |acc, (e, xi)| acc + e * cr(*xi))
    }

    pub fn is_abelian(&self) -> bool {
        self.basis.iter().all(|a| self.basis.iter().all(|b| (a * b - b * a).iter().all(|z| z.norm() < 1e-14)))
    }
}

/// ⟨α∧β⟩ for the given pairing.
pub fn pair<C: Coeff>(a: &Form<C>, b: &Form<C>, spec: &PairingSpec) -> Result<Form<C>> {
    a.wedge(b, Wedge::Trace(&spec.row_weights()))
}

/// F_θ = dθ + ½[θ∧θ] = dθ + θ∧θ.
pub fn curvature<C: Coeff>(theta: &Form<C>) -> Result<Form<C>> {
    Ok(theta.d().add(&theta.w(theta)?))
}

/// d^θα = dα + [θ∧α].
pub fn covariant_d<C: Coeff>(theta: &Form<C>, alpha: &Form<C>) -> Result<Form<C>> {
    Ok(alpha.d().add(&theta.wedge(alpha, Wedge::Comm)?))
}

/// ∂̄^θα = ∂̄α + [θ^{0,1}∧α].
pub fn covariant_delbar<C: Coeff>(theta: &Form<C>, alpha: &Form<C>) -> Result<Form<C>> {
    Ok(alpha.delbar().add(&theta.proj(0, 1).wedge(alpha, Wedge::Comm)?))
}

/// CS(θ) = ⟨θ∧dθ⟩ + ⅓⟨θ∧[θ∧θ]⟩.
pub fn chern_simons<C: Coeff>(theta: &Form<C>, spec: &PairingSpec) -> Result<Form<C>> {
    let tt = theta.wedge(theta, Wedge::Comm)?;
    Ok(pair(theta, &theta.d(), spec)?.add(&pair(theta, &tt, spec)?.scale_re(1.0 / 3.0)))
}

/// CS(θ′) − CS(θ) − d⟨θ′∧θ⟩ through 2⟨a∧F_θ⟩ + ⟨a∧d^θa⟩ + ⅓⟨a∧[a∧a]⟩, a = θ′ − θ.
pub fn cs_difference<C: Coeff>(theta1: &Form<C>, theta: &Form<C>, spec: &PairingSpec) -> Result<Form<C>> {
    let a = theta1.sub(theta);
    let f = curvature(theta)?;
    let aa = a.wedge(&a, Wedge::Comm)?;
    Ok(pair(&a, &f, spec)?
        .scale_re(2.0)
        .add(&pair(&a, &covariant_d(theta, &a)?, spec)?)
        .add(&pair(&a, &aa, spec)?.scale_re(1.0 / 3.0)))
}

/// The same quantity from the Chern–Simons forms directly.
pub fn cs_difference_direct<C: Coeff>(theta1: &Form<C>, theta: &Form<C>, spec: &PairingSpec) -> Result<Form<C>> {
    Ok(chern_simons(theta1, spec)?.sub(&chern_simons(theta, spec)?).sub(&pair(theta1, theta, spec)?.d()))
}

/// g⁻¹θg + g⁻¹dg for a grid-valued gauge transformation g.
pub fn gauge_transform(theta: &GridForm, g: &GridMat) -> Result<GridForm> {
    let ginv = grid_inverse(g)?;
    let frame = theta.frame;
    let gf = GridForm::from_term(frame, 0, g.clone());
    let gi = GridForm::from_term(frame, 0, ginv);
    Ok(gi.w(theta)?.w(&gf)?.add(&gi.w(&gf.d())?))
}

/// Pointwise inverse of a matrix field.
pub fn grid_inverse(g: &GridMat) -> Result<GridMat> {
    g.try_map_points(g.m, |p, a| a.clone().try_inverse().ok_or_else(|| Error::Invalid(format!("singular matrix at grid point {p}"))))
}

/// Hermitian metric h on the trivial bundle, stored as its matrix H (pointwise positive).
#[derive(Clone, Debug)]
pub struct HermitianReduction {
    pub h: GridMat,
}

impl HermitianReduction {
    pub fn new(h: GridMat) -> Result<Self> {
        for p in 0..h.points() {
            let a = h.point(p);
            let herm = (&a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if herm > 1e-10 * a.iter().map(|z| z.norm()).fold(1.0, f64::max) {
                return Err(Error::NotPositive(format!("h not Hermitian at grid point {p}")));
            }
            let eig = nalgebra::linalg::SymmetricEigen::new(a);
            if eig.eigenvalues.iter().any(|e| *e <= 0.0) {
                return Err(Error::NotPositive(format!("h not positive at grid point {p}")));
            }
        }
        Ok(HermitianReduction { h })
    }

    pub fn identity(m: usize, dims: GridDims) -> Self {
        let p = grid_points(&dims);
        HermitianReduction { h: GridMat::from_points(dims, m, &vec![DMatrix::identity(m, m); p]) }
    }

    /// H = exp(u) for a Hermitian matrix field u.
    pub fn exp_of(u: &TrigForm, dims: &GridDims) -> Result<Self> {
        u.require_degree(0)?;
        let ug = u.to_grid(dims)?.coeff(0);
        Self::new(ug.map_points(u.m, |a| expm(&((a + a.adjoint()) * cr(0.5)))))
    }

    pub fn dims(&self) -> GridDims {
        self.h.dims
    }

    /// Apply a unitary gauge transformation: H ↦ g^{†,−1} H g^{−1}, the metric pulled back through g.
    pub fn transform(&self, g: &GridMat) -> Result<Self> {
        let gi = grid_inverse(g)?;
        let mats: Vec<_> = (0..self.h.points()).map(|p| gi.point(p).adjoint() * self.h.point(p) * gi.point(p)).collect();
        Ok(HermitianReduction { h: GridMat::from_points(self.h.dims, self.h.m, &mats) })
    }
}

/// Largest entry of F^{0,2} for a (0,1)-form θ01.
pub fn integrability_defect(theta01: &TrigForm, dims: &GridDims) -> Result<f64> {
    let t = theta01.proj(0, 1).to_grid(dims)?;
    Ok(curvature(&t)?.proj(0, 2).max_abs())
}

/// Chern connection of h with (0,1)-part θ01: θ^h = θ01 − H⁻¹θ01^†H + H⁻¹∂H.
pub fn chern_connection(h: &HermitianReduction, theta01: &TrigForm) -> Result<GridForm> {
    let dims = h.dims();
    let defect = integrability_defect(theta01, &dims)?;
    if defect > 1e-9 {
        return Err(Error::Constraint { what: "F^{0,2} of the holomorphic structure".into(), residual: defect });
    }
    let frame = theta01.frame;
    let t01 = theta01.proj(0, 1).to_grid(&dims)?;
    let hf = GridForm::from_term(frame, 0, h.h.clone());
    let hi = GridForm::from_term(frame, 0, grid_inverse(&h.h)?);
    let mut th = t01.sub(&hi.w(&t01.adjoint())?.w(&hf)?).add(&hi.w(&hf.del())?);
    th.approx = true;
    Ok(th)
}

/// Sup norms of F^{0,2} and F^{2,0} for a Chern connection.
pub fn chern_residuals(theta_h: &GridForm) -> Result<(f64, f64)> {
    let f = curvature(theta_h)?;
    Ok((f.proj(0, 2).max_abs(), f.proj(2, 0).max_abs()))
}

/// Gauss–Legendre nodes and weights on [0,1] (Golub–Welsch).
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order.max(1);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = i as f64 / ((4 * i * i - 1) as f64).sqrt();
        jac[(i, i - 1)] = b;
        jac[(i - 1, i)] = b;
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(jac);
    let mut r: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v = eig.eigenvectors[(0, i)];
            (0.5 * (eig.eigenvalues[i] + 1.0), v * v)
        })
        .collect();
    r.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    r
}

/// Pointwise logarithm of a positive Hermitian matrix field.
fn grid_log(m: &GridMat) -> Result<GridMat> {
    m.try_map_points(m.m, |p, a| {
        hermitian_fn(a, |e| if e > 0.0 { Ok(e.ln()) } else { Err(Error::MatrixLog(format!("eigenvalue {e} at grid point {p}"))) })
    })
}

fn grid_fn(m: &GridMat, f: impl Fn(f64) -> f64 + Sync) -> Result<GridMat> {
    m.try_map_points(m.m, |_, a| hermitian_fn(a, |e| Ok(f(e))))
}

/// Exponential path H_t = H₀^{1/2} M^t H₀^{1/2} from h₀ to h₁, with M = H₀^{−1/2}H₁H₀^{−1/2}.
pub struct ExpPath {
    sqrt0: GridMat,
    log_m: GridMat,
    /// H_t⁻¹Ḣ_t = H₀^{−1/2} log M H₀^{1/2}, independent of t.
    pub velocity: GridMat,
}

impl ExpPath {
    pub fn new(h1: &HermitianReduction, h0: &HermitianReduction) -> Result<Self> {
        let sqrt0 = grid_fn(&h0.h, f64::sqrt)?;
        let isqrt0 = grid_fn(&h0.h, |e| 1.0 / e.sqrt())?;
        let mm = isqrt0.mul(&h1.h, usize::MAX)?.mul(&isqrt0, usize::MAX)?;
        let log_m = grid_log(&mm)?;
        let velocity = isqrt0.mul(&log_m, usize::MAX)?.mul(&sqrt0, usize::MAX)?;
        Ok(ExpPath { sqrt0, log_m, velocity })
    }

    pub fn at(&self, t: f64) -> Result<HermitianReduction> {
        let mt = self.log_m.map_points(self.log_m.m, |a| expm(&(a * cr(t))));
        let h = self.sqrt0.mul(&mt, usize::MAX)?.mul(&self.sqrt0, usize::MAX)?;
        Ok(HermitianReduction { h: h.map_points(h.m, |a| (a + a.adjoint()) * cr(0.5)) })
    }
}

/// R̃(h₁,h₀) = i ∫₀¹ ⟨H_t⁻¹Ḣ_t, F_{h_t}⟩ dt along the exponential path, Gauss–Legendre in t.
/// In terms of h as an endomorphism this is −2i∫⟨ḣ_t h_t⁻¹, F_{h_t}⟩dt.
pub fn bott_chern_secondary(
    h1: &HermitianReduction,
    h0: &HermitianReduction,
    theta01: &TrigForm,
    spec: &PairingSpec,
    order: usize,
) -> Result<GridForm> {
    let path = ExpPath::new(h1, h0)?;
    let frame = theta01.frame;
    let vel = GridForm::from_term(frame, 0, path.velocity.clone());
    let mut acc = GridForm::grid_zero(frame, 1, h0.dims());
    for (t, w) in gauss_legendre(order) {
        let ht = path.at(t)?;
        let f = curvature(&chern_connection(&ht, theta01)?)?;
        acc = acc.add(&pair(&vel, &f, spec)?.scale(I * w));
    }
    let mut r = acc.proj(1, 1);
    r.approx = true;
    Ok(r)
}

/// The 3-form 2i∂R̃(h′,h) + CS(θ^{h′}) − CS(θ^h) − d⟨θ^{h′}∧θ^h⟩, which is d-exact from Ω^{2,0}.
pub fn transgression_form(
    h1: &HermitianReduction,
    h0: &HermitianReduction,
    theta01: &TrigForm,
    spec: &PairingSpec,
    order: usize,
) -> Result<GridForm> {
    let r = bott_chern_secondary(h1, h0, theta01, spec, order)?;
    let t1 = chern_connection(h1, theta01)?;
    let t0 = chern_connection(h0, theta01)?;
    Ok(r.del().scale(c(0.0, 2.0)).add(&cs_difference(&t1, &t0, spec)?))
}

/// Residual norm of the transgression identity after removing the best dB^{2,0} per mode.
pub fn transgression_identity_residual(
    h1: &HermitianReduction,
    h0: &HermitianReduction,
    theta01: &TrigForm,
    spec: &PairingSpec,
    order: usize,
) -> Result<f64> {
    let x = transgression_form(h1, h0, theta01, spec, order)?.to_trig(1e-14);
    let frame = x.frame;
    let fit = crate::cohomology::solve_modulo_image(&x, &frame.blades_pq(2, 0), |f| f.d())?;
    Ok(fit.residual.max_abs())
}
