//! Nonlinear pointwise operations; these live on the grid layer only.
use super::*;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Reference volume form μ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Volume {
    /// μ = ω₀ⁿ/n! with ω₀ = Σ dx^j∧dy^j.
    Standard,
    /// μ = (−1)^{n(n−1)/2} iⁿ Ω∧Ω̄ with Ω = dz¹∧…∧dzⁿ.
    Holomorphic,
}

impl Volume {
    /// μ as a multiple of dx¹∧dy¹∧…∧dxⁿ∧dyⁿ.
    pub fn factor(&self, n: usize) -> f64 {
        match self {
            Volume::Standard => 1.0,
            Volume::Holomorphic => 2f64.powi(n as i32),
        }
    }
}

/// The standard Kähler form ω₀ = (i/2) Σ dz^j∧dz̄^j.
pub fn omega0(frame: Frame) -> TrigForm {
    let n = frame.n;
    let mut r = TrigForm::trig_zero(frame, 1);
    for j in 0..n {
        r = r.add(&TrigForm::scalar_mode(frame, (1 << j) | (1 << (n + j)), &[], c(0.0, 0.5)));
    }
    r
}

/// Density of a scalar top form with respect to dx¹∧dy¹∧…∧dxⁿ∧dyⁿ.
pub fn density(top: &GridForm) -> Result<GridMat> {
    top.require_degree(top.frame.dim())?;
    Ok(top.top_coeff().scale(top.frame.full_volume_factor()))
}

/// Grid dims resolving every listed form.
pub fn common_dims(frame: Frame, forms: &[&TrigForm], min_n: usize) -> GridDims {
    let mut k = [0; 2 * MAX_N];
    for f in forms {
        k = kmax_union(&k, &f.max_mode_per_axis());
    }
    dims_for(frame, &k, min_n)
}

fn real_positive(vals: &[C64], what: &str) -> Result<Vec<f64>> {
    vals.iter()
        .enumerate()
        .map(|(p, z)| {
            if z.re > 0.0 && z.im.abs() <= 1e-9 * z.re.max(1.0) {
                Ok(z.re)
            } else {
                Err(Error::NotPositive(format!("{what} at grid point {p}: {z}")))
            }
        })
        .collect()
}

/// Pointwise volume ratio (ωⁿ/n!)/(dx¹∧dy¹∧…), checked positive.
pub fn volume_density(omega: &TrigForm, dims: &GridDims) -> Result<Vec<f64>> {
    let n = omega.frame.n;
    let vol = omega.power_over_factorial(n)?.to_grid(dims)?;
    real_positive(&density(&vol)?.vals, "omega^n/n!")
}

/// f_ω = ½ log((ωⁿ/n!)/μ) on the grid.
pub fn dilaton_function(omega: &TrigForm, mu: Volume, dims: &GridDims) -> Result<GridMat> {
    let vd = volume_density(omega, dims)?;
    let fac = mu.factor(omega.frame.n);
    Ok(GridMat::from_scalars(*dims, vd.iter().map(|v| cr(0.5 * (v / fac).ln())).collect()))
}

/// Λ_ω α for a 2-form α (only its (1,1) part contributes), with the primitive part α₀ = α − (Λα)ω/n.
pub fn lambda_contraction(omega: &TrigForm, alpha: &TrigForm, dims: &GridDims) -> Result<(GridMat, GridForm)> {
    let n = omega.frame.n;
    let vd = volume_density(omega, dims)?;
    let num = alpha.w(&omega.power_over_factorial(n - 1)?)?.to_grid(dims)?;
    let num = density(&num)?;
    let lam = GridMat::from_scalars(*dims, num.vals.iter().zip(&vd).map(|(a, v)| a / v).collect());
    let mut prim = alpha.to_grid(dims)?.sub(&omega.to_grid(dims)?.times(&lam.scale(cr(1.0 / n as f64))));
    prim.approx = true;
    Ok((lam, prim))
}

/// Pointwise inner product of real 2-forms restricted to their (1,1) parts:
/// ⟨α,β⟩ = Λα·Λβ − (α∧β∧ω^{n−2}/(n−2)!)/(ωⁿ/n!).
pub fn pointwise_inner_11(omega: &TrigForm, alpha: &TrigForm, beta: &TrigForm, dims: &GridDims) -> Result<GridMat> {
    let n = omega.frame.n;
    let vd = volume_density(omega, dims)?;
    let (la, _) = lambda_contraction(omega, alpha, dims)?;
    let (lb, _) = lambda_contraction(omega, beta, dims)?;
    let cross = if n >= 2 {
        density(&alpha.w(beta)?.w(&omega.power_over_factorial(n - 2)?)?.to_grid(dims)?)?.vals
    } else {
        vec![cr(0.0); grid_points(dims)]
    };
    let vals = (0..grid_points(dims)).map(|p| la.vals[p] * lb.vals[p] - cross[p] / vd[p]).collect();
    Ok(GridMat::from_scalars(*dims, vals))
}

/// Hermitian matrix function through the eigendecomposition, f applied to eigenvalues.
pub fn hermitian_fn(h: &DMatrix<C64>, f: impl Fn(f64) -> Result<f64>) -> Result<DMatrix<C64>> {
    let herm = (h + h.adjoint()) * cr(0.5);
    let eig = nalgebra::linalg::SymmetricEigen::new(herm);
    let mut d = DMatrix::zeros(h.nrows(), h.nrows());
    for i in 0..h.nrows() {
        d[(i, i)] = cr(f(eig.eigenvalues[i])?);
    }
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Matrix exponential via scaling and squaring with a Taylor kernel.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let mut s = 0;
    let mut scaled = a.clone();
    let mut nn = norm;
    while nn > 0.25 {
        scaled *= cr(0.5);
        nn *= 0.5;
        s += 1;
    }
    let m = a.nrows();
    let mut term = DMatrix::<C64>::identity(m, m);
    let mut sum = term.clone();
    for k in 1..20 {
        term = &term * &scaled * cr(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}
