//! De Rham, Dolbeault, Bott–Chern and Aeppli classes of trigonometric forms,
//! computed independently on each Fourier mode.
//!
//! Representatives are minimal-norm per mode: the component of the form orthogonal
//! to the image of the flavor's exactness operator.

use crate::error::{Error, Result};
use crate::forms::*;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Relative singular-value threshold for per-mode rank decisions.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    DeRham,
    Dolbeault,
    BottChern,
    Aeppli,
    /// H¹(Ω^{2,0}_cl) in the quotient model: d-closed (3,0)+(2,1) forms modulo d(Ω^{2,0}).
    H1Omega20,
}

#[derive(Clone, Debug)]
pub struct CohomClass {
    pub flavor: Flavor,
    pub degree: usize,
    pub bidegree: Option<(usize, usize)>,
    pub rep: TrigForm,
    pub real: bool,
}

impl CohomClass {
    pub fn norm(&self) -> f64 {
        self.rep.max_abs()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    pub fn sub(&self, o: &Self) -> Self {
        CohomClass { rep: self.rep.sub(&o.rep), real: self.real && o.real, ..self.clone() }
    }
}

type Op<'a> = &'a (dyn Fn(&TrigForm) -> TrigForm + Sync);

/// Result of projecting a form off the image of a mode-diagonal operator.
#[derive(Clone, Debug)]
pub struct ImageFit {
    pub residual: TrigForm,
    /// One preimage per generator group, minimal norm per mode.
    pub preimages: Vec<TrigForm>,
}

/// Columns of a mode-diagonal operator at mode k over the given source blades.
fn mode_matrix(frame: Frame, k: &Mode, gens: &[(Vec<Blade>, Op)], rows: &mut Vec<Blade>) -> Vec<Vec<(Blade, C64)>> {
    let mut cols = Vec::new();
    for (blades, op) in gens {
        for b in blades {
            let img = op(&TrigForm::scalar_mode(frame, *b, &k[..], cr(1.0)));
            let col: Vec<(Blade, C64)> = img.terms.iter().map(|(tb, c0)| (*tb, c0.get(k)[(0, 0)])).filter(|(_, z)| z.norm() > 0.0).collect();
            for (tb, _) in &col {
                if !rows.contains(tb) {
                    rows.push(*tb);
                }
            }
            cols.push(col);
        }
    }
    cols
}

/// Least-squares fit x ≈ Σ_g op_g(y_g) per mode, returning the residual and the minimal-norm y_g.
pub fn solve_modulo_image_multi(x: &TrigForm, gens: &[(Vec<Blade>, Op)]) -> Result<ImageFit> {
    if x.m != 1 {
        return Err(Error::MatrixSize(x.m, 1));
    }
    let frame = x.frame;
    let modes: Vec<Mode> = x.support().into_iter().collect();
    let per_mode: Vec<(Mode, Vec<(Blade, C64)>, Vec<C64>)> = modes
        .par_iter()
        .map(|k| {
            let mut rows: Vec<Blade> = x.terms.keys().cloned().collect();
            let cols = mode_matrix(frame, k, gens, &mut rows);
            let nr = rows.len();
            let nc = cols.len();
            let y = DVector::from_iterator(nr, rows.iter().map(|b| x.coeff(*b).get(k)[(0, 0)]));
            if nc == 0 {
                return (*k, rows.iter().cloned().zip(y.iter().cloned()).collect(), vec![]);
            }
            let mut a = DMatrix::<C64>::zeros(nr, nc);
            for (j, col) in cols.iter().enumerate() {
                for (tb, z) in col {
                    let i = rows.iter().position(|r| r == tb).unwrap();
                    a[(i, j)] = *z;
                }
            }
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let u = svd.u.as_ref().unwrap();
            let vt = svd.v_t.as_ref().unwrap();
            let mut z = DVector::<C64>::zeros(nc);
            for (s_i, s) in svd.singular_values.iter().enumerate() {
                if smax > 0.0 && *s > RANK_TOL * smax {
                    let coef = u.column(s_i).dotc(&y) / cr(*s);
                    z += vt.row(s_i).adjoint() * coef;
                }
            }
            let res = &y - &a * &z;
            (*k, rows.iter().cloned().zip(res.iter().cloned()).collect(), z.iter().cloned().collect())
        })
        .collect();
    let mut residual = TrigForm::trig_zero(frame, 1);
    let mut preimages: Vec<TrigForm> = gens.iter().map(|_| TrigForm::trig_zero(frame, 1)).collect();
    for (k, res, z) in per_mode {
        for (b, v) in res {
            if v.norm() > 0.0 {
                residual.add_term(b, &TrigMat::scalar_mode(k, v));
            }
        }
        let mut j = 0;
        for (g, (blades, _)) in gens.iter().enumerate() {
            for b in blades {
                if let Some(v) = z.get(j) {
                    if v.norm() > 0.0 {
                        preimages[g].add_term(*b, &TrigMat::scalar_mode(k, *v));
                    }
                }
                j += 1;
            }
        }
    }
    residual.approx = x.approx;
    Ok(ImageFit { residual, preimages })
}

/// Single-operator version of [`solve_modulo_image_multi`].
pub fn solve_modulo_image(x: &TrigForm, source: &[Blade], op: impl Fn(&TrigForm) -> TrigForm + Sync) -> Result<ImageFit> {
    solve_modulo_image_multi(x, &[(source.to_vec(), &op)])
}

fn blades_pq_checked(frame: Frame, p: isize, q: isize) -> Vec<Blade> {
    if p < 0 || q < 0 || p as usize > frame.n || q as usize > frame.n {
        vec![]
    } else {
        frame.blades_pq(p as usize, q as usize)
    }
}

fn ddbar(f: &TrigForm) -> TrigForm {
    f.delbar().del()
}

/// The flavor's closedness operator.
pub fn closedness(flavor: Flavor, alpha: &TrigForm) -> TrigForm {
    match flavor {
        Flavor::DeRham | Flavor::BottChern | Flavor::H1Omega20 => alpha.d(),
        Flavor::Dolbeault => alpha.delbar(),
        Flavor::Aeppli => ddbar(alpha),
    }
}

fn del_op(f: &TrigForm) -> TrigForm {
    f.del()
}
fn delbar_op(f: &TrigForm) -> TrigForm {
    f.delbar()
}
fn d_op(f: &TrigForm) -> TrigForm {
    f.d()
}

/// Generators of the exact subspace for a class of degree k and type (p,q).
fn exact_generators(frame: Frame, flavor: Flavor, k: usize, pq: Option<(usize, usize)>) -> Vec<(Vec<Blade>, Op<'static>)> {
    let (p, q) = pq.map(|(p, q)| (p as isize, q as isize)).unwrap_or((0, 0));
    match flavor {
        Flavor::DeRham => {
            if k == 0 {
                vec![]
            } else {
                vec![(frame.blades(k - 1), &d_op)]
            }
        }
        Flavor::Dolbeault => vec![(blades_pq_checked(frame, p, q - 1), &delbar_op)],
        Flavor::BottChern => vec![(blades_pq_checked(frame, p - 1, q - 1), &ddbar)],
        Flavor::Aeppli => vec![(blades_pq_checked(frame, p - 1, q), &del_op), (blades_pq_checked(frame, p, q - 1), &delbar_op)],
        Flavor::H1Omega20 => vec![(frame.blades_pq(2, 0), &d_op)],
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReduceOptions {
    /// Allowed closedness residual, relative to max(1, |α|).
    pub closed_tol: f64,
    /// Coefficients below this are dropped from the representative.
    pub prune: f64,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { closed_tol: 1e-10, prune: 1e-13 }
    }
}

fn infer_type(flavor: Flavor, alpha: &TrigForm) -> Result<(usize, Option<(usize, usize)>)> {
    let n = alpha.frame.n;
    let types: BTreeSet<(usize, usize)> = alpha.terms.keys().map(|b| blade_type(n, *b)).collect();
    let degrees: BTreeSet<usize> = types.iter().map(|(p, q)| p + q).collect();
    if degrees.len() > 1 {
        return Err(Error::Invalid("inhomogeneous degree".into()));
    }
    let k = degrees.into_iter().next().unwrap_or(0);
    match flavor {
        Flavor::DeRham => Ok((k, None)),
        Flavor::H1Omega20 => {
            if types.iter().any(|t| *t != (3, 0) && *t != (2, 1)) {
                return Err(Error::Invalid("H^1(Omega^{2,0}_cl) classes live in (3,0)+(2,1)".into()));
            }
            Ok((3, None))
        }
        _ => {
            if types.len() > 1 {
                return Err(Error::Invalid(format!("form of mixed type {types:?}")));
            }
            let pq = types.into_iter().next();
            Ok((k, pq))
        }
    }
}

/// Canonical (minimal-norm) representative of the class of α.
pub fn reduce_class(alpha: &TrigForm, flavor: Flavor) -> Result<CohomClass> {
    reduce_class_with(alpha, flavor, ReduceOptions::default())
}

pub fn reduce_class_with(alpha: &TrigForm, flavor: Flavor, opts: ReduceOptions) -> Result<CohomClass> {
    let (rep, k, pq) = reduce_inner(alpha, flavor, opts)?;
    let real = rep.reality_defect() <= 1e-10 * rep.max_abs().max(1.0);
    Ok(CohomClass { flavor, degree: k, bidegree: pq, rep, real })
}

fn reduce_inner(alpha: &TrigForm, flavor: Flavor, opts: ReduceOptions) -> Result<(TrigForm, usize, Option<(usize, usize)>)> {
    let (k, pq) = infer_type(flavor, alpha)?;
    let defect = closedness(flavor, alpha).max_abs();
    if defect > opts.closed_tol * alpha.max_abs().max(1.0) {
        return Err(Error::NotClosed(defect));
    }
    let gens = exact_generators(alpha.frame, flavor, k, pq);
    let mut fit = solve_modulo_image_multi(alpha, &gens)?;
    fit.residual.prune(opts.prune);
    Ok((fit.residual, k, pq))
}

/// Exactness witness for an Aeppli class: α = ∂φ + ∂̄ψ + residual.
pub fn aeppli_decomposition(alpha: &TrigForm) -> Result<(TrigForm, TrigForm, TrigForm)> {
    let (k, pq) = infer_type(Flavor::Aeppli, alpha)?;
    let gens = exact_generators(alpha.frame, Flavor::Aeppli, k, pq);
    let fit = solve_modulo_image_multi(alpha, &gens)?;
    Ok((fit.preimages[0].clone(), fit.preimages[1].clone(), fit.residual))
}

/// ∫ α∧β for an Aeppli (p,q) class and a Bott–Chern (n−p,n−q) class.
pub fn duality_pairing(a: &CohomClass, b: &CohomClass) -> Result<C64> {
    let n = a.rep.frame.n;
    if a.flavor != Flavor::Aeppli || b.flavor != Flavor::BottChern {
        return Err(Error::Invalid("duality pairs an Aeppli class with a Bott-Chern class".into()));
    }
    match (a.bidegree, b.bidegree) {
        (Some((p, q)), Some((p2, q2))) if p + p2 == n && q + q2 == n => {}
        (None, _) | (_, None) => return Ok(cr(0.0)),
        _ => return Err(Error::Invalid("bidegrees are not complementary".into())),
    }
    a.rep.w(&b.rep)?.integrate()
}

/// The class of ∂α in H¹(Ω^{2,0}_cl) for an Aeppli (1,1) class.
pub fn del_connecting(a: &CohomClass) -> Result<CohomClass> {
    if a.flavor != Flavor::Aeppli {
        return Err(Error::Invalid("del_connecting takes an Aeppli class".into()));
    }
    let x = a.rep.del();
    let mut fit = solve_modulo_image(&x, &a.rep.frame.blades_pq(2, 0), |f| f.d())?;
    fit.residual.prune(1e-13);
    Ok(CohomClass { flavor: Flavor::H1Omega20, degree: 3, bidegree: None, real: false, rep: fit.residual })
}

/// Dimension of the flavor's cohomology on the single Fourier mode k, in degree (p,q)
/// (or total degree p+q for de Rham): dim ker(closedness) − rank(exactness).
pub fn class_dimension_at_mode(frame: Frame, flavor: Flavor, p: usize, q: usize, k: &[i32]) -> usize {
    let km = mode_from(k);
    let deg = p + q;
    let space = match flavor {
        Flavor::DeRham => frame.blades(deg),
        Flavor::H1Omega20 => [frame.blades_pq(3, 0), frame.blades_pq(2, 1)].concat(),
        _ => frame.blades_pq(p, q),
    };
    let rank = |gens: &[(Vec<Blade>, Op)]| -> usize {
        let mut rows = Vec::new();
        let cols = mode_matrix(frame, &km, gens, &mut rows);
        if cols.is_empty() || rows.is_empty() {
            return 0;
        }
        let mut a = DMatrix::<C64>::zeros(rows.len(), cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (tb, z) in col {
                a[(rows.iter().position(|r| r == tb).unwrap(), j)] = *z;
            }
        }
        let sv = a.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|s| smax > 0.0 && **s > RANK_TOL * smax).count()
    };
    let closed = move |f: &TrigForm| closedness(flavor, f);
    let kernel = space.len() - rank(&[(space.clone(), &closed)]);
    let pq = if flavor == Flavor::DeRham { None } else { Some((p, q)) };
    kernel - rank(&exact_generators(frame, flavor, deg, pq))
}

/// Class dimensions over every mode of a box |k|_∞ ≤ kmax, keyed by mode.
pub fn class_dimensions(frame: Frame, flavor: Flavor, p: usize, q: usize, kmax: i32) -> BTreeMap<Mode, usize> {
    let d = frame.dim();
    let side = (2 * kmax + 1) as usize;
    (0..side.pow(d as u32))
        .map(|mut idx| {
            let mut k = vec![0; d];
            for kj in k.iter_mut() {
                *kj = (idx % side) as i32 - kmax;
                idx /= side;
            }
            (mode_from(&k), class_dimension_at_mode(frame, flavor, p, q, &k))
        })
        .collect()
}

/// Class of a grid form, converted through the FFT.
pub fn reduce_grid_class(alpha: &GridForm, flavor: Flavor, opts: ReduceOptions) -> Result<CohomClass> {
    reduce_class_with(&alpha.to_trig(1e-14), flavor, opts)
}
