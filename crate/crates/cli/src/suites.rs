//! Verification suites. Each suite fills an [`Outcome`] with worst-case residuals and failures.

use crate::fixtures;
use crate::scenario::{Scenario, Suite};
use anyhow::{ensure, Result};
use nalgebra::DMatrix;
use salg::cohomology::{reduce_grid_class, Flavor, ReduceOptions};
use salg::courant::*;
use salg::dilaton::{compact_form_data, Configuration, TangentW};
use salg::forms::*;
use salg::gauge::*;
use salg::moduli::{conjecture_margin, fibre_metric, ComplexifiedClass, FlatBackground, GaugeVector, IntersectionRing};
use salg::picard::{PicLieElement, Picard, PicardElement};
use salg::sample::Sampler;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Outcome {
    /// Worst observed value per key (max for upper bounds, min for lower bounds).
    pub residuals: BTreeMap<String, f64>,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Value>,
}

impl Outcome {
    pub fn le(&mut self, key: &str, v: f64, limit: f64) {
        let e = self.residuals.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        if v > *e || v.is_nan() {
            *e = v;
        }
        if !(v <= limit) {
            self.fail(format!("{key} = {v:.3e} exceeds {limit:.1e}"));
        }
    }

    pub fn ge(&mut self, key: &str, v: f64, limit: f64) {
        let e = self.residuals.entry(key.to_string()).or_insert(f64::INFINITY);
        if v < *e || v.is_nan() {
            *e = v;
        }
        if !(v >= limit) {
            self.fail(format!("{key} = {v:.3e} below {limit:.1e}"));
        }
    }

    pub fn eq(&mut self, key: &str, v: usize, want: usize) {
        self.residuals.insert(key.to_string(), v as f64);
        if v != want {
            self.fail(format!("{key} = {v}, expected {want}"));
        }
    }

    pub fn fail(&mut self, msg: String) {
        if self.failures.len() < 32 {
            self.failures.push(msg);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run(s: Suite, sc: &Scenario) -> Result<Outcome> {
    let mut o = Outcome::default();
    match s {
        Suite::CourantAxioms => courant_axioms(sc, &mut o)?,
        Suite::PicardGroup => picard_group(sc, &mut o)?,
        Suite::ChernCorrespondence => chern_round_trips(sc, &mut o)?,
        Suite::BottChern => bott_chern(sc, &mut o)?,
        Suite::MomentMap => moment_map(sc, &mut o)?,
        Suite::CalabiResidual => calabi_residual(sc, &mut o)?,
        Suite::ConditionA => condition_a(sc, &mut o)?,
        Suite::ConeMetric => cone_metric(sc, &mut o)?,
        Suite::FibreMetric => fibre_metric_suite(sc, &mut o)?,
        Suite::Conjecture => conjecture(sc, &mut o)?,
    }
    Ok(o)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------- courant

/// Seeded E₀ data with dH + ⟨F∧F⟩ = 0, three sections and one test function.
pub fn courant_sample(n: usize, cap: i32, alg: &LieAlgebra, seed: u64) -> Result<(CourantData, Vec<CourantSection>, Vec<TrigForm>)> {
    let f = Frame::new(n);
    let mut s = Sampler::new(seed).kmax(cap).terms(2);
    let theta = s.lie(alg, f, 1, false);
    let spec = alg.pairing.clone();
    let h = chern_simons(&theta, &spec)?.neg().add(&s.scalar(f, 2).d()).add(&s.scalar(f, 3).constant_part());
    let data = CourantData::new(h, theta, spec)?;
    let mut s2 = Sampler::new(seed ^ 0x9e37_79b9).kmax(cap).terms(2);
    let secs = (0..3)
        .map(|_| CourantSection { v: (0..f.dim()).map(|_| s2.scalar(f, 0)).collect(), r: s2.lie(alg, f, 0, false), xi: s2.scalar(f, 1) })
        .collect();
    let fun = vec![s2.scalar(f, 0)];
    Ok((data, secs, fun))
}

/// Adds eps·e^{ix²} dz¹∧dz²∧dz̄¹ to H; its exterior derivative is nonzero.
pub fn inject_anomaly(data: &CourantData, eps: f64) -> CourantData {
    let f = data.frame();
    let mut k = vec![0; f.dim()];
    k[1] = 1;
    let blade = 0b11 | (1 << f.n);
    data.with_h(data.h.add(&TrigForm::scalar_mode(f, blade, &k, cr(eps))))
}

/// Axiom residuals and the anomaly residual of one seeded sample, optionally with an injected defect.
pub fn courant_residuals(n: usize, cap: i32, alg: &LieAlgebra, seed: u64, defect: Option<f64>) -> Result<(AxiomResiduals, f64)> {
    let (mut data, secs, fun) = courant_sample(n, cap, alg, seed)?;
    if let Some(eps) = defect {
        data = inject_anomaly(&data, eps);
    }
    Ok((axioms_residual(&data, &secs, &fun)?, data.anomaly_residual()?))
}

fn courant_axioms(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    use rayon::prelude::*;
    let alg = sc.pairing.algebra()?;
    let tol = sc.tol(Suite::CourantAxioms, "axioms", 1e-9);
    let results: Vec<Result<(AxiomResiduals, f64)>> = (0..sc.samples as u64)
        .into_par_iter()
        .map(|i| courant_residuals(sc.n, sc.mode_cap, &alg, sc.seed.wrapping_add(i), sc.fixtures.anomaly_defect))
        .collect();
    for r in results {
        let (r, anomaly) = r?;
        o.le("anomaly", anomaly, tol);
        for (k, v) in [("d1", r.d1), ("d2", r.d2), ("d3", r.d3), ("d4", r.d4), ("d5", r.d5)] {
            o.le(k, v, tol);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- picard

pub fn picard_dims(grid_n: usize) -> GridDims {
    [grid_n, 1, 1, grid_n, 1, 1, 1, 1]
}

struct PicSetup {
    pc: Picard,
    s: Sampler,
    alg: LieAlgebra,
    dims: GridDims,
}

impl PicSetup {
    fn new(seed: u64, alg: &LieAlgebra, grid_n: usize) -> Result<Self> {
        let f = Frame::new(2);
        let mut s = Sampler::new(seed).kmax(1).terms(1).axes(&[0, 3]);
        let theta = s.lie(alg, f, 1, false).scale_re(0.5);
        let dims = picard_dims(grid_n);
        Ok(PicSetup { pc: Picard::new(theta, alg.pairing.clone(), dims)?, s, alg: alg.clone(), dims })
    }

    /// Lie element (s, 2⟨s,F⟩ + dξ + constant).
    fn lie(&mut self) -> Result<PicLieElement> {
        let f = self.pc.frame();
        let x = self.s.lie(&self.alg, f, 0, false).scale_re(0.4);
        let closed = self.s.scalar(f, 1).d().add(&self.s.scalar(f, 2).constant_part());
        Ok(self.pc.lie_element(&x, &closed)?)
    }

    fn elem(&mut self) -> Result<PicardElement> {
        let z = self.lie()?;
        Ok(self.pc.exp_path(&z, &[1.0], 8)?.pop().expect("one time requested"))
    }

    fn section(&mut self) -> Result<CourantSection<GridMat>> {
        let f = self.pc.frame();
        let alg = self.alg.clone();
        let s = &mut self.s;
        Ok(CourantSection { v: (0..f.dim()).map(|_| s.scalar(f, 0)).collect(), r: s.lie(&alg, f, 0, false), xi: s.scalar(f, 1) }
            .to_grid(&self.dims)?)
    }
}

fn grid_mat_diff(a: &GridMat, b: &GridMat) -> f64 {
    (0..a.points()).map(|p| (a.point(p) - b.point(p)).iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
}

fn pic_diff(a: &PicardElement, b: &PicardElement) -> f64 {
    grid_mat_diff(&a.g, &b.g).max(a.tau.sub(&b.tau).sup())
}

/// Residuals of one seeded Picard sample, keyed as in the report.
pub fn picard_sample(seed: u64, alg: &LieAlgebra, grid_n: usize) -> Result<Vec<(&'static str, f64)>> {
    let mut st = PicSetup::new(seed, alg, grid_n)?;
    let (p1, p2, p3) = (st.elem()?, st.elem()?, st.elem()?);
    let pc = &st.pc;
    let mut out = vec![];
    out.push(("exp_constraint", pc.constraint_residual(&p1)?.max(pc.constraint_residual(&p2)?).max(pc.constraint_residual(&p3)?)));
    let l = pc.compose(&pc.compose(&p1, &p2)?, &p3)?;
    let r = pc.compose(&p1, &pc.compose(&p2, &p3)?)?;
    out.push(("associativity", pic_diff(&l, &r)));
    let id = pc.identity();
    let inv = pic_diff(&pc.compose(&p1, &pc.inverse(&p1)?)?, &id).max(pic_diff(&pc.compose(&pc.inverse(&p1)?, &p1)?, &id));
    out.push(("inverse", inv));
    out.push(("identity", pic_diff(&pc.compose(&id, &p2)?, &p2).max(pic_diff(&pc.compose(&p2, &id)?, &p2))));
    let x = st.section()?;
    let pc = &st.pc;
    let a = pc.act(&pc.compose(&p1, &p2)?, &x)?;
    let b = pc.act(&p1, &pc.act(&p2, &x)?)?;
    out.push(("action_homomorphism", a.sub(&b).max_abs()));
    let z = st.lie()?;
    let pc = &st.pc;
    let zg = z.to_grid(&st.dims)?;
    let a = pc.adjoint(&pc.compose(&p1, &p2)?, &zg)?;
    let b = pc.adjoint(&p1, &pc.adjoint(&p2, &zg)?)?;
    out.push(("ad_homomorphism", a.sub(&b).max_abs()));
    let before = pc.aeppli_hom(&z)?;
    let after = pc.aeppli_hom_grid(&pc.adjoint(&p1, &zg)?)?;
    out.push(("aeppli_ad_invariance", after.sub(&before).norm()));
    let zs = [st.lie()?, st.lie()?, st.lie()?];
    let pc = &st.pc;
    let br = |a: &PicLieElement, b: &PicLieElement| pc.bracket(a, b);
    let jac = br(&zs[0], &br(&zs[1], &zs[2])?)?.add(&br(&zs[1], &br(&zs[2], &zs[0])?)?).add(&br(&zs[2], &br(&zs[0], &zs[1])?)?);
    out.push(("jacobi_s", jac.s.max_abs()));
    out.push(("jacobi_class", pc.dr_hom(&jac)?.norm()));
    Ok(out)
}

fn picard_group(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let alg = sc.pairing.algebra()?;
    let tol = sc.tol(Suite::PicardGroup, "group", 1e-8);
    let exp_tol = sc.tol(Suite::PicardGroup, "exp_constraint", 1e-6);
    let results: Vec<Result<Vec<(&str, f64)>>> = {
        use rayon::prelude::*;
        (0..sc.samples as u64).into_par_iter().map(|i| picard_sample(sc.seed.wrapping_add(i), &alg, sc.grid_n)).collect()
    };
    for r in results {
        for (k, v) in r? {
            o.le(k, v, if k == "exp_constraint" { exp_tol } else { tol });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- chern correspondence

/// Round-trip errors (triple → lifting → triple, lifting again) for one seed.
pub fn chern_sample(n: usize, cap: i32, alg: &LieAlgebra, seed: u64) -> Result<[f64; 4]> {
    let f = Frame::new(n.max(2));
    let spec = &alg.pairing;
    let mut s = Sampler::new(seed).kmax(cap).terms(3);
    let omega = s.real_pq(f, 1, 1);
    let b = s.real(f, 2);
    let a = s.lie(alg, f, 1, true);
    let t = ChernTriple { omega: omega.clone(), b: b.clone(), a: a.clone() };
    let l = chern_inverse(&t, spec)?;
    let t2 = chern_correspondence(&l, spec)?;
    let l2 = chern_inverse(&t2, spec)?;
    Ok([
        t2.omega.sub(&omega).max_abs(),
        t2.b.sub(&b).max_abs(),
        t2.a.sub(&a).max_abs(),
        l2.gamma.sub(&l.gamma).max_abs().max(l2.beta.sub(&l.beta).max_abs()),
    ])
}

/// Compact-form data of a pluriclosed ω on T²_ℂ and its inverse through the Chern correspondence.
pub fn compact_form_sample(seed: u64) -> Result<f64> {
    let f = Frame::new(2);
    let mut s = Sampler::new(seed);
    let k = [s.uniform(-2.5, 2.5).round() as i32, 0, s.uniform(-2.5, 2.5).round() as i32, 0];
    let z = c(s.uniform(-0.05, 0.05), s.uniform(-0.05, 0.05));
    let rho = TrigForm::scalar_mode(f, 0b1001, &k, z);
    let omega = omega0(f).add(&rho).add(&rho.conj());
    let q = HoloData { h: omega.del().scale(c(0.0, -2.0)), theta: TrigForm::trig_zero(f, 1), spec: LieAlgebra::u1().pairing };
    let h = HermitianReduction::identity(1, [16, 1, 16, 1, 1, 1, 1, 1]);
    let cf = compact_form_data(&omega, &TrigForm::trig_zero(f, 1), &h, &q, 1e-10)?;
    let t = chern_correspondence(&cf.lifting, &q.spec)?;
    let again = compact_form_data(&t.omega, &cf.upsilon, &h, &q, 1e-10)?;
    Ok(t.omega
        .sub(&omega)
        .max_abs()
        .max(t.b.max_abs())
        .max(t.a.max_abs())
        .max(again.lifting.gamma.sub(&cf.lifting.gamma).max_abs())
        .max(again.real.h.sub(&cf.real.h).max_abs())
        .max(cf.real.anomaly_residual()?))
}

fn chern_round_trips(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let alg = sc.pairing.algebra()?;
    let tol = sc.tol(Suite::ChernCorrespondence, "round_trip", 1e-9);
    for i in 0..sc.samples as u64 {
        let seed = sc.seed.wrapping_add(i);
        let [w, b, a, l] = chern_sample(sc.n, sc.mode_cap, &alg, seed)?;
        o.le("omega", w, tol);
        o.le("b", b, tol);
        o.le("a", a, tol);
        o.le("lifting", l, tol);
        o.le("compact_form", compact_form_sample(seed)?, tol);
    }
    Ok(())
}

// ---------------------------------------------------------------- bott-chern

fn herm_field(f: Frame, k: &[i32], a: &DMatrix<C64>) -> TrigForm {
    let neg: Vec<i32> = k.iter().map(|x| -x).collect();
    TrigForm::mode(f, 0, k, a.clone()).add(&TrigForm::mode(f, 0, &neg, a.adjoint()))
}

pub struct BottChernReport {
    /// Norm of the Aeppli class of R(h₂,h₀) − R(h₂,h₁) − R(h₁,h₀).
    pub cocycle: f64,
    /// Smallest sup norm among the individual secondary forms.
    pub term_size: f64,
    /// dd^c R̃ − (⟨F₁∧F₁⟩ − ⟨F₀∧F₀⟩) at quadrature orders 1, 2, 4, 8.
    pub ddc_errors: [f64; 4],
}

impl BottChernReport {
    /// Smallest log₂ error ratio among refinements whose finer error is above `floor`.
    pub fn observed_order(&self, floor: f64) -> f64 {
        let e = &self.ddc_errors;
        (0..3).filter(|&i| e[i + 1] > floor).map(|i| (e[i] / e[i + 1]).log2()).fold(f64::INFINITY, f64::min)
    }
}

/// Three metrics exp(u_i) on a rank-2 bundle over T²_ℂ, fields along x¹ and y².
pub fn bott_chern_sample(seed: u64, grid_n: usize) -> Result<BottChernReport> {
    let f = Frame::new(2);
    let dims = picard_dims(grid_n);
    let mut s = Sampler::new(seed);
    let alg = LieAlgebra::u(2, -1.0);
    let spec = alg.pairing;
    let th01 = TrigForm::mode(f, 1 << 2, &[], s.matrix(2) * cr(0.3));
    let modes: [[i32; 4]; 3] = [[1, 0, 0, 0], [0, 0, 0, 1], [1, 0, 0, -1]];
    let mut hs = vec![];
    for k in modes {
        let u = herm_field(f, &k, &(s.matrix(2) * cr(0.25))).add(&TrigForm::mode(f, 0, &[], DMatrix::identity(2, 2) * cr(0.1)));
        hs.push(HermitianReduction::exp_of(&u, &dims)?);
    }
    let r = |a: &HermitianReduction, b: &HermitianReduction, order| bott_chern_secondary(a, b, &th01, &spec, order);
    let (r20, r21, r10) = (r(&hs[2], &hs[0], 8)?, r(&hs[2], &hs[1], 8)?, r(&hs[1], &hs[0], 8)?);
    let cyc = r20.sub(&r21).sub(&r10);
    let class = reduce_grid_class(&cyc, Flavor::Aeppli, ReduceOptions { closed_tol: 1e-6, prune: 0.0 })?;
    let f1 = curvature(&chern_connection(&hs[1], &th01)?)?;
    let f0 = curvature(&chern_connection(&hs[0], &th01)?)?;
    let rhs = pair(&f1, &f1, &spec)?.sub(&pair(&f0, &f0, &spec)?);
    let mut ddc_errors = [0.0; 4];
    for (i, order) in [1, 2, 4, 8].into_iter().enumerate() {
        let rt = r(&hs[1], &hs[0], order)?;
        ddc_errors[i] = rt.delbar().del().scale(c(0.0, 2.0)).sub(&rhs).max_abs();
    }
    Ok(BottChernReport { cocycle: class.norm(), term_size: r21.max_abs().min(r10.max_abs()), ddc_errors })
}

fn bott_chern(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let samples = sc.samples.clamp(1, 4) as u64;
    for i in 0..samples {
        let rep = bott_chern_sample(sc.seed.wrapping_add(i), sc.grid_n)?;
        o.le("cocycle_class", rep.cocycle, sc.tol(Suite::BottChern, "cocycle_class", 1e-8));
        o.ge("term_size", rep.term_size, 1e-3);
        o.le("ddc_identity", rep.ddc_errors[3], sc.tol(Suite::BottChern, "ddc_identity", 1e-6));
        o.ge("observed_order", rep.observed_order(1e-11), 2.0);
    }
    Ok(())
}

// ---------------------------------------------------------------- moment map

fn config_sampler(seed: u64, n: usize) -> Sampler {
    Sampler::new(seed).kmax(1).terms(1).axes(&[0, n])
}

/// Non-constant positive ω with non-trivial a, b over an su(2) base connection on T^n_ℂ.
pub fn random_configuration(seed: u64, n: usize, ell: f64) -> Result<Configuration> {
    let f = Frame::new(n);
    let alg = LieAlgebra::su2();
    let mut s = config_sampler(seed, n);
    let omega = omega0(f).add(&s.real_pq(f, 1, 1).scale_re(0.08));
    let b = s.real(f, 2).scale_re(0.3);
    let a = s.lie(&alg, f, 1, true).scale_re(0.3);
    let theta0 = s.lie(&alg, f, 1, true).scale_re(0.3);
    Ok(Configuration::new(omega, b, a, theta0, alg.pairing, ell, Volume::Standard)?)
}

pub fn random_tangent(s: &mut Sampler, n: usize) -> Result<TangentW> {
    let f = Frame::new(n);
    let alg = LieAlgebra::su2();
    Ok(TangentW::new(s.real_pq(f, 1, 1).scale_re(0.5), s.real(f, 2).scale_re(0.5), s.lie(&alg, f, 1, true).scale_re(0.5))?)
}

fn lambda_fd(w: &Configuration, v: &TangentW, h: f64) -> Result<f64> {
    let jv = w.complex_structure_j(v)?;
    let lp = w.shifted(&jv, h)?.m_ell()?.ln();
    let lm = w.shifted(&jv, -h)?.m_ell()?.ln();
    Ok((lp - lm) / (2.0 * h))
}

/// Relative errors of λ and Ω against finite differences of log M_ℓ, and of g against Ω(·, 𝐉·).
/// The sixth entry is |⟨μ, z⟩|, which keeps the moment identity from passing vacuously.
pub fn moment_calculus_sample(seed: u64, ell: f64) -> Result<[f64; 6]> {
    let n = 2;
    let w = random_configuration(seed, n, ell)?;
    let mut s = config_sampler(seed + 100, n);
    let (v1, v2) = (random_tangent(&mut s, n)?, random_tangent(&mut s, n)?);
    let lam = rel(w.lambda_ell(&v1)?, lambda_fd(&w, &v1, 1e-4)?);
    let h = 1e-3;
    let d = |v: &TangentW, u: &TangentW| -> Result<f64> {
        Ok((lambda_fd(&w.shifted(v, h)?, u, 1e-4)? - lambda_fd(&w.shifted(v, -h)?, u, 1e-4)?) / (2.0 * h))
    };
    let om = rel(w.omega_ell(&v1, &v2)?, d(&v1, &v2)? - d(&v2, &v1)?);
    let g = w.g_ell(&v1)?;
    let gj = rel(g, w.omega_ell(&v1, &w.complex_structure_j(&v1)?)?);
    let g12 = w.omega_ell(&v1, &w.complex_structure_j(&v2)?)?;
    let g21 = w.omega_ell(&v2, &w.complex_structure_j(&v1)?)?;
    // ⟨μ, z⟩ = −λ(z·W) on a Lie element with B = 2⟨s,F⟩ + dξ + c, c a constant positive (1,1)-form
    let f = Frame::new(n);
    let sg = s.lie(&LieAlgebra::su2(), f, 0, true).scale_re(0.5);
    let fr = curvature(&w.theta_r())?;
    let b = pair(&sg, &fr, &w.spec)?.scale_re(2.0).add(&s.real(f, 1).d()).add(&s.constant_hermitian(f, true).scale_re(0.3));
    let z = PicLieElement { s: sg, b };
    let mu = w.moment(&z)?;
    let act = w.rebased().lambda_ell(&w.infinitesimal_action(&z)?)?;
    Ok([lam, om, gj, rel(g12, g21), rel(mu, -act), mu.abs()])
}

/// Values of g_ℓ on random (ω̇, ḃ) tangents of type (1,1) on T^n_ℂ.
pub fn signature_samples(seed: u64, n: usize, ell: f64, count: usize) -> Result<Vec<f64>> {
    let w = random_configuration(seed, n, ell)?;
    let f = Frame::new(n);
    let mut s = config_sampler(seed + 1, n);
    let mut out = vec![];
    for _ in 0..count {
        let v = TangentW::new(s.real_pq(f, 1, 1), s.real_pq(f, 1, 1), TrigForm::trig_zero(f, 2))?;
        out.push(w.g_ell(&v)?);
    }
    Ok(out)
}

fn moment_map(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let fd = sc.tol(Suite::MomentMap, "finite_difference", 1e-5);
    let exact = sc.tol(Suite::MomentMap, "identity", 1e-8);
    for (i, ell) in [1.5, 0.0, 3.0].into_iter().enumerate() {
        let [lam, om, gj, gs, mu, size] = moment_calculus_sample(sc.seed.wrapping_add(i as u64), ell)?;
        o.le("lambda_vs_fd", lam, fd);
        o.le("omega_vs_fd", om, fd);
        o.le("g_vs_omega_j", gj, exact);
        o.le("g_symmetry", gs, exact);
        o.le("moment_action", mu, exact);
        o.ge("moment_size", size, 1e-6);
    }
    let n = sc.n.max(2);
    let pos = if sc.kahler_ells.is_empty() { vec![1.8] } else { sc.kahler_ells.clone() };
    let neg = if sc.negative_ells.is_empty() { vec![2.5] } else { sc.negative_ells.clone() };
    for ell in pos {
        for g in signature_samples(sc.seed, n, ell, 6)? {
            o.ge("signature_min_g_window", g, f64::MIN_POSITIVE);
        }
    }
    for ell in neg {
        for g in signature_samples(sc.seed, n, ell, 6)? {
            o.ge("signature_min_neg_g_above_2", -g, f64::MIN_POSITIVE);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- calabi residual

fn calabi_residual(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let name = sc.fixtures.configuration.as_deref().unwrap_or("flat-hs");
    let w = fixtures::configuration(name)?;
    let tol = sc.tol(Suite::CalabiResidual, "residual", 1e-12);
    let hs = w.hs_residual()?;
    let ca = w.calabi_residual()?;
    for (k, v) in [("hym", hs.hym), ("f02", hs.f02), ("balanced", hs.balanced), ("bianchi", hs.bianchi)] {
        o.le(k, v, tol);
    }
    o.le("calabi_at_level", ca.max(), tol);
    let mtol = sc.tol(Suite::CalabiResidual, "moment", 1e-10);
    for (z, lie) in moment_test_set(&w, sc.seed, sc.mode_cap.max(1), 10)? {
        o.le("moment", z.abs(), mtol);
        o.le("lie_residual", lie, mtol);
    }
    Ok(())
}

/// ⟨μ(W), ζ⟩ and the Lie residual of ζ for `count` elements ζ = (s, 2⟨s,F⟩ + dξ).
pub fn moment_test_set(w: &Configuration, seed: u64, cap: i32, count: usize) -> Result<Vec<(f64, f64)>> {
    let f = w.frame();
    let alg = LieAlgebra::su2();
    ensure!(w.spec == alg.pairing, "moment test set expects an su(2) configuration");
    // modes along x¹, y¹ keep the quadrature grid two-dimensional
    let mut s = Sampler::new(seed).kmax(cap).terms(2).axes(&[0, f.n]);
    let fr = curvature(&w.theta_r())?;
    let mut out = vec![];
    for _ in 0..count {
        let sg = s.lie(&alg, f, 0, true);
        let b = pair(&sg, &fr, &w.spec)?.scale_re(2.0).add(&s.real(f, 1).d());
        let z = PicLieElement { s: sg, b };
        out.push((w.moment(&z)?, w.lie_residual(&z)?));
    }
    Ok(out)
}

// ---------------------------------------------------------------- condition A

pub fn gauge_vector(s: &mut Sampler, alg: &LieAlgebra, f: Frame) -> GaugeVector {
    GaugeVector { u: s.lie(alg, f, 0, true), xi: s.real(f, 1) }
}

pub fn moduli_tangent(s: &mut Sampler, alg: &LieAlgebra, f: Frame) -> Result<TangentW> {
    Ok(TangentW::new(s.real_pq(f, 1, 1).scale_re(0.3), s.real(f, 2).scale_re(0.3), s.lie(alg, f, 1, true).scale_re(0.3))?)
}

/// Largest entry of 𝐋𝐏̂ over all modes with |k|_∞ ≤ kmax.
pub fn complex_property(bg: &FlatBackground, kmax: i32) -> Result<f64> {
    use rayon::prelude::*;
    let d = 2 * bg.n();
    let total = (2 * kmax + 1).pow(d as u32);
    let errs: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut k = vec![0; d];
            for kj in k.iter_mut() {
                *kj = idx % (2 * kmax + 1) - kmax;
                idx /= 2 * kmax + 1;
            }
            let op = bg.mode_operator(&mode_from(&k))?;
            Ok((&op.l * &op.p_hat).iter().map(|z| z.norm()).fold(0.0, f64::max))
        })
        .collect();
    errs.into_iter().try_fold(0.0, |m, e| Ok(f64::max(m, e?)))
}

fn condition_a(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let cap = sc.mode_cap.clamp(1, 2);
    let mut table = vec![];
    for name in &sc.fixtures.backgrounds {
        let bg = fixtures::background(name, sc.ell)?;
        let f = Frame::new(bg.n());
        o.le("l_after_p_hat", complex_property(&bg, 1)?, sc.tol(Suite::ConditionA, "l_after_p_hat", 1e-10));
        let mut s = Sampler::new(sc.seed).kmax(1).terms(2);
        let atol = sc.tol(Suite::ConditionA, "adjointness", 1e-6);
        for _ in 0..3 {
            let v = moduli_tangent(&mut s, &bg.alg, f)?;
            let y = gauge_vector(&mut s, &bg.alg, f);
            let lhs = bg.w.omega_ell(&v, &bg.w.complex_structure_j(&bg.p_hat(&y)?)?)?;
            let rhs = bg.l2_pairing(&bg.p_hat_adjoint(&v)?, &y)?;
            o.le("adjointness", rel(lhs, rhs), atol);
        }
        let gtol = sc.tol(Suite::ConditionA, "gauge_fix", 1e-8);
        let v = moduli_tangent(&mut s, &bg.alg, f)?;
        let g = bg.gauge_fix(&v)?;
        o.le("gauge_fix_residual", g.residual, gtol);
        // 𝐋𝐏̂ = 0, so the slice projection leaves 𝐋v unchanged
        o.le("gauge_fix_l_invariant", bg.l(&g.v)?.sub(&bg.l(&v)?).max_abs(), gtol);
        o.le("gauge_fix_idempotent", bg.gauge_fix(&g.v)?.v.sub(&g.v).max_abs(), gtol);
        let y = gauge_vector(&mut s, &bg.alg, f);
        o.le("gauge_fix_pure_gauge", bg.gauge_fix(&bg.p_hat(&y)?)?.v.max_abs(), gtol);
        let rep = bg.condition_a(cap)?;
        if fixtures::is_trivial(name) {
            o.eq(&format!("constant_kernel[{name}]"), rep.constant_kernel, bg.alg.dim());
            o.eq(&format!("nonconstant_kernel[{name}]"), rep.nonconstant_kernel, 0);
        } else {
            o.residuals.insert(format!("constant_kernel[{name}]"), rep.constant_kernel as f64);
            o.eq(&format!("nonconstant_kernel[{name}]"), rep.nonconstant_kernel, 0);
        }
        table.push(json!({
            "background": name,
            "kmax": rep.kmax,
            "modes": rep.modes.len(),
            "constant_kernel": rep.constant_kernel,
            "nonconstant_kernel": rep.nonconstant_kernel,
            "threshold": rep.threshold,
            "condition_a": rep.holds(),
        }));
    }
    o.table = Some(Value::Array(table));
    Ok(())
}

// ---------------------------------------------------------------- cone metric

/// Seeded points of the Kähler cone where the cubic is positive.
pub fn cone_points(ring: &IntersectionRing, seed: u64, count: usize) -> Vec<ComplexifiedClass> {
    let mut s = Sampler::new(seed);
    let mut out = vec![];
    let mut tries = 0;
    while out.len() < count && tries < 100 * count.max(1) {
        tries += 1;
        let a = ComplexifiedClass::real(s.vec(ring.h11, 0.3, 2.0));
        if ring.potential_k(&a, 1.0).is_ok() {
            out.push(a);
        }
    }
    out
}

pub fn random_direction(s: &mut Sampler, h: usize) -> ComplexifiedClass {
    ComplexifiedClass { re: s.vec(h, -1.0, 1.0), im: s.vec(h, -1.0, 1.0) }
}

pub fn sorted_eigenvalues(g: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = g.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

fn cone_metric(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let tol = sc.tol(Suite::ConeMetric, "levi_form", 1e-5);
    let mut table = vec![];
    let mut ells = vec![1.0];
    ells.extend(&sc.kahler_ells);
    ells.extend(&sc.negative_ells);
    for r in &sc.fixtures.rings {
        let ring = fixtures::ring(r)?;
        let label = fixtures::ring_label(r);
        let pts = cone_points(&ring, sc.seed, sc.samples.max(10));
        o.ge(&format!("points[{label}]"), pts.len() as f64, 10.0);
        let mut s = Sampler::new(sc.seed ^ 0xc0ffee);
        for a in &pts {
            let ad = random_direction(&mut s, ring.h11);
            for &ell in &ells {
                let g = ring.cone_metric(a, &ad, ell)?;
                let fd = ring.levi_form_fd(a, &ad, ell, 1e-4)?;
                o.le("levi_form_vs_fd", (g - fd).abs() / g.abs().max(1.0), tol);
            }
            for &ell in &sc.kahler_ells {
                o.ge("min_eig_window", sorted_eigenvalues(&ring.cone_metric_matrix(a, ell)?)[0], f64::MIN_POSITIVE);
            }
            for &ell in &sc.negative_ells {
                let e = sorted_eigenvalues(&ring.cone_metric_matrix(a, ell)?);
                o.ge("min_eig_neg_g_above_2", -e[e.len() - 1], f64::MIN_POSITIVE);
            }
        }
        let reference = ComplexifiedClass::real(vec![1.0; ring.h11]);
        for &ell in sc.kahler_ells.iter().chain(&sc.negative_ells) {
            let e = sorted_eigenvalues(&ring.cone_metric_matrix(&reference, ell)?);
            table.push(json!({ "ring": label, "ell": ell, "point": reference.re, "eigenvalues": e }));
        }
    }
    o.table = Some(Value::Array(table));
    Ok(())
}

// ---------------------------------------------------------------- fibre metric

/// ω̇ = constant Hermitian + i∂∂̄φ on T²_ℂ.
pub fn ddbar_variation(seed: u64) -> TrigForm {
    let f = Frame::new(2);
    let mut s = Sampler::new(seed).kmax(1).terms(2);
    let phi = s.real(f, 0);
    let cst = Sampler::new(seed + 1).kmax(0).constant_hermitian(f, false);
    cst.add(&phi.delbar().del().scale(c(0.0, 1.0)))
}

/// Fibre metric against the dilaton g_ℓ on the flat U(1) torus: (ℓ = 0 with i∂∂̄φ terms, ℓ = 1.5 constant).
pub fn fibre_vs_dilaton(seed: u64) -> Result<Vec<f64>> {
    let f = Frame::new(2);
    let zero = TrigForm::trig_zero(f, 1);
    let cases = [
        (0.0, ddbar_variation(seed), ddbar_variation(seed + 2)),
        (1.5, ddbar_variation(seed + 4).constant_part(), ddbar_variation(seed + 6).constant_part()),
    ];
    let mut out = vec![];
    for (ell, wd, bd) in cases {
        let bg = fixtures::background("u1-flat", ell)?;
        let cl = bg.variation_classes(&wd, &bd, &zero, &zero)?;
        let p = bg.class_pairings(&cl)?;
        let gf = fibre_metric(&p, bg.m_ell(), ell);
        let gd = bg.w.g_ell(&TangentW::new(wd, bd, zero.clone())?)?;
        out.push((gf - gd).abs() / gd.abs().max(1.0));
    }
    Ok(out)
}

fn fibre_metric_suite(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    let tol = sc.tol(Suite::FibreMetric, "cone", 1e-9);
    let mut ells = vec![0.0, 1.0];
    ells.extend(&sc.kahler_ells);
    for r in &sc.fixtures.rings {
        let ring = fixtures::ring(r)?;
        let mut s = Sampler::new(sc.seed ^ 0xf1b4e);
        for a in cone_points(&ring, sc.seed, sc.samples.max(1)) {
            let ad = random_direction(&mut s, ring.h11);
            for &ell in &ells {
                let (p, m) = ring.pairings(&a, &ad, ell)?;
                let g = ring.cone_metric(&a, &ad, ell)?;
                o.le("fibre_vs_cone", (fibre_metric(&p, m, ell) - g).abs() / g.abs().max(1.0), tol);
                o.le("m_ell_vs_ring", (ring.m_ell(&a, ell)? - m).abs() / m.abs(), 1e-12);
            }
        }
    }
    let dtol = sc.tol(Suite::FibreMetric, "dilaton", 1e-6);
    for i in 0..sc.samples.clamp(1, 3) as u64 {
        for e in fibre_vs_dilaton(sc.seed.wrapping_add(31 + 10 * i))? {
            o.le("fibre_vs_dilaton", e, dtol);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- conjecture

/// Margins at ℓ = 1 for seeded cone points where the cone metric is positive definite.
pub fn conjecture_margins(ring: &IntersectionRing, seed: u64, count: usize) -> Result<Vec<f64>> {
    let mut s = Sampler::new(seed ^ 0x5eed);
    let mut out = vec![];
    for a in cone_points(ring, seed, 4 * count) {
        if out.len() == count {
            break;
        }
        if sorted_eigenvalues(&ring.cone_metric_matrix(&a, 1.0)?)[0] <= 0.0 {
            continue;
        }
        let ad = ComplexifiedClass::real(s.vec(ring.h11, -1.0, 1.0));
        let (p, m1) = ring.pairings(&a, &ad, 1.0)?;
        out.push(conjecture_margin(p.re_a_b, p.re_a_re_b, m1));
    }
    Ok(out)
}

fn conjecture(sc: &Scenario, o: &mut Outcome) -> Result<()> {
    for r in &sc.fixtures.rings {
        let ring = fixtures::ring(r)?;
        let label = fixtures::ring_label(r);
        let margins = conjecture_margins(&ring, sc.seed, sc.samples.max(1))?;
        o.ge(&format!("instances[{label}]"), margins.len() as f64, 1.0);
        for m in margins {
            o.ge("margin", m, f64::MIN_POSITIVE);
        }
        let a = ComplexifiedClass::real(vec![1.0; ring.h11]);
        let (p, m1) = ring.pairings(&a, &ComplexifiedClass::real(vec![0.0; ring.h11]), 1.0)?;
        o.le("margin_at_zero_variation", conjecture_margin(p.re_a_b, p.re_a_re_b, m1).abs(), 0.0);
    }
    Ok(())
}
