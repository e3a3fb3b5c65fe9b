use nalgebra::DMatrix;
use proptest::prelude::*;
use salg::courant::{chern_correspondence, HoloData};
use salg::dilaton::*;
use salg::forms::*;
use salg::gauge::*;
use salg::picard::{PicLieElement, Picard};
use salg::sample::{hermitian_to_form, Sampler};

fn sampler(seed: u64) -> Sampler {
    Sampler::new(seed).kmax(1).terms(1).axes(&[0, 2])
}

/// Non-constant positive ω, non-trivial a and b over an su(2) base connection.
fn config(seed: u64, ell: f64) -> Configuration {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let mut s = sampler(seed);
    let omega = omega0(f).add(&s.real_pq(f, 1, 1).scale_re(0.08));
    let b = s.real(f, 2).scale_re(0.3);
    let a = s.lie(&alg, f, 1, true).scale_re(0.3);
    let theta0 = s.lie(&alg, f, 1, true).scale_re(0.3);
    Configuration::new(omega, b, a, theta0, alg.pairing, ell, Volume::Standard).unwrap()
}

fn tangent(s: &mut Sampler, full_b: bool) -> TangentW {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let b = if full_b { s.real(f, 2) } else { s.real_pq(f, 1, 1) };
    TangentW::new(s.real_pq(f, 1, 1).scale_re(0.5), b.scale_re(0.5), s.lie(&alg, f, 1, true).scale_re(0.5)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

#[test]
fn level_two_and_non_positive_omega_are_rejected() {
    let f = Frame::new(2);
    let spec = LieAlgebra::u1().pairing;
    let z = TrigForm::trig_zero(f, 1);
    assert!(Configuration::kahler(omega0(f), z.clone(), spec.clone(), 2.0, Volume::Standard).is_err());
    assert!(Configuration::kahler(omega0(f).neg(), z.clone(), spec.clone(), 1.0, Volume::Standard).is_err());
    let bad = omega0(f).add(&TrigForm::scalar_mode(f, 0b0101, &[1, 0, 0, 0], c(0.0, 2.0)).re());
    assert!(Configuration::kahler(bad, z, spec, 1.0, Volume::Standard).is_err());
}

#[test]
fn m_ell_closed_forms() {
    let f = Frame::new(2);
    let spec = LieAlgebra::u1().pairing;
    let z = TrigForm::trig_zero(f, 1);
    for ell in [-1.0, 0.0, 1.0, 1.5, 3.0] {
        let w = Configuration::kahler(omega0(f), z.clone(), spec.clone(), ell, Volume::Standard).unwrap();
        assert!((w.m_ell().unwrap() - 1.0).abs() < 1e-14);
        for lam in [0.5, 2.0, 3.7] {
            let w = Configuration::kahler(omega0(f).scale_re(lam), z.clone(), spec.clone(), ell, Volume::Standard).unwrap();
            let want = lam.powf(2.0 * (2.0 - ell) / 2.0);
            assert!(rel(w.m_ell().unwrap(), want) < 1e-13);
        }
    }
    let w = config(1, 0.0);
    let vol = w.omega.power_over_factorial(2).unwrap().to_grid(&w.dims(&[]).unwrap()).unwrap().integrate().unwrap().re;
    assert!(rel(w.m_ell().unwrap(), vol) < 1e-13);
    assert!(w.m_ell_convergence().unwrap() < 1e-8);
}

#[test]
fn complex_structure_examples() {
    let w = config(2, 1.5);
    let mut s = sampler(20);
    let f = Frame::new(2);
    let rb = w.rebased();
    let om = s.real_pq(f, 1, 1);
    let jv = rb.complex_structure_j(&TangentW { omega: om.clone(), ..TangentW::zero(f, 2) }).unwrap();
    assert!(jv.omega.max_abs() < 1e-15 && jv.a.max_abs() < 1e-15);
    assert!(jv.b.sub(&om).max_abs() < 1e-15);
    let a = s.lie(&LieAlgebra::su2(), f, 1, true);
    let ja = rb.complex_structure_j(&TangentW { a: a.clone(), ..TangentW::zero(f, 2) }).unwrap();
    assert!(ja.omega.max_abs() < 1e-15 && ja.b.max_abs() < 1e-15);
    assert!(ja.a.j1().add(&a).max_abs() < 1e-15);
    for seed in 0..4 {
        let v = tangent(&mut sampler(30 + seed), true);
        let jjv = w.complex_structure_j(&w.complex_structure_j(&v).unwrap()).unwrap();
        assert!(jjv.add(&v).max_abs() < 1e-13, "J² ≠ −1: {}", jjv.add(&v).max_abs());
    }
}

#[test]
fn lambda_examples() {
    let f = Frame::new(2);
    let w = config(3, 1.2);
    let mut s = sampler(4);
    let mut v = tangent(&mut s, true);
    v.b = TrigForm::trig_zero(f, 1);
    v.a = TrigForm::trig_zero(f, 2);
    assert_eq!(w.lambda_ell(&v).unwrap(), 0.0);
    // constant ḃ = (i/2) B_{jk} dz^j∧dz̄^k on ω₀: λ = (ℓ−2)/2 · tr B
    let spec = LieAlgebra::u1().pairing;
    let bm = DMatrix::from_row_slice(2, 2, &[cr(0.7), c(0.2, -0.3), c(0.2, 0.3), cr(-1.9)]);
    for ell in [0.0, 1.0, 3.0] {
        let w0 = Configuration::kahler(omega0(f), TrigForm::trig_zero(f, 1), spec.clone(), ell, Volume::Standard).unwrap();
        let v = TangentW::new(TrigForm::trig_zero(f, 1), hermitian_to_form(f, &bm), TrigForm::trig_zero(f, 1)).unwrap();
        assert!((w0.lambda_ell(&v).unwrap() - (ell - 2.0) / 2.0 * (0.7 - 1.9)).abs() < 1e-14);
    }
}

/// λ_ℓ(v) = d log M_ℓ(𝐉v) by central differences.
fn lambda_fd(w: &Configuration, v: &TangentW, h: f64) -> f64 {
    let jv = w.complex_structure_j(v).unwrap();
    let lp = w.shifted(&jv, h).unwrap().m_ell().unwrap().ln();
    let lm = w.shifted(&jv, -h).unwrap().m_ell().unwrap().ln();
    (lp - lm) / (2.0 * h)
}

#[test]
fn lambda_is_minus_j_dlog_m() {
    for (seed, ell) in [(5, 1.5), (6, 0.0), (7, 3.0), (8, -1.0)] {
        let w = config(seed, ell);
        let v = tangent(&mut sampler(seed + 100), true);
        let exact = w.lambda_ell(&v).unwrap();
        let fd = lambda_fd(&w, &v, 1e-4);
        assert!((exact - fd).abs() < 1e-6 * exact.abs().max(1.0), "{exact} vs {fd}");
    }
}

#[test]
fn omega_matches_second_order_differences_of_log_m() {
    for (seed, ell) in [(9, 1.5), (10, 0.0), (11, 3.0)] {
        let w = config(seed, ell);
        let mut s = sampler(seed + 200);
        let (v1, v2) = (tangent(&mut s, true), tangent(&mut s, true));
        let h = 1e-3;
        let d = |v: &TangentW, u: &TangentW| {
            (lambda_fd(&w.shifted(v, h).unwrap(), u, 1e-4) - lambda_fd(&w.shifted(v, -h).unwrap(), u, 1e-4)) / (2.0 * h)
        };
        let fd = d(&v1, &v2) - d(&v2, &v1);
        let exact = w.omega_ell(&v1, &v2).unwrap();
        assert!((exact - fd).abs() < 1e-5 * exact.abs().max(1.0), "Ω = {exact}, fd {fd}");
        let a = w.omega_ell(&v2, &v1).unwrap();
        assert!((exact + a).abs() < 1e-12 * exact.abs().max(1.0));
    }
}

#[test]
fn omega_is_closed_on_three_parameter_families() {
    let w = config(12, 1.5);
    let mut s = sampler(13);
    let vs: Vec<TangentW> = (0..3).map(|_| tangent(&mut s, true)).collect();
    let h = 1e-3;
    let d = |i: usize, j: usize, k: usize| {
        let om = |c: &Configuration| c.omega_ell(&vs[j], &vs[k]).unwrap();
        (om(&w.shifted(&vs[i], h).unwrap()) - om(&w.shifted(&vs[i], -h).unwrap())) / (2.0 * h)
    };
    let dd = d(0, 1, 2) - d(1, 0, 2) + d(2, 0, 1);
    let scale = w.omega_ell(&vs[0], &vs[1]).unwrap().abs().max(1.0);
    assert!(dd.abs() < 1e-4 * scale, "dΩ = {dd}");
}

#[test]
fn g_matches_omega_of_j_and_is_symmetric() {
    for (seed, ell) in [(14, 1.5), (15, 0.0), (16, 3.0), (17, 1.0)] {
        let w = config(seed, ell);
        let mut s = sampler(seed + 300);
        let (v1, v2) = (tangent(&mut s, true), tangent(&mut s, true));
        let g = w.g_ell(&v1).unwrap();
        let viaj = w.omega_ell(&v1, &w.complex_structure_j(&v1).unwrap()).unwrap();
        assert!((g - viaj).abs() < 1e-8 * g.abs().max(1.0), "{g} vs {viaj}");
        let g12 = w.omega_ell(&v1, &w.complex_structure_j(&v2).unwrap()).unwrap();
        let g21 = w.omega_ell(&v2, &w.complex_structure_j(&v1).unwrap()).unwrap();
        assert!((g12 - g21).abs() < 1e-8 * g12.abs().max(1.0));
    }
}

#[test]
fn signature_on_the_omega_b_block() {
    let f = Frame::new(2);
    for (ell, sign) in [(1.2, 1.0), (1.8, 1.0), (2.5, -1.0), (4.0, -1.0)] {
        let w = config(18, ell);
        let mut s = sampler(19);
        for _ in 0..6 {
            let v = TangentW::new(s.real_pq(f, 1, 1), s.real_pq(f, 1, 1), TrigForm::trig_zero(f, 2)).unwrap();
            let g = w.g_ell(&v).unwrap();
            assert!(sign * g > 0.0, "ℓ = {ell}: g = {g}");
        }
    }
}

#[test]
fn moment_examples() {
    let f = Frame::new(2);
    let spec = LieAlgebra::u1().pairing;
    let z1 = TrigForm::trig_zero(f, 1);
    let bm = DMatrix::from_row_slice(2, 2, &[cr(1.3), c(0.1, 0.4), c(0.1, -0.4), cr(0.4)]);
    for (ell, lam) in [(1.0, 1.0), (0.0, 2.0), (3.0, 0.6)] {
        let w = Configuration::kahler(omega0(f).scale_re(lam), z1.clone(), spec.clone(), ell, Volume::Standard).unwrap();
        let z = PicLieElement { s: z1.clone(), b: hermitian_to_form(f, &bm) };
        let want = (2.0 - ell) / 2.0 / lam * (1.3 + 0.4);
        assert!(rel(w.moment(&z).unwrap(), want) < 1e-13);
        // B = dξ with constant ω: Stokes
        let xi = sampler(21).real(f, 1);
        let z = PicLieElement { s: z1.clone(), b: xi.d() };
        assert!(w.moment(&z).unwrap().abs() < 1e-14);
    }
}

#[test]
fn moment_action_identity() {
    let f = Frame::new(2);
    for (seed, ell) in [(22, 1.5), (23, 0.0), (24, 3.0)] {
        let w = config(seed, ell);
        let mut s = sampler(seed + 400);
        let sg = s.lie(&LieAlgebra::su2(), f, 0, true).scale_re(0.5);
        let fr = curvature(&w.theta_r()).unwrap();
        let b = pair(&sg, &fr, &w.spec).unwrap().scale_re(2.0).add(&s.real(f, 1).d()).add(&s.real(f, 2).constant_part());
        let z = PicLieElement { s: sg, b };
        assert!(w.lie_residual(&z).unwrap() < 1e-13);
        let mu = w.moment(&z).unwrap();
        let act = w.infinitesimal_action(&z).unwrap();
        let lam = w.rebased().lambda_ell(&act).unwrap();
        assert!((mu + lam).abs() < 1e-12 * mu.abs().max(1.0), "{mu} vs {lam}");
    }
}

#[test]
fn moment_equivariance_under_b_fields() {
    let f = Frame::new(2);
    let w = config(25, 1.5);
    let dims = w.dims(&[]).unwrap();
    let pic = Picard::new(w.theta_r(), w.spec.clone(), dims).unwrap();
    let tau = sampler(26).real(f, 2).constant_part();
    let p = pic.element(pic.identity().g, tau.to_grid(&dims).unwrap()).unwrap();
    let pw = w.shifted(&TangentW { b: tau.neg(), ..TangentW::zero(f, 2) }, 1.0).unwrap();
    let mut s = sampler(27);
    let sg = s.lie(&LieAlgebra::su2(), f, 0, true).scale_re(0.5);
    let fr = curvature(&w.theta_r()).unwrap();
    let z = PicLieElement { s: sg.clone(), b: pair(&sg, &fr, &w.spec).unwrap().scale_re(2.0).add(&s.real(f, 1).d()) };
    let adz = pic.adjoint(&pic.inverse(&p).unwrap(), &z.to_grid(&dims).unwrap()).unwrap().to_trig(1e-12);
    let (l, r) = (pw.moment(&z).unwrap(), w.moment(&adz).unwrap());
    assert!((l - r).abs() < 1e-10, "{l} vs {r}");
}

#[test]
fn flat_hull_strominger_fixture() {
    let w = flat_hs_fixture(LieAlgebra::su2().pairing).unwrap();
    let r = w.hs_residual().unwrap();
    assert!(r.max() <= 1e-12, "{r:?}");
    let r = w.calabi_residual().unwrap();
    assert!(r.max() <= 1e-12, "{r:?}");
    let f = Frame::new(3);
    let xi = Sampler::new(28).kmax(1).terms(2).real(f, 1);
    let z = PicLieElement { s: TrigForm::trig_zero(f, 2), b: xi.d() };
    assert!(w.moment(&z).unwrap().abs() < 1e-14);
}

#[test]
fn perturbed_omega_breaks_balance() {
    let f = Frame::new(2);
    let spec = LieAlgebra::u1().pairing;
    let om = omega0(f).add(&TrigForm::scalar_mode(f, 0b0101, &[0, 1, 0, 0], cr(0.1)).re().scale_re(1.0));
    let om = om.proj(1, 1);
    let w = Configuration::kahler(om, TrigForm::trig_zero(f, 1), spec, 1.0, Volume::Standard).unwrap();
    assert!(w.calabi_residual().unwrap().balanced > 1e-3);
}

#[test]
fn abelian_mode_with_trace_free_curvature_is_hym() {
    // a = i cos(x¹) dx²: F = −i sin(x¹) dx¹∧dx², whose (1,1) part is off-diagonal
    let f = Frame::new(2);
    let dx2 = TrigForm::real_blade(f, 0b0010, cr(1.0));
    let cosx = TrigForm::scalar_mode(f, 0, &[1, 0, 0, 0], cr(0.5)).add(&TrigForm::scalar_mode(f, 0, &[-1, 0, 0, 0], cr(0.5)));
    let a = cosx.w(&dx2).unwrap().scale(c(0.0, 1.0));
    let w = Configuration::new(
        omega0(f),
        TrigForm::trig_zero(f, 1),
        a,
        TrigForm::trig_zero(f, 1),
        LieAlgebra::u1().pairing,
        1.0,
        Volume::Standard,
    )
    .unwrap();
    let r = w.calabi_residual().unwrap();
    assert!(r.hym <= 1e-9);
    assert!(r.balanced <= 1e-12);
}

/// Pluriclosed ω = ω₀ + ε(φ(z¹)dz¹∧dz̄² + c.c.) with H = −2i∂ω over a flat θ.
fn pluriclosed() -> (TrigForm, HoloData) {
    let f = Frame::new(2);
    let rho = TrigForm::scalar_mode(f, 0b1001, &[1, 0, 1, 0], c(0.05, 0.02));
    let omega = omega0(f).add(&rho).add(&rho.conj());
    let h = omega.del().scale(c(0.0, -2.0));
    let q = HoloData { h, theta: TrigForm::trig_zero(f, 1), spec: LieAlgebra::u1().pairing };
    (omega, q)
}

#[test]
fn compact_form_kahler_case() {
    let f = Frame::new(2);
    let q = HoloData { h: TrigForm::trig_zero(f, 1), theta: TrigForm::trig_zero(f, 1), spec: LieAlgebra::u1().pairing };
    let h = HermitianReduction::identity(1, [8, 1, 8, 1, 1, 1, 1, 1]);
    let cf = compact_form_data(&omega0(f), &TrigForm::trig_zero(f, 1), &h, &q, 1e-10).unwrap();
    let w = cf.configuration(1.0, Volume::Standard).unwrap();
    assert!(w.b.max_abs() == 0.0 && w.a.max_abs() == 0.0);
    assert!(w.omega.sub(&omega0(f)).max_abs() == 0.0);
    assert!(cf.real.h.max_abs() < 1e-15);
}

#[test]
fn compact_form_round_trip_and_anomaly() {
    let (omega, q) = pluriclosed();
    let f = omega.frame;
    assert!(q.h.d().max_abs() < 1e-15);
    let h = HermitianReduction::identity(1, [8, 1, 8, 1, 1, 1, 1, 1]);
    let cf = compact_form_data(&omega, &TrigForm::trig_zero(f, 1), &h, &q, 1e-10).unwrap();
    assert!(cf.real.anomaly_residual().unwrap() < 1e-14);
    let t = chern_correspondence(&cf.lifting, &q.spec).unwrap();
    assert!(t.omega.sub(&omega).max_abs() < 1e-15 && t.b.max_abs() < 1e-15 && t.a.max_abs() < 1e-15);
    let again = compact_form_data(&t.omega, &cf.upsilon, &h, &q, 1e-10).unwrap();
    assert!(again.omega.sub(&cf.omega).max_abs() < 1e-15);
    assert!(again.lifting.gamma.sub(&cf.lifting.gamma).max_abs() < 1e-15);
    assert!(again.real.h.sub(&cf.real.h).max_abs() < 1e-15);
}

#[test]
fn compact_form_constraint_violation() {
    let (omega, q) = pluriclosed();
    let f = omega.frame;
    let h = HermitianReduction::identity(1, [8, 1, 8, 1, 1, 1, 1, 1]);
    let ups = TrigForm::scalar_mode(f, 0b0011, &[1, 0, 0, 0], cr(0.3));
    assert!(compact_form_data(&omega, &ups, &h, &q, 1e-10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn j_squares_to_minus_one(seed in 0u64..1000) {
        let w = config(seed, 1.5);
        let v = tangent(&mut sampler(seed + 7), true);
        let jjv = w.complex_structure_j(&w.complex_structure_j(&v).unwrap()).unwrap();
        prop_assert!(jjv.add(&v).max_abs() < 1e-13);
    }

    #[test]
    fn g_is_omega_j_on_random_tangents(seed in 0u64..1000, ell in prop_oneof![-1.0..1.9f64, 2.1..4.0f64]) {
        let w = config(seed, ell);
        let mut s = sampler(seed + 11);
        let (v1, v2) = (tangent(&mut s, true), tangent(&mut s, false));
        let g = w.g_ell(&v1).unwrap();
        let viaj = w.omega_ell(&v1, &w.complex_structure_j(&v1).unwrap()).unwrap();
        prop_assert!((g - viaj).abs() < 1e-8 * g.abs().max(1.0));
        let g12 = w.omega_ell(&v1, &w.complex_structure_j(&v2).unwrap()).unwrap();
        let g21 = w.omega_ell(&v2, &w.complex_structure_j(&v1).unwrap()).unwrap();
        prop_assert!((g12 - g21).abs() < 1e-8 * g12.abs().max(1.0));
    }

    #[test]
    fn lambda_and_omega_are_j_invariant_pairings(seed in 0u64..1000) {
        // Ω(𝐉v₁, 𝐉v₂) = Ω(v₁, v₂)
        let w = config(seed, 1.5);
        let mut s = sampler(seed + 13);
        let (v1, v2) = (tangent(&mut s, true), tangent(&mut s, true));
        let o = w.omega_ell(&v1, &v2).unwrap();
        let oj = w.omega_ell(&w.complex_structure_j(&v1).unwrap(), &w.complex_structure_j(&v2).unwrap()).unwrap();
        prop_assert!((o - oj).abs() < 1e-8 * o.abs().max(1.0), "{} vs {}", o, oj);
    }
}
