use proptest::prelude::*;
use salg::courant::*;
use salg::forms::*;
use salg::gauge::*;
use salg::sample::Sampler;

fn section(s: &mut Sampler, alg: &LieAlgebra, f: Frame) -> CourantSection {
    CourantSection {
        v: (0..f.dim()).map(|_| s.scalar(f, 0)).collect(),
        r: s.lie(alg, f, 0, false),
        xi: s.scalar(f, 1),
    }
}

/// θ random, H = −CS(θ) + dκ + constant, so dH + ⟨F∧F⟩ = 0.
fn valid_data(s: &mut Sampler, alg: &LieAlgebra, f: Frame) -> CourantData {
    let theta = s.lie(alg, f, 1, false);
    let spec = alg.pairing.clone();
    let h = chern_simons(&theta, &spec).unwrap().neg().add(&s.scalar(f, 2).d()).add(&s.scalar(f, 3).constant_part());
    CourantData::new(h, theta, spec).unwrap()
}

fn coord(f: Frame, a: usize, m: usize) -> CourantSection {
    let mut v: Vec<TrigForm> = (0..f.dim()).map(|_| TrigForm::trig_zero(f, 1)).collect();
    v[a] = TrigForm::one(f, (), 1);
    CourantSection::vector(v, m)
}

#[test]
fn flat_untwisted_bracket_of_coordinate_fields_vanishes() {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let data = CourantData::new(TrigForm::trig_zero(f, 1), TrigForm::trig_zero(f, 2), alg.pairing.clone()).unwrap();
    let b = e0_bracket(&coord(f, 0, 2), &coord(f, 3, 2), &data).unwrap();
    assert_eq!(b.max_abs(), 0.0);
}

#[test]
fn h_twist_of_coordinate_fields() {
    let f = Frame::new(2);
    let mut s = Sampler::new(3);
    let h = s.scalar(f, 3);
    let data = CourantData::new(h.clone(), TrigForm::trig_zero(f, 1), LieAlgebra::u1().pairing).unwrap();
    for (a, b) in [(0, 1), (1, 2), (3, 0)] {
        let br = e0_bracket(&coord(f, a, 1), &coord(f, b, 1), &data).unwrap();
        // i_V i_W H = H(W, V, ·) with V = ∂_a, W = ∂_b
        let want = h.contract(b).contract(a);
        assert!(br.xi.sub(&want).max_abs() < 1e-15);
        assert!(br.r.max_abs() == 0.0);
    }
}

#[test]
fn pairing_special_cases() {
    let f = Frame::new(2);
    let mut s = Sampler::new(4);
    let alg = LieAlgebra::su2();
    let xi = s.scalar(f, 1);
    let v = coord(f, 2, 2);
    let mut w = CourantSection::zero(f, 2);
    w.xi = xi.clone();
    let p = e0_pairing(&v, &w, &alg.pairing).unwrap();
    assert!(p.sub(&xi.contract(2).scale_re(0.5)).max_abs() < 1e-15);
    let r = s.lie(&alg, f, 0, false);
    let mut u = CourantSection::zero(f, 2);
    u.r = r.clone();
    let p = e0_pairing(&u, &u, &alg.pairing).unwrap();
    assert!(p.sub(&pair(&r, &r, &alg.pairing).unwrap()).max_abs() < 1e-15);
}

#[test]
fn pairing_is_nondegenerate_at_a_point() {
    // Gram matrix over the constant basis of E₀ at a point: full rank.
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let mut basis = Vec::new();
    for a in 0..f.dim() {
        basis.push(coord(f, a, 2));
        let mut x = CourantSection::zero(f, 2);
        x.xi = TrigForm::scalar(f, (), 1 << a, cr(1.0));
        basis.push(x);
    }
    for e in &alg.basis {
        let mut x = CourantSection::zero(f, 2);
        x.r = TrigForm::constant(f, (), 0, e);
        basis.push(x);
    }
    let k = basis.len();
    let g = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        e0_pairing(&basis[i], &basis[j], &alg.pairing).unwrap().constant_part().coeff(0).get(&[0; 8])[(0, 0)]
    });
    assert_eq!(g.rank(1e-12), k);
}

#[test]
fn untwisted_zero_data_satisfies_axioms() {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let data = CourantData::new(TrigForm::trig_zero(f, 1), TrigForm::trig_zero(f, 2), alg.pairing.clone()).unwrap();
    let mut s = Sampler::new(7).kmax(2).terms(2);
    let secs: Vec<_> = (0..3).map(|_| section(&mut s, &alg, f)).collect();
    let fun = vec![s.scalar(f, 0)];
    let r = axioms_residual(&data, &secs, &fun).unwrap();
    assert!(r.max() < 1e-10, "{r:?}");
}

#[test]
fn anomaly_violation_breaks_only_jacobi() {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let mut s = Sampler::new(11).kmax(1).terms(2);
    let data = valid_data(&mut s, &alg, f);
    assert!(data.anomaly_residual().unwrap() < 1e-12);
    let secs: Vec<_> = (0..3).map(|_| section(&mut s, &alg, f)).collect();
    let fun = vec![s.scalar(f, 0)];
    let ok = axioms_residual(&data, &secs, &fun).unwrap();
    assert!(ok.max() < 1e-9, "{ok:?}");
    let bad = data.with_h(data.h.add(&TrigForm::scalar_mode(f, 0b0111, &[0, 1, 0, 0], cr(0.3))));
    assert!(bad.anomaly_residual().unwrap() > 0.1);
    let r = axioms_residual(&bad, &secs, &fun).unwrap();
    assert!(r.d1 > 1e-3, "{r:?}");
    assert!(r.d2.max(r.d3).max(r.d4).max(r.d5) < 1e-9, "{r:?}");
}

#[test]
fn trivial_gb_action_is_identity() {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let mut s = Sampler::new(5);
    let x = section(&mut s, &alg, f);
    let y = gb_action(&TrigForm::trig_zero(f, 1), &TrigForm::trig_zero(f, 2), &x, &alg.pairing).unwrap();
    assert_eq!(x.sub(&y).max_abs(), 0.0);
}

#[test]
fn trivial_lifting_reduces_to_projection() {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let mut s = Sampler::new(9);
    let tp = s.lie_pq(&alg, f, 1, 0);
    let kappa = s.scalar_pq(f, 2, 0);
    let (data, l) = synthesize_lifting(&tp, &kappa, &TrigForm::trig_zero(f, 1), &TrigForm::trig_zero(f, 2), &alg.pairing).unwrap();
    assert_eq!(lifting_check(&l, &data).unwrap(), (0.0, 0.0));
    let q = reduce_lifting(&l, &data, 1e-9).unwrap();
    assert!(q.h.sub(&data.h.proj(3, 0).add(&data.h.proj(2, 1))).max_abs() < 1e-14);
    assert!(q.theta.sub(&data.theta).max_abs() == 0.0);
}

#[test]
fn pure_gamma_shift_moves_h_by_del_gamma() {
    let f = Frame::new(2);
    let alg = LieAlgebra::u1();
    let mut s = Sampler::new(12);
    let tp = s.lie_pq(&alg, f, 1, 0);
    let kappa = s.scalar_pq(f, 2, 0);
    let gamma = s.scalar_pq(f, 1, 1);
    let zero_b = TrigForm::trig_zero(f, 1);
    let (base, _) = synthesize_lifting(&tp, &kappa, &TrigForm::trig_zero(f, 1), &zero_b, &alg.pairing).unwrap();
    // with β = 0 the base data is unchanged: lift (γ, 0) on H_c − dγ
    let data = base.with_h(base.h.sub(&gamma.d()));
    let l = Lifting::new(gamma.clone(), zero_b).unwrap();
    let q = reduce_lifting(&l, &data, 1e-9).unwrap();
    let expect = data.h.proj(3, 0).add(&data.h.proj(2, 1)).add(&gamma.del());
    assert!(q.h.sub(&expect).max_abs() < 1e-13);
    assert!(gamma.del().max_abs() > 0.1);
}

#[test]
fn abelian_mode_solve_for_beta() {
    // θ = c e^{i<k,x>} dz̄² has F^{0,2} = ∂̄θ ≠ 0
    let f = Frame::new(2);
    let alg = LieAlgebra::u1();
    let k = [1, 0, 0, 1];
    let th = TrigForm::scalar_mode(f, 1 << 3, &k, c(0.0, 0.4));
    let data = CourantData::new(TrigForm::trig_zero(f, 1), th.clone(), alg.pairing.clone()).unwrap();
    let f02 = curvature(&th).unwrap().proj(0, 2);
    assert!(f02.max_abs() > 0.1);
    // oracle: β = −θ^{0,1} removes the (0,1)-part exactly in the abelian case
    let beta = th.proj(0, 1).neg();
    let l = Lifting { gamma: TrigForm::trig_zero(f, 1), beta };
    let (_, e2) = lifting_check(&l, &data).unwrap();
    assert!(e2 < 1e-15);
    // per-mode solve: ∂̄β = −F^{0,2} with β = b e^{i<k,x>} dz̄²
    let sym = f.symbol(&mode_from(&k), 2);
    let target = f02.coeff(0b1100).get(&mode_from(&k))[(0, 0)];
    let b = -target / sym;
    assert!((b - c(0.0, -0.4)).norm() < 1e-15);
    let l2 = Lifting { gamma: TrigForm::trig_zero(f, 1), beta: TrigForm::scalar_mode(f, 1 << 3, &k, b) };
    let (_, e2b) = lifting_check(&l2, &data).unwrap();
    assert!(e2b < 1e-15, "{e2b}");
}

#[test]
fn perturbed_lifting_has_positive_residual() {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let mut s = Sampler::new(21);
    let tp = s.lie_pq(&alg, f, 1, 0);
    let kappa = s.scalar_pq(f, 2, 0);
    let gamma = s.scalar_pq(f, 1, 1).add(&s.scalar_pq(f, 0, 2));
    let beta = s.lie_pq(&alg, f, 0, 1);
    let (data, l) = synthesize_lifting(&tp, &kappa, &gamma, &beta, &alg.pairing).unwrap();
    let (a, b) = lifting_check(&l, &data).unwrap();
    assert!(a.max(b) < 1e-12, "{a} {b}");
    let l2 = Lifting { gamma: l.gamma.clone(), beta: l.beta.add(&s.lie_pq(&alg, f, 0, 1).scale_re(0.1)) };
    let (a2, b2) = lifting_check(&l2, &data).unwrap();
    assert!(a2 > 1e-6 && b2 > 1e-6);
    let l3 = Lifting { gamma: l.gamma.add(&s.scalar_pq(f, 0, 2).scale_re(0.1)), beta: l.beta.clone() };
    assert!(lifting_check(&l3, &data).unwrap().0 > 1e-6);
    assert!(reduce_lifting(&l2, &data, 1e-9).is_err());
}

#[test]
fn chern_correspondence_trivial_cases() {
    let f = Frame::new(2);
    let spec = LieAlgebra::su2().pairing;
    let mut s = Sampler::new(31);
    let om = s.real_pq(f, 1, 1);
    let l = Lifting { gamma: om.scale(c(0.0, -1.0)), beta: TrigForm::trig_zero(f, 2) };
    let t = chern_correspondence(&l, &spec).unwrap();
    assert!(t.omega.sub(&om).max_abs() < 1e-15);
    assert!(t.b.max_abs() < 1e-15 && t.a.max_abs() == 0.0);
    let l = Lifting { gamma: om.clone(), beta: TrigForm::trig_zero(f, 2) };
    assert!(chern_correspondence(&l, &spec).unwrap().omega.max_abs() < 1e-15);
}

#[test]
fn lifting_image_is_isotropic() {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let mut s = Sampler::new(41);
    let l = Lifting { gamma: s.scalar_pq(f, 1, 1).add(&s.scalar_pq(f, 0, 2)), beta: s.lie_pq(&alg, f, 0, 1) };
    for i in 0..2 {
        for j in 0..2 {
            let p = e0_pairing(&l.image(i, &alg.pairing).unwrap(), &l.image(j, &alg.pairing).unwrap(), &alg.pairing).unwrap();
            // isotropy needs γ^{0,2} skew, which holds for any 2-form
            assert!(p.max_abs() < 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn axioms_hold_for_valid_data(seed in any::<u64>(), nonabelian in any::<bool>()) {
        let f = Frame::new(2);
        let alg = if nonabelian { LieAlgebra::su2() } else { LieAlgebra::u1() };
        let mut s = Sampler::new(seed).kmax(1).terms(2);
        let data = valid_data(&mut s, &alg, f);
        let mut s2 = Sampler::new(seed ^ 0x55).kmax(2).terms(2);
        let secs: Vec<_> = (0..3).map(|_| section(&mut s2, &alg, f)).collect();
        let fun = vec![s2.scalar(f, 0)];
        let r = axioms_residual(&data, &secs, &fun).unwrap();
        prop_assert!(r.max() < 1e-9, "{:?}", r);
    }

    #[test]
    fn gb_action_is_orthogonal_and_composes(seed in any::<u64>()) {
        let f = Frame::new(2);
        let alg = LieAlgebra::su2();
        let spec = &alg.pairing;
        let mut s = Sampler::new(seed).kmax(2).terms(2);
        let (g1, b1) = (s.scalar(f, 2), s.lie(&alg, f, 1, false));
        let (g2, b2) = (s.scalar(f, 2), s.lie(&alg, f, 1, false));
        let x = section(&mut s, &alg, f);
        let y = section(&mut s, &alg, f);
        let gx = gb_action(&g1, &b1, &x, spec).unwrap();
        let gy = gb_action(&g1, &b1, &y, spec).unwrap();
        let d = e0_pairing(&gx, &gy, spec).unwrap().sub(&e0_pairing(&x, &y, spec).unwrap());
        prop_assert!(d.max_abs() < 1e-11);
        let seq = gb_action(&g1, &b1, &gb_action(&g2, &b2, &x, spec).unwrap(), spec).unwrap();
        let (g, b) = gb_compose(&g1, &b1, &g2, &b2, spec).unwrap();
        prop_assert!(seq.sub(&gb_action(&g, &b, &x, spec).unwrap()).max_abs() < 1e-11);
        let back = gb_action(&g1, &b1, &gb_action(&g1.neg(), &b1.neg(), &x, spec).unwrap(), spec).unwrap();
        prop_assert!(back.sub(&x).max_abs() < 1e-11);
    }

    #[test]
    fn gb_action_transports_the_bracket(seed in any::<u64>()) {
        let f = Frame::new(2);
        let alg = LieAlgebra::su2();
        let spec = &alg.pairing;
        let mut s = Sampler::new(seed).kmax(1).terms(2);
        let data = valid_data(&mut s, &alg, f);
        let gamma = s.scalar(f, 2);
        let beta = s.lie(&alg, f, 1, false);
        let x = section(&mut s, &alg, f);
        let y = section(&mut s, &alg, f);
        let inv = |z: &CourantSection| gb_action(&gamma.neg(), &beta.neg(), z, spec).unwrap();
        let lhs = gb_action(&gamma, &beta, &e0_bracket(&inv(&x), &inv(&y), &data).unwrap(), spec).unwrap();
        let tw = twisted_data(&data, &gamma, &beta).unwrap();
        // independent expansion of H′
        let fc = curvature(&data.theta).unwrap();
        let h2 = data.h.add(&gamma.d())
            .sub(&pair(&beta, &fc, spec).unwrap().scale_re(2.0))
            .sub(&pair(&beta, &covariant_d(&data.theta, &beta).unwrap(), spec).unwrap())
            .sub(&pair(&beta, &beta.wedge(&beta, Wedge::Comm).unwrap(), spec).unwrap().scale_re(1.0 / 3.0));
        prop_assert!(tw.h.sub(&h2).max_abs() < 1e-11);
        prop_assert!(tw.anomaly_residual().unwrap() < 1e-10);
        let rhs = e0_bracket(&x, &y, &tw).unwrap();
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-10, "{}", lhs.sub(&rhs).max_abs());
    }

    #[test]
    fn valid_liftings_reduce_to_holomorphic_data(seed in any::<u64>()) {
        let f = Frame::new(2);
        let alg = LieAlgebra::su2();
        let mut s = Sampler::new(seed).kmax(1).terms(2);
        let tp = s.lie_pq(&alg, f, 1, 0);
        let kappa = s.scalar_pq(f, 2, 0);
        let gamma = s.scalar_pq(f, 1, 1).add(&s.scalar_pq(f, 0, 2));
        let beta = s.lie_pq(&alg, f, 0, 1);
        let (data, l) = synthesize_lifting(&tp, &kappa, &gamma, &beta, &alg.pairing).unwrap();
        prop_assert!(data.anomaly_residual().unwrap() < 1e-11);
        let q = reduce_lifting(&l, &data, 1e-9).unwrap();
        prop_assert!(q.residual().unwrap() < 1e-10);
        prop_assert!(q.theta.sub(&tp).max_abs() < 1e-14);
    }

    #[test]
    fn chern_correspondence_round_trip(seed in any::<u64>()) {
        let f = Frame::new(2);
        let alg = LieAlgebra::su2();
        let spec = &alg.pairing;
        let mut s = Sampler::new(seed).kmax(2).terms(3);
        let omega = s.real_pq(f, 1, 1);
        let b = s.real(f, 2);
        let a = s.lie(&alg, f, 1, true);
        prop_assert!(a.anti_hermitian_defect() < 1e-14);
        let t = ChernTriple { omega: omega.clone(), b: b.clone(), a: a.clone() };
        let l = chern_inverse(&t, spec).unwrap();
        // inverse written through J, as an independent oracle for ⟨a^{0,1}∧a^{1,0}⟩
        let ja = a.j1();
        let jterm = pair(&a, &ja, spec).unwrap().proj(1, 1).scale(c(0.0, 0.5));
        let gamma2 = omega.scale(c(0.0, -1.0)).add(&b.proj(1, 1)).add(&b.proj(0, 2)).add(&jterm);
        prop_assert!(l.gamma.sub(&gamma2).max_abs() < 1e-12);
        let t2 = chern_correspondence(&l, spec).unwrap();
        prop_assert!(t2.omega.sub(&omega).max_abs() < 1e-12);
        prop_assert!(t2.b.sub(&b).max_abs() < 1e-12);
        prop_assert!(t2.a.sub(&a).max_abs() < 1e-12);
        let l2 = chern_inverse(&t2, spec).unwrap();
        prop_assert!(l2.gamma.sub(&l.gamma).max_abs() < 1e-12 && l2.beta.sub(&l.beta).max_abs() < 1e-12);
    }
}
