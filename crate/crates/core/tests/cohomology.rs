use proptest::prelude::*;
use salg::cohomology::*;
use salg::forms::*;
use salg::sample::Sampler;

/// Random real dd^c-closed (1,1)-form: constant part plus ∂φ + ∂̄ψ, made real.
fn aeppli_closed(s: &mut Sampler, f: Frame) -> (TrigForm, TrigForm) {
    let constant = s.constant_hermitian(f, false);
    let phi = s.scalar_pq(f, 0, 1);
    let exact = phi.del().add(&phi.del().conj());
    (constant.add(&exact), constant)
}

#[test]
fn constant_11_forms_are_their_own_aeppli_representatives() {
    let f = Frame::new(3);
    let mut s = Sampler::new(1);
    let om = s.constant_hermitian(f, true);
    let cl = reduce_class(&om, Flavor::Aeppli).unwrap();
    assert!(cl.rep.sub(&om).max_abs() < 1e-15);
    assert!(cl.real);
    assert_eq!(cl.bidegree, Some((1, 1)));
}

#[test]
fn constant_mode_dimensions() {
    // frozen goldens from the constant-form linear algebra
    let cases = [
        (1, Flavor::Aeppli, 1, 1, 1),
        (2, Flavor::Aeppli, 1, 1, 4),
        (3, Flavor::Aeppli, 1, 1, 9),
        (3, Flavor::BottChern, 2, 2, 9),
        (2, Flavor::Dolbeault, 0, 1, 2),
        (2, Flavor::DeRham, 1, 1, 6),
        (3, Flavor::DeRham, 2, 1, 20),
    ];
    for (n, fl, p, q, dim) in cases {
        assert_eq!(class_dimension_at_mode(Frame::new(n), fl, p, q, &[]), dim, "n={n} {fl:?} ({p},{q})");
    }
}

#[test]
fn nonconstant_modes_carry_no_cohomology() {
    for fl in [Flavor::Aeppli, Flavor::BottChern, Flavor::Dolbeault, Flavor::DeRham] {
        let dims = class_dimensions(Frame::new(2), fl, 1, 1, 1);
        for (k, d) in dims {
            if k.iter().any(|x| *x != 0) {
                assert_eq!(d, 0, "{fl:?} at {k:?}");
            }
        }
    }
}

#[test]
fn exact_forms_reduce_to_zero() {
    let f = Frame::new(3);
    let mut s = Sampler::new(2).kmax(2).terms(5);
    let phi = s.scalar_pq(f, 0, 1);
    let psi = s.scalar_pq(f, 1, 0);
    let a = phi.del().add(&psi.delbar());
    assert!(reduce_class(&a, Flavor::Aeppli).unwrap().is_zero(1e-12));
    let b = s.scalar(f, 1).d();
    assert!(reduce_class(&b, Flavor::DeRham).unwrap().is_zero(1e-12));
    let g = s.scalar_pq(f, 0, 0).delbar().del();
    assert!(reduce_class(&g, Flavor::BottChern).unwrap().is_zero(1e-12));
}

#[test]
fn non_closed_input_is_rejected() {
    let f = Frame::new(2);
    let a = TrigForm::scalar_mode(f, (1 << 0) | (1 << 2), &[0, 1, 0, 1], cr(1.0));
    assert!(matches!(reduce_class(&a, Flavor::Aeppli), Err(salg::Error::NotClosed(_))));
}

#[test]
fn duality_pairing_of_standard_classes() {
    for n in 1..=3 {
        let f = Frame::new(n);
        let om = omega0(f);
        let a = reduce_class(&om, Flavor::Aeppli).unwrap();
        let b = reduce_class(&om.power_over_factorial(n - 1).unwrap(), Flavor::BottChern).unwrap();
        let direct = om.w(&om.power_over_factorial(n - 1).unwrap()).unwrap().integrate().unwrap();
        let v = duality_pairing(&a, &b).unwrap();
        assert!((v - direct).norm() < 1e-14);
        assert!((v - cr(n as f64)).norm() < 1e-14);
    }
}

#[test]
fn duality_pairing_rejects_wrong_bidegrees() {
    let f = Frame::new(3);
    let om = omega0(f);
    let a = reduce_class(&om, Flavor::Aeppli).unwrap();
    let b = reduce_class(&om, Flavor::BottChern).unwrap();
    assert!(duality_pairing(&a, &b).is_err());
}

#[test]
fn del_connecting_examples() {
    let f = Frame::new(3);
    let om = omega0(f);
    assert!(del_connecting(&reduce_class(&om, Flavor::Aeppli).unwrap()).unwrap().is_zero(1e-15));
    // Re(e^{i<k,x>}) dz¹∧dz̄¹ with k in the z¹-plane is dd^c-closed
    let b = (1 << 0) | (1 << 3);
    let alpha = TrigForm::scalar_mode(f, b, &[1, 0, 0, 2, 0, 0], c(0.0, 0.5));
    let alpha = alpha.add(&alpha.conj());
    let cl = reduce_class(&alpha, Flavor::Aeppli).unwrap();
    let conn = del_connecting(&cl).unwrap();
    // oracle: the mode-wise solve for dB = ∂α with B ∈ Ω^{2,0}
    let fit = solve_modulo_image(&alpha.del(), &f.blades_pq(2, 0), |x| x.d()).unwrap();
    assert!(fit.residual.max_abs() < 1e-13);
    assert!(conn.is_zero(1e-13));
    // Aeppli-exact input
    let mut s = Sampler::new(5).kmax(1);
    let phi = s.scalar_pq(f, 0, 1);
    let ex = reduce_class(&phi.del(), Flavor::Aeppli).unwrap();
    assert!(del_connecting(&ex).unwrap().is_zero(1e-12));
}

#[test]
fn h1_omega20_detects_constant_classes() {
    let f = Frame::new(3);
    let x = TrigForm::scalar_mode(f, (1 << 0) | (1 << 1) | (1 << 4), &[], cr(1.0));
    assert!(!reduce_class(&x, Flavor::H1Omega20).unwrap().is_zero(1e-3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reduction_is_idempotent_and_class_preserving(seed in any::<u64>()) {
        let f = Frame::new(3);
        let mut s = Sampler::new(seed).kmax(2).terms(4);
        let (a, constant) = aeppli_closed(&mut s, f);
        let cl = reduce_class(&a, Flavor::Aeppli).unwrap();
        // on the torus the class is carried by the constant part
        prop_assert!(cl.rep.sub(&constant).max_abs() < 1e-12);
        let again = reduce_class(&cl.rep, Flavor::Aeppli).unwrap();
        prop_assert!(again.rep.sub(&cl.rep).max_abs() < 1e-14);
        prop_assert!(cl.real);
    }

    #[test]
    fn pairing_is_representative_independent(seed in any::<u64>()) {
        let f = Frame::new(3);
        let mut s = Sampler::new(seed).kmax(2).terms(4);
        let (a, _) = aeppli_closed(&mut s, f);
        let bc = s.constant_hermitian(f, false).w(&omega0(f)).unwrap();
        let ex = s.scalar_pq(f, 1, 1).delbar().del();
        let b = bc.add(&ex);
        let ca = reduce_class(&a, Flavor::Aeppli).unwrap();
        let cb = reduce_class(&b, Flavor::BottChern).unwrap();
        let v = duality_pairing(&ca, &cb).unwrap();
        // both ways: canonical representatives and the shifted raw forms
        let raw = a.w(&b).unwrap().integrate().unwrap();
        prop_assert!((v - raw).norm() < 1e-12);
        let shift = s.scalar_pq(f, 0, 1).del().add(&s.scalar_pq(f, 1, 0).delbar());
        let shifted = reduce_class(&a.add(&shift), Flavor::Aeppli).unwrap();
        prop_assert!((duality_pairing(&shifted, &cb).unwrap() - v).norm() < 1e-12);
    }

    #[test]
    fn pairing_is_bilinear(seed in any::<u64>(), t in -2.0f64..2.0) {
        let f = Frame::new(2);
        let mut s = Sampler::new(seed);
        let a1 = reduce_class(&s.constant_hermitian(f, false), Flavor::Aeppli).unwrap();
        let a2 = reduce_class(&s.constant_hermitian(f, false), Flavor::Aeppli).unwrap();
        let b = reduce_class(&s.constant_hermitian(f, false), Flavor::BottChern).unwrap();
        let mix = reduce_class(&a1.rep.add(&a2.rep.scale_re(t)), Flavor::Aeppli).unwrap();
        let lhs = duality_pairing(&mix, &b).unwrap();
        let rhs = duality_pairing(&a1, &b).unwrap() + duality_pairing(&a2, &b).unwrap() * t;
        prop_assert!((lhs - rhs).norm() < 1e-13);
    }
}
