//! Inputs shared by the benchmarks.

use salg::courant::{CourantData, CourantSection};
use salg::forms::*;
use salg::gauge::{chern_simons, LieAlgebra};
use salg::moduli::FlatBackground;
use salg::sample::Sampler;
use salg::Configuration;

/// A random 𝔰𝔲(2)-valued 1-form on T^n_ℂ.
pub fn connection(n: usize, kmax: i32, seed: u64) -> TrigForm {
    Sampler::new(seed).kmax(kmax).terms(2).lie(&LieAlgebra::su2(), Frame::new(n), 1, false)
}

/// Flat 𝔰𝔲(2) background with ω₀ on T²_ℂ.
pub fn flat_background(ell: f64) -> FlatBackground {
    let f = Frame::new(2);
    let alg = LieAlgebra::su2();
    let w = Configuration::kahler(omega0(f), TrigForm::trig_zero(f, 2), alg.pairing.clone(), ell, Volume::Standard).expect("ω₀ is positive");
    FlatBackground::new(w, alg).expect("flat background")
}

/// E₀ data on T²_ℂ with dH + ⟨F∧F⟩ = 0, three sections and one function.
pub fn courant_sample(alg: &LieAlgebra) -> (CourantData, Vec<CourantSection>, Vec<TrigForm>) {
    let f = Frame::new(2);
    let mut s = Sampler::new(5).kmax(1).terms(2);
    let theta = s.lie(alg, f, 1, false);
    let h = chern_simons(&theta, &alg.pairing).expect("matching pairing").neg().add(&s.scalar(f, 2).d());
    let data = CourantData::new(h, theta, alg.pairing.clone()).expect("valid data");
    let secs = (0..3)
        .map(|_| CourantSection { v: (0..f.dim()).map(|_| s.scalar(f, 0)).collect(), r: s.lie(alg, f, 0, false), xi: s.scalar(f, 1) })
        .collect();
    (data, secs, vec![s.scalar(f, 0)])
}
