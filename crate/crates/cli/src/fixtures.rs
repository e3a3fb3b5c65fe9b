use crate::scenario::RingRef;
use anyhow::{bail, Result};
use salg::dilaton::flat_hs_fixture;
use salg::forms::*;
use salg::moduli::{FlatBackground, IntersectionRing, RingSpec};
use salg::sample::hermitian_to_form;
use salg::{Configuration, LieAlgebra};
use nalgebra::DMatrix;

pub const SCENARIOS: [(&str, &str); 3] = [
    ("flat-hs-torus", include_str!("../scenarios/flat-hs-torus.json")),
    ("quintic-cone", include_str!("../scenarios/quintic-cone.json")),
    ("broken-anomaly", include_str!("../scenarios/broken-anomaly.json")),
];

pub const CONFIGURATIONS: [&str; 1] = ["flat-hs"];
pub const BACKGROUNDS: [&str; 5] = ["u1-flat", "su2-flat", "su2-generic", "su2-twisted", "u1-generic"];
pub const RINGS: [&str; 3] = ["quintic", "p1p2", "ring3"];

pub fn bundled_scenario(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn configuration(name: &str) -> Result<Configuration> {
    match name {
        "flat-hs" => Ok(flat_hs_fixture(LieAlgebra::su2().pairing)?),
        other => bail!("fixture missing: configuration `{other}`"),
    }
}

/// Hermitian matrix with determinant 1, so the standard volume gives f ≡ 0.
pub fn generic_metric() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[cr(2.0), c(0.3, 0.2), c(0.3, -0.2), cr(0.565)])
}

/// Flat backgrounds on T²_ℂ at level `ell`.
pub fn background(name: &str, ell: f64) -> Result<FlatBackground> {
    let f = Frame::new(2);
    let (alg, omega, c0) = match name {
        "u1-flat" => (LieAlgebra::u1(), omega0(f), 0.0),
        "u1-generic" => (LieAlgebra::u1(), hermitian_to_form(f, &generic_metric()), 0.0),
        "su2-flat" => (LieAlgebra::su2(), omega0(f), 0.0),
        "su2-generic" => (LieAlgebra::su2(), hermitian_to_form(f, &generic_metric()), 0.0),
        "su2-twisted" => (LieAlgebra::su2(), hermitian_to_form(f, &generic_metric()), 0.7),
        other => bail!("fixture missing: background `{other}`"),
    };
    let m = alg.pairing.size();
    let theta = if c0 == 0.0 {
        TrigForm::trig_zero(f, m)
    } else {
        TrigForm::from_real_terms(f, m, &[(0b0001, mode_from(&[]), alg.basis[2].clone() * cr(c0))])
    };
    let w = Configuration::kahler(omega, theta, alg.pairing.clone(), ell, Volume::Standard)?;
    Ok(FlatBackground::new(w, alg)?)
}

/// Whether the background connection is trivial (θ = 0).
pub fn is_trivial(name: &str) -> bool {
    name != "su2-twisted"
}

pub fn ring(r: &RingRef) -> Result<IntersectionRing> {
    match r {
        RingRef::Inline(spec) => Ok(IntersectionRing::new(spec)?),
        RingRef::Named(name) => match name.as_str() {
            "quintic" => Ok(IntersectionRing::one_parameter(5.0, 1.0)?),
            "p1p2" => Ok(IntersectionRing::new(&RingSpec { h11: 2, kappa: vec![(0, 1, 1, 1.0)], vol_mu: 1.0 })?),
            "ring3" => Ok(IntersectionRing::new(&RingSpec {
                h11: 3,
                kappa: vec![(0, 0, 0, 2.0), (0, 0, 1, 1.0), (0, 1, 2, 1.5), (1, 1, 2, 0.5), (2, 2, 2, 1.0), (1, 1, 1, 0.7)],
                vol_mu: 1.7,
            })?),
            other => bail!("fixture missing: ring `{other}`"),
        },
    }
}

pub fn ring_label(r: &RingRef) -> String {
    match r {
        RingRef::Named(n) => n.clone(),
        RingRef::Inline(s) => format!("inline(h11={})", s.h11),
    }
}

/// Lines for `fixtures list`.
pub fn listing() -> Vec<String> {
    let mut out = Vec::new();
    for (n, _) in SCENARIOS {
        out.push(format!("scenario      {n}"));
    }
    for n in CONFIGURATIONS {
        out.push(format!("configuration {n}"));
    }
    for n in BACKGROUNDS {
        out.push(format!("background    {n}"));
    }
    for n in RINGS {
        out.push(format!("ring          {n}"));
    }
    out
}
