use crate::fixtures;
use crate::scenario::Scenario;
use crate::suites::sorted_eigenvalues;
use anyhow::{bail, Context, Result};
use salg::forms::{omega0, Frame, TrigForm, Volume};
use salg::moduli::{conjecture_margin, ComplexifiedClass, IntersectionRing};
use salg::Configuration;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    MEll,
    PotentialK,
    ConeEigenvalues,
    ConjectureMargin,
}

impl FromStr for Quantity {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M_ell" => Ok(Quantity::MEll),
            "potential_K" => Ok(Quantity::PotentialK),
            "cone_metric_eigenvalues" | "cone_metric" => Ok(Quantity::ConeEigenvalues),
            "conjecture_margin" => Ok(Quantity::ConjectureMargin),
            other => bail!("unknown quantity `{other}` (M_ell, potential_K, cone_metric_eigenvalues, conjecture_margin)"),
        }
    }
}

impl Quantity {
    fn column(self) -> &'static str {
        match self {
            Quantity::MEll => "M_ell",
            Quantity::PotentialK => "potential_K",
            Quantity::ConeEigenvalues => "eig",
            Quantity::ConjectureMargin => "conjecture_margin",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    /// Levels ℓ at a fixed cone point.
    Ell { values: Vec<f64>, point: Vec<f64> },
    /// Points t·base of a cone ray, with variation `direction`, at level `ell`.
    Ray { ts: Vec<f64>, base: Vec<f64>, direction: Vec<f64>, ell: f64 },
    /// ω = λω₀ on the torus of the scenario, at the scenario level.
    Scale { values: Vec<f64> },
}

impl Sweep {
    fn param(&self) -> &'static str {
        match self {
            Sweep::Ell { .. } => "ell",
            Sweep::Ray { .. } => "t",
            Sweep::Scale { .. } => "lambda",
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            Sweep::Ell { values, .. } | Sweep::Scale { values } => values,
            Sweep::Ray { ts, .. } => ts,
        }
    }
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

fn scenario_ring(sc: &Scenario) -> Result<IntersectionRing> {
    let r = sc.fixtures.rings.first().context("this sweep needs a ring fixture")?;
    fixtures::ring(r)
}

fn point_value(q: Quantity, ring: &IntersectionRing, a: &[f64], adot: &[f64], ell: f64) -> Result<Vec<f64>> {
    let ac = ComplexifiedClass::real(a.to_vec());
    Ok(match q {
        Quantity::MEll => vec![ring.m_ell(&ac, ell)?],
        Quantity::PotentialK => vec![ring.potential_k(&ac, ell)?],
        Quantity::ConeEigenvalues => sorted_eigenvalues(&ring.cone_metric_matrix(&ac, ell)?),
        Quantity::ConjectureMargin => {
            let (p, m1) = ring.pairings(&ac, &ComplexifiedClass::real(adot.to_vec()), 1.0)?;
            vec![conjecture_margin(p.re_a_b, p.re_a_re_b, m1)]
        }
    })
}

/// CSV text with a header row and one row per sweep value, in sweep order.
pub fn emit_plotdata(sc: &Scenario, q: Quantity, sweep: &Sweep) -> Result<String> {
    let mut rows: Vec<(f64, Vec<f64>)> = vec![];
    let mut width = match q {
        Quantity::ConeEigenvalues => None,
        _ => Some(1),
    };
    match sweep {
        Sweep::Scale { values } => {
            if q != Quantity::MEll {
                bail!("the λω₀ sweep supports only M_ell");
            }
            let f = Frame::new(sc.n);
            let spec = sc.pairing.algebra()?.pairing;
            for &lam in values {
                let w = Configuration::kahler(omega0(f).scale_re(lam), TrigForm::trig_zero(f, spec.size()), spec.clone(), sc.ell, Volume::Standard)?;
                rows.push((lam, vec![w.m_ell()?]));
            }
        }
        Sweep::Ell { values, point } => {
            let ring = scenario_ring(sc)?;
            let a = if point.is_empty() { vec![1.0; ring.h11] } else { point.clone() };
            for &ell in values {
                rows.push((ell, point_value(q, &ring, &a, &a, ell)?));
            }
            width = width.or(Some(2 * ring.h11));
        }
        Sweep::Ray { ts, base, direction, ell } => {
            let ring = scenario_ring(sc)?;
            let base = if base.is_empty() { vec![1.0; ring.h11] } else { base.clone() };
            let dir = if direction.is_empty() { base.clone() } else { direction.clone() };
            for &t in ts {
                let a: Vec<f64> = base.iter().map(|x| t * x).collect();
                rows.push((t, point_value(q, &ring, &a, &dir, *ell)?));
            }
            width = width.or(Some(2 * ring.h11));
        }
    }
    let width = width.unwrap_or(1);
    let mut w = csv::Writer::from_writer(vec![]);
    let mut header = vec![sweep.param().to_string()];
    if q == Quantity::ConeEigenvalues {
        header.extend((0..width).map(|i| format!("eig{i}")));
    } else {
        header.push(q.column().to_string());
    }
    w.write_record(&header)?;
    debug_assert_eq!(rows.len(), sweep.values().len());
    for (x, vals) in rows {
        let mut rec = vec![format!("{x}")];
        rec.extend(vals.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
