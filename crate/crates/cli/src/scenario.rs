use crate::fixtures;
use anyhow::{bail, Context, Result};
use salg::moduli::RingSpec;
use salg::{LieAlgebra, PairingSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    CourantAxioms,
    PicardGroup,
    ChernCorrespondence,
    BottChern,
    MomentMap,
    CalabiResidual,
    ConditionA,
    ConeMetric,
    FibreMetric,
    Conjecture,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::CourantAxioms,
        Suite::PicardGroup,
        Suite::ChernCorrespondence,
        Suite::BottChern,
        Suite::MomentMap,
        Suite::CalabiResidual,
        Suite::ConditionA,
        Suite::ConeMetric,
        Suite::FibreMetric,
        Suite::Conjecture,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Suite::CourantAxioms => "courant-axioms",
            Suite::PicardGroup => "picard-group",
            Suite::ChernCorrespondence => "chern-correspondence",
            Suite::BottChern => "bott-chern",
            Suite::MomentMap => "moment-map",
            Suite::CalabiResidual => "calabi-residual",
            Suite::ConditionA => "condition-a",
            Suite::ConeMetric => "cone-metric",
            Suite::FibreMetric => "fibre-metric",
            Suite::Conjecture => "conjecture",
        }
    }
}

/// Lie algebra of the structure group, by name or as explicit u(m) blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairingRef {
    Named(String),
    Blocks { blocks: Vec<usize>, weights: Vec<f64> },
}

impl Default for PairingRef {
    fn default() -> Self {
        PairingRef::Named("su2".into())
    }
}

impl PairingRef {
    pub fn algebra(&self) -> Result<LieAlgebra> {
        match self {
            PairingRef::Named(s) => match s.as_str() {
                "u1" => Ok(LieAlgebra::u1()),
                "su2" => Ok(LieAlgebra::su2()),
                other => bail!("unknown Lie algebra `{other}` (expected u1 or su2)"),
            },
            PairingRef::Blocks { blocks, weights } => {
                PairingSpec::new(blocks.clone(), weights.clone())?;
                let algs: Vec<LieAlgebra> = blocks.iter().zip(weights).map(|(m, w)| LieAlgebra::u(*m, *w)).collect();
                let mut it = algs.into_iter();
                let first = it.next().context("pairing needs at least one block")?;
                Ok(it.fold(first, |a, b| LieAlgebra::direct_sum(&a, &b)))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RingRef {
    Named(String),
    Inline(RingSpec),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixtures {
    /// Configuration checked by `calabi-residual`.
    #[serde(default)]
    pub configuration: Option<String>,
    /// Flat backgrounds for `condition-a` and `fibre-metric`.
    #[serde(default)]
    pub backgrounds: Vec<String>,
    /// Intersection rings for the cone-metric, fibre-metric and conjecture suites.
    #[serde(default)]
    pub rings: Vec<RingRef>,
    /// Amplitude of a closed-mode defect added to H; breaks dH + ⟨F∧F⟩ = 0.
    #[serde(default)]
    pub anomaly_defect: Option<f64>,
}

fn default_n() -> usize {
    2
}
fn default_cap() -> i32 {
    2
}
fn default_grid() -> usize {
    32
}
fn default_samples() -> usize {
    20
}
fn default_ell() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Complex dimension of the torus.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_cap")]
    pub mode_cap: i32,
    /// Grid points per active axis for grid-valued suites.
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default)]
    pub pairing: PairingRef,
    #[serde(default)]
    pub fixtures: Fixtures,
    pub checks: Vec<Suite>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Level used by torus backgrounds.
    #[serde(default = "default_ell")]
    pub ell: f64,
    /// Levels inside the Kähler window ]2 − 2/n, 2[.
    #[serde(default)]
    pub kahler_ells: Vec<f64>,
    /// Levels above 2, where −g is expected to be positive definite.
    #[serde(default)]
    pub negative_ells: Vec<f64>,
}

/// Open interval of levels where the cone metric is Kähler.
pub fn kahler_window(n: usize) -> (f64, f64) {
    (2.0 - 2.0 / n as f64, 2.0)
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).context("malformed scenario")?;
        s.validate()?;
        Ok(s)
    }

    /// A bundled scenario name or a path to a JSON file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(text) = fixtures::bundled_scenario(name_or_path) {
            return Self::from_json(text);
        }
        let p = Path::new(name_or_path);
        if !p.exists() {
            bail!("no bundled scenario or file named `{name_or_path}`");
        }
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            bail!("torus dimension n = {} is outside 1..=3", self.n);
        }
        if self.mode_cap < 0 {
            bail!("mode cap must be non-negative");
        }
        if self.grid_n < 4 || self.grid_n % 2 != 0 {
            bail!("grid N must be even and at least 4");
        }
        self.pairing.algebra()?;
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                bail!("tolerance `{k}` must be positive, got {v}");
            }
        }
        let (lo, hi) = kahler_window(self.n);
        for &l in &self.kahler_ells {
            if !(l > lo && l < hi) {
                bail!("level {l} is outside the Kähler window ]{lo:.6}, {hi}[");
            }
        }
        for &l in &self.negative_ells {
            if !(l > 2.0) {
                bail!("negative-definite level {l} must exceed 2");
            }
        }
        if (self.ell - 2.0).abs() < 1e-12 {
            bail!("level ℓ = 2 is excluded");
        }
        if let Some(c) = &self.fixtures.configuration {
            if !fixtures::CONFIGURATIONS.contains(&c.as_str()) {
                bail!("fixture missing: configuration `{c}`");
            }
        }
        for b in &self.fixtures.backgrounds {
            if !fixtures::BACKGROUNDS.contains(&b.as_str()) {
                bail!("fixture missing: background `{b}`");
            }
        }
        for r in &self.fixtures.rings {
            fixtures::ring(r)?;
        }
        let needs = |s: Suite| self.checks.contains(&s);
        if needs(Suite::CalabiResidual) && self.fixtures.configuration.is_none() {
            bail!("calabi-residual needs fixtures.configuration");
        }
        if needs(Suite::ConditionA) && self.fixtures.backgrounds.is_empty() {
            bail!("condition-a needs fixtures.backgrounds");
        }
        if (needs(Suite::ConeMetric) || needs(Suite::Conjecture)) && self.fixtures.rings.is_empty() {
            bail!("cone-metric and conjecture need fixtures.rings");
        }
        if needs(Suite::CourantAxioms) && self.n < 2 {
            bail!("courant-axioms needs n ≥ 2");
        }
        Ok(())
    }

    /// Tolerance override `suite.key` or `suite`, else `default`.
    pub fn tol(&self, suite: Suite, key: &str, default: f64) -> f64 {
        let full = format!("{}.{key}", suite.id());
        self.tolerances.get(&full).or_else(|| self.tolerances.get(suite.id())).copied().unwrap_or(default)
    }
}
