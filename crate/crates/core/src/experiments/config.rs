use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{PenaltySpec, StarStart};
use crate::error::{Error, Result};
use crate::graph_core::DegreePmf;
use crate::renorm::Dependence;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    PhaseSweep,
    ExtinctionScaling,
    StarSurvival,
    CoreSurvival,
    AttackDistribution,
    OracleSuite,
    OpPercolation,
}

impl Scenario {
    /// Grid keys that must be present, then keys that may be.
    pub fn grid_keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Scenario::PhaseSweep | Scenario::ExtinctionScaling => (&["n", "mu", "lambda"], &["tau"]),
            Scenario::CoreSurvival => (&["n", "mu", "lambda"], &["tau", "k"]),
            Scenario::StarSurvival => (&["K", "mu", "lambda"], &[]),
            Scenario::AttackDistribution => (&["n", "M"], &["tau"]),
            Scenario::OpPercolation => (&["delta", "depth"], &[]),
            Scenario::OracleSuite => (&[], &[]),
        }
    }

    fn needs_pmf(self) -> bool {
        matches!(
            self,
            Scenario::PhaseSweep | Scenario::ExtinctionScaling | Scenario::CoreSurvival | Scenario::AttackDistribution
        )
    }
}

/// Degree law of a configuration model. `z_max` defaults to the graph size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PmfSpec {
    PowerLaw {
        tau: f64,
        #[serde(default = "one")]
        z_min: usize,
        z_max: Option<usize>,
    },
    Binomial {
        n: usize,
        p: f64,
    },
    Point {
        value: usize,
    },
    Uniform {
        values: Vec<usize>,
    },
    StretchedHeavier {
        zeta: f64,
        g_scale: f64,
        #[serde(default = "one")]
        z_min: usize,
        z_max: usize,
    },
}

fn one() -> usize {
    1
}

impl PmfSpec {
    /// Builds the pmf for graph size `n`; a `tau` grid value overrides the power-law exponent.
    pub fn build(&self, n: usize, tau: Option<f64>) -> Result<DegreePmf> {
        match self {
            PmfSpec::PowerLaw { tau: t, z_min, z_max } => {
                DegreePmf::power_law(tau.unwrap_or(*t), *z_min, z_max.unwrap_or(n.max(*z_min)))
            }
            PmfSpec::Binomial { n, p } => DegreePmf::binomial(*n, *p),
            PmfSpec::Point { value } => Ok(DegreePmf::point(*value)),
            PmfSpec::Uniform { values } => DegreePmf::uniform(values),
            PmfSpec::StretchedHeavier { zeta, g_scale, z_min, z_max } => {
                DegreePmf::stretched_heavier(*zeta, *g_scale, (*z_min..=*z_max).collect())
            }
        }
    }

    /// Parses the compact form `family:key=value,key=value`, e.g. `power_law:tau=2.5`.
    /// List values use `;` as separator: `uniform:values=1;3`.
    pub fn parse(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut fields = vec![format!("family = \"{}\"", family.trim())];
        for kv in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("expected key=value in `{kv}`")))?;
            let v = v.trim();
            let v = if v.contains(';') { format!("[{}]", v.replace(';', ",")) } else { v.to_string() };
            fields.push(format!("{} = {}", k.trim(), v));
        }
        let doc = fields.join("\n");
        toml::from_str(&doc).map_err(|e| Error::Config(format!("pmf `{s}`: {}", e.message())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    Product,
    Max,
}

impl PenaltyKind {
    pub fn spec(self, mu: f64, lambda: f64) -> Result<PenaltySpec> {
        use crate::dynamics::Penalty;
        let p = match self {
            PenaltyKind::Product => Penalty::Product { mu },
            PenaltyKind::Max => Penalty::Max { mu },
        };
        PenaltySpec::new(p, lambda)
    }

    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::Product => "product",
            PenaltyKind::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub pmf: Option<PmfSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySection {
    pub kind: OneOrMany<PenaltyKind>,
}

impl Default for PenaltySection {
    fn default() -> Self {
        Self { kind: OneOrMany::One(PenaltyKind::Product) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarStartKind {
    #[default]
    Center,
    Conditioned,
}

impl StarStartKind {
    pub fn start(self) -> StarStart {
        match self {
            StarStartKind::Center => StarStart::Center,
            StarStartKind::Conditioned => StarStart::Conditioned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpMode {
    Independent,
    #[default]
    SharedSource,
}

impl OpMode {
    pub fn dependence(self) -> Dependence {
        match self {
            OpMode::Independent => Dependence::Independent,
            OpMode::SharedSource => Dependence::SharedSource,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Options {
    #[serde(default)]
    pub star_start: StarStartKind,
    #[serde(default)]
    pub op_mode: OpMode,
}

/// A parsed and validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub scenario: Scenario,
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Time cap for dynamics; defaults to `10³·ln n` for graph scenarios.
    pub horizon: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub graph: Option<GraphSection>,
    #[serde(default)]
    pub penalty: PenaltySection,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub options: Options,
}

fn default_reps() -> usize {
    10
}

const TOP_KEYS: &[&str] =
    &["schema", "scenario", "seed", "reps", "horizon", "out", "graph", "penalty", "grid", "options"];
const SECTION_KEYS: &[(&str, &[&str])] =
    &[("graph", &["pmf"]), ("penalty", &["kind"]), ("options", &["star_start", "op_mode"])];

fn unknown_keys(doc: &toml::Table, scenario: Option<Scenario>) -> Vec<String> {
    let mut bad = Vec::new();
    for (k, v) in doc {
        if !TOP_KEYS.contains(&k.as_str()) {
            bad.push(k.clone());
            continue;
        }
        if let Some((_, allowed)) = SECTION_KEYS.iter().find(|(s, _)| s == k) {
            if let Some(t) = v.as_table() {
                bad.extend(t.keys().filter(|kk| !allowed.contains(&kk.as_str())).map(|kk| format!("{k}.{kk}")));
            }
        }
        if k == "grid" {
            if let (Some(t), Some(sc)) = (v.as_table(), scenario) {
                let (req, opt) = sc.grid_keys();
                bad.extend(
                    t.keys()
                        .filter(|kk| !req.contains(&kk.as_str()) && !opt.contains(&kk.as_str()))
                        .map(|kk| format!("grid.{kk}")),
                );
            }
        }
    }
    bad
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let scenario = doc
            .get("scenario")
            .and_then(|v| v.as_str())
            .and_then(|s| toml::Value::String(s.into()).try_into::<Scenario>().ok());
        let bad = unknown_keys(&doc, scenario);
        if !bad.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", bad.join(", "))));
        }
        let cfg: ExperimentConfig =
            doc.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.schema != SCHEMA {
            problems.push(format!("schema must be {SCHEMA}, got {}", self.schema));
        }
        if self.reps == 0 {
            problems.push("reps must be positive".into());
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0) {
                problems.push("horizon must be positive".into());
            }
        }
        let (req, _) = self.scenario.grid_keys();
        for k in req {
            match self.grid.get(*k) {
                None => problems.push(format!("grid.{k} is required")),
                Some(v) if v.is_empty() => problems.push(format!("grid.{k} is empty")),
                _ => {}
            }
        }
        for (k, vals) in &self.grid {
            let integral = matches!(k.as_str(), "n" | "K" | "M" | "depth" | "k");
            if integral && vals.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                problems.push(format!("grid.{k} must hold positive integers"));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                problems.push(format!("grid.{k} has a non-finite value"));
            }
        }
        if self.scenario.needs_pmf() && self.graph.as_ref().and_then(|g| g.pmf.as_ref()).is_none() {
            problems.push("graph.pmf is required for this scenario".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn pmf(&self) -> Option<&PmfSpec> {
        self.graph.as_ref().and_then(|g| g.pmf.as_ref())
    }

    /// Cartesian product of the grid in key order; the last key varies fastest.
    pub fn grid_points(&self) -> Vec<BTreeMap<String, f64>> {
        let mut points = vec![BTreeMap::new()];
        for (k, vals) in &self.grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(k.clone(), *v);
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn horizon_for(&self, n: usize) -> f64 {
        self.horizon.unwrap_or_else(|| 1e3 * (n.max(2) as f64).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXT: &str = r#"
schema = 1
scenario = "extinction_scaling"
seed = 7
reps = 5

[graph]
pmf = { family = "power_law", tau = 2.5 }

[penalty]
kind = "max"

[grid]
n = [200, 400]
mu = [1.0]
lambda = [0.5, 0.8]
"#;

    #[test]
    fn parses_and_expands() {
        let c = ExperimentConfig::from_toml(EXT).unwrap();
        assert_eq!(c.scenario, Scenario::ExtinctionScaling);
        assert_eq!(c.penalty.kind.to_vec(), vec![PenaltyKind::Max]);
        let pts = c.grid_points();
        assert_eq!(pts.len(), 4);
        // keys in order lambda, mu, n; n varies fastest
        assert_eq!(pts[1]["n"], 400.0);
        assert_eq!(pts[2]["lambda"], 0.8);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn lists_every_unknown_key() {
        let text =
            EXT.replace("reps = 5", "reps = 5\nrepz = 3").replace("lambda = [0.5, 0.8]", "lambda = [0.5]\nK = [3]");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("repz") && err.contains("grid.K"), "{err}");
    }

    #[test]
    fn missing_pieces_are_reported() {
        let text = EXT.replace("schema = 1", "schema = 2").replace("n = [200, 400]\n", "");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("schema") && err.contains("grid.n"), "{err}");
    }

    #[test]
    fn compact_pmf_syntax() {
        assert_eq!(
            PmfSpec::parse("power_law:tau=2.5,z_min=2").unwrap(),
            PmfSpec::PowerLaw { tau: 2.5, z_min: 2, z_max: None }
        );
        assert_eq!(PmfSpec::parse("uniform:values=1;3").unwrap(), PmfSpec::Uniform { values: vec![1, 3] });
        assert!(PmfSpec::parse("power_law:tua=2.5").is_err());
    }
}
