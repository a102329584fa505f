//! Scenario configuration files.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use nonlocal_relax::{DistanceIntegrand, Norm, ScalarGrid, TargetSet};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "K")]
    pub k: TargetSpec,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub q: QSpec,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

fn default_p() -> f64 {
    2.0
}

fn default_omega() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Points { points: Vec<[f64; 2]> },
    NormSphere { norm: String, radius: f64 },
    Cartesian {
        #[serde(rename = "A")]
        a: Vec<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum QSpec {
    Number(f64),
    Name(String),
}

impl Default for QSpec {
    fn default() -> Self {
        QSpec::Number(1.0)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

pub struct Loaded {
    pub integrand: DistanceIntegrand,
    pub grid: ScalarGrid,
    pub omega: f64,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        // The error text carries the line and column.
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Loaded> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text)
            .with_context(|| format!("malformed scenario {}", path.display()))?
            .build()
    }

    pub fn build(&self) -> Result<Loaded> {
        let norm = match &self.q {
            QSpec::Number(q) => Norm::from_q(*q).context("field \"q\"")?,
            QSpec::Name(s) if s == "inf" => Norm::LInf,
            QSpec::Name(s) => bail!("field \"q\": expected 1, 2, a number >= 1 or \"inf\", got {s:?}"),
        };
        let target = match &self.k {
            TargetSpec::Points { points } => {
                if points.is_empty() {
                    bail!("field \"K.points\": at least one point is required");
                }
                TargetSet::Points(points.iter().map(|p| (p[0], p[1])).collect())
            }
            TargetSpec::NormSphere { norm, radius } => {
                if norm != "l1" {
                    bail!("field \"K.norm\": only \"l1\" spheres are supported, got {norm:?}");
                }
                TargetSet::L1Sphere { radius: *radius }
            }
            TargetSpec::Cartesian { a } => {
                if a.is_empty() {
                    bail!("field \"K.A\": at least one value is required");
                }
                TargetSet::Cartesian(a.clone())
            }
        };
        let integrand = DistanceIntegrand::new(target, self.p, norm).context("fields \"K\"/\"p\"")?;
        let grid = match &self.grid {
            Some(g) => ScalarGrid::new(g.lo, g.hi, g.n).context("field \"grid\"")?,
            None => ScalarGrid::default(),
        };
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            bail!("field \"omega\": |Omega| must be positive, got {}", self.omega);
        }
        Ok(Loaded {
            integrand,
            grid,
            omega: self.omega,
        })
    }
}
