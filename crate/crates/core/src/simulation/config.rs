use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dgp {
    /// S*_δ = S*_x with τ_X ≠ 0, so S*_m = S*_x.
    #[serde(rename = "DGP1")]
    Dgp1,
    /// τ_X = 0, S*_x and S*_δ disjoint.
    #[serde(rename = "DGP2i")]
    Dgp2i,
    /// τ_X = 0, half of S*_x also in S*_δ.
    #[serde(rename = "DGP2ii")]
    Dgp2ii,
    /// τ_X ≠ 0 with S*_δ disjoint from S*_x, so S*_m ⊋ S*_x.
    #[serde(rename = "DGP3i")]
    Dgp3i,
    #[serde(rename = "DGP3ii")]
    Dgp3ii,
    /// Disjoint x-only, shared and m-only blocks for the oracle comparison.
    #[serde(rename = "ORACLE_SPLIT")]
    OracleSplit,
}

impl Dgp {
    pub const NAMES: [&'static str; 6] = ["DGP1", "DGP2i", "DGP2ii", "DGP3i", "DGP3ii", "ORACLE_SPLIT"];

    pub fn name(self) -> &'static str {
        match self {
            Dgp::Dgp1 => "DGP1",
            Dgp::Dgp2i => "DGP2i",
            Dgp::Dgp2ii => "DGP2ii",
            Dgp::Dgp3i => "DGP3i",
            Dgp::Dgp3ii => "DGP3ii",
            Dgp::OracleSplit => "ORACLE_SPLIT",
        }
    }

    pub fn parse(s: &str) -> Result<Dgp> {
        let all = [Dgp::Dgp1, Dgp::Dgp2i, Dgp::Dgp2ii, Dgp::Dgp3i, Dgp::Dgp3ii, Dgp::OracleSplit];
        all.into_iter().find(|d| d.name() == s.trim()).ok_or_else(|| {
            Error::Config(format!("dgp: unknown variant '{s}'; valid variants are {}", Dgp::NAMES.join(", ")))
        })
    }
}

fn d_p() -> usize {
    100_000
}
fn d_pi() -> f64 {
    0.01
}
fn d_eps_x() -> f64 {
    1e-4
}
fn d_eps_delta() -> f64 {
    5e-5
}
fn d_theta() -> f64 {
    0.2
}
fn d_tau_x() -> f64 {
    0.6
}
fn d_tau_y() -> f64 {
    0.2
}
fn d_sigma_sq() -> f64 {
    1e-5
}
fn d_lambda_magic() -> f64 {
    crate::selection::DEFAULT_LAMBDA
}
fn d_lambda_hard() -> f64 {
    crate::selection::DEFAULT_HARD_LAMBDA
}
fn d_eta() -> f64 {
    crate::selection::DEFAULT_ETA
}
fn d_reps() -> usize {
    1000
}
fn d_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dgp: Dgp,
    #[serde(default = "d_p")]
    pub p: usize,
    #[serde(default = "d_pi")]
    pub pi_x: f64,
    #[serde(default = "d_pi")]
    pub pi_delta: f64,
    #[serde(default = "d_eps_x")]
    pub eps_x_sq: f64,
    #[serde(default = "d_eps_delta")]
    pub eps_delta_sq: f64,
    #[serde(default = "d_theta")]
    pub theta: f64,
    #[serde(default = "d_tau_x")]
    pub tau_x: f64,
    #[serde(default = "d_tau_y")]
    pub tau_y: f64,
    /// Common σ² of all three GWAS.
    #[serde(default = "d_sigma_sq")]
    pub sigma_sq: f64,
    #[serde(default = "d_lambda_magic")]
    pub lambda_magic: f64,
    #[serde(default = "d_lambda_hard")]
    pub lambda_hard: f64,
    #[serde(default = "d_eta")]
    pub eta: f64,
    #[serde(default = "d_reps")]
    pub reps: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// ORACLE_SPLIT block proportions.
    #[serde(default)]
    pub pi_x_only: Option<f64>,
    #[serde(default)]
    pub pi_m_only: Option<f64>,
    #[serde(default)]
    pub pi_both: Option<f64>,
    /// Optional τ_Y sweep; each value is run as its own design.
    #[serde(default)]
    pub tau_y_grid: Option<Vec<f64>>,
}

impl SimConfig {
    /// Main-simulation defaults for a design.
    pub fn new(dgp: Dgp) -> Self {
        SimConfig {
            dgp,
            p: d_p(),
            pi_x: d_pi(),
            pi_delta: d_pi(),
            eps_x_sq: d_eps_x(),
            eps_delta_sq: d_eps_delta(),
            theta: d_theta(),
            tau_x: if matches!(dgp, Dgp::Dgp2i | Dgp::Dgp2ii) { 0.0 } else { d_tau_x() },
            tau_y: d_tau_y(),
            sigma_sq: d_sigma_sq(),
            lambda_magic: d_lambda_magic(),
            lambda_hard: d_lambda_hard(),
            eta: d_eta(),
            reps: d_reps(),
            seed: d_seed(),
            pi_x_only: None,
            pi_m_only: None,
            pi_both: None,
            tau_y_grid: None,
        }
    }

    /// Oracle-split design with equal x-only and shared blocks and an m-only
    /// block of size |x-only| / ratio.
    pub fn oracle_split(pi: f64, eps_x_sq: f64, eps_delta_sq: f64, ratio: f64) -> Self {
        SimConfig {
            eps_x_sq,
            eps_delta_sq,
            pi_x_only: Some(pi),
            pi_both: Some(pi),
            pi_m_only: Some(pi / ratio),
            ..SimConfig::new(Dgp::OracleSplit)
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        // DGP2 designs fix τ_X = 0, so an omitted tau_x takes the design's default
        if !table.contains_key("tau_x") {
            if let Some(name) = table.get("dgp").and_then(|v| v.as_str()) {
                if let Ok(dgp) = Dgp::parse(name) {
                    table.insert("tau_x".into(), toml::Value::Float(SimConfig::new(dgp).tau_x));
                }
            }
        }
        let cfg: SimConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimConfig::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Block sizes rounded from the proportions.
    pub fn count(&self, pi: f64) -> usize {
        (self.p as f64 * pi).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        if self.p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        positive("eps_x_sq", self.eps_x_sq)?;
        positive("eps_delta_sq", self.eps_delta_sq)?;
        positive("sigma_sq", self.sigma_sq)?;
        positive("lambda_magic", self.lambda_magic)?;
        positive("lambda_hard", self.lambda_hard)?;
        positive("eta", self.eta)?;
        for (name, v) in [("theta", self.theta), ("tau_x", self.tau_x), ("tau_y", self.tau_y)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if let Some(grid) = &self.tau_y_grid {
            if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("tau_y_grid must be a nonempty list of finite values".into()));
            }
        }

        match self.dgp {
            Dgp::OracleSplit => {
                let fields = [("pi_x_only", self.pi_x_only), ("pi_m_only", self.pi_m_only), ("pi_both", self.pi_both)];
                let mut total = 0;
                for (name, v) in fields {
                    let v = v.ok_or_else(|| Error::Config(format!("{name} is required for ORACLE_SPLIT")))?;
                    unit(name, v)?;
                    total += self.count(v);
                }
                if total > self.p {
                    return Err(Error::Config(format!("oracle blocks need {total} SNPs but p = {}", self.p)));
                }
                if self.tau_x == 0.0 {
                    return Err(Error::Config("tau_x must be nonzero for ORACLE_SPLIT (x-only SNPs cancel through tau_x)".into()));
                }
            }
            dgp => {
                unit("pi_x", self.pi_x)?;
                unit("pi_delta", self.pi_delta)?;
                let (kx, kd) = (self.count(self.pi_x), self.count(self.pi_delta));
                let overlap = match dgp {
                    Dgp::Dgp1 => kx,
                    Dgp::Dgp2ii | Dgp::Dgp3ii => kx / 2,
                    _ => 0,
                };
                if dgp == Dgp::Dgp1 && kd != kx {
                    return Err(Error::Config(format!(
                        "DGP1 sets S_delta = S_x, so pi_delta must equal pi_x (got {} and {})",
                        self.pi_delta, self.pi_x
                    )));
                }
                if overlap > kd {
                    return Err(Error::Config(format!(
                        "{}: overlap of {overlap} SNPs exceeds |S_delta| = {kd}",
                        dgp.name()
                    )));
                }
                if kx + kd - overlap > self.p {
                    return Err(Error::Config(format!("{}: sets need {} SNPs but p = {}", dgp.name(), kx + kd - overlap, self.p)));
                }
                match dgp {
                    Dgp::Dgp2i | Dgp::Dgp2ii if self.tau_x != 0.0 => {
                        return Err(Error::Config(format!("{} requires tau_x = 0, got {}", dgp.name(), self.tau_x)));
                    }
                    Dgp::Dgp1 | Dgp::Dgp3i | Dgp::Dgp3ii if self.tau_x == 0.0 => {
                        return Err(Error::Config(format!("{} requires tau_x != 0", dgp.name())));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// One configuration per τ_Y value when a grid is given, else itself.
    pub fn expand(&self) -> Vec<SimConfig> {
        match &self.tau_y_grid {
            None => vec![self.clone()],
            Some(grid) => grid
                .iter()
                .map(|&tau_y| SimConfig {
                    tau_y,
                    tau_y_grid: None,
                    ..self.clone()
                })
                .collect(),
        }
    }
}
