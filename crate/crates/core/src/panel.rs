use std::collections::HashSet;

use crate::error::{Error, Result};

/// Per-SNP association estimates and standard errors from the exposure,
/// mediator and outcome GWAS, aligned by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HarmonizedPanel {
    pub ids: Vec<String>,
    pub beta_x: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub beta_m: Vec<f64>,
    pub sigma_m: Vec<f64>,
    pub beta_y: Vec<f64>,
    pub sigma_y: Vec<f64>,
}

/// One SNP of a [`HarmonizedPanel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnpTriple {
    pub beta_x: f64,
    pub sigma_x: f64,
    pub beta_m: f64,
    pub sigma_m: f64,
    pub beta_y: f64,
    pub sigma_y: f64,
}

impl HarmonizedPanel {
    pub fn with_capacity(n: usize) -> Self {
        HarmonizedPanel {
            ids: Vec::with_capacity(n),
            beta_x: Vec::with_capacity(n),
            sigma_x: Vec::with_capacity(n),
            beta_m: Vec::with_capacity(n),
            sigma_m: Vec::with_capacity(n),
            beta_y: Vec::with_capacity(n),
            sigma_y: Vec::with_capacity(n),
        }
    }

    /// Builds a validated panel.
    pub fn from_rows<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, SnpTriple)>,
    {
        let mut panel = HarmonizedPanel::default();
        for (id, snp) in rows {
            panel.push(id, snp);
        }
        panel.validate()?;
        Ok(panel)
    }

    pub fn push(&mut self, id: String, snp: SnpTriple) {
        self.ids.push(id);
        self.beta_x.push(snp.beta_x);
        self.sigma_x.push(snp.sigma_x);
        self.beta_m.push(snp.beta_m);
        self.sigma_m.push(snp.sigma_m);
        self.beta_y.push(snp.beta_y);
        self.sigma_y.push(snp.sigma_y);
    }

    pub fn len(&self) -> usize {
        self.beta_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_x.is_empty()
    }

    pub fn snp(&self, j: usize) -> SnpTriple {
        SnpTriple {
            beta_x: self.beta_x[j],
            sigma_x: self.sigma_x[j],
            beta_m: self.beta_m[j],
            sigma_m: self.sigma_m[j],
            beta_y: self.beta_y[j],
            sigma_y: self.sigma_y[j],
        }
    }

    /// Sub-panel holding the given SNP indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> HarmonizedPanel {
        let mut out = HarmonizedPanel::with_capacity(indices.len());
        for &j in indices {
            out.push(self.ids[j].clone(), self.snp(j));
        }
        out
    }

    /// Checks column lengths, finiteness, σ > 0 and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for (what, len) in [
            ("ids", self.ids.len()),
            ("sigma_x", self.sigma_x.len()),
            ("beta_m", self.beta_m.len()),
            ("sigma_m", self.sigma_m.len()),
            ("beta_y", self.beta_y.len()),
            ("sigma_y", self.sigma_y.len()),
        ] {
            if len != n {
                return Err(Error::LengthMismatch {
                    what,
                    got: len,
                    expected: n,
                });
            }
        }
        let mut seen = HashSet::with_capacity(n);
        for j in 0..n {
            let s = self.snp(j);
            let id = &self.ids[j];
            let values = [s.beta_x, s.sigma_x, s.beta_m, s.sigma_m, s.beta_y, s.sigma_y];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("SNP {id}: non-finite value")));
            }
            if s.sigma_x <= 0.0 || s.sigma_m <= 0.0 || s.sigma_y <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "SNP {id}: standard errors must be positive"
                )));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate SNP id {id}")));
            }
        }
        Ok(())
    }
}
