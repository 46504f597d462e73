//! Rerandomized instrument selection and the selection-aware bias correction
//! of exposure and mediator associations.
//!
//! A SNP enters S_x when |β̂_X/σ_X + Z| > λ with Z ~ N(0, η²) drawn
//! independently of the data; S_m uses the mediator statistic and its own
//! draw Z′. Conditional on the selection outcome, the corrected association
//! subtracts (σ/η)·E[Z/η | outcome] from β̂. That removes the winner's curse
//! for selected SNPs and the loser's curse for unselected ones.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal::{interval_mass, std_normal_pdf, TailPair};
use crate::panel::HarmonizedPanel;
use crate::rng::counter_normals;

/// Keystream selector for the exposure pseudo-noise Z.
pub const EXPOSURE_STREAM: u64 = 0;
/// Keystream selector for the mediator pseudo-noise Z′.
pub const MEDIATOR_STREAM: u64 = 1;

pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_LAMBDA: f64 = 4.06;
/// Cutoff used by the hard-threshold comparators (genome-wide 5e-8).
pub const DEFAULT_HARD_LAMBDA: f64 = 5.45;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub lambda: f64,
    pub eta: f64,
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(lambda: f64, eta: f64, seed: u64) -> Result<Self> {
        let cfg = SelectionConfig { lambda, eta, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be finite and > 0, got {}", self.lambda)));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!("eta must be finite and > 0, got {}", self.eta)));
        }
        Ok(())
    }
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            lambda: DEFAULT_LAMBDA,
            eta: DEFAULT_ETA,
            seed: 0,
        }
    }
}

/// Pseudo-noise draws and the resulting S_x / S_m membership.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub config: SelectionConfig,
    pub z_x: Vec<f64>,
    pub z_m: Vec<f64>,
    pub in_sx: Vec<bool>,
    pub in_sm: Vec<bool>,
}

impl SelectionOutcome {
    pub fn len(&self) -> usize {
        self.in_sx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_sx.is_empty()
    }

    pub fn n_sx(&self) -> usize {
        self.in_sx.iter().filter(|&&s| s).count()
    }

    pub fn n_sm(&self) -> usize {
        self.in_sm.iter().filter(|&&s| s).count()
    }

    /// Indices in S_x ∪ S_m, ascending.
    pub fn union_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.in_sx[j] || self.in_sm[j]).collect()
    }

    /// Restriction to the given SNP indices.
    pub fn subset(&self, indices: &[usize]) -> SelectionOutcome {
        SelectionOutcome {
            config: self.config,
            z_x: indices.iter().map(|&j| self.z_x[j]).collect(),
            z_m: indices.iter().map(|&j| self.z_m[j]).collect(),
            in_sx: indices.iter().map(|&j| self.in_sx[j]).collect(),
            in_sm: indices.iter().map(|&j| self.in_sm[j]).collect(),
        }
    }
}

/// Threshold rule |z + pseudo| > λ (strict).
#[inline]
pub fn passes_cutoff(z_score: f64, pseudo: f64, lambda: f64) -> bool {
    (z_score + pseudo).abs() > lambda
}

/// Draws Z_j, Z′_j for every SNP and forms S_x and S_m.
///
/// Draw `j` of each trait is a pure function of (seed, trait, j).
pub fn select_instruments(panel: &HarmonizedPanel, cfg: &SelectionConfig) -> Result<SelectionOutcome> {
    cfg.validate()?;
    let n = panel.len();
    if panel.sigma_x.len() != n || panel.sigma_m.len() != n || panel.beta_m.len() != n {
        return Err(Error::LengthMismatch {
            what: "panel columns",
            got: panel.sigma_x.len().min(panel.sigma_m.len()).min(panel.beta_m.len()),
            expected: n,
        });
    }
    for j in 0..n {
        if !(panel.sigma_x[j] > 0.0) || !(panel.sigma_m[j] > 0.0) {
            let id = panel.ids.get(j).map(String::as_str).unwrap_or("?");
            return Err(Error::InvalidInput(format!(
                "SNP {id} (index {j}): exposure and mediator standard errors must be positive"
            )));
        }
    }

    let mut z_x = vec![0.0; n];
    let mut z_m = vec![0.0; n];
    counter_normals(cfg.seed, EXPOSURE_STREAM, 0, &mut z_x);
    counter_normals(cfg.seed, MEDIATOR_STREAM, 0, &mut z_m);
    z_x.iter_mut().for_each(|z| *z *= cfg.eta);
    z_m.iter_mut().for_each(|z| *z *= cfg.eta);

    let in_sx = (0..n)
        .map(|j| passes_cutoff(panel.beta_x[j] / panel.sigma_x[j], z_x[j], cfg.lambda))
        .collect();
    let in_sm = (0..n)
        .map(|j| passes_cutoff(panel.beta_m[j] / panel.sigma_m[j], z_m[j], cfg.lambda))
        .collect();

    Ok(SelectionOutcome {
        config: *cfg,
        z_x,
        z_m,
        in_sx,
        in_sm,
    })
}

/// Hard-threshold sets S̃_x, S̃_m used by MVMR, DMVMR and two-step MR.
#[derive(Debug, Clone, PartialEq)]
pub struct HardSelection {
    pub lambda: f64,
    pub in_sx: Vec<bool>,
    pub in_sm: Vec<bool>,
}

impl HardSelection {
    /// Builds a selection from explicit membership flags, e.g. the true sets
    /// in a simulation.
    pub fn from_flags(in_sx: Vec<bool>, in_sm: Vec<bool>) -> Self {
        HardSelection {
            lambda: f64::NAN,
            in_sx,
            in_sm,
        }
    }

    pub fn len(&self) -> usize {
        self.in_sx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_sx.is_empty()
    }

    pub fn union_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.in_sx[j] || self.in_sm[j]).collect()
    }
}

/// |β̂/σ| > λ without pseudo-noise.
pub fn hard_select(panel: &HarmonizedPanel, lambda: f64) -> Result<HardSelection> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Config(format!("lambda must be finite and > 0, got {lambda}")));
    }
    let n = panel.len();
    let in_sx = (0..n).map(|j| passes_cutoff(panel.beta_x[j] / panel.sigma_x[j], 0.0, lambda)).collect();
    let in_sm = (0..n).map(|j| passes_cutoff(panel.beta_m[j] / panel.sigma_m[j], 0.0, lambda)).collect();
    Ok(HardSelection { lambda, in_sx, in_sm })
}

/// A corrected association and its squared-bias correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corrected {
    pub beta_bc: f64,
    pub varsigma: f64,
}

/// Core correction shared by both traits.
///
/// Selected branch divides by the mass outside [A₋, A₊], unselected by the
/// mass inside. `varsigma` is left signed: the estimating equations subtract
/// it from β̂_bc², and clamping would bias that difference.
pub fn bias_correct(beta_hat: f64, sigma: f64, selected: bool, lambda: f64, eta: f64) -> Result<Corrected> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("standard error must be positive, got {sigma}")));
    }
    if !beta_hat.is_finite() {
        return Err(Error::InvalidInput(format!("association estimate must be finite, got {beta_hat}")));
    }
    let tails = TailPair::new(beta_hat / sigma, lambda, eta);
    let (a_up, a_lo) = (tails.upper, tails.lower);
    let (phi_up, phi_lo) = (std_normal_pdf(a_up), std_normal_pdf(a_lo));
    let mass = interval_mass(tails);
    let eta_sq = eta * eta;

    let (beta_bc, bracket) = if selected {
        let d = mass.outside;
        let ratio = (phi_up - phi_lo) / d;
        let edge = (a_up * phi_up - a_lo * phi_lo) / d;
        (beta_hat - sigma / eta * ratio, 1.0 - edge / eta_sq + ratio * ratio / eta_sq)
    } else {
        let d = mass.inside;
        let ratio = (-phi_up + phi_lo) / d;
        let edge = (-a_up * phi_up + a_lo * phi_lo) / d;
        (beta_hat + sigma / eta * (phi_up - phi_lo) / d, 1.0 - edge / eta_sq + ratio * ratio / eta_sq)
    };
    Ok(Corrected {
        beta_bc,
        varsigma: sigma * sigma * bracket,
    })
}

/// β̂_{X,bc} and ς̂_X for one SNP.
pub fn bias_correct_exposure(beta_hat: f64, sigma: f64, selected: bool, cfg: &SelectionConfig) -> Result<Corrected> {
    bias_correct(beta_hat, sigma, selected, cfg.lambda, cfg.eta)
}

/// β̂_{M,bc} and ς̂_M for one SNP; same construction with the mediator's
/// statistic and selection flag.
pub fn bias_correct_mediator(beta_hat: f64, sigma: f64, selected: bool, cfg: &SelectionConfig) -> Result<Corrected> {
    bias_correct(beta_hat, sigma, selected, cfg.lambda, cfg.eta)
}

/// Per-SNP corrected associations for both traits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BiasCorrectedPanel {
    pub beta_x_bc: Vec<f64>,
    pub varsigma_x: Vec<f64>,
    pub beta_m_bc: Vec<f64>,
    pub varsigma_m: Vec<f64>,
}

impl BiasCorrectedPanel {
    pub fn len(&self) -> usize {
        self.beta_x_bc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_x_bc.is_empty()
    }

    /// Number of SNPs whose ς̂ is negative, per trait.
    pub fn negative_varsigma_counts(&self) -> (usize, usize) {
        (
            self.varsigma_x.iter().filter(|v| **v < 0.0).count(),
            self.varsigma_m.iter().filter(|v| **v < 0.0).count(),
        )
    }
}

/// Applies the exposure and mediator corrections SNP by SNP using each SNP's
/// own branch flags.
pub fn build_bc_panel(panel: &HarmonizedPanel, sel: &SelectionOutcome) -> Result<BiasCorrectedPanel> {
    if sel.len() != panel.len() || sel.in_sm.len() != panel.len() {
        return Err(Error::LengthMismatch {
            what: "selection outcome",
            got: sel.len(),
            expected: panel.len(),
        });
    }
    let cfg = sel.config;
    let rows: Vec<(Corrected, Corrected)> = (0..panel.len())
        .into_par_iter()
        .map(|j| {
            let x = bias_correct_exposure(panel.beta_x[j], panel.sigma_x[j], sel.in_sx[j], &cfg)?;
            let m = bias_correct_mediator(panel.beta_m[j], panel.sigma_m[j], sel.in_sm[j], &cfg)?;
            Ok((x, m))
        })
        .collect::<Result<_>>()?;

    let mut out = BiasCorrectedPanel {
        beta_x_bc: Vec::with_capacity(rows.len()),
        varsigma_x: Vec::with_capacity(rows.len()),
        beta_m_bc: Vec::with_capacity(rows.len()),
        varsigma_m: Vec::with_capacity(rows.len()),
    };
    for (x, m) in rows {
        out.beta_x_bc.push(x.beta_bc);
        out.varsigma_x.push(x.varsigma);
        out.beta_m_bc.push(m.beta_bc);
        out.varsigma_m.push(m.varsigma);
    }
    Ok(out)
}
