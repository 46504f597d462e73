//! Comparator estimators on hard-thresholded or oracle instrument sets:
//! MVMR-IVW, its measurement-error corrected variant, two-step MR and the
//! oracle MAGIC/DMVMR pair.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, InstrumentSet, Result};
use crate::estimators::linalg::{guarded_solve, masked_sum};
use crate::panel::HarmonizedPanel;
use crate::selection::HardSelection;

/// (θ̂, τ̂_Y) from a two-equation system.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectPair {
    pub theta_hat: f64,
    pub tau_y_hat: f64,
    /// Fixed-effect covariance of (θ̂, τ̂_Y) when the method defines one.
    pub cov: Option<Matrix2<f64>>,
    /// τ̂ as total effect minus θ̂ (MVMR only).
    pub tau_hat: Option<f64>,
    pub n_instruments: usize,
}

impl DirectPair {
    pub fn se_theta(&self) -> Option<f64> {
        self.cov.map(|c| c[(0, 0)].max(0.0).sqrt())
    }

    pub fn se_tau_y(&self) -> Option<f64> {
        self.cov.map(|c| c[(1, 1)].max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepEstimate {
    pub tau_x_hat: f64,
    pub se_tau_x: f64,
    pub tau_y_hat: f64,
    pub se_tau_y: f64,
    pub tau_hat: f64,
    /// τ̂_X² var(τ̂_Y) + τ̂_Y² var(τ̂_X).
    pub var_tau: f64,
    pub n_first: usize,
    pub n_second: usize,
}

fn check_len(panel: &HarmonizedPanel, sel: &HardSelection) -> Result<()> {
    if sel.len() != panel.len() || sel.in_sm.len() != panel.len() {
        return Err(Error::LengthMismatch {
            what: "hard selection",
            got: sel.len(),
            expected: panel.len(),
        });
    }
    Ok(())
}

/// Union-set IVW system. `corrected` subtracts σ² on the diagonal.
fn union_system(panel: &HarmonizedPanel, member: &[bool], corrected: bool) -> (Matrix2<f64>, Vector2<f64>) {
    let n = panel.len();
    let inc = |j: usize| member[j];
    let w = |j: usize| 1.0 / (panel.sigma_y[j] * panel.sigma_y[j]);
    let (bx, bm, by) = (&panel.beta_x, &panel.beta_m, &panel.beta_y);
    let (sx, sm) = (&panel.sigma_x, &panel.sigma_m);
    let k = if corrected { 1.0 } else { 0.0 };
    let xx = masked_sum(n, inc, |j| (bx[j] * bx[j] - k * sx[j] * sx[j]) * w(j));
    let mm = masked_sum(n, inc, |j| (bm[j] * bm[j] - k * sm[j] * sm[j]) * w(j));
    let xm = masked_sum(n, inc, |j| bx[j] * bm[j] * w(j));
    let rhs = Vector2::new(
        masked_sum(n, inc, |j| by[j] * bx[j] * w(j)),
        masked_sum(n, inc, |j| by[j] * bm[j] * w(j)),
    );
    (Matrix2::new(xx, xm, xm, mm), rhs)
}

fn union_flags(sel: &HardSelection) -> (Vec<bool>, usize) {
    let flags: Vec<bool> = sel.in_sx.iter().zip(&sel.in_sm).map(|(a, b)| *a || *b).collect();
    let n = flags.iter().filter(|&&f| f).count();
    (flags, n)
}

/// IVW slope of `num` on `den` through the origin and its fixed-effect variance.
fn ivw(n: usize, include: impl Fn(usize) -> bool + Copy, den: &[f64], num: &[f64], sigma: &[f64]) -> (f64, f64) {
    let w = |j: usize| 1.0 / (sigma[j] * sigma[j]);
    let sxx = masked_sum(n, include, |j| den[j] * den[j] * w(j));
    let sxy = masked_sum(n, include, |j| den[j] * num[j] * w(j));
    (sxy / sxx, 1.0 / sxx)
}

/// MVMR-IVW over S̃_x ∪ S̃_m with fixed-effect standard errors, plus the
/// total-effect-minus-direct estimate of τ.
pub fn mvmr_estimate(panel: &HarmonizedPanel, sel: &HardSelection) -> Result<DirectPair> {
    check_len(panel, sel)?;
    let (member, n_union) = union_flags(sel);
    if n_union < 2 {
        return Err(Error::InsufficientInstruments {
            set: InstrumentSet::Union,
            found: n_union,
            needed: 2,
        });
    }
    let (m, rhs) = union_system(panel, &member, false);
    let (x, inv) = guarded_solve(&m, &rhs)?;
    let n = panel.len();
    let tau_hat = if sel.in_sx.iter().any(|&f| f) {
        let (total, _) = ivw(n, |j| sel.in_sx[j], &panel.beta_x, &panel.beta_y, &panel.sigma_y);
        Some(total - x[0])
    } else {
        None
    };
    Ok(DirectPair {
        theta_hat: x[0],
        tau_y_hat: x[1],
        cov: Some((inv + inv.transpose()) * 0.5),
        tau_hat,
        n_instruments: n_union,
    })
}

/// MVMR with σ_X² and σ_M² removed from the diagonal. Point estimates only.
pub fn dmvmr_estimate(panel: &HarmonizedPanel, sel: &HardSelection) -> Result<DirectPair> {
    check_len(panel, sel)?;
    let (member, n_union) = union_flags(sel);
    if n_union < 2 {
        return Err(Error::InsufficientInstruments {
            set: InstrumentSet::Union,
            found: n_union,
            needed: 2,
        });
    }
    let (m, rhs) = union_system(panel, &member, true);
    let (x, _) = guarded_solve(&m, &rhs)?;
    Ok(DirectPair {
        theta_hat: x[0],
        tau_y_hat: x[1],
        cov: None,
        tau_hat: None,
        n_instruments: n_union,
    })
}

/// τ_X from S̃_x, τ_Y from S̃_m \ S̃_x, and their product.
pub fn two_step_estimate(panel: &HarmonizedPanel, sel: &HardSelection) -> Result<TwoStepEstimate> {
    check_len(panel, sel)?;
    let n = panel.len();
    let first = |j: usize| sel.in_sx[j];
    let second = |j: usize| sel.in_sm[j] && !sel.in_sx[j];
    let n_first = (0..n).filter(|&j| first(j)).count();
    let n_second = (0..n).filter(|&j| second(j)).count();
    if n_first == 0 {
        return Err(Error::InsufficientInstruments {
            set: InstrumentSet::Exposure,
            found: 0,
            needed: 1,
        });
    }
    if n_second == 0 {
        return Err(Error::InsufficientInstruments {
            set: InstrumentSet::MediatorOnly,
            found: 0,
            needed: 1,
        });
    }
    let (tau_x, var_x) = ivw(n, first, &panel.beta_x, &panel.beta_m, &panel.sigma_m);
    let (tau_y, var_y) = ivw(n, second, &panel.beta_m, &panel.beta_y, &panel.sigma_y);
    if !(var_x.is_finite() && var_y.is_finite()) {
        return Err(Error::DegenerateDesign {
            condition: f64::INFINITY,
            limit: crate::estimators::linalg::CONDITION_LIMIT,
        });
    }
    Ok(TwoStepEstimate {
        tau_x_hat: tau_x,
        se_tau_x: var_x.sqrt(),
        tau_y_hat: tau_y,
        se_tau_y: var_y.sqrt(),
        tau_hat: tau_x * tau_y,
        var_tau: tau_x * tau_x * var_y + tau_y * tau_y * var_x,
        n_first,
        n_second,
    })
}

/// Oracle MAGIC on known sets: raw associations, σ² removed on the diagonal,
/// row 1 summed over S*_x and row 2 over S*_m.
pub fn oracle_magic(panel: &HarmonizedPanel, truth_sets: &HardSelection) -> Result<DirectPair> {
    check_len(panel, truth_sets)?;
    let n = panel.len();
    let in_x = |j: usize| truth_sets.in_sx[j];
    let in_m = |j: usize| truth_sets.in_sm[j];
    let w = |j: usize| 1.0 / (panel.sigma_y[j] * panel.sigma_y[j]);
    let (bx, bm, by) = (&panel.beta_x, &panel.beta_m, &panel.beta_y);
    let (sx, sm) = (&panel.sigma_x, &panel.sigma_m);
    let m = Matrix2::new(
        masked_sum(n, in_x, |j| (bx[j] * bx[j] - sx[j] * sx[j]) * w(j)),
        masked_sum(n, in_x, |j| bx[j] * bm[j] * w(j)),
        masked_sum(n, in_m, |j| bx[j] * bm[j] * w(j)),
        masked_sum(n, in_m, |j| (bm[j] * bm[j] - sm[j] * sm[j]) * w(j)),
    );
    let rhs = Vector2::new(
        masked_sum(n, in_x, |j| by[j] * bx[j] * w(j)),
        masked_sum(n, in_m, |j| by[j] * bm[j] * w(j)),
    );
    let (x, _) = guarded_solve(&m, &rhs)?;
    Ok(DirectPair {
        theta_hat: x[0],
        tau_y_hat: x[1],
        cov: None,
        tau_hat: None,
        n_instruments: (0..n).filter(|&j| in_x(j) || in_m(j)).count(),
    })
}

/// Oracle DMVMR: every sum over S*_x ∪ S*_m.
pub fn oracle_dmvmr(panel: &HarmonizedPanel, truth_sets: &HardSelection) -> Result<DirectPair> {
    dmvmr_estimate(panel, truth_sets)
}
