//! MAGIC point estimates, the residual-based covariance estimator and the
//! plug-in comparator that shares its corrected inputs.
//!
//! Parameters are always ordered (θ, τ_Y, τ_X).

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, InstrumentSet, Result};
use crate::estimators::linalg::{guarded_solve, masked_sum};
use crate::panel::HarmonizedPanel;
use crate::selection::{BiasCorrectedPanel, SelectionOutcome};

/// (θ, τ_Y, τ_X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectEffects {
    pub theta: f64,
    pub tau_y: f64,
    pub tau_x: f64,
}

impl DirectEffects {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.theta, self.tau_y, self.tau_x)
    }

    fn from_vector(v: &Vector3<f64>) -> Self {
        DirectEffects {
            theta: v[0],
            tau_y: v[1],
            tau_x: v[2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediationEstimate {
    pub theta_hat: f64,
    pub tau_y_hat: f64,
    pub tau_x_hat: f64,
    /// τ̂_X · τ̂_Y.
    pub tau_hat: f64,
    /// V̂ in (θ, τ_Y, τ_X) order; `None` for point-only estimators.
    pub cov: Option<Matrix3<f64>>,
    /// Delta-method variance of τ̂.
    pub var_tau: Option<f64>,
    pub n_sx: usize,
    pub n_sm: usize,
    /// Average corrected instrument strength in S_x, using β̂_bc² − ς̂ for β².
    pub kappa_x: f64,
    pub kappa_m: f64,
}

impl MediationEstimate {
    pub fn effects(&self) -> DirectEffects {
        DirectEffects {
            theta: self.theta_hat,
            tau_y: self.tau_y_hat,
            tau_x: self.tau_x_hat,
        }
    }

    /// Standard errors of (θ̂, τ̂_Y, τ̂_X, τ̂) when a covariance is available.
    pub fn std_errors(&self) -> Option<[f64; 4]> {
        let v = self.cov?;
        Some([
            v[(0, 0)].max(0.0).sqrt(),
            v[(1, 1)].max(0.0).sqrt(),
            v[(2, 2)].max(0.0).sqrt(),
            self.var_tau?.max(0.0).sqrt(),
        ])
    }
}

/// Which SNPs enter the off-diagonal cross terms of the θ/τ_Y block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CrossTerms {
    /// Row 1 sums over S_x, row 2 over S_m.
    OwnSet,
    /// Both rows sum over S_x ∩ S_m.
    Intersection,
}

fn check_aligned(panel: &HarmonizedPanel, bc: &BiasCorrectedPanel, sel: &SelectionOutcome) -> Result<()> {
    for (what, got) in [("bias-corrected panel", bc.len()), ("selection outcome", sel.len())] {
        if got != panel.len() {
            return Err(Error::LengthMismatch {
                what,
                got,
                expected: panel.len(),
            });
        }
    }
    Ok(())
}

fn require(set: InstrumentSet, found: usize, needed: usize) -> Result<()> {
    if found < needed {
        return Err(Error::InsufficientInstruments { set, found, needed });
    }
    Ok(())
}

fn assemble(
    panel: &HarmonizedPanel,
    bc: &BiasCorrectedPanel,
    sel: &SelectionOutcome,
    cross: CrossTerms,
) -> (Matrix3<f64>, Vector3<f64>) {
    let n = panel.len();
    let in_x = |j: usize| sel.in_sx[j];
    let in_m = |j: usize| sel.in_sm[j];
    let in_both = |j: usize| sel.in_sx[j] && sel.in_sm[j];
    let wy = |j: usize| 1.0 / (panel.sigma_y[j] * panel.sigma_y[j]);
    let wm = |j: usize| 1.0 / (panel.sigma_m[j] * panel.sigma_m[j]);
    let (bx, bm, by) = (&bc.beta_x_bc, &bc.beta_m_bc, &panel.beta_y);
    let (vx, vm) = (&bc.varsigma_x, &bc.varsigma_m);

    let xx_y = masked_sum(n, in_x, |j| (bx[j] * bx[j] - vx[j]) * wy(j));
    let mm_y = masked_sum(n, in_m, |j| (bm[j] * bm[j] - vm[j]) * wy(j));
    let xx_m = masked_sum(n, in_x, |j| (bx[j] * bx[j] - vx[j]) * wm(j));
    let (xm_row1, xm_row2) = match cross {
        CrossTerms::OwnSet => (
            masked_sum(n, in_x, |j| bx[j] * bm[j] * wy(j)),
            masked_sum(n, in_m, |j| bx[j] * bm[j] * wy(j)),
        ),
        CrossTerms::Intersection => {
            let s = masked_sum(n, in_both, |j| bx[j] * bm[j] * wy(j));
            (s, s)
        }
    };
    let m = Matrix3::new(
        xx_y, xm_row1, 0.0, //
        xm_row2, mm_y, 0.0, //
        0.0, 0.0, xx_m,
    );
    let rhs = Vector3::new(
        masked_sum(n, in_x, |j| by[j] * bx[j] * wy(j)),
        masked_sum(n, in_m, |j| by[j] * bm[j] * wy(j)),
        masked_sum(n, in_x, |j| bm[j] * bx[j] * wm(j)),
    );
    (m, rhs)
}

/// The MAGIC design matrix M̂ and right-hand side.
pub fn magic_system(
    panel: &HarmonizedPanel,
    bc: &BiasCorrectedPanel,
    sel: &SelectionOutcome,
) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    check_aligned(panel, bc, sel)?;
    Ok(assemble(panel, bc, sel, CrossTerms::OwnSet))
}

/// Residual contributions Û_j for every SNP (zero outside S_x ∪ S_m).
pub fn residual_terms(
    panel: &HarmonizedPanel,
    bc: &BiasCorrectedPanel,
    sel: &SelectionOutcome,
    point: &DirectEffects,
) -> Vec<Vector3<f64>> {
    (0..panel.len())
        .map(|j| {
            let (bx, bm, by) = (bc.beta_x_bc[j], bc.beta_m_bc[j], panel.beta_y[j]);
            let (vx, vm) = (bc.varsigma_x[j], bc.varsigma_m[j]);
            let sy2 = panel.sigma_y[j] * panel.sigma_y[j];
            let sm2 = panel.sigma_m[j] * panel.sigma_m[j];
            let u_theta = if sel.in_sx[j] {
                (bx * (by - point.tau_y * bm) + point.theta * (vx - bx * bx)) / sy2
            } else {
                0.0
            };
            let u_tau_y = if sel.in_sm[j] {
                (bm * (by - point.theta * bx) + point.tau_y * (vm - bm * bm)) / sy2
            } else {
                0.0
            };
            let u_tau_x = if sel.in_sx[j] {
                (bx * bm + point.tau_x * (vx - bx * bx)) / sm2
            } else {
                0.0
            };
            Vector3::new(u_theta, u_tau_y, u_tau_x)
        })
        .collect()
}

fn gram(terms: &[Vector3<f64>]) -> Matrix3<f64> {
    let mut u = Matrix3::zeros();
    for r in 0..3 {
        for c in r..3 {
            let products: Vec<f64> = terms.iter().map(|t| t[r] * t[c]).collect();
            let s = crate::estimators::linalg::pairwise_sum(&products);
            u[(r, c)] = s;
            u[(c, r)] = s;
        }
    }
    u
}

/// V̂ = M̂⁻¹ Û M̂⁻ᵀ, symmetrized.
pub fn covariance_estimate(
    panel: &HarmonizedPanel,
    bc: &BiasCorrectedPanel,
    sel: &SelectionOutcome,
    point: &DirectEffects,
) -> Result<Matrix3<f64>> {
    check_aligned(panel, bc, sel)?;
    let n_union = (0..sel.len()).filter(|&j| sel.in_sx[j] || sel.in_sm[j]).count();
    require(InstrumentSet::Union, n_union, 1)?;
    let (m, rhs) = assemble(panel, bc, sel, CrossTerms::OwnSet);
    let (_, m_inv) = guarded_solve(&m, &rhs)?;
    let u = gram(&residual_terms(panel, bc, sel, point));
    let v = m_inv * u * m_inv.transpose();
    Ok((v + v.transpose()) * 0.5)
}

/// c′V̂c with c = (0, τ̂_X, τ̂_Y).
pub fn delta_method_variance(cov: &Matrix3<f64>, tau_x: f64, tau_y: f64) -> f64 {
    let c = Vector3::new(0.0, tau_x, tau_y);
    (c.transpose() * cov * c)[(0, 0)]
}

fn kappa(panel_sigma: &[f64], beta_bc: &[f64], varsigma: &[f64], member: &[bool]) -> f64 {
    let n = member.iter().filter(|&&m| m).count();
    if n == 0 {
        return f64::NAN;
    }
    let total = masked_sum(member.len(), |j| member[j], |j| {
        (beta_bc[j] * beta_bc[j] - varsigma[j]) / (panel_sigma[j] * panel_sigma[j])
    });
    total / n as f64
}

/// Solves the MAGIC estimating equations and attaches V̂, the delta-method
/// variance of τ̂ and the κ diagnostics.
pub fn magic_estimate(
    panel: &HarmonizedPanel,
    bc: &BiasCorrectedPanel,
    sel: &SelectionOutcome,
) -> Result<MediationEstimate> {
    check_aligned(panel, bc, sel)?;
    let (n_sx, n_sm) = (sel.n_sx(), sel.n_sm());
    require(InstrumentSet::Exposure, n_sx, 2)?;
    require(InstrumentSet::Mediator, n_sm, 2)?;

    let (m, rhs) = assemble(panel, bc, sel, CrossTerms::OwnSet);
    let (solution, m_inv) = guarded_solve(&m, &rhs)?;
    let point = DirectEffects::from_vector(&solution);

    let u = gram(&residual_terms(panel, bc, sel, &point));
    let v = m_inv * u * m_inv.transpose();
    let cov = (v + v.transpose()) * 0.5;
    let var_tau = delta_method_variance(&cov, point.tau_x, point.tau_y);

    Ok(MediationEstimate {
        theta_hat: point.theta,
        tau_y_hat: point.tau_y,
        tau_x_hat: point.tau_x,
        tau_hat: point.tau_x * point.tau_y,
        cov: Some(cov),
        var_tau: Some(var_tau),
        n_sx,
        n_sm,
        kappa_x: kappa(&panel.sigma_x, &bc.beta_x_bc, &bc.varsigma_x, &sel.in_sx),
        kappa_m: kappa(&panel.sigma_m, &bc.beta_m_bc, &bc.varsigma_m, &sel.in_sm),
    })
}

/// Plug-in comparator: same corrected inputs, cross terms restricted to
/// S_x ∩ S_m. Point estimates only.
pub fn plug_in_estimate(
    panel: &HarmonizedPanel,
    bc: &BiasCorrectedPanel,
    sel: &SelectionOutcome,
) -> Result<MediationEstimate> {
    check_aligned(panel, bc, sel)?;
    let (n_sx, n_sm) = (sel.n_sx(), sel.n_sm());
    require(InstrumentSet::Exposure, n_sx, 2)?;
    require(InstrumentSet::Mediator, n_sm, 2)?;
    let n_both = (0..sel.len()).filter(|&j| sel.in_sx[j] && sel.in_sm[j]).count();
    require(InstrumentSet::ExposureAndMediator, n_both, 1)?;

    let (m, rhs) = assemble(panel, bc, sel, CrossTerms::Intersection);
    let (solution, _) = guarded_solve(&m, &rhs)?;
    let point = DirectEffects::from_vector(&solution);
    Ok(MediationEstimate {
        theta_hat: point.theta,
        tau_y_hat: point.tau_y,
        tau_x_hat: point.tau_x,
        tau_hat: point.tau_x * point.tau_y,
        cov: None,
        var_tau: None,
        n_sx,
        n_sm,
        kappa_x: kappa(&panel.sigma_x, &bc.beta_x_bc, &bc.varsigma_x, &sel.in_sx),
        kappa_m: kappa(&panel.sigma_m, &bc.beta_m_bc, &bc.varsigma_m, &sel.in_sm),
    })
}
