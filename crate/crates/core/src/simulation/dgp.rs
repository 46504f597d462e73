//! Truth and observed-panel generators.
//!
//! Streams under a replicate seed: 0 for index sets, 1 for β_X, 2 for δ and
//! 10–12 for the observation noise of X, M and Y.

use rand::seq::index;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::panel::HarmonizedPanel;
use crate::rng::{replicate_seed, stream_rng};
use crate::simulation::config::{Dgp, SimConfig};

const SET_STREAM: u64 = 0;
const BETA_X_STREAM: u64 = 1;
const DELTA_STREAM: u64 = 2;
const NOISE_STREAMS: [u64; 3] = [10, 11, 12];

/// True per-SNP effects of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthPanel {
    pub beta_x: Vec<f64>,
    pub beta_m: Vec<f64>,
    pub beta_y: Vec<f64>,
    pub delta: Vec<f64>,
    /// Direct SNP effect on Y; zero in every design.
    pub alpha: Vec<f64>,
    pub in_sx_star: Vec<bool>,
    pub in_sm_star: Vec<bool>,
    pub in_sdelta_star: Vec<bool>,
}

impl TruthPanel {
    pub fn len(&self) -> usize {
        self.beta_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_x.is_empty()
    }
}

/// Index layout: S*_x, then S*_δ, each as a list of SNP indices.
fn draw_sets(cfg: &SimConfig, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = stream_rng(seed, SET_STREAM);
    let p = cfg.p;
    let (kx, kd) = (cfg.count(cfg.pi_x), cfg.count(cfg.pi_delta));
    let overlap = match cfg.dgp {
        Dgp::Dgp1 => kx,
        Dgp::Dgp2ii | Dgp::Dgp3ii => kx / 2,
        Dgp::Dgp2i | Dgp::Dgp3i => 0,
        Dgp::OracleSplit => unreachable!("oracle layout is drawn separately"),
    };
    if overlap > kd || kx + kd - overlap > p {
        return Err(Error::Config(format!("{}: infeasible set sizes", cfg.dgp.name())));
    }
    // a uniform random ordered sample; its first kx entries are S*_x in a
    // seeded random order, so "the first half of S*_x" is a seeded choice
    let picks = index::sample(&mut rng, p, kx + kd - overlap).into_vec();
    let sx = picks[..kx].to_vec();
    let mut sd = picks[..overlap].to_vec();
    sd.extend_from_slice(&picks[kx..]);
    Ok((sx, sd))
}

fn draw_normal(rng: &mut impl rand::Rng, var: f64) -> f64 {
    Normal::new(0.0, var.sqrt()).expect("validated variance").sample(rng)
}

fn finish(cfg: &SimConfig, beta_x: Vec<f64>, delta: Vec<f64>) -> TruthPanel {
    let beta_m: Vec<f64> = beta_x.iter().zip(&delta).map(|(bx, d)| cfg.tau_x * bx + d).collect();
    let beta_y: Vec<f64> = beta_x.iter().zip(&beta_m).map(|(bx, bm)| cfg.theta * bx + cfg.tau_y * bm).collect();
    TruthPanel {
        in_sx_star: beta_x.iter().map(|&b| b != 0.0).collect(),
        in_sm_star: beta_m.iter().map(|&b| b != 0.0).collect(),
        in_sdelta_star: delta.iter().map(|&d| d != 0.0).collect(),
        alpha: vec![0.0; beta_x.len()],
        beta_x,
        beta_m,
        beta_y,
        delta,
    }
}

/// Draws the index sets and true effects of replicate `rep`.
pub fn generate_truth(cfg: &SimConfig, rep: u64) -> Result<TruthPanel> {
    cfg.validate()?;
    let seed = replicate_seed(cfg.seed, rep);
    if cfg.dgp == Dgp::OracleSplit {
        return oracle_truth(cfg, seed);
    }
    let (sx, sd) = draw_sets(cfg, seed)?;
    let mut beta_x = vec![0.0; cfg.p];
    let mut delta = vec![0.0; cfg.p];
    let mut rx = stream_rng(seed, BETA_X_STREAM);
    let mut rd = stream_rng(seed, DELTA_STREAM);
    for &j in &sx {
        beta_x[j] = draw_normal(&mut rx, cfg.eps_x_sq);
    }
    for &j in &sd {
        delta[j] = draw_normal(&mut rd, cfg.eps_delta_sq);
    }
    Ok(finish(cfg, beta_x, delta))
}

/// Contiguous blocks: x-only with δ = −τ_X β_X (so β_M = 0), shared, m-only.
/// Remaining SNPs are null.
fn oracle_truth(cfg: &SimConfig, seed: u64) -> Result<TruthPanel> {
    let need = |v: Option<f64>| v.map(|x| cfg.count(x)).ok_or_else(|| Error::Config("oracle proportions missing".into()));
    let (nx, nb, nm) = (need(cfg.pi_x_only)?, need(cfg.pi_both)?, need(cfg.pi_m_only)?);
    let mut beta_x = vec![0.0; cfg.p];
    let mut delta = vec![0.0; cfg.p];
    let mut rx = stream_rng(seed, BETA_X_STREAM);
    let mut rd = stream_rng(seed, DELTA_STREAM);
    for j in 0..nx {
        beta_x[j] = draw_normal(&mut rx, cfg.eps_x_sq);
        delta[j] = -cfg.tau_x * beta_x[j];
    }
    for j in nx..nx + nb {
        beta_x[j] = draw_normal(&mut rx, cfg.eps_x_sq);
        delta[j] = draw_normal(&mut rd, cfg.eps_delta_sq);
    }
    for j in nx + nb..nx + nb + nm {
        delta[j] = draw_normal(&mut rd, cfg.eps_delta_sq);
    }
    Ok(finish(cfg, beta_x, delta))
}

/// Adds independent N(0, σ²) noise to each trait's effects and attaches the
/// common standard error.
pub fn generate_observed(truth: &TruthPanel, cfg: &SimConfig, rep: u64) -> HarmonizedPanel {
    generate_observed_subset(truth, cfg, rep, None)
}

/// As [`generate_observed`], restricted to `indices` when given. The noise
/// streams are consumed in the order of `indices`.
pub(crate) fn generate_observed_subset(truth: &TruthPanel, cfg: &SimConfig, rep: u64, indices: Option<&[usize]>) -> HarmonizedPanel {
    let seed = replicate_seed(cfg.seed, rep);
    let sigma = cfg.sigma_sq.sqrt();
    let all: Vec<usize>;
    let idx = match indices {
        Some(i) => i,
        None => {
            all = (0..truth.len()).collect();
            &all
        }
    };
    let n = idx.len();
    let noise = |stream: u64, base: &[f64]| -> Vec<f64> {
        let mut rng = stream_rng(seed, stream);
        idx.iter()
            .map(|&j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                base[j] + sigma * z
            })
            .collect()
    };
    HarmonizedPanel {
        ids: idx.iter().map(|j| format!("snp{j}")).collect(),
        beta_x: noise(NOISE_STREAMS[0], &truth.beta_x),
        sigma_x: vec![sigma; n],
        beta_m: noise(NOISE_STREAMS[1], &truth.beta_m),
        sigma_m: vec![sigma; n],
        beta_y: noise(NOISE_STREAMS[2], &truth.beta_y),
        sigma_y: vec![sigma; n],
    }
}
