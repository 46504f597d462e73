//! Reference implementations shared by the integration and acceptance tests.
//! Nothing here calls into the estimators; each helper is an independent
//! route to a quantity the library also computes.
#![allow(dead_code)]

pub mod properties;

use magic_mr::normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre over [a, b] split into panels of width ≤ `h`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = ((b - a) / h).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let (mid, half) = (lo + 0.5 * width, 0.5 * width);
        let s: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum();
        total += half * s;
    }
    total
}

fn phi(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exact conditional moments by quadrature, in units of σ.
///
/// U = t − Z/η² is independent of the selection event, so the corrected
/// estimate is E[U | t, branch] and the squared-bias correction is
/// Var(U) − Var[U | t, branch]. With V = Z/η standard normal the branch is
/// {V < A₋} ∪ {V > A₊} or its complement.
pub fn quadrature_correction(t: f64, lambda: f64, eta: f64, selected: bool) -> (f64, f64) {
    let rule = gauss_legendre(20);
    let (a_lo, a_up) = ((-t - lambda) / eta, (-t + lambda) / eta);
    const REACH: f64 = 40.0;
    const H: f64 = 0.25;
    let region = |g: &dyn Fn(f64) -> f64| -> f64 {
        if selected {
            integrate(|v| g(v) * phi(v), a_up, a_up.max(0.0) + REACH, H, &rule)
                + integrate(|v| g(v) * phi(v), a_lo.min(0.0) - REACH, a_lo, H, &rule)
        } else {
            integrate(|v| g(v) * phi(v), a_lo, a_up, H, &rule)
        }
    };
    let m0 = region(&|_| 1.0);
    let mean = region(&|v| v) / m0;
    let var = region(&|v| (v - mean) * (v - mean)) / m0;
    (t - mean / eta, 1.0 + 1.0 / (eta * eta) - var / (eta * eta))
}

/// Draws β̂/σ from its law conditional on the selection branch, for a SNP with
/// true β/σ = `mu` and pseudo-noise sd `eta`.
///
/// W = t + Z ~ N(mu, 1 + η²) is drawn from its truncation by inversion, then
/// t | W ~ N(mu + (W − mu)/(1 + η²), η²/(1 + η²)).
pub struct ConditionalSampler {
    mu: f64,
    s: f64,
    lo: f64,
    hi: f64,
    p_lower: f64,
    p_upper: f64,
    selected: bool,
}

impl ConditionalSampler {
    pub fn new(mu: f64, lambda: f64, eta: f64, selected: bool) -> Self {
        let s = (1.0 + eta * eta).sqrt();
        let (lo, hi) = ((-lambda - mu) / s, (lambda - mu) / s);
        ConditionalSampler {
            mu,
            s,
            lo,
            hi,
            p_lower: std_normal_cdf(lo),
            p_upper: std_normal_sf(hi),
            selected,
        }
    }

    fn quantile(p: f64) -> f64 {
        std_normal_quantile(p).expect("probability in (0, 1)")
    }

    fn standardized_w<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        if self.selected {
            let side: f64 = rng.sample(Open01);
            if side * (self.p_lower + self.p_upper) < self.p_upper {
                -Self::quantile(u * self.p_upper)
            } else {
                Self::quantile(u * self.p_lower)
            }
        } else if self.lo + self.hi <= 0.0 {
            // interval sits left of the mode: invert the lower cdf
            let inside = std_normal_cdf(self.hi) - self.p_lower;
            Self::quantile(self.p_lower + u * inside)
        } else {
            let inside = std_normal_sf(self.lo) - self.p_upper;
            -Self::quantile(self.p_upper + u * inside)
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let w = self.mu + self.s * self.standardized_w(rng);
        let s2 = self.s * self.s;
        let z: f64 = rng.sample(StandardNormal);
        self.mu + (w - self.mu) / s2 + (1.0 - 1.0 / s2).sqrt() * z
    }

    pub fn branch_probability(&self) -> f64 {
        if self.selected {
            self.p_lower + self.p_upper
        } else {
            1.0 - self.p_lower - self.p_upper
        }
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Default, Clone, Copy)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn sd(&self) -> f64 {
        (self.m2 / (self.n as f64 - 1.0)).sqrt()
    }

    pub fn se(&self) -> f64 {
        self.sd() / (self.n as f64).sqrt()
    }
}

/// One-sample Kolmogorov–Smirnov statistic against N(0, 1).
pub fn ks_statistic(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// P(D_n > d) from the Kolmogorov limit law with Stephens' finite-n
/// adjustment of the argument.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let rn = (n as f64).sqrt();
    let x = (rn + 0.12 + 0.11 / rn) * d;
    if x < 0.2 {
        // P(K ≤ 0.2) < 1e-15 and the alternating series stalls here
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        s += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Gaussian elimination with partial pivoting on a dense row-major system.
pub fn gepp_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[pivot][k] == 0.0 {
            return None;
        }
        a.swap(k, pivot);
        b.swap(k, pivot);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}
