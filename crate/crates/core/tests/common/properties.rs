//! Invariant checks shared by the `properties` target and the acceptance
//! suite. Each returns a one-line summary on success.

use std::path::Path;
use std::process::Command;

use magic_mr::estimators::linalg::guarded_solve;
use magic_mr::estimators::{
    bh_adjust, covariance_estimate, delta_method_variance, magic_estimate, oracle_magic, plug_in_estimate, EstimatorReport, Method, Parameter,
};
use magic_mr::estimators::magic::magic_system;
use magic_mr::io::{panel_to_gwas, write_gwas};
use magic_mr::panel::HarmonizedPanel;
use magic_mr::selection::{bias_correct, build_bc_panel, passes_cutoff, select_instruments, HardSelection, SelectionConfig, SelectionOutcome};
use magic_mr::simulation::engine::{run_replicates, selection_seed, summarize_outcomes, ReplicateOutcome};
use magic_mr::simulation::{generate_observed, generate_truth, Dgp, SimConfig};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{gepp_solve, ks_pvalue, ks_statistic, rel_err};

pub type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A reduced DGP-1 design that keeps tens of instruments per set.
pub fn small_design(dgp: Dgp) -> SimConfig {
    SimConfig {
        p: 20_000,
        pi_x: 0.02,
        pi_delta: 0.02,
        ..SimConfig::new(dgp)
    }
}

pub struct Fitted {
    pub panel: HarmonizedPanel,
    pub sel: SelectionOutcome,
}

pub fn fitted_panel(cfg: &SimConfig, rep: u64) -> Fitted {
    let truth = generate_truth(cfg, rep).expect("valid design");
    let panel = generate_observed(&truth, cfg, rep);
    let sel_cfg = SelectionConfig::new(cfg.lambda_magic, cfg.eta, selection_seed(cfg.seed, rep)).unwrap();
    let sel = select_instruments(&panel, &sel_cfg).unwrap();
    Fitted { panel, sel }
}

/// β̂_bc(−β̂) = −β̂_bc(β̂) and ς̂ unchanged, with the branch recomputed from
/// the negated statistic and pseudo-noise.
pub fn bc_antisymmetry() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let cases = 20_000;
    for _ in 0..cases {
        let sigma = 10f64.powf(rng.random_range(-4.0..0.0));
        let t: f64 = rng.random_range(-9.0..9.0);
        let z: f64 = 0.5 * rng.sample::<f64, _>(StandardNormal);
        let lambda = if rng.random_bool(0.5) { 4.06 } else { 5.45 };
        let fwd = bias_correct(t * sigma, sigma, passes_cutoff(t, z, lambda), lambda, 0.5).unwrap();
        let rev = bias_correct(-t * sigma, sigma, passes_cutoff(-t, -z, lambda), lambda, 0.5).unwrap();
        let scale = fwd.beta_bc.abs().max(sigma);
        ensure((fwd.beta_bc + rev.beta_bc).abs() <= 1e-12 * scale, || format!("beta_bc not odd at t={t}, z={z}: {fwd:?} vs {rev:?}"))?;
        ensure(
            (fwd.varsigma - rev.varsigma).abs() <= 1e-12 * fwd.varsigma.abs().max(sigma * sigma),
            || format!("varsigma not even at t={t}: {fwd:?} vs {rev:?}"),
        )?;
    }
    Ok(format!("{cases} random (t, Z, sigma, lambda) cases"))
}

/// Common rescaling of σ_Y, or of σ_M, with selection and correction held
/// fixed, leaves the point estimates unchanged.
pub fn scale_equivariance() -> Check {
    let cfg = small_design(Dgp::Dgp1);
    let mut checked = 0;
    for rep in 0..5 {
        let f = fitted_panel(&cfg, rep);
        let bc = build_bc_panel(&f.panel, &f.sel).unwrap();
        let base = magic_estimate(&f.panel, &bc, &f.sel).unwrap();
        for c in [0.37, 3.1, 1e3] {
            let mut py = f.panel.clone();
            py.sigma_y.iter_mut().for_each(|s| *s *= c);
            let ey = magic_estimate(&py, &bc, &f.sel).unwrap();
            let mut pm = f.panel.clone();
            pm.sigma_m.iter_mut().for_each(|s| *s *= c);
            let em = magic_estimate(&pm, &bc, &f.sel).unwrap();
            for (name, a, b) in [
                ("theta|sigma_y", ey.theta_hat, base.theta_hat),
                ("tau_y|sigma_y", ey.tau_y_hat, base.tau_y_hat),
                ("tau_x|sigma_y", ey.tau_x_hat, base.tau_x_hat),
                ("theta|sigma_m", em.theta_hat, base.theta_hat),
                ("tau_y|sigma_m", em.tau_y_hat, base.tau_y_hat),
            ] {
                ensure(rel_err(a, b) <= 1e-10, || format!("{name} rep {rep} c {c}: {a} vs {b}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} comparisons at 1e-10 relative"))
}

/// Identical realized sets make plug-in and MAGIC coincide.
pub fn set_identity() -> Check {
    let cfg = small_design(Dgp::Dgp1);
    for rep in 0..5 {
        let f = fitted_panel(&cfg, rep);
        let mut sel = f.sel.clone();
        sel.in_sm = sel.in_sx.clone();
        let bc = build_bc_panel(&f.panel, &sel).unwrap();
        let a = magic_estimate(&f.panel, &bc, &sel).unwrap();
        let b = plug_in_estimate(&f.panel, &bc, &sel).unwrap();
        for (x, y) in [(a.theta_hat, b.theta_hat), (a.tau_y_hat, b.tau_y_hat), (a.tau_x_hat, b.tau_x_hat)] {
            ensure(rel_err(y, x) <= 1e-10, || format!("rep {rep}: plug-in {y} vs MAGIC {x}"))?;
        }
    }
    Ok("5 panels at 1e-10 relative".into())
}

/// V̂ exactly symmetric with min eigenvalue ≥ −1e-10 · trace.
pub fn covariance_psd(panels: u64) -> Check {
    let mut worst: f64 = f64::INFINITY;
    for rep in 0..panels {
        let cfg = small_design([Dgp::Dgp1, Dgp::Dgp2i, Dgp::Dgp3i][rep as usize % 3]);
        let f = fitted_panel(&cfg, rep);
        let bc = build_bc_panel(&f.panel, &f.sel).unwrap();
        let est = magic_estimate(&f.panel, &bc, &f.sel).map_err(|e| format!("rep {rep}: {e}"))?;
        let v = est.cov.expect("MAGIC reports V");
        ensure(v == v.transpose(), || format!("rep {rep}: V not symmetric"))?;
        let trace = v.trace();
        let min_eig = v.symmetric_eigen().eigenvalues.min();
        ensure(min_eig >= -1e-10 * trace, || format!("rep {rep}: min eigenvalue {min_eig:e}, trace {trace:e}"))?;
        worst = worst.min(min_eig / trace);
        let again = covariance_estimate(&f.panel, &bc, &f.sel, &est.effects()).unwrap();
        ensure(again == v, || format!("rep {rep}: covariance_estimate disagrees with magic_estimate"))?;
    }
    Ok(format!("{panels} panels, min eigenvalue/trace = {worst:.3e}"))
}

/// var_tau reproduced by an explicit quadratic form.
pub fn delta_method_consistency() -> Check {
    let cfg = small_design(Dgp::Dgp3i);
    for rep in 0..10 {
        let f = fitted_panel(&cfg, rep);
        let bc = build_bc_panel(&f.panel, &f.sel).unwrap();
        let est = magic_estimate(&f.panel, &bc, &f.sel).unwrap();
        let v = est.cov.unwrap();
        let c = [0.0, est.tau_x_hat, est.tau_y_hat];
        let mut q = 0.0;
        for j in 0..3 {
            let mut r = 0.0;
            for i in 0..3 {
                r += c[i] * v[(i, j)];
            }
            q += r * c[j];
        }
        let stored = est.var_tau.unwrap();
        ensure(q == stored, || format!("rep {rep}: quadratic form {q:e} vs stored {stored:e}"))?;
        ensure(delta_method_variance(&v, est.tau_x_hat, est.tau_y_hat) == stored, || "delta_method_variance mismatch".into())?;
    }
    Ok("10 panels, exact".into())
}

fn rows3(m: &Matrix3<f64>) -> Vec<Vec<f64>> {
    (0..3).map(|i| (0..3).map(|j| m[(i, j)]).collect()).collect()
}

/// 3×3 and 2×2 solves against pivoted elimination.
pub fn solver_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x501);
    let mut n = 0;
    for _ in 0..2_000 {
        let m = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0)) + Matrix3::identity() * 2.0;
        let b = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let (x, _) = guarded_solve(&m, &b).map_err(|e| e.to_string())?;
        let want = gepp_solve(rows3(&m), b.iter().copied().collect()).unwrap();
        for k in 0..3 {
            ensure((x[k] - want[k]).abs() <= 1e-10 * want[k].abs().max(1e-300), || format!("3x3 component {k}: {} vs {}", x[k], want[k]))?;
        }
        let m2 = Matrix2::from_fn(|_, _| rng.random_range(-1.0..1.0)) + Matrix2::identity() * 2.0;
        let b2 = Vector2::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let (x2, _) = guarded_solve(&m2, &b2).map_err(|e| e.to_string())?;
        let want2 = gepp_solve(vec![vec![m2[(0, 0)], m2[(0, 1)]], vec![m2[(1, 0)], m2[(1, 1)]]], vec![b2[0], b2[1]]).unwrap();
        for k in 0..2 {
            ensure(rel_err(x2[k], want2[k]) <= 1e-10, || format!("2x2 component {k}: {} vs {}", x2[k], want2[k]))?;
        }
        n += 2;
    }

    // The estimators' own systems, assembled here by plain summation.
    let cfg = small_design(Dgp::Dgp1);
    for rep in 0..5 {
        let f = fitted_panel(&cfg, rep);
        let bc = build_bc_panel(&f.panel, &f.sel).unwrap();
        let (m, rhs) = magic_system(&f.panel, &bc, &f.sel).unwrap();
        let est = magic_estimate(&f.panel, &bc, &f.sel).unwrap();
        let want = gepp_solve(rows3(&m), rhs.iter().copied().collect()).unwrap();
        for (got, w) in [est.theta_hat, est.tau_y_hat, est.tau_x_hat].into_iter().zip(want) {
            ensure(rel_err(got, w) <= 1e-10, || format!("MAGIC rep {rep}: {got} vs {w}"))?;
        }

        let truth = generate_truth(&cfg, rep).unwrap();
        let sets = HardSelection::from_flags(truth.in_sx_star.clone(), truth.in_sm_star.clone());
        let p = &f.panel;
        let (mut a, mut b) = ([[0.0; 2]; 2], [0.0; 2]);
        for j in 0..p.len() {
            let w = 1.0 / (p.sigma_y[j] * p.sigma_y[j]);
            if sets.in_sx[j] {
                a[0][0] += (p.beta_x[j] * p.beta_x[j] - p.sigma_x[j] * p.sigma_x[j]) * w;
                a[0][1] += p.beta_x[j] * p.beta_m[j] * w;
                b[0] += p.beta_y[j] * p.beta_x[j] * w;
            }
            if sets.in_sm[j] {
                a[1][0] += p.beta_x[j] * p.beta_m[j] * w;
                a[1][1] += (p.beta_m[j] * p.beta_m[j] - p.sigma_m[j] * p.sigma_m[j]) * w;
                b[1] += p.beta_y[j] * p.beta_m[j] * w;
            }
        }
        let want = gepp_solve(a.iter().map(|r| r.to_vec()).collect(), b.to_vec()).unwrap();
        let got = oracle_magic(p, &sets).unwrap();
        ensure(rel_err(got.theta_hat, want[0]) <= 1e-10 && rel_err(got.tau_y_hat, want[1]) <= 1e-10, || {
            format!("oracle MAGIC rep {rep}: ({}, {}) vs {want:?}", got.theta_hat, got.tau_y_hat)
        })?;
        n += 2;
    }
    Ok(format!("{n} systems at 1e-10 relative"))
}

/// Same seed gives a bit-identical selection; replicate results do not depend
/// on the worker count.
pub fn seed_determinism() -> Check {
    let cfg = small_design(Dgp::Dgp1);
    let f1 = fitted_panel(&cfg, 3);
    let f2 = fitted_panel(&cfg, 3);
    ensure(f1.sel == f2.sel, || "selection differs between identical calls".into())?;

    let cfg = SimConfig { reps: 12, ..small_design(Dgp::Dgp3i) };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_replicates(&cfg).unwrap())
    };
    let (one, four) = (run(1), run(4));
    ensure(one == four, || "replicate outcomes differ between 1 and 4 threads".into())?;
    ensure(summarize_outcomes(&cfg, &one) == summarize_outcomes(&cfg, &four), || "reports differ".into())?;
    Ok("selection and 12-replicate study identical across 1 and 4 threads".into())
}

/// BH output is monotone in the input order, never below the raw p-value and
/// never above one.
pub fn bh_monotonicity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB4);
    for case in 0..2_000 {
        let m = rng.random_range(1..60);
        let p: Vec<f64> = (0..m)
            .map(|_| if rng.random_bool(0.2) { rng.random_range(0.0..1e-4) } else { rng.random::<f64>() })
            .collect();
        let q = bh_adjust(&p).unwrap();
        for i in 0..m {
            ensure(q[i] >= p[i] && q[i] <= 1.0, || format!("case {case}: q {} outside [p {}, 1]", q[i], p[i]))?;
            for j in 0..m {
                if p[i] < p[j] {
                    ensure(q[i] <= q[j], || format!("case {case}: order violated"))?;
                }
            }
        }
    }
    Ok("2000 random vectors".into())
}

/// Exports a DGP-1 replicate to GWAS files, runs the binary, and compares the
/// MAGIC rows with the library call bit for bit.
pub fn cli_library_equivalence(bin: &Path) -> Check {
    let cfg = small_design(Dgp::Dgp1);
    let truth = generate_truth(&cfg, 0).unwrap();
    let panel = generate_observed(&truth, &cfg, 0);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let names = ["exposure.tsv", "mediator.tsv", "outcome.tsv"];
    for (file, name) in panel_to_gwas(&panel).iter().zip(names) {
        write_gwas(&dir.path().join(name), file).map_err(|e| e.to_string())?;
    }
    let seed = 20_240_917u64;
    let out_path = dir.path().join("report.json");
    let status = Command::new(bin)
        .args(["analyze", "--no-harmonize", "--methods", "magic", "--format", "json", "--seed", &seed.to_string()])
        .arg("--exposure")
        .arg(dir.path().join(names[0]))
        .arg("--mediator")
        .arg(dir.path().join(names[1]))
        .arg("--outcome")
        .arg(dir.path().join(names[2]))
        .arg("--out")
        .arg(&out_path)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || format!("CLI failed: {}", String::from_utf8_lossy(&status.stderr)))?;
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;

    let sel = select_instruments(&panel, &SelectionConfig::new(4.06, 0.5, seed).unwrap()).unwrap();
    let bc = build_bc_panel(&panel, &sel).unwrap();
    let lib = EstimatorReport::from_magic(Method::Magic, &magic_estimate(&panel, &bc, &sel).unwrap());
    let rows = json["rows"].as_array().ok_or("no rows")?;
    ensure(rows.len() == 4, || format!("expected 4 rows, got {}", rows.len()))?;
    for parameter in [Parameter::Theta, Parameter::TauY, Parameter::TauX, Parameter::Tau] {
        let want = lib.row(parameter).unwrap();
        let got = rows.iter().find(|r| r["parameter"] == parameter.tag()).ok_or("missing parameter")?;
        let field = |k: &str| got[k].as_f64();
        ensure(field("estimate") == Some(want.estimate), || format!("{}: estimate {:?} vs {}", parameter.tag(), field("estimate"), want.estimate))?;
        ensure(field("std_error") == want.std_error, || format!("{}: std_error differs", parameter.tag()))?;
        ensure(field("p") == want.p_value, || format!("{}: p differs", parameter.tag()))?;
    }
    Ok("MAGIC rows identical to the library call".into())
}

/// (θ̂ − θ)/√V̂₁₁ over DGP-1 replicates against N(0, 1).
pub fn ks_theta_z(outcomes: &[ReplicateOutcome], theta: f64) -> Check {
    let z: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.magic.as_ref())
        .map(|e| (e.theta_hat - theta) / e.cov.unwrap()[(0, 0)].sqrt())
        .collect();
    let d = ks_statistic(&z);
    let p = ks_pvalue(d, z.len());
    ensure(p >= 0.01, || format!("KS D = {d:.4}, p = {p:.4} over {} replicates", z.len()))?;
    Ok(format!("KS D = {d:.4}, p = {p:.3} over {} replicates", z.len()))
}
