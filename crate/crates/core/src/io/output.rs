//! JSON and TSV serialization of analysis and simulation reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::AnalysisOutput;
use crate::error::{Error, Result};
use crate::io::harmonize::HarmonizationLog;
use crate::simulation::SimReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Tsv,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn json_line<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

pub fn write_analysis<W: Write>(mut w: W, out: &AnalysisOutput, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => json_line(w, out),
        Format::Tsv => {
            writeln!(w, "method\tparameter\testimate\tstd_error\tz\tp\tp_bh\tci_low\tci_high")?;
            for r in &out.rows {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.method,
                    r.parameter,
                    r.estimate,
                    cell(r.std_error),
                    cell(r.z),
                    cell(r.p),
                    cell(r.p_bh),
                    cell(r.ci_low),
                    cell(r.ci_high)
                )?;
            }
            Ok(())
        }
    }
}

pub fn write_sim_reports<W: Write>(mut w: W, reports: &[SimReport], format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => json_line(w, reports),
        Format::Tsv => {
            writeln!(w, "dgp\treps\tseed\ttheta\ttau_y\ttau_x\tmethod\tparameter\ttruth\tn_effective\tmean\tbias\tmcsd\tpower\tcoverage")?;
            for rep in reports {
                for r in &rep.rows {
                    writeln!(
                        w,
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                        rep.dgp,
                        rep.reps,
                        rep.seed,
                        rep.theta,
                        rep.tau_y,
                        rep.tau_x,
                        r.method,
                        r.parameter.tag(),
                        r.truth,
                        r.n_effective,
                        r.mean,
                        r.bias,
                        cell(r.mcsd),
                        cell(r.power),
                        cell(r.coverage)
                    )?;
                }
            }
            Ok(())
        }
    }
}

pub fn write_harmonization_log(path: &Path, log: &HarmonizationLog) -> Result<()> {
    let write = || -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "snp\taction\tflipped_mediator\tflipped_outcome\tdetail")?;
        for e in &log.entries {
            writeln!(w, "{}\t{}\t{}\t{}\t{}", e.snp, e.action.tag(), e.flipped_mediator, e.flipped_outcome, e.detail)?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Writes to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).and_then(|_| lock.flush()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}
