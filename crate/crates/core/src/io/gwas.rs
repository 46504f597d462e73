//! Tab-delimited GWAS summary statistics.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GwasRow {
    pub snp: String,
    pub effect_allele: Option<char>,
    pub other_allele: Option<char>,
    pub beta: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GwasFile {
    pub rows: Vec<GwasRow>,
    /// Whether the file carried both allele columns.
    pub has_alleles: bool,
}

struct Columns {
    snp: usize,
    beta: usize,
    se: usize,
    effect: Option<usize>,
    other: Option<usize>,
}

fn locate(header: &csv::StringRecord, path: &Path) -> Result<Columns> {
    let find = |name: &str| header.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let required = |name: &str| {
        find(name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing required column '{name}'"),
        })
    };
    let cols = Columns {
        snp: required("snp")?,
        beta: required("beta")?,
        se: required("se")?,
        effect: find("effect_allele"),
        other: find("other_allele"),
    };
    if cols.effect.is_some() != cols.other.is_some() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "effect_allele and other_allele must be given together".into(),
        });
    }
    Ok(cols)
}

fn parse_allele(field: &str) -> Option<char> {
    let mut chars = field.trim().chars();
    let c = chars.next()?.to_ascii_uppercase();
    (chars.next().is_none() && matches!(c, 'A' | 'C' | 'G' | 'T')).then_some(c)
}

/// Reads a GWAS file with a header naming at least `snp`, `beta` and `se`
/// (any case, any order). Allele columns are optional.
pub fn read_gwas(path: &Path) -> Result<GwasFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .flexible(false)
        .from_reader(std::io::BufReader::new(file));
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = locate(&header, path)?;
    let mut out = GwasFile {
        rows: Vec::new(),
        has_alleles: cols.effect.is_some(),
    };
    let mut seen = std::collections::HashMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fail = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let snp = record[cols.snp].trim().to_string();
        if snp.is_empty() {
            return Err(fail("empty snp identifier".into()));
        }
        let number = |idx: usize, name: &str| -> Result<f64> {
            let raw = record[idx].trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fail(format!("column '{name}': '{raw}' is not a finite number")))
        };
        let beta = number(cols.beta, "beta")?;
        let se = number(cols.se, "se")?;
        if se <= 0.0 {
            return Err(fail(format!("se must be > 0, got {se} for {snp}")));
        }
        let (effect_allele, other_allele) = match (cols.effect, cols.other) {
            (Some(e), Some(o)) => {
                let ea = parse_allele(&record[e]).ok_or_else(|| fail(format!("invalid effect_allele '{}'", &record[e])))?;
                let oa = parse_allele(&record[o]).ok_or_else(|| fail(format!("invalid other_allele '{}'", &record[o])))?;
                (Some(ea), Some(oa))
            }
            _ => (None, None),
        };
        if let Some(first) = seen.insert(snp.clone(), line) {
            return Err(fail(format!("duplicate snp '{snp}' (first seen on line {first})")));
        }
        out.rows.push(GwasRow {
            snp,
            effect_allele,
            other_allele,
            beta,
            se,
        });
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: match kind {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("expected {expected_len} fields, found {len}")
                }
                csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".into(),
                other => format!("{other:?}"),
            },
        },
    }
}

/// Writes a file `read_gwas` reads back to identical values; numbers use the
/// shortest round-trip representation.
pub fn write_gwas(path: &Path, gwas: &GwasFile) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(|e| csv_write_error(path, e))?;
    let alleles = gwas.has_alleles;
    let header: &[&str] = if alleles {
        &["snp", "effect_allele", "other_allele", "beta", "se"]
    } else {
        &["snp", "beta", "se"]
    };
    w.write_record(header).map_err(|e| csv_write_error(path, e))?;
    for row in &gwas.rows {
        let (beta, se) = (row.beta.to_string(), row.se.to_string());
        let rec: Vec<String> = if alleles {
            let a = |c: Option<char>| c.map(String::from).unwrap_or_default();
            vec![row.snp.clone(), a(row.effect_allele), a(row.other_allele), beta, se]
        } else {
            vec![row.snp.clone(), beta, se]
        };
        w.write_record(&rec).map_err(|e| csv_write_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_write_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}
