//! Joins three GWAS files on SNP id and aligns effect alleles to the exposure.
//!
//! Policy: palindromic SNPs (A/T, C/G) are dropped; a mediator or outcome row
//! matches when its allele pair equals the exposure pair, possibly swapped
//! (beta negated) and possibly on the opposite strand.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::gwas::{GwasFile, GwasRow};
use crate::panel::{HarmonizedPanel, SnpTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnpAction {
    Kept,
    Flipped,
    DroppedMissing,
    DroppedPalindromic,
    DroppedAlleleMismatch,
}

impl SnpAction {
    pub fn tag(self) -> &'static str {
        match self {
            SnpAction::Kept => "kept",
            SnpAction::Flipped => "flipped",
            SnpAction::DroppedMissing => "dropped-missing",
            SnpAction::DroppedPalindromic => "dropped-palindromic",
            SnpAction::DroppedAlleleMismatch => "dropped-allele-mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogEntry {
    pub snp: String,
    pub action: SnpAction,
    pub flipped_mediator: bool,
    pub flipped_outcome: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HarmonizationLog {
    pub entries: Vec<LogEntry>,
}

impl HarmonizationLog {
    pub fn count(&self, action: SnpAction) -> usize {
        self.entries.iter().filter(|e| e.action == action).count()
    }

    pub fn flipped_mediator(&self) -> usize {
        self.entries.iter().filter(|e| e.flipped_mediator).count()
    }

    pub fn flipped_outcome(&self) -> usize {
        self.entries.iter().filter(|e| e.flipped_outcome).count()
    }
}

fn complement(a: char) -> char {
    match a {
        'A' => 'T',
        'T' => 'A',
        'C' => 'G',
        'G' => 'C',
        other => other,
    }
}

fn palindromic(e: char, o: char) -> bool {
    complement(e) == o
}

/// Orientation of `row` relative to the exposure pair: `Some(false)` aligned,
/// `Some(true)` swapped, `None` incompatible.
fn orientation(exp: (char, char), row: &GwasRow) -> Option<bool> {
    let pair = (row.effect_allele?, row.other_allele?);
    let comp = (complement(pair.0), complement(pair.1));
    if pair == exp || comp == exp {
        Some(false)
    } else if (pair.1, pair.0) == exp || (comp.1, comp.0) == exp {
        Some(true)
    } else {
        None
    }
}

/// Inner join in exposure-file order. With `align = false` betas are taken
/// as given and alleles are ignored.
pub fn harmonize(exposure: &GwasFile, mediator: &GwasFile, outcome: &GwasFile, align: bool) -> Result<(HarmonizedPanel, HarmonizationLog)> {
    if align {
        for (name, f) in [("exposure", exposure), ("mediator", mediator), ("outcome", outcome)] {
            if !f.has_alleles && !f.rows.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "{name} file has no allele columns; supply effect_allele/other_allele or disable harmonization"
                )));
            }
        }
    }
    let index = |f: &GwasFile| -> HashMap<String, usize> { f.rows.iter().enumerate().map(|(i, r)| (r.snp.clone(), i)).collect() };
    let (med_idx, out_idx) = (index(mediator), index(outcome));
    let mut panel = HarmonizedPanel::default();
    let mut log = HarmonizationLog::default();

    for x in &exposure.rows {
        let entry = |action, detail: &str| LogEntry {
            snp: x.snp.clone(),
            action,
            flipped_mediator: false,
            flipped_outcome: false,
            detail: detail.to_string(),
        };
        let (m, y) = match (med_idx.get(&x.snp), out_idx.get(&x.snp)) {
            (Some(&i), Some(&k)) => (&mediator.rows[i], &outcome.rows[k]),
            (None, _) => {
                log.entries.push(entry(SnpAction::DroppedMissing, "absent from mediator"));
                continue;
            }
            (_, None) => {
                log.entries.push(entry(SnpAction::DroppedMissing, "absent from outcome"));
                continue;
            }
        };
        let (mut flip_m, mut flip_y) = (false, false);
        if align {
            let exp = (x.effect_allele.expect("checked"), x.other_allele.expect("checked"));
            if exp.0 == exp.1 {
                log.entries.push(entry(SnpAction::DroppedAlleleMismatch, "exposure alleles identical"));
                continue;
            }
            if palindromic(exp.0, exp.1) {
                log.entries.push(entry(SnpAction::DroppedPalindromic, &format!("{}/{}", exp.0, exp.1)));
                continue;
            }
            match (orientation(exp, m), orientation(exp, y)) {
                (Some(a), Some(b)) => (flip_m, flip_y) = (a, b),
                (None, _) => {
                    log.entries.push(entry(SnpAction::DroppedAlleleMismatch, "mediator alleles incompatible"));
                    continue;
                }
                (_, None) => {
                    log.entries.push(entry(SnpAction::DroppedAlleleMismatch, "outcome alleles incompatible"));
                    continue;
                }
            }
        }
        let sign = |flip: bool| if flip { -1.0 } else { 1.0 };
        panel.push(
            x.snp.clone(),
            SnpTriple {
                beta_x: x.beta,
                sigma_x: x.se,
                beta_m: sign(flip_m) * m.beta,
                sigma_m: m.se,
                beta_y: sign(flip_y) * y.beta,
                sigma_y: y.se,
            },
        );
        log.entries.push(LogEntry {
            snp: x.snp.clone(),
            action: if flip_m || flip_y { SnpAction::Flipped } else { SnpAction::Kept },
            flipped_mediator: flip_m,
            flipped_outcome: flip_y,
            detail: String::new(),
        });
    }
    if panel.is_empty() {
        return Err(Error::NoCommonSnps);
    }
    panel.validate()?;
    Ok((panel, log))
}
