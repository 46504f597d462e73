//! GWAS file ingestion, harmonization and report serialization.

pub mod gwas;
pub mod harmonize;
pub mod output;

pub use gwas::{read_gwas, write_gwas, GwasFile, GwasRow};
pub use harmonize::{harmonize, HarmonizationLog, SnpAction};
pub use output::Format;

use crate::panel::HarmonizedPanel;

/// Splits a panel into exposure, mediator and outcome files without allele
/// columns. Reading them back with harmonization disabled reproduces the panel.
pub fn panel_to_gwas(panel: &HarmonizedPanel) -> [GwasFile; 3] {
    let file = |beta: &[f64], se: &[f64]| GwasFile {
        rows: panel
            .ids
            .iter()
            .zip(beta.iter().zip(se))
            .map(|(id, (&b, &s))| GwasRow {
                snp: id.clone(),
                effect_allele: None,
                other_allele: None,
                beta: b,
                se: s,
            })
            .collect(),
        has_alleles: false,
    };
    [
        file(&panel.beta_x, &panel.sigma_x),
        file(&panel.beta_m, &panel.sigma_m),
        file(&panel.beta_y, &panel.sigma_y),
    ]
}
