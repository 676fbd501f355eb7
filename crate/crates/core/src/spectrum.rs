use serde::Serialize;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::svd::compute_svd;

/// Singular spectrum of an embedding matrix with cumulative energy, to help
/// pick a subspace rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub singular_values: Vec<f64>,
    /// `energy_fraction[i]` is the share of `sum sigma^2` captured by the
    /// first `i + 1` singular values.
    pub energy_fraction: Vec<f64>,
    /// `sigma_i / sigma_{i+1}`; `None` where the next value is zero.
    pub gap_ratios: Vec<Option<f64>>,
    pub suggested_ranks: SuggestedRanks,
}

/// Smallest ranks reaching 90, 95 and 99 percent of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuggestedRanks {
    pub energy_90: usize,
    pub energy_95: usize,
    pub energy_99: usize,
}

impl SpectrumReport {
    pub fn rank_for_energy(&self, fraction: f64) -> usize {
        self.energy_fraction
            .iter()
            .position(|&e| e >= fraction)
            .map_or(self.energy_fraction.len(), |i| i + 1)
    }
}

pub fn spectrum_report(matrix: &EmbeddingMatrix) -> Result<SpectrumReport> {
    if matrix.is_all_zero() {
        return Err(Error::ZeroMatrix);
    }
    let svd = compute_svd(matrix)?;
    let singular_values = svd.singular_values().to_vec();

    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    let mut running = 0.0;
    let energy_fraction = singular_values
        .iter()
        .map(|s| {
            running += s * s;
            running / total
        })
        .collect();
    let gap_ratios = singular_values
        .windows(2)
        .map(|w| (w[1] > 0.0).then(|| w[0] / w[1]))
        .collect();

    let mut report = SpectrumReport {
        singular_values,
        energy_fraction,
        gap_ratios,
        suggested_ranks: SuggestedRanks {
            energy_90: 0,
            energy_95: 0,
            energy_99: 0,
        },
    };
    report.suggested_ranks = SuggestedRanks {
        energy_90: report.rank_for_energy(0.90),
        energy_95: report.rank_for_energy(0.95),
        energy_99: report.rank_for_energy(0.99),
    };
    Ok(report)
}
