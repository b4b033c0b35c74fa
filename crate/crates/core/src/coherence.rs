//! Dephasing maps and the internal / external / total coherence measures.
//!
//! `Δ` keeps only the diagonal in the energy basis; `D` keeps the blocks of
//! equal energy. With `S` the von Neumann entropy:
//!
//! * `C_int(ρ) = S(Δ(ρ)) - S(D(ρ))`
//! * `C_ext(ρ) = S(D(ρ)) - S(ρ)`
//! * `C_tot(ρ) = S(ρ‖Δ(ρ))`, which equals `C_int + C_ext`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    entropy_from_spectrum, partial_trace, relative_entropy, spectrum_unchecked,
    von_neumann_entropy, ComplexMatrix, DensityOperator, Keep, C64,
};

/// Values in `(-NEGATIVE_NOISE, 0)` are reported as zero.
pub const NEGATIVE_NOISE: f64 = 1e-9;

fn clamp_noise(x: f64) -> f64 {
    if x < 0.0 && x > -NEGATIVE_NOISE {
        0.0
    } else {
        x
    }
}

/// Internal, external and total coherence in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub c_int: f64,
    pub c_ext: f64,
    pub c_tot: f64,
}

impl CoherenceReport {
    /// `|c_tot - (c_int + c_ext)|`.
    pub fn decomposition_residual(&self) -> f64 {
        (self.c_tot - self.c_int - self.c_ext).abs()
    }
}

pub fn fully_dephase(rho: &DensityOperator) -> DensityOperator {
    let n = rho.dim();
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(rho.matrix()[(i, i)].re, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityOperator::from_valid(m, rho.basis().clone())
}

pub fn block_dephase(rho: &DensityOperator) -> DensityOperator {
    let labels = rho.basis().labels();
    let m = rho.matrix();
    let n = rho.dim();
    let out = ComplexMatrix::from_fn(n, n, |i, j| {
        if labels[i] == labels[j] {
            m[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityOperator::from_valid(out, rho.basis().clone())
}

/// `S(D(ρ))`, diagonalizing each energy block on its own.
pub fn block_dephased_entropy(rho: &DensityOperator) -> f64 {
    let m = rho.matrix();
    rho.basis()
        .blocks()
        .iter()
        .map(|(_, idx)| {
            if idx.len() == 1 {
                entropy_from_spectrum([m[(idx[0], idx[0])].re])
            } else {
                let block =
                    ComplexMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
                entropy_from_spectrum(spectrum_unchecked(&block))
            }
        })
        .sum()
}

/// `S(Δ(ρ))`: Shannon entropy of the populations.
pub fn dephased_entropy(rho: &DensityOperator) -> f64 {
    entropy_from_spectrum(rho.populations())
}

pub fn coherence_report(rho: &DensityOperator) -> Result<CoherenceReport> {
    let s_full_dephased = dephased_entropy(rho);
    let s_block = block_dephased_entropy(rho);
    let s = von_neumann_entropy(rho);
    let c_tot = relative_entropy(rho, &fully_dephase(rho))?;
    Ok(CoherenceReport {
        c_int: clamp_noise(s_full_dephased - s_block),
        c_ext: clamp_noise(s_block - s),
        c_tot: clamp_noise(c_tot),
    })
}

pub fn internal_coherence(rho: &DensityOperator) -> f64 {
    clamp_noise(dephased_entropy(rho) - block_dephased_entropy(rho))
}

pub fn external_coherence(rho: &DensityOperator) -> f64 {
    clamp_noise(block_dephased_entropy(rho) - von_neumann_entropy(rho))
}

/// `C_ext(ρ_SB) - C_ext(ρ_S) - C_ext(ρ_B)`, with the reduced states obtained
/// by partial traces of `rho_sb` (system factor major).
pub fn correlated_external_coherence(
    rho_sb: &DensityOperator,
    dim_s: usize,
    dim_b: usize,
) -> Result<f64> {
    if dim_s * dim_b != rho_sb.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim_s * dim_b,
            actual: rho_sb.dim(),
        });
    }
    let rho_s = partial_trace(rho_sb, dim_s, dim_b, Keep::A)?;
    let rho_b = partial_trace(rho_sb, dim_s, dim_b, Keep::B)?;
    Ok(clamp_noise(
        external_coherence(rho_sb) - external_coherence(&rho_s) - external_coherence(&rho_b),
    ))
}
