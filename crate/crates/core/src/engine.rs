//! N-copy activation and the thermodynamic bookkeeping of one engine cycle.
//!
//! Units: `k_B = ħ = 1`, energies in units of `ω₀`. Work is
//! `W_coh = C_int(ρ_S^{⊗N})/(βω₀)`, input coherence flow is
//! `Q_in = N·S(ρ_B(t))/(βω₀)` and the efficiency is their ratio.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::charging::{
    charged_qubit_state, evolve_joint, gibbs_qubit, qubit_partition, truncated_gibbs_bath,
    BathSpec, ChargeResult, SeriesConvention,
};
use crate::coherence::{
    correlated_external_coherence, external_coherence, fully_dephase, NEGATIVE_NOISE,
};
use crate::error::{invalid, Error, Result};
use crate::operator::{
    entropy_from_spectrum, hermitian_eigensystem, partial_trace, relative_entropy, ComplexMatrix,
    DensityOperator, EnergyBasis, Keep, C64,
};

/// Default cap on the number of copies; `2^N`-dimensional states are dense.
pub const DEFAULT_MAX_QUBITS: usize = 12;
/// Below this bath entropy the efficiency is reported as zero.
pub const EMPTY_BATH_ENTROPY: f64 = 1e-12;
/// Default central-difference step in `gt`.
pub const DEFAULT_RATE_STEP: f64 = 1e-4;

/// `C_int(ρ^{⊗N})` for a qubit state `ρ`.
///
/// The dephased N-copy state splits into Hamming-weight blocks (energy label
/// `2k - N`). Within block `k` the entry between bit strings `x`, `y` with
/// `j` positions where `x` has a 1 and `y` a 0 is
/// `ρ₀₀^{N-k-j} ρ₁₁^{k-j} |ρ₀₁|^{2j}`, so every block is real symmetric.
pub fn activated_internal_coherence(
    rho_s: &DensityOperator,
    n: usize,
    max_qubits: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if n > max_qubits {
        return Err(Error::TooManyQubits {
            requested: n,
            max: max_qubits,
        });
    }
    if rho_s.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho_s.dim(),
        });
    }
    let m = rho_s.matrix();
    let (p0, p1, coh) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)].norm_sqr());
    let s_dephased = n as f64 * entropy_from_spectrum([p0, p1]);
    let s_blocks = hamming_block_entropy(n, p0, p1, coh);
    let c = s_dephased - s_blocks;
    Ok(if c < 0.0 && c > -NEGATIVE_NOISE {
        0.0
    } else {
        c
    })
}

fn hamming_block_entropy(n: usize, p0: f64, p1: f64, coh: f64) -> f64 {
    if coh == 0.0 {
        // Diagonal blocks: the N-copy populations themselves.
        return n as f64 * entropy_from_spectrum([p0, p1]);
    }
    let mut by_weight: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for x in 0u32..(1u32 << n) {
        by_weight[x.count_ones() as usize].push(x);
    }
    by_weight
        .iter()
        .enumerate()
        .map(|(k, states)| {
            let dim = states.len();
            // Entry by number j of (1, 0) mismatches.
            let table: Vec<f64> = (0..=k.min(n - k))
                .map(|j| p0.powi((n - k - j) as i32) * p1.powi((k - j) as i32) * coh.powi(j as i32))
                .collect();
            if dim == 1 {
                return entropy_from_spectrum([table[0]]);
            }
            let block = DMatrix::from_fn(dim, dim, |a, b| {
                let j = (states[a] & !states[b]).count_ones() as usize;
                table[j]
            });
            entropy_from_spectrum(block.symmetric_eigenvalues().iter().copied())
        })
        .sum()
}

/// One operating point of the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineOperatingPoint {
    pub n_qubits: usize,
    pub beta_omega0: f64,
    pub gt: f64,
    pub bath: BathSpec,
    pub max_qubits: usize,
    pub convention: SeriesConvention,
}

impl EngineOperatingPoint {
    pub fn new(n_qubits: usize, beta_omega0: f64, gt: f64, acc: f64) -> Result<Self> {
        Self::with_max_qubits(n_qubits, beta_omega0, gt, acc, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max_qubits(
        n_qubits: usize,
        beta_omega0: f64,
        gt: f64,
        acc: f64,
        max_qubits: usize,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(invalid("n_qubits", "must be at least 1"));
        }
        if n_qubits > max_qubits {
            return Err(Error::TooManyQubits {
                requested: n_qubits,
                max: max_qubits,
            });
        }
        if !(gt.is_finite() && gt >= 0.0) {
            return Err(invalid("gt", "must be finite and non-negative"));
        }
        Ok(Self {
            n_qubits,
            beta_omega0,
            gt,
            bath: BathSpec::new(beta_omega0, acc)?,
            max_qubits,
            convention: SeriesConvention::WithPrefactor,
        })
    }
}

/// Engine metrics at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclePerformance {
    pub n_qubits: usize,
    pub beta_omega0: f64,
    pub gt: f64,
    /// `C_ext(ρ_S)` of one charged qubit.
    pub c_ext_per_qubit: f64,
    /// `C_tot(ρ_S)` of one charged qubit.
    pub c_tot_per_qubit: f64,
    /// `C_int(ρ_S^{⊗N})`.
    pub c_int_total: f64,
    /// `S(ρ_B(t))` per charging event.
    pub s_bath: f64,
    pub w_coh: f64,
    pub q_in: f64,
    pub eta: f64,
}

pub fn cycle_performance(op: &EngineOperatingPoint) -> Result<CyclePerformance> {
    let charge = charged_qubit_state(&op.bath, op.gt, op.convention)?;
    performance_from_state(
        op.n_qubits,
        op.beta_omega0,
        op.gt,
        &charge.rho_s,
        charge.bath_entropy(),
        op.max_qubits,
    )
}

/// Metrics from an already charged qubit and the bath entropy it left.
pub fn performance_from_state(
    n_qubits: usize,
    beta_omega0: f64,
    gt: f64,
    rho_s: &DensityOperator,
    s_bath: f64,
    max_qubits: usize,
) -> Result<CyclePerformance> {
    let c_int_total = activated_internal_coherence(rho_s, n_qubits, max_qubits)?;
    let c_ext_per_qubit = external_coherence(rho_s);
    let c_tot_per_qubit = relative_entropy(rho_s, &fully_dephase(rho_s))?.max(0.0);
    let n = n_qubits as f64;
    let eta = if s_bath <= EMPTY_BATH_ENTROPY {
        0.0
    } else {
        c_int_total / (n * s_bath)
    };
    Ok(CyclePerformance {
        n_qubits,
        beta_omega0,
        gt,
        c_ext_per_qubit,
        c_tot_per_qubit,
        c_int_total,
        s_bath,
        w_coh: c_int_total / beta_omega0,
        q_in: n * s_bath / beta_omega0,
        eta,
    })
}

/// `ΔC_ext(ρ_B) = C_ext(ρ_B(t)) - C_ext(|γ_B⟩⟨γ_B|)`, from the evolved bath
/// populations and spectrum. The bath is nondegenerate, so `C_ext = S(Δ) - S`.
pub fn bath_coherence_change(charge: &ChargeResult) -> f64 {
    let after = entropy_from_spectrum(charge.joint.bath_populations()) - charge.bath_entropy();
    let before = entropy_from_spectrum(truncated_gibbs_bath(&charge.spec));
    after - before
}

/// `|γ_S⟩ = (|0⟩ + e^{-βω₀/2}|1⟩)/√Z_S`; `βω₀ = 0` is allowed.
pub fn maximally_coherent_qubit(beta_omega0: f64) -> Result<DensityOperator> {
    if beta_omega0.is_nan() || beta_omega0 < 0.0 {
        return Err(invalid("beta_omega0", "must be non-negative"));
    }
    let z = qubit_partition(beta_omega0).sqrt();
    DensityOperator::pure(
        &[
            C64::new(1.0 / z, 0.0),
            C64::new((-0.5 * beta_omega0).exp() / z, 0.0),
        ],
        EnergyBasis::qubit(),
    )
}

/// `C_int(|γ_S⟩⟨γ_S|^{⊗N})/N` from the binomial Boltzmann block weights:
/// the state is pure, so each dephased block is rank one.
pub fn maximally_coherent_benchmark(beta_omega0: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if beta_omega0.is_nan() || beta_omega0 < 0.0 {
        return Err(invalid("beta_omega0", "must be non-negative"));
    }
    let p1 = (-beta_omega0).exp() / qubit_partition(beta_omega0);
    let p0 = 1.0 - p1;
    let weights = (0..=n).map(|k| binomial(n, k) * p1.powi(k as i32) * p0.powi((n - k) as i32));
    let total = n as f64 * entropy_from_spectrum([p0, p1]) - entropy_from_spectrum(weights);
    Ok((total / n as f64).max(0.0))
}

/// Same quantity through the full `2^N` state and the generic coherence
/// measures; used to cross-check the block formula.
pub fn maximally_coherent_benchmark_dense(beta_omega0: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let one = maximally_coherent_qubit(beta_omega0)?;
    let mut state = one.clone();
    for _ in 1..n {
        state = crate::operator::tensor_product(&state, &one);
    }
    Ok(crate::coherence::coherence_report(&state)?.c_int / n as f64)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Finite-difference rates at one point, per unit `gt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `Φ_S = β Tr[ρ̇_S H_S]`.
    pub heat_rate: f64,
    /// `Π_S = -Tr[ρ̇_S (ln ρ_S - ln γ_S)]`.
    pub entropy_production: f64,
    /// `d C_tot(ρ_S)/d(gt)`.
    pub coherence_change_rate: f64,
}

impl RateReport {
    /// `|Π_S + Ċ_tot|` relative to `|Ċ_tot|`.
    pub fn identity_residual(&self) -> f64 {
        let scale = self
            .coherence_change_rate
            .abs()
            .max(self.entropy_production.abs());
        let diff = (self.entropy_production + self.coherence_change_rate).abs();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

pub fn rate_checks(beta_omega0: f64, gt: f64, h: f64) -> Result<RateReport> {
    if h.is_nan() || h <= 0.0 {
        return Err(invalid("h", "step must be positive"));
    }
    if gt.is_nan() || gt <= h {
        return Err(invalid("gt", "must exceed the step h"));
    }
    let spec = BathSpec::new(beta_omega0, crate::charging::DEFAULT_ACC)?;
    let gibbs = gibbs_qubit(beta_omega0);
    let at = |x: f64| -> Result<DensityOperator> {
        Ok(evolve_joint(&gibbs, &spec, x)?.reduced_system())
    };
    let (minus, mid, plus) = (at(gt - h)?, at(gt)?, at(gt + h)?);
    let rate = (plus.matrix() - minus.matrix()).map(|z| z / (2.0 * h));

    // H_S / ω₀ = diag(-1/2, +1/2).
    let heat_rate = beta_omega0 * 0.5 * (rate[(1, 1)].re - rate[(0, 0)].re);

    let log_rho =
        hermitian_eigensystem(mid.matrix())?.map_spectrum(|l| C64::new(l.max(1e-300).ln(), 0.0));
    let z = qubit_partition(beta_omega0);
    let mut log_gibbs = ComplexMatrix::zeros(2, 2);
    log_gibbs[(0, 0)] = C64::new(-z.ln(), 0.0);
    log_gibbs[(1, 1)] = C64::new(-beta_omega0 - z.ln(), 0.0);
    let entropy_production = -(&rate * (log_rho - log_gibbs)).trace().re;

    let c_tot = |rho: &DensityOperator| relative_entropy(rho, &fully_dephase(rho));
    let coherence_change_rate = (c_tot(&plus)? - c_tot(&minus)?) / (2.0 * h);

    Ok(RateReport {
        heat_rate,
        entropy_production,
        coherence_change_rate,
    })
}

/// Terms of the external-coherence conservation law, all computed from the
/// dense evolved joint state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub delta_c_ext_system: f64,
    pub delta_c_ext_bath: f64,
    pub correlated: f64,
    /// `|-ΔC_ext(ρ_S) - ΔC_ext(ρ_B) - C_ext(ρ_S:B)|`.
    pub residual: f64,
}

pub fn conservation_check(beta_omega0: f64, gt: f64) -> Result<ConservationReport> {
    let spec = BathSpec::new(beta_omega0, crate::charging::DEFAULT_ACC)?;
    let gibbs = gibbs_qubit(beta_omega0);
    let initial = evolve_joint(&gibbs, &spec, 0.0)?.density();
    let evolved = evolve_joint(&gibbs, &spec, gt)?.density();
    let levels = spec.levels() + 1;

    let ext_parts = |rho: &DensityOperator| -> Result<(f64, f64)> {
        let s = partial_trace(rho, 2, levels, Keep::A)?;
        let b = partial_trace(rho, 2, levels, Keep::B)?;
        Ok((external_coherence(&s), external_coherence(&b)))
    };
    let (s0, b0) = ext_parts(&initial)?;
    let (s1, b1) = ext_parts(&evolved)?;
    let correlated = correlated_external_coherence(&evolved, 2, levels)?;
    let delta_c_ext_system = s1 - s0;
    let delta_c_ext_bath = b1 - b0;
    Ok(ConservationReport {
        delta_c_ext_system,
        delta_c_ext_bath,
        correlated,
        residual: (-delta_c_ext_system - delta_c_ext_bath - correlated).abs(),
    })
}

/// `Q_in` twice: from `S(ρ_B(t))` and from the bath's external-coherence
/// change. Returns `(via_entropy, via_coherence_change)`.
pub fn input_flow_routes(charge: &ChargeResult, n_qubits: usize) -> (f64, f64) {
    let n = n_qubits as f64;
    let beta = charge.beta_omega0();
    (
        n * charge.bath_entropy() / beta,
        -n * bath_coherence_change(charge) / beta,
    )
}

/// Free-phase check helper: the same charged state with `δ → e^{iφ}δ`.
pub fn rephase_qubit(rho_s: &DensityOperator, phi: f64) -> DensityOperator {
    let mut m = rho_s.matrix().clone();
    let phase = C64::from_polar(1.0, phi);
    m[(0, 1)] *= phase;
    m[(1, 0)] *= phase.conj();
    DensityOperator::from_valid(m, rho_s.basis().clone())
}
