//! Collective Tavis-Cummings charging of `N` qubits by one coherent bath.
//!
//! Used to check that a single bath can only charge external coherence of the
//! qubit register, and that sequential single-qubit charging is never worse.
//! Evolution diagonalizes the full interaction Hamiltonian; dimensions stay
//! small (`2^N·(d + N)` with `N ≤ 3` in practice).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charging::BathSpec;
use crate::coherence::internal_coherence;
use crate::engine::{cycle_performance, EngineOperatingPoint};
use crate::error::{invalid, Error, Result};
use crate::operator::{
    hermitian_eigensystem, partial_trace, ComplexMatrix, DensityOperator, EnergyBasis, Keep, C64,
};

/// Default cap on the joint Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Collective charging setup; couplings are in units of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcSpec {
    pub n_qubits: usize,
    pub couplings: Vec<C64>,
    pub bath: BathSpec,
    pub gt: f64,
}

impl TcSpec {
    pub fn new(couplings: Vec<C64>, bath: BathSpec, gt: f64) -> Result<Self> {
        if couplings.is_empty() {
            return Err(invalid("couplings", "need at least one qubit"));
        }
        Ok(Self {
            n_qubits: couplings.len(),
            couplings,
            bath,
            gt,
        })
    }

    /// All couplings equal to one.
    pub fn uniform(n_qubits: usize, bath: BathSpec, gt: f64) -> Result<Self> {
        Self::new(vec![C64::new(1.0, 0.0); n_qubits], bath, gt)
    }

    /// Bath levels in the joint space: the bath state's support plus room for
    /// `N` excitations.
    pub fn bath_levels(&self) -> usize {
        self.bath.levels() + self.n_qubits
    }

    pub fn dim(&self) -> usize {
        (1usize << self.n_qubits) * self.bath_levels()
    }

    /// Qubit register (first qubit major) tensored with the bath.
    pub fn basis(&self) -> EnergyBasis {
        EnergyBasis::qubits(self.n_qubits).tensor(&EnergyBasis::oscillator(self.bath_levels()))
    }

    fn check(&self, dim_cap: usize) -> Result<()> {
        if self.couplings.len() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: self.couplings.len(),
            });
        }
        if self.n_qubits >= usize::BITS as usize - 1 || self.dim() > dim_cap {
            return Err(Error::DimensionOverflow {
                dim: self.dim(),
                cap: dim_cap,
            });
        }
        Ok(())
    }
}

/// Unit-modulus couplings with uniform phases from a seeded ChaCha8 stream.
pub fn random_couplings(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            C64::from_polar(1.0, phase)
        })
        .collect()
}

/// `H_I = Σ_k g_k σ₊^{(k)} a + g_k* σ₋^{(k)} a†`, with `σ₊ = |1⟩⟨0|`.
pub fn tc_interaction_hamiltonian(spec: &TcSpec, dim_cap: usize) -> Result<ComplexMatrix> {
    spec.check(dim_cap)?;
    let n = spec.n_qubits;
    let levels = spec.bath_levels();
    let dim = spec.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (k, &g) in spec.couplings.iter().enumerate() {
        let bit = 1usize << (n - 1 - k);
        for s in 0..(1usize << n) {
            if s & bit != 0 {
                continue;
            }
            let raised = s | bit;
            for m in 1..levels {
                // σ₊ a : |s, m⟩ → √m |s + 1_k, m - 1⟩
                let from = s * levels + m;
                let to = raised * levels + m - 1;
                let amp = g * (m as f64).sqrt();
                h[(to, from)] += amp;
                h[(from, to)] += amp.conj();
            }
        }
    }
    Ok(h)
}

/// `max |[H, H_0]|` entry, with `H_0` diagonal with the given labels.
pub fn energy_commutator_norm(h: &ComplexMatrix, basis: &EnergyBasis) -> f64 {
    let l = basis.labels();
    let mut worst = 0.0f64;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            worst = worst.max((h[(i, j)] * (l[j] - l[i]) as f64 * 0.5).norm());
        }
    }
    worst
}

/// Evolves `γ_S^{⊗N} ⊗ |γ_B⟩⟨γ_B|` under `e^{-i H_I gt}`.
pub fn tc_evolve(spec: &TcSpec) -> Result<DensityOperator> {
    tc_evolve_capped(spec, DEFAULT_DIM_CAP)
}

pub fn tc_evolve_capped(spec: &TcSpec, dim_cap: usize) -> Result<DensityOperator> {
    let h = tc_interaction_hamiltonian(spec, dim_cap)?;
    let gt = spec.gt;
    let u = hermitian_eigensystem(&h)?.map_spectrum(|e| C64::from_polar(1.0, -e * gt));

    let n = spec.n_qubits;
    let levels = spec.bath_levels();
    let dim = spec.dim();
    let beta = spec.bath.beta_omega0();
    let p1 = (-beta).exp() / (1.0 + (-beta).exp());
    let bath = spec.bath.amplitudes();

    let mut rho = ComplexMatrix::zeros(dim, dim);
    let mut psi = nalgebra::DVector::<C64>::zeros(dim);
    for s in 0..(1usize << n) {
        let excited = s.count_ones() as i32;
        let w = p1.powi(excited) * (1.0 - p1).powi(n as i32 - excited);
        psi.fill(C64::new(0.0, 0.0));
        for (m, &a) in bath.iter().enumerate() {
            psi[s * levels + m] = C64::new(a, 0.0);
        }
        let out = &u * &psi;
        rho += (&out * out.adjoint()) * C64::new(w, 0.0);
    }
    Ok(DensityOperator::from_valid(rho, spec.basis()))
}

/// Reduced `N`-qubit state after collective charging.
pub fn tc_reduced_system(spec: &TcSpec) -> Result<DensityOperator> {
    let joint = tc_evolve(spec)?;
    partial_trace(&joint, 1 << spec.n_qubits, spec.bath_levels(), Keep::A)
}

/// Residuals of the collective-charging theorems for one evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveCoherenceReport {
    /// `C_int` of the reduced register state.
    pub c_int: f64,
    /// `max_E max |P_E ρ P_E - (Tr(P_E ρ)/dim P_E) P_E|`.
    pub block_residual: f64,
    /// `max |Δ(ρ_S) - γ_S^{⊗N}|`.
    pub diagonal_residual: f64,
}

pub fn collective_coherence_check(spec: &TcSpec) -> Result<CollectiveCoherenceReport> {
    if spec.n_qubits < 2 {
        return Err(invalid(
            "n_qubits",
            "collective check needs at least two qubits",
        ));
    }
    let rho = tc_reduced_system(spec)?;
    let m = rho.matrix();
    let mut block_residual = 0.0f64;
    for (_, idx) in rho.basis().blocks() {
        let mean = idx.iter().map(|&i| m[(i, i)].re).sum::<f64>() / idx.len() as f64;
        for &i in &idx {
            for &j in &idx {
                let target = if i == j { mean } else { 0.0 };
                block_residual = block_residual.max((m[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
    }
    let beta = spec.bath.beta_omega0();
    let p1 = (-beta).exp() / (1.0 + (-beta).exp());
    let n = spec.n_qubits;
    let diagonal_residual = (0..rho.dim())
        .map(|s| {
            let k = (s as u32).count_ones() as i32;
            let gibbs = p1.powi(k) * (1.0 - p1).powi(n as i32 - k);
            (m[(s, s)].re - gibbs).abs()
        })
        .fold(0.0, f64::max);
    Ok(CollectiveCoherenceReport {
        c_int: internal_coherence(&rho),
        block_residual,
        diagonal_residual,
    })
}

/// One row of the sequential-versus-collective table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub gt: f64,
    /// `C_int(ρ_S^{⊗N})` after charging each qubit with a fresh bath.
    pub sequential: f64,
    /// `C_int` of the register after collective charging with unit couplings.
    pub collective: f64,
}

pub fn sequential_vs_collective(
    n: usize,
    beta_omega0: f64,
    gt_grid: &[f64],
    acc: f64,
) -> Result<Vec<ComparisonRow>> {
    if n < 2 {
        return Err(invalid("n", "comparison needs at least two qubits"));
    }
    let bath = BathSpec::new(beta_omega0, acc)?;
    gt_grid
        .iter()
        .map(|&gt| {
            let sequential =
                cycle_performance(&EngineOperatingPoint::new(n, beta_omega0, gt, acc)?)?
                    .c_int_total;
            let collective =
                internal_coherence(&tc_reduced_system(&TcSpec::uniform(n, bath, gt)?)?);
            Ok(ComparisonRow {
                gt,
                sequential,
                collective,
            })
        })
        .collect()
}
