//! Coherence charging of one qubit by a truncated coherent Gibbs bath through
//! the resonant Jaynes-Cummings interaction.
//!
//! Everything is in the interaction picture: the free evolution generated by
//! `H_S + H_B` is diagonal in the energy basis and is dropped. Coupling and
//! time only enter through the product `gt`, and temperature through `βω₀`.
//!
//! The joint unitary is built sector by sector. Excitation sector `m ≥ 1` is
//! `span{|1, m-1⟩, |0, m⟩}` and rotates by
//! `[[cos(gt√m), -i sin(gt√m)], [-i sin(gt√m), cos(gt√m)]]`; `|0, 0⟩` is
//! invariant. Bath states live on levels `n < d`, and the joint space carries
//! one extra level so every populated sector is complete. The result is
//! exactly unitary for any truncation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operator::{
    entropy_from_spectrum, hermitian_eigensystem, spectrum_unchecked, trace_distance_matrices,
    ComplexMatrix, DensityOperator, EnergyBasis, C64,
};

/// Default accuracy target for the amplitude series.
pub const DEFAULT_ACC: f64 = 1e-8;
/// Default number of bath levels kept above the effective dimension.
pub const DEFAULT_MARGIN: usize = 5;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Normalization of the coherence-amplitude series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesConvention {
    /// Includes the factor `e^{-βω₀/2}`; agrees with the full unitary evolution.
    #[default]
    WithPrefactor,
    /// The printed closed form without `e^{-βω₀/2}`.
    Literal,
}

/// Smallest bath truncation meeting the accuracy target `acc`:
/// `⌈-[1 + ln(acc·(e^{-βω₀/2} + e^{βω₀/2}))/βω₀]⌉`, at least 1.
pub fn effective_bath_dimension(beta_omega0: f64, acc: f64) -> Result<usize> {
    if !(beta_omega0.is_finite() && beta_omega0 > 0.0) {
        return Err(invalid("beta_omega0", "must be positive and finite"));
    }
    if !(acc > 0.0 && acc < 1.0) {
        return Err(invalid("acc", "must lie in (0, 1)"));
    }
    let two_cosh = (-beta_omega0 / 2.0).exp() + (beta_omega0 / 2.0).exp();
    let x = -(1.0 + (acc * two_cosh).ln() / beta_omega0);
    Ok((x.ceil().max(1.0)) as usize)
}

/// Parameters of the coherent Gibbs bath and its truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    beta_omega0: f64,
    acc: f64,
    levels: usize,
    margin: usize,
}

impl BathSpec {
    /// `d = d* + 5`.
    pub fn new(beta_omega0: f64, acc: f64) -> Result<Self> {
        Self::with_margin(beta_omega0, acc, DEFAULT_MARGIN)
    }

    pub fn with_margin(beta_omega0: f64, acc: f64, margin: usize) -> Result<Self> {
        let d_star = effective_bath_dimension(beta_omega0, acc)?;
        Ok(Self {
            beta_omega0,
            acc,
            levels: d_star + margin,
            margin,
        })
    }

    /// Explicit truncation; fails if `levels` is below the effective dimension.
    pub fn with_levels(beta_omega0: f64, acc: f64, levels: usize) -> Result<Self> {
        let d_star = effective_bath_dimension(beta_omega0, acc)?;
        if levels < d_star {
            return Err(invalid(
                "levels",
                format!("{levels} is below the effective bath dimension {d_star}"),
            ));
        }
        Ok(Self {
            beta_omega0,
            acc,
            levels,
            margin: levels - d_star,
        })
    }

    pub fn beta_omega0(&self) -> f64 {
        self.beta_omega0
    }

    pub fn acc(&self) -> f64 {
        self.acc
    }

    /// Truncated bath dimension `d`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Boltzmann weight discarded by the truncation, `e^{-βω₀ d}`.
    pub fn truncation_weight(&self) -> f64 {
        (-self.beta_omega0 * self.levels as f64).exp()
    }

    /// Qubit partition function `1 + e^{-βω₀}`.
    pub fn z_s(&self) -> f64 {
        qubit_partition(self.beta_omega0)
    }

    /// Untruncated bath partition function `1/(1 - e^{-βω₀})`.
    pub fn z_b(&self) -> f64 {
        -1.0 / (-self.beta_omega0).exp_m1()
    }

    /// Partition function of the kept levels.
    pub fn z_b_truncated(&self) -> f64 {
        (0..self.levels)
            .map(|n| (-self.beta_omega0 * n as f64).exp())
            .sum()
    }

    /// Amplitudes `⟨n|γ_B⟩ ∝ e^{-βω₀ n/2}` for `n < d`, unit norm.
    pub fn amplitudes(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.levels)
            .map(|n| (-0.5 * self.beta_omega0 * n as f64).exp())
            .collect();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        raw.into_iter().map(|a| a / norm).collect()
    }
}

pub fn qubit_partition(beta_omega0: f64) -> f64 {
    1.0 + (-beta_omega0).exp()
}

/// Qubit Gibbs state `(|0⟩⟨0| + e^{-βω₀}|1⟩⟨1|)/Z_S`.
pub fn gibbs_qubit(beta_omega0: f64) -> DensityOperator {
    let z = qubit_partition(beta_omega0);
    DensityOperator::from_valid(
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(1.0 / z, 0.0),
            (1, 1) => C64::new((-beta_omega0).exp() / z, 0.0),
            _ => ZERO,
        }),
        EnergyBasis::qubit(),
    )
}

/// Binary entropy of the qubit Gibbs state.
pub fn gibbs_qubit_entropy(beta_omega0: f64) -> f64 {
    let z = qubit_partition(beta_omega0);
    entropy_from_spectrum([1.0 / z, (-beta_omega0).exp() / z])
}

/// The pure coherent bath `|γ_B⟩⟨γ_B|` on `d` levels, labels `2n`.
pub fn coherent_bath_state(spec: &BathSpec) -> DensityOperator {
    let a = spec.amplitudes();
    let d = a.len();
    DensityOperator::from_valid(
        ComplexMatrix::from_fn(d, d, |i, j| C64::new(a[i] * a[j], 0.0)),
        EnergyBasis::oscillator(d),
    )
}

/// Truncated, renormalized thermal bath state `Δ(|γ_B⟩⟨γ_B|)`.
pub fn truncated_gibbs_bath(spec: &BathSpec) -> Vec<f64> {
    spec.amplitudes().iter().map(|a| a * a).collect()
}

#[inline]
fn sqrt_gap(p: usize) -> f64 {
    // √(p+1) - √p without cancellation.
    let p = p as f64;
    1.0 / ((p + 1.0).sqrt() + p.sqrt())
}

/// Term `e^{-βω₀ p} sin(gt(√(p+1) - √p))` of the amplitude series.
fn series_term(beta_omega0: f64, gt: f64, p: usize) -> f64 {
    (-beta_omega0 * p as f64).exp() * (gt * sqrt_gap(p)).sin()
}

fn convention_prefactor(beta_omega0: f64, convention: SeriesConvention) -> f64 {
    match convention {
        SeriesConvention::WithPrefactor => (-0.5 * beta_omega0).exp(),
        SeriesConvention::Literal => 1.0,
    }
}

/// Coherence amplitude `δ = (i/Z_B)·Π·Σ_{p=0}^{d-1} e^{-βω₀p} sin(gt(√(p+1)-√p))`
/// with the untruncated `Z_B` and `Π = e^{-βω₀/2}` under
/// [`SeriesConvention::WithPrefactor`].
pub fn coherence_amplitude(
    beta_omega0: f64,
    gt: f64,
    d: usize,
    convention: SeriesConvention,
) -> C64 {
    let sum: f64 = (0..d).map(|p| series_term(beta_omega0, gt, p)).sum();
    let inv_zb = -(-beta_omega0).exp_m1();
    I * (inv_zb * convention_prefactor(beta_omega0, convention) * sum)
}

/// Geometric-ratio bound on `|δ_∞ - coherence_amplitude(βω₀, gt, n + 1)|`,
/// the error of the partial sum through `p = n` (prefactor convention).
///
/// The omitted terms are `c_p ∝ e^{-βω₀p} sin(x_p)` with `x_p = gt/(√(p+1)+√p)`
/// decreasing in `p`. While `x_{n+1} ≤ π/2` the sines shrink too and
/// `|c_{n+1}|/(1 - e^{-βω₀})` bounds the tail; otherwise `|sin|` is replaced
/// by its envelope 1.
pub fn series_remainder_bound(beta_omega0: f64, n: usize, gt: f64) -> f64 {
    let inv_zb = -(-beta_omega0).exp_m1();
    let x = (gt * sqrt_gap(n + 1)).abs();
    let sine = if x <= std::f64::consts::FRAC_PI_2 {
        x.sin()
    } else {
        1.0
    };
    let c_next = inv_zb
        * convention_prefactor(beta_omega0, SeriesConvention::WithPrefactor)
        * (-beta_omega0 * (n + 1) as f64).exp()
        * sine;
    c_next / (1.0 - (-beta_omega0).exp())
}

/// `γ_S + (δ|0⟩⟨1| + δ*|1⟩⟨0|)/Z_S`, as a raw matrix (the literal convention
/// can leave the positive cone).
pub fn analytic_system_matrix(
    beta_omega0: f64,
    gt: f64,
    d: usize,
    convention: SeriesConvention,
) -> (ComplexMatrix, C64) {
    let delta = coherence_amplitude(beta_omega0, gt, d, convention);
    let z = qubit_partition(beta_omega0);
    let mut m = gibbs_qubit(beta_omega0).into_matrix();
    m[(0, 1)] = delta / z;
    m[(1, 0)] = delta.conj() / z;
    (m, delta)
}

/// Applies the sector-wise Jaynes-Cummings unitary in place. `state` has
/// length `2·levels`, qubit major.
pub fn apply_jc_unitary(state: &mut [C64], levels: usize, gt: f64) {
    debug_assert_eq!(state.len(), 2 * levels);
    for m in 1..levels {
        let (s, c) = (gt * (m as f64).sqrt()).sin_cos();
        let i1 = levels + m - 1;
        let i0 = m;
        let (x1, x0) = (state[i1], state[i0]);
        state[i1] = x1 * c - I * s * x0;
        state[i0] = -I * s * x1 + x0 * c;
    }
}

/// Dense sector-wise unitary on `2·levels` dimensions. `|1, levels-1⟩` has no
/// partner inside the truncation and is left invariant.
pub fn jc_unitary(levels: usize, gt: f64) -> ComplexMatrix {
    let dim = 2 * levels;
    let mut u = ComplexMatrix::identity(dim, dim);
    for m in 1..levels {
        let (s, c) = (gt * (m as f64).sqrt()).sin_cos();
        let i1 = levels + m - 1;
        let i0 = m;
        u[(i1, i1)] = C64::new(c, 0.0);
        u[(i0, i0)] = C64::new(c, 0.0);
        u[(i1, i0)] = -I * s;
        u[(i0, i1)] = -I * s;
    }
    u
}

/// Joint system-bath state kept as a mixture of orthonormal pure components,
/// `ρ_SB = Σ_k w_k |Φ_k⟩⟨Φ_k|`. Reduced quantities cost `O(d)`; dense
/// matrices are only built on request.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    levels: usize,
    components: Vec<(f64, Vec<C64>)>,
}

impl JointState {
    /// Bath levels in the joint space (`d + 1`).
    pub fn bath_levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        2 * self.levels
    }

    pub fn components(&self) -> &[(f64, Vec<C64>)] {
        &self.components
    }

    pub fn basis(&self) -> EnergyBasis {
        EnergyBasis::qubit().tensor(&EnergyBasis::oscillator(self.levels))
    }

    pub fn density(&self) -> DensityOperator {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (w, v) in &self.components {
            for i in 0..n {
                if v[i] == ZERO {
                    continue;
                }
                let vi = v[i] * *w;
                for j in 0..n {
                    m[(i, j)] += vi * v[j].conj();
                }
            }
        }
        DensityOperator::from_valid(m, self.basis())
    }

    pub fn reduced_system_matrix(&self) -> ComplexMatrix {
        let d = self.levels;
        let mut m = ComplexMatrix::zeros(2, 2);
        for (w, v) in &self.components {
            for a in 0..2 {
                for b in 0..2 {
                    let s: C64 = (0..d).map(|n| v[a * d + n] * v[b * d + n].conj()).sum();
                    m[(a, b)] += s * *w;
                }
            }
        }
        m
    }

    pub fn reduced_system(&self) -> DensityOperator {
        DensityOperator::from_valid(self.reduced_system_matrix(), EnergyBasis::qubit())
    }

    pub fn reduced_bath(&self) -> DensityOperator {
        let d = self.levels;
        let mut m = ComplexMatrix::zeros(d, d);
        for (w, v) in &self.components {
            for q in 0..2 {
                let part = &v[q * d..(q + 1) * d];
                for i in 0..d {
                    if part[i] == ZERO {
                        continue;
                    }
                    let vi = part[i] * *w;
                    for j in 0..d {
                        m[(i, j)] += vi * part[j].conj();
                    }
                }
            }
        }
        DensityOperator::from_valid(m, EnergyBasis::oscillator(d))
    }

    /// Diagonal of the reduced bath state.
    pub fn bath_populations(&self) -> Vec<f64> {
        let d = self.levels;
        let mut p = vec![0.0; d];
        for (w, v) in &self.components {
            for (n, pn) in p.iter_mut().enumerate() {
                *pn += w * (v[n].norm_sqr() + v[d + n].norm_sqr());
            }
        }
        p
    }

    /// `S(ρ_B)` from the Gram matrix of the (at most four) vectors whose outer
    /// products sum to `ρ_B`; it shares the nonzero spectrum of `ρ_B`.
    pub fn bath_entropy(&self) -> f64 {
        let d = self.levels;
        let vectors: Vec<(f64, &[C64])> = self
            .components
            .iter()
            .flat_map(|(w, v)| [(*w, &v[..d]), (*w, &v[d..])])
            .collect();
        let k = vectors.len();
        let gram = ComplexMatrix::from_fn(k, k, |a, b| {
            let (wa, va) = vectors[a];
            let (wb, vb) = vectors[b];
            let overlap: C64 = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
            overlap * (wa * wb).sqrt()
        });
        entropy_from_spectrum(spectrum_unchecked(&gram)).max(0.0)
    }

    /// `S(ρ_SB)`; the components are orthonormal.
    pub fn joint_entropy(&self) -> f64 {
        entropy_from_spectrum(self.components.iter().map(|(w, _)| *w))
    }
}

/// Evolves `ρ_S(0) ⊗ |γ_B⟩⟨γ_B|` for coupling-time `gt`.
pub fn evolve_joint(rho_s0: &DensityOperator, spec: &BathSpec, gt: f64) -> Result<JointState> {
    if rho_s0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho_s0.dim(),
        });
    }
    let levels = spec.levels() + 1;
    let bath = spec.amplitudes();
    let m = rho_s0.matrix();
    let qubit_components: Vec<(f64, [C64; 2])> = if m[(0, 1)] == ZERO && m[(1, 0)] == ZERO {
        vec![
            (m[(0, 0)].re, [C64::new(1.0, 0.0), ZERO]),
            (m[(1, 1)].re, [ZERO, C64::new(1.0, 0.0)]),
        ]
    } else {
        let eig = hermitian_eigensystem(m)?;
        (0..2)
            .map(|k| {
                (
                    eig.eigenvalues[k],
                    [eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]],
                )
            })
            .collect()
    };
    let components = qubit_components
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, q)| {
            let mut v = vec![ZERO; 2 * levels];
            for (n, &a) in bath.iter().enumerate() {
                v[n] = q[0] * a;
                v[levels + n] = q[1] * a;
            }
            apply_jc_unitary(&mut v, levels, gt);
            (w, v)
        })
        .collect();
    Ok(JointState { levels, components })
}

/// Dense joint state after the interaction, dimension `2(d + 1)`.
pub fn jc_joint_evolution(
    rho_s0: &DensityOperator,
    spec: &BathSpec,
    gt: f64,
) -> Result<DensityOperator> {
    Ok(evolve_joint(rho_s0, spec, gt)?.density())
}

/// Outcome of charging one Gibbs qubit.
#[derive(Debug, Clone)]
pub struct ChargeResult {
    /// Analytic reduced system state.
    pub rho_s: DensityOperator,
    /// Coherence amplitude; `⟨0|ρ_S|1⟩ = δ/Z_S`.
    pub delta: C64,
    /// Boltzmann weight `e^{-βω₀ d}` dropped by the truncation.
    pub truncation_weight: f64,
    pub gt: f64,
    pub spec: BathSpec,
    /// Evolved joint state.
    pub joint: JointState,
    /// Trace distance between the analytic and evolved system states.
    pub route_discrepancy: f64,
}

impl ChargeResult {
    pub fn beta_omega0(&self) -> f64 {
        self.spec.beta_omega0()
    }

    pub fn z_s(&self) -> f64 {
        self.spec.z_s()
    }

    pub fn z_b(&self) -> f64 {
        self.spec.z_b()
    }

    pub fn evolved_system(&self) -> DensityOperator {
        self.joint.reduced_system()
    }

    /// Dense reduced bath state on `d + 1` levels.
    pub fn rho_b(&self) -> DensityOperator {
        self.joint.reduced_bath()
    }

    /// Dense joint state on `2(d + 1)` levels.
    pub fn rho_sb(&self) -> DensityOperator {
        self.joint.density()
    }

    /// `S(ρ_B(t))`.
    pub fn bath_entropy(&self) -> f64 {
        self.joint.bath_entropy()
    }
}

/// Charges a Gibbs qubit for coupling-time `gt` and cross-checks the analytic
/// state against the evolved one.
pub fn charged_qubit_state(
    spec: &BathSpec,
    gt: f64,
    convention: SeriesConvention,
) -> Result<ChargeResult> {
    if !gt.is_finite() {
        return Err(invalid("gt", "must be finite"));
    }
    let beta = spec.beta_omega0();
    let (analytic, delta) = analytic_system_matrix(beta, gt, spec.levels(), convention);
    let joint = evolve_joint(&gibbs_qubit(beta), spec, gt)?;
    let route_discrepancy = trace_distance_matrices(&analytic, &joint.reduced_system_matrix())?;
    let rho_s = DensityOperator::new(analytic, EnergyBasis::qubit())?;
    Ok(ChargeResult {
        rho_s,
        delta,
        truncation_weight: spec.truncation_weight(),
        gt,
        spec: *spec,
        joint,
        route_discrepancy,
    })
}

/// Ground population and coherence of the qubit after the interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitComponents {
    pub rho00: f64,
    pub rho01: C64,
}

/// Series for `ρ_00(t)` and `ρ_01(t)` from arbitrary initial components and
/// the (truncated) coherent bath; `ρ_11 = 1 - ρ_00`, `ρ_10 = ρ_01*`.
pub fn final_state_components(
    rho_s0: &DensityOperator,
    spec: &BathSpec,
    gt: f64,
) -> Result<QubitComponents> {
    if rho_s0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho_s0.dim(),
        });
    }
    let a = spec.amplitudes();
    let bath = |p: i64, q: i64| -> f64 {
        let get = |n: i64| {
            if n >= 0 && (n as usize) < a.len() {
                a[n as usize]
            } else {
                0.0
            }
        };
        get(p) * get(q)
    };
    let m = rho_s0.matrix();
    let (r00, r11, r01, r10) = (m[(0, 0)], m[(1, 1)], m[(0, 1)], m[(1, 0)]);
    let cs = |p: i64| (gt * (p as f64).sqrt()).cos();
    let sn = |p: i64| (gt * (p as f64).sqrt()).sin();

    let mut rho00 = ZERO;
    let mut rho01 = ZERO;
    for p in 0..=(a.len() as i64) {
        let (c0, s0, c1, s1) = (cs(p), sn(p), cs(p + 1), sn(p + 1));
        rho00 += r00 * (c0 * c0 * bath(p, p))
            + r11 * (s0 * s0 * bath(p - 1, p - 1))
            + I * r01 * (s0 * c0 * bath(p, p - 1))
            - I * r10 * (s0 * c0 * bath(p - 1, p));
        rho01 += I * r00 * (s1 * c0 * bath(p, p + 1)) - I * r11 * (s0 * c1 * bath(p - 1, p))
            + r01 * (c0 * c1 * bath(p, p))
            + r10 * (s0 * s1 * bath(p - 1, p + 1));
    }
    Ok(QubitComponents {
        rho00: rho00.re,
        rho01,
    })
}

/// Closed form for `ρ_S(0) = |0⟩⟨0|`: `Σ_p P_p cos²(gt√p)` with `P_p` the
/// truncated bath populations.
pub fn ground_population_from_ground(spec: &BathSpec, gt: f64) -> f64 {
    truncated_gibbs_bath(spec)
        .iter()
        .enumerate()
        .map(|(p, w)| w * (gt * (p as f64).sqrt()).cos().powi(2))
        .sum()
}

/// `ρ_S(0) = γ_S + iκ(|0⟩⟨1| - |1⟩⟨0|)`.
pub fn kappa_initial_state(beta_omega0: f64, kappa: f64) -> Result<DensityOperator> {
    let mut m = gibbs_qubit(beta_omega0).into_matrix();
    m[(0, 1)] = C64::new(0.0, kappa);
    m[(1, 0)] = C64::new(0.0, -kappa);
    DensityOperator::new(m, EnergyBasis::qubit())
}

/// Closed form for the κ-coherent initial state:
/// `1/Z_S - (κ e^{βω₀/2}/Z_B) Σ_p e^{-βω₀p} sin(2gt√p)`, with the truncated
/// bath partition function.
pub fn ground_population_with_kappa(spec: &BathSpec, gt: f64, kappa: f64) -> f64 {
    let beta = spec.beta_omega0();
    let sum: f64 = (1..spec.levels())
        .map(|p| (-beta * p as f64).exp() * (2.0 * gt * (p as f64).sqrt()).sin())
        .sum();
    1.0 / spec.z_s() - kappa * (0.5 * beta).exp() / spec.z_b_truncated() * sum
}

/// Starting qubit states whose populations are not thermal or that carry
/// coherence already.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `|0⟩⟨0|`.
    Ground,
    /// `γ_S + iκ(|0⟩⟨1| - |1⟩⟨0|)`.
    Kappa(f64),
}

/// Ground population at one `gt` by three routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationPoint {
    pub gt: f64,
    pub series: f64,
    pub closed_form: f64,
    pub evolved: f64,
}

pub fn population_curve(
    init: InitialState,
    spec: &BathSpec,
    gts: &[f64],
) -> Result<Vec<PopulationPoint>> {
    let beta = spec.beta_omega0();
    let rho0 = match init {
        InitialState::Ground => DensityOperator::diagonal(&[1.0, 0.0], EnergyBasis::qubit())?,
        InitialState::Kappa(k) => kappa_initial_state(beta, k)?,
    };
    gts.iter()
        .map(|&gt| {
            let evolved = evolve_joint(&rho0, spec, gt)?.reduced_system_matrix()[(0, 0)].re;
            let closed_form = match init {
                InitialState::Ground => ground_population_from_ground(spec, gt),
                InitialState::Kappa(k) => ground_population_with_kappa(spec, gt, k),
            };
            Ok(PopulationPoint {
                gt,
                series: final_state_components(&rho0, spec, gt)?.rho00,
                closed_form,
                evolved,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs_diff;

    #[test]
    fn effective_dimension_values() {
        assert_eq!(effective_bath_dimension(1.0, 1e-8).unwrap(), 17);
        assert_eq!(effective_bath_dimension(0.5, 1e-8).unwrap(), 35);
        assert!(effective_bath_dimension(10.0, 1e-8).unwrap() <= 2);
        assert!(effective_bath_dimension(0.0, 1e-8).is_err());
        assert!(effective_bath_dimension(1.0, 0.0).is_err());
        assert!(effective_bath_dimension(-1.0, 1e-8).is_err());
    }

    #[test]
    fn spec_rejects_short_truncation() {
        assert!(BathSpec::with_levels(1.0, 1e-8, 16).is_err());
        let s = BathSpec::with_levels(1.0, 1e-8, 20).unwrap();
        assert_eq!((s.levels(), s.margin()), (20, 3));
        assert_eq!(BathSpec::new(1.0, 1e-8).unwrap().levels(), 22);
    }

    #[test]
    fn bath_state_ground_weight() {
        let spec = BathSpec::with_levels(1.0, 1e-8, 17).unwrap();
        let rho = coherent_bath_state(&spec);
        assert!((rho.element(0, 0).re - (1.0 - (-1.0f64).exp())).abs() < 1e-7);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert_eq!(rho.basis().labels()[3], 6);
        assert!((spec.truncation_weight() - (-17.0f64).exp()).abs() < 1e-20);
    }

    #[test]
    fn cold_bath_is_vacuum() {
        let spec = BathSpec::new(60.0, 1e-8).unwrap();
        let rho = coherent_bath_state(&spec);
        assert!((rho.element(0, 0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let spec = BathSpec::new(1.0, 1e-8).unwrap();
        let r = charged_qubit_state(&spec, 0.0, SeriesConvention::WithPrefactor).unwrap();
        assert_eq!(r.delta, ZERO);
        assert!(max_abs_diff(r.rho_s.matrix(), gibbs_qubit(1.0).matrix()) < 1e-15);
        assert!(r.route_discrepancy < 1e-12);
    }

    #[test]
    fn full_rabi_swap_in_first_sector() {
        let levels = 4;
        let mut v = vec![ZERO; 2 * levels];
        v[levels] = C64::new(1.0, 0.0); // |1, 0⟩
        apply_jc_unitary(&mut v, levels, std::f64::consts::FRAC_PI_2);
        assert!((v[1] - (-I)).norm() < 1e-15);
        assert!(v[levels].norm() < 1e-15);
    }

    #[test]
    fn dense_unitary_is_unitary() {
        let u = jc_unitary(9, 3.7);
        let id = ComplexMatrix::identity(18, 18);
        assert!(max_abs_diff(&(&u * u.adjoint()), &id) < 1e-12);
    }

    #[test]
    fn literal_convention_can_be_unphysical() {
        let spec = BathSpec::new(3.0, 1e-8).unwrap();
        let r = charged_qubit_state(
            &spec,
            std::f64::consts::FRAC_PI_2,
            SeriesConvention::Literal,
        );
        assert!(matches!(r, Err(Error::NotPositive { .. })));
    }

    #[test]
    fn prefactor_discriminates_cold_limit() {
        let gt = std::f64::consts::FRAC_PI_2;
        let on = coherence_amplitude(30.0, gt, 10, SeriesConvention::WithPrefactor);
        let off = coherence_amplitude(30.0, gt, 10, SeriesConvention::Literal);
        assert!((on.norm() - (-15.0f64).exp()).abs() < 1e-12);
        assert!((off.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn remainder_bound_decays() {
        let mut last = f64::INFINITY;
        for n in [20, 40, 80, 160] {
            let b = series_remainder_bound(1.0, n, 5.0);
            assert!(b < last);
            last = b;
        }
        assert!(last < 1e-60);
    }

    #[test]
    fn low_rank_entropies_match_dense() {
        use crate::operator::von_neumann_entropy;
        for (beta, gt) in [(0.5, 3.0), (1.0, 11.0), (2.5, 27.0)] {
            let spec = BathSpec::new(beta, 1e-8).unwrap();
            let joint = evolve_joint(&gibbs_qubit(beta), &spec, gt).unwrap();
            let dense_b = von_neumann_entropy(&joint.reduced_bath());
            assert!((joint.bath_entropy() - dense_b).abs() < 1e-9);
            let dense_sb = von_neumann_entropy(&joint.density());
            assert!((joint.joint_entropy() - dense_sb).abs() < 1e-9);
        }
    }
}
