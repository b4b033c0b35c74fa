//! Dense complex-matrix substrate shared by every other module.
//!
//! Composite indices always put the first tensor factor major:
//! `index = i_a * dim_b + i_b`. Energies are carried as exact integer labels
//! in units of `ω₀/2`, so grouping degenerate levels never compares floats.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Largest tolerated `|M - M†|` entry for a density operator.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Largest tolerated `|Tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest tolerated eigenvalue of a density operator.
pub const PSD_TOL: f64 = -1e-10;
/// Eigenvalues at or below this are treated as exact zeros in entropies.
pub const EIGENVALUE_CLAMP: f64 = 1e-14;
/// Hermiticity tolerance accepted by [`hermitian_eigensystem`].
pub const EIGEN_INPUT_TOL: f64 = 1e-10;
/// Eigenvalue threshold defining the support of `σ` in [`relative_entropy`].
pub const SUPPORT_TOL: f64 = 1e-12;

/// Integer energy labels in units of `ω₀/2`, one per basis index.
///
/// A basis built with [`EnergyBasis::tensor`] remembers its factors, so a
/// partial trace can hand back the kept factor's labels exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnergyBasis {
    labels: Vec<i64>,
    factors: Vec<Vec<i64>>,
}

impl EnergyBasis {
    pub fn new(labels: Vec<i64>) -> Self {
        Self {
            factors: vec![labels.clone()],
            labels,
        }
    }

    /// The 1-dimensional basis of a scalar.
    pub fn scalar() -> Self {
        Self {
            labels: vec![0],
            factors: Vec::new(),
        }
    }

    /// Qubit with `|0⟩ → -1`, `|1⟩ → +1`.
    pub fn qubit() -> Self {
        Self::new(vec![-1, 1])
    }

    /// `n` qubits, first qubit major.
    pub fn qubits(n: usize) -> Self {
        (0..n).fold(Self::scalar(), |acc, _| acc.tensor(&Self::qubit()))
    }

    /// Harmonic oscillator truncated to `levels` levels; level `n` has label `2n`.
    pub fn oscillator(levels: usize) -> Self {
        Self::new((0..levels as i64).map(|n| 2 * n).collect())
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Composite basis; labels add.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut labels = Vec::with_capacity(self.len() * other.len());
        for &a in &self.labels {
            for &b in &other.labels {
                labels.push(a + b);
            }
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { labels, factors }
    }

    /// Splits into the bases of the first `dim_a` and remaining `dim_b`
    /// dimensions, if the recorded factor structure allows it.
    fn split(&self, dim_a: usize) -> Option<(Self, Self)> {
        let mut acc = 1usize;
        for k in 0..=self.factors.len() {
            if acc == dim_a {
                let build = |fs: &[Vec<i64>]| {
                    fs.iter()
                        .fold(Self::scalar(), |b, f| b.tensor(&Self::new(f.clone())))
                };
                return Some((build(&self.factors[..k]), build(&self.factors[k..])));
            }
            if k < self.factors.len() {
                acc *= self.factors[k].len();
            }
        }
        None
    }

    /// Indices grouped by energy, in ascending label order.
    pub fn blocks(&self) -> Vec<(i64, Vec<usize>)> {
        let mut map: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
        for (i, &l) in self.labels.iter().enumerate() {
            map.entry(l).or_default().push(i);
        }
        map.into_iter().collect()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.blocks().iter().all(|(_, idx)| idx.len() == 1)
    }
}

/// A state: Hermitian, unit trace, positive semidefinite, with an energy basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    basis: EnergyBasis,
}

impl DensityOperator {
    /// Validates every invariant, including positivity.
    pub fn new(matrix: ComplexMatrix, basis: EnergyBasis) -> Result<Self> {
        check_shape(&matrix, &basis)?;
        let deviation = hermiticity_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace });
        }
        let min_eigenvalue = spectrum_unchecked(&matrix).first().copied().unwrap_or(0.0);
        if min_eigenvalue < PSD_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix, basis })
    }

    /// For matrices produced by trace- and positivity-preserving maps of valid
    /// states. Shape is still checked in debug builds.
    pub(crate) fn from_valid(matrix: ComplexMatrix, basis: EnergyBasis) -> Self {
        debug_assert_eq!(matrix.nrows(), basis.len());
        debug_assert_eq!(matrix.ncols(), basis.len());
        Self { matrix, basis }
    }

    /// `|ψ⟩⟨ψ|` for a unit-norm ket.
    pub fn pure(ket: &[C64], basis: EnergyBasis) -> Result<Self> {
        if ket.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: ket.len(),
            });
        }
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace: norm });
        }
        let v = DVector::from_column_slice(ket);
        Ok(Self::from_valid(&v * v.adjoint(), basis))
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probabilities: &[f64], basis: EnergyBasis) -> Result<Self> {
        if probabilities.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: probabilities.len(),
            });
        }
        if let Some(&p) = probabilities.iter().find(|&&p| p < PSD_TOL) {
            return Err(Error::NotPositive { min_eigenvalue: p });
        }
        let trace: f64 = probabilities.iter().sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace });
        }
        let diag = DVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| C64::new(p, 0.0)),
        );
        Ok(Self::from_valid(DMatrix::from_diagonal(&diag), basis))
    }

    /// Maximally mixed state on the given basis.
    pub fn maximally_mixed(basis: EnergyBasis) -> Self {
        let d = basis.len();
        let m = ComplexMatrix::identity(d, d).map(|z| z / d as f64);
        Self::from_valid(m, basis)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn basis(&self) -> &EnergyBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real diagonal (populations in the labelled basis).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        spectrum_unchecked(&self.matrix)
    }

    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }
}

fn check_shape(m: &ComplexMatrix, basis: &EnergyBasis) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.nrows() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            actual: m.nrows(),
        });
    }
    Ok(())
}

/// `max |M - M†|` over all entries.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Kronecker product with the first factor major.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator::from_valid(kron(&a.matrix, &b.matrix), a.basis.tensor(&b.basis))
}

/// Which factor of a bipartite operator survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of a raw `dim_a·dim_b` matrix laid out with `A` major.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Keep,
) -> Result<ComplexMatrix> {
    let dim = dim_a * dim_b;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: m.nrows(),
        });
    }
    Ok(match keep {
        Keep::A => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Keep::B => ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
        }),
    })
}

/// Reduced state of one factor. The kept factor's labels come from the
/// recorded tensor structure of `rho`'s basis; for a basis without usable
/// structure they are recovered as offsets from the first composite label.
pub fn partial_trace(
    rho: &DensityOperator,
    dim_a: usize,
    dim_b: usize,
    keep: Keep,
) -> Result<DensityOperator> {
    let reduced = partial_trace_matrix(&rho.matrix, dim_a, dim_b, keep)?;
    let basis = match rho.basis.split(dim_a) {
        Some((a, b)) => match keep {
            Keep::A => a,
            Keep::B => b,
        },
        None => {
            let l = rho.basis.labels();
            let labels = match keep {
                Keep::A => (0..dim_a).map(|i| l[i * dim_b] - l[0]).collect(),
                Keep::B => (0..dim_b).map(|k| l[k] - l[0]).collect(),
            };
            EnergyBasis::new(labels)
        }
    };
    Ok(DensityOperator::from_valid(reduced, basis))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl Eigensystem {
    /// `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fj = f(lam);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * v.adjoint()
    }
}

pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    let deviation = hermiticity_deviation(m);
    if deviation > EIGEN_INPUT_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigensystem {
        eigenvalues,
        eigenvectors,
    })
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Ascending eigenvalues of a matrix already known to be Hermitian.
pub(crate) fn spectrum_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `-Σ λ ln λ` with `λ ≤ 1e-14` treated as zero.
pub fn entropy_from_spectrum(spectrum: impl IntoIterator<Item = f64>) -> f64 {
    spectrum
        .into_iter()
        .filter(|&l| l > EIGENVALUE_CLAMP)
        .map(|l| -l * l.ln())
        .sum()
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_from_spectrum(rho.spectrum()).max(0.0)
}

/// `S(ρ‖σ) = Tr ρ (ln ρ - ln σ)` in nats.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    let sig = hermitian_eigensystem(&sigma.matrix)?;
    let v = &sig.eigenvectors;
    // ⟨v_j|ρ|v_j⟩ for each eigenvector of σ.
    let rv = &rho.matrix * v;
    let mut cross = 0.0;
    for (j, &mu) in sig.eigenvalues.iter().enumerate() {
        let w: f64 = (0..v.nrows())
            .map(|i| (v[(i, j)].conj() * rv[(i, j)]).re)
            .sum();
        if mu <= SUPPORT_TOL {
            if w > SUPPORT_TOL {
                return Err(Error::InfiniteRelativeEntropy);
            }
            continue;
        }
        cross += w * mu.ln();
    }
    Ok(-von_neumann_entropy(rho) - cross)
}

/// `½ Σ |λ(a - b)|` for two Hermitian matrices of equal size.
pub fn trace_distance_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.nrows(),
        });
    }
    let diff = a - b;
    Ok(0.5
        * spectrum_unchecked(&diff)
            .iter()
            .map(|l| l.abs())
            .sum::<f64>())
}

pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    trace_distance_matrices(&a.matrix, &b.matrix)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
