use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Region;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-10;
/// Eigenvalues in `[-NEGATIVE_CLIP, 0)` are rounding noise and clipped to zero.
const NEGATIVE_CLIP: f64 = 1e-10;
/// Relative threshold for the numerical rank.
pub(crate) const RANK_THRESHOLD: f64 = 1e-12;

/// Hermitian, positive, unit-trace operator with its decreasing spectrum.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    region: Option<Region>,
    matrix: DMatrix<Complex64>,
    spectrum: Vec<f64>,
}

impl DensityMatrix {
    /// A density matrix not attached to any lattice region.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::build(None, matrix)
    }

    pub fn with_region(region: Region, local_dim: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = super::pow(local_dim, region.len());
        if matrix.nrows() != dim {
            return Err(Error::RegionMismatch(format!(
                "matrix dimension {} does not match region dimension {dim}",
                matrix.nrows()
            )));
        }
        Self::build(Some(region), matrix)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::from_matrix(DMatrix::from_diagonal(&d))
    }

    /// `|φ⟩⟨φ|` for a unit vector.
    pub fn projector(vector: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(vector);
        Self::from_matrix(&v * v.adjoint())
    }

    fn build(region: Option<Region>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::NotDensityMatrix("matrix must be square and nonempty".into()));
        }
        let skew = (&matrix - matrix.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if skew > HERMITIAN_TOLERANCE {
            return Err(Error::NotDensityMatrix(format!("not Hermitian (deviation {skew:e})")));
        }
        let matrix = hermitize(matrix);
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NotDensityMatrix(format!("trace is {trace}")));
        }
        let spectrum = clipped_spectrum(&matrix)?;
        Ok(Self { region, matrix, spectrum })
    }

    pub fn region(&self) -> Option<&Region> {
        self.region.as_ref()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in decreasing order.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn rank(&self) -> usize {
        numerical_rank(&self.spectrum)
    }

    /// Leading eigenpair; the eigenvector's largest component is made real positive.
    pub fn top_eigenvector(&self) -> (f64, Vec<Complex64>) {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let (k, &lambda) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        let col: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
        let pivot =
            col.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(i, _)| i).unwrap_or(0);
        let phase = Complex64::from_polar(1.0, -col[pivot].arg());
        (lambda, col.into_iter().map(|z| z * phase).collect())
    }

    fn same_support(&self, other: &DensityMatrix) -> Result<()> {
        if self.region != other.region || self.dim() != other.dim() {
            return Err(Error::RegionMismatch("density matrices live on different spaces".into()));
        }
        Ok(())
    }
}

fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let adj = m.adjoint();
    (m + adj) * Complex64::new(0.5, 0.0)
}

fn clipped_spectrum(matrix: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = SymmetricEigen::new(matrix.clone()).eigenvalues.iter().copied().collect();
    for v in values.iter_mut() {
        if *v < -NEGATIVE_CLIP {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {v:e}")));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Eigenvalues of a Hermitian matrix, decreasing, without positivity checks.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(hermitize(m.clone())).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Number of eigenvalues above `RANK_THRESHOLD × max |λ|`.
pub(crate) fn numerical_rank(values: &[f64]) -> usize {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0;
    }
    values.iter().filter(|v| v.abs() > RANK_THRESHOLD * max).count()
}

/// `S(ϱ) = −Σ λ ln λ` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.spectrum.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
}

/// `S_α(ϱ) = ln tr ϱ^α / (1 − α)` in nats.
pub fn renyi_entropy(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    if alpha <= 0.0 || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("Rényi order must be positive and ≠ 1, got {alpha}")));
    }
    let tr: f64 = rho.spectrum.iter().filter(|&&l| l > 0.0).map(|&l| l.powf(alpha)).sum();
    Ok(tr.ln() / (1.0 - alpha))
}

/// `τ(n) = Σ_{j>n} λ_j↓`, evaluated as `1 − Σ_{j≤n} λ_j↓` and clamped at 0.
pub fn spectral_tail(rho: &DensityMatrix, n: usize) -> f64 {
    if n >= rho.spectrum.len() {
        return 0.0;
    }
    let head: f64 = rho.spectrum[..n].iter().sum();
    let trace: f64 = rho.spectrum.iter().sum();
    (trace - head).max(0.0)
}

/// `‖ϱ₁ − ϱ₂‖₁`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    r1.same_support(r2)?;
    Ok(hermitian_eigenvalues(&(&r1.matrix - &r2.matrix)).iter().map(|v| v.abs()).sum())
}

/// Numerical rank of `ϱ₁ − ϱ₂`.
pub fn difference_rank(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<usize> {
    r1.same_support(r2)?;
    Ok(numerical_rank(&hermitian_eigenvalues(&(&r1.matrix - &r2.matrix))))
}
