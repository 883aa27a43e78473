//! Dense complex matrix kernels for bipartite operators.
//!
//! A [`BipartiteMatrix`] on `C^{dim_a} ⊗ C^{dim_b}` is indexed so that the
//! product basis vector `|i⟩⊗|k⟩` (zero-based) sits at row `i * dim_b + k`.
//! Eigenvalues and singular values come from `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used by [`hermitian_eigenvalues`] and [`is_psd`] to accept an
/// input as Hermitian, relative to `max(1, ‖m‖_F)`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default PSD tolerance.
pub const PSD_TOL: f64 = 1e-10;

const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
const DENSITY_TRACE_TOL: f64 = 1e-12;
const DENSITY_PSD_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareComplexMatrix(CMatrix);

impl SquareComplexMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        for col in 0..m.ncols() {
            for row in 0..m.nrows() {
                let z = m[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds from a closure; the caller guarantees finite values.
    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(CMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| c(rows[i][j])))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = CMatrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = c(*v);
        }
        Self(m)
    }

    /// Matrix unit `E_ij` with zero-based `i`, `j`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, j)] = c(1.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|m_ij - conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }
}

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Operator on `C^{dim_a} ⊗ C^{dim_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteMatrix {
    dim_a: usize,
    dim_b: usize,
    matrix: SquareComplexMatrix,
}

impl BipartiteMatrix {
    pub fn new(dim_a: usize, dim_b: usize, matrix: SquareComplexMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || matrix.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "matrix of dimension {} cannot act on {}⊗{}",
                matrix.dim(),
                dim_a,
                dim_b
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix,
        })
    }

    /// Builds from `f(i, k, j, l) = ⟨i,k|M|j,l⟩` (zero-based).
    pub fn from_fn(
        dim_a: usize,
        dim_b: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> Complex64,
    ) -> Self {
        let m = CMatrix::from_fn(dim_a * dim_b, dim_a * dim_b, |r, s| {
            f(r / dim_b, r % dim_b, s / dim_b, s % dim_b)
        });
        Self {
            dim_a,
            dim_b,
            matrix: SquareComplexMatrix(m),
        }
    }

    pub fn zeros(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            matrix: SquareComplexMatrix::zeros(dim_a * dim_b),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    #[inline]
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.dim_b + k
    }

    /// `⟨i,k|M|j,l⟩`, zero-based.
    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> Complex64 {
        self.matrix.0[(self.index(i, k), self.index(j, l))]
    }

    pub(crate) fn add_at(&mut self, i: usize, k: usize, j: usize, l: usize, v: Complex64) {
        let (r, s) = (self.index(i, k), self.index(j, l));
        self.matrix.0[(r, s)] += v;
    }

    pub fn matrix(&self) -> &SquareComplexMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.matrix.0
    }

    pub fn into_square(self) -> SquareComplexMatrix {
        self.matrix
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim_a != other.dim_a || self.dim_b != other.dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{}⊗{} vs {}⊗{}",
                self.dim_a, self.dim_b, other.dim_a, other.dim_b
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: SquareComplexMatrix(&self.matrix.0 + &other.matrix.0),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: SquareComplexMatrix(&self.matrix.0 - &other.matrix.0),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: self.matrix.scale(s),
        }
    }

    /// Conjugation `(U⊗V) M (U⊗V)†`.
    pub fn local_conjugate(&self, u: &CMatrix, v: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim_a || v.nrows() != self.dim_b {
            return Err(Error::DimensionMismatch("local unitary sizes".into()));
        }
        let uv = u.kronecker(v);
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            matrix: SquareComplexMatrix(&uv * &self.matrix.0 * uv.adjoint()),
        })
    }

    /// Exchanges the two tensor factors.
    pub fn swap_factors(&self) -> Self {
        Self::from_fn(self.dim_b, self.dim_a, |k, i, l, j| self.get(i, k, j, l))
    }
}

/// A validated bipartite density operator: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    state: BipartiteMatrix,
}

impl DensityMatrix {
    pub fn new(state: BipartiteMatrix) -> Result<Self> {
        let dev = state.matrix.hermitian_deviation();
        if dev > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotADensityMatrix(format!(
                "Hermitian deviation {dev:e}"
            )));
        }
        let tr = state.matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::NotADensityMatrix(format!("trace {tr}")));
        }
        let min = min_eigenvalue(&state.matrix)?;
        if min < -DENSITY_PSD_TOL {
            return Err(Error::NotADensityMatrix(format!(
                "minimum eigenvalue {min:e}"
            )));
        }
        Ok(Self { state })
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let d = dim_a * dim_b;
        Self {
            state: BipartiteMatrix::new(
                dim_a,
                dim_b,
                SquareComplexMatrix::identity(d).scale(1.0 / d as f64),
            )
            .expect("dimensions agree"),
        }
    }

    /// `|ψ⟩⟨ψ|` for a vector on `C^{dim_a} ⊗ C^{dim_b}`, normalized first.
    pub fn pure(dim_a: usize, dim_b: usize, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch("state vector length".into()));
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotADensityMatrix("zero vector".into()));
        }
        let m = CMatrix::from_fn(psi.len(), psi.len(), |r, s| {
            psi[r] * psi[s].conj() / (norm * norm)
        });
        Self::new(BipartiteMatrix::new(
            dim_a,
            dim_b,
            SquareComplexMatrix::new(m)?,
        )?)
    }

    pub fn state(&self) -> &BipartiteMatrix {
        &self.state
    }

    pub fn into_state(self) -> BipartiteMatrix {
        self.state
    }

    pub fn dim_a(&self) -> usize {
        self.state.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.state.dim_b
    }
}

/// Kronecker product; the result acts on `C^{dim a} ⊗ C^{dim b}`.
pub fn kron(a: &SquareComplexMatrix, b: &SquareComplexMatrix) -> BipartiteMatrix {
    BipartiteMatrix {
        dim_a: a.dim(),
        dim_b: b.dim(),
        matrix: SquareComplexMatrix(a.0.kronecker(&b.0)),
    }
}

/// Transposes the indices of one factor.
pub fn partial_transpose(m: &BipartiteMatrix, subsystem: Subsystem) -> BipartiteMatrix {
    match subsystem {
        Subsystem::Second => {
            BipartiteMatrix::from_fn(m.dim_a, m.dim_b, |i, k, j, l| m.get(i, l, j, k))
        }
        Subsystem::First => {
            BipartiteMatrix::from_fn(m.dim_a, m.dim_b, |i, k, j, l| m.get(j, k, i, l))
        }
    }
}

/// Traces out the factor that is not kept.
pub fn partial_trace(m: &BipartiteMatrix, keep: Subsystem) -> SquareComplexMatrix {
    match keep {
        Subsystem::First => SquareComplexMatrix::from_fn(m.dim_a, |i, j| {
            (0..m.dim_b).map(|k| m.get(i, k, j, k)).sum()
        }),
        Subsystem::Second => SquareComplexMatrix::from_fn(m.dim_b, |k, l| {
            (0..m.dim_a).map(|i| m.get(i, k, i, l)).sum()
        }),
    }
}

/// Realignment `R[(i,j),(k,l)] = ⟨i,k|M|j,l⟩`, a `dim_a² × dim_b²` matrix.
pub fn realign(m: &BipartiteMatrix) -> CMatrix {
    let (da, db) = (m.dim_a, m.dim_b);
    CMatrix::from_fn(da * da, db * db, |r, s| {
        m.get(r / da, s / db, r % da, s % db)
    })
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &SquareComplexMatrix) -> Result<Vec<f64>> {
    let (eig, shift) = shifted_eigen(m)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|v| v - shift).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues (ascending) and matching unit eigenvectors (as columns).
pub fn hermitian_eigen(m: &SquareComplexMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (eig, shift) = shifted_eigen(m)?;
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k] - shift).collect();
    let vectors = CMatrix::from_fn(m.dim(), m.dim(), |r, s| eig.eigenvectors[(r, order[s])]);
    Ok((values, vectors))
}

/// Eigendecomposition of `m + sI`, `s = 2‖m‖_F`, together with `s`.
fn shifted_eigen(
    m: &SquareComplexMatrix,
) -> Result<(SymmetricEigen<Complex64, nalgebra::Dyn>, f64)> {
    check_hermitian(m)?;
    let shift = 2.0 * m.frobenius_norm();
    let dim = m.dim();
    let eig = SymmetricEigen::new(&m.0 + CMatrix::identity(dim, dim) * c(shift));
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence("Hermitian eigendecomposition"));
    }
    Ok((eig, shift))
}

pub fn min_eigenvalue(m: &SquareComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?[0])
}

fn check_hermitian(m: &SquareComplexMatrix) -> Result<()> {
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL * m.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// `true` iff the smallest eigenvalue is at least `-tol * max(1, ‖m‖_F)`.
pub fn is_psd(m: &SquareComplexMatrix, tol: f64) -> Result<bool> {
    let min = min_eigenvalue(m)?;
    Ok(min >= -tol * m.frobenius_norm().max(1.0))
}

/// `Tr(A B)` for square matrices of equal size.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}
