//! Dense complex vectors and matrices sized for this protocol.
//!
//! Everything here targets dimensions 3 and 9. Storage is row-major and
//! operations are written for clarity rather than asymptotic speed. The
//! matrix exponential goes through a cyclic Jacobi eigendecomposition, which
//! at these sizes is exact to machine precision and keeps the crate free of
//! linear-algebra dependencies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Complex double-precision scalar used throughout the crate.
pub type C64 = Complex64;

/// Maximum Jacobi sweeps before the eigensolver gives up refining; the
/// method converges quadratically, so 9x9 inputs settle in well under ten.
const MAX_JACOBI_SWEEPS: usize = 64;

/// Column vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps a non-empty amplitude list.
    pub fn new(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "state vector needs at least one amplitude");
        Self { amps }
    }

    /// All-zero vector of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![C64::ZERO; dim])
    }

    /// Computational basis vector with a 1 at position `k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut v = Self::zeros(dim);
        v.amps[k] = C64::ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Inner product ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                op: "inner",
                lhs: format!("{}", self.dim()),
                rhs: format!("{}", other.dim()),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Squared Euclidean norm.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                op: "sub",
                lhs: format!("{}", self.dim()),
                rhs: format!("{}", other.dim()),
            });
        }
        Ok(Self::new(
            self.amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// True when |⟨v|v⟩ − 1| is within [`tol::NORMALIZATION_TOL`].
    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol::NORMALIZATION_TOL
    }

    pub fn scaled(&self, s: C64) -> StateVector {
        Self::new(self.amps.iter().map(|a| a * s).collect())
    }

    /// Kronecker product; index layout is `i_self * other.dim() + i_other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self::new(amps)
    }

    /// Rank-one operator |self⟩⟨other|.
    pub fn outer(&self, other: &StateVector) -> OperatorMatrix {
        OperatorMatrix::from_fn(self.dim(), other.dim(), |i, j| {
            self.amps[i] * other.amps[j].conj()
        })
    }

    /// Largest entrywise amplitude difference against another vector.
    pub fn max_diff(&self, other: &StateVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::ShapeMismatch {
                op: "max_diff",
                lhs: format!("{}", self.dim()),
                rhs: format!("{}", other.dim()),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

impl std::ops::IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.amps[i]
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn shape(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    pub fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> OperatorMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.zip_entries("add", rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.zip_entries("sub", rhs, |a, b| a - b)
    }

    fn zip_entries(
        &self,
        op: &'static str,
        rhs: &OperatorMatrix,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<OperatorMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch {
                op,
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: C64) -> OperatorMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == C64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self |v⟩`.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.cols != v.dim() {
            return Err(Error::ShapeMismatch {
                op: "apply",
                lhs: self.shape(),
                rhs: format!("{}", v.dim()),
            });
        }
        let mut out = StateVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = C64::ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Kronecker product; entry `(i*rows_b + k, j*cols_b + l)` equals
    /// `self[i,j] * rhs[k,l]`, so each entry is a single product and nested
    /// tensoring never reassociates floating-point multiplications beyond
    /// the product structure itself.
    pub fn tensor(&self, rhs: &OperatorMatrix) -> OperatorMatrix {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let aij = self[(i, j)];
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = aij * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Result<C64> {
        let n = self.require_square("trace")?;
        Ok((0..n).map(|i| self[(i, i)]).sum())
    }

    /// Largest entrywise magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise magnitude of `self − rhs`.
    pub fn max_norm_diff(&self, rhs: &OperatorMatrix) -> Result<f64> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch {
                op: "max_norm_diff",
                lhs: self.shape(),
                rhs: rhs.shape(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// ‖U†U − I‖_max; zero for an exactly unitary matrix.
    pub fn unitarity_defect(&self) -> Result<f64> {
        let n = self.require_square("unitarity_defect")?;
        let gram = self.adjoint().matmul(self)?;
        gram.max_norm_diff(&Self::identity(n))
    }

    /// True when square and within [`tol::UNITARITY_TOL`] of unitarity.
    pub fn is_unitary(&self) -> bool {
        matches!(self.unitarity_defect(), Ok(d) if d <= tol::UNITARITY_TOL)
    }

    /// ‖A − A†‖_max; zero for an exactly Hermitian matrix.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        let n = self.require_square("hermiticity_defect")?;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        Ok(worst)
    }

    /// True when square and within [`tol::HERMITICITY_TOL`] of Hermiticity.
    pub fn is_hermitian(&self) -> bool {
        matches!(self.hermiticity_defect(), Ok(d) if d <= tol::HERMITICITY_TOL)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order together with a unitary matrix
    /// whose columns are the matching eigenvectors, so `A = V Λ V†`. The
    /// input is symmetrized before iterating; anything farther than
    /// [`tol::HERMITICITY_TOL`] from Hermitian is rejected.
    pub fn eigh(&self) -> Result<(Vec<f64>, OperatorMatrix)> {
        let n = self.require_square("eigh")?;
        let defect = self.hermiticity_defect()?;
        if defect > tol::HERMITICITY_TOL {
            return Err(Error::NonHermitianInput {
                defect,
                tol: tol::HERMITICITY_TOL,
            });
        }

        // Roundoff in the caller's entries must not bias the rotations, so
        // iterate on the exactly Hermitian average of A and A†.
        let mut a = Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5);
        let mut v = Self::identity(n);

        let frob: f64 = a.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let stop = 1e-15 * (1.0 + frob);

        for _ in 0..MAX_JACOBI_SWEEPS {
            let off: f64 = {
                let mut s = 0.0;
                for p in 0..n {
                    for q in (p + 1)..n {
                        s += a[(p, q)].norm_sqr();
                    }
                }
                s.sqrt()
            };
            if off <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r <= stop * 1e-2 {
                        continue;
                    }
                    let phase = apq / r;
                    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let sp = s * phase;
                    let spc = s * phase.conj();

                    // A <- A J with J[p,p]=c, J[p,q]=s*phase,
                    // J[q,p]=-s*conj(phase), J[q,q]=c.
                    for i in 0..n {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = c * aip - spc * aiq;
                        a[(i, q)] = sp * aip + c * aiq;
                    }
                    // A <- J† A.
                    for j in 0..n {
                        let apj = a[(p, j)];
                        let aqj = a[(q, j)];
                        a[(p, j)] = c * apj - sp * aqj;
                        a[(q, j)] = spc * apj + c * aqj;
                    }
                    // Accumulate V <- V J.
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = c * vip - spc * viq;
                        v[(i, q)] = sp * vip + c * viq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&x, &y| vals[x].partial_cmp(&vals[y]).expect("finite eigenvalues"));

        let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        let sorted_vecs = Self::from_fn(n, n, |i, j| v[(i, order[j])]);
        Ok((sorted_vals, sorted_vecs))
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = self.eigh()?;
        Ok(vals[0])
    }

    /// True when Hermitian with all eigenvalues at least `-PSD_TOL`.
    pub fn is_psd(&self) -> bool {
        matches!(self.min_eigenvalue(), Ok(min) if min >= -tol::PSD_TOL)
    }
}

impl std::ops::Index<(usize, usize)> for OperatorMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for OperatorMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Unitary `exp(−i · scale · h)` of a Hermitian matrix, computed by
/// eigendecomposition: `h = V Λ V†` gives `V e^{−i·scale·Λ} V†`.
pub fn expm_hermitian(h: &OperatorMatrix, scale: f64) -> Result<OperatorMatrix> {
    if !scale.is_finite() {
        return Err(Error::InvalidTheta { theta: scale });
    }
    let (vals, vecs) = h.eigh()?;
    let mut phased = vecs.clone();
    for (k, &lambda) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, -scale * lambda);
        for i in 0..phased.rows() {
            phased[(i, k)] *= phase;
        }
    }
    phased.matmul(&vecs.adjoint())
}
