use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::eigen::{hermitian_eigen, Eigen};
use crate::error::{Error, Result};

/// Complex scalar used throughout the engine.
pub type Complex = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from rows of real numbers.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| c(x, 0.0))).collect();
        Self::from_vec(r, cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
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

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn trace(&self) -> Result<Complex> {
        if !self.is_square() {
            return Err(Error::Dimension("trace of a non-square matrix".into()));
        }
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    /// Traces out subsystem `traced` of a square matrix on `dims[0] ⊗ dims[1] ⊗ ...`.
    pub fn partial_trace(&self, dims: &[usize], traced: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || total != self.rows {
            return Err(Error::Dimension(format!("matrix of dim {} does not factor as {:?}", self.rows, dims)));
        }
        if traced >= dims.len() {
            return Err(Error::Dimension(format!("no subsystem {traced} in {dims:?}")));
        }
        let d_mid = dims[traced];
        let d_left: usize = dims[..traced].iter().product();
        let d_right: usize = dims[traced + 1..].iter().product();
        let n = d_left * d_right;
        let idx = |l: usize, m: usize, r: usize| (l * d_mid + m) * d_right + r;
        Ok(Self::from_fn(n, n, |i, j| {
            let (li, ri) = (i / d_right, i % d_right);
            let (lj, rj) = (j / d_right, j % d_right);
            (0..d_mid).map(|m| self[(idx(li, m, ri), idx(lj, m, rj))]).sum()
        }))
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.data.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn hermiticity_defect(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::Dimension("non-square matrix cannot be Hermitian".into()));
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn apply(&self, v: &StateVector) -> Result<Vec<Complex>> {
        if self.cols != v.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix applied to dim-{} vector",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok((0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v.amplitudes()[j]).sum()).collect())
    }

    /// Hermitian part `(M + M†)/2`, used to scrub roundoff asymmetry.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex>,
}

impl StateVector {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(amps: Vec<Complex>) -> Result<Self> {
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        let norm = norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<Complex>) -> Result<Self> {
        let norm = norm(&amps);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amps.into_iter().map(|z| z / norm).collect())
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = vec![c(0.0, 0.0); dim];
        amps[k] = c(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex> {
        inner(&self.amps, &other.amps)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let amps = self.amps.iter().flat_map(|&a| other.amps.iter().map(move |&b| a * b)).collect();
        Self { amps }
    }

    /// `⟨self|M|self⟩`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Result<Complex> {
        inner(&self.amps, &m.apply(self)?)
    }

    pub fn projector(&self) -> ComplexMatrix {
        outer(&self.amps, &self.amps)
    }
}

pub(crate) fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a|b⟩` for raw amplitude slices.
pub(crate) fn inner(a: &[Complex], b: &[Complex]) -> Result<Complex> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("inner product of dims {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
}

/// `|a⟩⟨b|`.
pub(crate) fn outer(a: &[Complex], b: &[Complex]) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

/// Hermitian, unit-trace, positive semi-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity at the default tolerances.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_psd_tolerance(matrix, PSD_TOL)
    }

    pub fn with_psd_tolerance(matrix: ComplexMatrix, psd_tol: f64) -> Result<Self> {
        let herm = matrix.hermiticity_defect()?;
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace()?;
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = hermitian_eigen(&matrix)?.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -psd_tol {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix })
    }

    /// Normalizes a Hermitian matrix by its trace and validates the result.
    pub fn from_unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        let tr = matrix.trace()?.re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(matrix.hermitian_part().scale_real(1.0 / tr))
    }

    pub fn pure(state: &StateVector) -> Self {
        Self { matrix: state.projector() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Convex combination `Σ w_k ρ_k` with weights summing to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Dimension("empty mixture".into()))?;
        let mut acc = ComplexMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidParameter(format!("negative mixture weight {w}")));
            }
            acc = acc.add(&rho.matrix.scale_real(*w))?;
        }
        Self::from_unnormalized(acc)
    }

    pub fn eigen(&self) -> Result<Eigen> {
        hermitian_eigen(&self.matrix)
    }

    pub fn partial_trace(&self, dims: &[usize], traced: usize) -> Result<Self> {
        Self::new(self.matrix.partial_trace(dims, traced)?)
    }
}
