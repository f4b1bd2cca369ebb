//! Dense complex square matrices.
//!
//! Every parameter, Pochhammer product and series value in this crate is a
//! [`ComplexMatrix`]. Sizes are small (r ≤ 8 in practice), so storage is a flat
//! row-major `Vec` and all kernels are plain loops.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest entry declare the matrix singular.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

/// Tolerances shared by matrix checks and identity validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative Frobenius bound used by [`commutes`].
    pub commute_tol: f64,
    /// Ceiling on `‖A‖_F · ‖A⁻¹‖_F` accepted by [`inverse`].
    pub invert_cond_max: f64,
    /// Residual at or below which an identity instantiation passes.
    pub residual_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            commute_tol: 1e-10,
            invert_cond_max: 1e12,
            residual_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    /// Defaults with the residual tolerance appropriate for matrix size `dim`:
    /// 1e-10 for scalars, 1e-8 otherwise.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            residual_tol: if dim <= 1 { 1e-10 } else { 1e-8 },
            ..Self::default()
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Complex64::new(1.0, 0.0))
    }

    /// `value · I`.
    pub fn scalar(dim: usize, value: Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = value;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.entries[i * diag.len() + i] = *d;
        }
        m
    }

    /// Builds a matrix from row-major entries; the count must be a positive square.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedMatrix("dim must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::MalformedMatrix(format!(
                "expected {} entries for dim {}, found {}",
                dim * dim,
                dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::MalformedMatrix("entries must be finite".into()));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<Complex64> = rows.iter().flatten().copied().collect();
        Self::from_entries(dim, entries)
    }

    /// 1×1 matrix holding `value`.
    pub fn from_scalar(value: Complex64) -> Self {
        Self {
            dim: 1,
            entries: vec![value],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.is_finite())
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// `self += factor · other`. Dimensions must agree.
    #[inline]
    pub fn add_scaled_assign(&mut self, factor: Complex64, other: &Self) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += factor * b;
        }
    }

    /// Writes `a · b` into `out` without allocating. All three share one dimension.
    #[inline]
    pub fn matmul_into(a: &Self, b: &Self, out: &mut Self) {
        let n = a.dim;
        debug_assert!(b.dim == n && out.dim == n);
        if n == 1 {
            out.entries[0] = a.entries[0] * b.entries[0];
            return;
        }
        for i in 0..n {
            let row = &a.entries[i * n..(i + 1) * n];
            let dst = &mut out.entries[i * n..(i + 1) * n];
            dst.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (k, aik) in row.iter().enumerate() {
                let brow = &b.entries[k * n..(k + 1) * n];
                for (d, bkj) in dst.iter_mut().zip(brow) {
                    *d += aik * bkj;
                }
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.entries[j * n + i] = self.entries[i * n + j];
            }
        }
        t
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6e}{:+.6e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn add(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_dims(b)?;
    Ok(ComplexMatrix {
        dim: a.dim,
        entries: a.entries.iter().zip(&b.entries).map(|(x, y)| x + y).collect(),
    })
}

pub fn sub(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_dims(b)?;
    Ok(ComplexMatrix {
        dim: a.dim,
        entries: a.entries.iter().zip(&b.entries).map(|(x, y)| x - y).collect(),
    })
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_dims(b)?;
    let mut out = ComplexMatrix::zeros(a.dim);
    ComplexMatrix::matmul_into(a, b, &mut out);
    Ok(out)
}

/// `A + n·I`. The integer lands on the diagonal exactly, so opposite shifts cancel bit-for-bit
/// whenever the diagonal sums are exact.
pub fn add_shift(a: &ComplexMatrix, n: i64) -> ComplexMatrix {
    let mut out = a.clone();
    let shift = n as f64;
    for i in 0..a.dim {
        out.entries[i * a.dim + i].re += shift;
    }
    out
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    sub(&matmul(a, b)?, &matmul(b, a)?)
}

/// `‖AB − BA‖_F ≤ commute_tol · (1 + ‖A‖_F ‖B‖_F)`. Mismatched dimensions never commute.
pub fn commutes(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> bool {
    match commutator(a, b) {
        Ok(c) => frobenius_norm(&c) <= tol.commute_tol * (1.0 + frobenius_norm(a) * frobenius_norm(b)),
        Err(_) => false,
    }
}

/// LU factorisation with partial pivoting, stored compactly.
struct Lu {
    dim: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim;
        let threshold = PIVOT_THRESHOLD * a.max_abs();
        let mut lu = a.entries.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(Error::Singular {
                    pivot: pivot_abs,
                    threshold,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[k * n + j];
                    lu[i * n + j] -= sub;
                }
            }
        }
        Ok(Self { dim: n, lu, perm })
    }

    fn inverse(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut inv = ComplexMatrix::zeros(n);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            // Solve L U x = P e_c.
            for (i, v) in col.iter_mut().enumerate() {
                *v = if self.perm[i] == c {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            for i in 0..n {
                let mut s = col[i];
                for j in 0..i {
                    s -= self.lu[i * n + j] * col[j];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for j in (i + 1)..n {
                    s -= self.lu[i * n + j] * col[j];
                }
                col[i] = s / self.lu[i * n + i];
            }
            for i in 0..n {
                inv.entries[i * n + c] = col[i];
            }
        }
        inv
    }
}

/// Inverse via LU with partial pivoting.
///
/// Fails when a pivot falls below `1e-13 · max|a_ij|` or when the Frobenius condition
/// estimate `‖A‖_F · ‖A⁻¹‖_F` exceeds `tol.invert_cond_max`.
pub fn inverse(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let inv = Lu::factor(a)?.inverse();
    if !inv.is_finite() {
        return Err(Error::NonFinite);
    }
    let estimate = frobenius_norm(a) * frobenius_norm(&inv);
    if estimate > tol.invert_cond_max {
        return Err(Error::IllConditioned {
            estimate,
            limit: tol.invert_cond_max,
        });
    }
    Ok(inv)
}

/// `‖A‖_F · ‖A⁻¹‖_F`, or an error if `A` is singular.
pub fn condition_estimate(a: &ComplexMatrix) -> Result<f64> {
    let inv = Lu::factor(a)?.inverse();
    Ok(frobenius_norm(a) * frobenius_norm(&inv))
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            dim: self.dim,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let entries = raw
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::from_entries(raw.dim, entries).map_err(serde::de::Error::custom)
    }
}
