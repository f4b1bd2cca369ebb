//! Matrix Pochhammer symbols `(A)_n = A(A+I)⋯(A+(n−1)I)`.
//!
//! Factors are multiplied in ascending order, left to right. The inverse is built from
//! factor inverses in descending order so it is the exact inverse of that product.

use crate::error::{Error, Result};
use crate::matrix::{add_shift, inverse, ComplexMatrix, ToleranceConfig};

/// `(A)_n`. `(A)_0 = I`.
pub fn pochhammer(a: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::identity(a.dim());
    for j in 0..n {
        p = poch_step(&p, a, j);
    }
    p
}

/// One step of the recurrence: given `P = (A)_n`, returns `(A)_{n+1} = P · (A + nI)`.
pub fn poch_step(p: &ComplexMatrix, a: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let factor = add_shift(a, n as i64);
    let mut out = ComplexMatrix::zeros(a.dim());
    ComplexMatrix::matmul_into(p, &factor, &mut out);
    out
}

/// `(C)_n⁻¹ = (C+(n−1)I)⁻¹ ⋯ (C+I)⁻¹ C⁻¹`.
///
/// A singular factor is reported as [`Error::SingularParameter`] carrying the offending shift.
pub fn pochhammer_inv(c: &ComplexMatrix, n: usize, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let mut p = ComplexMatrix::identity(c.dim());
    let mut scratch = ComplexMatrix::zeros(c.dim());
    for j in 0..n {
        let fi = shifted_inverse(c, j as i64, tol)?;
        ComplexMatrix::matmul_into(&fi, &p, &mut scratch);
        std::mem::swap(&mut p, &mut scratch);
    }
    Ok(p)
}

/// `(C + sI)⁻¹`, with failures tagged by the shift.
pub fn shifted_inverse(c: &ComplexMatrix, shift: i64, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    inverse(&add_shift(c, shift), tol).map_err(|e| Error::SingularParameter {
        slot: "C".into(),
        shift,
        source: Box::new(e),
    })
}
