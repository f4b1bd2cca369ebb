//! Numerical evaluation of catalog entries.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::catalog::{Factor, Form, Hypothesis, IdentityEntry, RhsTerm, Summation, Variant};
use crate::error::{Error, Result};
use crate::kind::LauricellaKind;
use crate::matrix::{add_shift, commutes, frobenius_norm, inverse, sub, ComplexMatrix, ToleranceConfig};
use crate::pochhammer::{pochhammer, pochhammer_inv};
use crate::series::{evaluate_shifted, ParameterSet, SeriesConfig};

/// Both sides of an identity at one point.
#[derive(Debug, Clone)]
pub struct IdentityEvaluation {
    pub lhs: ComplexMatrix,
    pub rhs: ComplexMatrix,
    /// `‖lhs − rhs‖_F / (1 + ‖lhs‖_F)`.
    pub residual: f64,
    /// Every series call met its stopping criterion.
    pub converged: bool,
}

/// Checks the commutation and invertibility hypotheses of `entry` at magnitude `n`.
pub fn check_hypotheses(entry: &IdentityEntry, params: &ParameterSet, n: u32, tol: &ToleranceConfig) -> Result<()> {
    params.validate(&entry.kind)?;
    let n = entry.lhs().effective(n) as i64;
    for h in &entry.hypotheses {
        match *h {
            Hypothesis::Commute(a, b) => {
                if !commutes(params.slot(a), params.slot(b), tol) {
                    return Err(Error::HypothesisViolation(format!(
                        "{} and {} do not commute ({})",
                        entry.slot_name(a),
                        entry.slot_name(b),
                        entry.id
                    )));
                }
            }
            Hypothesis::Invertible { slot, sign, from } => {
                for j in from..=n {
                    if inverse(&add_shift(params.slot(slot), sign * j), tol).is_err() {
                        let op = if sign > 0 { '+' } else { '-' };
                        return Err(Error::HypothesisViolation(format!(
                            "{} {op} {j}I is not invertible ({})",
                            entry.slot_name(slot),
                            entry.id
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Evaluates one form of an entry after checking its hypotheses.
pub fn evaluate_identity(
    entry: &IdentityEntry,
    form: Form,
    params: &ParameterSet,
    x: &[Complex64],
    n: u32,
    cfg: &SeriesConfig,
    tol: &ToleranceConfig,
) -> Result<IdentityEvaluation> {
    check_hypotheses(entry, params, n, tol)?;
    let mut ev = Evaluator::new(&entry.kind, params, x, cfg, tol);
    let variant = entry.variant(form);
    let lhs = ev.lhs(variant, n)?;
    let rhs = ev.rhs(variant, n)?;
    let residual = frobenius_norm(&sub(&lhs, &rhs)?) / (1.0 + frobenius_norm(&lhs));
    Ok(IdentityEvaluation {
        lhs,
        rhs,
        residual,
        converged: ev.converged,
    })
}

/// The shifted series on the left-hand side (corrected form).
pub fn eval_lhs(
    entry: &IdentityEntry,
    params: &ParameterSet,
    x: &[Complex64],
    n: u32,
    cfg: &SeriesConfig,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    check_hypotheses(entry, params, n, tol)?;
    Evaluator::new(&entry.kind, params, x, cfg, tol).lhs(entry.variant(Form::Corrected), n)
}

/// The right-hand side (corrected form).
pub fn eval_rhs(
    entry: &IdentityEntry,
    params: &ParameterSet,
    x: &[Complex64],
    n: u32,
    cfg: &SeriesConfig,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    check_hypotheses(entry, params, n, tol)?;
    Evaluator::new(&entry.kind, params, x, cfg, tol).rhs(entry.variant(Form::Corrected), n)
}

/// Relative residual of the corrected form.
pub fn residual(
    entry: &IdentityEntry,
    params: &ParameterSet,
    x: &[Complex64],
    n: u32,
    cfg: &SeriesConfig,
    tol: &ToleranceConfig,
) -> Result<f64> {
    evaluate_identity(entry, Form::Corrected, params, x, n, cfg, tol).map(|e| e.residual)
}

struct Evaluator<'a> {
    kind: &'a LauricellaKind,
    params: &'a ParameterSet,
    x: &'a [Complex64],
    cfg: &'a SeriesConfig,
    tol: &'a ToleranceConfig,
    names: Vec<String>,
    memo: HashMap<Vec<i64>, ComplexMatrix>,
    converged: bool,
}

impl<'a> Evaluator<'a> {
    fn new(
        kind: &'a LauricellaKind,
        params: &'a ParameterSet,
        x: &'a [Complex64],
        cfg: &'a SeriesConfig,
        tol: &'a ToleranceConfig,
    ) -> Self {
        Self {
            kind,
            params,
            x,
            cfg,
            tol,
            names: kind.signature().into_iter().map(|s| s.name).collect(),
            memo: HashMap::new(),
            converged: true,
        }
    }

    fn series(&mut self, shifts: Vec<i64>) -> Result<ComplexMatrix> {
        if let Some(v) = self.memo.get(&shifts) {
            return Ok(v.clone());
        }
        let named: Vec<(String, i64)> = shifts
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != 0)
            .map(|(i, s)| (self.names[i].clone(), *s))
            .collect();
        let r = evaluate_shifted(self.kind, self.params, &named, self.x, self.cfg, self.tol)?;
        self.converged &= r.converged;
        self.memo.insert(shifts, r.value.clone());
        Ok(r.value)
    }

    fn lhs(&mut self, v: &Variant, n: u32) -> Result<ComplexMatrix> {
        let mut shifts = vec![0; self.names.len()];
        shifts[v.lhs.target] = v.lhs.signed(n);
        self.series(shifts)
    }

    fn rhs(&mut self, v: &Variant, n: u32) -> Result<ComplexMatrix> {
        let n = v.lhs.effective(n) as i64;
        let mut acc = ComplexMatrix::zeros(self.params.dim());
        for term in &v.rhs {
            self.add_term(&mut acc, term, n)?;
        }
        Ok(acc)
    }

    fn add_term(&mut self, acc: &mut ComplexMatrix, term: &RhsTerm, n: i64) -> Result<()> {
        let sign = if term.negative { -1.0 } else { 1.0 };
        for (vars, weight) in assignments(&term.summation, n)? {
            let mut scalar = Complex64::new(sign * weight, 0.0);
            for p in &term.scalars {
                let e = p.exponent.eval(n, &vars);
                if e < 0 {
                    return Err(Error::InvalidParameters(format!("negative exponent {e}")));
                }
                let base = if p.negate { -self.x[p.axis] } else { self.x[p.axis] };
                scalar *= base.powi(e as i32);
            }
            let mut shifts = vec![0; self.names.len()];
            for (s, l) in &term.series {
                shifts[*s] += l.eval(n, &vars);
            }
            let mut m = ComplexMatrix::identity(self.params.dim());
            let mut scratch = ComplexMatrix::zeros(self.params.dim());
            for f in &term.left {
                ComplexMatrix::matmul_into(&m, &self.factor(f, n, &vars)?, &mut scratch);
                std::mem::swap(&mut m, &mut scratch);
            }
            ComplexMatrix::matmul_into(&m, &self.series(shifts)?, &mut scratch);
            std::mem::swap(&mut m, &mut scratch);
            for f in &term.right {
                ComplexMatrix::matmul_into(&m, &self.factor(f, n, &vars)?, &mut scratch);
                std::mem::swap(&mut m, &mut scratch);
            }
            acc.add_scaled_assign(scalar, &m);
        }
        Ok(())
    }

    fn factor(&self, f: &Factor, n: i64, vars: &[i64]) -> Result<ComplexMatrix> {
        let named = |slot: usize, shift: i64| {
            let name = self.names[slot].clone();
            move |e: Error| match e {
                Error::SingularParameter { shift: s, source, .. } => Error::SingularParameter {
                    slot: name,
                    shift: s + shift,
                    source,
                },
                other => Error::SingularParameter {
                    slot: name,
                    shift,
                    source: Box::new(other),
                },
            }
        };
        let length = |l: &crate::catalog::Lin| -> Result<usize> {
            let v = l.eval(n, vars);
            usize::try_from(v).map_err(|_| Error::InvalidParameters(format!("negative Pochhammer length {v}")))
        };
        match f {
            Factor::Param(s) => Ok(self.params.slot(*s).clone()),
            Factor::Poch(s, l) => Ok(pochhammer(self.params.slot(*s), length(l)?)),
            Factor::IPoch(s, l) => pochhammer_inv(self.params.slot(*s), length(l)?, self.tol).map_err(named(*s, 0)),
            Factor::InvShift(s, l) => {
                let k = l.eval(n, vars);
                inverse(&add_shift(self.params.slot(*s), k), self.tol).map_err(named(*s, k))
            }
        }
    }
}

/// Summation-variable assignments of a term with their integer weights.
fn assignments(s: &Summation, n: i64) -> Result<Vec<(Vec<i64>, f64)>> {
    Ok(match s {
        Summation::None => vec![(Vec::new(), 1.0)],
        Summation::Range { var, lo, hi } => {
            let (lo, hi) = (lo.eval(n, &[]), hi.eval(n, &[]));
            (lo..=hi)
                .map(|v| {
                    let mut vars = vec![0; var + 1];
                    vars[*var] = v;
                    (vars, 1.0)
                })
                .collect()
        }
        Summation::Multinomial { parts } => {
            if n < 0 {
                return Err(Error::InvalidParameters(format!("negative magnitude {n}")));
            }
            let mut out = Vec::new();
            let mut cur = vec![0i64; *parts];
            compositions(&mut cur, 0, n, &mut out);
            out.into_iter()
                .map(|v| {
                    let w = multinomial(n, &v);
                    (v, w)
                })
                .collect()
        }
    })
}

/// All tuples with non-negative entries summing to at most `budget`.
fn compositions(cur: &mut Vec<i64>, pos: usize, budget: i64, out: &mut Vec<Vec<i64>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for v in 0..=budget {
        cur[pos] = v;
        compositions(cur, pos + 1, budget - v, out);
    }
    cur[pos] = 0;
}

/// `n! / (v1! ⋯ vp! (n − Σv)!)` as a product of binomials.
fn multinomial(n: i64, v: &[i64]) -> f64 {
    let mut rest = n;
    let mut w = 1.0;
    for &k in v {
        w *= binomial(rest, k);
        rest -= k;
    }
    w
}

fn binomial(n: i64, k: i64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
