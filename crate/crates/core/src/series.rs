//! Truncated multi-index series evaluation.
//!
//! Terms are summed shell by shell in total degree. Each slot keeps a lazily extended table of
//! its Pochhammer symbols (or inverse symbols) indexed by the slot's axis sum, so a shell of
//! degree `d` costs one matrix product per slot to extend the tables plus one product chain per
//! term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kind::{LauricellaKind, Slot};
use crate::matrix::{add_shift, frobenius_norm, ComplexMatrix, ToleranceConfig};
use crate::parallel::{map_ordered, Execution};
use crate::pochhammer::{pochhammer, pochhammer_inv, shifted_inverse};

/// A point `(x_1, …, x_k)`.
pub type Point = Vec<Complex64>;

/// Parameters of one function, grouped as in the kind's signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub a: Vec<ComplexMatrix>,
    pub b: Vec<ComplexMatrix>,
    pub c: Vec<ComplexMatrix>,
}

impl ParameterSet {
    pub fn new(a: Vec<ComplexMatrix>, b: Vec<ComplexMatrix>, c: Vec<ComplexMatrix>) -> Self {
        Self { a, b, c }
    }

    /// Builds a set from matrices listed in signature order.
    pub fn from_slots(kind: &LauricellaKind, slots: Vec<ComplexMatrix>) -> Result<Self> {
        let (na, nb, nc) = kind.group_sizes();
        if slots.len() != na + nb + nc {
            return Err(Error::InvalidParameters(format!(
                "{kind} takes {} matrices, got {}",
                na + nb + nc,
                slots.len()
            )));
        }
        let mut it = slots.into_iter();
        let a = it.by_ref().take(na).collect();
        let b = it.by_ref().take(nb).collect();
        let c = it.collect();
        Ok(Self { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a
            .first()
            .or(self.b.first())
            .or(self.c.first())
            .map_or(0, |m| m.dim())
    }

    pub fn len(&self) -> usize {
        self.a.len() + self.b.len() + self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Slot `i` in signature order.
    pub fn slot(&self, i: usize) -> &ComplexMatrix {
        self.slots().nth(i).expect("slot index in range")
    }

    pub fn slot_mut(&mut self, i: usize) -> &mut ComplexMatrix {
        self.a
            .iter_mut()
            .chain(self.b.iter_mut())
            .chain(self.c.iter_mut())
            .nth(i)
            .expect("slot index in range")
    }

    pub fn slots(&self) -> impl Iterator<Item = &ComplexMatrix> {
        self.a.iter().chain(self.b.iter()).chain(self.c.iter())
    }

    /// Checks list lengths against the kind and that all matrices share one dimension.
    pub fn validate(&self, kind: &LauricellaKind) -> Result<()> {
        let (na, nb, nc) = kind.group_sizes();
        for (name, got, want) in [("a", self.a.len(), na), ("b", self.b.len(), nb), ("c", self.c.len(), nc)] {
            if got != want {
                return Err(Error::InvalidParameters(format!(
                    "{kind} expects {want} matrices in \"{name}\", got {got}"
                )));
            }
        }
        let dim = self.dim();
        if let Some(m) = self.slots().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: m.dim() });
        }
        if self.slots().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameters("non-finite entry".into()));
        }
        Ok(())
    }

    /// Copy with `add_shift` applied to the listed slots (signature indices).
    pub fn shifted(&self, shifts: &[(usize, i64)]) -> Self {
        let mut out = self.clone();
        for &(i, n) in shifts {
            if n != 0 {
                let m = add_shift(out.slot(i), n);
                *out.slot_mut(i) = m;
            }
        }
        out
    }
}

/// Summation multi-index `(m_1, …, m_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub m: Vec<usize>,
}

impl MultiIndex {
    pub fn new(m: Vec<usize>) -> Self {
        Self { m }
    }

    pub fn total(&self) -> usize {
        self.m.iter().sum()
    }

    /// `N_j = m_1 + … + m_j` for `j = 1..=k`.
    pub fn partial_sums(&self) -> Vec<usize> {
        self.m
            .iter()
            .scan(0, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    /// All multi-indices of length `k` with total degree `d`, in reverse lexicographic order.
    pub fn shell(k: usize, d: usize) -> Shell {
        Shell::new(k, d)
    }
}

/// Iterator over the compositions of `d` into `k` nonnegative parts.
pub struct Shell {
    cur: Vec<usize>,
    done: bool,
}

impl Shell {
    fn new(k: usize, d: usize) -> Self {
        let mut cur = vec![0; k];
        if k > 0 {
            cur[0] = d;
        }
        Self { cur, done: k == 0 }
    }

    /// The current composition, or `None` once exhausted. Call `advance` to move on.
    pub fn next_ref(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        Some(&self.cur)
    }

    fn advance(&mut self) {
        let k = self.cur.len();
        match (0..k.saturating_sub(1)).rev().find(|&p| self.cur[p] > 0) {
            Some(p) => {
                let tail = self.cur[k - 1];
                self.cur[k - 1] = 0;
                self.cur[p] -= 1;
                self.cur[p + 1] = tail + 1;
            }
            None => self.done = true,
        }
    }
}

impl Iterator for Shell {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        self.advance();
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Highest total degree summed.
    pub max_degree: usize,
    /// Stop once a shell's relative norm falls to this value.
    pub term_tol: f64,
    /// Scales the guard region; 1 admits points whose terms decay at least like `2^{-d}`.
    pub domain_guard: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            max_degree: 64,
            term_tol: 1e-14,
            domain_guard: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: ComplexMatrix,
    /// `Σ_{|m|=d} ‖term_m‖_F / (1 + ‖partial sum‖_F)` for the last shell summed.
    pub last_shell_norm: f64,
    pub shells_used: usize,
    pub converged: bool,
}

/// Matrix coefficient of `∏ x_j^{m_j}/m_j!`, factors in signature order.
pub fn coefficient(
    kind: &LauricellaKind,
    params: &ParameterSet,
    m: &MultiIndex,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    params.validate(kind)?;
    if m.m.len() != kind.arity() {
        return Err(Error::InvalidParameters(format!(
            "multi-index has {} entries, {kind} has arity {}",
            m.m.len(),
            kind.arity()
        )));
    }
    let mut out = ComplexMatrix::identity(params.dim());
    let mut scratch = out.clone();
    for (slot, p) in kind.signature().iter().zip(params.slots()) {
        let s: usize = slot.axes.iter().map(|&j| m.m[j]).sum();
        let factor = if slot.group.is_numerator() {
            pochhammer(p, s)
        } else {
            pochhammer_inv(p, s, tol).map_err(|e| rename_slot(e, &slot.name, 0))?
        };
        ComplexMatrix::matmul_into(&out, &factor, &mut scratch);
        std::mem::swap(&mut out, &mut scratch);
    }
    Ok(out)
}

fn rename_slot(err: Error, name: &str, base_shift: i64) -> Error {
    match err {
        Error::SingularParameter { shift, source, .. } => Error::SingularParameter {
            slot: name.to_string(),
            shift: shift + base_shift,
            source,
        },
        other => other,
    }
}

/// Lazily extended `(P)_s` or `(P)_s⁻¹` for one slot.
struct SlotTable<'a> {
    slot: &'a Slot,
    base: &'a ComplexMatrix,
    table: Vec<ComplexMatrix>,
}

impl SlotTable<'_> {
    fn ensure(&mut self, s: usize, tol: &ToleranceConfig) -> Result<()> {
        while self.table.len() <= s {
            let j = self.table.len() - 1;
            let prev = &self.table[j];
            let mut next = ComplexMatrix::zeros(self.base.dim());
            if self.slot.group.is_numerator() {
                ComplexMatrix::matmul_into(prev, &add_shift(self.base, j as i64), &mut next);
            } else {
                let inv = shifted_inverse(self.base, j as i64, tol).map_err(|e| rename_slot(e, &self.slot.name, 0))?;
                ComplexMatrix::matmul_into(&inv, prev, &mut next);
            }
            self.table.push(next);
        }
        Ok(())
    }
}

fn check_point(kind: &LauricellaKind, x: &[Complex64], cfg: &SeriesConfig) -> Result<()> {
    if x.len() != kind.arity() {
        return Err(Error::InvalidParameters(format!(
            "point has {} coordinates, {kind} has arity {}",
            x.len(),
            kind.arity()
        )));
    }
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidParameters("non-finite coordinate".into()));
    }
    if !(cfg.domain_guard > 0.0 && cfg.domain_guard <= 1.0) {
        return Err(Error::InvalidParameters(format!(
            "domain_guard {} outside (0, 1]",
            cfg.domain_guard
        )));
    }
    kind.check_guard(x, cfg.domain_guard)
}

/// Sums the series of `kind` at `x`.
pub fn evaluate(
    kind: &LauricellaKind,
    params: &ParameterSet,
    x: &[Complex64],
    cfg: &SeriesConfig,
    tol: &ToleranceConfig,
) -> Result<SeriesResult> {
    params.validate(kind)?;
    check_point(kind, x, cfg)?;
    let dim = params.dim();
    let k = kind.arity();
    if x.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Ok(SeriesResult {
            value: ComplexMatrix::identity(dim),
            last_shell_norm: 0.0,
            shells_used: 1,
            converged: true,
        });
    }

    let sig = kind.signature();
    let mut tables: Vec<SlotTable> = sig
        .iter()
        .zip(params.slots())
        .map(|(slot, base)| SlotTable {
            slot,
            base,
            table: vec![ComplexMatrix::identity(dim)],
        })
        .collect();
    // powers[j][m] = x_j^m / m!
    let mut powers: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]; k];

    let mut sum = ComplexMatrix::identity(dim);
    let mut coef = ComplexMatrix::zeros(dim);
    let mut scratch = ComplexMatrix::zeros(dim);
    let mut last_shell_norm = f64::INFINITY;
    let mut shells_used = 1;
    let mut degrees = vec![0usize; sig.len()];

    for d in 1..=cfg.max_degree {
        for t in tables.iter_mut() {
            t.ensure(d, tol)?;
        }
        for (j, p) in powers.iter_mut().enumerate() {
            let next = p[d - 1] * x[j] / d as f64;
            p.push(next);
        }
        let mut shell_norm = 0.0;
        let mut shell = Shell::new(k, d);
        while let Some(m) = shell.next_ref() {
            let weight: Complex64 = m.iter().enumerate().map(|(j, &mj)| powers[j][mj]).product();
            if weight != Complex64::new(0.0, 0.0) {
                for (deg, slot) in degrees.iter_mut().zip(&sig) {
                    *deg = slot.axes.iter().map(|&j| m[j]).sum();
                }
                coef.clone_from(&tables[0].table[degrees[0]]);
                for (t, &deg) in tables.iter().zip(&degrees).skip(1) {
                    ComplexMatrix::matmul_into(&coef, &t.table[deg], &mut scratch);
                    std::mem::swap(&mut coef, &mut scratch);
                }
                sum.add_scaled_assign(weight, &coef);
                shell_norm += weight.norm() * frobenius_norm(&coef);
            }
            shell.advance();
        }
        shells_used = d + 1;
        if !sum.is_finite() {
            return Err(Error::NonFinite);
        }
        last_shell_norm = shell_norm / (1.0 + frobenius_norm(&sum));
        if last_shell_norm <= cfg.term_tol {
            break;
        }
    }

    Ok(SeriesResult {
        value: sum,
        last_shell_norm,
        shells_used,
        converged: last_shell_norm <= cfg.term_tol,
    })
}

/// [`evaluate`] with named slots displaced by integer multiples of `I`.
pub fn evaluate_shifted(
    kind: &LauricellaKind,
    params: &ParameterSet,
    shifts: &[(String, i64)],
    x: &[Complex64],
    cfg: &SeriesConfig,
    tol: &ToleranceConfig,
) -> Result<SeriesResult> {
    params.validate(kind)?;
    let mut by_index = Vec::with_capacity(shifts.len());
    for (name, n) in shifts {
        let i = kind
            .slot_index(name)
            .ok_or_else(|| Error::Unknown(format!("slot {name} of {kind}")))?;
        by_index.push((i, *n));
    }
    let shifted = params.shifted(&by_index);
    evaluate(kind, &shifted, x, cfg, tol).map_err(|e| match e {
        Error::SingularParameter { slot, shift, source } => {
            let base: i64 = shifts.iter().filter(|(n, _)| *n == slot).map(|(_, s)| s).sum();
            Error::SingularParameter {
                slot,
                shift: shift + base,
                source,
            }
        }
        other => other,
    })
}

/// Evaluates at many points, returning results in input order.
pub fn evaluate_many(
    kind: &LauricellaKind,
    params: &ParameterSet,
    points: &[Point],
    cfg: &SeriesConfig,
    tol: &ToleranceConfig,
    exec: Execution,
) -> Vec<Result<SeriesResult>> {
    map_ordered(points, exec, |x| evaluate(kind, params, x, cfg, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> ComplexMatrix {
        ComplexMatrix::from_scalar(Complex64::new(v, 0.0))
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rising(a: f64, n: usize) -> f64 {
        (0..n).map(|j| a + j as f64).product()
    }

    fn fact(n: usize) -> f64 {
        (1..=n).map(|j| j as f64).product()
    }

    #[test]
    fn shells_enumerate_compositions() {
        let all: Vec<Vec<usize>> = MultiIndex::shell(3, 2).collect();
        assert_eq!(all.len(), 6);
        assert!(all.iter().all(|m| m.iter().sum::<usize>() == 2));
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 6);
        assert_eq!(MultiIndex::shell(1, 4).collect::<Vec<_>>(), vec![vec![4]]);
        assert_eq!(MultiIndex::new(vec![1, 2, 3]).partial_sums(), vec![1, 3, 6]);
    }

    #[test]
    fn coefficient_examples() {
        let tol = ToleranceConfig::default();
        let ga2 = LauricellaKind::GA(2);
        let p = ParameterSet::new(vec![s(1.0)], vec![s(1.0), s(1.0)], vec![s(1.0), s(1.0)]);
        assert_eq!(coefficient(&ga2, &p, &MultiIndex::new(vec![0, 0]), &tol).unwrap(), s(1.0));
        let v = coefficient(&ga2, &p, &MultiIndex::new(vec![1, 1]), &tol).unwrap();
        assert!((v.get(0, 0).re - 2.0).abs() < 1e-15);

        let f3 = LauricellaKind::F(3);
        let (a1, a2, b1, b2, c1, c2, c3) = (0.3, 0.7, 1.1, 0.4, 1.3, 0.9, 1.6);
        let p = ParameterSet::new(
            vec![s(a1), s(a2)],
            vec![s(b1), s(b2)],
            vec![s(c1), s(c2), s(c3)],
        );
        let v = coefficient(&f3, &p, &MultiIndex::new(vec![0, 1, 1]), &tol).unwrap();
        let want = rising(a2, 2) * rising(b1, 1) * rising(b2, 1) / (rising(c2, 1) * rising(c3, 1));
        assert!((v.get(0, 0).re - want).abs() < 1e-14 * want);
    }

    #[test]
    fn origin_returns_identity() {
        let kind = LauricellaKind::GA(2);
        let p = ParameterSet::new(
            vec![ComplexMatrix::identity(2)],
            vec![ComplexMatrix::identity(2); 2],
            vec![ComplexMatrix::identity(2); 2],
        );
        let r = evaluate(&kind, &p, &[c(0.0), c(0.0)], &SeriesConfig::default(), &ToleranceConfig::default()).unwrap();
        assert_eq!(r.value, ComplexMatrix::identity(2));
        assert_eq!(r.shells_used, 1);
        assert!(r.converged);
    }

    #[test]
    fn gauss_reduction_with_equal_parameters() {
        let kind = LauricellaKind::GA(1);
        let p = ParameterSet::new(vec![s(0.8)], vec![s(0.5)], vec![s(0.8)]);
        let r = evaluate(&kind, &p, &[c(0.25)], &SeriesConfig::default(), &ToleranceConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.value.get(0, 0).re - 0.75f64.powf(-0.5)).abs() < 1e-10);
    }

    #[test]
    fn gd_binomial_product() {
        let kind = LauricellaKind::GD(2);
        let (a, b1, b2) = (1.3, 0.6, 1.7);
        let p = ParameterSet::new(vec![s(a)], vec![s(b1), s(b2)], vec![s(a)]);
        let x = [c(0.1), c(0.2)];
        let r = evaluate(&kind, &p, &x, &SeriesConfig::default(), &ToleranceConfig::default()).unwrap();
        let want = 0.9f64.powf(-b1) * 0.8f64.powf(-b2);
        assert!((r.value.get(0, 0).re - want).abs() < 1e-10);

        // Brute-force double sum of the defining series.
        let mut brute = 0.0;
        for m1 in 0..40 {
            for m2 in 0..40 {
                brute += rising(a, m1 + m2) * rising(b1, m1) * rising(b2, m2) / rising(a, m1 + m2)
                    * 0.1f64.powi(m1 as i32)
                    * 0.2f64.powi(m2 as i32)
                    / (fact(m1) * fact(m2));
            }
        }
        assert!((brute - want).abs() < 1e-10);
    }

    #[test]
    fn shifted_evaluation() {
        let kind = LauricellaKind::GA(1);
        let tol = ToleranceConfig::default();
        let cfg = SeriesConfig::default();
        let p = ParameterSet::new(vec![s(0.8)], vec![s(0.5)], vec![s(1.4)]);
        let x = [c(0.3)];
        assert_eq!(
            evaluate_shifted(&kind, &p, &[], &x, &cfg, &tol).unwrap(),
            evaluate(&kind, &p, &x, &cfg, &tol).unwrap()
        );
        let at_origin = evaluate_shifted(&kind, &p, &[("A".into(), 1)], &[c(0.0)], &cfg, &tol).unwrap();
        assert_eq!(at_origin.value, s(1.0));
        let manual = ParameterSet::new(vec![s(1.8)], vec![s(0.5)], vec![s(1.4)]);
        assert_eq!(
            evaluate_shifted(&kind, &p, &[("A".into(), 1)], &x, &cfg, &tol).unwrap(),
            evaluate(&kind, &manual, &x, &cfg, &tol).unwrap()
        );
        assert!(matches!(
            evaluate_shifted(&kind, &p, &[("Z".into(), 1)], &x, &cfg, &tol),
            Err(Error::Unknown(_))
        ));
    }

    #[test]
    fn singular_denominator_names_the_slot() {
        let kind = LauricellaKind::GA(1);
        let p = ParameterSet::new(vec![s(0.8)], vec![s(0.5)], vec![s(1.0)]);
        let err = evaluate_shifted(
            &kind,
            &p,
            &[("C1".into(), -3)],
            &[c(0.3)],
            &SeriesConfig::default(),
            &ToleranceConfig::default(),
        )
        .unwrap_err();
        match err {
            Error::SingularParameter { slot, shift, .. } => {
                assert_eq!(slot, "C1");
                assert_eq!(shift, -1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn guard_and_shape_errors() {
        let kind = LauricellaKind::GA(2);
        let p = ParameterSet::new(vec![s(0.8)], vec![s(0.5), s(0.5)], vec![s(1.4), s(1.4)]);
        let cfg = SeriesConfig::default();
        let tol = ToleranceConfig::default();
        assert!(matches!(
            evaluate(&kind, &p, &[c(0.4), c(0.4)], &cfg, &tol),
            Err(Error::OutsideGuard { .. })
        ));
        assert!(matches!(
            evaluate(&kind, &p, &[c(0.1)], &cfg, &tol),
            Err(Error::InvalidParameters(_))
        ));
        let short = ParameterSet::new(vec![s(0.8)], vec![s(0.5)], vec![s(1.4), s(1.4)]);
        assert!(matches!(short.validate(&kind), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn aliases_are_bit_identical() {
        let tol = ToleranceConfig::default();
        let cfg = SeriesConfig::default();
        let p = ParameterSet::new(vec![s(0.8)], vec![s(0.5), s(1.2), s(0.9)], vec![s(1.4), s(1.1), s(2.0)]);
        let x = [c(0.1), c(-0.05), c(0.12)];
        let f1 = LauricellaKind::three_variable(1).unwrap();
        assert_eq!(
            evaluate(&f1, &p, &x, &cfg, &tol).unwrap(),
            evaluate(&LauricellaKind::GA(3), &p, &x, &cfg, &tol).unwrap()
        );
    }

    #[test]
    fn cancelling_shell_does_not_stop_early() {
        // At x = (t, −t) the degree-one shell of GD with equal B's cancels exactly.
        let kind = LauricellaKind::GD(2);
        let p = ParameterSet::new(vec![s(0.7)], vec![s(0.9), s(0.9)], vec![s(1.3)]);
        let r = evaluate(&kind, &p, &[c(0.2), c(-0.2)], &SeriesConfig::default(), &ToleranceConfig::default())
            .unwrap();
        assert!(r.shells_used > 10);
        assert!(r.converged);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn scalar(lo: f64, hi: f64) -> impl Strategy<Value = ComplexMatrix> {
            (lo..hi, -0.3f64..0.3).prop_map(|(r, i)| ComplexMatrix::from_scalar(Complex64::new(r, i)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn generalized_kinds_are_symmetric_under_index_permutation(
                fam in 0usize..4,
                a in proptest::collection::vec(scalar(0.5, 2.0), 3),
                b in proptest::collection::vec(scalar(0.5, 2.0), 3),
                cc in proptest::collection::vec(scalar(0.6, 2.4), 3),
                x in proptest::collection::vec((-0.03f64..0.03, -0.03f64..0.03), 3),
            ) {
                let kind = LauricellaKind::generalized(['A', 'B', 'C', 'D'][fam], 3).unwrap();
                let (na, nb, nc) = kind.group_sizes();
                let params = ParameterSet::new(a[..na].to_vec(), b[..nb].to_vec(), cc[..nc].to_vec());
                let x: Vec<Complex64> = x.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
                let perm = [2usize, 0, 1];
                let pick = |list: &Vec<ComplexMatrix>| -> Vec<ComplexMatrix> {
                    if list.len() == 3 { perm.iter().map(|&i| list[i].clone()).collect() } else { list.clone() }
                };
                let permuted = ParameterSet::new(pick(&params.a), pick(&params.b), pick(&params.c));
                let px: Vec<Complex64> = perm.iter().map(|&i| x[i]).collect();
                let cfg = SeriesConfig::default();
                let tol = ToleranceConfig::default();
                let v1 = evaluate(&kind, &params, &x, &cfg, &tol).unwrap().value;
                let v2 = evaluate(&kind, &permuted, &px, &cfg, &tol).unwrap().value;
                prop_assert!((v1.get(0, 0) - v2.get(0, 0)).norm() <= 1e-12 * (1.0 + v1.get(0, 0).norm()));
            }

            #[test]
            fn raising_the_degree_cap_keeps_shell_norms_decaying(
                b in scalar(0.5, 2.0),
                cc in scalar(0.6, 2.4),
                t in 0.05f64..0.3,
            ) {
                let kind = LauricellaKind::GB(2);
                let p = ParameterSet::new(vec![b.clone(), b.clone()], vec![b.clone(), b], vec![cc]);
                let tol = ToleranceConfig::default();
                let x = [Complex64::new(t, 0.0), Complex64::new(-t / 2.0, 0.0)];
                let mut prev: Option<f64> = None;
                for max_degree in [4usize, 8, 16] {
                    let cfg = SeriesConfig { max_degree, term_tol: 0.0, ..SeriesConfig::default() };
                    let r = evaluate(&kind, &p, &x, &cfg, &tol).unwrap();
                    if let Some(p) = prev {
                        prop_assert!(r.last_shell_norm <= 10.0 * p);
                    }
                    prev = Some(r.last_shell_norm);
                }
            }
        }
    }
}
