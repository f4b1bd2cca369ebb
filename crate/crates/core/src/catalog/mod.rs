//! The identity catalog.
//!
//! Every recursion and contiguous relation is a declarative [`IdentityEntry`] parsed from the
//! text files next to this module (see `parse.rs` for the grammar). Entries keep the form as
//! printed; entries whose printed form is suspect are flagged and may carry a corrected variant.

mod parse;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kind::LauricellaKind;

const GENERAL_SRC: &str = include_str!("general.txt");
const THREE_VARIABLE_SRC: &str = include_str!("three_variable.txt");

/// Arity of the generalized families in [`catalog`].
pub const DEFAULT_ARITY: usize = 3;

/// Integer-valued linear form in the shift magnitude `n`, the multinomial total `N` and the
/// summation variables `n1 … n9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Lin {
    pub constant: i64,
    pub n: i64,
    pub total: i64,
    pub vars: [i64; 9],
}

impl Lin {
    pub fn constant(c: i64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    /// Value for magnitude `n` and summation variables `vars` (`vars[0]` is `n1`).
    pub fn eval(&self, n: i64, vars: &[i64]) -> i64 {
        let total: i64 = vars.iter().sum();
        let mut v = self.constant + self.n * n + self.total * total;
        for (c, x) in self.vars.iter().zip(vars) {
            v += c * x;
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(i64, String)> = Vec::new();
        if self.n != 0 {
            parts.push((self.n, "n".into()));
        }
        if self.total != 0 {
            parts.push((self.total, "N".into()));
        }
        for (i, &c) in self.vars.iter().enumerate() {
            if c != 0 {
                parts.push((c, format!("n{}", i + 1)));
            }
        }
        if self.constant != 0 || parts.is_empty() {
            parts.push((self.constant, String::new()));
        }
        for (i, (c, name)) in parts.iter().enumerate() {
            let mag = c.abs();
            let body = if name.is_empty() {
                mag.to_string()
            } else if mag == 1 {
                name.clone()
            } else {
                format!("{mag}{name}")
            };
            match (i, *c < 0) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, "+{body}")?,
            }
        }
        Ok(())
    }
}

/// A matrix factor multiplying the series call on either side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    /// The parameter itself.
    Param(usize),
    /// `(P)_k`.
    Poch(usize, Lin),
    /// `(P)_k⁻¹`.
    IPoch(usize, Lin),
    /// `(P + kI)⁻¹`.
    InvShift(usize, Lin),
}

/// `x_j^e` or `(−x_j)^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XPower {
    pub axis: usize,
    pub negate: bool,
    pub exponent: Lin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Summation {
    /// A single term.
    None,
    /// `Σ_{n_var = lo}^{hi}`; `var` is zero-based (0 is `n1`).
    Range { var: usize, lo: Lin, hi: Lin },
    /// `Σ_{n1+…+np ≤ n}` weighted by `n! / (n1! ⋯ np! (n − N)!)`. With `p = 1` this is the
    /// binomial sum.
    Multinomial { parts: usize },
}

/// One summand of a right-hand side: `sign · Σ scalars · left · F[shifts] · right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhsTerm {
    pub negative: bool,
    pub summation: Summation,
    pub scalars: Vec<XPower>,
    pub left: Vec<Factor>,
    /// Shifts of the series call, by slot.
    pub series: Vec<(usize, Lin)>,
    pub right: Vec<Factor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Raise,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    /// The free magnitude `n`.
    Variable,
    /// A fixed displacement, used by the contiguous seeds.
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftSpec {
    pub target: usize,
    pub direction: Direction,
    pub magnitude: Magnitude,
}

impl ShiftSpec {
    /// Magnitude in effect when the entry is instantiated at `n`.
    pub fn effective(&self, n: u32) -> u32 {
        match self.magnitude {
            Magnitude::Variable => n,
            Magnitude::Fixed(m) => m,
        }
    }

    /// Signed shift of the target slot.
    pub fn signed(&self, n: u32) -> i64 {
        let m = self.effective(n) as i64;
        match self.direction {
            Direction::Raise => m,
            Direction::Lower => -m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hypothesis {
    Commute(usize, usize),
    /// `P + sign·j·I` invertible for `from ≤ j ≤ n`.
    Invertible { slot: usize, sign: i64, from: i64 },
}

/// Left-hand side and right-hand side of one form of an identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub lhs: ShiftSpec,
    pub rhs: Vec<RhsTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Printed,
    Corrected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityEntry {
    pub id: String,
    pub kind: LauricellaKind,
    /// Label of the source equation.
    pub equation: String,
    /// The relation as printed.
    pub printed: Variant,
    /// Replacement for a printed form that fails numerically.
    pub corrected: Option<Variant>,
    pub hypotheses: Vec<Hypothesis>,
    pub typo_candidate: bool,
    pub note: Option<String>,
    /// Slot swaps applied to derive this entry from a stated one.
    pub interchange: Vec<(usize, usize)>,
}

impl IdentityEntry {
    /// The variant the suite asserts: the corrected one when present.
    pub fn variant(&self, form: Form) -> &Variant {
        match form {
            Form::Corrected => self.corrected.as_ref().unwrap_or(&self.printed),
            Form::Printed => &self.printed,
        }
    }

    pub fn lhs(&self) -> &ShiftSpec {
        &self.variant(Form::Corrected).lhs
    }

    pub fn rhs(&self) -> &[RhsTerm] {
        &self.variant(Form::Corrected).rhs
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.lhs().magnitude, Magnitude::Fixed(_))
    }

    pub fn slot_name(&self, i: usize) -> String {
        self.kind.signature()[i].name.clone()
    }

    /// Human-readable hypothesis list.
    pub fn hypothesis_strings(&self) -> Vec<String> {
        self.hypotheses
            .iter()
            .map(|h| match *h {
                Hypothesis::Commute(a, b) => format!("{} {} = {} {}", self.slot_name(a), self.slot_name(b), self.slot_name(b), self.slot_name(a)),
                Hypothesis::Invertible { slot, sign, from } => {
                    let s = if sign > 0 { '+' } else { '-' };
                    format!("{} {s} jI invertible for {from} <= j <= n", self.slot_name(slot))
                }
            })
            .collect()
    }

    pub fn render_lhs(&self, form: Form) -> String {
        let lhs = &self.variant(form).lhs;
        let sign = match lhs.direction {
            Direction::Raise => '+',
            Direction::Lower => '-',
        };
        let mag = match lhs.magnitude {
            Magnitude::Variable => "n".to_string(),
            Magnitude::Fixed(m) => m.to_string(),
        };
        format!("{}{sign}{mag}", self.slot_name(lhs.target))
    }

    /// The right-hand side in catalog notation.
    pub fn render_rhs(&self, form: Form) -> Vec<String> {
        self.variant(form)
            .rhs
            .iter()
            .map(|t| parse::render_term(&self.kind, t))
            .collect()
    }
}

/// Every entry: generalized families at arity 3 followed by the three-variable functions.
pub fn catalog() -> Vec<IdentityEntry> {
    let mut out = generalized_catalog(DEFAULT_ARITY).expect("built-in catalog parses");
    out.extend(parse::parse_catalog(THREE_VARIABLE_SRC, DEFAULT_ARITY).expect("built-in catalog parses"));
    out
}

/// Entries for the four generalized families at arity `k`. Ids carry a `(k=…)` tag unless
/// `k` is the default arity.
pub fn generalized_catalog(k: usize) -> Result<Vec<IdentityEntry>> {
    if k == 0 {
        return Err(Error::InvalidParameters("arity must be positive".into()));
    }
    let mut entries = parse::parse_catalog(GENERAL_SRC, k)?;
    if k != DEFAULT_ARITY {
        for e in &mut entries {
            if let Some((head, rest)) = e.id.split_once('.') {
                e.id = format!("{head}(k={k}).{rest}");
            }
        }
    }
    Ok(entries)
}

/// Looks an entry up by id in the default catalog.
pub fn find(id: &str) -> Result<IdentityEntry> {
    catalog()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::Unknown(id.to_string()))
}

/// Relabels an entry by swapping pairs of slots.
///
/// Each pair must be a symmetry of the series: both slots numerators (or both denominators)
/// with the same axis set. Applying the same swap twice returns the original entry.
pub fn interchange(entry: &IdentityEntry, swap: &[(String, String)]) -> Result<IdentityEntry> {
    let sig = entry.kind.signature();
    let mut perm: Vec<usize> = (0..sig.len()).collect();
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for (a, b) in swap {
        let ia = entry.kind.slot_index(a).ok_or_else(|| Error::Unknown(format!("slot {a} of {}", entry.kind)))?;
        let ib = entry.kind.slot_index(b).ok_or_else(|| Error::Unknown(format!("slot {b} of {}", entry.kind)))?;
        let (sa, sb) = (&sig[ia], &sig[ib]);
        if ia == ib || sa.group.is_numerator() != sb.group.is_numerator() || sa.axes != sb.axes {
            return Err(Error::NotAutomorphism(format!("{a}<->{b} on {}", entry.kind)));
        }
        if !seen.insert(ia) || !seen.insert(ib) {
            return Err(Error::NotAutomorphism(format!("{a}<->{b} overlaps another pair")));
        }
        perm[ia] = ib;
        perm[ib] = ia;
        pairs.push((ia.min(ib), ia.max(ib)));
    }

    let map_factor = |f: &Factor| match *f {
        Factor::Param(s) => Factor::Param(perm[s]),
        Factor::Poch(s, l) => Factor::Poch(perm[s], l),
        Factor::IPoch(s, l) => Factor::IPoch(perm[s], l),
        Factor::InvShift(s, l) => Factor::InvShift(perm[s], l),
    };
    let map_variant = |v: &Variant| Variant {
        lhs: ShiftSpec {
            target: perm[v.lhs.target],
            ..v.lhs.clone()
        },
        rhs: v
            .rhs
            .iter()
            .map(|t| RhsTerm {
                left: t.left.iter().map(map_factor).collect(),
                right: t.right.iter().map(map_factor).collect(),
                series: t.series.iter().map(|&(s, l)| (perm[s], l)).collect(),
                ..t.clone()
            })
            .collect(),
    };

    let mut out = entry.clone();
    out.printed = map_variant(&entry.printed);
    out.corrected = entry.corrected.as_ref().map(map_variant);
    out.hypotheses = entry
        .hypotheses
        .iter()
        .map(|h| match *h {
            Hypothesis::Commute(a, b) => Hypothesis::Commute(perm[a], perm[b]),
            Hypothesis::Invertible { slot, sign, from } => Hypothesis::Invertible {
                slot: perm[slot],
                sign,
                from,
            },
        })
        .collect();
    // Symmetric difference, so a second application cancels the first.
    let mut applied: BTreeSet<(usize, usize)> = entry.interchange.iter().copied().collect();
    for p in pairs {
        if !applied.remove(&p) {
            applied.insert(p);
        }
    }
    out.interchange = applied.into_iter().collect();

    let old_target = &sig[entry.lhs().target].name;
    let new_target = &sig[out.lhs().target].name;
    let mut segments: Vec<String> = entry.id.split('.').map(str::to_string).collect();
    if segments.len() > 1 && &segments[1] == old_target {
        segments[1] = new_target.clone();
    }
    out.id = segments.join(".");
    Ok(out)
}

/// Catalog export record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogRecord {
    pub id: String,
    pub kind: LauricellaKind,
    pub equation: String,
    pub lhs: String,
    pub hypotheses: Vec<String>,
    pub typo_candidate: bool,
    pub corrected_variant: bool,
    pub note: Option<String>,
    pub interchange: Vec<String>,
    pub rhs: Vec<String>,
}

impl From<&IdentityEntry> for CatalogRecord {
    fn from(e: &IdentityEntry) -> Self {
        Self {
            id: e.id.clone(),
            kind: e.kind,
            equation: e.equation.clone(),
            lhs: e.render_lhs(Form::Corrected),
            hypotheses: e.hypothesis_strings(),
            typo_candidate: e.typo_candidate,
            corrected_variant: e.corrected.is_some(),
            note: e.note.clone(),
            interchange: e
                .interchange
                .iter()
                .map(|&(a, b)| format!("{}<->{}", e.slot_name(a), e.slot_name(b)))
                .collect(),
            rhs: e.render_rhs(Form::Corrected),
        }
    }
}

/// JSON listing of the given entries.
pub fn export_json(entries: &[IdentityEntry]) -> serde_json::Value {
    serde_json::to_value(entries.iter().map(CatalogRecord::from).collect::<Vec<_>>())
        .expect("catalog records serialize")
}
