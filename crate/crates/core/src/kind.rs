//! Function kinds, their parameter signatures, and the convergence guard.
//!
//! Every kind is described by a list of slots. A slot belongs to the A-, B- or C-group and
//! carries the set of summation axes whose indices feed its Pochhammer symbol: the slot
//! contributes `(P)_{Σ_{j∈axes} m_j}` (numerators) or its inverse (C-group). The series term is
//! the product of these in signature order times `∏ x_j^{m_j} / m_j!`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    A,
    B,
    C,
}

impl Group {
    pub fn is_numerator(self) -> bool {
        !matches!(self, Group::C)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub group: Group,
    /// Zero-based axes, ascending.
    pub axes: Vec<usize>,
}

/// A Lauricella function family.
///
/// The four generalized families carry their arity. The three-variable functions that
/// coincide with a generalized family at arity 3 (numbers 1, 2, 5, 9) are never stored as `F`:
/// [`LauricellaKind::three_variable`] maps them to `GA(3)`, `GB(3)`, `GC(3)`, `GD(3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LauricellaKind {
    GA(usize),
    GB(usize),
    GC(usize),
    GD(usize),
    F(u8),
}

const DISTINCT_F: [u8; 10] = [3, 4, 6, 7, 8, 10, 11, 12, 13, 14];

impl LauricellaKind {
    /// The three-variable function with the given number, 1 through 14.
    pub fn three_variable(number: u8) -> Result<Self> {
        match number {
            1 => Ok(Self::GA(3)),
            2 => Ok(Self::GB(3)),
            5 => Ok(Self::GC(3)),
            9 => Ok(Self::GD(3)),
            n if DISTINCT_F.contains(&n) => Ok(Self::F(n)),
            n => Err(Error::Unknown(format!("F{n}"))),
        }
    }

    pub fn generalized(family: char, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Unknown(format!("G{family} with arity 0")));
        }
        match family.to_ascii_uppercase() {
            'A' => Ok(Self::GA(arity)),
            'B' => Ok(Self::GB(arity)),
            'C' => Ok(Self::GC(arity)),
            'D' => Ok(Self::GD(arity)),
            _ => Err(Error::Unknown(format!("G{family}"))),
        }
    }

    /// GA–GD at arities 1–4 followed by F1–F14 (the aliased numbers included).
    pub fn acceptance_list() -> Vec<(String, Self)> {
        let mut out = Vec::new();
        for fam in ['A', 'B', 'C', 'D'] {
            for k in 1..=4 {
                let kind = Self::generalized(fam, k).unwrap();
                out.push((kind.to_string(), kind));
            }
        }
        for n in 1..=14 {
            out.push((format!("F{n}"), Self::three_variable(n).unwrap()));
        }
        out
    }

    pub fn arity(&self) -> usize {
        match *self {
            Self::GA(k) | Self::GB(k) | Self::GC(k) | Self::GD(k) => k,
            Self::F(_) => 3,
        }
    }

    /// Slots in printed order: A-group, then B-group, then C-group.
    pub fn signature(&self) -> Vec<Slot> {
        let k = self.arity();
        let all: Vec<usize> = (0..k).collect();
        let slot = |name: &str, group, axes: &[usize]| Slot {
            name: name.to_string(),
            group,
            axes: axes.to_vec(),
        };
        let indexed = |prefix: &str, group| -> Vec<Slot> {
            (0..k)
                .map(|i| slot(&format!("{prefix}{}", i + 1), group, &[i]))
                .collect()
        };
        use Group::*;
        let mut s = Vec::new();
        match *self {
            Self::GA(_) => {
                s.push(slot("A", A, &all));
                s.extend(indexed("B", B));
                s.extend(indexed("C", C));
            }
            Self::GB(_) => {
                s.extend(indexed("A", A));
                s.extend(indexed("B", B));
                s.push(slot("C", C, &all));
            }
            Self::GC(_) => {
                s.push(slot("A", A, &all));
                s.push(slot("B", B, &all));
                s.extend(indexed("C", C));
            }
            Self::GD(_) => {
                s.push(slot("A", A, &all));
                s.extend(indexed("B", B));
                s.push(slot("C", C, &all));
            }
            Self::F(n) => {
                let table: &[(&str, Group, &[usize])] = match n {
                    3 => &[
                        ("A1", A, &[0]),
                        ("A2", A, &[1, 2]),
                        ("B1", B, &[0, 2]),
                        ("B2", B, &[1]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1]),
                        ("C3", C, &[2]),
                    ],
                    4 => &[
                        ("A1", A, &[0, 1, 2]),
                        ("B1", B, &[0]),
                        ("B2", B, &[1, 2]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1]),
                        ("C3", C, &[2]),
                    ],
                    6 => &[
                        ("A1", A, &[0]),
                        ("A2", A, &[1]),
                        ("A3", A, &[2]),
                        ("B1", B, &[0, 2]),
                        ("B2", B, &[1]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1, 2]),
                    ],
                    7 => &[
                        ("A1", A, &[0]),
                        ("A2", A, &[1, 2]),
                        ("B1", B, &[0]),
                        ("B2", B, &[1]),
                        ("B3", B, &[2]),
                        ("C1", C, &[0, 1, 2]),
                    ],
                    8 => &[
                        ("A1", A, &[0, 1, 2]),
                        ("B1", B, &[0]),
                        ("B2", B, &[1]),
                        ("B3", B, &[2]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1, 2]),
                    ],
                    10 => &[
                        ("A1", A, &[0, 2]),
                        ("A2", A, &[1]),
                        ("B1", B, &[0, 2]),
                        ("B2", B, &[1]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1, 2]),
                    ],
                    11 => &[
                        ("A1", A, &[0]),
                        ("A2", A, &[1, 2]),
                        ("B1", B, &[0, 2]),
                        ("B2", B, &[1]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1, 2]),
                    ],
                    12 => &[
                        ("A1", A, &[0, 2]),
                        ("A2", A, &[1]),
                        ("B1", B, &[0, 1]),
                        ("B2", B, &[2]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1, 2]),
                    ],
                    13 => &[
                        ("A1", A, &[0]),
                        ("A2", A, &[1, 2]),
                        ("B1", B, &[0, 2]),
                        ("B2", B, &[1]),
                        ("C1", C, &[0, 1, 2]),
                    ],
                    14 => &[
                        ("A1", A, &[0, 1, 2]),
                        ("B1", B, &[0, 2]),
                        ("B2", B, &[1]),
                        ("C1", C, &[0]),
                        ("C2", C, &[1, 2]),
                    ],
                    _ => unreachable!("F{n} is not a distinct three-variable kind"),
                };
                s.extend(table.iter().map(|(name, g, axes)| slot(name, *g, axes)));
            }
        }
        s
    }

    /// Number of slots in the A-, B- and C-groups.
    pub fn group_sizes(&self) -> (usize, usize, usize) {
        let sig = self.signature();
        let count = |g| sig.iter().filter(|s| s.group == g).count();
        (count(Group::A), count(Group::B), count(Group::C))
    }

    /// Position of a named slot in [`signature`](Self::signature).
    pub fn slot_index(&self, name: &str) -> Option<usize> {
        self.signature().iter().position(|s| s.name == name)
    }

    /// Exponential growth rate of the series terms along the ray through `x`.
    ///
    /// Terms of total degree `d` behave like `exp(d · ρ(x))`, so the series converges when
    /// `ρ(x) < 0`. The rate is `max_u [Φ(u) + Σ u_j log|x_j|]` over the probability simplex, with
    /// `Φ(u) = Σ_num s log s − Σ_den s log s − Σ u_j log u_j` and `s` the slot's axis sum. It is
    /// `−∞` at the origin and satisfies `ρ(t·x) = ρ(x) + log t`.
    pub fn growth_rate(&self, x: &[Complex64]) -> f64 {
        let logs: Vec<f64> = x.iter().map(|z| z.norm().ln()).collect();
        if logs.iter().all(|l| *l == f64::NEG_INFINITY) {
            return f64::NEG_INFINITY;
        }
        match *self {
            // Closed forms of the simplex maximum.
            Self::GA(_) => x.iter().map(|z| z.norm()).sum::<f64>().ln(),
            Self::GB(_) | Self::GD(_) => logs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Self::GC(_) => 2.0 * x.iter().map(|z| z.norm().sqrt()).sum::<f64>().ln(),
            Self::F(_) => simplex_max(&self.signature(), &logs),
        }
    }

    /// `ρ(x) ≤ log(0.5 · domain_guard)`, or an [`Error::OutsideGuard`].
    pub fn check_guard(&self, x: &[Complex64], domain_guard: f64) -> Result<()> {
        let rate = self.growth_rate(x);
        let limit = guard_limit(domain_guard);
        if rate.is_nan() || rate > limit {
            return Err(Error::OutsideGuard { rate, limit });
        }
        Ok(())
    }
}

/// Log of the largest admissible geometric ratio, `log(0.5 · domain_guard)`.
pub fn guard_limit(domain_guard: f64) -> f64 {
    (0.5 * domain_guard).ln()
}

fn xlogx(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        u * u.ln()
    }
}

fn rate_objective(sig: &[Slot], logs: &[f64], u: &[f64]) -> f64 {
    let mut v = 0.0;
    for slot in sig {
        let s: f64 = slot.axes.iter().map(|&j| u[j]).sum();
        if slot.group.is_numerator() {
            v += xlogx(s);
        } else {
            v -= xlogx(s);
        }
    }
    for (j, &uj) in u.iter().enumerate() {
        if uj > 0.0 {
            v += uj * logs[j] - xlogx(uj);
        }
    }
    v
}

/// Maximises the rate objective over the simplex restricted to the axes with `x_j ≠ 0`:
/// a uniform grid, then a pattern search along edge directions.
fn simplex_max(sig: &[Slot], logs: &[f64]) -> f64 {
    let active: Vec<usize> = (0..logs.len()).filter(|&j| logs[j].is_finite()).collect();
    let k = logs.len();
    let eval = |u: &[f64]| rate_objective(sig, logs, u);

    const GRID: usize = 48;
    let mut best_u = vec![0.0; k];
    let mut best = f64::NEG_INFINITY;
    let mut counts = vec![0usize; active.len()];
    // Enumerate compositions of GRID into active.len() parts.
    loop {
        let used: usize = counts[..active.len().saturating_sub(1)].iter().sum();
        if used <= GRID {
            if let Some(last) = counts.last_mut() {
                *last = GRID - used;
            }
            let mut u = vec![0.0; k];
            for (c, &j) in counts.iter().zip(&active) {
                u[j] = *c as f64 / GRID as f64;
            }
            let v = eval(&u);
            if v > best {
                best = v;
                best_u = u;
            }
        }
        // Odometer over all but the last active axis.
        let free = active.len().saturating_sub(1);
        let mut pos = 0;
        while pos < free {
            counts[pos] += 1;
            if counts[pos] <= GRID {
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
        if pos == free {
            break;
        }
    }

    let mut step = 1.0 / GRID as f64;
    while step > 1e-12 {
        let mut improved = false;
        for &p in &active {
            for &q in &active {
                if p == q {
                    continue;
                }
                let delta = step.min(best_u[q]);
                if delta <= 0.0 {
                    continue;
                }
                let mut u = best_u.clone();
                u[p] += delta;
                u[q] -= delta;
                let v = eval(&u);
                if v > best {
                    best = v;
                    best_u = u;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

impl fmt::Display for LauricellaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GA(k) => write!(f, "GA({k})"),
            Self::GB(k) => write!(f, "GB({k})"),
            Self::GC(k) => write!(f, "GC({k})"),
            Self::GD(k) => write!(f, "GD({k})"),
            Self::F(n) => write!(f, "F{n}"),
        }
    }
}

impl LauricellaKind {
    /// Parses a kind, taking the arity of a bare `GA`…`GD` from `default_arity`.
    ///
    /// Accepted forms: `GA`, `GA3`, `GA(3)`, `FA` (alias of `GA`), and `F1`…`F14`.
    pub fn parse_with_arity(text: &str, default_arity: Option<usize>) -> Result<Self> {
        let t = text.trim().to_ascii_uppercase();
        let unknown = || Error::Unknown(text.to_string());
        let bytes = t.as_bytes();
        if bytes.len() >= 2 && (bytes[0] == b'G' || bytes[0] == b'F') && (b'A'..=b'D').contains(&bytes[1]) {
            let rest = t[2..].trim_start_matches('(').trim_end_matches(')');
            let arity = if rest.is_empty() {
                default_arity.ok_or_else(|| Error::Unknown(format!("{text} needs an arity")))?
            } else {
                rest.parse().map_err(|_| unknown())?
            };
            return Self::generalized(bytes[1] as char, arity);
        }
        if let Some(num) = t.strip_prefix('F') {
            let n: u8 = num.parse().map_err(|_| unknown())?;
            return Self::three_variable(n);
        }
        Err(unknown())
    }
}

impl FromStr for LauricellaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_arity(s, None)
    }
}

impl Serialize for LauricellaKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LauricellaKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
