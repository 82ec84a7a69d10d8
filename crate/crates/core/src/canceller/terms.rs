use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Basis function `x^q · conj(x)^(p−q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub p: usize,
    pub q: usize,
}

impl Term {
    pub const fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    /// The plain transmit sample `x`.
    pub const LINEAR: Term = Term::new(1, 1);

    /// Terms of the form `|x|^(p−1)·x`, produced by the PA alone.
    pub fn is_pa_term(&self) -> bool {
        self.q == self.p.div_ceil(2)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Terms beyond the linear one, ranked by typical strength.
/// Terms listed together enter a truncated set as one unit.
const RANKED_GROUPS: [&[Term]; 7] = [
    &[Term::new(1, 0)],
    &[Term::new(3, 2)],
    &[Term::new(3, 3), Term::new(3, 1)],
    &[Term::new(5, 3)],
    &[Term::new(3, 0)],
    &[Term::new(7, 4)],
    &[Term::new(5, 4), Term::new(5, 2)],
];

/// Largest `k` accepted by [`TermKind::JointTopK`].
pub const MAX_TOP_K: usize = RANKED_GROUPS.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermKind {
    Linear,
    WidelyLinear,
    PaOnly(usize),
    JointFull(usize),
    JointTopK(usize),
    /// Any other set, e.g. a restriction of a catalog set or one loaded from file.
    Custom,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermKind::Linear => f.write_str("linear"),
            TermKind::WidelyLinear => f.write_str("widely-linear"),
            TermKind::PaOnly(p) => write!(f, "pa-only-{p}"),
            TermKind::JointFull(p) => write!(f, "joint-full-{p}"),
            TermKind::JointTopK(k) => write!(f, "joint-top-{k}"),
            TermKind::Custom => f.write_str("custom"),
        }
    }
}

impl FromStr for TermKind {
    type Err = Error;

    /// Accepts the display names plus short aliases: `wl`, `pa5`, `joint5`,
    /// `top3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let number = |rest: &str| {
            rest.trim_start_matches('-')
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad order or count in canceller name '{s}'")))
        };
        let kind = match s.as_str() {
            "linear" | "lin" => TermKind::Linear,
            "widely-linear" | "wl" => TermKind::WidelyLinear,
            "custom" => TermKind::Custom,
            _ => {
                if let Some(rest) = s.strip_prefix("pa-only").or_else(|| s.strip_prefix("pa")) {
                    TermKind::PaOnly(number(rest)?)
                } else if let Some(rest) =
                    s.strip_prefix("joint-top").or_else(|| s.strip_prefix("top"))
                {
                    TermKind::JointTopK(number(rest)?)
                } else if let Some(rest) =
                    s.strip_prefix("joint-full").or_else(|| s.strip_prefix("joint"))
                {
                    TermKind::JointFull(number(rest)?)
                } else {
                    return Err(Error::Parse(format!("unknown canceller '{s}'")));
                }
            }
        };
        Ok(kind)
    }
}

impl Serialize for TermKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TermKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ordered set of basis terms. Order within an odd `p` is by descending `q`,
/// so catalog sets that nest produce identically ordered columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSet {
    kind: TermKind,
    terms: Vec<Term>,
}

fn check_order(p: usize) -> Result<()> {
    if p == 0 || p % 2 == 0 {
        return Err(domain(format!("nonlinearity order must be odd and positive, got {p}")));
    }
    Ok(())
}

impl TermSet {
    pub fn new(kind: TermKind) -> Result<Self> {
        let terms = match kind {
            TermKind::Linear => vec![Term::LINEAR],
            TermKind::WidelyLinear => vec![Term::LINEAR, Term::new(1, 0)],
            TermKind::PaOnly(pmax) => {
                check_order(pmax)?;
                (1..=pmax).step_by(2).map(|p| Term::new(p, p.div_ceil(2))).collect()
            }
            TermKind::JointFull(pmax) => {
                check_order(pmax)?;
                (1..=pmax).step_by(2).flat_map(|p| (0..=p).rev().map(move |q| Term::new(p, q))).collect()
            }
            TermKind::JointTopK(k) => {
                if k > MAX_TOP_K {
                    return Err(domain(format!("only {MAX_TOP_K} ranked term groups exist, asked for {k}")));
                }
                let mut t = vec![Term::LINEAR];
                t.extend(RANKED_GROUPS[..k].iter().flat_map(|g| g.iter().copied()));
                t
            }
            TermKind::Custom => {
                return Err(domain("custom term sets are built with TermSet::custom"));
            }
        };
        Ok(Self { kind, terms })
    }

    /// Arbitrary set; must contain `(1,1)`, odd orders only, no repeats.
    pub fn custom(terms: Vec<Term>) -> Result<Self> {
        let set = Self { kind: TermKind::Custom, terms };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.terms.contains(&Term::LINEAR) {
            return Err(domain("every term set must contain the linear term (1,1)"));
        }
        for (k, t) in self.terms.iter().enumerate() {
            check_order(t.p)?;
            if t.q > t.p {
                return Err(domain(format!("term {t} has q > p")));
            }
            if self.terms[..k].contains(t) {
                return Err(domain(format!("duplicate term {t}")));
            }
        }
        Ok(())
    }

    /// Keeps the terms satisfying `keep`, preserving order.
    pub fn restrict(&self, keep: impl Fn(&Term) -> bool) -> Result<Self> {
        Self::custom(self.terms.iter().copied().filter(|t| keep(t)).collect())
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.p).max().unwrap_or(1)
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }
}

/// Builds the catalog term set for `kind`.
pub fn make_term_set(kind: TermKind) -> Result<TermSet> {
    TermSet::new(kind)
}
