//! Term tables: prefixes of `r(n)` or `r̃(n) = r(2n)` with their provenance.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice::LatticeSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("term file header malformed: {0}")]
    Header(String),
    #[error("term file line {line}: {msg}")]
    Body { line: usize, msg: String },
    #[error("term table invariant violated at n={n}: {msg}")]
    Invariant { n: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for TermError {
    fn from(e: std::io::Error) -> Self {
        TermError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `r(n)`, every step count.
    Raw,
    /// `r̃(n) = r(2n)`.
    Tilde,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::Tilde => "tilde",
        })
    }
}

impl FromStr for Normalization {
    type Err = TermError;
    fn from_str(s: &str) -> Result<Self, TermError> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "tilde" => Ok(Normalization::Tilde),
            _ => Err(TermError::Header(format!("unknown normalization {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermTable {
    pub spec: LatticeSpec,
    pub norm: Normalization,
    /// `None` for exact values, otherwise every term is reduced into `[0, p)`.
    pub modulus: Option<u64>,
    pub terms: Vec<BigInt>,
    pub method: String,
}

impl AsRef<[BigInt]> for TermTable {
    fn as_ref(&self) -> &[BigInt] {
        &self.terms
    }
}

impl TermTable {
    pub fn exact(spec: LatticeSpec, norm: Normalization, terms: Vec<BigInt>, method: &str) -> Self {
        TermTable { spec, norm, modulus: None, terms, method: method.to_string() }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.modulus.is_none()
    }

    /// Keeps the first `k` terms.
    pub fn truncated(&self, k: usize) -> Self {
        let mut t = self.clone();
        t.terms.truncate(k);
        t
    }

    /// The raw table `r(n)` for `n < 2·len` when `self` is a tilde table.
    pub fn to_raw(&self) -> TermTable {
        match self.norm {
            Normalization::Raw => self.clone(),
            Normalization::Tilde => {
                let mut terms = Vec::with_capacity(2 * self.terms.len());
                for t in &self.terms {
                    terms.push(t.clone());
                    terms.push(BigInt::zero());
                }
                terms.pop();
                TermTable { norm: Normalization::Raw, terms, ..self.clone() }
            }
        }
    }

    /// Even-index subsequence of a raw table, as a tilde table.
    pub fn to_tilde(&self) -> TermTable {
        match self.norm {
            Normalization::Tilde => self.clone(),
            Normalization::Raw => TermTable {
                norm: Normalization::Tilde,
                terms: self.terms.iter().step_by(2).cloned().collect(),
                ..self.clone()
            },
        }
    }

    /// Checks the structural invariants every walk-count table satisfies.
    pub fn validate(&self) -> Result<(), TermError> {
        let bad = |n, msg: &str| Err(TermError::Invariant { n, msg: msg.to_string() });
        let q = BigInt::from(self.spec.coordination_number());
        let reduce = |x: BigInt| match self.modulus {
            Some(p) => {
                let p = BigInt::from(p);
                ((x % &p) + &p) % &p
            }
            None => x,
        };
        if let Some(t0) = self.terms.first() {
            if *t0 != reduce(BigInt::one()) {
                return bad(0, "terms[0] must be 1");
            }
        }
        match self.norm {
            Normalization::Raw => {
                if self.terms.len() > 1 && !self.terms[1].is_zero() {
                    return bad(1, "terms[1] must be 0");
                }
                if self.terms.len() > 2 && self.terms[2] != reduce(q) {
                    return bad(2, "terms[2] must equal q");
                }
                if self.spec.odd_terms_vanish() {
                    if let Some(n) = (1..self.terms.len()).step_by(2).find(|&n| !self.terms[n].is_zero()) {
                        return bad(n, "odd-index term must vanish");
                    }
                }
            }
            Normalization::Tilde => {
                if self.terms.len() > 1 && self.terms[1] != reduce(q) {
                    return bad(1, "terms[1] must equal q");
                }
            }
        }
        if let Some(p) = self.modulus {
            let p = BigInt::from(p);
            if let Some(n) = self.terms.iter().position(|t| t.is_negative() || *t >= p) {
                return bad(n, "modular term not reduced");
            }
        } else if let Some(n) = self.terms.iter().position(|t| t.is_negative()) {
            return bad(n, "walk count negative");
        }
        Ok(())
    }

    pub fn header(&self) -> String {
        format!(
            "greenwalks-terms v1 M={} N={} norm={} modulus={} count={} method={}",
            self.spec.m(),
            self.spec.n(),
            self.norm,
            self.modulus.unwrap_or(0),
            self.terms.len(),
            self.method
        )
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), TermError> {
        writeln!(w, "{}", self.header())?;
        for t in &self.terms {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, TermError> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| TermError::Header("empty file".into()))??;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("greenwalks-terms") || fields.next() != Some("v1") {
            return Err(TermError::Header(header.clone()));
        }
        let (mut m, mut n, mut norm, mut modulus, mut count, mut method) = (None, None, None, None, None, None);
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| TermError::Header(f.to_string()))?;
            let num = || v.parse::<u64>().map_err(|_| TermError::Header(f.to_string()));
            match k {
                "M" => m = Some(num()? as usize),
                "N" => n = Some(num()? as usize),
                "norm" => norm = Some(v.parse()?),
                "modulus" => modulus = Some(num()?),
                "count" => count = Some(num()? as usize),
                "method" => method = Some(v.to_string()),
                _ => return Err(TermError::Header(format!("unknown field {k}"))),
            }
        }
        let missing = |name: &str| TermError::Header(format!("missing {name}"));
        let spec = LatticeSpec::new(m.ok_or_else(|| missing("M"))?, n.ok_or_else(|| missing("N"))?)
            .map_err(|e| TermError::Header(e.to_string()))?;
        let count = count.ok_or_else(|| missing("count"))?;
        let mut terms = Vec::with_capacity(count);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v = line
                .parse::<BigInt>()
                .map_err(|_| TermError::Body { line: i + 2, msg: format!("not an integer: {line}") })?;
            terms.push(v);
        }
        if terms.len() != count {
            return Err(TermError::Body { line: terms.len() + 1, msg: format!("expected {count} terms") });
        }
        let modulus = modulus.ok_or_else(|| missing("modulus"))?;
        let table = TermTable {
            spec,
            norm: norm.ok_or_else(|| missing("norm"))?,
            modulus: (modulus != 0).then_some(modulus),
            terms,
            method: method.ok_or_else(|| missing("method"))?,
        };
        table.validate()?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let spec = LatticeSpec::new(1, 2).unwrap();
        let t = TermTable::exact(
            spec,
            Normalization::Raw,
            [1, 0, 4, 0, 36].iter().map(|&x| BigInt::from(x)).collect(),
            "walk-dp",
        );
        t.validate().unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("greenwalks-terms v1 M=1 N=2 norm=raw modulus=0 count=5 method=walk-dp\n"));
        assert_eq!(TermTable::read_from(&buf[..]).unwrap(), t);
        assert_eq!(t.to_tilde().to_raw(), t);
    }

    #[test]
    fn invariants_enforced() {
        let spec = LatticeSpec::new(1, 2).unwrap();
        let bad = TermTable::exact(spec, Normalization::Raw, vec![1.into(), 0.into(), 5.into()], "x");
        assert!(bad.validate().is_err());
        let odd = TermTable::exact(spec, Normalization::Raw, vec![1.into(), 1.into()], "x");
        assert!(odd.validate().is_err());
    }
}
