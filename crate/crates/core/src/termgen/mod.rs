//! Prefixes of `r_{M,N}(n)` by independent algorithms, plus recurrence extension
//! and an on-disk table cache.

mod closed_form;
mod factor_dp;
mod heracles;
mod walk_dp;

use std::fmt;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Signed;

pub use closed_form::terms_closed_form;
pub use factor_dp::{factor_dp_mod, factor_dp_table, terms_factor_dp};
pub use heracles::terms_heracles;
pub use walk_dp::{terms_walk_dp, STATE_BUDGET};

use crate::arith::{primes_for_bits, word_primes, CrtAccumulator};
use crate::lattice::LatticeSpec;
use crate::pfinite::{rec_unroll_int, PfiniteError, PolyRec};
use crate::terms::{Normalization, TermError, TermTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermgenError {
    #[error("state budget exceeded: {states} states > {budget}")]
    Budget { states: usize, budget: usize },
    #[error("method {method} does not apply to M={m} N={n}")]
    Unsupported { method: &'static str, m: usize, n: usize },
    #[error("need {need} initial terms, got {got}")]
    TooFewInitial { need: usize, got: usize },
    #[error("initial table must be exact")]
    NotExact,
    #[error("extension produced a negative value at n={0}")]
    Negative(usize),
    #[error(transparent)]
    Rec(#[from] PfiniteError),
    #[error(transparent)]
    Table(#[from] TermError),
}

/// Residue tables from `run` over enough word primes to pin down `0 ≤ r(n) ≤ q^n`,
/// combined by CRT. `run` returns one vector of `nmax+1` residues per prime.
pub(crate) fn multimodular(q: u64, nmax: usize, run: impl Fn(&[u64]) -> Vec<Vec<u64>>) -> Vec<BigInt> {
    let bits = nmax as f64 * (q as f64).log2() + 1.0;
    let primes = word_primes(primes_for_bits(bits));
    let residues = run(&primes);
    (0..=nmax)
        .map(|n| {
            let mut acc = CrtAccumulator::new();
            for (res, &p) in residues.iter().zip(&primes) {
                acc.push(res[n], p).expect("distinct primes");
            }
            acc.value().clone()
        })
        .collect()
}

/// Extends an exact table to `nmax+1` terms with `rec`, in the table's own indexing.
pub fn extend_terms(rec: &PolyRec, initial: &TermTable, nmax: usize) -> Result<TermTable, TermgenError> {
    if !initial.is_exact() {
        return Err(TermgenError::NotExact);
    }
    if initial.len() < rec.order() {
        return Err(TermgenError::TooFewInitial { need: rec.order(), got: initial.len() });
    }
    let terms = rec_unroll_int(rec, &initial.terms, nmax)?;
    if let Some(n) = terms.iter().position(|t| t.is_negative()) {
        return Err(TermgenError::Negative(n));
    }
    Ok(TermTable { terms, method: format!("{}+rec", initial.method), ..initial.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    WalkDp,
    Heracles,
    FactorDp,
    ClosedForm,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::WalkDp => "walk-dp",
            Method::Heracles => "heracles",
            Method::FactorDp => "factor-dp",
            Method::ClosedForm => "closed-form",
        }
    }

    /// Fastest method that applies to `spec`.
    pub fn preferred(spec: &LatticeSpec) -> Method {
        if spec.m() == spec.n() || spec.m() == 1 {
            Method::ClosedForm
        } else if spec.m() + 1 == spec.n() {
            Method::Heracles
        } else {
            Method::FactorDp
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "walk-dp" => Ok(Method::WalkDp),
            "heracles" => Ok(Method::Heracles),
            "factor-dp" => Ok(Method::FactorDp),
            "closed-form" => Ok(Method::ClosedForm),
            _ => Err(format!("unknown method {s}")),
        }
    }
}

/// `count` terms in normalization `norm`, exact or modulo a prime.
pub fn generate(
    spec: &LatticeSpec,
    norm: Normalization,
    count: usize,
    method: Method,
    modulus: Option<u64>,
) -> Result<TermTable, TermgenError> {
    let nmax = match norm {
        Normalization::Raw => count.saturating_sub(1),
        Normalization::Tilde => 2 * count.saturating_sub(1),
    };
    let raw = match method {
        Method::WalkDp => terms_walk_dp(spec, nmax)?,
        Method::Heracles => terms_heracles(spec, nmax)?,
        Method::ClosedForm => terms_closed_form(spec, nmax)?,
        Method::FactorDp => {
            let terms: Vec<BigInt> = match norm {
                Normalization::Raw => (0..=nmax).map(|n| terms_factor_dp(spec, n, modulus)).collect(),
                // skip the odd indices the tilde table drops
                Normalization::Tilde => {
                    let even: Vec<BigInt> = (0..count).map(|k| terms_factor_dp(spec, 2 * k, modulus)).collect();
                    let t = TermTable { spec: *spec, norm, modulus, terms: even, method: method.tag().into() };
                    return Ok(t);
                }
            };
            TermTable { spec: *spec, norm: Normalization::Raw, modulus, terms, method: method.tag().into() }
        }
    };
    let mut table = match norm {
        Normalization::Raw => raw,
        Normalization::Tilde => raw.to_tilde(),
    };
    table.terms.truncate(count);
    if let (Some(p), None) = (modulus, table.modulus) {
        let pb = BigInt::from(p);
        table.terms.iter_mut().for_each(|t| *t %= &pb);
        table.modulus = Some(p);
    }
    Ok(table)
}

/// Term tables on disk under `root/<M>-<N>/<norm>/<method>.terms`.
#[derive(Debug, Clone)]
pub struct TermCache {
    root: PathBuf,
}

impl TermCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        TermCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, spec: &LatticeSpec, norm: Normalization, method: &str, modulus: Option<u64>) -> PathBuf {
        let file = match modulus {
            Some(p) => format!("{method}-p{p}.terms"),
            None => format!("{method}.terms"),
        };
        self.root.join(format!("{}-{}", spec.m(), spec.n())).join(norm.to_string()).join(file)
    }

    pub fn load(
        &self,
        spec: &LatticeSpec,
        norm: Normalization,
        method: &str,
        modulus: Option<u64>,
    ) -> Result<Option<TermTable>, TermgenError> {
        let path = self.path(spec, norm, method, modulus);
        match fs::File::open(&path) {
            Ok(f) => Ok(Some(TermTable::read_from(BufReader::new(f))?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(TermError::from(e).into()),
        }
    }

    /// Writes through a temporary file and renames it into place.
    pub fn store(&self, table: &TermTable) -> Result<PathBuf, TermgenError> {
        let path = self.path(&table.spec, table.norm, &table.method, table.modulus);
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir).map_err(TermError::from)?;
        let tmp = dir.join(format!(".{}.tmp{}", table.method, std::process::id()));
        {
            let mut f = fs::File::create(&tmp).map_err(TermError::from)?;
            table.write_to(&mut f)?;
            f.flush().map_err(TermError::from)?;
        }
        fs::rename(&tmp, &path).map_err(TermError::from)?;
        Ok(path)
    }

    /// Cached table with at least `count` terms, generating and storing it if needed.
    pub fn get_or_generate(
        &self,
        spec: &LatticeSpec,
        norm: Normalization,
        count: usize,
        method: Method,
        modulus: Option<u64>,
    ) -> Result<TermTable, TermgenError> {
        if let Some(t) = self.load(spec, norm, method.tag(), modulus)? {
            if t.len() >= count {
                return Ok(t.truncated(count));
            }
        }
        let t = generate(spec, norm, count, method, modulus)?;
        self.store(&t)?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfinite::PolyRec;

    #[test]
    fn catalan_extension() {
        // (n+1) c(n) − (4n−2) c(n−1) = 0
        let rec = PolyRec::from_i64(&[&[1, 1], &[2, -4]]).unwrap();
        let spec = LatticeSpec::new(1, 1).unwrap();
        let init = TermTable::exact(spec, Normalization::Tilde, vec![BigInt::from(1)], "seed");
        let t = extend_terms(&rec, &init, 10).unwrap();
        assert_eq!(t.terms[10], BigInt::from(16796));
    }

    #[test]
    fn wrong_initial_values_detected() {
        // Motzkin: (n+2) m(n) − (2n+1) m(n−1) − 3(n−1) m(n−2) = 0
        let rec = PolyRec::from_i64(&[&[2, 1], &[-1, -2], &[3, -3]]).unwrap();
        let spec = LatticeSpec::new(1, 1).unwrap();
        let init = TermTable::exact(spec, Normalization::Tilde, vec![BigInt::from(1), BigInt::from(2)], "seed");
        assert!(matches!(extend_terms(&rec, &init, 10), Err(TermgenError::Rec(PfiniteError::NonInteger { .. }))));
    }

    #[test]
    fn cross_method_small() {
        for big_n in 1..=5 {
            for big_m in 1..=big_n {
                let spec = LatticeSpec::new(big_m, big_n).unwrap();
                let nmax = if big_n == 5 { 8 } else { 12 };
                let walk = terms_walk_dp(&spec, nmax).unwrap();
                let pref = generate(&spec, Normalization::Raw, nmax + 1, Method::preferred(&spec), None).unwrap();
                assert_eq!(walk.terms, pref.terms, "M={big_m} N={big_n}");
                assert_eq!(walk.terms[2], BigInt::from(spec.coordination_number()));
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TermCache::new(dir.path());
        let spec = LatticeSpec::new(2, 3).unwrap();
        let a = cache.get_or_generate(&spec, Normalization::Raw, 9, Method::FactorDp, None).unwrap();
        assert!(cache.path(&spec, Normalization::Raw, "factor-dp", None).exists());
        let b = cache.get_or_generate(&spec, Normalization::Raw, 6, Method::FactorDp, None).unwrap();
        assert_eq!(a.terms[..6], b.terms[..]);
        let m = generate(&spec, Normalization::Tilde, 5, Method::WalkDp, Some(1_000_003)).unwrap();
        m.validate().unwrap();
    }
}
