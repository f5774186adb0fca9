//! Guessing recurrences and θ-ODEs from term prefixes.
//!
//! An ansatz of shape `(a, b)` has unknowns `c_{ℓ,j}` for `ℓ ≤ a`, `j ≤ b`:
//!
//! * recurrence: `Σ c_{ℓ,j} n^j t(n−ℓ) = 0` for `a ≤ n < len` (order `a`, degree `b`);
//! * θ-ODE: `Σ c_{ℓ,j} (n−ℓ)^j t(n−ℓ) = 0` for `0 ≤ n < len`, which is the
//!   coefficient of `z^n` in `Σ_j u_j(z) θ^j F` with `u_j(z) = Σ_ℓ c_{ℓ,j} z^ℓ`
//!   (order `b`, degree `a`).
//!
//! The nullspace is found modulo word primes, lifted by CRT and rational
//! reconstruction, confirmed on a held-out prime and then checked exactly.

mod nullspace;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use nullspace::{nullspace_mod, ModNullspace};

use crate::arith::{reconstruct_vector, word_primes, CrtAccumulator, PrimeField};
use crate::pfinite::{
    integer_roots, rec_add, rec_unroll, rec_verify, rec_verify_padded, theta_ode_to_rec, Operator, PfiniteError,
    PolyRec, ThetaOde, VerifyOutcome,
};
use crate::poly::IntPoly;
use crate::terms::TermTable;

/// Upper limit on primes spent lifting one candidate.
pub const MAX_PRIMES: usize = 96;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GuessError {
    #[error("guessing needs exact terms")]
    NotExact,
    #[error("invalid guess configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Pfinite(#[from] PfiniteError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Smallest order, then smallest degree.
    OrderFirst,
    /// Smallest degree, then smallest order.
    DegreeFirst,
}

impl std::str::FromStr for Objective {
    type Err = GuessError;
    fn from_str(s: &str) -> Result<Self, GuessError> {
        match s {
            "order-first" => Ok(Objective::OrderFirst),
            "degree-first" => Ok(Objective::DegreeFirst),
            _ => Err(GuessError::Config(format!("unknown objective {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessConfig {
    pub max_order: usize,
    pub max_degree: usize,
    pub objective: Objective,
    /// Equations beyond the number of unknowns.
    pub oversample: usize,
    pub prime_count: usize,
}

impl Default for GuessConfig {
    fn default() -> Self {
        GuessConfig { max_order: 12, max_degree: 40, objective: Objective::OrderFirst, oversample: 25, prime_count: 2 }
    }
}

impl GuessConfig {
    pub fn validate(&self) -> Result<(), GuessError> {
        if self.oversample < 25 {
            return Err(GuessError::Config(format!("oversample {} < 25", self.oversample)));
        }
        if self.prime_count < 2 {
            return Err(GuessError::Config(format!("prime_count {} < 2", self.prime_count)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ansatz {
    Rec,
    Ode,
}

impl Ansatz {
    fn first_row(self, a: usize) -> usize {
        match self {
            Ansatz::Rec => a,
            Ansatz::Ode => 0,
        }
    }

    fn rows(self, len: usize, a: usize) -> usize {
        len.saturating_sub(self.first_row(a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Found {
    Rec(PolyRec),
    Ode(ThetaOde),
}

impl Found {
    pub fn operator(&self) -> Operator {
        match self {
            Found::Rec(r) => Operator::Rec(r.clone()),
            Found::Ode(o) => Operator::Theta(o.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ReconstructionStatus {
    Verified,
    NotFound,
    DimensionMismatch { prime: u64 },
    ReconstructionFailed { primes: usize },
    VerificationFailed { n: usize },
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessReport {
    pub ansatz: Ansatz,
    pub found: Option<Found>,
    pub order: Option<usize>,
    pub degree: Option<usize>,
    pub equations_used: usize,
    pub primes_used: usize,
    pub verified_terms: usize,
    pub status: ReconstructionStatus,
    /// Shapes `(order, degree)` tried at their largest admissible size without a solution.
    pub frontier: Vec<(usize, usize)>,
}

impl GuessReport {
    pub fn rec(&self) -> Option<&PolyRec> {
        match &self.found {
            Some(Found::Rec(r)) => Some(r),
            _ => None,
        }
    }

    pub fn ode(&self) -> Option<&ThetaOde> {
        match &self.found {
            Some(Found::Ode(o)) => Some(o),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ansatz": self.ansatz,
            "found": self.found.as_ref().map(|f| f.operator().to_json()),
            "order": self.order,
            "degree": self.degree,
            "equations_used": self.equations_used,
            "primes_used": self.primes_used,
            "verified_terms": self.verified_terms,
            "reconstruction_status": self.status,
            "frontier": self.frontier,
        })
    }
}

/// Terms in Montgomery form.
fn residues(f: &PrimeField, terms: &[BigInt]) -> Vec<u64> {
    terms.iter().map(|t| f.from_bigint(t)).collect()
}

fn system_row(kind: Ansatz, f: &PrimeField, t: &[u64], n: usize, a: usize, b: usize) -> Vec<u64> {
    let mut row = vec![0u64; (a + 1) * (b + 1)];
    for l in 0..=a.min(n) {
        let base = t[n - l];
        if base == 0 {
            continue;
        }
        let x = f.enter(match kind {
            Ansatz::Rec => n,
            Ansatz::Ode => n - l,
        } as u64);
        let mut v = base;
        for j in 0..=b {
            row[l * (b + 1) + j] = v;
            v = f.mul(v, x);
        }
    }
    row
}

pub fn solve_mod(kind: Ansatz, terms: &[BigInt], a: usize, b: usize, p: u64) -> ModNullspace {
    let f = PrimeField::new(p);
    let t = residues(&f, terms);
    let rows = (kind.first_row(a)..terms.len()).map(|n| system_row(kind, &f, &t, n, a, b));
    nullspace_mod(&f, (a + 1) * (b + 1), rows)
}

fn operator_from(kind: Ansatz, v: &[BigInt], a: usize, b: usize) -> Option<Found> {
    let w = b + 1;
    match kind {
        Ansatz::Rec => {
            let mut coeffs: Vec<IntPoly> = (0..=a).map(|l| IntPoly::new(v[l * w..(l + 1) * w].to_vec())).collect();
            while coeffs.last().is_some_and(|p| p.is_zero()) {
                coeffs.pop();
            }
            PolyRec::new(coeffs).ok().map(|r| Found::Rec(r.canonical()))
        }
        Ansatz::Ode => {
            let coeffs = (0..=b).map(|k| IntPoly::new((0..=a).map(|l| v[l * w + k].clone()).collect())).collect();
            ThetaOde::new(coeffs).ok().map(|o| Found::Ode(o.canonical()))
        }
    }
}

fn verify_found(found: &Found, table: &TermTable) -> VerifyOutcome {
    match found {
        Found::Rec(r) => rec_verify(r, table),
        Found::Ode(o) => rec_verify_padded(&theta_ode_to_rec(o), table),
    }
}

/// `v mod p` is a multiple of the modular basis vector `basis` (normalized at `free`).
fn proportional(v: &[BigInt], basis: &[u64], p: u64) -> bool {
    let f = PrimeField::new(p);
    let Some(free) = basis.iter().zip(v).position(|(&b, x)| b != 0 && !x.is_zero()) else {
        return false;
    };
    let scale = f.mul(f.from_bigint(&v[free]), f.inv(f.enter(basis[free])));
    v.iter().zip(basis).all(|(x, &b)| f.from_bigint(x) == f.mul(scale, f.enter(b)))
}

struct Lifted {
    vector: Vec<BigInt>,
    primes_used: usize,
}

/// CRT-lifts the first nullspace basis vector of shape `(a, b)` over successive primes.
fn lift(kind: Ansatz, terms: &[BigInt], a: usize, b: usize, prime_count: usize) -> Result<Lifted, ReconstructionStatus> {
    let primes = word_primes(MAX_PRIMES + 1);
    let ncols = (a + 1) * (b + 1);
    let mut accs: Vec<CrtAccumulator> = (0..ncols).map(|_| CrtAccumulator::new()).collect();
    let mut reference: Option<(Vec<usize>, usize)> = None;
    let mut pending: Option<Vec<BigInt>> = None;
    for (i, &p) in primes.iter().enumerate() {
        let ns = solve_mod(kind, terms, a, b, p);
        match &reference {
            None => reference = Some((ns.pivots.clone(), ns.dim)),
            Some((piv, dim)) if *piv != ns.pivots || *dim != ns.dim => {
                return Err(ReconstructionStatus::DimensionMismatch { prime: p });
            }
            _ => {}
        }
        let Some(basis) = ns.vector else {
            return Err(ReconstructionStatus::Degenerate);
        };
        if let Some(cand) = pending.take() {
            // p is held out from the reconstruction that produced `cand`
            if proportional(&cand, &basis, p) {
                return Ok(Lifted { vector: cand, primes_used: i + 1 });
            }
        }
        for (acc, &r) in accs.iter_mut().zip(&basis) {
            acc.push(r, p).expect("distinct primes");
        }
        if i + 1 >= prime_count {
            let values: Vec<BigInt> = accs.iter().map(|a| a.value().clone()).collect();
            pending = reconstruct_vector(&values, accs[0].modulus());
        }
    }
    Err(ReconstructionStatus::ReconstructionFailed { primes: primes.len() })
}

/// Lifts, builds and exactly verifies the ansatz of shape `(a, b)` on all of `table`.
fn finish(kind: Ansatz, table: &TermTable, a: usize, b: usize, prime_count: usize, frontier: Vec<(usize, usize)>) -> GuessReport {
    let (order, degree) = match kind {
        Ansatz::Rec => (a, b),
        Ansatz::Ode => (b, a),
    };
    let mut report = GuessReport {
        ansatz: kind,
        found: None,
        order: Some(order),
        degree: Some(degree),
        equations_used: kind.rows(table.len(), a),
        primes_used: 0,
        verified_terms: 0,
        status: ReconstructionStatus::NotFound,
        frontier,
    };
    let lifted = match lift(kind, &table.terms, a, b, prime_count) {
        Ok(l) => l,
        Err(s) => {
            report.status = s;
            return report;
        }
    };
    report.primes_used = lifted.primes_used;
    let Some(found) = operator_from(kind, &lifted.vector, a, b) else {
        report.status = ReconstructionStatus::Degenerate;
        return report;
    };
    match verify_found(&found, table) {
        VerifyOutcome::Pass => {
            report.verified_terms = table.len();
            report.status = ReconstructionStatus::Verified;
            match &found {
                Found::Rec(r) => {
                    report.order = Some(r.order());
                    report.degree = Some(r.degree());
                }
                Found::Ode(o) => {
                    report.order = Some(o.order());
                    report.degree = Some(o.degree());
                }
            }
            report.found = Some(found);
        }
        VerifyOutcome::FailAt(n) => report.status = ReconstructionStatus::VerificationFailed { n },
    }
    report
}

fn search(kind: Ansatz, table: &TermTable, cfg: &GuessConfig) -> Result<GuessReport, GuessError> {
    cfg.validate()?;
    if !table.is_exact() {
        return Err(GuessError::NotExact);
    }
    let len = table.len();
    // a counts shifts, b counts powers
    let (a_range, b_range) = match kind {
        Ansatz::Rec => ((1, cfg.max_order), (0, cfg.max_degree)),
        Ansatz::Ode => ((0, cfg.max_degree), (1, cfg.max_order)),
    };
    let outer_is_a = matches!(
        (kind, cfg.objective),
        (Ansatz::Rec, Objective::OrderFirst) | (Ansatz::Ode, Objective::DegreeFirst)
    );
    let (outer, inner) = if outer_is_a { (a_range, b_range) } else { (b_range, a_range) };
    let shape = |o: usize, i: usize| if outer_is_a { (o, i) } else { (i, o) };
    let fits = |(a, b): (usize, usize)| (a + 1) * (b + 1) + cfg.oversample <= kind.rows(len, a);
    let p = word_primes(1)[0];
    let solvable = |(a, b): (usize, usize)| solve_mod(kind, &table.terms, a, b, p).dim > 0;
    let named = |(a, b): (usize, usize)| match kind {
        Ansatz::Rec => (a, b),
        Ansatz::Ode => (b, a),
    };
    let mut frontier = Vec::new();
    for o in outer.0..=outer.1 {
        let Some(cap) = (inner.0..=inner.1).rev().find(|&i| fits(shape(o, i))) else {
            continue;
        };
        if !solvable(shape(o, cap)) {
            frontier.push(named(shape(o, cap)));
            continue;
        }
        let (mut lo, mut hi) = (inner.0, cap);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if solvable(shape(o, mid)) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let (a, b) = shape(o, lo);
        return Ok(finish(kind, table, a, b, cfg.prime_count, frontier));
    }
    Ok(GuessReport {
        ansatz: kind,
        found: None,
        order: None,
        degree: None,
        equations_used: 0,
        primes_used: 1,
        verified_terms: 0,
        status: ReconstructionStatus::NotFound,
        frontier,
    })
}

/// Minimal recurrence within the configured bounds.
pub fn guess_rec(table: &TermTable, cfg: &GuessConfig) -> Result<GuessReport, GuessError> {
    search(Ansatz::Rec, table, cfg)
}

/// Minimal θ-ODE of `Σ t(n) z^n` within the configured bounds.
pub fn guess_theta_ode(table: &TermTable, cfg: &GuessConfig) -> Result<GuessReport, GuessError> {
    search(Ansatz::Ode, table, cfg)
}

/// Solves one fixed recurrence shape with every supplied equation and no oversampling guard.
pub fn guess_rec_at(table: &TermTable, order: usize, degree: usize, prime_count: usize) -> Result<GuessReport, GuessError> {
    if !table.is_exact() {
        return Err(GuessError::NotExact);
    }
    Ok(finish(Ansatz::Rec, table, order, degree, prime_count.max(1), Vec::new()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertifyReport {
    pub passed: bool,
    pub first_failure: Option<usize>,
    pub verified_terms: usize,
    /// Held-out primes and whether the candidate spans the modular nullspace there.
    pub held_out: Vec<(u64, bool)>,
    /// Equations checked minus unknowns in the candidate's shape.
    pub margin: i64,
}

/// Re-verifies `candidate` exactly on `oracle` and re-solves its shape modulo held-out primes.
pub fn certify_candidate(candidate: &PolyRec, oracle: &TermTable, extra_primes: usize) -> CertifyReport {
    let (a, b) = (candidate.order(), candidate.degree());
    let rows = Ansatz::Rec.rows(oracle.len(), a);
    let margin = rows as i64 - ((a + 1) * (b + 1)) as i64;
    let first_failure = match rec_verify(candidate, oracle) {
        VerifyOutcome::Pass => None,
        VerifyOutcome::FailAt(n) => Some(n),
    };
    let v: Vec<BigInt> =
        candidate.coeffs().iter().flat_map(|p| (0..=b).map(move |j| p.coeff(j))).collect();
    let held_out: Vec<(u64, bool)> = if oracle.is_exact() {
        word_primes(MAX_PRIMES + 1 + extra_primes)[MAX_PRIMES + 1..]
            .iter()
            .map(|&p| {
                let ns = solve_mod(Ansatz::Rec, &oracle.terms, a, b, p);
                let ok = ns.dim == 1 && ns.vector.as_deref().is_some_and(|basis| proportional(&v, basis, p));
                (p, ok)
            })
            .collect()
    } else {
        Vec::new()
    };
    let passed = first_failure.is_none() && held_out.iter().all(|&(_, ok)| ok);
    CertifyReport { passed, first_failure, verified_terms: oracle.len(), held_out, margin }
}

/// Whether `a` and `b`, seeded with `initial`, generate the same sequence.
///
/// The difference of the two sequences is annihilated by the common left
/// multiple of `a` and `b`; it vanishes identically once it vanishes past the
/// largest integer root of that operator's leading coefficient plus its order.
pub fn rec_equivalent_on(a: &PolyRec, b: &PolyRec, initial: &[BigInt]) -> Result<bool, PfiniteError> {
    for r in [a, b] {
        if initial.len() < r.order() {
            return Err(PfiniteError::TooFewInitial { need: r.order(), got: initial.len() });
        }
        if let Some(n) = r.first_failure(initial, r.order(), None) {
            return Err(PfiniteError::Inconsistent { n });
        }
    }
    let c = rec_add(a, b)?;
    let root = integer_roots(&c.coeffs()[0])?.into_iter().max().unwrap_or(0) as usize;
    let nmax = (root + c.order() + 1).max(initial.len());
    let init: Vec<_> = initial.iter().map(|x| crate::arith::BigRat::from_integer(x.clone())).collect();
    let sa = rec_unroll(a, &init, nmax)?;
    let sb = rec_unroll(b, &init, nmax)?;
    Ok(sa == sb)
}
