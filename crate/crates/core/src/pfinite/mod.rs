//! Linear recurrences with polynomial coefficients and Euler-operator ODEs.
//!
//! A [`PolyRec`] `[p_0, …, p_L]` stands for `Σ_ℓ p_ℓ(n)·f(n−ℓ) = 0`. A
//! [`ThetaOde`] `[u_0, …, u_K]` stands for `Σ_k u_k(z)·θ^k F = 0` with
//! `θ = z·d/dz`, and a [`DiffOpD`] uses `D = d/dz` in place of `θ`.

mod json;
mod lclm;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{BigRat, PrimeField};
use crate::poly::{falling_factorial, IntPoly};
use crate::terms::TermTable;

pub use json::{Operator, OperatorJson};
pub use lclm::{integer_roots, rec_add};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PfiniteError {
    #[error("operator must have nonzero first and last coefficients")]
    Degenerate,
    #[error("leading coefficient p_0 vanishes at n={n}")]
    Singular { n: usize },
    #[error("non-integer value produced at n={n}")]
    NonInteger { n: usize },
    #[error("need at least {need} initial values, got {got}")]
    TooFewInitial { need: usize, got: usize },
    #[error("initial values violate the recurrence at n={n}")]
    Inconsistent { n: usize },
    #[error("no common left multiple found up to order {0}")]
    NoLclm(usize),
    #[error("integer root search bound too large")]
    RootBound,
    #[error("operator json: {0}")]
    Json(String),
}

/// Divides by the content and fixes the sign so `sign_of` becomes positive.
fn normalize(mut coeffs: Vec<IntPoly>, sign_of: impl Fn(&[IntPoly]) -> Option<BigInt>) -> Vec<IntPoly> {
    let g = coeffs.iter().fold(BigInt::zero(), |g, p| g.gcd(&p.content()));
    if g.is_zero() {
        return coeffs;
    }
    let flip = sign_of(&coeffs).is_some_and(|s| s.is_negative());
    let g = if flip { -g } else { g };
    for p in &mut coeffs {
        *p = p.div_exact(&g);
    }
    coeffs
}

/// `Σ_ℓ p_ℓ(n)·f(n−ℓ) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyRec {
    coeffs: Vec<IntPoly>,
}

impl PolyRec {
    pub fn new(coeffs: Vec<IntPoly>) -> Result<Self, PfiniteError> {
        if coeffs.first().is_none_or(|p| p.is_zero()) || coeffs.last().is_none_or(|p| p.is_zero()) {
            return Err(PfiniteError::Degenerate);
        }
        Ok(PolyRec { coeffs })
    }

    /// Convenience constructor from small integer coefficient lists.
    pub fn from_i64(coeffs: &[&[i64]]) -> Result<Self, PfiniteError> {
        Self::new(coeffs.iter().map(|c| IntPoly::from_i64(c)).collect())
    }

    /// Drops vanishing leading coefficients by reindexing and trailing ones by truncation.
    fn from_untrimmed(mut coeffs: Vec<IntPoly>) -> Result<Self, PfiniteError> {
        while coeffs.last().is_some_and(|p| p.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().position(|p| !p.is_zero()).ok_or(PfiniteError::Degenerate)?;
        // p'_ℓ(n) = p_{ℓ+s}(n+s) describes the same relation at index n+s.
        let coeffs = coeffs[lead..].iter().map(|p| p.shift(lead as i64)).collect();
        Self::new(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[IntPoly] {
        &self.coeffs
    }

    /// Content 1 and positive leading coefficient of `p_0`.
    pub fn canonical(&self) -> PolyRec {
        PolyRec { coeffs: normalize(self.coeffs.clone(), |c| c[0].leading().cloned()) }
    }

    /// The relation in the forward form `Σ_j h_j(n)·f(n+j) = 0`, `h_j(n) = p_{L−j}(n+L)`.
    pub fn forward_coeffs(&self) -> Vec<IntPoly> {
        let l = self.order();
        (0..=l).map(|j| self.coeffs[l - j].shift(l as i64)).collect()
    }

    /// Left-hand side at `n` with zero padding below index 0.
    pub fn residual(&self, terms: &[BigInt], n: usize) -> BigInt {
        let nn = BigInt::from(n);
        let mut s = BigInt::zero();
        for (l, p) in self.coeffs.iter().enumerate() {
            if l > n || p.is_zero() {
                continue;
            }
            s += p.eval(&nn) * &terms[n - l];
        }
        s
    }

    fn residual_mod(&self, reduced: &[Vec<u64>], terms: &[u64], f: &PrimeField, n: usize) -> u64 {
        let x = f.enter(n as u64);
        let mut s = 0;
        for (l, p) in reduced.iter().enumerate() {
            if l > n {
                break;
            }
            let mut v = 0;
            for &c in p.iter().rev() {
                v = f.add(f.mul(v, x), c);
            }
            s = f.add(s, f.mul(v, terms[n - l]));
        }
        s
    }

    /// First index in `start..terms.len()` where the relation fails.
    pub fn first_failure(&self, terms: &[BigInt], start: usize, modulus: Option<u64>) -> Option<usize> {
        match modulus {
            None => (start..terms.len()).find(|&n| !self.residual(terms, n).is_zero()),
            Some(p) => {
                let f = PrimeField::new(p);
                let reduced: Vec<Vec<u64>> = self.coeffs.iter().map(|c| c.reduce(&f)).collect();
                let t: Vec<u64> = terms.iter().map(|x| f.from_bigint(x)).collect();
                (start..t.len()).find(|&n| self.residual_mod(&reduced, &t, &f, n) != 0)
            }
        }
    }

    pub fn to_json(&self) -> OperatorJson {
        Operator::Rec(self.clone()).to_json()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Pass,
    FailAt(usize),
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, VerifyOutcome::Pass)
    }
}

fn outcome(o: Option<usize>) -> VerifyOutcome {
    o.map_or(VerifyOutcome::Pass, VerifyOutcome::FailAt)
}

/// Checks the recurrence for `L ≤ n < len`.
pub fn rec_verify(rec: &PolyRec, terms: &TermTable) -> VerifyOutcome {
    outcome(rec.first_failure(&terms.terms, rec.order(), terms.modulus))
}

/// Checks the recurrence for every `n ≥ 0`, reading `f(n) = 0` below index 0.
pub fn rec_verify_padded(rec: &PolyRec, terms: &TermTable) -> VerifyOutcome {
    outcome(rec.first_failure(&terms.terms, 0, terms.modulus))
}

/// Exact extension of `initial` to indices `0..=nmax` over the rationals.
pub fn rec_unroll(rec: &PolyRec, initial: &[BigRat], nmax: usize) -> Result<Vec<BigRat>, PfiniteError> {
    let l = rec.order();
    if initial.len() < l {
        return Err(PfiniteError::TooFewInitial { need: l, got: initial.len() });
    }
    let mut out: Vec<BigRat> = initial.iter().take(nmax + 1).cloned().collect();
    for n in out.len()..=nmax {
        let nn = BigInt::from(n);
        let p0 = rec.coeffs[0].eval(&nn);
        if p0.is_zero() {
            return Err(PfiniteError::Singular { n });
        }
        let mut s = BigRat::zero();
        for (j, p) in rec.coeffs.iter().enumerate().skip(1) {
            if j > n {
                break;
            }
            s += BigRat::from_integer(p.eval(&nn)) * &out[n - j];
        }
        out.push(-s / BigRat::from_integer(p0));
    }
    Ok(out)
}

/// Integer-valued extension; any inexact division is reported as [`PfiniteError::NonInteger`].
pub fn rec_unroll_int(rec: &PolyRec, initial: &[BigInt], nmax: usize) -> Result<Vec<BigInt>, PfiniteError> {
    let l = rec.order();
    if initial.len() < l {
        return Err(PfiniteError::TooFewInitial { need: l, got: initial.len() });
    }
    let mut out: Vec<BigInt> = initial.iter().take(nmax + 1).cloned().collect();
    out.reserve(nmax + 1 - out.len());
    for n in out.len()..=nmax {
        let nn = BigInt::from(n);
        let p0 = rec.coeffs[0].eval(&nn);
        if p0.is_zero() {
            return Err(PfiniteError::Singular { n });
        }
        let mut s = BigInt::zero();
        for (j, p) in rec.coeffs.iter().enumerate().skip(1) {
            if j > n {
                break;
            }
            if !p.is_zero() {
                s += p.eval(&nn) * &out[n - j];
            }
        }
        let (q, r) = (-s).div_rem(&p0);
        if !r.is_zero() {
            return Err(PfiniteError::NonInteger { n });
        }
        out.push(q);
    }
    Ok(out)
}

/// `Σ_k u_k(z)·θ^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThetaOde {
    coeffs: Vec<IntPoly>,
}

impl ThetaOde {
    pub fn new(mut coeffs: Vec<IntPoly>) -> Result<Self, PfiniteError> {
        while coeffs.last().is_some_and(|p| p.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(PfiniteError::Degenerate);
        }
        Ok(ThetaOde { coeffs })
    }

    pub fn from_i64(coeffs: &[&[i64]]) -> Result<Self, PfiniteError> {
        Self::new(coeffs.iter().map(|c| IntPoly::from_i64(c)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[IntPoly] {
        &self.coeffs
    }

    /// `u_{k,ℓ}`, the coefficient of `z^ℓ θ^k`.
    pub fn entry(&self, k: usize, l: usize) -> BigInt {
        self.coeffs[k].coeff(l)
    }

    /// Common power of `z` removed, content 1, and positive leading coefficient
    /// of the associated recurrence's `p_0(n) = Σ_k u_k(0)·n^k`.
    pub fn canonical(&self) -> ThetaOde {
        let v = self.coeffs.iter().filter_map(|p| p.valuation()).min().unwrap_or(0);
        let coeffs = self.coeffs.iter().map(|p| p.div_xk(v)).collect();
        let coeffs = normalize(coeffs, |c| c.iter().rev().map(|p| p.coeff(0)).find(|x| !x.is_zero()));
        ThetaOde { coeffs }
    }

    pub fn to_json(&self) -> OperatorJson {
        Operator::Theta(self.clone()).to_json()
    }
}

/// `Σ_k v_k(z)·D^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiffOpD {
    coeffs: Vec<IntPoly>,
}

impl DiffOpD {
    pub fn new(mut coeffs: Vec<IntPoly>) -> Result<Self, PfiniteError> {
        while coeffs.last().is_some_and(|p| p.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(PfiniteError::Degenerate);
        }
        Ok(DiffOpD { coeffs })
    }

    pub fn from_i64(coeffs: &[&[i64]]) -> Result<Self, PfiniteError> {
        Self::new(coeffs.iter().map(|c| IntPoly::from_i64(c)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[IntPoly] {
        &self.coeffs
    }

    /// Content 1 and positive leading coefficient of `v_K`.
    ///
    /// Powers of `z` are kept: `z·D` and `D` are different operators here.
    pub fn canonical(&self) -> DiffOpD {
        DiffOpD { coeffs: normalize(self.coeffs.clone(), |c| c.last().and_then(|p| p.leading().cloned())) }
    }
}

/// The recurrence of the coefficient sequence: `p_ℓ(n) = Σ_k u_{k,ℓ}·(n−ℓ)^k`.
pub fn theta_ode_to_rec(ode: &ThetaOde) -> PolyRec {
    let ode = ode.canonical();
    let deg = ode.degree();
    let coeffs = (0..=deg)
        .map(|l| {
            let col = IntPoly::new((0..=ode.order()).map(|k| ode.entry(k, l)).collect());
            col.shift(-(l as i64))
        })
        .collect();
    PolyRec::from_untrimmed(coeffs).expect("canonical ODE has nonzero columns").canonical()
}

/// Exact inverse of [`theta_ode_to_rec`]: `u_{k,ℓ}` = coefficient of `m^k` in `p_ℓ(m+ℓ)`.
///
/// Only meaningful when the recurrence holds for every `n ≥ 0` under zero padding.
pub fn rec_to_theta_ode_exact(rec: &PolyRec) -> ThetaOde {
    let shifted: Vec<IntPoly> = rec.coeffs.iter().enumerate().map(|(l, p)| p.shift(l as i64)).collect();
    let k_max = shifted.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    let coeffs = (0..=k_max)
        .map(|k| IntPoly::new(shifted.iter().map(|p| p.coeff(k)).collect()))
        .collect();
    ThetaOde::new(coeffs).expect("nonzero recurrence").canonical()
}

/// The differential equation of `Σ f(n) z^n` for a recurrence valid from `n = L` on.
///
/// The recurrence is first multiplied by `n(n−1)⋯(n−L+1)`, which makes it hold
/// for every `n ≥ 0`; the result has order `degree + L` and degree `L`.
pub fn rec_to_theta_ode(rec: &PolyRec) -> ThetaOde {
    let ff = falling_factorial(rec.order());
    let padded = PolyRec { coeffs: rec.coeffs.iter().map(|p| p * &ff).collect() };
    rec_to_theta_ode_exact(&padded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvertDirection {
    ThetaToD,
    DToTheta,
}

/// Stirling numbers of the second kind `S(j, i)` for `j ≤ k`.
fn stirling2(k: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); k + 1]; k + 1];
    s[0][0] = BigInt::one();
    for j in 1..=k {
        for i in 1..=j {
            s[j][i] = &s[j - 1][i] * i + &s[j - 1][i - 1];
        }
    }
    s
}

/// `θ^j = Σ_i S(j,i)·z^i D^i`.
pub fn theta_to_d(ode: &ThetaOde) -> DiffOpD {
    let k = ode.order();
    let s = stirling2(k);
    let coeffs = (0..=k)
        .map(|i| {
            let mut acc = IntPoly::zero();
            for j in i..=k {
                acc = &acc + &ode.coeffs[j].scale(&s[j][i]);
            }
            acc.mul_xk(i)
        })
        .collect();
    DiffOpD::new(coeffs).expect("nonzero operator").canonical()
}

/// Left-multiplies by `z^K` and uses `z^j D^j = θ(θ−1)⋯(θ−j+1)`.
pub fn d_to_theta(op: &DiffOpD) -> ThetaOde {
    let k = op.order();
    let mut coeffs = vec![IntPoly::zero(); k + 1];
    for (i, v) in op.coeffs.iter().enumerate() {
        let ff = falling_factorial(i);
        let vz = v.mul_xk(k - i);
        for (j, c) in ff.coeffs().iter().enumerate() {
            if !c.is_zero() {
                coeffs[j] = &coeffs[j] + &vz.scale(c);
            }
        }
    }
    ThetaOde::new(coeffs).expect("nonzero operator").canonical()
}

/// Either direction of the θ/D basis change.
pub fn theta_d_convert(op: &Operator, dir: ConvertDirection) -> Result<Operator, PfiniteError> {
    match (op, dir) {
        (Operator::Theta(t), ConvertDirection::ThetaToD) => Ok(Operator::D(theta_to_d(t))),
        (Operator::D(d), ConvertDirection::DToTheta) => Ok(Operator::Theta(d_to_theta(d))),
        _ => Err(PfiniteError::Json("operator kind does not match conversion direction".into())),
    }
}

/// Recurrence for `b` with `b(2m+offset) = a(m)` and zeros elsewhere.
pub fn rec_interleave(rec: &PolyRec, offset: usize) -> PolyRec {
    assert!(offset <= 1, "offset must be 0 or 1");
    let d = rec.degree() as u32;
    let l = rec.order();
    let mut coeffs = vec![IntPoly::zero(); 2 * l + 1];
    for (j, p) in rec.coeffs.iter().enumerate() {
        // 2^d·p((n − offset)/2) = Σ_k c_k 2^{d−k} (n − offset)^k
        let scaled: Vec<BigInt> =
            p.coeffs().iter().enumerate().map(|(k, c)| c * (BigInt::one() << (d as usize - k))).collect();
        coeffs[2 * j] = IntPoly::new(scaled).shift(-(offset as i64));
    }
    PolyRec::new(coeffs).expect("interleaving keeps end coefficients").canonical()
}

/// Annihilator of `F(z^k)` from one of `F(z)`.
pub fn ode_compose_power(ode: &ThetaOde, k: usize) -> ThetaOde {
    assert!(k >= 1);
    let big_k = ode.order();
    let coeffs = ode
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, u)| u.inflate(k).scale(&BigInt::from(k).pow((big_k - j) as u32)))
        .collect();
    ThetaOde::new(coeffs).expect("nonzero operator").canonical()
}

/// `θ ↦ θ + s`: the operator annihilating `z^{−s}·F` when `ode` annihilates `F`.
pub fn ode_theta_shift(ode: &ThetaOde, s: i64) -> ThetaOde {
    let big_k = ode.order();
    let s = BigInt::from(s);
    let coeffs = (0..=big_k)
        .map(|k| {
            let mut acc = IntPoly::zero();
            for j in k..=big_k {
                let c = crate::arith::binomial(j as u64, k as u64) * s.pow((j - k) as u32);
                acc = &acc + &ode.coeffs[j].scale(&c);
            }
            acc
        })
        .collect();
    ThetaOde::new(coeffs).expect("nonzero operator").canonical()
}
