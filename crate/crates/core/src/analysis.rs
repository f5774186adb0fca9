//! Pólya numbers, growth fits and first-return distributions from exact term prefixes.

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::terms::{Normalization, TermTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("analysis needs exact terms")]
    NotExact,
    #[error("need at least {need} terms, got {have}")]
    TooFewTerms { have: usize, need: usize },
    #[error("tail not certified with {have} terms; about {projected} needed")]
    NeedMoreTerms { have: usize, projected: usize, beta: f64, bound: f64 },
}

/// `ln x` for a positive big integer.
pub fn ln_big(x: &BigInt) -> f64 {
    debug_assert_eq!(x.sign(), Sign::Plus);
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `a / b` as a float, accurate to rounding even when both are huge.
pub fn ratio_f64(a: &BigInt, b: &BigInt) -> f64 {
    let (ba, bb) = (a.bits() as i64, b.bits() as i64);
    // scale so the quotient carries ~64 significant bits
    let shift = 64 - (ba - bb);
    let q = if shift >= 0 { (a << shift as u64) / b } else { a / (b << (-shift) as u64) };
    q.to_f64().expect("finite") * 2f64.powi(-shift as i32)
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Logs of the return-probability sequence at the coarsest period.
///
/// Tables whose odd terms vanish are read at even steps (`r(2k)/q^{2k}`);
/// otherwise consecutive steps are paired, `s(k) = u(2k) + u(2k+1)`.
/// Zero entries give `−∞`.
fn log_probabilities(table: &TermTable) -> Vec<f64> {
    let lq = (table.spec.coordination_number() as f64).ln();
    let ln_u = |r: &BigInt, steps: usize| if r.is_zero() { f64::NEG_INFINITY } else { ln_big(r) - steps as f64 * lq };
    match table.norm {
        Normalization::Tilde => table.terms.iter().enumerate().map(|(k, r)| ln_u(r, 2 * k)).collect(),
        Normalization::Raw if table.spec.odd_terms_vanish() => {
            table.terms.iter().step_by(2).enumerate().map(|(k, r)| ln_u(r, 2 * k)).collect()
        }
        Normalization::Raw => table
            .terms
            .chunks_exact(2)
            .enumerate()
            .map(|(k, pair)| {
                let (a, b) = (ln_u(&pair[0], 2 * k), ln_u(&pair[1], 2 * k + 1));
                let m = a.max(b);
                m + ((a - m).exp() + (b - m).exp()).ln()
            })
            .collect(),
    }
}

/// Least squares by modified Gram–Schmidt; `cols` are column vectors.
fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = cols.len();
    let mut q: Vec<Vec<f64>> = cols.to_vec();
    let mut r = vec![vec![0.0; m]; m];
    for j in 0..m {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(x, a)| *x -= d * a);
        }
        let norm = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        r[j][j] = norm;
        q[j].iter_mut().for_each(|x| *x /= norm);
    }
    let qty: Vec<f64> = q.iter().map(|qi| qi.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let s: f64 = (i + 1..m).map(|j| r[i][j] * x[j]).sum();
        x[i] = (qty[i] - s) / r[i][i];
    }
    x
}

/// `ln s(k) ≈ c − β ln k + a_1/k + a_2/k²` over `k ∈ [lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub c: f64,
    pub beta: f64,
    pub a1: f64,
    pub a2: f64,
}

impl TailModel {
    fn fit(ln_s: &[f64], lo: usize, hi: usize) -> TailModel {
        let scale = hi as f64;
        let ks: Vec<f64> = (lo..=hi).map(|k| k as f64).collect();
        let cols = vec![
            vec![1.0; ks.len()],
            ks.iter().map(|k| (k / scale).ln()).collect(),
            ks.iter().map(|k| scale / k).collect(),
            ks.iter().map(|k| (scale / k).powi(2)).collect(),
        ];
        let x = least_squares(&cols, &ln_s[lo..=hi]);
        let beta = -x[1];
        // x0 − β ln(k/scale) = (x0 + β ln scale) − β ln k
        TailModel { c: x[0] + beta * scale.ln(), beta, a1: x[2] * scale, a2: x[3] * scale * scale }
    }

    pub fn eval(&self, k: f64) -> f64 {
        (self.c - self.beta * k.ln() + self.a1 / k + self.a2 / (k * k)).exp()
    }

    /// `Σ_{k > from} s(k)`: explicit terms to `from + 2000`, then Euler–Maclaurin.
    pub fn tail_sum(&self, from: usize) -> f64 {
        let mut acc = KahanSum::default();
        let stop = from + 2000;
        for k in from + 1..=stop {
            acc.add(self.eval(k as f64));
        }
        // beyond `stop`: exp(a1/k + a2/k²) ≈ 1 + a1/k + (a2 + a1²/2)/k²
        let x = (stop + 1) as f64;
        let b2 = self.a2 + self.a1 * self.a1 / 2.0;
        let cc = self.c.exp();
        let integral = cc
            * (x.powf(1.0 - self.beta) / (self.beta - 1.0)
                + self.a1 * x.powf(-self.beta) / self.beta
                + b2 * x.powf(-self.beta - 1.0) / (self.beta + 1.0));
        let g = self.eval(x);
        let dg = -self.beta * g / x;
        acc.add(integral + g / 2.0 - dg / 12.0);
        acc.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Recurrence {
    Transient,
    Recurrent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyaEstimate {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
    pub status: Recurrence,
    /// `P(0,1)`; absent for recurrent lattices, where it diverges.
    pub green_value: Option<f64>,
    pub beta: f64,
}

pub const RECURRENT_BETA: f64 = 1.05;
pub const TRANSIENT_BETA: f64 = 1.2;

/// Pólya number `1 − 1/P(0,1)` with a fitted tail beyond the last term.
pub fn polya_estimate(table: &TermTable, tolerance: f64) -> Result<PolyaEstimate, AnalysisError> {
    if !table.is_exact() {
        return Err(AnalysisError::NotExact);
    }
    let ln_s = log_probabilities(table);
    let k_max = ln_s.len().saturating_sub(1);
    if k_max < 24 {
        return Err(AnalysisError::TooFewTerms { have: table.len(), need: 50 });
    }
    let wide = TailModel::fit(&ln_s, k_max / 2, k_max);
    let narrow = TailModel::fit(&ln_s, (2 * k_max) / 3, k_max);
    let beta = wide.beta;
    if beta <= RECURRENT_BETA {
        return Ok(PolyaEstimate {
            value: 1.0,
            tail_bound: 0.0,
            terms_used: table.len(),
            status: Recurrence::Recurrent,
            green_value: None,
            beta,
        });
    }
    let projected = |bound: f64| {
        let grow = (bound / tolerance).powf(1.0 / (beta + 1.0)).max(1.5);
        ((table.len() as f64) * grow).ceil() as usize
    };
    if beta < TRANSIENT_BETA {
        return Err(AnalysisError::NeedMoreTerms { have: table.len(), projected: projected(1.0), beta, bound: f64::NAN });
    }
    let mut partial = KahanSum::default();
    for &l in &ln_s {
        partial.add(l.exp());
    }
    let tail = wide.tail_sum(k_max);
    let green = partial.value() + tail;
    let spread = (tail - narrow.tail_sum(k_max)).abs();
    let rounding = 1e-13 * ln_s.len() as f64;
    let tail_bound = (spread + rounding) / (green * green);
    if tail_bound >= tolerance {
        return Err(AnalysisError::NeedMoreTerms { have: table.len(), projected: projected(tail_bound), beta, bound: tail_bound });
    }
    Ok(PolyaEstimate {
        value: 1.0 - 1.0 / green,
        tail_bound,
        terms_used: table.len(),
        status: Recurrence::Transient,
        green_value: Some(green),
        beta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub rho: f64,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Largest gap between the last two extrapolation levels of the three fits.
    pub residual: f64,
    /// `C` was computed with `ρ` rounded to an integer and `α` to a multiple of 1/2.
    pub snapped: bool,
    pub low_confidence: bool,
}

/// Richardson extrapolation of `x_n = L + c_1/n + c_2/n² + …`, order chosen by the
/// smallest gap between consecutive levels. Returns `(limit, gap)`.
fn richardson(xs: &[f64], n0: usize, max_order: usize) -> (f64, f64) {
    let len = xs.len();
    let mut best = (xs[len - 1], f64::INFINITY);
    let mut prev = xs[len - 1];
    for k in 1..=max_order.min(len - 1) {
        let base = len - 1 - k;
        let n = (n0 + base) as f64;
        // R_k = Σ_j (−1)^{k−j} (n+j)^k x_{n+j} / (j! (k−j)!)
        let mut acc = 0.0;
        let mut fact_j = 1.0;
        let fact_k: f64 = (1..=k).map(|i| i as f64).product();
        for j in 0..=k {
            if j > 0 {
                fact_j *= j as f64;
            }
            let binom = fact_k / (fact_j * (1..=k - j).map(|i| i as f64).product::<f64>());
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * (n + j as f64).powi(k as i32) * xs[base + j];
        }
        let r = acc / fact_k;
        let gap = (r - prev).abs();
        if gap < best.1 {
            best = (r, gap);
        }
        prev = r;
    }
    best
}

/// Fits `t(n) ~ C·ρ^n·n^α` on the table's own index.
///
/// Tables whose odd terms vanish are fitted on the even subsequence and
/// reported per step of that subsequence.
pub fn asymptotic_fit(table: &TermTable) -> Result<AsymptoticFit, AnalysisError> {
    if !table.is_exact() {
        return Err(AnalysisError::NotExact);
    }
    let seq: Vec<BigInt> = match table.norm {
        Normalization::Raw if table.spec.odd_terms_vanish() => table.terms.iter().step_by(2).cloned().collect(),
        _ => table.terms.clone(),
    };
    let len = seq.len();
    if len < 30 {
        return Err(AnalysisError::TooFewTerms { have: table.len(), need: 30 });
    }
    let n0 = len / 2;
    let ratios: Vec<f64> = (n0..len - 1).map(|n| ratio_f64(&seq[n + 1], &seq[n])).collect();
    let (rho, g_rho) = richardson(&ratios, n0, 8);
    // α_n = n·ln(x_n/ρ) → α
    let alphas: Vec<f64> = ratios.iter().enumerate().map(|(i, x)| (n0 + i) as f64 * (x / rho).ln()).collect();
    let (alpha, g_alpha) = richardson(&alphas, n0, 6);
    let rho_s = rho.round();
    let alpha_s = (alpha * 2.0).round() / 2.0;
    let snapped = (rho - rho_s).abs() <= 1e-7 * rho && (alpha - alpha_s).abs() <= 0.02;
    let (rr, aa) = if snapped { (rho_s, alpha_s) } else { (rho, alpha) };
    let lcs: Vec<f64> =
        (n0..len).map(|n| ln_big(&seq[n]) - n as f64 * rr.ln() - aa * (n as f64).ln()).collect();
    let cs: Vec<f64> = lcs.iter().map(|l| l.exp()).collect();
    let (c, g_c) = richardson(&cs, n0, 6);
    let residual = (g_rho / rho).max(g_alpha).max(g_c / c.abs());
    Ok(AsymptoticFit { rho, alpha, c, residual, snapped, low_confidence: len < 100 || residual > 1e-2 })
}

/// `F(h)`, the probability of a first return within `h` steps, for `h ≤ horizon`.
pub fn first_return_cdf(table: &TermTable, horizon: usize) -> Result<Vec<f64>, AnalysisError> {
    if !table.is_exact() {
        return Err(AnalysisError::NotExact);
    }
    let raw = table.to_raw();
    if raw.len() <= horizon {
        return Err(AnalysisError::TooFewTerms { have: raw.len(), need: horizon + 1 });
    }
    let lq = (table.spec.coordination_number() as f64).ln();
    let u: Vec<f64> = raw.terms[..=horizon]
        .iter()
        .enumerate()
        .map(|(n, r)| if r.is_zero() { 0.0 } else { (ln_big(r) - n as f64 * lq).exp() })
        .collect();
    // u(n) = Σ_{k=1}^{n} f(k) u(n−k)
    let mut f = vec![0.0; horizon + 1];
    for n in 1..=horizon {
        let mut s = KahanSum::default();
        for k in 1..n {
            s.add(f[k] * u[n - k]);
        }
        f[n] = u[n] - s.value();
    }
    let mut cdf = Vec::with_capacity(horizon + 1);
    let mut acc = KahanSum::default();
    for x in f {
        acc.add(x);
        cdf.push(acc.value());
    }
    Ok(cdf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::central_binomials;
    use crate::lattice::LatticeSpec;

    fn closed(m: usize, n: usize, count: usize) -> TermTable {
        let spec = LatticeSpec::new(m, n).unwrap();
        let c = central_binomials(count);
        let terms = c.iter().take(count).map(|x| x.pow(n as u32)).collect();
        TermTable::exact(spec, Normalization::Tilde, terms, "closed-form")
    }

    #[test]
    fn big_logs_and_ratios() {
        let x = BigInt::from(3).pow(2000);
        assert!((ln_big(&x) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        let y = BigInt::from(7) * &x;
        assert!((ratio_f64(&y, &x) - 7.0).abs() < 1e-15);
        assert!((ratio_f64(&x, &y) - 1.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn simple_cubic_polya_number() {
        let est = polya_estimate(&closed(3, 3, 2000), 5e-4).unwrap();
        assert_eq!(est.status, Recurrence::Transient);
        assert!((est.value - 0.28223).abs() < 5e-4, "{est:?}");
    }

    #[test]
    fn low_dimensions_recurrent() {
        for (m, n) in [(1, 1), (2, 2)] {
            let est = polya_estimate(&closed(m, n, 400), 5e-4).unwrap();
            assert_eq!(est.status, Recurrence::Recurrent);
            assert_eq!(est.value, 1.0);
        }
    }

    #[test]
    fn central_binomial_asymptotics() {
        let fit = asymptotic_fit(&closed(1, 1, 300)).unwrap();
        assert!((fit.rho - 4.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.alpha + 0.5).abs() < 1e-3, "{fit:?}");
        assert!((fit.c - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-4, "{fit:?}");
    }

    #[test]
    fn cdf_of_one_dimensional_walk() {
        // first return at step 2 with probability 1/2, within 4 steps 5/8
        let cdf = first_return_cdf(&closed(1, 1, 3), 4).unwrap();
        assert!((cdf[2] - 0.5).abs() < 1e-15);
        assert!((cdf[4] - 0.625).abs() < 1e-15);
    }
}
