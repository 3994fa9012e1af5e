//! The Abelian avalanche-size distribution and its quasi-binomial I companion.
//!
//! `P(Z = b) = C * binom(N-1, b-1) * p^(b-1) * (1 - b p)^(N-b-1) * b^(b-2)` on
//! `{1, ..., N}` with `C = (1 - N p) / (1 - (N-1) p)` and `0 < p < 1/N`.
//! The API is parameterized by `alpha = N p` in `(0, 1)`.

use libm::lgamma as ln_gamma;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{ols_slope, CompensatedSum};

/// Above this system size the PMF is evaluated in log space.
pub const DIRECT_PMF_MAX_N: u64 = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelianParams {
    size: u64,
    p: f64,
    alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbelianMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub mean_limit: f64,
    pub variance_limit: f64,
}

impl AbelianParams {
    /// `alpha` in (0, 1); `p = alpha / size`.
    pub fn from_alpha(size: u64, alpha: f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("Abelian system size must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!("Abelian alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self {
            size,
            p: alpha / size as f64,
            alpha,
        })
    }

    /// Raw `p` in (0, 1/size); `alpha = size * p`.
    pub fn from_p(size: u64, p: f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("Abelian system size must be at least 1"));
        }
        let alpha = size as f64 * p;
        if !(p > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!("Abelian p must lie in (0, 1/{size}), got {p}")));
        }
        Ok(Self { size, p, alpha })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Normalization constant `C = (1 - N p) / (1 - (N-1) p)`, in (0, 1].
    pub fn normalizer(&self) -> f64 {
        (1.0 - self.alpha) / (1.0 - self.alpha + self.p)
    }

    fn check_support(&self, b: u64) -> Result<()> {
        if b == 0 || b > self.size {
            Err(Error::domain(format!("b = {b} is outside {{1..{}}}", self.size)))
        } else {
            Ok(())
        }
    }

    /// Probability of an avalanche of size `b`.
    pub fn pmf(&self, b: u64) -> Result<f64> {
        self.check_support(b)?;
        Ok(if self.size <= DIRECT_PMF_MAX_N {
            self.pmf_direct_unchecked(b)
        } else {
            self.ln_pmf_unchecked(b).exp()
        })
    }

    /// Natural log of the PMF, computed through log-gamma.
    pub fn ln_pmf(&self, b: u64) -> Result<f64> {
        self.check_support(b)?;
        Ok(self.ln_pmf_unchecked(b))
    }

    /// Straight product evaluation; overflows for large `N`.
    pub fn pmf_direct(&self, b: u64) -> Result<f64> {
        self.check_support(b)?;
        Ok(self.pmf_direct_unchecked(b))
    }

    fn pmf_direct_unchecked(&self, b: u64) -> f64 {
        let n = self.size;
        let p = self.p;
        let bf = b as f64;
        self.normalizer()
            * binomial_f64(n - 1, b - 1)
            * p.powi((b - 1) as i32)
            * (1.0 - bf * p).powi(n as i32 - b as i32 - 1)
            * bf.powi(b as i32 - 2)
    }

    fn ln_pmf_unchecked(&self, b: u64) -> f64 {
        let n = self.size as f64;
        let bf = b as f64;
        let p = self.p;
        self.normalizer().ln()
            + ln_binomial(self.size - 1, b - 1)
            + (bf - 1.0) * p.ln()
            + (n - bf - 1.0) * (-bf * p).ln_1p()
            + (bf - 2.0) * bf.ln()
    }

    /// PMF over the whole support, index `b - 1`.
    pub fn pmf_table(&self) -> Vec<f64> {
        (1..=self.size)
            .map(|b| {
                if self.size <= DIRECT_PMF_MAX_N {
                    self.pmf_direct_unchecked(b)
                } else {
                    self.ln_pmf_unchecked(b).exp()
                }
            })
            .collect()
    }

    /// `E Z = N / (N - (N-1) alpha)`.
    pub fn mean(&self) -> f64 {
        let n = self.size as f64;
        n / (n - (n - 1.0) * self.alpha)
    }

    /// `E Z^2 = (C/p) [1/(1-alpha) - 1 - sum_{i=1}^{N-1} (N-1)_i p^i]`.
    ///
    /// With `q_i = prod_{j<=i}(1 - j/N)` we have `(N-1)_i p^i = alpha^i q_i`,
    /// and the bracket equals `sum_{i<N} alpha^i (1 - q_i) + alpha^N/(1-alpha)`.
    /// `1 - q_i` is accumulated as `d_i = d_{i-1} + q_{i-1} i/N`, so every
    /// summand is nonnegative and there is no cancellation.
    pub fn second_moment(&self) -> f64 {
        if self.size == 1 {
            return 1.0;
        }
        let n = self.size as f64;
        let alpha = self.alpha;
        let mut bracket = CompensatedSum::new();
        let mut q = 1.0;
        let mut d = 0.0;
        let mut power = 1.0;
        for i in 1..self.size {
            let step = i as f64 / n;
            d += q * step;
            q *= 1.0 - step;
            power *= alpha;
            if power == 0.0 {
                break;
            }
            bracket.add(power * d);
        }
        bracket.add(alpha.powf(n) / (1.0 - alpha));
        self.normalizer() / self.p * bracket.value()
    }

    pub fn variance(&self) -> f64 {
        if self.size == 1 {
            return 0.0;
        }
        let m = self.mean();
        (self.second_moment() - m * m).max(0.0)
    }

    pub fn moments(&self) -> AbelianMoments {
        let (mean_limit, variance_limit) = abelian_limits(self.alpha).expect("alpha validated at construction");
        AbelianMoments {
            mean: self.mean(),
            second_moment: self.second_moment(),
            variance: self.variance(),
            mean_limit,
            variance_limit,
        }
    }

    /// Log-log slope of the PMF over `k_lo..=k_hi`.
    pub fn power_law_diagnostic(&self, k_lo: u64, k_hi: u64) -> Result<PowerLawDiagnostic> {
        if k_lo == 0 || k_hi > self.size || k_lo > k_hi {
            return Err(Error::domain(format!(
                "k range [{k_lo}, {k_hi}] is not inside the support {{1..{}}}",
                self.size
            )));
        }
        if k_lo == k_hi {
            return Err(Error::domain("a single-point k range has no slope"));
        }
        let mut points = Vec::with_capacity((k_hi - k_lo + 1) as usize);
        let mut loglog = Vec::with_capacity(points.capacity());
        for k in k_lo..=k_hi {
            let lp = self.ln_pmf_unchecked(k);
            points.push((k, lp.exp()));
            loglog.push(((k as f64).ln(), lp));
        }
        let slope = ols_slope(&loglog).ok_or_else(|| Error::domain("degenerate regression"))?;
        Ok(PowerLawDiagnostic { points, slope })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawDiagnostic {
    /// `(k, pmf(k))` over the requested range.
    pub points: Vec<(u64, f64)>,
    /// Least-squares slope of `ln pmf` against `ln k`.
    pub slope: f64,
}

/// `(1/(1-alpha), alpha/(1-alpha)^3)`, the large-`N` mean and variance.
pub fn abelian_limits(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let c = 1.0 - alpha;
    Ok((1.0 / c, alpha / (c * c * c)))
}

pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub(crate) fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Quasi-binomial I law on `{0, ..., N}`:
/// `P(X = b) = binom(N, b) p^b (1 - (b+1) p)^(N-b) (b+1)^(b-1)`, `0 < p < 1/(N+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiBinomial1 {
    size: u64,
    p: f64,
}

impl QuasiBinomial1 {
    pub fn new(size: u64, p: f64) -> Result<Self> {
        if !(p > 0.0 && p * (size as f64 + 1.0) < 1.0) {
            return Err(Error::domain(format!(
                "quasi-binomial p must lie in (0, 1/{}), got {p}",
                size + 1
            )));
        }
        Ok(Self { size, p })
    }

    pub fn pmf(&self, b: u64) -> Result<f64> {
        if b > self.size {
            return Err(Error::domain(format!("b = {b} is outside {{0..{}}}", self.size)));
        }
        let n = self.size;
        let p = self.p;
        let bf = b as f64;
        Ok(if n <= DIRECT_PMF_MAX_N {
            binomial_f64(n, b)
                * p.powi(b as i32)
                * (1.0 - (bf + 1.0) * p).powi((n - b) as i32)
                * (bf + 1.0).powi(b as i32 - 1)
        } else {
            (ln_binomial(n, b)
                + bf * p.ln()
                + (n - b) as f64 * (-(bf + 1.0) * p).ln_1p()
                + (bf - 1.0) * (bf + 1.0).ln())
            .exp()
        })
    }

    /// `sum_{i=1}^{N} N!/(N-i)! p^i`, via the running product `t_i = t_{i-1} (N-i+1) p`.
    pub fn mean(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        let mut term = 1.0;
        for i in 1..=self.size {
            term *= (self.size - i + 1) as f64 * self.p;
            acc.add(term);
        }
        acc.value()
    }
}

/// Both sides of `E(X+1) = E(Z_{N+1}) / C_{N+1} - (p / C_{N+1}) E(Z_{N+1}^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanIdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / |lhs|`.
    pub residual: f64,
    pub holds: bool,
}

/// Relative tolerance for [`verify_mean_identity`].
pub const MEAN_IDENTITY_TOLERANCE: f64 = 1e-10;

pub fn verify_mean_identity(size: u64, p: f64) -> Result<MeanIdentityCheck> {
    let qb = QuasiBinomial1::new(size, p)?;
    let z = AbelianParams::from_p(size + 1, p)?;
    let c = z.normalizer();
    let lhs = 1.0 + qb.mean();
    let rhs = z.mean() / c - p / c * z.second_moment();
    let residual = (lhs - rhs).abs() / lhs.abs();
    Ok(MeanIdentityCheck {
        lhs,
        rhs,
        residual,
        holds: residual <= MEAN_IDENTITY_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_moment(params: &AbelianParams, m: i32) -> f64 {
        let mut acc = CompensatedSum::new();
        for b in 1..=params.size() {
            acc.add((b as f64).powi(m) * params.pmf(b).unwrap());
        }
        acc.value()
    }

    #[test]
    fn n2_by_hand() {
        let z = AbelianParams::from_p(2, 0.25).unwrap();
        assert!((z.pmf(1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((z.pmf(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((z.mean() - 4.0 / 3.0).abs() < 1e-15);
        assert!((z.second_moment() - 2.0).abs() < 1e-14);
        assert!((z.variance() - 2.0 / 9.0).abs() < 1e-14);
        assert!((brute_moment(&z, 1) - z.mean()).abs() < 1e-15);
        assert!((brute_moment(&z, 2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singleton_support() {
        let z = AbelianParams::from_alpha(1, 0.3).unwrap();
        assert!((z.pmf(1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(z.mean(), 1.0);
        assert_eq!(z.second_moment(), 1.0);
        assert_eq!(z.variance(), 0.0);
    }

    #[test]
    fn parameter_and_domain_errors() {
        assert!(matches!(AbelianParams::from_alpha(10, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(AbelianParams::from_alpha(10, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(AbelianParams::from_p(10, 0.1), Err(Error::Parameter(_))));
        assert!(matches!(AbelianParams::from_alpha(0, 0.5), Err(Error::Parameter(_))));
        let z = AbelianParams::from_alpha(10, 0.5).unwrap();
        assert!(matches!(z.pmf(0), Err(Error::Domain(_))));
        assert!(matches!(z.pmf(11), Err(Error::Domain(_))));
        assert!(matches!(abelian_limits(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn normalizer_in_unit_interval() {
        for n in [1, 2, 10, 1000] {
            for a in [0.01, 0.5, 0.99] {
                let c = AbelianParams::from_alpha(n, a).unwrap().normalizer();
                assert!(c > 0.0 && c <= 1.0);
            }
        }
    }

    #[test]
    fn normalization_large_n() {
        let z = AbelianParams::from_alpha(200, 0.9).unwrap();
        let total: f64 = crate::numeric::sum(&z.pmf_table());
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn log_and_direct_agree_below_cutover() {
        for n in [2u64, 7, 20, 50] {
            for a in [0.1, 0.5, 0.9] {
                let z = AbelianParams::from_alpha(n, a).unwrap();
                for b in 1..=n {
                    let d = z.pmf_direct(b).unwrap();
                    let l = z.ln_pmf(b).unwrap().exp();
                    if d > 0.0 && d.is_finite() {
                        assert!((d - l).abs() / d < 1e-10, "n={n} a={a} b={b}: {d} vs {l}");
                    }
                }
            }
        }
    }

    #[test]
    fn second_moment_matches_brute_force_n500() {
        let z = AbelianParams::from_alpha(500, 0.5).unwrap();
        let brute = brute_moment(&z, 2);
        assert!((z.second_moment() - brute).abs() / brute < 1e-9);
    }

    #[test]
    fn mean_limit_approach() {
        let z = AbelianParams::from_alpha(1_000_000, 0.5).unwrap();
        assert!((z.mean() - 2.0).abs() < 1e-5);
        assert_eq!(abelian_limits(0.5).unwrap(), (2.0, 4.0));
        let (m, v) = abelian_limits(0.9).unwrap();
        assert!((m - 10.0).abs() < 1e-12 && (v - 900.0).abs() < 1e-9);
        let (m, v) = abelian_limits(1e-12).unwrap();
        assert!((m - 1.0).abs() < 1e-11 && v < 1e-11);
    }

    #[test]
    fn variance_near_limit_at_1e5() {
        let v = AbelianParams::from_alpha(100_000, 0.5).unwrap().variance();
        assert!((v - 4.0).abs() / 4.0 < 0.05, "{v}");
    }

    #[test]
    fn quasibinomial_small_cases() {
        let q = QuasiBinomial1::new(1, 0.2).unwrap();
        assert!((q.pmf(0).unwrap() - 0.8).abs() < 1e-15);
        assert!((q.pmf(1).unwrap() - 0.2).abs() < 1e-15);
        assert!((q.mean() - 0.2).abs() < 1e-15);

        let p = 0.1;
        let q = QuasiBinomial1::new(2, p).unwrap();
        let direct: f64 = (0..=2).map(|b| b as f64 * q.pmf(b).unwrap()).sum();
        assert!((q.mean() - (2.0 * p + 2.0 * p * p)).abs() < 1e-15);
        assert!((direct - q.mean()).abs() < 1e-15);

        let q0 = QuasiBinomial1::new(0, 0.3).unwrap();
        assert_eq!(q0.pmf(0).unwrap(), 1.0);
        assert_eq!(q0.mean(), 0.0);

        assert!(QuasiBinomial1::new(3, 0.25).is_err());
        assert!(q.pmf(3).is_err());
    }

    #[test]
    fn quasibinomial_normalizes_and_mean_matches() {
        let q = QuasiBinomial1::new(50, 0.01).unwrap();
        let total: f64 = (0..=50).map(|b| q.pmf(b).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
        let direct: f64 = (0..=50).map(|b| b as f64 * q.pmf(b).unwrap()).sum();
        assert!((direct - q.mean()).abs() < 1e-12);
        // log-space branch
        let q = QuasiBinomial1::new(300, 0.5 / 301.0).unwrap();
        let total: f64 = (0..=300).map(|b| q.pmf(b).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn mean_identity() {
        let p = 0.137;
        let c = verify_mean_identity(1, p).unwrap();
        assert!((c.lhs - (1.0 + p)).abs() < 1e-15);
        assert!(c.holds);
        let c = verify_mean_identity(2, 0.1).unwrap();
        assert!(c.residual < 1e-12, "{}", c.residual);
        let c = verify_mean_identity(100, 0.5 / 100.0).unwrap();
        assert!(c.residual < 1e-9, "{}", c.residual);
    }

    #[test]
    fn power_law_slope() {
        let z = AbelianParams::from_alpha(1_000_000, 0.999).unwrap();
        let d = z.power_law_diagnostic(10, 1000).unwrap();
        assert!((d.slope + 1.5).abs() < 0.1, "{}", d.slope);
        assert_eq!(d.points.len(), 991);
        let damped = AbelianParams::from_alpha(1_000_000, 0.5)
            .unwrap()
            .power_law_diagnostic(10, 1000)
            .unwrap();
        assert!(damped.slope < -1.5);
        assert!(z.power_law_diagnostic(10, 10).is_err());
        assert!(z.power_law_diagnostic(0, 10).is_err());
        assert!(z.power_law_diagnostic(10, 2_000_000).is_err());
    }
}
