//! Non-centered Stirling numbers of the first kind and exact checks of the
//! bounds used to control the Abelian variance.
//!
//! `s(i, j; r)` are the coefficients of `(x - r)_i = sum_j s(i, j; r) x^j`,
//! where `(y)_i = y (y-1) ... (y-i+1)`. Everything here is exact.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `i` accepted by [`subset_sum_oracle`].
pub const SUBSET_ORACLE_MAX_I: u32 = 20;

/// Exact table of `s(i, j; r)` for `0 <= j <= i <= i_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct StirlingTable {
    i_max: usize,
    offset: i64,
    rows: Vec<Vec<BigInt>>,
}

impl StirlingTable {
    /// Table for `r = 1`.
    pub fn new(i_max: usize) -> Self {
        Self::with_offset(i_max, 1)
    }

    /// Table for a general offset `r`, from
    /// `(x-r)_{i+1} = (x-r)_i (x-r-i)`, i.e.
    /// `s(i+1, j) = s(i, j-1) - (r+i) s(i, j)`.
    pub fn with_offset(i_max: usize, offset: i64) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(i_max + 1);
        rows.push(vec![BigInt::one()]);
        for i in 0..i_max {
            let prev = &rows[i];
            let factor = BigInt::from(offset + i as i64);
            let mut next = vec![BigInt::zero(); i + 2];
            for (j, slot) in next.iter_mut().enumerate() {
                let mut v = BigInt::zero();
                if j >= 1 {
                    v += &prev[j - 1];
                }
                if j <= i {
                    v -= &factor * &prev[j];
                }
                *slot = v;
            }
            rows.push(next);
        }
        Self { i_max, offset, rows }
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// `s(i, j; r)`; zero when `j > i`.
    pub fn get(&self, i: usize, j: usize) -> Result<BigInt> {
        if i > self.i_max {
            return Err(Error::domain(format!("row {i} exceeds table size {}", self.i_max)));
        }
        Ok(self.rows[i].get(j).cloned().unwrap_or_default())
    }

    pub fn row(&self, i: usize) -> Option<&[BigInt]> {
        self.rows.get(i).map(Vec::as_slice)
    }

    /// `|s(i, j; r)|`.
    pub fn abs(&self, i: usize, j: usize) -> Result<BigUint> {
        Ok(self.get(i, j)?.magnitude().clone())
    }
}

/// `i! * sum over j-subsets {r_1..r_j} of {1..i} of 1/(r_1 ... r_j)`, summed
/// as exact rationals. Equals `|s(i, j; 1)|`.
pub fn subset_sum_oracle(i: u32, j: u32) -> Result<BigUint> {
    if i > SUBSET_ORACLE_MAX_I {
        return Err(Error::Capacity(format!(
            "subset enumeration is limited to i <= {SUBSET_ORACLE_MAX_I}, got {i}"
        )));
    }
    if j > i {
        return Err(Error::domain(format!("subset size {j} exceeds {i}")));
    }
    let mut total = BigRational::zero();
    for mask in 0u32..(1u32 << i) {
        if mask.count_ones() != j {
            continue;
        }
        let mut product = BigInt::one();
        for bit in 0..i {
            if mask & (1 << bit) != 0 {
                product *= BigInt::from(bit + 1);
            }
        }
        total += BigRational::new(BigInt::one(), product);
    }
    let scaled = total * BigRational::from_integer(factorial(i as u64));
    if !scaled.is_integer() {
        return Err(Error::domain("subset sum is not an integer"));
    }
    Ok(scaled.to_integer().magnitude().clone())
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Falling factorial `(x)_n = x (x-1) ... (x-n+1)`.
pub fn falling_factorial(x: &BigInt, n: u64) -> BigInt {
    (0..n).fold(BigInt::one(), |acc, k| acc * (x - BigInt::from(k)))
}

/// Evaluates `sum_j coeffs[j] x^j` by Horner's rule.
fn horner<'a>(coeffs: impl DoubleEndedIterator<Item = &'a BigInt>, x: &BigInt) -> BigInt {
    coeffs.rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// The polynomials appearing in the variance argument.
pub struct BoundPolynomials<'a> {
    table: &'a StirlingTable,
}

impl<'a> BoundPolynomials<'a> {
    pub fn new(table: &'a StirlingTable) -> Self {
        Self { table }
    }

    /// `P_i(x) = sum_{j=0}^{i} s(i+2, j; 1) x^j`.
    pub fn p(&self, i: usize, x: &BigInt) -> Result<BigInt> {
        let row = self
            .table
            .row(i + 2)
            .ok_or_else(|| Error::domain(format!("P_{i} needs table row {}", i + 2)))?;
        Ok(horner(row[..=i].iter(), x))
    }

    /// `h_i(x) = x^(i+1) ((i+2)(i+3)/2 - x)`.
    pub fn h(i: usize, x: &BigInt) -> BigInt {
        let k = BigInt::from((i as u64 + 2) * (i as u64 + 3) / 2);
        num_traits::pow(x.clone(), i + 1) * (k - x)
    }

    /// `f(x) = (x+1)(x+2)[1 + 2x + x(x-1)] + 4`.
    pub fn f(x: &BigInt) -> BigInt {
        let one = BigInt::one();
        let two = BigInt::from(2);
        (x + &one) * (x + &two) * (&one + &two * x + x * (x - &one)) + BigInt::from(4)
    }
}

/// Outcome of an exhaustive exact check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaReport {
    pub name: &'static str,
    pub cases: u64,
    pub counterexample: Option<String>,
}

impl LemmaReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(describe());
        }
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "PASS {} ({} cases)", self.name, self.cases),
            Some(c) => write!(
                f,
                "FAIL {} ({} cases): first counterexample {}",
                self.name, self.cases, c
            ),
        }
    }
}

fn require_unit_offset(table: &StirlingTable) -> Result<()> {
    if table.offset() != 1 {
        return Err(Error::domain("lemma checks are defined for r = 1 tables"));
    }
    Ok(())
}

/// `|s(i,j;1)|` against [`subset_sum_oracle`] for `1 <= j <= i <= i_max`.
pub fn check_table_against_oracle(table: &StirlingTable, i_max: u32) -> Result<LemmaReport> {
    require_unit_offset(table)?;
    if i_max as usize > table.i_max() {
        return Err(Error::domain("oracle range exceeds the table"));
    }
    let mut report = LemmaReport::new("table matches subset-sum oracle");
    for i in 1..=i_max {
        for j in 1..=i {
            let t = table.abs(i as usize, j as usize)?;
            let o = subset_sum_oracle(i, j)?;
            report.record(t == o, || format!("i={i} j={j}: table {t} vs oracle {o}"));
        }
    }
    Ok(report)
}

/// Sign pattern `(-1)^(i-j) s(i,j;1) > 0` plus the closed-form diagonals.
pub fn check_table_structure(table: &StirlingTable) -> Result<LemmaReport> {
    require_unit_offset(table)?;
    let mut report = LemmaReport::new("sign pattern and diagonals");
    for i in 0..=table.i_max() {
        for j in 0..=i {
            let v = table.get(i, j)?;
            let expected_sign = if (i - j) % 2 == 0 { Sign::Plus } else { Sign::Minus };
            report.record(v.sign() == expected_sign, || format!("s({i},{j};1) = {v}"));
        }
        report.record(table.get(i, i)?.is_one(), || format!("s({i},{i};1) != 1"));
        if i >= 1 {
            let expected = -BigInt::from(i as u64 * (i as u64 + 1) / 2);
            let v = table.get(i, i - 1)?;
            report.record(v == expected, || {
                format!("s({i},{};1) = {v}, expected {expected}", i - 1)
            });
            let row_sum: BigInt = table.row(i).unwrap().iter().sum();
            report.record(row_sum.is_zero(), || format!("row {i} sums to {row_sum}"));
        }
    }
    Ok(report)
}

/// `(x+i)_i = sum_j |s(i,j;1)| x^j` for every row of the table and every `x`.
pub fn check_rising_identity(table: &StirlingTable, x_values: &[i64]) -> Result<LemmaReport> {
    require_unit_offset(table)?;
    let mut report = LemmaReport::new("rising factorial identity");
    for i in 0..=table.i_max() {
        let abs_row: Vec<BigInt> = table.row(i).unwrap().iter().map(|v| v.abs()).collect();
        for &x in x_values {
            let xb = BigInt::from(x);
            let lhs = falling_factorial(&(&xb + BigInt::from(i as u64)), i as u64);
            let rhs = horner(abs_row.iter(), &xb);
            report.record(lhs == rhs, || format!("i={i} x={x}: {lhs} vs {rhs}"));
        }
    }
    Ok(report)
}

/// `P_i(N) = (N-1)_{i+2} + h_i(N)` for one `(N, i)` with `0 <= i <= N-3`, and,
/// when `i >= sqrt(2N)`, `h_i(N) > 0` and `2 N^(i+3) > P_i(N) > (N-1)_{i+2} >= 0`.
pub fn check_lemma_p_decomposition(table: &StirlingTable, n: u64, i: u64) -> Result<LemmaReport> {
    require_unit_offset(table)?;
    if n < 3 || i > n - 3 {
        return Err(Error::domain(format!(
            "decomposition needs 0 <= i <= N-3, got N={n} i={i}"
        )));
    }
    if i as usize + 2 > table.i_max() {
        return Err(Error::domain(format!(
            "decomposition at i={i} needs table row {}",
            i + 2
        )));
    }
    let mut report = LemmaReport::new("P_i decomposition");
    check_p_decomposition_into(table, n, i, &mut report)?;
    Ok(report)
}

fn check_p_decomposition_into(table: &StirlingTable, n: u64, i: u64, report: &mut LemmaReport) -> Result<()> {
    let polys = BoundPolynomials::new(table);
    let nb = BigInt::from(n);
    let p = polys.p(i as usize, &nb)?;
    let falling = falling_factorial(&(&nb - BigInt::one()), i + 2);
    let h = BoundPolynomials::h(i as usize, &nb);
    report.record(p == &falling + &h, || {
        format!("N={n} i={i}: P={p}, (N-1)_(i+2)+h={}", &falling + &h)
    });
    if i * i >= 2 * n {
        let upper = BigInt::from(2) * num_traits::pow(nb.clone(), i as usize + 3);
        let ok = h.is_positive() && upper > p && p > falling && !falling.is_negative();
        report.record(ok, || format!("N={n} i={i}: bound chain fails (P={p}, h={h})"));
    }
    Ok(())
}

/// Runs [`check_lemma_p_decomposition`] for every `3 <= N <= n_max`, `0 <= i <= N-3`.
pub fn check_p_decomposition_range(table: &StirlingTable, n_max: u64) -> Result<LemmaReport> {
    require_unit_offset(table)?;
    if n_max >= 3 && n_max as usize - 1 > table.i_max() {
        return Err(Error::domain(format!(
            "N up to {n_max} needs table rows up to {}",
            n_max - 1
        )));
    }
    let mut report = LemmaReport::new("P_i decomposition");
    for n in 3..=n_max {
        for i in 0..=n - 3 {
            check_p_decomposition_into(table, n, i, &mut report)?;
        }
    }
    Ok(report)
}

/// Exact rational bracket `lo < e^2 < hi` from the Taylor series with 40 terms.
fn e_squared_bounds() -> (BigRational, BigRational) {
    let mut lo = BigRational::zero();
    let mut term = BigRational::one();
    let terms = 40u64;
    for k in 0..terms {
        lo += &term;
        term = term * BigRational::from_integer(BigInt::from(2)) / BigRational::from_integer(BigInt::from(k + 1));
    }
    // Remainder after `terms` terms is below term * 1/(1 - 2/(terms+1)).
    let ratio = BigRational::new(BigInt::from(terms + 1), BigInt::from(terms - 1));
    let hi = &lo + term * ratio;
    (lo, hi)
}

/// `prod_{j=1}^{i} (1 + j/N) <= e^2` for `0 <= i < sqrt(2N)`, compared exactly
/// against a rational bracket of `e^2`.
pub fn check_product_bound(n: u64, i: u64) -> Result<bool> {
    if n == 0 {
        return Err(Error::domain("product bound needs N >= 1"));
    }
    if i * i >= 2 * n {
        return Err(Error::domain(format!(
            "product bound needs i < sqrt(2N), got N={n} i={i}"
        )));
    }
    let (lo, hi) = e_squared_bounds();
    let numerator: BigInt = (1..=i).fold(BigInt::one(), |acc, j| acc * BigInt::from(n + j));
    let denominator = num_traits::pow(BigInt::from(n), i as usize);
    let product = BigRational::new(numerator, denominator);
    if product <= lo {
        Ok(true)
    } else if product > hi {
        Ok(false)
    } else {
        Err(Error::Instability(format!(
            "product at N={n} i={i} is within 1e-30 of e^2"
        )))
    }
}

/// Product bound over the given `N` values and every admissible `i`.
pub fn check_product_bound_range(ns: impl IntoIterator<Item = u64>) -> Result<LemmaReport> {
    let mut report = LemmaReport::new("product bound");
    for n in ns {
        let mut i = 0u64;
        while i * i < 2 * n {
            let ok = check_product_bound(n, i)?;
            report.record(ok, || format!("N={n} i={i}"));
            i += 1;
        }
    }
    Ok(report)
}

/// `|s(i+2,j;1)| <= f(i) |s(i,j;1)|` and `f(i) >= 0` for `0 <= j <= i <= i_max_check`.
pub fn check_degree4_bound(table: &StirlingTable, i_max_check: usize) -> Result<LemmaReport> {
    require_unit_offset(table)?;
    if i_max_check + 2 > table.i_max() {
        return Err(Error::domain(format!(
            "degree-4 bound up to i={i_max_check} needs table row {}",
            i_max_check + 2
        )));
    }
    let mut report = LemmaReport::new("degree-4 bound");
    for i in 0..=i_max_check {
        let f = BoundPolynomials::f(&BigInt::from(i as u64));
        report.record(!f.is_negative(), || format!("f({i}) = {f} < 0"));
        for j in 0..=i {
            let big = table.abs(i + 2, j)?;
            let small = table.abs(i, j)?;
            let bound = &f * BigInt::from(small.clone());
            report.record(BigInt::from(big.clone()) <= bound, || {
                format!("i={i} j={j}: |s(i+2,j)|={big} > f(i)|s(i,j)|={bound}")
            });
        }
    }
    Ok(report)
}

/// Convenience for displays: `s(i,j;1)` as f64 where it fits.
pub fn approx(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}
