//! Polynomial Lienard data, the standing sign conditions, and branch inverses of F.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::poly;
use crate::roots::{self, RootError};

/// Which branch of the critical curve `y = F(x)`.
///
/// `Minus` is the attracting branch `x > 0` (inverse `ω`), `Plus` the repelling
/// branch `x < 0` (inverse `α`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    /// Sign of `x` on this branch.
    pub fn sigma(self) -> f64 {
        match self {
            Side::Minus => 1.0,
            Side::Plus => -1.0,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Case {
    /// `m < 2n + 1`
    Below,
    /// `m = 2n + 1`
    Critical,
    /// `m > 2n + 1`
    Above,
}

impl Case {
    pub fn of(n: usize, m: usize) -> Case {
        match m.cmp(&(2 * n + 1)) {
            core::cmp::Ordering::Less => Case::Below,
            core::cmp::Ordering::Equal => Case::Critical,
            core::cmp::Ordering::Greater => Case::Above,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("degree {name} must be at least 1")]
    ZeroDegree { name: &'static str },
    #[error("coefficient vector {name} has length {got}, expected {expected}")]
    Shape { name: &'static str, expected: usize, got: usize },
    #[error("coefficient {name}[{index}] is not finite")]
    NonFinite { name: &'static str, index: usize },
    #[error("leading coefficient A must be finite and nonzero")]
    BadLeading,
    #[error("level y = {y} must be positive and finite")]
    BadLevel { y: f64 },
    #[error("branch inverse did not converge: {0}")]
    NonConvergence(RootError),
}

/// `x' = y - F(x)`, `y' = eps G(x)` with
/// `F(x) = x^(n+1) + sum b_k x^k` and `G(x) = -A x^m - sum a_k x^k`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LienardSystem {
    n: usize,
    m: usize,
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    lead: f64,
    b: Vec<f64>,
    a: Vec<f64>,
}

fn check_finite(name: &'static str, v: &[f64]) -> Result<(), ModelError> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(ModelError::NonFinite { name, index }),
        None => Ok(()),
    }
}

impl LienardSystem {
    /// `b` holds `b_0..b_n`, `a` holds `a_0..a_{m-1}`.
    pub fn new(n: usize, m: usize, lead: f64, b: Vec<f64>, a: Vec<f64>) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroDegree { name: "n" });
        }
        if m == 0 {
            return Err(ModelError::ZeroDegree { name: "m" });
        }
        if b.len() != n + 1 {
            return Err(ModelError::Shape { name: "b", expected: n + 1, got: b.len() });
        }
        if a.len() != m {
            return Err(ModelError::Shape { name: "a", expected: m, got: a.len() });
        }
        if !lead.is_finite() || lead == 0.0 {
            return Err(ModelError::BadLeading);
        }
        check_finite("b", &b)?;
        check_finite("a", &a)?;
        Ok(LienardSystem { n, m, lead, b, a })
    }

    /// Builds a system from sparse `(index, value)` lists; unspecified coefficients are 0.
    pub fn sparse(n: usize, m: usize, lead: f64, b: &[(usize, f64)], a: &[(usize, f64)]) -> Result<Self, ModelError> {
        let mut bv = alloc::vec![0.0; n + 1];
        let mut av = alloc::vec![0.0; m];
        for &(k, v) in b {
            if k > n {
                return Err(ModelError::Shape { name: "b", expected: n + 1, got: k + 1 });
            }
            bv[k] = v;
        }
        for &(k, v) in a {
            if k >= m {
                return Err(ModelError::Shape { name: "a", expected: m, got: k + 1 });
            }
            av[k] = v;
        }
        Self::new(n, m, lead, bv, av)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn lead(&self) -> f64 {
        self.lead
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn case(&self) -> Case {
        Case::of(self.n, self.m)
    }

    /// Same degrees, replaced coefficients.
    pub fn with_coefficients(&self, b: Vec<f64>, a: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(self.n, self.m, self.lead, b, a)
    }

    /// Mirror image under `x -> -x`: flips the sign of every odd `b` and every even `a`.
    pub fn mirrored(&self) -> Self {
        let b = self.b.iter().enumerate().map(|(k, &v)| if k % 2 == 1 { -v } else { v }).collect();
        let a = self.a.iter().enumerate().map(|(k, &v)| if k % 2 == 0 { -v } else { v }).collect();
        LienardSystem { b, a, ..self.clone() }
    }

    /// Coefficients of F in ascending order (length n + 2).
    pub fn f_coeffs(&self) -> Vec<f64> {
        let mut c = self.b.clone();
        c.push(1.0);
        c
    }

    /// Coefficients of G in ascending order (length m + 1).
    pub fn g_coeffs(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.a.iter().map(|v| -v).collect();
        c.push(-self.lead);
        c
    }

    pub fn f(&self, x: f64) -> f64 {
        let mut acc = 1.0;
        for &bk in self.b.iter().rev() {
            acc = acc * x + bk;
        }
        acc
    }

    pub fn df(&self, x: f64) -> f64 {
        let mut acc = (self.n + 1) as f64;
        for k in (1..=self.n).rev() {
            acc = acc * x + k as f64 * self.b[k];
        }
        acc
    }

    pub fn g(&self, x: f64) -> f64 {
        let mut acc = -self.lead;
        for &ak in self.a.iter().rev() {
            acc = acc * x - ak;
        }
        acc
    }

    /// `F'(x)/x` as a polynomial, ignoring `b_1`.
    pub fn reduced_df(&self) -> Vec<f64> {
        let c = self.f_coeffs();
        (2..c.len()).map(|k| k as f64 * c[k]).collect()
    }

    /// `-G(x)/x` as a polynomial, ignoring `a_0`.
    pub fn reduced_g(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.a.iter().skip(1).copied().collect();
        c.push(self.lead);
        c
    }

    pub fn is_symmetric(&self) -> bool {
        let p = parity_profile(self);
        p.b_odd_zero && p.a_even_zero
    }
}

impl fmt::Display for LienardSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, m={}, A={}, b={:?}, a={:?}", self.n, self.m, self.lead, self.b, self.a)
    }
}

/// One failed standing assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Violation {
    /// `b_0 != 0`
    FNotZeroAtOrigin,
    /// `b_1 != 0`
    FPrimeNotZeroAtOrigin,
    /// `F'(x)/x > 0` fails for some `x != 0`
    FPrimeSign,
    /// `F''(0) <= 0`
    FSecondDerivative,
    /// `a_0 != 0`
    GNotZeroAtOrigin,
    /// `G(x)/x < 0` fails for some `x != 0`
    GSign,
    /// `G'(0) >= 0`
    GPrimeAtOrigin,
    /// `A != 1` while `m != 2n + 1`
    LeadNotNormalized,
}

impl Violation {
    pub fn describe(self) -> &'static str {
        match self {
            Violation::FNotZeroAtOrigin => "F(0) != 0 (b_0 must vanish)",
            Violation::FPrimeNotZeroAtOrigin => "F'(0) != 0 (b_1 must vanish)",
            Violation::FPrimeSign => "F'(x)/x > 0 fails",
            Violation::FSecondDerivative => "F''(0) > 0 fails",
            Violation::GNotZeroAtOrigin => "G(0) != 0 (a_0 must vanish)",
            Violation::GSign => "G(x)/x < 0 fails",
            Violation::GPrimeAtOrigin => "G'(0) < 0 fails",
            Violation::LeadNotNormalized => "A must equal 1 unless m = 2n+1",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        if self.ok {
            return String::from("ok");
        }
        let parts: Vec<&str> = self.violations.iter().map(|v| v.describe()).collect();
        parts.join("; ")
    }
}

/// Checks the standing assumptions.
///
/// Positivity of `F'(x)/x` and `-G(x)/x` is decided with Sturm root counts:
/// a polynomial with positive value at 0 and no real roots is positive everywhere.
pub fn validate(sys: &LienardSystem) -> ValidationReport {
    let mut v = Vec::new();
    if sys.b[0] != 0.0 {
        v.push(Violation::FNotZeroAtOrigin);
    }
    if sys.n >= 1 && sys.b[1] != 0.0 {
        v.push(Violation::FPrimeNotZeroAtOrigin);
    } else {
        let p = sys.reduced_df();
        if p[0] <= 0.0 {
            v.push(Violation::FSecondDerivative);
        }
        if p[0] <= 0.0 || poly::real_root_count(&p) > 0 {
            v.push(Violation::FPrimeSign);
        }
    }
    if sys.a[0] != 0.0 {
        v.push(Violation::GNotZeroAtOrigin);
    } else {
        let q = sys.reduced_g();
        if q[0] <= 0.0 {
            v.push(Violation::GPrimeAtOrigin);
        }
        if q[0] <= 0.0 || poly::real_root_count(&q) > 0 {
            v.push(Violation::GSign);
        }
    }
    if sys.case() != Case::Critical && sys.lead != 1.0 {
        v.push(Violation::LeadNotNormalized);
    }
    ValidationReport { ok: v.is_empty(), violations: v }
}

/// A system known to satisfy every standing assumption.
///
/// Everything that integrates along the critical curve takes this type, so the
/// reduced integrand `F'^2/G = -x (F'/x)^2 / (-G/x)` is always well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidSystem {
    sys: LienardSystem,
    /// `F'(x)/x`
    p: Vec<f64>,
    /// `-G(x)/x`
    q: Vec<f64>,
    profile: ParityProfile,
}

impl ValidSystem {
    pub fn new(sys: LienardSystem) -> Result<Self, ValidationReport> {
        let report = validate(&sys);
        if !report.ok {
            return Err(report);
        }
        let p = sys.reduced_df();
        let q = sys.reduced_g();
        let profile = parity_profile(&sys);
        Ok(ValidSystem { sys, p, q, profile })
    }

    pub fn system(&self) -> &LienardSystem {
        &self.sys
    }
    pub fn profile(&self) -> &ParityProfile {
        &self.profile
    }
    pub fn n(&self) -> usize {
        self.sys.n
    }
    pub fn m(&self) -> usize {
        self.sys.m
    }
    pub fn case(&self) -> Case {
        self.sys.case()
    }
    pub fn reduced_df(&self) -> &[f64] {
        &self.p
    }
    pub fn reduced_g(&self) -> &[f64] {
        &self.q
    }

    /// Integrand of `I_side` in the variable `t = |x|`: `-t P(st)^2 / Q(st)`.
    pub fn branch_integrand(&self, side: Side, t: f64) -> f64 {
        let x = side.sigma() * t;
        let p = poly::eval(&self.p, x);
        -t * p * p / poly::eval(&self.q, x)
    }

    /// `|x|` on the given branch with `F(x) = y`.
    pub fn branch_abs(&self, y: f64, side: Side) -> Result<f64, ModelError> {
        Ok(branch_inverse(&self.sys, y, side)?.abs())
    }
}

/// Structural data that selects the classification subcase.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ParityProfile {
    /// largest `j` with `b_{2j+1} != 0`
    pub j_b: Option<usize>,
    /// largest `j` with `a_{2j} != 0`
    pub j_a: Option<usize>,
    pub b_odd_zero: bool,
    pub a_even_zero: bool,
    /// `b_{2j_b+1}`
    pub b_lead: Option<f64>,
    /// `a_{2j_a}`
    pub a_lead: Option<f64>,
    /// Defined when both indices exist and `n - 2j_b = m - 2j_a`.
    /// Uses `b(m-n+2j_b+1) - a(n+1)`, with `a` divided by `A` when `m = 2n+1`.
    pub c: Option<f64>,
}

pub fn parity_profile(sys: &LienardSystem) -> ParityProfile {
    let n = sys.n;
    let m = sys.m;
    let j_b = (0..=n).filter(|k| k % 2 == 1 && sys.b[*k] != 0.0).max().map(|k| (k - 1) / 2);
    let j_a = (0..m).filter(|k| k % 2 == 0 && sys.a[*k] != 0.0).max().map(|k| k / 2);
    let b_lead = j_b.map(|j| sys.b[2 * j + 1]);
    let a_lead = j_a.map(|j| sys.a[2 * j]);
    let c = match (j_b, j_a) {
        (Some(jb), Some(ja)) if n as i64 - 2 * jb as i64 == m as i64 - 2 * ja as i64 => {
            let bl = b_lead.unwrap_or(0.0);
            let al = a_lead.unwrap_or(0.0);
            let a_term = if sys.case() == Case::Critical { al / sys.lead } else { al };
            Some(bl * (m as f64 - n as f64 + 2.0 * jb as f64 + 1.0) - a_term * (n as f64 + 1.0))
        }
        _ => None,
    };
    ParityProfile {
        j_b,
        j_a,
        b_odd_zero: j_b.is_none(),
        a_even_zero: j_a.is_none(),
        b_lead,
        a_lead,
        c,
    }
}

/// Solves `F(x) = y` on the requested branch.
///
/// Brackets `[0, B]` (or `[-B, 0]`) with `B` doubled until `F` passes `y`, then
/// polishes with bracketed Newton. Assumes `F` is monotone on each half-line.
pub fn branch_inverse(sys: &LienardSystem, y: f64, side: Side) -> Result<f64, ModelError> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(ModelError::BadLevel { y });
    }
    let s = side.sigma();
    let h = |t: f64| sys.f(s * t) - y;
    let guess = libm::pow(y, 1.0 / (sys.n as f64 + 1.0));
    let hi = roots::grow_until(guess.max(1e-300), 2.0, 1e300, |b| Ok(h(b) >= 0.0))
        .map_err(ModelError::NonConvergence)?;
    let lo = if hi > guess { 0.5 * hi } else { 0.0 };
    let lo = if h(lo) <= 0.0 { lo } else { 0.0 };
    let t = roots::newton_bracketed(|t| Ok((h(t), s * sys.df(s * t))), lo, hi, guess, 1e-15)
        .map_err(ModelError::NonConvergence)?;
    Ok(s * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn t11a() -> LienardSystem {
        LienardSystem::new(3, 1, 1.0, vec![0.0, 0.0, 1.0, -0.5], vec![0.0]).unwrap()
    }

    #[test]
    fn minimal_system_is_valid() {
        let s = LienardSystem::new(1, 1, 1.0, vec![0.0, 0.0], vec![0.0]).unwrap();
        assert!(validate(&s).ok);
    }

    #[test]
    fn negative_quadratic_term_fails_positivity() {
        let s = LienardSystem::new(3, 1, 1.0, vec![0.0, 0.0, -1.0, 0.0], vec![0.0]).unwrap();
        let r = validate(&s);
        assert!(r.violations.contains(&Violation::FPrimeSign));
        assert!(r.violations.contains(&Violation::FSecondDerivative));
    }

    #[test]
    fn linear_term_in_f_rejected() {
        let s = LienardSystem::new(1, 1, 1.0, vec![0.0, 0.3], vec![0.0]).unwrap();
        assert_eq!(validate(&s).violations, vec![Violation::FPrimeNotZeroAtOrigin]);
    }

    #[test]
    fn degenerate_contact_rejected() {
        // F = x^4: F'/x = 4x^2 vanishes at 0
        let s = LienardSystem::new(3, 1, 1.0, vec![0.0; 4], vec![0.0]).unwrap();
        assert!(validate(&s).violations.contains(&Violation::FSecondDerivative));
    }

    #[test]
    fn even_n_and_even_m_rejected() {
        let s = LienardSystem::new(2, 1, 1.0, vec![0.0, 0.0, 1.0], vec![0.0]).unwrap();
        assert!(validate(&s).violations.contains(&Violation::FPrimeSign));
        let s = LienardSystem::new(1, 2, 1.0, vec![0.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert!(validate(&s).violations.contains(&Violation::GSign));
    }

    #[test]
    fn critical_case_allows_free_lead() {
        let s = LienardSystem::new(1, 3, 2.5, vec![0.0, 0.0], vec![0.0, 1.0, 0.5]).unwrap();
        assert!(validate(&s).ok);
        let s = LienardSystem::new(1, 5, 2.5, vec![0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(validate(&s).violations, vec![Violation::LeadNotNormalized]);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            LienardSystem::new(3, 1, 1.0, vec![0.0; 3], vec![0.0]),
            Err(ModelError::Shape { name: "b", .. })
        ));
        assert!(matches!(
            LienardSystem::new(1, 1, 1.0, vec![0.0, f64::NAN], vec![0.0]),
            Err(ModelError::NonFinite { .. })
        ));
    }

    #[test]
    fn profile_examples() {
        let p = parity_profile(&t11a());
        assert_eq!(p.j_b, Some(1));
        assert!(p.a_even_zero);
        let s = LienardSystem::new(1, 5, 1.0, vec![0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0, 0.2]).unwrap();
        let p = parity_profile(&s);
        assert_eq!(p.j_a, Some(2));
        assert!(p.b_odd_zero);
        let s = LienardSystem::new(1, 1, 1.0, vec![0.0, 0.0], vec![0.0]).unwrap();
        let p = parity_profile(&s);
        assert!(p.b_odd_zero && p.a_even_zero && p.c.is_none());
    }

    #[test]
    fn equal_exponents_define_c() {
        // n=3, m=5: n-2j_b = 1 with j_b = 1, m-2j_a = 1 with j_a = 2
        let s = LienardSystem::sparse(3, 5, 1.0, &[(2, 1.0), (3, 0.2)], &[(1, 1.0), (4, 0.3)]).unwrap();
        let p = parity_profile(&s);
        let c = 0.2 * (5.0 - 3.0 + 3.0) - 0.3 * 4.0;
        assert!((p.c.unwrap() - c).abs() < 1e-15);
    }

    #[test]
    fn square_root_branches() {
        let s = LienardSystem::new(1, 1, 1.0, vec![0.0, 0.0], vec![0.0]).unwrap();
        assert!((branch_inverse(&s, 4.0, Side::Minus).unwrap() - 2.0).abs() < 1e-14);
        assert!((branch_inverse(&s, 4.0, Side::Plus).unwrap() + 2.0).abs() < 1e-14);
        assert!(branch_inverse(&s, 0.0, Side::Plus).is_err());
    }

    #[test]
    fn quartic_branch_matches_bisection() {
        let s = t11a();
        let x = branch_inverse(&s, 10.0, Side::Minus).unwrap();
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if s.f(mid) < 10.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((x - 0.5 * (lo + hi)).abs() < 1e-12);
        assert!((s.f(x) - 10.0).abs() <= 1e-12 * 10.0);
    }

    #[test]
    fn mirror_swaps_branches() {
        let s = t11a();
        let m = s.mirrored();
        let w = branch_inverse(&s, 3.0, Side::Minus).unwrap();
        let a = branch_inverse(&m, 3.0, Side::Plus).unwrap();
        assert!((w + a).abs() < 1e-13);
    }
}
