//! Slow divergence integrals along the two branches of the critical curve.
//!
//! With `t = |x|` and `s = ±1` the branch sign,
//! `I_side(y) = ∫_0^{|x(y)|} -t P(st)^2 / Q(st) dt`, where `P = F'/x` and `Q = -G/x`.
//! Writing the integrand through `P` and `Q` removes the 0/0 at the contact point.

use alloc::vec::Vec;

use crate::model::{Case, ModelError, Side, ValidSystem};
use crate::poly;
use crate::quad::{self, QuadError, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IntegralValue {
    pub value: f64,
    pub abs_error: f64,
}

impl IntegralValue {
    fn from_parts(parts: &[quad::Integral], sign: &[f64]) -> Self {
        let value = parts.iter().zip(sign).map(|(p, s)| s * p.value).sum();
        let abs_error = parts.iter().map(|p| p.abs_error).sum();
        IntegralValue { value, abs_error }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
    #[error("extrapolation of I at infinity unstable: last extrapolants differ by {spread:e} (allowed {allowed:e})")]
    ExtrapolationUnstable { estimate: f64, spread: f64, allowed: f64 },
    #[error("limit at infinity requested for a branch integral that diverges (m <= 2n+1)")]
    Divergent,
    #[error("leading asymmetric term cancels (C = 0); the limit is not determined by the parity profile")]
    UndeterminedLeadingTerm,
}

pub fn i_branch(vs: &ValidSystem, y: f64, side: Side, tol: Tolerance) -> Result<IntegralValue, IntegralError> {
    let x = vs.branch_abs(y, side)?;
    let r = quad::integrate(|t| vs.branch_integrand(side, t), 0.0, x, tol)?;
    Ok(IntegralValue { value: r.value, abs_error: r.abs_error })
}

/// Odd polynomial `N` with `g_-(t) - g_+(t) = -t N(t) / (Q(t) Q(-t))`.
pub(crate) fn asymmetry_numerator(vs: &ValidSystem) -> Vec<f64> {
    let p = vs.reduced_df();
    let q = vs.reduced_g();
    let pm = poly::reflect(p, -1.0);
    let qm = poly::reflect(q, -1.0);
    let lhs = poly::mul(&poly::mul(p, p), &qm);
    let rhs = poly::mul(&poly::mul(&pm, &pm), q);
    let mut nn = poly::sub(&lhs, &rhs);
    for (k, c) in nn.iter_mut().enumerate() {
        if k % 2 == 0 {
            *c = 0.0;
        }
    }
    nn
}

/// `I(y) = I_-(y) - I_+(y)`.
///
/// The common part `[0, min(|ω|, |α|)]` is integrated through the difference of
/// the two integrands, which keeps the large symmetric parts from cancelling
/// numerically.
pub fn i_total(vs: &ValidSystem, y: f64, tol: Tolerance) -> Result<IntegralValue, IntegralError> {
    let xm = vs.branch_abs(y, Side::Minus)?;
    let xp = vs.branch_abs(y, Side::Plus)?;
    let nn = asymmetry_numerator(vs);
    let q = vs.reduced_g();
    let common = xm.min(xp);
    let diff = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let qp = poly::eval(q, t);
        let qn = poly::eval(q, -t);
        -t * poly::eval(&nn, t) / (qp * qn)
    };
    let core_part = quad::integrate(diff, 0.0, common, tol)?;
    let (rest, sign) = if xm >= xp {
        (quad::integrate(|t| vs.branch_integrand(Side::Minus, t), xp, xm, tol)?, 1.0)
    } else {
        (quad::integrate(|t| vs.branch_integrand(Side::Plus, t), xm, xp, tol)?, -1.0)
    };
    Ok(IntegralValue::from_parts(&[core_part, rest], &[1.0, sign]))
}

/// `I_side(+∞)` for `m > 2n+1`; the tail `[1, ∞)` is mapped to `(0, 1]` by `t = 1/u`.
pub fn i_branch_at_infinity(vs: &ValidSystem, side: Side, tol: Tolerance) -> Result<IntegralValue, IntegralError> {
    if vs.case() != Case::Above {
        return Err(IntegralError::Divergent);
    }
    let (n, m) = (vs.n(), vs.m());
    let s = side.sigma();
    // u^(n-1) P(s/u) and u^(m-1) Q(s/u)
    let pt = poly::reverse(&poly::reflect(vs.reduced_df(), s));
    let qt = poly::reverse(&poly::reflect(vs.reduced_g(), s));
    let k = (m - 2 * n - 2) as i32;
    let head = quad::integrate(|t| vs.branch_integrand(side, t), 0.0, 1.0, tol)?;
    let tail = quad::integrate(
        |u| {
            let p = poly::eval(&pt, u);
            -libm::pow(u, k as f64) * p * p / poly::eval(&qt, u)
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(IntegralValue::from_parts(&[head, tail], &[1.0, 1.0]))
}

/// Limit of an integral as `y → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Limit {
    MinusInfinity,
    PlusInfinity,
    Finite { value: f64, uncertainty: f64 },
}

impl Limit {
    pub fn finite(self) -> Option<f64> {
        match self {
            Limit::Finite { value, .. } => Some(value),
            _ => None,
        }
    }
    pub fn is_divergent(self) -> bool {
        !matches!(self, Limit::Finite { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum LimitMethod {
    /// `I ≡ 0` by the `x -> -x` symmetry
    Symmetric,
    /// sign of the leading term of the asymptotic expansion
    LeadingTerm,
    /// Richardson extrapolation on a geometric ladder
    Richardson,
    /// improper integrals `I_±(+∞)`
    Improper,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InfinityBehavior {
    pub minus: Limit,
    pub plus: Limit,
    pub total: Limit,
    pub method: LimitMethod,
    /// Magnitude used to judge `I_* = 0`.
    pub scale: f64,
    /// `(y, I(y))` rungs used by the extrapolation, empty otherwise.
    pub ladder: Vec<(f64, f64)>,
}

impl InfinityBehavior {
    /// `|I_*| <= rel * scale`.
    pub fn is_balanced(&self, rel: f64) -> bool {
        match self.total {
            Limit::Finite { value, .. } => value.abs() <= rel * self.scale,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitOptions {
    pub quad: Tolerance,
    /// first rung of the extrapolation ladder
    pub y0: f64,
    pub rungs: usize,
    /// target accuracy of `I_*`, relative to the scale
    pub target: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            quad: Tolerance { abs: 1e-12, rel: 1e-13 },
            y0: 1e3,
            rungs: 8,
            target: 1e-8,
        }
    }
}

/// Leading term `K r^e` of `I(y)` in `r = y^(-1/(n+1))` for `m <= 2n+1`.
/// `None` for symmetric systems.
pub fn leading_term(vs: &ValidSystem) -> Result<Option<(i64, f64)>, IntegralError> {
    let p = vs.profile();
    let (n, m) = (vs.n() as i64, vs.m() as i64);
    let lead = vs.system().lead();
    let bterm = p.j_b.map(|j| {
        let j = j as i64;
        let e = m - n - 2 * j - 1;
        let k = 2.0 * (n + 1) as f64 * p.b_lead.unwrap_or(0.0) * (m - n + 2 * j + 1) as f64 / e as f64;
        (e, k)
    });
    let aterm = p.j_a.map(|j| {
        let j = j as i64;
        let e = 2 * m - 2 * n - 2 * j - 1;
        let k = -2.0 * ((n + 1) * (n + 1)) as f64 * p.a_lead.unwrap_or(0.0) / (lead * e as f64);
        (e, k)
    });
    Ok(match (bterm, aterm) {
        (None, None) => None,
        (Some(t), None) | (None, Some(t)) => Some(t),
        (Some((eb, kb)), Some((ea, ka))) => {
            if eb < ea {
                Some((eb, kb))
            } else if ea < eb {
                Some((ea, ka))
            } else {
                let k = kb + ka;
                if p.c == Some(0.0) {
                    return Err(IntegralError::UndeterminedLeadingTerm);
                }
                Some((eb, k))
            }
        }
    })
}

/// Richardson extrapolation of `I(y)` along `r_k = r_0 2^{-k}`,
/// eliminating the odd powers `r, r^3, r^5, ...` of the expansion.
pub fn extrapolate_total(vs: &ValidSystem, opts: &LimitOptions) -> Result<InfinityBehavior, IntegralError> {
    let n1 = vs.n() as f64 + 1.0;
    let r0 = libm::pow(opts.y0, -1.0 / n1);
    let k = opts.rungs.max(2);
    let mut ladder = Vec::with_capacity(k);
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let r = r0 * libm::ldexp(1.0, -(i as i32));
        let y = libm::pow(r, -n1);
        let v = i_total(vs, y, opts.quad)?.value;
        ladder.push((y, v));
        let mut row = alloc::vec![v];
        for j in 1..=i {
            let p = (2 * j - 1) as i32;
            let f = libm::ldexp(1.0, p) - 1.0;
            let prev: f64 = row[j - 1];
            let above: f64 = table[i - 1][j - 1];
            row.push(prev + (prev - above) / f);
        }
        table.push(row);
    }
    let scale = ladder[0].1.abs().max(1.0);
    let est = table[k - 1][k - 1];
    let spread = (est - table[k - 2][k - 2]).abs();
    let allowed = 10.0 * opts.target * scale;
    if !(spread <= allowed) {
        return Err(IntegralError::ExtrapolationUnstable { estimate: est, spread, allowed });
    }
    Ok(InfinityBehavior {
        minus: Limit::MinusInfinity,
        plus: Limit::MinusInfinity,
        total: Limit::Finite { value: est, uncertainty: spread },
        method: LimitMethod::Richardson,
        scale,
        ladder,
    })
}

pub fn infinity_behavior(vs: &ValidSystem, opts: &LimitOptions) -> Result<InfinityBehavior, IntegralError> {
    if vs.case() == Case::Above {
        let minus = i_branch_at_infinity(vs, Side::Minus, opts.quad)?;
        let plus = i_branch_at_infinity(vs, Side::Plus, opts.quad)?;
        let total = minus.value - plus.value;
        let uncertainty = minus.abs_error + plus.abs_error;
        let sym = vs.system().is_symmetric();
        return Ok(InfinityBehavior {
            minus: Limit::Finite { value: minus.value, uncertainty: minus.abs_error },
            plus: Limit::Finite { value: plus.value, uncertainty: plus.abs_error },
            total: Limit::Finite { value: if sym { 0.0 } else { total }, uncertainty },
            method: if sym { LimitMethod::Symmetric } else { LimitMethod::Improper },
            scale: minus.value.abs().max(1.0),
            ladder: Vec::new(),
        });
    }
    match leading_term(vs)? {
        None => Ok(InfinityBehavior {
            minus: Limit::MinusInfinity,
            plus: Limit::MinusInfinity,
            total: Limit::Finite { value: 0.0, uncertainty: 0.0 },
            method: LimitMethod::Symmetric,
            scale: 1.0,
            ladder: Vec::new(),
        }),
        Some((e, k)) if e < 0 => Ok(InfinityBehavior {
            minus: Limit::MinusInfinity,
            plus: Limit::MinusInfinity,
            total: if k > 0.0 { Limit::PlusInfinity } else { Limit::MinusInfinity },
            method: LimitMethod::LeadingTerm,
            scale: 1.0,
            ladder: Vec::new(),
        }),
        Some(_) => extrapolate_total(vs, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LienardSystem;
    use alloc::vec;

    fn valid(sys: LienardSystem) -> ValidSystem {
        ValidSystem::new(sys).unwrap()
    }

    fn t11a() -> ValidSystem {
        valid(LienardSystem::new(3, 1, 1.0, vec![0.0, 0.0, 1.0, -0.5], vec![0.0]).unwrap())
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn quadratic_closed_form() {
        let vs = valid(LienardSystem::new(1, 1, 1.0, vec![0.0, 0.0], vec![0.0]).unwrap());
        let v = i_branch(&vs, 1.0, Side::Minus, Tolerance::default()).unwrap();
        assert!((v.value + 2.0).abs() < 1e-12);
        let v = i_branch(&vs, 7.0, Side::Plus, Tolerance::default()).unwrap();
        assert!((v.value + 14.0).abs() < 1e-11);
        assert_eq!(i_total(&vs, 7.0, Tolerance::default()).unwrap().value, 0.0);
    }

    #[test]
    fn quartic_plus_branch_matches_simpson() {
        let vs = t11a();
        let s = vs.system().clone();
        let alpha = crate::model::branch_inverse(&s, 10.0, Side::Plus).unwrap();
        // -∫_α^0 F'^2/G dx, direct form with the singular point excluded by the limit 0
        let h = |x: f64| if x == 0.0 { 0.0 } else { s.df(x) * s.df(x) / s.g(x) };
        let oracle = -simpson(h, alpha, 0.0, 1_000_000);
        let v = i_branch(&vs, 10.0, Side::Plus, Tolerance::default()).unwrap();
        assert!((v.value - oracle).abs() < 1e-8, "{} vs {}", v.value, oracle);
        let w = i_branch(&vs, 10.0, Side::Minus, Tolerance::default()).unwrap();
        let tot = i_total(&vs, 10.0, Tolerance::default()).unwrap();
        assert!((tot.value - (w.value - v.value)).abs() < 1e-9);
    }

    #[test]
    fn tiny_level_gives_tiny_integral() {
        let vs = t11a();
        let v = i_branch(&vs, 1e-12, Side::Minus, Tolerance::default()).unwrap();
        assert!(v.value < 0.0 && v.value > -1e-10);
    }

    #[test]
    fn divergent_sign_from_leading_term() {
        let ib = infinity_behavior(&t11a(), &LimitOptions::default()).unwrap();
        assert_eq!(ib.total, Limit::PlusInfinity);
        assert_eq!(ib.method, LimitMethod::LeadingTerm);
        let vs = t11a();
        let a = i_total(&vs, 1e3, Tolerance::default()).unwrap().value;
        let b = i_total(&vs, 1e4, Tolerance::default()).unwrap().value;
        let c = i_total(&vs, 1e5, Tolerance::default()).unwrap().value;
        assert!(a < b && b < c && c > 0.0);
    }

    #[test]
    fn symmetric_above_limits_agree() {
        let vs = valid(LienardSystem::sparse(1, 5, 1.0, &[], &[(1, 1.0)]).unwrap());
        let ib = infinity_behavior(&vs, &LimitOptions::default()).unwrap();
        let (m, p) = (ib.minus.finite().unwrap(), ib.plus.finite().unwrap());
        assert!((m - p).abs() < 1e-12 && m < 0.0);
        assert_eq!(ib.total.finite(), Some(0.0));
        // G = -x^5 - x, F = x^2: I_-(inf) = -∫ 4t/(t^4+1) dt = -π
        let exact = -core::f64::consts::PI;
        assert!((m - exact).abs() < 1e-10);
    }

    #[test]
    fn reciprocal_symmetry_balances_exactly() {
        // a = (0, 1, -0.2, a3, 0.2): t -> 1/t maps Q(t) to Q(-t)/t^4, so I_* = 0 for any a3
        for a3 in [0.0, 0.7, 3.0] {
            let vs = valid(LienardSystem::sparse(1, 5, 1.0, &[], &[(1, 1.0), (2, -0.2), (3, a3), (4, 0.2)]).unwrap());
            let ib = infinity_behavior(&vs, &LimitOptions::default()).unwrap();
            assert!(ib.total.finite().unwrap().abs() < 1e-12, "{:?}", ib.total);
        }
    }

    #[test]
    fn branch_limits_approach_monotonically() {
        let vs = valid(LienardSystem::sparse(1, 5, 1.0, &[], &[(1, 1.0), (2, 0.3), (4, 0.2)]).unwrap());
        let lim = i_branch_at_infinity(&vs, Side::Minus, Tolerance::default()).unwrap().value;
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            let y = libm::ldexp(1.0, k);
            let d = (i_branch(&vs, y, Side::Minus, Tolerance::default()).unwrap().value - lim).abs();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn richardson_recovers_limit_of_convergent_case() {
        // n=3, m=5, b odd zero, a_2 != 0: the a-exponent 2m-2n-2j_a-1 = 1 > 0
        let vs = valid(LienardSystem::sparse(3, 5, 1.0, &[(2, 1.0)], &[(1, 1.0), (2, 0.3)]).unwrap());
        let ib = infinity_behavior(&vs, &LimitOptions::default()).unwrap();
        assert_eq!(ib.method, LimitMethod::Richardson);
        let est = ib.total.finite().unwrap();
        // b odd zero: |ω| = |α|, so I(y) = ∫_0^X (g_- - g_+) converges as X -> ∞
        let nn = asymmetry_numerator(&vs);
        let q = vs.reduced_g().to_vec();
        let f = |t: f64| -t * poly::eval(&nn, t) / (poly::eval(&q, t) * poly::eval(&q, -t));
        let head = quad::integrate(f, 0.0, 1.0, Tolerance { abs: 1e-13, rel: 1e-13 }).unwrap().value;
        let tail = quad::integrate(
            |u: f64| if u == 0.0 { 0.0 } else { f(1.0 / u) / (u * u) },
            0.0,
            1.0,
            Tolerance { abs: 1e-13, rel: 1e-13 },
        )
        .unwrap()
        .value;
        assert!((est - (head + tail)).abs() < 1e-8, "{} vs {}", est, head + tail);
    }
}
