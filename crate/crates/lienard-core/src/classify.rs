//! Dimension and direction predictions from the parity profile, their
//! verification against generated orbits, and balancing at infinity.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

use crate::charts::{self, Feasibility};
use crate::fractal::{self, DimensionEstimate, FractalError, Nondegeneracy};
use crate::integrals::{self, InfinityBehavior, IntegralError, Limit, LimitOptions};
use crate::model::{Case, LienardSystem, ValidSystem, ValidationReport};
use crate::relation::{self, Orbit, OrbitDirection, OrbitOptions, RelationError, Termination, Variable};

/// Relative size below which an extrapolated `I_*` is treated as zero.
pub const ZERO_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum IStar {
    Negative,
    Positive,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum TheoremCase {
    T1_1a,
    T1_1b(IStar),
    T1_2a,
    T1_2b(IStar),
    T1_3a,
    T1_3b(IStar),
    T2_1,
    T2_2,
    T2_3,
    T2_4,
    T3_1,
    T3_2,
    T3_3,
    Symmetric,
    OpenCaseCZero,
    InfeasibleAtInfinity,
    UnbalancedAbove,
    /// the branch needs `I_*` but its extrapolation did not settle
    Unresolved(Case),
}

impl fmt::Display for TheoremCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let star = |s: &IStar| match s {
            IStar::Negative => "(I*<0)",
            IStar::Positive => "(I*>0)",
            IStar::Zero => "(I*=0)",
        };
        match self {
            TheoremCase::T1_1a => write!(f, "T1.1a"),
            TheoremCase::T1_1b(s) => write!(f, "T1.1b{}", star(s)),
            TheoremCase::T1_2a => write!(f, "T1.2a"),
            TheoremCase::T1_2b(s) => write!(f, "T1.2b{}", star(s)),
            TheoremCase::T1_3a => write!(f, "T1.3a"),
            TheoremCase::T1_3b(s) => write!(f, "T1.3b{}", star(s)),
            TheoremCase::T2_1 => write!(f, "T2.1"),
            TheoremCase::T2_2 => write!(f, "T2.2"),
            TheoremCase::T2_3 => write!(f, "T2.3"),
            TheoremCase::T2_4 => write!(f, "T2.4"),
            TheoremCase::T3_1 => write!(f, "T3.1"),
            TheoremCase::T3_2 => write!(f, "T3.2"),
            TheoremCase::T3_3 => write!(f, "T3.3"),
            TheoremCase::Symmetric => write!(f, "Symmetric"),
            TheoremCase::OpenCaseCZero => write!(f, "OpenCaseCZero"),
            TheoremCase::InfeasibleAtInfinity => write!(f, "InfeasibleAtInfinity"),
            TheoremCase::UnbalancedAbove => write!(f, "UnbalancedAbove"),
            TheoremCase::Unresolved(c) => write!(f, "Unresolved({:?})", c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum PredictedDirection {
    ForwardS,
    InverseS,
    /// `S` is the identity
    Fixed,
    Unresolved,
}

impl PredictedDirection {
    pub fn orbit_direction(self) -> Option<OrbitDirection> {
        match self {
            PredictedDirection::ForwardS => Some(OrbitDirection::ForwardS),
            PredictedDirection::InverseS => Some(OrbitDirection::InverseS),
            _ => None,
        }
    }

    /// ForwardS when `negative` holds, InverseS otherwise.
    fn forward_if(negative: bool) -> Self {
        if negative {
            PredictedDirection::ForwardS
        } else {
            PredictedDirection::InverseS
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Prediction {
    pub theorem_case: TheoremCase,
    pub predicted_dim: Option<Ratio<i64>>,
    pub direction: PredictedDirection,
    pub i_behavior: Option<InfinityBehavior>,
    /// extrapolated `I_*` when the limit is finite
    pub i_star: Option<f64>,
    /// direction the `I_* = 0` branch would select from the coefficients, reported
    /// alongside `i_star` for convergent cases
    pub coefficient_direction: Option<PredictedDirection>,
    pub nondegenerate_predicted: bool,
    pub numerically_unresolved: bool,
    pub note: String,
}

impl Prediction {
    pub fn dim_f64(&self) -> Option<f64> {
        self.predicted_dim.map(|r| *r.numer() as f64 / *r.denom() as f64)
    }

    /// `β` with `r_l - r_{l+1} ≍ r_l^β`: `1/(1-d)`, and 1 for `d = 0`.
    pub fn gap_exponent(&self) -> Option<Ratio<i64>> {
        self.predicted_dim.map(|d| (Ratio::from_integer(1) - d).recip())
    }

    fn bare(theorem_case: TheoremCase, direction: PredictedDirection, note: &str) -> Self {
        Prediction {
            theorem_case,
            predicted_dim: None,
            direction,
            i_behavior: None,
            i_star: None,
            coefficient_direction: None,
            nondegenerate_predicted: false,
            numerically_unresolved: false,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Integral(#[from] IntegralError),
}

fn ratio(num: i64, den: i64) -> Ratio<i64> {
    Ratio::new(num, den)
}

/// `(n-2j)/(n+1-2j)`
fn form_b(n: i64, jb: i64) -> Ratio<i64> {
    ratio(n - 2 * jb, n + 1 - 2 * jb)
}

/// `(m-2j)/(m+1-2j)`
fn form_a(m: i64, ja: i64) -> Ratio<i64> {
    ratio(m - 2 * ja, m + 1 - 2 * ja)
}

/// `(2n+1-m)/(2n+2-m)`
fn form_finite(n: i64, m: i64) -> Ratio<i64> {
    ratio(2 * n + 1 - m, 2 * n + 2 - m)
}

/// `k(m+1)/(k(m+1)+2(n+1))`
fn form_above(k: i64, n: i64, m: i64) -> Ratio<i64> {
    ratio(k * (m + 1), k * (m + 1) + 2 * (n + 1))
}

enum Branch {
    /// `n-2j_b < m-2j_a` or `a_e = 0`
    B,
    /// `n-2j_b > m-2j_a` or `b_o = 0`
    A,
    /// equality, carrying `C`
    Equal(f64),
}

fn branch(vs: &ValidSystem) -> Option<Branch> {
    let p = vs.profile();
    let (n, m) = (vs.n() as i64, vs.m() as i64);
    match (p.j_b, p.j_a) {
        (None, None) => None,
        (Some(_), None) => Some(Branch::B),
        (None, Some(_)) => Some(Branch::A),
        (Some(jb), Some(ja)) => {
            let (lb, la) = (n - 2 * jb as i64, m - 2 * ja as i64);
            Some(if lb < la {
                Branch::B
            } else if lb > la {
                Branch::A
            } else {
                Branch::Equal(p.c.unwrap_or(0.0))
            })
        }
    }
}

fn star(value: f64, scale: f64, zero_rel: f64) -> IStar {
    if value.abs() <= zero_rel * scale {
        IStar::Zero
    } else if value < 0.0 {
        IStar::Negative
    } else {
        IStar::Positive
    }
}

/// Walks the decision tree with a known `I`-behavior (`None` when it could not
/// be computed, which leaves branches that need `I_*` unresolved).
pub fn decide(vs: &ValidSystem, behavior: Option<&InfinityBehavior>, zero_rel: f64) -> Prediction {
    let sys = vs.system();
    let feas: Feasibility = charts::canard_at_infinity_feasible(sys);
    if !feas.feasible {
        return Prediction::bare(TheoremCase::InfeasibleAtInfinity, PredictedDirection::Unresolved, feas.reason);
    }
    let Some(br) = branch(vs) else {
        let mut p = Prediction::bare(TheoremCase::Symmetric, PredictedDirection::Fixed, "Symmetric: S is the identity");
        p.i_behavior = behavior.cloned();
        p.i_star = Some(0.0);
        return p;
    };
    let prof = *vs.profile();
    let (n, m) = (vs.n() as i64, vs.m() as i64);
    let jb = prof.j_b.map(|j| j as i64).unwrap_or(0);
    let ja = prof.j_a.map(|j| j as i64).unwrap_or(0);
    let b = prof.b_lead.unwrap_or(0.0);
    let a = prof.a_lead.unwrap_or(0.0);
    let finite = behavior.and_then(|bh| bh.total.finite().map(|v| (v, bh.scale)));
    let i_sign = finite.map(|(v, s)| star(v, s, zero_rel));

    let mut out = Prediction::bare(TheoremCase::Symmetric, PredictedDirection::Unresolved, "");
    out.i_behavior = behavior.cloned();
    out.i_star = finite.map(|(v, _)| v);
    out.nondegenerate_predicted = true;
    let set = |out: &mut Prediction, case: TheoremCase, dim: Option<Ratio<i64>>, dir: PredictedDirection| {
        out.theorem_case = case;
        out.predicted_dim = dim;
        out.direction = dir;
    };
    let open = |out: &mut Prediction| {
        out.theorem_case = TheoremCase::OpenCaseCZero;
        out.direction = PredictedDirection::Unresolved;
        out.nondegenerate_predicted = false;
        out.note = "n - 2j_b = m - 2j_a with C = 0: not covered".into();
    };
    let unresolved = |out: &mut Prediction, case: Case| {
        out.theorem_case = TheoremCase::Unresolved(case);
        out.direction = PredictedDirection::Unresolved;
        out.numerically_unresolved = true;
        out.nondegenerate_predicted = false;
        out.note = "I_* needed but not resolved numerically".into();
    };

    match vs.case() {
        Case::Below => {
            #[allow(clippy::type_complexity)]
            let (e, coef, zero_dir, dim_zero, case_a, case_b): (i64, f64, PredictedDirection, Ratio<i64>, TheoremCase, fn(IStar) -> TheoremCase) =
                match br {
                    Branch::B => (
                        m - n - 2 * jb - 1,
                        b * (m - n + 2 * jb + 1) as f64,
                        PredictedDirection::forward_if(b < 0.0),
                        form_b(n, jb),
                        TheoremCase::T1_1a,
                        TheoremCase::T1_1b,
                    ),
                    Branch::A => (
                        2 * m - 2 * n - 2 * ja - 1,
                        -a,
                        PredictedDirection::forward_if(a > 0.0),
                        form_a(m, ja),
                        TheoremCase::T1_2a,
                        TheoremCase::T1_2b,
                    ),
                    Branch::Equal(c) => {
                        if c == 0.0 {
                            open(&mut out);
                            return out;
                        }
                        (
                            m - n - 2 * jb - 1,
                            c,
                            PredictedDirection::forward_if(c < 0.0),
                            form_b(n, jb),
                            TheoremCase::T1_3a,
                            TheoremCase::T1_3b,
                        )
                    }
                };
            if e < 0 {
                // coef > 0 sends I to -∞
                set(&mut out, case_a, Some(dim_zero), PredictedDirection::forward_if(coef > 0.0));
                return out;
            }
            out.coefficient_direction = Some(zero_dir);
            match i_sign {
                None => unresolved(&mut out, Case::Below),
                Some(IStar::Zero) => set(&mut out, case_b(IStar::Zero), Some(dim_zero), zero_dir),
                Some(s) => set(&mut out, case_b(s), Some(form_finite(n, m)), PredictedDirection::forward_if(s == IStar::Negative)),
            }
        }
        Case::Critical => {
            let (case, dim, zero_dir) = match br {
                Branch::B => (TheoremCase::T2_2, form_b(n, jb), PredictedDirection::forward_if(b < 0.0)),
                Branch::A => (TheoremCase::T2_3, form_a(m, ja), PredictedDirection::forward_if(a > 0.0)),
                Branch::Equal(c) => (TheoremCase::T2_4, form_b(n, jb), if c == 0.0 { PredictedDirection::Unresolved } else { PredictedDirection::forward_if(c < 0.0) }),
            };
            out.coefficient_direction = Some(zero_dir);
            match i_sign {
                None => unresolved(&mut out, Case::Critical),
                Some(IStar::Zero) => {
                    if zero_dir == PredictedDirection::Unresolved {
                        open(&mut out);
                    } else {
                        set(&mut out, case, Some(dim), zero_dir);
                    }
                }
                Some(s) => {
                    set(&mut out, TheoremCase::T2_1, Some(Ratio::from_integer(0)), PredictedDirection::forward_if(s == IStar::Negative));
                    out.nondegenerate_predicted = false;
                }
            }
        }
        Case::Above => {
            match i_sign {
                None => {
                    unresolved(&mut out, Case::Above);
                    return out;
                }
                Some(IStar::Zero) => {}
                Some(_) => {
                    out.theorem_case = TheoremCase::UnbalancedAbove;
                    out.direction = PredictedDirection::Unresolved;
                    out.nondegenerate_predicted = false;
                    out.note = "I_-(+inf) != I_+(+inf): S is not defined near infinity".into();
                    return out;
                }
            }
            match br {
                Branch::B => set(&mut out, TheoremCase::T3_1, Some(form_above(n - 2 * jb, n, m)), PredictedDirection::forward_if(b < 0.0)),
                Branch::A => set(&mut out, TheoremCase::T3_2, Some(form_above(m - 2 * ja, n, m)), PredictedDirection::forward_if(a > 0.0)),
                Branch::Equal(c) => {
                    if c == 0.0 {
                        open(&mut out);
                    } else {
                        set(&mut out, TheoremCase::T3_3, Some(form_above(n - 2 * jb, n, m)), PredictedDirection::forward_if(c < 0.0));
                    }
                }
            }
        }
    }
    out
}

/// Full classification: `I` at infinity from the integrals module, then `decide`.
pub fn classify(vs: &ValidSystem, opts: &LimitOptions) -> Result<Prediction, ClassifyError> {
    if !charts::canard_at_infinity_feasible(vs.system()).feasible {
        return Ok(decide(vs, None, ZERO_REL));
    }
    match integrals::infinity_behavior(vs, opts) {
        Ok(b) => Ok(decide(vs, Some(&b), ZERO_REL)),
        Err(IntegralError::ExtrapolationUnstable { .. }) => Ok(decide(vs, None, ZERO_REL)),
        Err(IntegralError::UndeterminedLeadingTerm) => {
            let mut p = decide(vs, None, ZERO_REL);
            p.theorem_case = TheoremCase::OpenCaseCZero;
            p.direction = PredictedDirection::Unresolved;
            p.predicted_dim = None;
            p.numerically_unresolved = false;
            p.note = "n - 2j_b = m - 2j_a with C = 0: not covered".into();
            Ok(p)
        }
        Err(e) => Err(e.into()),
    }
}

/// Whether a Below-case prediction places its dimension relative to
/// `(2n+1-m)/(2n+2-m)` consistently with the behavior of `I`:
/// below ⇔ divergent, equal ⇔ `I_* != 0`, above ⇔ `I_* = 0`.
pub fn trichotomy_consistent(vs: &ValidSystem, p: &Prediction, zero_rel: f64) -> Option<bool> {
    if vs.case() != Case::Below {
        return None;
    }
    let d = p.predicted_dim?;
    let bh = p.i_behavior.as_ref()?;
    let pivot = form_finite(vs.n() as i64, vs.m() as i64);
    let consistent = match bh.total {
        Limit::MinusInfinity | Limit::PlusInfinity => d < pivot,
        Limit::Finite { value, .. } => match star(value, bh.scale, zero_rel) {
            IStar::Zero => d > pivot,
            _ => d == pivot,
        },
    };
    Some(consistent)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyOptions {
    pub orbit: OrbitOptions,
    /// start of the orbit in the finite plane
    pub y0: f64,
    /// floor used instead of `orbit.r_floor` when the predicted dimension is 0
    pub geometric_floor: f64,
    pub delta_decades: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            orbit: OrbitOptions::default(),
            y0: relation::Y0_DEFAULT,
            geometric_floor: 1e-250,
            delta_decades: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct VerificationReport {
    pub theorem_case: TheoremCase,
    pub predicted_dim: Option<f64>,
    pub neighborhood: DimensionEstimate,
    pub gap_law: DimensionEstimate,
    pub error_neighborhood: f64,
    pub error_gap_law: f64,
    pub predicted_gap_exponent: Option<f64>,
    pub fitted_gap_exponent: f64,
    pub nondegeneracy: Option<Nondegeneracy>,
    /// spread `(max - min)/mean` of `r_{l+1}/r_l` over the last 100 terms
    pub ratio_spread: Option<f64>,
    pub ratio_mean: Option<f64>,
    pub orbit_len: usize,
    pub termination: Termination,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("fixed point, nothing to verify")]
    FixedPoint,
    #[error("prediction {0} carries no dimension")]
    NoPrediction(TheoremCase),
    #[error("orbit generation failed: {0}")]
    Orbit(#[from] RelationError),
    #[error("dimension estimate failed: {0}")]
    Fractal(#[from] FractalError),
}

/// Start value of the compactified orbit used by `verify`.
pub fn orbit_start(vs: &ValidSystem, y0: f64, opts: &OrbitOptions) -> Result<f64, RelationError> {
    let r0 = Variable::of(vs).from_y(vs, y0);
    if vs.case() == Case::Above {
        return Ok(r0);
    }
    let rt = match opts.r_tilde {
        Some(r) => r,
        None => charts::default_r_tilde(vs.system())?,
    };
    Ok(r0.min(0.5 * rt))
}

/// Generates the predicted orbit with at most `budget` terms and compares both
/// dimension estimators with the prediction.
pub fn verify(vs: &ValidSystem, p: &Prediction, budget: usize, opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    if p.direction == PredictedDirection::Fixed {
        return Err(VerifyError::FixedPoint);
    }
    let (Some(dim), Some(dir)) = (p.dim_f64(), p.direction.orbit_direction()) else {
        return Err(VerifyError::NoPrediction(p.theorem_case));
    };
    let mut oo = opts.orbit;
    oo.max_iter = budget;
    if dim == 0.0 {
        oo.r_floor = opts.geometric_floor;
    }
    let r0 = orbit_start(vs, opts.y0, &oo)?;
    let orbit = relation::generate_orbit_compactified(vs, r0, None, dir, &oo)?;
    let report = assess(p, &orbit, opts.delta_decades)?;
    Ok(report)
}

/// Estimator comparison for an already generated orbit.
pub fn assess(p: &Prediction, orbit: &Orbit, delta_decades: Option<f64>) -> Result<VerificationReport, VerifyError> {
    let dim = p.dim_f64();
    let neighborhood = fractal::dimension_neighborhood(&orbit.r, delta_decades)?;
    let gap_law = fractal::dimension_gap_law(&orbit.r)?;
    let nondegeneracy = match dim {
        Some(d) if d > 0.0 => Some(fractal::nondegeneracy_diagnostic(&orbit.r, d, delta_decades)?),
        _ => None,
    };
    let (ratio_spread, ratio_mean) = if dim == Some(0.0) && orbit.r.len() > 101 {
        let tail: Vec<f64> = orbit.r[orbit.r.len() - 101..].windows(2).map(|w| w[1] / w[0]).collect();
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        (Some((hi - lo) / mean), Some(mean))
    } else {
        (None, None)
    };
    let pd = dim.unwrap_or(f64::NAN);
    Ok(VerificationReport {
        theorem_case: p.theorem_case,
        predicted_dim: dim,
        error_neighborhood: (neighborhood.value - pd).abs(),
        error_gap_law: (gap_law.value - pd).abs(),
        predicted_gap_exponent: p.gap_exponent().map(|r| *r.numer() as f64 / *r.denom() as f64),
        fitted_gap_exponent: gap_law.slope,
        neighborhood,
        gap_law,
        nondegeneracy,
        ratio_spread,
        ratio_mean,
        orbit_len: orbit.len(),
        termination: orbit.termination,
        max_residual: orbit.residuals.iter().fold(0.0, |a, &b| a.max(b)),
    })
}

/// Coefficient addressed by `balance_search`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Coefficient {
    A(usize),
    B(usize),
}

impl Coefficient {
    pub fn set(self, sys: &LienardSystem, value: f64) -> Option<LienardSystem> {
        let mut b = sys.b().to_vec();
        let mut a = sys.a().to_vec();
        match self {
            Coefficient::A(k) => *a.get_mut(k)? = value,
            Coefficient::B(k) => *b.get_mut(k)? = value,
        }
        sys.with_coefficients(b, a).ok()
    }

    pub fn get(self, sys: &LienardSystem) -> Option<f64> {
        match self {
            Coefficient::A(k) => sys.a().get(k).copied(),
            Coefficient::B(k) => sys.b().get(k).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BalanceResult {
    pub system: LienardSystem,
    pub value: f64,
    pub i_star: f64,
    pub scale: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BalanceError {
    #[error("balancing applies to m > 2n+1 only")]
    NotAbove,
    #[error("coefficient {0:?} does not exist for these degrees")]
    NoSuchCoefficient(Coefficient),
    #[error("I_* does not change sign on the bracket: I_*({lo}) = {f_lo:e}, I_*({hi}) = {f_hi:e}")]
    NoBalancedSystemInBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("coefficient value {value} breaks the standing assumptions: {report}")]
    AssumptionBrokenByTuning { value: f64, report: String },
    #[error("tuning changed the parity profile (j_a, j_b)")]
    ProfileChanged,
    #[error(transparent)]
    Integral(#[from] IntegralError),
}

/// Regula falsi (Illinois) on `c ↦ I_*(c)` until `|I_*| <= balance_rel * scale`.
pub fn balance_search(
    template: &LienardSystem,
    coefficient: Coefficient,
    bracket: (f64, f64),
    opts: &LimitOptions,
    balance_rel: f64,
) -> Result<BalanceResult, BalanceError> {
    if template.case() != Case::Above {
        return Err(BalanceError::NotAbove);
    }
    let current = coefficient.get(template).ok_or(BalanceError::NoSuchCoefficient(coefficient))?;
    if template.is_symmetric() {
        return Ok(BalanceResult { system: template.clone(), value: current, i_star: 0.0, scale: 1.0, evaluations: 0 });
    }
    let base = crate::model::parity_profile(template);
    let mut evaluations = 0;
    let mut eval = |c: f64| -> Result<(f64, f64, LienardSystem), BalanceError> {
        let sys = coefficient.set(template, c).ok_or(BalanceError::NoSuchCoefficient(coefficient))?;
        let vs = ValidSystem::new(sys.clone()).map_err(|r: ValidationReport| BalanceError::AssumptionBrokenByTuning { value: c, report: r.summary() })?;
        let prof = vs.profile();
        if prof.j_a != base.j_a || prof.j_b != base.j_b {
            return Err(BalanceError::ProfileChanged);
        }
        evaluations += 1;
        let bh = integrals::infinity_behavior(&vs, opts)?;
        Ok((bh.total.finite().unwrap_or(f64::NAN), bh.scale, sys))
    };
    let (mut lo, mut hi) = bracket;
    let (mut f_lo, s_lo, sys_lo) = eval(lo)?;
    if f_lo.abs() <= balance_rel * s_lo {
        return Ok(BalanceResult { system: sys_lo, value: lo, i_star: f_lo, scale: s_lo, evaluations });
    }
    let (mut f_hi, s_hi, sys_hi) = eval(hi)?;
    if f_hi.abs() <= balance_rel * s_hi {
        return Ok(BalanceResult { system: sys_hi, value: hi, i_star: f_hi, scale: s_hi, evaluations });
    }
    if (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(BalanceError::NoBalancedSystemInBracket { lo, hi, f_lo, f_hi });
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let c = if c > lo.min(hi) && c < lo.max(hi) { c } else { 0.5 * (lo + hi) };
        let (f, s, sys) = eval(c)?;
        if f.abs() <= balance_rel * s || (hi - lo).abs() <= 1e-15 * c.abs().max(1.0) {
            return Ok(BalanceResult { system: sys, value: c, i_star: f, scale: s, evaluations });
        }
        if (f > 0.0) == (f_lo > 0.0) {
            lo = c;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(BalanceError::NoBalancedSystemInBracket { lo, hi, f_lo, f_hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid(n: usize, m: usize, lead: f64, b: &[(usize, f64)], a: &[(usize, f64)]) -> ValidSystem {
        ValidSystem::new(LienardSystem::sparse(n, m, lead, b, a).unwrap()).unwrap()
    }

    fn run(vs: &ValidSystem) -> Prediction {
        classify(vs, &LimitOptions::default()).unwrap()
    }

    #[test]
    fn t11a_example() {
        let p = run(&valid(3, 1, 1.0, &[(2, 1.0), (3, -0.5)], &[]));
        assert_eq!(p.theorem_case, TheoremCase::T1_1a);
        assert_eq!(p.direction, PredictedDirection::InverseS);
        assert_eq!(p.predicted_dim, Some(ratio(1, 2)));
        assert_eq!(p.gap_exponent(), Some(ratio(2, 1)));
        assert!(p.nondegenerate_predicted);
    }

    #[test]
    fn symmetric_is_fixed() {
        let p = run(&valid(1, 3, 1.0, &[], &[(1, 1.0)]));
        assert_eq!(p.theorem_case, TheoremCase::Symmetric);
        assert_eq!(p.direction, PredictedDirection::Fixed);
        assert_eq!(p.predicted_dim, None);
        assert_eq!(p.note, "Symmetric: S is the identity");
    }

    #[test]
    fn infeasible_and_unbalanced() {
        // even m already breaks the sign of G, so infeasibility only shows on raw systems
        let raw = LienardSystem::sparse(1, 6, 1.0, &[], &[(1, 1.0), (2, 0.1)]).unwrap();
        assert!(!charts::canard_at_infinity_feasible(&raw).feasible);
        assert!(ValidSystem::new(raw).is_err());
        let p = run(&valid(1, 5, 1.0, &[], &[(1, 1.0), (2, 0.1)]));
        assert_eq!(p.theorem_case, TheoremCase::UnbalancedAbove);
    }

    #[test]
    fn above_case_with_supplied_balance() {
        // j_a = 1 cannot be balanced for n = 1 (a_2 fixes the sign of I_*); supply I_* = 0
        let vs = valid(1, 5, 1.0, &[], &[(1, 1.0), (2, 0.1)]);
        let mut bh = integrals::infinity_behavior(&vs, &LimitOptions::default()).unwrap();
        bh.total = Limit::Finite { value: 0.0, uncertainty: 0.0 };
        let p = decide(&vs, Some(&bh), ZERO_REL);
        assert_eq!(p.theorem_case, TheoremCase::T3_2);
        assert_eq!(p.predicted_dim, Some(ratio(9, 11)));
        assert_eq!(p.direction, PredictedDirection::ForwardS);
    }

    #[test]
    fn critical_dimension_zero() {
        let p = run(&valid(1, 3, 1.0, &[], &[(1, 1.0), (2, 0.5)]));
        assert_eq!(p.theorem_case, TheoremCase::T2_1);
        assert_eq!(p.predicted_dim, Some(ratio(0, 1)));
        assert_eq!(p.gap_exponent(), Some(ratio(1, 1)));
        assert!(p.i_star.unwrap() != 0.0);
    }

    #[test]
    fn direction_flips_under_mirror() {
        for vs in [
            valid(3, 1, 1.0, &[(2, 1.0), (3, -0.5)], &[]),
            valid(3, 5, 1.0, &[(2, 1.0)], &[(1, 1.0), (2, 0.3)]),
            valid(1, 3, 1.0, &[], &[(1, 1.0), (2, 0.5)]),
        ] {
            let p = run(&vs);
            let q = run(&ValidSystem::new(vs.system().mirrored()).unwrap());
            assert_eq!(p.predicted_dim, q.predicted_dim);
            let flipped = match p.direction {
                PredictedDirection::ForwardS => PredictedDirection::InverseS,
                PredictedDirection::InverseS => PredictedDirection::ForwardS,
                d => d,
            };
            assert_eq!(q.direction, flipped);
        }
    }

    #[test]
    fn open_case_is_labeled() {
        // n = m = 3, j_b = j_a = 1: C = 3 b_3 - 4 a_2
        let vs = valid(3, 3, 1.0, &[(2, 1.0), (3, 1.0)], &[(1, 1.0), (2, 0.75)]);
        assert_eq!(vs.profile().c, Some(0.0));
        assert_eq!(run(&vs).theorem_case, TheoremCase::OpenCaseCZero);
    }

    #[test]
    fn trichotomy_holds_on_below_examples() {
        for vs in [
            valid(3, 1, 1.0, &[(2, 1.0), (3, -0.5)], &[]),
            valid(3, 5, 1.0, &[(2, 1.0)], &[(1, 1.0), (2, 0.3)]),
        ] {
            let p = run(&vs);
            assert_eq!(trichotomy_consistent(&vs, &p, ZERO_REL), Some(true), "{}", p.theorem_case);
        }
    }

    #[test]
    fn balance_search_on_a2() {
        let t = LienardSystem::sparse(1, 5, 1.0, &[], &[(1, 1.0), (4, 0.2)]).unwrap();
        let r = balance_search(&t, Coefficient::A(2), (-0.5, 0.0), &LimitOptions::default(), 1e-6).unwrap();
        assert!((r.value + 0.2).abs() < 1e-5, "{}", r.value);
        assert!(r.i_star.abs() <= 1e-6 * r.scale);
        let err = balance_search(&t, Coefficient::A(3), (-0.5, 5.0), &LimitOptions::default(), 1e-6).unwrap_err();
        assert!(matches!(err, BalanceError::NoBalancedSystemInBracket { .. }));
        let err = balance_search(&t, Coefficient::A(1), (-1.0, 1.0), &LimitOptions::default(), 1e-6).unwrap_err();
        assert!(matches!(err, BalanceError::AssumptionBrokenByTuning { .. }));
    }
}
