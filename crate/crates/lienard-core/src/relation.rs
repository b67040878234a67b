//! The slow relation function `S`, defined by `I_-(y) = I_+(S(y))`, and its orbits.
//!
//! Finite-plane orbits live in `y`; long orbits are produced in the compactified
//! variable `r = y^(-1/(n+1))` (or `ĥr = y^(-2/(m+1))` for `m > 2n+1`), where the
//! recursion reads `J_to(r_{l+1}) = J_from(r_l) ∓ J̃`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::charts::{self, ChartError};
use crate::integrals::{self, IntegralError, LimitOptions};
use crate::model::{Case, ModelError, Side, ValidSystem};
use crate::quad::{self, Tolerance};
use crate::roots::{self, RootError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OrbitDirection {
    /// `y_{l+1} = S(y_l)`
    ForwardS,
    /// `y_{l+1} = S^-1(y_l)`
    InverseS,
}

impl OrbitDirection {
    /// (side evaluated at `y_l`, side solved for `y_{l+1}`)
    fn sides(self) -> (Side, Side) {
        match self {
            OrbitDirection::ForwardS => (Side::Minus, Side::Plus),
            OrbitDirection::InverseS => (Side::Plus, Side::Minus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DirectionChoice {
    Auto,
    ForwardS,
    InverseS,
}

/// Compactified variable attached to an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Variable {
    /// `r = y^(-1/(n+1))`
    R,
    /// `ĥr = y^(-2/(m+1))`
    HatR,
}

impl Variable {
    pub fn of(vs: &ValidSystem) -> Variable {
        if vs.case() == Case::Above {
            Variable::HatR
        } else {
            Variable::R
        }
    }

    fn exponent(self, vs: &ValidSystem) -> f64 {
        match self {
            Variable::R => 1.0 / (vs.n() as f64 + 1.0),
            Variable::HatR => 2.0 / (vs.m() as f64 + 1.0),
        }
    }

    pub fn from_y(self, vs: &ValidSystem, y: f64) -> f64 {
        libm::pow(y, -self.exponent(vs))
    }

    /// `+inf` when `y` overflows.
    pub fn to_y(self, vs: &ValidSystem, r: f64) -> f64 {
        libm::pow(r, -1.0 / self.exponent(vs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Termination {
    MaxIterations,
    FloorReached { r_min: f64 },
    EquationUnsolvable,
    /// `J_to(r_0) = J_from(r_0) ∓ J̃` already holds: the sequence is constant
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Orbit {
    pub direction: OrbitDirection,
    pub variable: Variable,
    /// `+inf` where `y` is not representable
    pub y: Vec<f64>,
    pub r: Vec<f64>,
    /// residual of the defining equation for the step `l -> l+1`, relative to
    /// `max(|target|, 1)` in the compactified recursions
    pub residuals: Vec<f64>,
    pub termination: Termination,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `r_l - r_{l+1}`
    pub fn gaps(&self) -> Vec<f64> {
        self.r.windows(2).map(|w| w[0] - w[1]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RelationError {
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("root solve failed: {0}")]
    Root(#[from] RootError),
    #[error("target {target:e} outside the range of the branch integral (closest residual {residual:e})")]
    TargetOutOfRange { target: f64, residual: f64 },
    #[error("orbit does not diverge: stalled after {} terms", orbit.len())]
    NotDivergent { orbit: Box<Orbit> },
    #[error("system not balanced at infinity: |I_*| = {i_star:e} exceeds {allowed:e}")]
    Unbalanced { i_star: f64, allowed: f64 },
    #[error("start value {0} outside the admissible range")]
    BadStart(f64),
}

impl From<quad::QuadError> for RelationError {
    fn from(e: quad::QuadError) -> Self {
        RelationError::Integral(IntegralError::Quadrature(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitOptions {
    /// quadrature tolerance for full integrals and for orbit increments
    pub quad: Tolerance,
    /// relative tolerance of the root solves
    pub root_rel: f64,
    pub max_iter: usize,
    pub r_floor: f64,
    /// finite-plane ceiling; `r_floor` mapped to `y` when absent
    pub y_ceiling: Option<f64>,
    /// `|I_*| <= balance_rel * max(|I_-(∞)|, 1)` counts as balanced
    pub balance_rel: f64,
    /// `r̃`; `r̃_max / 2` when absent
    pub r_tilde: Option<f64>,
    pub limit: LimitOptions,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            quad: Tolerance { abs: 0.0, rel: 1e-12 },
            root_rel: 1e-10,
            max_iter: 10_000,
            r_floor: 1e-8,
            y_ceiling: None,
            balance_rel: 1e-6,
            r_tilde: None,
            limit: LimitOptions::default(),
        }
    }
}

fn check_balance(vs: &ValidSystem, opts: &OrbitOptions) -> Result<(), RelationError> {
    if vs.case() != Case::Above {
        return Ok(());
    }
    let beh = integrals::infinity_behavior(vs, &opts.limit)?;
    if beh.is_balanced(opts.balance_rel) {
        Ok(())
    } else {
        Err(RelationError::Unbalanced {
            i_star: beh.total.finite().unwrap_or(f64::NAN).abs(),
            allowed: opts.balance_rel * beh.scale,
        })
    }
}

/// `I_side` tracked incrementally along increasing `y`.
struct Cursor<'a> {
    vs: &'a ValidSystem,
    side: Side,
    x: f64,
    value: f64,
}

impl<'a> Cursor<'a> {
    fn new(vs: &'a ValidSystem, side: Side, y: f64, tol: Tolerance) -> Result<Self, RelationError> {
        let x = vs.branch_abs(y, side)?;
        let value = quad::integrate(|t| vs.branch_integrand(side, t), 0.0, x, tol)?.value;
        Ok(Cursor { vs, side, x, value })
    }

    fn eval(&self, y: f64, tol: Tolerance) -> Result<(f64, f64), RelationError> {
        let x = self.vs.branch_abs(y, self.side)?;
        let inc = quad::integrate(|t| self.vs.branch_integrand(self.side, t), self.x, x, tol)?.value;
        Ok((self.value + inc, x))
    }

    fn advance(&mut self, y: f64, tol: Tolerance) -> Result<(), RelationError> {
        let (v, x) = self.eval(y, tol)?;
        self.value = v;
        self.x = x;
        Ok(())
    }

    /// `dI/dy = F'(x)/G(x)` on this branch.
    fn slope(&self, x_abs: f64) -> f64 {
        let x = self.side.sigma() * x_abs;
        let sys = self.vs.system();
        sys.df(x) / sys.g(x)
    }
}

/// Solves `I_to(s) = target` with `I_to` tracked by `to`; `hint` seeds the bracket.
fn solve_level(to: &Cursor, target: f64, hint: f64, opts: &OrbitOptions) -> Result<(f64, f64), RelationError> {
    let tol = opts.quad;
    let h = |s: f64| -> Result<f64, RelationError> { Ok(to.eval(s, tol)?.0 - target) };
    let h0 = h(hint)?;
    if h0 == 0.0 {
        return Ok((hint, 0.0));
    }
    // I_to is decreasing: h0 > 0 puts the root above the hint
    let (factor, limit) = if h0 > 0.0 { (2.0, hint * 1e15) } else { (0.5, hint * 1e-15) };
    let mut last = h0;
    let other = roots::grow_until(hint, factor, limit, |s| {
        let v = h(s).map_err(|_| RootError::NonFinite { x: s })?;
        last = v;
        Ok((v > 0.0) != (h0 > 0.0) || v == 0.0)
    })
    .map_err(|_| RelationError::TargetOutOfRange { target, residual: last.abs() })?;
    let (lo, hi) = if hint < other { (hint, other) } else { (other, hint) };
    let mut failure = None;
    let root = roots::newton_bracketed(
        |s| match to.eval(s, tol) {
            Ok((v, x)) => Ok((v - target, to.slope(x))),
            Err(e) => {
                failure.get_or_insert(e);
                Err(RootError::NonFinite { x: s })
            }
        },
        lo,
        hi,
        0.5 * (lo + hi),
        opts.root_rel,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let root = root?;
    Ok((root, h(root)?.abs()))
}

/// `S(y)` (ForwardS) or `S^-1(y)` (InverseS).
pub fn slow_relation(vs: &ValidSystem, y: f64, direction: OrbitDirection, opts: &OrbitOptions) -> Result<f64, RelationError> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(RelationError::BadStart(y));
    }
    check_balance(vs, opts)?;
    let (from, to) = direction.sides();
    let target = Cursor::new(vs, from, y, opts.quad)?.value;
    let to = Cursor::new(vs, to, y, opts.quad)?;
    Ok(solve_level(&to, target, y, opts)?.0)
}

/// Resolves `Auto` through the classifier, falling back to the sign of `I(y0)`.
/// `None` means no direction moves the orbit (symmetric system).
pub fn resolve_direction(
    vs: &ValidSystem,
    choice: DirectionChoice,
    y0: f64,
    opts: &OrbitOptions,
) -> Result<Option<OrbitDirection>, RelationError> {
    match choice {
        DirectionChoice::ForwardS => return Ok(Some(OrbitDirection::ForwardS)),
        DirectionChoice::InverseS => return Ok(Some(OrbitDirection::InverseS)),
        DirectionChoice::Auto => {}
    }
    if let Ok(p) = crate::classify::classify(vs, &opts.limit) {
        match p.direction {
            crate::classify::PredictedDirection::ForwardS => return Ok(Some(OrbitDirection::ForwardS)),
            crate::classify::PredictedDirection::InverseS => return Ok(Some(OrbitDirection::InverseS)),
            crate::classify::PredictedDirection::Fixed => return Ok(None),
            crate::classify::PredictedDirection::Unresolved => {}
        }
    }
    let i = integrals::i_total(vs, y0, opts.quad)?.value;
    Ok(if i < 0.0 {
        Some(OrbitDirection::ForwardS)
    } else if i > 0.0 {
        Some(OrbitDirection::InverseS)
    } else {
        None
    })
}

/// Default start: `y0 = 1e3`, doubled up to `1e9` until the first five iterates increase.
pub const Y0_DEFAULT: f64 = 1e3;
const Y0_MAX: f64 = 1e9;

/// Finite-plane orbit `y_{l+1} = S(y_l)` or `S^-1(y_l)`.
pub fn generate_orbit(
    vs: &ValidSystem,
    y0: Option<f64>,
    choice: DirectionChoice,
    opts: &OrbitOptions,
) -> Result<Orbit, RelationError> {
    check_balance(vs, opts)?;
    let variable = Variable::of(vs);
    let ceiling = opts.y_ceiling.unwrap_or_else(|| variable.to_y(vs, opts.r_floor));
    let start = y0.unwrap_or(Y0_DEFAULT);
    let direction = match resolve_direction(vs, choice, start, opts)? {
        Some(d) => d,
        None => return Err(not_divergent(vs, OrbitDirection::ForwardS, &[start], &[], Termination::FixedPoint)),
    };
    if let Some(y0) = y0 {
        return orbit_from(vs, y0, direction, ceiling, opts.max_iter, opts);
    }
    let mut y0 = start;
    loop {
        let probe = orbit_from(vs, y0, direction, ceiling, 5, opts);
        match probe {
            Ok(o) if o.len() >= 6 || !matches!(o.termination, Termination::MaxIterations) => {
                return orbit_from(vs, y0, direction, ceiling, opts.max_iter, opts);
            }
            Err(e) if y0 * 2.0 > Y0_MAX => return Err(e),
            _ if y0 * 2.0 > Y0_MAX => return orbit_from(vs, y0, direction, ceiling, opts.max_iter, opts),
            _ => y0 *= 2.0,
        }
    }
}

fn not_divergent(vs: &ValidSystem, direction: OrbitDirection, y: &[f64], residuals: &[f64], termination: Termination) -> RelationError {
    let variable = Variable::of(vs);
    RelationError::NotDivergent {
        orbit: Box::new(Orbit {
            direction,
            variable,
            y: y.to_vec(),
            r: y.iter().map(|&v| variable.from_y(vs, v)).collect(),
            residuals: residuals.to_vec(),
            termination,
        }),
    }
}

fn orbit_from(
    vs: &ValidSystem,
    y0: f64,
    direction: OrbitDirection,
    ceiling: f64,
    max_iter: usize,
    opts: &OrbitOptions,
) -> Result<Orbit, RelationError> {
    if !(y0 > 0.0) || !y0.is_finite() {
        return Err(RelationError::BadStart(y0));
    }
    let (from_side, to_side) = direction.sides();
    let mut from = Cursor::new(vs, from_side, y0, opts.quad)?;
    let mut to = Cursor::new(vs, to_side, y0, opts.quad)?;
    let mut ys = alloc::vec![y0];
    let mut residuals = Vec::new();
    let mut termination = Termination::MaxIterations;
    for _ in 0..max_iter {
        let y = *ys.last().unwrap();
        let (next, res) = match solve_level(&to, from.value, y, opts) {
            Ok(v) => v,
            Err(RelationError::TargetOutOfRange { .. }) if ys.len() > 1 => {
                termination = Termination::EquationUnsolvable;
                break;
            }
            Err(e) => return Err(e),
        };
        if !(next - y > 10.0 * opts.root_rel * y) {
            return Err(not_divergent(vs, direction, &ys, &residuals, Termination::FixedPoint));
        }
        if next > ceiling {
            termination = Termination::FloorReached { r_min: Variable::of(vs).from_y(vs, y) };
            break;
        }
        from.advance(next, opts.quad)?;
        to.advance(next, opts.quad)?;
        ys.push(next);
        residuals.push(res);
    }
    let variable = Variable::of(vs);
    Ok(Orbit {
        direction,
        variable,
        r: ys.iter().map(|&v| variable.from_y(vs, v)).collect(),
        y: ys,
        residuals,
        termination,
    })
}

/// `J̃ = -I(1/r̃^(n+1))` for the recursion in `r`.
pub fn default_j_tilde(vs: &ValidSystem, r_tilde: f64, opts: &OrbitOptions) -> Result<f64, RelationError> {
    let tol = Tolerance { abs: opts.quad.abs.min(1e-13), rel: opts.quad.rel.min(1e-13) };
    Ok(charts::j_tilde(vs, r_tilde, tol)?)
}

/// Compactified orbit from `r0` (or `ĥr0` for `m > 2n+1`).
///
/// For `m <= 2n+1`: ForwardS solves `J_+(r_{l+1}) = J_-(r_l) - J̃`, InverseS
/// solves `J_-(r_{l+1}) = J_+(r_l) + J̃`, with `J̃ = -I(1/r̃^(n+1))` by default.
/// For `m > 2n+1`: `Ĵ_to(ĥr_{l+1}) = Ĵ_from(ĥr_l) ∓ J̃` with `J̃ = 0` by default.
pub fn generate_orbit_compactified(
    vs: &ValidSystem,
    r0: f64,
    j_tilde: Option<f64>,
    direction: OrbitDirection,
    opts: &OrbitOptions,
) -> Result<Orbit, RelationError> {
    check_balance(vs, opts)?;
    let offset = |jt: f64| match direction {
        OrbitDirection::ForwardS => -jt,
        OrbitDirection::InverseS => jt,
    };
    if vs.case() == Case::Above {
        return hat_orbit(vs, r0, offset(j_tilde.unwrap_or(0.0)), direction, opts);
    }
    let r_tilde = match opts.r_tilde {
        Some(r) => r,
        None => charts::default_r_tilde(vs.system())?,
    };
    if !(r0 > 0.0 && r0 < r_tilde) {
        return Err(RelationError::BadStart(r0));
    }
    let jt = match j_tilde {
        Some(j) => j,
        None => default_j_tilde(vs, r_tilde, opts)?,
    };
    r_orbit(vs, r0, r_tilde, offset(jt), direction, opts)
}

fn finish(vs: &ValidSystem, direction: OrbitDirection, r: Vec<f64>, residuals: Vec<f64>, termination: Termination) -> Orbit {
    let variable = Variable::of(vs);
    Orbit {
        direction,
        variable,
        y: r.iter().map(|&v| variable.to_y(vs, v)).collect(),
        r,
        residuals,
        termination,
    }
}

fn r_orbit(vs: &ValidSystem, r0: f64, r_tilde: f64, offset: f64, direction: OrbitDirection, opts: &OrbitOptions) -> Result<Orbit, RelationError> {
    let (from_side, to_side) = direction.sides();
    let n1 = vs.n() as f64 + 1.0;
    let tol = opts.quad;
    let mut j_from = charts::j_branch(vs, r0, from_side, r_tilde, tol)?.value;
    let mut j_to = charts::j_branch(vs, r0, to_side, r_tilde, tol)?.value;
    let mut rs = alloc::vec![r0];
    let mut residuals = Vec::new();
    let mut termination = Termination::MaxIterations;
    for _ in 0..opts.max_iter {
        let r = *rs.last().unwrap();
        let target = j_from + offset;
        // J_to(s) = J_to(r) - (n+1) ∫_s^r f_to, increasing in s
        let h = |s: f64| -> Result<f64, RelationError> {
            Ok(j_to + charts::j_increment(vs, to_side, s, r, tol)?.value - target)
        };
        let h_top = j_to - target;
        if h_top.abs() <= 1e-14 * target.abs().max(1.0) {
            if rs.len() == 1 {
                rs.push(r);
                residuals.push(h_top.abs());
                return Ok(finish(vs, direction, rs, residuals, Termination::FixedPoint));
            }
            return Err(RelationError::NotDivergent { orbit: Box::new(finish(vs, direction, rs, residuals, Termination::FixedPoint)) });
        }
        if h_top < 0.0 {
            return Err(RelationError::NotDivergent { orbit: Box::new(finish(vs, direction, rs, residuals, Termination::FixedPoint)) });
        }
        if h(opts.r_floor.min(r))? > 0.0 {
            termination = Termination::FloorReached { r_min: r };
            break;
        }
        let lo = roots::grow_until(0.5 * r, 0.5, opts.r_floor, |s| h(s).map(|v| v <= 0.0).map_err(|_| RootError::NonFinite { x: s }))
            .unwrap_or(opts.r_floor);
        let mut failure = None;
        let root = roots::newton_bracketed(
            |s| {
                let v = h(s).and_then(|v| Ok((v, n1 * charts::j_integrand(vs, to_side, s)?)));
                v.map_err(|e| {
                    failure.get_or_insert(e);
                    RootError::NonFinite { x: s }
                })
            },
            lo,
            r,
            0.5 * (lo + r),
            opts.root_rel,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let next = root?;
        let inc_to = charts::j_increment(vs, to_side, next, r, tol)?.value;
        let inc_from = charts::j_increment(vs, from_side, next, r, tol)?.value;
        residuals.push((j_to + inc_to - target).abs() / target.abs().max(1.0));
        j_to += inc_to;
        j_from += inc_from;
        rs.push(next);
    }
    Ok(finish(vs, direction, rs, residuals, termination))
}

fn hat_orbit(vs: &ValidSystem, hr0: f64, offset: f64, direction: OrbitDirection, opts: &OrbitOptions) -> Result<Orbit, RelationError> {
    let sys = vs.system();
    if sys.m().is_multiple_of(2) {
        return Err(ChartError::ChartMismatch { chart: charts::Chart::Directional(charts::Direction::PosY) }.into());
    }
    if !(hr0 > 0.0) {
        return Err(RelationError::BadStart(hr0));
    }
    let (from_side, to_side) = direction.sides();
    let tol = Tolerance { abs: 0.0, rel: opts.quad.rel };
    let mut rs = alloc::vec![hr0];
    let mut residuals = Vec::new();
    let mut termination = Termination::MaxIterations;
    for _ in 0..opts.max_iter {
        let hr = *rs.last().unwrap();
        let target = charts::jbar(sys, charts::psi(sys, hr, from_side)?, from_side, tol)?.value + offset;
        let top = charts::psi(sys, hr, to_side)?;
        // Ĵ_to(ρ) = -∫_0^ρ k_to: decreasing in ρ, zero at 0
        let h = |rho: f64| -> Result<f64, RelationError> { Ok(charts::jbar(sys, rho, to_side, tol)?.value - target) };
        let h_top = h(top)?;
        if h_top.abs() <= 1e-14 * target.abs() || target == 0.0 {
            if rs.len() == 1 {
                rs.push(hr);
                residuals.push(h_top.abs());
                return Ok(finish(vs, direction, rs, residuals, Termination::FixedPoint));
            }
            return Err(RelationError::NotDivergent { orbit: Box::new(finish(vs, direction, rs, residuals, Termination::FixedPoint)) });
        }
        if h_top > 0.0 {
            return Err(RelationError::NotDivergent { orbit: Box::new(finish(vs, direction, rs, residuals, Termination::FixedPoint)) });
        }
        if target >= 0.0 {
            termination = Termination::EquationUnsolvable;
            break;
        }
        let mut failure = None;
        let root = roots::newton_bracketed(
            |rho| {
                let v = h(rho).map(|v| (v, -charts::jbar_integrand(sys, to_side, rho)));
                v.map_err(|e| {
                    failure.get_or_insert(e);
                    RootError::NonFinite { x: rho }
                })
            },
            0.0,
            top,
            top,
            opts.root_rel,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let rho = root?;
        let next = charts::psi_inverse(sys, rho, to_side);
        if next < opts.r_floor {
            termination = Termination::FloorReached { r_min: hr };
            break;
        }
        residuals.push(h(rho)?.abs() / target.abs().max(1.0));
        rs.push(next);
    }
    Ok(finish(vs, direction, rs, residuals, termination))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LienardSystem;

    fn t11a() -> ValidSystem {
        ValidSystem::new(LienardSystem::sparse(3, 1, 1.0, &[(2, 1.0), (3, -0.5)], &[]).unwrap()).unwrap()
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn forward_matches_bisection_oracle() {
        let vs = t11a();
        let opts = OrbitOptions::default();
        let s = slow_relation(&vs, 100.0, OrbitDirection::ForwardS, &opts).unwrap();
        let oracle_i = |y: f64, side: Side| {
            let x = vs.branch_abs(y, side).unwrap();
            simpson(|t| vs.branch_integrand(side, t), 0.0, x, 20_000)
        };
        let target = oracle_i(100.0, Side::Minus);
        let (mut lo, mut hi) = (1.0, 1e4);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if oracle_i(mid, Side::Plus) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((s - 0.5 * (lo + hi)).abs() < 1e-10 * s.max(1.0), "{s} vs {lo}");
        let back = slow_relation(&vs, s, OrbitDirection::InverseS, &opts).unwrap();
        assert!((back - 100.0).abs() < 1e-8 * 100.0);
    }

    #[test]
    fn symmetric_is_identity_and_fixed() {
        let vs = ValidSystem::new(LienardSystem::sparse(1, 3, 1.0, &[], &[(1, 1.0)]).unwrap()).unwrap();
        let opts = OrbitOptions::default();
        assert_eq!(slow_relation(&vs, 5.0, OrbitDirection::ForwardS, &opts).unwrap(), 5.0);
        match generate_orbit(&vs, Some(10.0), DirectionChoice::Auto, &opts) {
            Err(RelationError::NotDivergent { orbit }) => assert_eq!(orbit.len(), 1),
            other => panic!("{other:?}"),
        }
        let o = generate_orbit_compactified(&vs, 0.1, Some(0.0), OrbitDirection::ForwardS, &opts).unwrap();
        assert_eq!(o.termination, Termination::FixedPoint);
        assert_eq!(o.r[0], o.r[1]);
    }

    #[test]
    fn finite_and_compactified_orbits_agree() {
        let vs = t11a();
        let opts = OrbitOptions { max_iter: 30, ..OrbitOptions::default() };
        let fin = generate_orbit(&vs, Some(1e3), DirectionChoice::Auto, &opts).unwrap();
        assert_eq!(fin.direction, OrbitDirection::InverseS);
        assert!(fin.y.windows(2).all(|w| w[1] > w[0]));
        assert!(fin.residuals.iter().all(|&r| r < 1e-8));
        let cmp = generate_orbit_compactified(&vs, fin.r[0], None, fin.direction, &opts).unwrap();
        for (a, b) in fin.r.iter().zip(&cmp.r) {
            assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn hat_orbit_decreases() {
        let vs = ValidSystem::new(LienardSystem::sparse(1, 5, 1.0, &[], &[(1, 1.0), (3, 0.7)]).unwrap()).unwrap();
        // a_3 alone keeps the system symmetric; no motion
        let opts = OrbitOptions { max_iter: 50, ..OrbitOptions::default() };
        let o = generate_orbit_compactified(&vs, 0.05, None, OrbitDirection::ForwardS, &opts).unwrap();
        assert_eq!(o.termination, Termination::FixedPoint);
    }
}
