//! Charts at infinity, curves of singularities there, and their slow divergence integrals.
//!
//! All directional charts use weights `(p, q)`: `(1, n+1)` for `m <= 2n+1`,
//! `(1, (m+1)/2)` for odd `m > 2n+1`, `(2, m+1)` for even `m > 2n+1`.
//! With `s = ±1` the direction, the `x`-charts are `x = s ρ^-p`, `y = ȳ ρ^-q`,
//! and the field is multiplied by `ρ^(q-p)`:
//!
//! ```text
//! ρ' = -(s/p) ρ (ȳ - ρ^α F̃(ρ))
//! ȳ' = -ε ρ^(2q-p-pm) G̃(ρ) - (s q/p) ȳ (ȳ - ρ^α F̃(ρ))
//! ```
//!
//! with `α = q - p(n+1)`, `F̃(ρ) = s^(n+1) + Σ b_k s^k ρ^(p(n+1-k))` and
//! `G̃(ρ) = A s^m + Σ a_k s^k ρ^(p(m-k))`. For `m > 2n+1` the origin of these
//! charts is blown up with weights `(ρ, ȳ, ε) = (v r̃, v^α ỹ, v^(2α) ε̃)`.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{Matrix2, Matrix3};
use num_rational::Ratio;

use crate::integrals::{self, IntegralError, IntegralValue};
use crate::model::{Case, LienardSystem, ModelError, Side, ValidSystem};
use crate::quad::{self, Tolerance};
use crate::roots::{self, RootError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    PosX,
    NegX,
    PosY,
}

impl Direction {
    fn sigma(self) -> f64 {
        match self {
            Direction::NegX => -1.0,
            _ => 1.0,
        }
    }
}

/// A chart of the compactification or of the blow-up of its corner points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Chart {
    /// directional chart: state `(ρ, ȳ)` for the x-directions, `(ρ, x̄)` for PosY
    Directional(Direction),
    /// `{ε̃ = 1}`: state `(r̃, ỹ)`, with `v = ε^(1/(2α))` as parameter
    Family(Direction),
    /// `{ỹ = ±1}`: state `(r̃, v, ε̃)`
    PhaseY(Direction, Sign),
    /// `{r̃ = 1}`: state `(ỹ, v, ε̃)`
    PhaseR(Direction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }
}

impl Chart {
    pub fn dim(self) -> usize {
        match self {
            Chart::Directional(_) | Chart::Family(_) => 2,
            Chart::PhaseY(..) | Chart::PhaseR(_) => 3,
        }
    }

    fn direction(self) -> Direction {
        match self {
            Chart::Directional(d) | Chart::Family(d) | Chart::PhaseY(d, _) | Chart::PhaseR(d) => d,
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chart::Directional(d) => write!(f, "{:?}", d),
            Chart::Family(d) => write!(f, "{:?}/family", d),
            Chart::PhaseY(d, Sign::Pos) => write!(f, "{:?}/ytilde=+1", d),
            Chart::PhaseY(d, Sign::Neg) => write!(f, "{:?}/ytilde=-1", d),
            Chart::PhaseR(d) => write!(f, "{:?}/rtilde=1", d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("chart {chart} does not exist for this case and parity of m")]
    ChartMismatch { chart: Chart },
    #[error("point has {got} coordinates, chart expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("point outside the chart's admissible region")]
    Inadmissible,
    #[error("Newton iteration for the curve of singularities failed: {0}")]
    NewtonDivergence(RootError),
    #[error("numerical and symbolic eigenvalues disagree at {chart}: {numeric:?} vs {symbolic:?}")]
    CatalogMismatch { chart: Chart, numeric: Vec<f64>, symbolic: Vec<f64> },
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<quad::QuadError> for ChartError {
    fn from(e: quad::QuadError) -> Self {
        ChartError::Integral(IntegralError::Quadrature(e))
    }
}

/// Weights `(p, q)` of the compactification.
pub fn degree(sys: &LienardSystem) -> (u32, u32) {
    let (n, m) = (sys.n() as u32, sys.m() as u32);
    match sys.case() {
        Case::Below | Case::Critical => (1, n + 1),
        Case::Above if m % 2 == 1 => (1, m.div_ceil(2)),
        Case::Above => (2, m + 1),
    }
}

/// Integer power; negative bases allowed.
fn ipow(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

fn sign_pow(s: f64, k: usize) -> f64 {
    if s < 0.0 && k % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

struct Weighted<'a> {
    sys: &'a LienardSystem,
    p: u32,
    q: u32,
}

impl<'a> Weighted<'a> {
    fn new(sys: &'a LienardSystem) -> Self {
        let (p, q) = degree(sys);
        Weighted { sys, p, q }
    }

    /// `α = q - p(n+1)`, zero for `m <= 2n+1`.
    fn alpha(&self) -> u32 {
        self.q - self.p * (self.sys.n() as u32 + 1)
    }

    fn f_tilde(&self, s: f64, rho: f64) -> f64 {
        let n = self.sys.n();
        let mut acc = sign_pow(s, n + 1);
        for (k, &bk) in self.sys.b().iter().enumerate() {
            if bk != 0.0 {
                acc += bk * sign_pow(s, k) * ipow(rho, self.p * (n + 1 - k) as u32);
            }
        }
        acc
    }

    fn g_tilde(&self, s: f64, rho: f64) -> f64 {
        let m = self.sys.m();
        let mut acc = self.sys.lead() * sign_pow(s, m);
        for (k, &ak) in self.sys.a().iter().enumerate() {
            if ak != 0.0 {
                acc += ak * sign_pow(s, k) * ipow(rho, self.p * (m - k) as u32);
            }
        }
        acc
    }

    /// `F̃'`: `ρ^(pn) F'(s ρ^-p)`.
    fn df_tilde(&self, s: f64, rho: f64) -> f64 {
        let n = self.sys.n();
        let mut acc = (n as f64 + 1.0) * sign_pow(s, n);
        for (k, &bk) in self.sys.b().iter().enumerate().skip(1) {
            if bk != 0.0 {
                acc += k as f64 * bk * sign_pow(s, k - 1) * ipow(rho, self.p * (n + 1 - k) as u32);
            }
        }
        acc
    }

    fn eps_power(&self) -> u32 {
        // 2q - p - pm, nonnegative in every case
        let m = self.sys.m() as u32;
        2 * self.q - self.p - self.p * m
    }

    fn directional_x(&self, s: f64, eps: f64, rho: f64, ybar: f64) -> [f64; 2] {
        let (p, q) = (self.p as f64, self.q as f64);
        let crit = ybar - ipow(rho, self.alpha()) * self.f_tilde(s, rho);
        let dr = -(s / p) * rho * crit;
        let dy = -eps * ipow(rho, self.eps_power()) * self.g_tilde(s, rho) - (s * q / p) * ybar * crit;
        [dr, dy]
    }

    fn directional_y(&self, eps: f64, rho: f64, xh: f64) -> [f64; 2] {
        let (n, m) = (self.sys.n(), self.sys.m());
        let (p, q) = (self.p as f64, self.q as f64);
        let mut gh = self.sys.lead() * ipow(xh, m as u32);
        for (k, &ak) in self.sys.a().iter().enumerate() {
            gh += ak * ipow(rho, self.p * (m - k) as u32) * ipow(xh, k as u32);
        }
        let mut fh = ipow(xh, n as u32 + 1);
        for (k, &bk) in self.sys.b().iter().enumerate() {
            fh += bk * ipow(rho, self.p * (n + 1 - k) as u32) * ipow(xh, k as u32);
        }
        let e = self.eps_power();
        let dr = (eps / q) * ipow(rho, e + 1) * gh;
        let dx = 1.0 - ipow(rho, self.alpha()) * fh + (eps * p / q) * xh * ipow(rho, e) * gh;
        [dr, dx]
    }

    fn family(&self, s: f64, v: f64, rt: f64, yt: f64) -> [f64; 2] {
        let (p, q) = (self.p as f64, self.q as f64);
        let rho = v * rt;
        let crit = yt - ipow(rt, self.alpha()) * self.f_tilde(s, rho);
        [-(s / p) * rt * crit, -self.g_tilde(s, rho) - (s * q / p) * yt * crit]
    }

    fn phase_y(&self, s: f64, tau: f64, rt: f64, v: f64, et: f64) -> [f64; 3] {
        let (p, q, a) = (self.p as f64, self.q as f64, self.alpha() as f64);
        let rho = v * rt;
        let psi = 1.0 - tau * ipow(rt, self.alpha()) * self.f_tilde(s, rho);
        let gam = et * self.g_tilde(s, rho);
        [
            tau * rt * (gam / a + (s / p) * ((q - a) / a) * psi),
            (tau * v / a) * (-gam - (s * q / p) * psi),
            2.0 * tau * et * (gam + (s * q / p) * psi),
        ]
    }

    fn phase_r(&self, s: f64, yt: f64, v: f64, et: f64) -> [f64; 3] {
        let (p, q, a) = (self.p as f64, self.q as f64, self.alpha() as f64);
        let crit = yt - self.f_tilde(s, v);
        [
            -et * self.g_tilde(s, v) - (s / p) * (q - a) * yt * crit,
            -(s / p) * v * crit,
            (2.0 * a * s / p) * et * crit,
        ]
    }
}

/// The desingularized field of `chart` at `point`.
///
/// For the family chart `eps` fixes `v = eps^(1/(2α))`; the three-dimensional
/// blow-up charts carry `ε̃` in the state and ignore `eps`.
pub fn chart_vector_field(sys: &LienardSystem, chart: Chart, eps: f64, point: &[f64]) -> Result<Vec<f64>, ChartError> {
    if point.len() != chart.dim() {
        return Err(ChartError::Dimension { expected: chart.dim(), got: point.len() });
    }
    if !(eps >= 0.0) {
        return Err(ChartError::Inadmissible);
    }
    let w = Weighted::new(sys);
    let above = sys.case() == Case::Above;
    let dir = chart.direction();
    let blowup = !matches!(chart, Chart::Directional(_));
    if blowup && (!above || dir == Direction::PosY) {
        return Err(ChartError::ChartMismatch { chart });
    }
    let s = dir.sigma();
    let out: Vec<f64> = match chart {
        Chart::Directional(Direction::PosY) => w.directional_y(eps, point[0], point[1]).to_vec(),
        Chart::Directional(_) => w.directional_x(s, eps, point[0], point[1]).to_vec(),
        Chart::Family(_) => {
            let v = libm::pow(eps, 1.0 / (2.0 * w.alpha() as f64));
            w.family(s, v, point[0], point[1]).to_vec()
        }
        Chart::PhaseY(_, sign) => w.phase_y(s, sign.value(), point[0], point[1], point[2]).to_vec(),
        Chart::PhaseR(_) => w.phase_r(s, point[0], point[1], point[2]).to_vec(),
    };
    Ok(out)
}

/// Fourth-order central-difference Jacobian at `eps = 0`.
pub fn jacobian(sys: &LienardSystem, chart: Chart, point: &[f64]) -> Result<Vec<Vec<f64>>, ChartError> {
    const H: f64 = 1e-3;
    let d = chart.dim();
    let mut jac = alloc::vec![alloc::vec![0.0; d]; d];
    for j in 0..d {
        let at = |t: f64| -> Result<Vec<f64>, ChartError> {
            let mut x = point.to_vec();
            x[j] += t;
            chart_vector_field(sys, chart, 0.0, &x)
        };
        let (f2p, f1p, f1m, f2m) = (at(2.0 * H)?, at(H)?, at(-H)?, at(-2.0 * H)?);
        for i in 0..d {
            jac[i][j] = (-f2p[i] + 8.0 * f1p[i] - 8.0 * f1m[i] + f2m[i]) / (12.0 * H);
        }
    }
    Ok(jac)
}

/// Real parts of the eigenvalues, sorted ascending.
pub fn eigenvalues(jac: &[Vec<f64>]) -> Vec<f64> {
    let mut ev: Vec<f64> = match jac.len() {
        2 => Matrix2::from_fn(|i, j| jac[i][j]).complex_eigenvalues().iter().map(|z| z.re).collect(),
        3 => Matrix3::from_fn(|i, j| jac[i][j]).complex_eigenvalues().iter().map(|z| z.re).collect(),
        _ => Vec::new(),
    };
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SingularityKind {
    AttractingNode,
    RepellingNode,
    Saddle,
    SemiHyperbolic,
    LinearlyZero,
}

impl SingularityKind {
    pub fn from_eigenvalues(ev: &[f64]) -> Self {
        let zero = |x: f64| x.abs() < 1e-12;
        let nz: Vec<f64> = ev.iter().copied().filter(|&x| !zero(x)).collect();
        if nz.is_empty() {
            SingularityKind::LinearlyZero
        } else if nz.len() < ev.len() {
            SingularityKind::SemiHyperbolic
        } else if nz.iter().all(|&x| x < 0.0) {
            SingularityKind::AttractingNode
        } else if nz.iter().all(|&x| x > 0.0) {
            SingularityKind::RepellingNode
        } else {
            SingularityKind::Saddle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Flow {
    TowardsZero,
    AwayFromZero,
}

/// Slow flow along the curve of singularities in an x-direction chart.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SlowDynamics {
    /// value of `ρ'` at the requested `ρ`
    pub value: f64,
    /// `ρ' = c ρ^k (1 + O(ρ))`
    pub leading_coefficient: f64,
    pub exponent: i64,
    pub flow: Flow,
}

/// `ρ' = (s/p) ρ^(q+1+p(n-m)) G̃(ρ) / F̃'(ρ)` (chart time, after dividing by ε).
pub fn slow_dynamics_at_infinity(sys: &LienardSystem, chart: Chart, rho: f64) -> Result<SlowDynamics, ChartError> {
    let dir = match chart {
        Chart::Directional(d @ (Direction::PosX | Direction::NegX)) => d,
        _ => return Err(ChartError::ChartMismatch { chart }),
    };
    if !(rho > 0.0) {
        return Err(ChartError::Inadmissible);
    }
    let w = Weighted::new(sys);
    let s = dir.sigma();
    let (n, m) = (sys.n() as i64, sys.m() as i64);
    let (p, q) = (w.p as i64, w.q as i64);
    let exponent = q + 1 + p * (n - m);
    let value = (s / p as f64) * libm::pow(rho, exponent as f64) * w.g_tilde(s, rho) / w.df_tilde(s, rho);
    let leading_coefficient = sys.lead() * sign_pow(s, (m - n + 1) as usize) / (p as f64 * (n as f64 + 1.0));
    let flow = if leading_coefficient > 0.0 { Flow::AwayFromZero } else { Flow::TowardsZero };
    Ok(SlowDynamics { value, leading_coefficient, exponent, flow })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SingularityInfo {
    pub chart: Chart,
    pub location: Vec<f64>,
    /// closed-form tuple, sorted ascending
    pub eigenvalues: Vec<f64>,
    /// from the finite-difference Jacobian, sorted ascending
    pub numeric_eigenvalues: Vec<f64>,
    pub kind: SingularityKind,
    /// direction of the slow flow through the point, where it is known in closed form
    pub slow_flow: Option<Flow>,
}

/// Every singularity of the charts at infinity for this case and parity, with
/// eigenvalues checked against the closed-form tuples to `1e-8`.
pub fn singularity_catalog(sys: &LienardSystem) -> Result<Vec<SingularityInfo>, ChartError> {
    let w = Weighted::new(sys);
    let n = sys.n();
    let (p, q) = (w.p as f64, w.q as f64);
    let mut out = Vec::new();
    let mut push = |chart: Chart, location: Vec<f64>, mut ev: Vec<f64>, slow_flow: Option<Flow>| {
        ev.sort_by(|a, b| a.total_cmp(b));
        out.push((chart, location, ev, slow_flow));
    };
    for dir in [Direction::PosX, Direction::NegX] {
        let s = dir.sigma();
        let sn2 = sign_pow(s, n + 2);
        let chart = Chart::Directional(dir);
        if sys.case() != Case::Above {
            push(chart, alloc::vec![0.0, 0.0], alloc::vec![sn2 / p, sn2 * q / p], None);
            let flow = slow_dynamics_at_infinity(sys, chart, 1e-3).ok().map(|d| d.flow);
            push(chart, alloc::vec![0.0, sign_pow(s, n + 1)], alloc::vec![0.0, -sn2 * q / p], flow);
            continue;
        }
        let a = w.alpha() as f64;
        push(chart, alloc::vec![0.0, 0.0], alloc::vec![0.0, 0.0], None);
        // family chart: nodes at r̃ = 0 when ỹ^2 = -A s^(m-1) p / q > 0
        let y2 = -sys.lead() * sign_pow(s, sys.m() - 1) * p / q;
        if y2 > 0.0 {
            for y0 in [libm::sqrt(y2), -libm::sqrt(y2)] {
                push(Chart::Family(dir), alloc::vec![0.0, y0], alloc::vec![-(s / p) * y0, -(2.0 * s * q / p) * y0], None);
            }
        }
        for sign in [Sign::Pos, Sign::Neg] {
            let tau = sign.value();
            let chart = Chart::PhaseY(dir, sign);
            let saddle = alloc::vec![
                tau * (s / p) * (q - a) / a,
                -tau * s * q / (p * a),
                2.0 * tau * s * q / p
            ];
            push(chart, alloc::vec![0.0, 0.0, 0.0], saddle, None);
            if tau * sign_pow(s, n + 1) == 1.0 {
                let flow = slow_dynamics_at_infinity(sys, Chart::Directional(dir), 1e-3).ok().map(|d| d.flow);
                push(chart, alloc::vec![1.0, 0.0, 0.0], alloc::vec![-(s * tau / p) * (q - a), 0.0, 0.0], flow);
            }
        }
        let f = sn2 / p;
        push(Chart::PhaseR(dir), alloc::vec![0.0, 0.0, 0.0], alloc::vec![f * (q - a), f, -2.0 * a * f], None);
    }
    let mut catalog = Vec::with_capacity(out.len());
    for (chart, location, ev, slow_flow) in out {
        let numeric = eigenvalues(&jacobian(sys, chart, &location)?);
        let field = chart_vector_field(sys, chart, 0.0, &location)?;
        let agree = numeric.len() == ev.len()
            && numeric.iter().zip(&ev).all(|(x, y)| (x - y).abs() <= 1e-8)
            && field.iter().all(|v| v.abs() <= 1e-12);
        if !agree {
            return Err(ChartError::CatalogMismatch { chart, numeric, symbolic: ev });
        }
        let kind = SingularityKind::from_eigenvalues(&ev);
        catalog.push(SingularityInfo { chart, location, eigenvalues: ev, numeric_eigenvalues: numeric, kind, slow_flow });
    }
    Ok(catalog)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Feasibility {
    pub feasible: bool,
    pub reason: &'static str,
}

/// Whether canard cycles with a fast segment at infinity can exist.
pub fn canard_at_infinity_feasible(sys: &LienardSystem) -> Feasibility {
    let (n, m, a) = (sys.n(), sys.m(), sys.lead());
    let no = |reason| Feasibility { feasible: false, reason };
    if n % 2 == 0 {
        return no("n must be odd");
    }
    match sys.case() {
        Case::Below => {
            if m % 2 == 0 {
                no("m must be odd")
            } else if a != 1.0 {
                no("A must equal 1")
            } else {
                Feasibility { feasible: true, reason: "m < 2n+1 with A = 1, m and n odd" }
            }
        }
        Case::Critical => {
            if a > 0.0 {
                Feasibility { feasible: true, reason: "m = 2n+1 with A > 0, n odd" }
            } else {
                no("A must be positive")
            }
        }
        Case::Above => {
            if m % 2 == 0 {
                no("even m > 2n+1 admits no canard cycles at infinity")
            } else if a != 1.0 {
                no("A must equal 1")
            } else {
                Feasibility { feasible: true, reason: "m > 2n+1 with m odd, A = 1, n odd" }
            }
        }
    }
}

/// Curve of singularities `x̄ = Φ(r)` in the PosY chart:
/// `1 - Φ^(n+1) - Σ b_k r^(n+1-k) Φ^k = 0`, through `+1` (Minus) or `-1` (Plus).
///
/// The branch is the unique root with the sign of `Φ(0)`; for a valid system
/// `x = Φ(r)/r` is then the branch inverse of `F` at level `r^-(n+1)`.
pub fn phi(sys: &LienardSystem, r: f64, side: Side) -> Result<f64, ChartError> {
    if !(r >= 0.0) {
        return Err(ChartError::Inadmissible);
    }
    let s = side.sigma();
    if r == 0.0 {
        return Ok(s);
    }
    let n = sys.n();
    let b = sys.b();
    // h(t) = (s t)^(n+1) + Σ b_k r^(n+1-k) (s t)^k - 1 for t = |Φ| > 0
    let h = |t: f64| {
        let x = s * t;
        let mut val = ipow(x, n as u32 + 1) - 1.0;
        let mut der = (n as f64 + 1.0) * ipow(x, n as u32);
        for (k, &bk) in b.iter().enumerate() {
            if bk == 0.0 {
                continue;
            }
            let c = bk * ipow(r, (n + 1 - k) as u32);
            val += c * ipow(x, k as u32);
            if k >= 1 {
                der += k as f64 * c * ipow(x, k as u32 - 1);
            }
        }
        (val, s * der)
    };
    let hi = roots::grow_until(1.0, 2.0, 1e150, |t| Ok(h(t).0 >= 0.0)).map_err(ChartError::NewtonDivergence)?;
    let t = roots::newton_bracketed(|t| Ok(h(t)), 0.0, hi, 1.0, 1e-15).map_err(ChartError::NewtonDivergence)?;
    let res = h(t).0;
    if !(res.abs() <= 1e-12) {
        return Err(ChartError::NewtonDivergence(RootError::NoConvergence { x: t, iterations: 0 }));
    }
    Ok(s * t)
}

/// Largest dyadic `r = 0.5 * 2^-k` at which plain Newton from `±1` lands on the
/// branch obtained by continuation from `r = 0`.
pub fn r_tilde_max(sys: &LienardSystem) -> Result<f64, ChartError> {
    let n = sys.n();
    let b = sys.b();
    let g = |r: f64, x: f64| {
        let mut val = ipow(x, n as u32 + 1) - 1.0;
        let mut der = (n as f64 + 1.0) * ipow(x, n as u32);
        for (k, &bk) in b.iter().enumerate() {
            let c = bk * ipow(r, (n + 1 - k) as u32);
            val += c * ipow(x, k as u32);
            if k >= 1 {
                der += k as f64 * c * ipow(x, k as u32 - 1);
            }
        }
        (val, der)
    };
    let newton = |r: f64, mut x: f64| -> Option<f64> {
        for _ in 0..60 {
            let (v, d) = g(r, x);
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            let step = v / d;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                return if g(r, x).0.abs() <= 1e-12 { Some(x) } else { None };
            }
        }
        None
    };
    for k in 0..40 {
        let r = 0.5 * libm::ldexp(1.0, -k);
        let ok = [1.0f64, -1.0].iter().all(|&seed| {
            let mut x = seed;
            for i in 1..=64 {
                match newton(r * i as f64 / 64.0, x) {
                    Some(v) => x = v,
                    None => return false,
                }
            }
            matches!(newton(r, seed), Some(d) if (d - x).abs() <= 1e-10 && d * seed > 0.0)
        });
        if ok {
            return Ok(r);
        }
    }
    Err(ChartError::NewtonDivergence(RootError::NoConvergence { x: 0.0, iterations: 40 }))
}

/// Default `r̃ = r̃_max / 2`.
pub fn default_r_tilde(sys: &LienardSystem) -> Result<f64, ChartError> {
    Ok(0.5 * r_tilde_max(sys)?)
}

/// `ψ(ĥr)`: the root `ρ > 0` of `ρ^(n+1) = ĥr^((m+1)/2) (1 + Σ b_k s^k ρ^(n+1-k))`,
/// so that `F(s/ψ) = ĥr^(-(m+1)/2)`. Odd `m > 2n+1` only.
pub fn psi(sys: &LienardSystem, hr: f64, side: Side) -> Result<f64, ChartError> {
    let (n, m) = (sys.n(), sys.m());
    if sys.case() != Case::Above || m % 2 == 0 {
        return Err(ChartError::ChartMismatch { chart: Chart::Directional(Direction::PosY) });
    }
    if !(hr >= 0.0) {
        return Err(ChartError::Inadmissible);
    }
    if hr == 0.0 {
        return Ok(0.0);
    }
    let s = side.sigma();
    let c = libm::pow(hr, (m as f64 + 1.0) / 2.0);
    let b = sys.b();
    let h = |rho: f64| {
        let mut val = ipow(rho, n as u32 + 1) - c;
        let mut der = (n as f64 + 1.0) * ipow(rho, n as u32);
        for (k, &bk) in b.iter().enumerate() {
            if bk == 0.0 {
                continue;
            }
            let e = (n + 1 - k) as u32;
            let t = c * bk * sign_pow(s, k);
            val -= t * ipow(rho, e);
            der -= t * e as f64 * ipow(rho, e - 1);
        }
        (val, der)
    };
    let seed = libm::pow(hr, (m as f64 + 1.0) / (2.0 * (n as f64 + 1.0)));
    let hi = roots::grow_until(seed, 2.0, 1e150, |t| Ok(h(t).0 >= 0.0)).map_err(ChartError::NewtonDivergence)?;
    let rho = roots::newton_bracketed(|t| Ok(h(t)), 0.0, hi, seed, 1e-15).map_err(ChartError::NewtonDivergence)?;
    Ok(rho)
}

/// Inverse of `psi`: `ĥr = (ρ^(n+1) / (1 + Σ b_k s^k ρ^(n+1-k)))^(2/(m+1))`.
pub fn psi_inverse(sys: &LienardSystem, rho: f64, side: Side) -> f64 {
    let n = sys.n();
    let s = side.sigma();
    let mut bracket = 1.0;
    for (k, &bk) in sys.b().iter().enumerate() {
        bracket += bk * sign_pow(s, k) * ipow(rho, (n + 1 - k) as u32);
    }
    libm::pow(ipow(rho, n as u32 + 1) / bracket, 2.0 / (sys.m() as f64 + 1.0))
}

/// Integrand of `J_side`, without the factor `-(n+1)`:
/// `N/(s^(2n+2-m) D)` with `N = s^n F'(Φ/s)`, `D = -s^m G(Φ/s)`.
pub fn j_integrand(vs: &ValidSystem, side: Side, s: f64) -> Result<f64, ChartError> {
    let sys = vs.system();
    let (n, m) = (sys.n(), sys.m());
    let ph = phi(sys, s, side)?;
    let mut num = (n as f64 + 1.0) * ipow(ph, n as u32);
    for (k, &bk) in sys.b().iter().enumerate().skip(1) {
        if bk != 0.0 {
            num += k as f64 * bk * ipow(s, (n + 1 - k) as u32) * ipow(ph, k as u32 - 1);
        }
    }
    let mut den = sys.lead() * ipow(ph, m as u32);
    for (k, &ak) in sys.a().iter().enumerate() {
        if ak != 0.0 {
            den += ak * ipow(s, (m - k) as u32) * ipow(ph, k as u32);
        }
    }
    Ok(num / (ipow(s, (2 * n + 2 - m) as u32) * den))
}

/// `J_side(r) = -(n+1) ∫_r^r̃ N/(s^(2n+2-m) D) ds`, for `m <= 2n+1`.
pub fn j_branch(vs: &ValidSystem, r: f64, side: Side, r_tilde: f64, tol: Tolerance) -> Result<IntegralValue, ChartError> {
    if vs.case() == Case::Above {
        return Err(ChartError::ChartMismatch { chart: Chart::Directional(Direction::PosY) });
    }
    if !(r > 0.0) || !(r_tilde > 0.0) {
        return Err(ChartError::Inadmissible);
    }
    j_increment(vs, side, r, r_tilde, tol)
}

/// `-(n+1) ∫_lo^hi` of the `J` integrand.
pub(crate) fn j_increment(vs: &ValidSystem, side: Side, lo: f64, hi: f64, tol: Tolerance) -> Result<IntegralValue, ChartError> {
    let n1 = vs.n() as f64 + 1.0;
    let mut failure = None;
    let r = quad::integrate(
        |s| match j_integrand(vs, side, s) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let r = r?;
    Ok(IntegralValue { value: -n1 * r.value, abs_error: n1 * r.abs_error })
}

/// Integrand of `J̄_side`: `s^(m-2n-2) B(s)^2 / C(s)` with `B(s) = σ^n s^n F'(σ/s)`
/// and `C(s) = -σ^m s^m G(σ/s)`.
pub fn jbar_integrand(sys: &LienardSystem, side: Side, s: f64) -> f64 {
    let (n, m) = (sys.n(), sys.m());
    let sg = side.sigma();
    // s^n F'(sg/s) sg^n
    let mut bb = n as f64 + 1.0;
    for (k, &bk) in sys.b().iter().enumerate().skip(1) {
        if bk != 0.0 {
            bb += k as f64 * bk * sign_pow(sg, k + n + 1) * ipow(s, (n + 1 - k) as u32);
        }
    }
    // -s^m G(sg/s) sg^m
    let mut cc = sys.lead();
    for (k, &ak) in sys.a().iter().enumerate() {
        if ak != 0.0 {
            cc += ak * sign_pow(sg, k + m) * ipow(s, (m - k) as u32);
        }
    }
    ipow(s, (m - 2 * n - 2) as u32) * bb * bb / cc
}

/// `Ĵ_side(ĥr) = -∫_0^ψ(ĥr) J̄-integrand`, for odd `m > 2n+1`.
pub fn jhat_branch(vs: &ValidSystem, hr: f64, side: Side, tol: Tolerance) -> Result<IntegralValue, ChartError> {
    let rho = psi(vs.system(), hr, side)?;
    jbar(vs.system(), rho, side, tol)
}

pub(crate) fn jbar(sys: &LienardSystem, rho: f64, side: Side, tol: Tolerance) -> Result<IntegralValue, ChartError> {
    let r = quad::integrate(|s| jbar_integrand(sys, side, s), 0.0, rho, tol)?;
    Ok(IntegralValue { value: -r.value, abs_error: r.abs_error })
}

/// `J̃ = -I(1/r̃^(n+1))`.
pub fn j_tilde(vs: &ValidSystem, r_tilde: f64, tol: Tolerance) -> Result<f64, ChartError> {
    let y = libm::pow(r_tilde, -(vs.n() as f64 + 1.0));
    Ok(-integrals::i_total(vs, y, tol)?.value)
}

/// Exponent of the slow dynamics as an exact rational, for reports.
pub fn slow_exponent(sys: &LienardSystem) -> Ratio<i64> {
    let (p, q) = degree(sys);
    let (n, m) = (sys.n() as i64, sys.m() as i64);
    Ratio::from_integer(q as i64 + 1 + p as i64 * (n - m))
}
