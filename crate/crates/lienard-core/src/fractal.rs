//! Box dimension of decreasing sequences accumulating at 0.
//!
//! The neighborhood estimator fits `log|U_δ|` against `log δ`. For an orbit
//! truncated at `r_L` the unseen tail has gaps below `g_{L-1}`, so for
//! `δ >= g_{L-1}/2` the neighborhood of the full orbit is exactly
//! `2δ + r_L + Σ_{l<L} min(g_l, 2δ)`; the fit window starts there.

use alloc::vec::Vec;

/// Ratio `max/min` of `|U_δ|/δ^(1-d)` up to which a window counts as nondegenerate.
pub const NONDEGENERACY_THRESHOLD: f64 = 1e2;
/// Fraction of leading iterates dropped as transient.
pub const TRANSIENT_FRACTION: f64 = 0.2;
const DELTA_SAMPLES: usize = 80;
const MIN_WINDOW_GAPS: usize = 30;
const MAX_TAIL_RMS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Method {
    NeighborhoodFit,
    GapLawFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Nondegeneracy {
    pub d: f64,
    /// δ-range of the bounds
    pub window: (f64, f64),
    pub content_lower: f64,
    pub content_upper: f64,
    pub ratio: f64,
    /// `ratio <= NONDEGENERACY_THRESHOLD` over the window (an empirical surrogate)
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DimensionEstimate {
    pub value: f64,
    pub method: Method,
    /// δ-range for the neighborhood fit, index range `[l0, L]` for the gap law
    pub fit_window: (f64, f64),
    /// regression error, or the slope change across the window if larger
    pub stderr: f64,
    /// fitted exponent: slope of `log|U_δ|` or of `log g_l` against `log r_l`
    pub slope: f64,
    pub nondegeneracy: Option<Nondegeneracy>,
    /// `(δ, |U_δ|)` samples of the window (neighborhood fit only)
    pub curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FractalError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("points must be positive and strictly decreasing (index {index})")]
    NotDecreasing { index: usize },
    #[error("fit window too narrow: {gaps} gaps over {decades:.2} decades")]
    WindowTooNarrow { gaps: usize, decades: f64 },
    #[error("tail not asymptotic: log-log residual rms {rms:.3}")]
    NotAsymptotic { rms: f64 },
    #[error("dimension {0} outside (0, 1)")]
    BadDimension(f64),
}

/// Lebesgue measure of `∪ [p - δ, p + δ]`.
pub fn neighborhood_length(points: &[f64], delta: f64) -> f64 {
    if points.is_empty() || !(delta > 0.0) {
        return 0.0;
    }
    let mut p = points.to_vec();
    p.sort_by(|a, b| b.total_cmp(a));
    let mut total = 2.0 * delta;
    for w in p.windows(2) {
        total += (w[0] - w[1]).min(2.0 * delta);
    }
    total
}

fn check(points: &[f64], needed: usize) -> Result<(), FractalError> {
    if points.len() < needed {
        return Err(FractalError::TooFewPoints { needed, got: points.len() });
    }
    for (i, w) in points.windows(2).enumerate() {
        if !(w[1] < w[0]) || !(w[1] > 0.0) {
            return Err(FractalError::NotDecreasing { index: i + 1 });
        }
    }
    if !(points[0] > 0.0) {
        return Err(FractalError::NotDecreasing { index: 0 });
    }
    Ok(())
}

/// Gaps sorted ascending with prefix sums, for `O(log L)` evaluation of `|U_δ|`.
struct Closure {
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    last: f64,
}

impl Closure {
    fn new(points: &[f64]) -> Self {
        let mut sorted: Vec<f64> = points.windows(2).map(|w| w[0] - w[1]).collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for g in &sorted {
            acc += g;
            prefix.push(acc);
        }
        Closure { sorted, prefix, last: *points.last().unwrap() }
    }

    /// `|U_δ|` of the orbit closed by its tail; exact for `δ >= g_last/2`.
    fn length(&self, delta: f64) -> f64 {
        let k = self.sorted.partition_point(|&g| g < 2.0 * delta);
        2.0 * delta + self.last + self.prefix[k] + 2.0 * delta * (self.sorted.len() - k) as f64
    }
}

struct Fit {
    slope: f64,
    stderr: f64,
    rms: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> Fit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a) * (b - icpt - slope * a)).sum();
    let dof = (n - 2.0).max(1.0);
    Fit { slope, stderr: libm::sqrt(sse / dof / sxx), rms: libm::sqrt(sse / n) }
}

/// Slope with an error bar that also covers curvature: the change between
/// the fits of the two halves of the window. Finite-size bias decays across
/// the window, so the full change is kept rather than half of it.
fn robust_fit(x: &[f64], y: &[f64]) -> Fit {
    let all = linear_fit(x, y);
    let h = x.len() / 2;
    if h < 3 {
        return all;
    }
    let a = linear_fit(&x[..h], &y[..h]);
    let b = linear_fit(&x[h..], &y[h..]);
    let drift = (a.slope - b.slope).abs();
    Fit { stderr: all.stderr.max(drift), ..all }
}

fn delta_window(points: &[f64], delta_decades: Option<f64>) -> Result<(f64, f64, usize), FractalError> {
    let l = points.len() - 1;
    let l0 = (TRANSIENT_FRACTION * l as f64) as usize;
    let hi = 0.5 * (points[l0] - points[l0 + 1]);
    let mut lo = 0.5 * (points[l - 1] - points[l]);
    if let Some(d) = delta_decades {
        lo = lo.max(hi * libm::pow(10.0, -d));
    }
    let gaps = points[l0..].windows(2).filter(|w| {
        let g = 0.5 * (w[0] - w[1]);
        g >= lo && g <= hi
    });
    let count = gaps.count();
    let decades = libm::log10(hi / lo);
    if count < MIN_WINDOW_GAPS || !(decades > 0.3) {
        return Err(FractalError::WindowTooNarrow { gaps: count, decades: if decades.is_finite() { decades } else { 0.0 } });
    }
    Ok((lo, hi, l0))
}

fn log_deltas(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..samples).map(|i| libm::exp(a + (b - a) * i as f64 / (samples - 1) as f64)).collect()
}

/// `1 - slope` of `log|U_δ|` against `log δ` over the tail window.
///
/// `delta_decades` caps the window at that many decades below its top.
pub fn dimension_neighborhood(points: &[f64], delta_decades: Option<f64>) -> Result<DimensionEstimate, FractalError> {
    check(points, MIN_WINDOW_GAPS + 2)?;
    let (lo, hi, _) = delta_window(points, delta_decades)?;
    let closure = Closure::new(points);
    let deltas = log_deltas(lo, hi, DELTA_SAMPLES);
    let lengths: Vec<f64> = deltas.iter().map(|&d| closure.length(d)).collect();
    let x: Vec<f64> = deltas.iter().map(|d| libm::log(*d)).collect();
    let y: Vec<f64> = lengths.iter().map(|u| libm::log(*u)).collect();
    let fit = robust_fit(&x, &y);
    let value = (1.0 - fit.slope).clamp(0.0, 1.0);
    Ok(DimensionEstimate {
        value,
        method: Method::NeighborhoodFit,
        fit_window: (lo, hi),
        stderr: fit.stderr,
        slope: fit.slope,
        nondegeneracy: None,
        curve: deltas.into_iter().zip(lengths).collect(),
    })
}

/// `1 - 1/β` with `β` the slope of `log(r_l - r_{l+1})` against `log r_l` over
/// the tail; geometric decay (`β <= 1`) gives 0.
pub fn dimension_gap_law(points: &[f64]) -> Result<DimensionEstimate, FractalError> {
    check(points, MIN_WINDOW_GAPS + 2)?;
    let l = points.len() - 1;
    let l0 = (TRANSIENT_FRACTION * l as f64) as usize;
    let x: Vec<f64> = points[l0..l].iter().map(|r| libm::log(*r)).collect();
    let y: Vec<f64> = points[l0..].windows(2).map(|w| libm::log(w[0] - w[1])).collect();
    let fit = robust_fit(&x, &y);
    if fit.rms > MAX_TAIL_RMS {
        return Err(FractalError::NotAsymptotic { rms: fit.rms });
    }
    let beta = fit.slope;
    let (value, stderr) = if beta > 1.0 {
        ((1.0 - 1.0 / beta).clamp(0.0, 1.0), fit.stderr / (beta * beta))
    } else {
        (0.0, fit.stderr)
    };
    Ok(DimensionEstimate {
        value,
        method: Method::GapLawFit,
        fit_window: (l0 as f64, l as f64),
        stderr,
        slope: beta,
        nondegeneracy: None,
        curve: Vec::new(),
    })
}

/// Bounds of `|U_δ|/δ^(1-d)` for `δ` from `g_{L-1}/2`, where the tail closure
/// becomes exact, up to half the largest gap, or `delta_decades` above the bottom.
pub fn nondegeneracy_diagnostic(points: &[f64], d: f64, delta_decades: Option<f64>) -> Result<Nondegeneracy, FractalError> {
    if !(0.0..1.0).contains(&d) {
        return Err(FractalError::BadDimension(d));
    }
    check(points, MIN_WINDOW_GAPS + 2)?;
    let l = points.len() - 1;
    let lo = 0.5 * (points[l - 1] - points[l]);
    let mut hi = points.windows(2).fold(0.0f64, |a, w| a.max(0.5 * (w[0] - w[1])));
    if let Some(k) = delta_decades {
        hi = hi.min(lo * libm::pow(10.0, k));
    }
    let decades = libm::log10(hi / lo);
    if !(decades > 0.3) {
        return Err(FractalError::WindowTooNarrow { gaps: l, decades: if decades.is_finite() { decades } else { 0.0 } });
    }
    let closure = Closure::new(points);
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    // at least 20 samples per decade
    let samples = ((20.0 * decades) as usize).clamp(DELTA_SAMPLES, 10_000);
    for delta in log_deltas(lo, hi, samples) {
        let q = closure.length(delta) / libm::pow(delta, 1.0 - d);
        lower = lower.min(q);
        upper = upper.max(q);
    }
    let ratio = upper / lower;
    Ok(Nondegeneracy {
        d,
        window: (lo, hi),
        content_lower: lower,
        content_upper: upper,
        ratio,
        nondegenerate: ratio <= NONDEGENERACY_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn recursion(beta: f64, c: f64, n: usize) -> Vec<f64> {
        let mut r = vec![0.5];
        for _ in 1..n {
            let x = *r.last().unwrap();
            r.push(x - c * libm::pow(x, beta));
        }
        r
    }

    fn sweep_oracle(points: &[f64], delta: f64) -> f64 {
        let mut iv: Vec<(f64, f64)> = points.iter().map(|p| (p - delta, p + delta)).collect();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut total = 0.0;
        let (mut s, mut e) = iv[0];
        for &(a, b) in &iv[1..] {
            if a > e {
                total += e - s;
                s = a;
                e = b;
            } else {
                e = e.max(b);
            }
        }
        total + (e - s)
    }

    #[test]
    fn neighborhood_small_cases() {
        assert!((neighborhood_length(&[1.0], 0.1) - 0.2).abs() < 1e-15);
        assert!((neighborhood_length(&[1.0, 0.5, 0.0], 0.3) - 1.6).abs() < 1e-15);
        let mut pts: Vec<f64> = (0..=20).map(|l| libm::ldexp(1.0, -l)).collect();
        pts.push(0.0);
        for delta in [1e-4, 3e-3, 0.05] {
            let a = neighborhood_length(&pts, delta);
            let b = sweep_oracle(&pts, delta);
            assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn closure_equals_union_with_tail() {
        let r = recursion(2.0, 1.0, 500);
        let c = Closure::new(&r);
        let delta = 0.6 * (r[498] - r[499]);
        let mut with_tail = r.clone();
        with_tail.extend(recursion(2.0, 1.0, 1_000_000).into_iter().skip(500));
        with_tail.push(0.0);
        let exact = neighborhood_length(&with_tail, delta);
        assert!((c.length(delta) - exact).abs() <= 1e-12, "{} vs {exact}", c.length(delta));
    }

    #[test]
    fn calibration_quadratic() {
        let r = recursion(2.0, 1.0, 10_000);
        let a = dimension_neighborhood(&r, None).unwrap();
        let b = dimension_gap_law(&r).unwrap();
        assert!((a.value - 0.5).abs() < 0.02 && (b.value - 0.5).abs() < 0.02, "{} {}", a.value, b.value);
        assert!((a.value - b.value).abs() <= 0.002, "{} {}", a.value, b.value);
        let r = recursion(3.0, 1.0, 10_000);
        assert!((dimension_neighborhood(&r, None).unwrap().value - 2.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn geometric_sequences_have_dimension_zero() {
        let r: Vec<f64> = (0..1000).map(|l| libm::ldexp(1.0, -l)).collect();
        assert!(dimension_neighborhood(&r, None).unwrap().value < 0.02);
        assert!(dimension_gap_law(&r).unwrap().value < 1e-6);
        let r: Vec<f64> = (0..3000).map(|l| libm::pow(0.9, l as f64)).collect();
        assert!(dimension_neighborhood(&r, None).unwrap().value < 0.02);
        assert!(dimension_gap_law(&r).unwrap().value < 1e-6);
    }

    #[test]
    fn nondegeneracy_separates() {
        let r = recursion(2.0, 1.0, 100_000);
        let ok = nondegeneracy_diagnostic(&r, 0.5, None).unwrap();
        assert!(ok.ratio <= 10.0 && ok.content_lower <= ok.content_upper);
        let wrong = nondegeneracy_diagnostic(&r, 0.9, None).unwrap();
        assert!(wrong.ratio > ok.ratio);
        let geo: Vec<f64> = (0..3000).map(|l| libm::pow(0.9, l as f64)).collect();
        let g = nondegeneracy_diagnostic(&geo, 0.5, None).unwrap();
        assert!(!g.nondegenerate);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(dimension_gap_law(&[1.0, 0.5]), Err(FractalError::TooFewPoints { .. })));
        let mut r = recursion(2.0, 1.0, 100);
        r[50] = r[49];
        assert!(matches!(dimension_neighborhood(&r, None), Err(FractalError::NotDecreasing { .. })));
    }
}
