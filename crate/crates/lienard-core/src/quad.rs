//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use alloc::vec::Vec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Accepted error is `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-12 }
    }
}

impl Tolerance {
    pub fn abs(abs: f64) -> Self {
        Tolerance { abs, ..Default::default() }
    }

    pub fn accepts(&self, err: f64, value: f64) -> bool {
        err <= self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance: value {value}, error estimate {abs_error}")]
    NotConverged { value: f64, abs_error: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { x: c });
    }
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut fv = [0.0f64; 14];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: c - dx });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { x: c + dx });
        }
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        rk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * rk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    let mut resabs = WGK[7] * fc.abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
        resabs += WGK[j] * (fv[2 * j].abs() + fv[2 * j + 1].abs());
    }
    let habs = h.abs();
    resasc *= habs;
    resabs *= habs;
    let mut err = ((rk - rg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min(libm::pow(200.0 * err / resasc, 1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel { a, b, value: rk * h, err })
}

/// Integrates `f` over `[a, b]`, splitting the panel with the largest error first.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    const MAX_PANELS: usize = 4000;
    if a == b {
        return Ok(Integral { value: 0.0, abs_error: 0.0, evaluations: 0 });
    }
    let mut panels: Vec<Panel> = alloc::vec![gk15(&mut f, a, b)?];
    let mut evaluations = 15;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if tol.accepts(err, value) {
            return Ok(Integral { value, abs_error: err, evaluations });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.err > be { (i, p.err) } else { (bi, be) });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        let too_narrow = mid == p.a || mid == p.b;
        if panels.len() + 2 > MAX_PANELS || too_narrow {
            panels.push(p);
            let value: f64 = panels.iter().map(|p| p.value).sum();
            let abs_error: f64 = panels.iter().map(|p| p.err).sum();
            return Err(QuadError::NotConverged { value, abs_error });
        }
        panels.push(gk15(&mut f, p.a, mid)?);
        panels.push(gk15(&mut f, mid, p.b)?);
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = integrate(libm::exp, 0.0, 1.0, Tolerance::default()).unwrap();
        let bwd = integrate(libm::exp, 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((fwd.value + bwd.value).abs() < 1e-14);
        assert!((fwd.value - (core::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_refines() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let exact = 2.0 * libm::atan(1.0 / 1e-2) / 1e-2;
        let r = integrate(f, -1.0, 1.0, Tolerance { abs: 1e-10, rel: 1e-13 }).unwrap();
        assert!((r.value - exact).abs() <= 1e-9 * exact, "{} vs {}", r.value, exact);
        assert!(r.abs_error <= 1e-10f64.max(1e-13 * exact));
    }

    #[test]
    fn reports_non_finite() {
        let r = integrate(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, Tolerance::default());
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }
}
