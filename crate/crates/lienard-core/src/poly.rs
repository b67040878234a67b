//! Dense real polynomials stored in ascending coefficient order.

use alloc::vec::Vec;

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect()
}

/// Coefficients of `p(sigma * x)`.
pub fn reflect(c: &[f64], sigma: f64) -> Vec<f64> {
    let mut s = 1.0;
    c.iter()
        .map(|&ci| {
            let v = ci * s;
            s *= sigma;
            v
        })
        .collect()
}

/// `x^deg * p(1/x)` where `deg = c.len() - 1`.
pub fn reverse(c: &[f64]) -> Vec<f64> {
    c.iter().rev().copied().collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = alloc::vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn max_abs(c: &[f64]) -> f64 {
    c.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Drops leading coefficients that are negligible relative to `scale`.
fn trim(mut c: Vec<f64>, scale: f64) -> Vec<f64> {
    let tiny = scale * 1e-11;
    while c.last().is_some_and(|v| v.abs() <= tiny) {
        c.pop();
    }
    c
}

fn normalize(c: Vec<f64>) -> Vec<f64> {
    let s = max_abs(&c);
    if s == 0.0 {
        return c;
    }
    c.into_iter().map(|v| v / s).collect()
}

fn rem(num: &[f64], den: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = num.to_vec();
    let dl = den.len();
    let lead = den[dl - 1];
    while r.len() >= dl {
        let q = r[r.len() - 1] / lead;
        let shift = r.len() - dl;
        for (j, &dj) in den.iter().enumerate() {
            r[shift + j] -= q * dj;
        }
        r.pop();
    }
    r
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut count = 0;
    let mut prev = 0.0f64;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            count += 1;
        }
        prev = v;
    }
    count
}

/// Number of distinct real roots, counted with a Sturm sequence.
///
/// Remainders whose coefficients fall below a relative threshold are treated as
/// exactly zero, so roots that are nearly double count as one root.
pub fn real_root_count(c: &[f64]) -> usize {
    let p0 = normalize(trim(c.to_vec(), max_abs(c)));
    if p0.len() <= 1 {
        return 0;
    }
    let p1 = normalize(derivative(&p0));
    let mut seq: Vec<Vec<f64>> = alloc::vec![p0, p1];
    loop {
        let k = seq.len();
        if seq[k - 1].len() <= 1 {
            break;
        }
        let r = rem(&seq[k - 2], &seq[k - 1]);
        let r = trim(r, 1.0);
        if r.is_empty() {
            break;
        }
        seq.push(normalize(r.into_iter().map(|v| -v).collect()));
    }
    let at_neg_inf = seq.iter().map(|p| {
        let lead = p[p.len() - 1];
        if (p.len() - 1) % 2 == 0 {
            lead
        } else {
            -lead
        }
    });
    let at_pos_inf = seq.iter().map(|p| p[p.len() - 1]);
    sign_changes(at_neg_inf).saturating_sub(sign_changes(at_pos_inf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn horner_matches_direct_sum() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let x = 1.7;
        let direct = 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x;
        assert!((eval(&c, x) - direct).abs() < 1e-12);
    }

    #[test]
    fn reflection_and_reversal() {
        assert_eq!(reflect(&[1.0, 2.0, 3.0], -1.0), vec![1.0, -2.0, 3.0]);
        assert_eq!(reverse(&[1.0, 2.0, 3.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(mul(&[1.0, 1.0], &[-1.0, 1.0]), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn sturm_counts_distinct_roots() {
        // (x-1)(x+2)(x-3)
        assert_eq!(real_root_count(&[6.0, -5.0, -2.0, 1.0]), 3);
        // x^2 + 1
        assert_eq!(real_root_count(&[1.0, 0.0, 1.0]), 0);
        // (x-1)^2 (x^2+1): one distinct root
        assert_eq!(real_root_count(&[1.0, -2.0, 2.0, -2.0, 1.0]), 1);
        // 4x^2 - 2: two roots
        assert_eq!(real_root_count(&[-2.0, 0.0, 4.0]), 2);
        assert_eq!(real_root_count(&[5.0]), 0);
        // x^4 + 0.2x^3 - 0.2x + 1 has no real roots
        assert_eq!(real_root_count(&[1.0, -0.2, 0.0, 0.2, 1.0]), 0);
    }
}
