//! Real roots of real polynomials on a bounded interval.
//!
//! Roots are isolated recursively: the critical points of `p` (the roots of
//! `p'` on the interval) split it into pieces on which `p` is monotone, and
//! each piece holds at most one sign change, located by bisection. A critical
//! point where `p` vanishes to rounding accuracy is reported as a multiple
//! root.

/// Highest-degree nonzero coefficient index, if any.
fn effective_degree(c: &[f64]) -> Option<usize> {
    c.iter().rposition(|x| *x != 0.0)
}

pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

/// Rounding scale of a Horner evaluation at `x`.
fn eval_scale(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x.abs() + a.abs())
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_neg = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = horner(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sorted real roots of `Σ c_k x^k` in `[a, b]`. The identically zero
/// polynomial has no isolated roots and yields an empty list.
pub fn real_roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let Some(deg) = effective_degree(c) else {
        return Vec::new();
    };
    let c = &c[..=deg];
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        let r = -c[0] / c[1];
        return if (a..=b).contains(&r) { vec![r] } else { Vec::new() };
    }
    let crit = real_roots_in(&derivative(c), a, b);
    let mut pts = Vec::with_capacity(crit.len() + 2);
    pts.push(a);
    pts.extend(crit.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);

    let is_zero = |x: f64| horner(c, x).abs() <= 64.0 * f64::EPSILON * eval_scale(c, x);
    let mut roots = Vec::new();
    for (k, &x) in pts.iter().enumerate() {
        if is_zero(x) {
            roots.push(x);
        }
        if let Some(&y) = pts.get(k + 1) {
            let (fx, fy) = (horner(c, x), horner(c, y));
            if !is_zero(x) && !is_zero(y) && (fx < 0.0) != (fy < 0.0) {
                roots.push(bisect(c, x, y, fx));
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    let sep = 1e-13 * (b - a).abs().max(1.0);
    roots.dedup_by(|x, y| (*x - *y).abs() <= sep);
    roots
}

/// `sup_{[a,b]} |p|`, attained at an endpoint or a critical point.
pub fn sup_abs_on(c: &[f64], a: f64, b: f64) -> f64 {
    let crit = real_roots_in(&derivative(c), a, b);
    crit.iter()
        .chain([a, b].iter())
        .map(|&x| horner(c, x).abs())
        .fold(0.0, f64::max)
}

/// Critical points of `p` strictly inside `(a, b)`.
pub fn critical_points_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    real_roots_in(&derivative(c), a, b)
        .into_iter()
        .filter(|&x| x > a && x < b)
        .collect()
}
