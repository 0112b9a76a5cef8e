//! Real roots of low-degree polynomials by critical-point isolation.
//!
//! The real roots of `p` are separated by the real roots of `p'`, so the
//! critical points (found recursively) split the line into monotone pieces.
//! Each piece holds at most one simple root, bracketed by a sign change and
//! refined by bisection; a critical point where `p` vanishes to working
//! precision is a multiple root.

/// Horner evaluation; `c` is in ascending order.
pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// `sum |c_k| |x|^k`, the natural scale of rounding error in `eval`.
pub fn eval_scale(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, &ck| acc * ax + ck.abs())
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck).collect()
}

/// Relative residual below which a critical value counts as a root.
const TOUCH_TOL: f64 = 1e-12;

/// Sorted real roots. The leading coefficient must be nonzero.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let n = c.len().saturating_sub(1);
    match n {
        0 => Vec::new(),
        1 => vec![-c[0] / c[1]],
        _ => {
            let lead = c[n];
            let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, ck| m.max((ck / lead).abs()));
            let mut crit: Vec<f64> = real_roots(&derivative(c))
                .into_iter()
                .filter(|x| x.abs() < bound)
                .collect();
            crit.dedup();

            let mut knots = Vec::with_capacity(crit.len() + 2);
            knots.push((-bound, eval(c, -bound)));
            let mut roots = Vec::new();
            for x in crit {
                let v = eval(c, x);
                if v.abs() <= TOUCH_TOL * eval_scale(c, x) {
                    roots.push(x);
                    knots.push((x, 0.0));
                } else {
                    knots.push((x, v));
                }
            }
            knots.push((bound, eval(c, bound)));

            for w in knots.windows(2) {
                let ((lo, flo), (hi, fhi)) = (w[0], w[1]);
                if flo != 0.0 && fhi != 0.0 && (flo < 0.0) != (fhi < 0.0) {
                    roots.push(bisect(c, lo, hi, flo));
                }
            }
            roots.sort_by(|a, b| a.total_cmp(b));
            roots
        }
    }
}

fn bisect(c: &[f64], mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let lo_neg = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    polish(c, 0.5 * (lo + hi))
}

/// Newton steps that are kept only while they reduce the residual.
pub fn polish(c: &[f64], mut x: f64) -> f64 {
    let dc = derivative(c);
    let mut fx = eval(c, x).abs();
    for _ in 0..4 {
        let d = eval(&dc, x);
        if d == 0.0 || fx == 0.0 {
            break;
        }
        let cand = x - eval(c, x) / d;
        let fc = eval(c, cand).abs();
        if fc < fx {
            x = cand;
            fx = fc;
        } else {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[f64]) -> Vec<f64> {
        let mut c = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        c
    }

    #[test]
    fn distinct_roots() {
        let c = from_roots(&[-3.0, -0.5, 1.0, 2.5]);
        let r = real_roots(&c);
        let expect = [-3.0, -0.5, 1.0, 2.5];
        assert_eq!(r.len(), 4);
        for (a, b) in r.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn double_root() {
        let c = from_roots(&[1.0, 1.0, -2.0]);
        let r = real_roots(&c);
        assert!(r.iter().any(|x| (x - 1.0).abs() < 1e-6), "{r:?}");
        assert!(r.iter().any(|x| (x + 2.0).abs() < 1e-12), "{r:?}");
    }

    #[test]
    fn no_roots() {
        assert!(real_roots(&[1.0, 0.0, 0.0, 0.0, 1.0]).is_empty());
        assert!(real_roots(&[2.0, 0.0, 1.0]).is_empty());
    }

    #[test]
    fn linear_and_constant() {
        assert_eq!(real_roots(&[3.0]), Vec::<f64>::new());
        assert_eq!(real_roots(&[-3.0, 2.0]), vec![1.5]);
    }
}
