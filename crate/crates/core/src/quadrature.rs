//! Gauss–Legendre rules for the off-grid integrals (tails, knot pieces).

use std::sync::OnceLock;

const ORDER: usize = 16;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order rule on `[a, b]`.
pub(crate) fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (nodes, weights) = rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Integral over `[t0, ∞)` on panels of doubling length starting at `scale`.
///
/// Returns the value and an estimate of the neglected remainder.
pub(crate) fn tail_integral(mut f: impl FnMut(f64, f64, f64) -> f64, t0: f64, scale: f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut prev = f64::NAN;
    let mut quiet = 0;
    let mut k = 0;
    loop {
        let a = t0 + scale * ((2.0f64).powi(k) - 1.0);
        let b = t0 + scale * ((2.0f64).powi(k + 1) - 1.0);
        let c = f(a, b, total);
        total += c;
        if c.abs() <= 1e-17 * total.abs() || c == 0.0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 3 && k >= 4 {
            return (total, 3.0 * c.abs());
        }
        if b > 1e250 || k >= 900 {
            let r = c.abs() / prev.abs();
            let rest = if r < 1.0 { c.abs() * r / (1.0 - r) } else { f64::INFINITY };
            return (total, rest);
        }
        prev = c;
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0);
        assert!((v - (256.0 / 8.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn tails() {
        let (v, err) = tail_integral(|a, b, _| integrate(|t| (-t).exp(), a, b), 1.0, 1.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-14);
        assert!(err < 1e-14);
        let (v, _) = tail_integral(|a, b, _| integrate(|t| (1.0 + t).powi(-3), a, b), 0.0, 1.0);
        assert!((v - 0.5).abs() < 1e-13);
    }
}
