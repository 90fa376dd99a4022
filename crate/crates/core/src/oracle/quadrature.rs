//! Gauss-Legendre rules and iterated simplex integration.

use crate::C64;

/// Nodes and weights on `[−1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n <= 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `∫_0^{t} dt_1 ∫_0^{t_1} dt_2 ⋯ ∫_0^{t_{d−1}} dt_d g(t_1, …, t_d)` by iterated rules.
///
/// Works for negative `t` (reversed limits).
pub fn simplex_integral<F>(dim: usize, t: f64, nodes: usize, g: &F) -> C64
where
    F: Fn(&[f64]) -> C64,
{
    let (x, w) = gauss_legendre(nodes);
    let mut times = vec![0.0; dim];
    nest(0, t, &x, &w, &mut times, g)
}

fn nest<F>(level: usize, upper: f64, x: &[f64], w: &[f64], times: &mut Vec<f64>, g: &F) -> C64
where
    F: Fn(&[f64]) -> C64,
{
    if level == times.len() {
        return g(times);
    }
    let half = 0.5 * upper;
    let mut acc = C64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let s = half * (xi + 1.0);
        times[level] = s;
        acc += nest(level + 1, s, x, w, times, g) * (wi * half);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^14 = 2/15
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_volume() {
        // ∫ over the ordered simplex of 1 is t^d/d!
        let v = simplex_integral(3, 1.5, 16, &|_| C64::new(1.0, 0.0));
        assert!((v.re - 1.5f64.powi(3) / 6.0).abs() < 1e-14);
        let v = simplex_integral(2, -1.0, 16, &|_| C64::new(1.0, 0.0));
        assert!((v.re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn nodes_sorted_symmetric() {
        for n in [1, 2, 7, 32, 64] {
            let (x, _) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i]).abs() < 1e-15);
            }
        }
    }
}
