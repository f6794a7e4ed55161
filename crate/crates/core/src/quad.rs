//! Quadrature rules shared by the norm and inequality computations.

use gauss_quad::legendre::GaussLegendre;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("nonzero"));
    let mut v: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    v
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    gauss_legendre(n).into_iter().map(|(x, w)| (c + h * x, h * w)).collect()
}

/// Composite rule: `panels` equal panels of `n` points each on `[a, b]`.
pub fn composite_gauss_legendre(n: usize, panels: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let base = gauss_legendre(n);
    let len = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let lo = a + p as f64 * len;
        let h = 0.5 * len;
        for &(x, w) in &base {
            out.push((lo + h * (x + 1.0), h * w));
        }
    }
    out
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ` times a
/// uniform rule in `φ`. Exact for spherical polynomials of degree
/// `< min(2 n_theta, n_phi)`.
pub fn sphere_rule(n_theta: usize, n_phi: usize) -> Vec<([f64; 3], f64)> {
    let gl = gauss_legendre(n_theta);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    let wphi = 2.0 * PI / n_phi as f64;
    for &(x, w) in &gl {
        let s = (1.0 - x * x).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * wphi;
            out.push(([s * phi.cos(), s * phi.sin(), x], w * wphi));
        }
    }
    out
}
