//! Gauss-Hermite quadrature for integrals against exp(-x^2).
//!
//! Nodes and weights come from the Golub-Welsch eigenproblem of the Hermite
//! Jacobi matrix. The implicit-shift QL iteration below tracks only the first
//! row of the eigenvector matrix (all a weight needs), so building a rule is
//! O(n^2) and a 1024-node rule costs about a millisecond.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Build the n-point rule: sum_i w_i f(x_i) ~ integral exp(-x^2) f(x) dx,
    /// exact for polynomials of degree 2n - 1.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        // Jacobi matrix for physicists' Hermite: zero diagonal,
        // off-diagonal b_k = sqrt(k / 2).
        let mut d = vec![0.0f64; n];
        let mut e: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
        e.push(0.0);
        let mut z = vec![0.0f64; n];
        z[0] = 1.0;
        ql_first_row(&mut d, &mut e, &mut z);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut nodes: Vec<f64> = order.iter().map(|&i| d[i]).collect();
        let mut weights: Vec<f64> = order.iter().map(|&i| sqrt_pi * z[i] * z[i]).collect();

        // The rule is symmetric about zero; enforce that exactly so even
        // integrands come out bit-symmetric.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }

        GaussHermite { nodes, weights }
    }

    /// Shared rules for the refinement ladder; built once per size.
    pub fn cached(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry(n).or_insert_with(|| Arc::new(GaussHermite::new(n))).clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Tensor-product integral sum_ij w_i w_j f(x_i, x_j).
    pub fn integrate_2d(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (&xi, &wi) in self.nodes.iter().zip(&self.weights) {
            let mut row = 0.0;
            for (&xj, &wj) in self.nodes.iter().zip(&self.weights) {
                row += wj * f(xi, xj);
            }
            total += wi * row;
        }
        total
    }
}

/// Implicit-shift QL for a symmetric tridiagonal matrix, accumulating the
/// rotations into a single row vector `z` instead of the full eigenvector
/// matrix. `d` holds the diagonal (eigenvalues on exit), `e` the off-diagonal
/// in e[0..n-1] with e[n-1] scratch.
fn ql_first_row(d: &mut [f64], e: &mut [f64], z: &mut [f64]) {
    let n = d.len();
    if n == 1 {
        return;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "QL iteration failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if r == 0.0 && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}
