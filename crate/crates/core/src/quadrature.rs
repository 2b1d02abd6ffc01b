//! Gauss-Jacobi and Gauss-Legendre rules.
//!
//! Nodes are the eigenvalues of the symmetric Jacobi matrix of the weight
//! `(1 - x)^a (1 + x)^b`, located by Sturm-sequence bisection. Weights are
//! Christoffel numbers `mu0 / sum_j p_j(x)^2` from the orthonormal three-term
//! recurrence, so no derivative formula or large-argument gamma is needed.
//! Rules are cached per `(nodes, a, b)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

/// Nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrates `w(x) f(x)` over `[lo, hi]`, where `w` is the rule's weight
    /// mapped affinely from `[-1, 1]`. The weight itself is not rescaled.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped to `[lo, hi]` for the unit weight (Legendre).
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

type Key = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<Key, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Jacobi rule with `n` nodes for the weight `(1 - x)^a (1 + x)^b`.
///
/// Panics if `n == 0` or if `a <= -1` or `b <= -1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Arc<Rule> {
    assert!(n > 0, "a quadrature rule needs at least one node");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build(n, a, b));
    cache().lock().unwrap().insert(key, Arc::clone(&rule));
    rule
}

pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}

fn jacobi_matrix(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    // off[j] couples rows j-1 and j; off[0] is unused.
    let mut off = vec![0.0; n];
    for (j, d) in diag.iter_mut().enumerate() {
        let jf = j as f64;
        let s = 2.0 * jf + a + b;
        *d = if j == 0 {
            (b - a) / (a + b + 2.0)
        } else if b * b == a * a {
            0.0
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
    }
    for (j, o) in off.iter_mut().enumerate().skip(1) {
        let jf = j as f64;
        let s = 2.0 * jf + a + b;
        let sq = if j == 1 {
            // (j + a + b) cancels against (2j + a + b - 1) at j = 1.
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
        } else {
            4.0 * jf * (jf + a) * (jf + b) * (jf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
        };
        *o = sq.sqrt();
    }
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for j in 0..diag.len() {
        let coupling = if j == 0 { 0.0 } else { off[j] * off[j] / q };
        q = diag[j] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (diag[j].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn build(n: usize, a: f64, b: f64) -> Rule {
    let (diag, off) = jacobi_matrix(n, a, b);
    let mut nodes = Vec::with_capacity(n);
    for k in 0..n {
        // k-th smallest eigenvalue lies in [-1, 1].
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&diag, &off, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        nodes.push(0.5 * (lo + hi));
    }
    let ln_mu0 = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0);
    let mu0 = ln_mu0.exp();
    let weights = nodes
        .iter()
        .map(|&x| {
            let mut p_prev = 0.0;
            let mut p = 1.0 / mu0.sqrt();
            let mut sum = p * p;
            for j in 0..n - 1 {
                let next = ((x - diag[j]) * p - if j == 0 { 0.0 } else { off[j] * p_prev }) / off[j + 1];
                p_prev = p;
                p = next;
                sum += p * p;
            }
            1.0 / sum
        })
        .collect();
    Rule { nodes, weights }
}
