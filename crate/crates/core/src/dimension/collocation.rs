//! Chebyshev collocation of the transfer operator
//! `L_s f(x) = sum_a (a + x)^{-2s} f(1/(a + x))` on `[0, 1]`.
//!
//! Digits `a <= M` are applied exactly through barycentric interpolation.
//! With the tail enabled, digits `a > M` are summed through a Taylor expansion
//! of `f` at 0, whose coefficients come from the differentiation matrix and
//! whose digit sums are Hurwitz zeta values.

use std::f64::consts::PI;

const TAIL_TERMS: usize = 5;

pub struct Collocation {
    nodes: Vec<f64>,
    bary: Vec<f64>,
    max_digit: u32,
    // row m: weights giving f^{(m)}(0) / m! from node values
    taylor_rows: Option<Vec<Vec<f64>>>,
}

impl Collocation {
    /// `order + 1` Chebyshev-Lobatto nodes on `[0, 1]`.
    pub fn new(order: usize, max_digit: u32, zeta_tail: bool) -> Self {
        let n = order;
        let nodes: Vec<f64> = (0..=n).map(|i| 0.5 * (1.0 - (PI * i as f64 / n as f64).cos())).collect();
        let bary: Vec<f64> = (0..=n)
            .map(|j| {
                let w = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * w
                } else {
                    w
                }
            })
            .collect();
        let mut c = Collocation { nodes, bary, max_digit, taylor_rows: None };
        if zeta_tail {
            c.taylor_rows = Some(c.taylor_rows());
        }
        c
    }

    fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Values of every Lagrange basis polynomial at `y`.
    fn basis_at(&self, y: f64, out: &mut [f64]) {
        if let Some(j) = self.nodes.iter().position(|&x| x == y) {
            out.fill(0.0);
            out[j] = 1.0;
            return;
        }
        let mut total = 0.0;
        for (j, (x, w)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let t = w / (y - x);
            out[j] = t;
            total += t;
        }
        for v in out.iter_mut() {
            *v /= total;
        }
    }

    fn diff_matrix(&self) -> Vec<f64> {
        let n = self.size();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let v = (self.bary[j] / self.bary[i]) / (self.nodes[i] - self.nodes[j]);
                    d[i * n + j] = v;
                    diag -= v;
                }
            }
            d[i * n + i] = diag;
        }
        d
    }

    fn taylor_rows(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        let d = self.diff_matrix();
        // node 0 sits at x = 0
        let mut row = vec![0.0; n];
        row[0] = 1.0;
        let mut rows = vec![row.clone()];
        let mut fact = 1.0;
        for m in 1..TAIL_TERMS {
            let mut next = vec![0.0; n];
            for (k, rk) in row.iter().enumerate() {
                if *rk != 0.0 {
                    for j in 0..n {
                        next[j] += rk * d[k * n + j];
                    }
                }
            }
            row = next;
            fact *= m as f64;
            rows.push(row.iter().map(|v| v / fact).collect());
        }
        rows
    }

    /// The collocation matrix of `L_s`, row-major.
    pub fn matrix(&self, s: f64) -> Vec<f64> {
        let n = self.size();
        let mut a = vec![0.0; n * n];
        let mut basis = vec![0.0; n];
        for i in 0..n {
            let x = self.nodes[i];
            let row = &mut a[i * n..(i + 1) * n];
            for d in 1..=self.max_digit {
                let g = d as f64 + x;
                let w = g.powf(-2.0 * s);
                self.basis_at(1.0 / g, &mut basis);
                for (r, b) in row.iter_mut().zip(&basis) {
                    *r += w * b;
                }
            }
            if let Some(rows) = &self.taylor_rows {
                let q = self.max_digit as f64 + 1.0 + x;
                for (m, coeffs) in rows.iter().enumerate() {
                    let z = hurwitz_zeta(2.0 * s + m as f64, q);
                    for (r, c) in row.iter_mut().zip(coeffs) {
                        *r += z * c;
                    }
                }
            }
        }
        a
    }

    /// Leading eigenvalue by power iteration.
    pub fn eigenvalue(&self, s: f64) -> f64 {
        let n = self.size();
        let a = self.matrix(s);
        let mut v = vec![1.0; n];
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let mut w: Vec<f64> = (0..n).map(|i| a[i * n..(i + 1) * n].iter().zip(&v).map(|(x, y)| x * y).sum()).collect();
            let norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if !(norm > 0.0 && norm.is_finite()) {
                return norm;
            }
            // v is normalized to max-norm 1, so the growth factor is the eigenvalue estimate
            let next = norm * w[0].signum() * v[0].signum();
            for x in w.iter_mut() {
                *x /= norm;
            }
            let done = (next - lambda).abs() <= 1e-15 * next.abs();
            lambda = next;
            v = w;
            if done {
                break;
            }
        }
        lambda
    }

    /// `ln lambda(s)`; `+inf` when the tail sum diverges (`s <= 1/2`).
    pub fn ln_eigenvalue(&self, s: f64) -> f64 {
        if self.taylor_rows.is_some() && 2.0 * s <= 1.0 {
            return f64::INFINITY;
        }
        self.eigenvalue(s).ln()
    }
}

/// `zeta(sigma, q) = sum_{k >= 0} (q + k)^{-sigma}` for `sigma > 1`, `q > 0`,
/// by Euler-Maclaurin summation.
pub fn hurwitz_zeta(sigma: f64, q: f64) -> f64 {
    // B_2, B_4, ..., B_12
    const BERNOULLI: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
    let shift = (12.0 - q).max(0.0).ceil() as usize;
    let mut sum: f64 = (0..shift).map(|k| (q + k as f64).powf(-sigma)).sum();
    let x = q + shift as f64;
    sum += x.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * x.powf(-sigma);
    // term_j = B_{2j}/(2j)! * sigma (sigma+1) ... (sigma+2j-2) * x^{-sigma-2j+1}
    let mut factor = sigma * x.powf(-sigma - 1.0) / 2.0;
    for (j, b) in BERNOULLI.iter().enumerate() {
        sum += b * factor;
        let k = 2.0 * (j as f64 + 1.0);
        factor *= (sigma + k - 1.0) * (sigma + k) / ((k + 1.0) * (k + 2.0) * x * x);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_known_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        // zeta(2, 1/2) = pi^2/2
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-13);
        // shift identity
        let (s, q) = (1.7, 3.25);
        assert!((hurwitz_zeta(s, q) - q.powf(-s) - hurwitz_zeta(s, q + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn gauss_operator_has_eigenvalue_one_at_s_one() {
        let c = Collocation::new(32, 40, true);
        assert!((c.eigenvalue(1.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn interpolation_is_exact_on_polynomials() {
        let c = Collocation::new(10, 1, false);
        let f: Vec<f64> = c.nodes.iter().map(|x| x * x * x - 2.0 * x + 0.5).collect();
        let mut b = vec![0.0; c.size()];
        c.basis_at(0.3141, &mut b);
        let v: f64 = b.iter().zip(&f).map(|(x, y)| x * y).sum();
        let y = 0.3141f64;
        assert!((v - (y * y * y - 2.0 * y + 0.5)).abs() < 1e-14);
    }
}
