//! Gauss–Legendre rules and Legendre polynomials on `[-1, 1]`.

/// Values `P_0(x), ..., P_n(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for j in 1..n {
        let jf = j as f64;
        p.push(((2.0 * jf + 1.0) * x * p[j] - jf * p[j - 1]) / (jf + 1.0));
    }
    p
}

/// Derivatives `P_0'(x), ..., P_n'(x)`, using `P_{j+1}' = P_{j-1}' + (2j+1) P_j`.
pub fn legendre_derivative(n: usize, x: f64) -> Vec<f64> {
    let p = legendre(n, x);
    let mut d = vec![0.0; n + 1];
    if n >= 1 {
        d[1] = 1.0;
    }
    for j in 1..n {
        d[j + 1] = d[j - 1] + (2.0 * j as f64 + 1.0) * p[j];
    }
    d
}

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Newton iteration from the Chebyshev-like initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = value_and_slope(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = value_and_slope(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

/// `P_n(x)` and `P_n'(x)` for `n >= 1`, `|x| < 1`.
fn value_and_slope(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, n as f64 * (x * cur - prev) / (x * x - 1.0))
}
