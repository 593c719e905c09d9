//! Brute-force epsilon-SVR dual solver for tiny problems.
//!
//! Every coefficient is at -C, strictly between -C and 0, at 0, strictly
//! between 0 and C, or at C. For each of the 5^n assignments the free
//! coefficients and the bias solve a linear system (stationarity plus the
//! equality constraint); an assignment whose solution is consistent and
//! satisfies the optimality conditions of every fixed coefficient is a
//! global optimum of the concave dual.

pub fn linear_kernel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rbf_kernel(gamma: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
    move |a, b| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        (-gamma * d).exp()
    }
}

pub fn gram(x: &[Vec<f64>], k: impl Fn(&[f64], &[f64]) -> f64) -> Vec<Vec<f64>> {
    x.iter().map(|a| x.iter().map(|b| k(a, b)).collect()).collect()
}

pub fn objective(k: &[Vec<f64>], y: &[f64], beta: &[f64], eps: f64) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * beta[j] * k[i][j];
        }
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let lin: f64 = y.iter().zip(beta).map(|(a, b)| a * b).sum();
    -0.5 * quad - eps * l1 + lin
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting; `None`
/// when a pivot is too small.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let pivot_row = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum State {
    LowerBound,
    FreeNegative,
    Zero,
    FreePositive,
    UpperBound,
}

const STATES: [State; 5] = [
    State::LowerBound,
    State::FreeNegative,
    State::Zero,
    State::FreePositive,
    State::UpperBound,
];

/// Best optimality-certified assignment, or `None` if none passes (which
/// would indicate a numerical problem with the oracle itself).
pub fn solve(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> Option<OracleSolution> {
    let n = y.len();
    let slack = 1e-9 * (1.0 + c);
    let mut best: Option<OracleSolution> = None;
    let total = 5usize.pow(n as u32);
    for code in 0..total {
        let mut states = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            states.push(STATES[rest % 5]);
            rest /= 5;
        }
        let mut beta = vec![0.0; n];
        let mut free = Vec::new();
        for (i, s) in states.iter().enumerate() {
            match s {
                State::LowerBound => beta[i] = -c,
                State::UpperBound => beta[i] = c,
                State::Zero => {}
                State::FreeNegative | State::FreePositive => free.push(i),
            }
        }
        let fixed_sum: f64 = beta.iter().sum();
        let bias;
        if free.is_empty() {
            if fixed_sum.abs() > slack {
                continue;
            }
            // Any bias inside the interval allowed by the fixed coefficients.
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..n {
                let g: f64 = (0..n).map(|j| k[i][j] * beta[j]).sum();
                let r = y[i] - g;
                match states[i] {
                    State::Zero => {
                        lo = lo.max(r - eps);
                        hi = hi.min(r + eps);
                    }
                    State::UpperBound => hi = hi.min(r - eps),
                    State::LowerBound => lo = lo.max(r + eps),
                    _ => unreachable!(),
                }
            }
            if lo > hi + 1e-9 {
                continue;
            }
            bias = if lo.is_finite() && hi.is_finite() {
                (lo + hi) / 2.0
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
        } else {
            // Unknowns: beta over `free`, then the bias.
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (col, &j) in free.iter().enumerate() {
                    a[r][col] = k[i][j];
                }
                a[r][m] = 1.0;
                let sign = if states[i] == State::FreePositive { 1.0 } else { -1.0 };
                let fixed: f64 = (0..n).map(|j| k[i][j] * beta[j]).sum();
                rhs[r] = y[i] - eps * sign - fixed;
            }
            a[m][..m].fill(1.0);
            rhs[m] = -fixed_sum;
            let Some(sol) = solve_linear(a, rhs) else { continue };
            let mut ok = true;
            for (r, &i) in free.iter().enumerate() {
                let v = sol[r];
                let in_range = match states[i] {
                    State::FreePositive => v > -slack && v < c + slack,
                    _ => v < slack && v > -c - slack,
                };
                ok &= in_range;
                beta[i] = v;
            }
            if !ok {
                continue;
            }
            bias = sol[m];
            // Fixed coefficients must satisfy their conditions at this bias.
            for i in 0..n {
                let f: f64 = (0..n).map(|j| k[i][j] * beta[j]).sum::<f64>() + bias;
                let r = y[i] - f;
                ok &= match states[i] {
                    State::Zero => r.abs() <= eps + 1e-9,
                    State::UpperBound => r >= eps - 1e-9,
                    State::LowerBound => r <= -eps + 1e-9,
                    _ => true,
                };
            }
            if !ok {
                continue;
            }
        }
        let obj = objective(k, y, &beta, eps);
        if best.as_ref().is_none_or(|b| obj > b.objective) {
            best = Some(OracleSolution {
                beta,
                bias,
                objective: obj,
            });
        }
    }
    best
}

/// Largest violation of the optimality conditions at `(beta, bias)`:
/// residual `r_i = y_i - f(x_i)` must be within the tube for zero
/// coefficients, on its edge for free ones, and outside it for bounded
/// ones.
pub fn kkt_violation(k: &[Vec<f64>], y: &[f64], beta: &[f64], bias: f64, c: f64, eps: f64) -> f64 {
    let n = y.len();
    let tiny = 1e-12;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| k[i][j] * beta[j]).sum::<f64>() + bias;
        let r = y[i] - f;
        let b = beta[i];
        let v = if b.abs() <= tiny {
            (r.abs() - eps).max(0.0)
        } else if b >= c - tiny {
            (eps - r).max(0.0)
        } else if b <= -c + tiny {
            (r + eps).max(0.0)
        } else if b > 0.0 {
            (r - eps).abs()
        } else {
            (r + eps).abs()
        };
        worst = worst.max(v);
    }
    let sum: f64 = beta.iter().sum();
    worst.max(sum.abs()).max(beta.iter().map(|b| (b.abs() - c).max(0.0)).fold(0.0, f64::max))
}
