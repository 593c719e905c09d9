//! SMO for the epsilon-SVR dual.
//!
//! With `n` training points the dual is written over `l = 2n` variables
//! `a = (alpha, alpha*)`, labels `s_t = +1` for `t < n` and `-1` otherwise:
//!
//! ```text
//! min  1/2 a'Qa + p'a   s.t.  s'a = 0,  0 <= a_t <= C
//! Q_tu = s_t s_u K(x_{t mod n}, x_{u mod n})
//! p_t  = eps - y_t (t < n),   eps + y_{t-n} (t >= n)
//! ```
//!
//! and the regression coefficients are `beta_i = alpha_i - alpha*_i`. Each
//! iteration picks the maximal violating pair
//!
//! ```text
//! i = argmax { -s_t G_t : t in I_up },   j = argmin { -s_t G_t : t in I_low }
//! ```
//!
//! (lowest index on ties) and solves the two-variable subproblem in closed
//! form. The solver stops once `max - min <= tol`.

use super::cache::KernelCache;
use super::kernel::{Kernel, KernelPoint};
use super::SvrHyperParams;

/// Working-set updates allowed when `max_iter` is negative.
pub const UNBOUNDED_ITER_CAP: u64 = 10_000_000;

const TAU: f64 = 1e-12;
const SHRINK_INTERVAL: usize = 1000;

pub(crate) struct Solution {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub iterations: u64,
    pub converged: bool,
}

struct Smo<'a, P> {
    n: usize,
    c: f64,
    tol: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    p: Vec<f64>,
    diag: Vec<f64>,
    active: Vec<usize>,
    cache: KernelCache<'a, P>,
}

impl<'a, P: KernelPoint> Smo<'a, P> {
    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.n {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.n {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    /// `(i, max, j, min)` over the active set; `None` if either set is empty.
    fn extremes(&self) -> Option<(usize, f64, usize, f64)> {
        let mut up: Option<(usize, f64)> = None;
        let mut low: Option<(usize, f64)> = None;
        for &t in &self.active {
            let v = -self.sign(t) * self.grad[t];
            if self.in_up(t) && up.is_none_or(|(_, best)| v > best) {
                up = Some((t, v));
            }
            if self.in_low(t) && low.is_none_or(|(_, best)| v < best) {
                low = Some((t, v));
            }
        }
        match (up, low) {
            (Some((i, hi)), Some((j, lo))) => Some((i, hi, j, lo)),
            _ => None,
        }
    }

    fn select_pair(&self) -> Option<(usize, usize)> {
        let (i, hi, j, lo) = self.extremes()?;
        (hi - lo > self.tol).then_some((i, j))
    }

    fn update(&mut self, i: usize, j: usize) {
        let n = self.n;
        let (si, sj) = (i % n, j % n);
        let row_i = self.cache.row(si);
        let row_j = self.cache.row(sj);
        let (yi, yj) = (self.sign(i), self.sign(j));
        let q_ij = yi * yj * row_i[sj];
        let c = self.c;
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let mut quad = self.diag[si] + self.diag[sj] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else {
                if ai < 0.0 {
                    ai = 0.0;
                    aj = -diff;
                }
                if aj > c {
                    aj = c;
                    ai = c + diff;
                }
            }
        } else {
            let mut quad = self.diag[si] + self.diag[sj] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = sum;
                }
                if ai < 0.0 {
                    ai = 0.0;
                    aj = sum;
                }
            }
        }

        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for k in 0..self.active.len() {
            let t = self.active[k];
            let st = self.sign(t);
            let s = t % n;
            self.grad[t] += st * (yi * row_i[s] * di + yj * row_j[s] * dj);
        }
    }

    /// Drops bounded variables that cannot enter a violating pair any time
    /// soon, following the usual LIBSVM rule.
    fn shrink(&mut self) {
        let Some((_, hi, _, lo)) = self.extremes() else {
            return;
        };
        let (gmax1, gmax2) = (hi, -lo);
        let keep: Vec<usize> = self
            .active
            .iter()
            .copied()
            .filter(|&t| {
                let g = self.grad[t];
                let plus = t < self.n;
                let shrinkable = if self.alpha[t] >= self.c {
                    if plus {
                        -g > gmax1
                    } else {
                        -g > gmax2
                    }
                } else if self.alpha[t] <= 0.0 {
                    if plus {
                        g > gmax2
                    } else {
                        g > gmax1
                    }
                } else {
                    false
                };
                !shrinkable
            })
            .collect();
        self.active = keep;
    }

    fn beta(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.alpha[k] - self.alpha[k + self.n]).collect()
    }

    /// Recomputes the gradient of every variable from scratch and makes all
    /// of them active again.
    fn unshrink(&mut self) {
        let l = 2 * self.n;
        if self.active.len() == l {
            return;
        }
        let beta = self.beta();
        let mut kb = vec![0.0; self.n];
        for (k, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                let row = self.cache.row(k);
                for (acc, kv) in kb.iter_mut().zip(row.iter()) {
                    *acc += b * kv;
                }
            }
        }
        for t in 0..l {
            self.grad[t] = self.p[t] + self.sign(t) * kb[t % self.n];
        }
        self.active = (0..l).collect();
    }

    /// Mean of `s_t G_t` over free variables, or the middle of the feasible
    /// interval when none are free. The model bias is its negation.
    fn rho(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum_free, mut n_free) = (0.0, 0usize);
        for t in 0..2 * self.n {
            let yg = self.sign(t) * self.grad[t];
            let plus = t < self.n;
            if self.alpha[t] >= self.c {
                if plus {
                    lb = lb.max(yg);
                } else {
                    ub = ub.min(yg);
                }
            } else if self.alpha[t] <= 0.0 {
                if plus {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }
}

pub(crate) fn solve<P: KernelPoint>(x: &[P], y: &[f64], params: &SvrHyperParams) -> Solution {
    let n = x.len();
    let kernel = Kernel::from_params(params);
    let diag: Vec<f64> = x.iter().map(|xi| kernel.eval(xi, xi)).collect();
    let p: Vec<f64> = y
        .iter()
        .map(|yi| params.epsilon - yi)
        .chain(y.iter().map(|yi| params.epsilon + yi))
        .collect();

    let mut smo = Smo {
        n,
        c: params.c,
        tol: params.tol,
        alpha: vec![0.0; 2 * n],
        grad: p.clone(),
        p,
        diag,
        active: (0..2 * n).collect(),
        cache: KernelCache::new(x, kernel, params.cache_size_mb),
    };

    let max_iter = if params.max_iter < 0 {
        UNBOUNDED_ITER_CAP
    } else {
        params.max_iter as u64
    };
    let shrink_every = (2 * n).min(SHRINK_INTERVAL);
    let mut countdown = shrink_every;
    let mut iterations = 0u64;
    let mut converged = false;

    while iterations < max_iter {
        if params.shrinking {
            countdown -= 1;
            if countdown == 0 {
                countdown = shrink_every;
                smo.shrink();
            }
        }
        match smo.select_pair() {
            Some((i, j)) => {
                smo.update(i, j);
                iterations += 1;
            }
            None if smo.active.len() < 2 * n => {
                // Optimal on the shrunk problem; check the full one.
                smo.unshrink();
                countdown = shrink_every;
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    smo.unshrink();
    if !converged {
        converged = smo.select_pair().is_none();
    }
    log::debug!(
        "smo: n={n} iterations={iterations} converged={converged} kernel rows computed={}",
        smo.cache.misses
    );

    Solution {
        beta: smo.beta(),
        bias: -smo.rho(),
        iterations,
        converged,
    }
}
