use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::kernel::{Kernel, KernelPoint};

const MIN_ROWS: usize = 2;

/// Least-recently-used cache of kernel matrix rows, sized in megabytes.
pub(crate) struct KernelCache<'a, P> {
    points: &'a [P],
    kernel: Kernel,
    capacity: usize,
    rows: HashMap<usize, (Rc<[f64]>, u64)>,
    // tick -> row index, oldest first
    recency: BTreeMap<u64, usize>,
    tick: u64,
    pub misses: u64,
}

impl<'a, P: KernelPoint> KernelCache<'a, P> {
    pub fn new(points: &'a [P], kernel: Kernel, cache_size_mb: usize) -> Self {
        let row_bytes = (points.len().max(1) * std::mem::size_of::<f64>()) as u128;
        let budget = cache_size_mb as u128 * 1024 * 1024;
        let capacity = ((budget / row_bytes) as usize).max(MIN_ROWS);
        Self {
            points,
            kernel,
            capacity,
            rows: HashMap::new(),
            recency: BTreeMap::new(),
            tick: 0,
            misses: 0,
        }
    }

    #[cfg(test)]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Row `i` of the kernel matrix: `K(x_i, x_j)` for every `j`.
    pub fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.tick += 1;
        let tick = self.tick;
        if let Some((row, last)) = self.rows.get_mut(&i) {
            self.recency.remove(last);
            *last = tick;
            self.recency.insert(tick, i);
            return Rc::clone(row);
        }

        self.misses += 1;
        if self.rows.len() >= self.capacity {
            if let Some((_, victim)) = self.recency.pop_first() {
                self.rows.remove(&victim);
            }
        }
        let xi = &self.points[i];
        let row: Rc<[f64]> = self.points.iter().map(|xj| self.kernel.eval(xi, xj)).collect();
        self.rows.insert(i, (Rc::clone(&row), tick));
        self.recency.insert(tick, i);
        row
    }
}
