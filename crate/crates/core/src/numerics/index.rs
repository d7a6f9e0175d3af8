use super::{max_abs_diff, CMatrix, Tolerance};

/// Sorted fingerprint index for lookup of matrices up to `eq_tol` in max-abs norm.
pub(crate) struct ApproxIndex {
    weights: Vec<(f64, f64)>,
    keys: Vec<(f64, usize)>,
    window: f64,
    eq_tol: f64,
}

impl ApproxIndex {
    pub(crate) fn new(entries: usize, tol: &Tolerance) -> Self {
        let weights: Vec<(f64, f64)> = (0..entries)
            .map(|k| {
                let x = k as f64;
                (
                    (0.618_033_988 * (x + 1.0)).fract(),
                    (0.414_213_562 * (x + 2.0)).fract(),
                )
            })
            .collect();
        let mass: f64 = weights.iter().map(|(a, b)| a + b).sum();
        ApproxIndex {
            weights,
            keys: Vec::new(),
            window: mass * tol.eq_tol,
            eq_tol: tol.eq_tol,
        }
    }

    fn fingerprint(&self, m: &CMatrix) -> f64 {
        m.iter()
            .zip(&self.weights)
            .map(|(z, (a, b))| z.re * a + z.im * b)
            .sum()
    }

    /// Indices whose stored matrix lies within `eq_tol` of `m`, in insertion-key order.
    pub(crate) fn matches<'a>(
        &'a self,
        m: &'a CMatrix,
        items: &'a [CMatrix],
    ) -> impl Iterator<Item = usize> + 'a {
        let f = self.fingerprint(m);
        let start = self.keys.partition_point(|(k, _)| *k < f - self.window);
        self.keys[start..]
            .iter()
            .take_while(move |(k, _)| *k <= f + self.window)
            .map(|&(_, i)| i)
            .filter(move |&i| max_abs_diff(&items[i], m) <= self.eq_tol)
    }

    pub(crate) fn find(&self, m: &CMatrix, items: &[CMatrix]) -> Option<usize> {
        self.matches(m, items).next()
    }

    pub(crate) fn insert(&mut self, m: &CMatrix, index: usize) {
        let f = self.fingerprint(m);
        let pos = self.keys.partition_point(|(k, _)| *k < f);
        self.keys.insert(pos, (f, index));
    }
}
