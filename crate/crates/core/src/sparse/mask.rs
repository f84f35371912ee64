use rand::Rng;

use crate::error::{Error, Result};

/// One active connection from input neuron `input` to output neuron `output`.
///
/// Ordering is row-major, which is the iteration order of every layer pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Connection {
    pub input: usize,
    pub output: usize,
}

impl Connection {
    pub fn new(input: usize, output: usize) -> Self {
        Self { input, output }
    }
}

/// Binary connectivity of one layer, stored as a sorted coordinate list with
/// row and column offsets for the layer kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    n_in: usize,
    n_out: usize,
    pairs: Vec<Connection>,
    /// `pairs[row_ptr[j]..row_ptr[j + 1]]` leave input `j`.
    row_ptr: Vec<usize>,
    /// `col_idx[col_ptr[k]..col_ptr[k + 1]]` index the pairs entering output
    /// `k`, in increasing input order.
    col_ptr: Vec<usize>,
    col_idx: Vec<u32>,
}

impl Mask {
    /// Validates bounds and uniqueness; the pairs may arrive in any order.
    pub fn new(n_in: usize, n_out: usize, mut pairs: Vec<Connection>) -> Result<Self> {
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidMask(format!(
                "duplicate pair ({}, {})",
                w[0].input, w[0].output
            )));
        }
        if let Some(c) = pairs.iter().find(|c| c.input >= n_in || c.output >= n_out) {
            return Err(Error::InvalidMask(format!(
                "pair ({}, {}) outside {n_in}x{n_out}",
                c.input, c.output
            )));
        }
        Ok(Self::indexed(n_in, n_out, pairs))
    }

    fn indexed(n_in: usize, n_out: usize, pairs: Vec<Connection>) -> Self {
        let mut row_ptr = vec![0usize; n_in + 1];
        let mut col_ptr = vec![0usize; n_out + 1];
        for c in &pairs {
            row_ptr[c.input + 1] += 1;
            col_ptr[c.output + 1] += 1;
        }
        for j in 0..n_in {
            row_ptr[j + 1] += row_ptr[j];
        }
        for k in 0..n_out {
            col_ptr[k + 1] += col_ptr[k];
        }
        let mut fill = col_ptr.clone();
        let mut col_idx = vec![0u32; pairs.len()];
        for (i, c) in pairs.iter().enumerate() {
            col_idx[fill[c.output]] = i as u32;
            fill[c.output] += 1;
        }
        Self {
            n_in,
            n_out,
            pairs,
            row_ptr,
            col_ptr,
            col_idx,
        }
    }

    pub fn dense(n_in: usize, n_out: usize) -> Self {
        let pairs = (0..n_in)
            .flat_map(|j| (0..n_out).map(move |k| Connection::new(j, k)))
            .collect();
        Self::indexed(n_in, n_out, pairs)
    }

    pub fn empty(n_in: usize, n_out: usize) -> Self {
        Self::indexed(n_in, n_out, Vec::new())
    }

    /// Caller guarantees `pairs` is sorted, unique and in bounds.
    pub(crate) fn from_sorted(n_in: usize, n_out: usize, pairs: Vec<Connection>) -> Self {
        debug_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
        Self::indexed(n_in, n_out, pairs)
    }

    /// `row_start(j)` for `j` in `0..=n_in` delimits the rows of `pairs()`.
    pub(crate) fn row_start(&self, j: usize) -> usize {
        self.row_ptr[j]
    }

    /// Indices into `pairs()` entering output `k`, by increasing input.
    pub(crate) fn column(&self, k: usize) -> &[u32] {
        &self.col_idx[self.col_ptr[k]..self.col_ptr[k + 1]]
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// ‖M‖₀
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.n_in * self.n_out
    }

    pub fn is_dense(&self) -> bool {
        self.len() == self.capacity()
    }

    pub fn density(&self) -> f64 {
        if self.capacity() == 0 {
            0.0
        } else {
            self.len() as f64 / self.capacity() as f64
        }
    }

    pub fn pairs(&self) -> &[Connection] {
        &self.pairs
    }

    pub fn position(&self, c: Connection) -> Option<usize> {
        self.pairs.binary_search(&c).ok()
    }

    pub fn contains(&self, input: usize, output: usize) -> bool {
        self.position(Connection::new(input, output)).is_some()
    }

    /// Row-major occupancy over all `n_in * n_out` positions.
    pub fn occupancy(&self) -> Vec<bool> {
        let mut occ = vec![false; self.capacity()];
        for c in &self.pairs {
            occ[c.input * self.n_out + c.output] = true;
        }
        occ
    }
}

/// Number of connections an Erdős–Rényi layer receives: the expected count
/// `lambda * (n_in + n_out)`, rounded and clamped to a fully dense layer.
pub fn er_connection_count(n_in: usize, n_out: usize, lambda: f64) -> usize {
    let target = (lambda * (n_in + n_out) as f64).round();
    let cap = n_in * n_out;
    if target >= cap as f64 {
        cap
    } else {
        target.max(0.0) as usize
    }
}

/// Erdős–Rényi mask with exactly [`er_connection_count`] pairs drawn
/// uniformly without replacement.
pub fn er_mask_init<R: Rng + ?Sized>(n_in: usize, n_out: usize, lambda: f64, rng: &mut R) -> Mask {
    let count = er_connection_count(n_in, n_out, lambda);
    if count == n_in * n_out {
        return Mask::dense(n_in, n_out);
    }
    let mut pairs: Vec<Connection> = rand::seq::index::sample(rng, n_in * n_out, count)
        .into_iter()
        .map(|i| Connection::new(i / n_out, i % n_out))
        .collect();
    pairs.sort_unstable();
    Mask::from_sorted(n_in, n_out, pairs)
}
