//! Small numeric building blocks shared across modules: compensated
//! summation, a Fenwick tree for O(log n) categorical sampling, least-squares
//! log-log slopes, FNV-1a hashing, and the fixed float formatting used by
//! every report writer.

/// Neumaier (improved Kahan) compensated accumulator.
///
/// Used for every sum over 10^4–10^5 coordinates so that normalization
/// constants meet their 1e-9 tolerance targets independently of summation
/// order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut acc = Accumulator::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Fenwick (binary indexed) tree over nonnegative weights, supporting
/// point updates, prefix sums, and inverse lookup — the sampling backbone
/// of the Chinese-restaurant simulators.
///
/// Capacity is fixed at construction; `len` grows as slots are appended.
#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<f64>,
    /// Raw per-slot weights, kept so the tree can be rebuilt exactly when
    /// it outgrows its capacity (prefix differences would reintroduce
    /// rounding and break bit-reproducible replays).
    raw: Vec<f64>,
    len: usize,
}

impl Fenwick {
    /// Tree with room for `capacity` slots, all initially absent; grows
    /// (by exact rebuild) if more are pushed.
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            tree: vec![0.0; capacity + 1],
            raw: Vec::with_capacity(capacity),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends a new slot with the given weight and returns its index.
    pub fn push(&mut self, weight: f64) -> usize {
        if self.len + 1 >= self.tree.len() {
            self.grow();
        }
        let idx = self.len;
        self.len += 1;
        self.raw.push(0.0);
        if weight != 0.0 {
            self.update(idx, weight);
        }
        idx
    }

    /// Adds `delta` to slot `idx`.
    pub fn update(&mut self, idx: usize, delta: f64) {
        debug_assert!(idx < self.len);
        self.raw[idx] += delta;
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Doubles capacity, reinserting the exact raw weights.
    fn grow(&mut self) {
        let new_cap = (self.tree.len() - 1).max(4) * 2;
        self.tree = vec![0.0; new_cap + 1];
        for (idx, &w) in self.raw.iter().enumerate() {
            if w != 0.0 {
                let mut i = idx + 1;
                while i < self.tree.len() {
                    self.tree[i] += w;
                    i += i & i.wrapping_neg();
                }
            }
        }
    }

    /// Sum of weights of slots `0..=idx`. An empty tree sums to zero.
    pub fn prefix_sum(&self, idx: usize) -> f64 {
        let mut i = idx.saturating_add(1).min(self.len);
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Total weight.
    pub fn total(&self) -> f64 {
        self.prefix_sum(self.len.wrapping_sub(1))
    }

    /// Smallest index whose prefix sum exceeds `x` (standard Fenwick
    /// descent). `x` must lie in `[0, total)`; out-of-range values clamp to
    /// the last occupied slot, which keeps callers safe against the
    /// accumulated float error of incrementally-maintained totals.
    pub fn search(&self, x: f64) -> usize {
        let mut x = x;
        let mut pos = 0usize;
        let mut mask = self.tree.len().next_power_of_two() >> 1;
        while mask > 0 {
            let next = pos + mask;
            if next < self.tree.len() && self.tree[next] <= x {
                x -= self.tree[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(self.len.saturating_sub(1))
    }
}

/// Ordinary least-squares slope of `ln y` against `ln x`.
///
/// Pairs with non-positive coordinates are skipped; at least two usable
/// points are required, otherwise `None`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in usable {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// FNV-1a 64-bit hash; used to fingerprint effective configurations in
/// report headers.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Canonical float formatting for report files: scientific notation with 9
/// significant digits. Every writer goes through this so reruns are
/// byte-identical.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}
