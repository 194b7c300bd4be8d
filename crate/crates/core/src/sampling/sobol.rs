//! Sobol low-discrepancy sequence generator.
//!
//! Gray-code construction with Joe-Kuo direction numbers for up to 16
//! dimensions. Point index 0 is the all-zeros corner; callers normally skip
//! it (`skip = 1`) because a corner collocation point adds no information
//! and can sit on coefficient singularities.

use crate::{Error, Result};

/// Largest supported dimension.
pub const MAX_SOBOL_DIM: usize = 16;

const BITS: usize = 32;

/// Joe-Kuo primitive-polynomial parameters `(s, a, m[0..s])` for dimensions
/// 2..=16 (dimension 1 is the van der Corput sequence in base 2).
const JOE_KUO: [(usize, u32, [u32; 6]); 15] = [
    (1, 0, [1, 0, 0, 0, 0, 0]),
    (2, 1, [1, 3, 0, 0, 0, 0]),
    (3, 1, [1, 3, 1, 0, 0, 0]),
    (3, 2, [1, 1, 1, 0, 0, 0]),
    (4, 1, [1, 1, 3, 3, 0, 0]),
    (4, 4, [1, 3, 5, 13, 0, 0]),
    (5, 2, [1, 1, 5, 5, 17, 0]),
    (5, 4, [1, 1, 5, 5, 5, 0]),
    (5, 7, [1, 1, 7, 11, 19, 0]),
    (5, 11, [1, 1, 5, 1, 1, 0]),
    (5, 13, [1, 1, 1, 3, 11, 0]),
    (5, 14, [1, 3, 5, 5, 31, 0]),
    (6, 1, [1, 3, 3, 9, 7, 49]),
    (6, 13, [1, 1, 1, 15, 21, 21]),
    (6, 16, [1, 3, 1, 13, 27, 49]),
];

fn direction_numbers(dim_index: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim_index == 0 {
        for (c, slot) in v.iter_mut().enumerate() {
            *slot = 1u32 << (31 - c);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim_index - 1];
    for c in 0..s {
        v[c] = m[c] << (31 - c);
    }
    for c in s..BITS {
        let mut val = v[c - s] ^ (v[c - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                val ^= v[c - k];
            }
        }
        v[c] = val;
    }
    v
}

/// Streaming Sobol generator in `dim` dimensions.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    dirs: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u32,
}

impl SobolSequence {
    /// Create a generator positioned before point index 0 (the origin).
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_SOBOL_DIM {
            return Err(Error::UnsupportedDimension {
                dim,
                max: MAX_SOBOL_DIM,
            });
        }
        Ok(SobolSequence {
            dirs: (0..dim).map(direction_numbers).collect(),
            state: vec![0; dim],
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// Advance and write the next point into `out` (length `dim`).
    ///
    /// The first call yields point index 0, the all-zeros corner.
    pub fn next_point(&mut self, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim(), "output slice length must match dim");
        if self.index > 0 {
            let c = (!(self.index - 1)).trailing_zeros() as usize;
            for (x, dirs) in self.state.iter_mut().zip(&self.dirs) {
                *x ^= dirs[c];
            }
        }
        self.index += 1;
        for (o, &x) in out.iter_mut().zip(&self.state) {
            *o = x as f64 / 4294967296.0;
        }
    }

    /// Discard the next `n` points.
    pub fn skip(&mut self, n: usize) {
        let mut buf = vec![0.0; self.dim()];
        for _ in 0..n {
            self.next_point(&mut buf);
        }
    }
}

/// First `n` Sobol points in `[0, 1)^dim` after discarding `skip` points.
///
/// Deterministic: identical `(dim, n, skip)` always yields bit-identical
/// output. `skip = 1` drops the all-zeros corner point.
pub fn sobol_sequence(dim: usize, n: usize, skip: usize) -> Result<Vec<Vec<f64>>> {
    let mut seq = SobolSequence::new(dim)?;
    seq.skip(skip);
    let mut points = Vec::with_capacity(n);
    let mut buf = vec![0.0; dim];
    for _ in 0..n {
        seq.next_point(&mut buf);
        points.push(buf.clone());
    }
    Ok(points)
}
