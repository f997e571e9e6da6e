//! Bipartite Schmidt decomposition across an arbitrary split of the parties.

use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dominant_index, fix_phase, svd};
use crate::state::{party_label, strides, MultiIndex, State};

/// Relative gap below which neighbouring Schmidt coefficients share a cluster.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// A split of the party set `{0, …, n−1}` into two nonempty halves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    /// `left` lists the parties on the row side; the rest go to the columns.
    pub fn new(left: &[usize], n_parties: usize) -> Result<Self> {
        let mut in_left = vec![false; n_parties];
        for &p in left {
            if p >= n_parties {
                return Err(Error::InvalidBipartition(format!(
                    "party {p} does not exist in a {n_parties}-party state"
                )));
            }
            if in_left[p] {
                return Err(Error::InvalidBipartition(format!("party {p} listed twice")));
            }
            in_left[p] = true;
        }
        let left: Vec<usize> = (0..n_parties).filter(|&p| in_left[p]).collect();
        let right: Vec<usize> = (0..n_parties).filter(|&p| !in_left[p]).collect();
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidBipartition("both sides must be nonempty".into()));
        }
        Ok(Self { left, right })
    }

    /// Parses `"0|1,2"` or `"0,1"` (right side inferred). Whitespace is ignored.
    pub fn parse(text: &str, n_parties: usize) -> Result<Self> {
        let parse_side = |side: &str| -> Result<Vec<usize>> {
            side.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::InvalidBipartition(format!("bad party index {s:?}")))
                })
                .collect()
        };
        match text.split_once('|') {
            None => Self::new(&parse_side(text)?, n_parties),
            Some((l, r)) => {
                let left = parse_side(l)?;
                let split = Self::new(&left, n_parties)?;
                if !r.trim().is_empty() && parse_side(r)? != split.right {
                    return Err(Error::InvalidBipartition(format!(
                        "{text:?} is not a complementary split of {n_parties} parties"
                    )));
                }
                Ok(split)
            }
        }
    }

    /// `{0}|{1, …, n−1}`.
    pub fn first_vs_rest(n_parties: usize) -> Result<Self> {
        Self::new(&[0], n_parties)
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn n_parties(&self) -> usize {
        self.left.len() + self.right.len()
    }

    fn check(&self, x: &State) -> Result<()> {
        if self.n_parties() != x.n_parties() {
            return Err(Error::InvalidBipartition(format!(
                "split covers {} parties, state has {}",
                self.n_parties(),
                x.n_parties()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |parties: &[usize]| {
            parties.iter().map(|&p| party_label(p)).collect::<Vec<_>>().join(",")
        };
        write!(f, "{{{}}}|{{{}}}", side(&self.left), side(&self.right))
    }
}

/// For every flat offset of `x`, its (row, column) in the matricization.
fn index_map(dims: &[usize], split: &Bipartition) -> (usize, usize, Vec<(usize, usize)>) {
    let left_dims: Vec<usize> = split.left.iter().map(|&p| dims[p]).collect();
    let right_dims: Vec<usize> = split.right.iter().map(|&p| dims[p]).collect();
    let left_strides = strides(&left_dims);
    let right_strides = strides(&right_dims);
    let mut map = Vec::with_capacity(dims.iter().product());
    for digits in MultiIndex::new(dims) {
        let row = split.left.iter().zip(&left_strides).map(|(&p, s)| digits[p] * s).sum();
        let col = split.right.iter().zip(&right_strides).map(|(&p, s)| digits[p] * s).sum();
        map.push((row, col));
    }
    (left_dims.iter().product(), right_dims.iter().product(), map)
}

/// Reshapes `x` into a matrix whose rows run over the `left` parties and
/// columns over the `right` parties, each in ascending party order with the
/// last party fastest.
pub fn matricize(x: &State, split: &Bipartition) -> Result<DMatrix<Complex64>> {
    split.check(x)?;
    let (rows, cols, map) = index_map(x.dims(), split);
    let mut m = DMatrix::zeros(rows, cols);
    for (amp, &(r, c)) in x.amps().iter().zip(&map) {
        m[(r, c)] = *amp;
    }
    Ok(m)
}

/// Inverse of [`matricize`].
pub fn unmatricize(m: &DMatrix<Complex64>, dims: &[usize], split: &Bipartition) -> Result<State> {
    let (rows, cols, map) = index_map(dims, split);
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, found: m.len() });
    }
    State::new(dims.to_vec(), map.iter().map(|&(r, c)| m[(r, c)]).collect())
}

/// `x = Σ_i λ_i · left_i ⊗ right_i` across a [`Bipartition`].
#[derive(Debug, Clone)]
pub struct BipartiteSchmidt {
    pub split: Bipartition,
    pub dims: Vec<usize>,
    /// Descending, nonnegative; entries at or below the threshold are zero.
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<Vec<Complex64>>,
    pub right_vectors: Vec<Vec<Complex64>>,
    pub rank: usize,
    /// Runs of (numerically) equal nonzero coefficients, covering `0..rank`.
    pub clusters: Vec<Range<usize>>,
}

impl BipartiteSchmidt {
    pub fn left_dims(&self) -> Vec<usize> {
        self.split.left.iter().map(|&p| self.dims[p]).collect()
    }

    pub fn right_dims(&self) -> Vec<usize> {
        self.split.right.iter().map(|&p| self.dims[p]).collect()
    }

    /// The nonzero coefficients.
    pub fn nonzero(&self) -> &[f64] {
        &self.coefficients[..self.rank]
    }

    pub fn left_state(&self, i: usize) -> State {
        State::new(self.left_dims(), self.left_vectors[i].clone()).expect("consistent dims")
    }

    pub fn right_state(&self, i: usize) -> State {
        State::new(self.right_dims(), self.right_vectors[i].clone()).expect("consistent dims")
    }

    /// `Σ λ_i left_i ⊗ right_i` in the original party order.
    pub fn reconstruct(&self) -> State {
        let rows = self.left_vectors.first().map_or(0, Vec::len);
        let cols = self.right_vectors.first().map_or(0, Vec::len);
        let mut m = DMatrix::zeros(rows, cols);
        for ((&lambda, l), r) in self.coefficients.iter().zip(&self.left_vectors).zip(&self.right_vectors) {
            if lambda == 0.0 {
                continue;
            }
            for (i, li) in l.iter().enumerate() {
                for (j, rj) in r.iter().enumerate() {
                    m[(i, j)] += li * rj * lambda;
                }
            }
        }
        unmatricize(&m, &self.dims, &self.split).expect("consistent dims")
    }
}

/// Schmidt decomposition by SVD of the matricized state.
///
/// Coefficients at or below `tol · λ_max` are zeroed. Each right vector is
/// phase-fixed (dominant component real positive) with the phase moved into
/// its left partner. Within a degenerate cluster the order follows the
/// dominant index of the left vectors.
pub fn bipartite_schmidt(x: &State, split: &Bipartition, tol: f64) -> Result<BipartiteSchmidt> {
    split.check(x)?;
    x.checked_norm()?;
    let m = matricize(x, split)?;
    let triplets = svd(&m)?;
    let sigma_max = triplets.values.first().copied().unwrap_or(0.0);

    let mut coefficients = triplets.values;
    let mut left_vectors = triplets.left;
    let mut right_vectors = triplets.right;
    for (l, r) in left_vectors.iter_mut().zip(right_vectors.iter_mut()) {
        let phase = fix_phase(r);
        l.iter_mut().for_each(|z| *z *= phase);
    }

    let rank = coefficients.iter().take_while(|&&s| s > tol * sigma_max).count();
    for s in coefficients.iter_mut().skip(rank) {
        *s = 0.0;
    }
    let clusters = clusters(&coefficients[..rank], sigma_max);

    // deterministic order inside each cluster
    for cluster in &clusters {
        let mut order: Vec<usize> = cluster.clone().collect();
        order.sort_by_key(|&i| dominant_index(&left_vectors[i]));
        let l: Vec<_> = order.iter().map(|&i| left_vectors[i].clone()).collect();
        let r: Vec<_> = order.iter().map(|&i| right_vectors[i].clone()).collect();
        let s: Vec<_> = order.iter().map(|&i| coefficients[i]).collect();
        for (k, i) in cluster.clone().enumerate() {
            left_vectors[i] = l[k].clone();
            right_vectors[i] = r[k].clone();
            coefficients[i] = s[k];
        }
    }

    Ok(BipartiteSchmidt {
        split: split.clone(),
        dims: x.dims().to_vec(),
        coefficients,
        left_vectors,
        right_vectors,
        rank,
        clusters,
    })
}

fn clusters(values: &[f64], scale: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > DEGENERACY_GAP * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Number of Schmidt coefficients above `tol · λ_max`.
pub fn schmidt_number(x: &State, split: &Bipartition, tol: f64) -> Result<usize> {
    Ok(bipartite_schmidt(x, split, tol)?.rank)
}
