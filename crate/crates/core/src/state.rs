//! Dense pure states on a tensor product of finite-dimensional parties.
//!
//! Amplitudes are stored row-major with the last party's index running
//! fastest, so the flat offset of the multi-index `(i_0, …, i_{n-1})` is
//! `Σ_k i_k · Π_{l>k} dims[l]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A pure state `Σ a_{i_0…i_{n-1}} |i_0⟩ ⊗ … ⊗ |i_{n-1}⟩`, possibly unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl State {
    /// Builds a state from per-party dimensions and flat amplitudes.
    ///
    /// Amplitudes are kept exactly as given; no normalization happens.
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyDims);
        }
        if let Some(party) = dims.iter().position(|&d| d == 0) {
            return Err(Error::ZeroDimension { party });
        }
        let expected: usize = dims.iter().product();
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        Ok(Self { dims, amps })
    }

    /// Real-amplitude convenience constructor.
    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        Self::new(dims, amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, vec![Complex64::new(0.0, 0.0); len])
    }

    /// The computational basis state `|digits⟩`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let mut state = Self::zeros(dims)?;
        let offset = state.offset(digits)?;
        state.amps[offset] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// A single-party state holding `amps`.
    pub fn single(amps: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![amps.len()], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// True when every amplitude is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.amps.iter().all(|a| a.re == 0.0 && a.im == 0.0)
    }

    /// Rejects the zero state and non-finite amplitudes, returning the norm.
    pub(crate) fn checked_norm(&self) -> Result<f64> {
        let norm = self.norm();
        if !norm.is_finite() {
            return Err(Error::InvalidArgument("state has non-finite amplitudes".into()));
        }
        if norm == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(norm)
    }

    /// Flat offset of a multi-index.
    pub fn offset(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: digits.len(),
            });
        }
        let mut offset = 0;
        for (&digit, &dim) in digits.iter().zip(&self.dims) {
            if digit >= dim {
                return Err(Error::IndexOutOfRange { index: digit, len: dim });
            }
            offset = offset * dim + digit;
        }
        Ok(offset)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// Unit-norm copy. Fails on the zero state.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.checked_norm()?;
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &State) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn add(&self, other: &State) -> Result<State> {
        self.check_same_dims(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        })
    }

    fn check_same_dims(&self, other: &State) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    /// Reorders the parties: party `k` of the result is party `order[k]` of `self`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<State> {
        let n = self.n_parties();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: order.len() });
        }
        for &p in order {
            if p >= n || seen[p] {
                return Err(Error::InvalidArgument(format!("{order:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let new_dims: Vec<usize> = order.iter().map(|&p| self.dims[p]).collect();
        let old_strides = strides(&self.dims);
        let mut amps = Vec::with_capacity(self.len());
        for digits in MultiIndex::new(&new_dims) {
            let src: usize = digits
                .iter()
                .zip(order)
                .map(|(&d, &p)| d * old_strides[p])
                .sum();
            amps.push(self.amps[src]);
        }
        State::new(new_dims, amps)
    }

    /// Applies `op` (a `dims[party] × dims[party]` matrix) to one party.
    pub fn apply_local(&self, party: usize, op: &DMatrix<Complex64>) -> Result<State> {
        let n = self.n_parties();
        if party >= n {
            return Err(Error::IndexOutOfRange { index: party, len: n });
        }
        let d = self.dims[party];
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
        }
        let outer: usize = self.dims[..party].iter().product();
        let inner: usize = self.dims[party + 1..].iter().product();
        let mut amps = vec![Complex64::new(0.0, 0.0); self.len()];
        for o in 0..outer {
            for r in 0..d {
                for c in 0..d {
                    let w = op[(r, c)];
                    if w.re == 0.0 && w.im == 0.0 {
                        continue;
                    }
                    let dst = (o * d + r) * inner;
                    let src = (o * d + c) * inner;
                    for i in 0..inner {
                        amps[dst + i] += w * self.amps[src + i];
                    }
                }
            }
        }
        State::new(self.dims.clone(), amps)
    }
}

/// Row-major strides for `dims` (last index fastest).
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

/// Iterates over all multi-indices of `dims` in row-major order.
pub(crate) struct MultiIndex {
    dims: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl MultiIndex {
    pub(crate) fn new(dims: &[usize]) -> Self {
        Self {
            dims: dims.to_vec(),
            current: vec![0; dims.len()],
            done: dims.contains(&0),
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.current.clone();
        let mut k = self.dims.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.current[k] += 1;
            if self.current[k] < self.dims[k] {
                break;
            }
            self.current[k] = 0;
        }
        Some(item)
    }
}

/// `⟨x|y⟩ = Σ conj(x_k) y_k`, conjugate-linear in `x`.
pub fn inner_product(x: &State, y: &State) -> Result<Complex64> {
    x.check_same_dims(y)?;
    Ok(x.amps.iter().zip(&y.amps).map(|(a, b)| a.conj() * b).sum())
}

/// Contracts `conj(v)` against party `party` of `x`, leaving a state on the
/// remaining parties in their original order.
pub fn partial_inner_product(v: &[Complex64], party: usize, x: &State) -> Result<State> {
    let n = x.n_parties();
    if party >= n {
        return Err(Error::IndexOutOfRange { index: party, len: n });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "partial inner product needs at least two parties".into(),
        ));
    }
    let d = x.dims[party];
    if v.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: v.len() });
    }
    let outer: usize = x.dims[..party].iter().product();
    let inner: usize = x.dims[party + 1..].iter().product();
    let mut amps = vec![Complex64::new(0.0, 0.0); outer * inner];
    for o in 0..outer {
        for (a, va) in v.iter().enumerate() {
            let w = va.conj();
            let src = (o * d + a) * inner;
            let dst = o * inner;
            for i in 0..inner {
                amps[dst + i] += w * x.amps[src + i];
            }
        }
    }
    let mut dims = x.dims.clone();
    dims.remove(party);
    State::new(dims, amps)
}

/// Kronecker product of the factors, with their dimensions concatenated.
///
/// Factors are usually single-party states, but multi-party factors are
/// accepted and keep their own party structure.
pub fn tensor_product(factors: &[State]) -> Result<State> {
    let Some((first, rest)) = factors.split_first() else {
        return Err(Error::EmptyDims);
    };
    let mut dims = first.dims.clone();
    let mut amps = first.amps.clone();
    for factor in rest {
        let mut next = Vec::with_capacity(amps.len() * factor.len());
        for a in &amps {
            next.extend(factor.amps.iter().map(|b| a * b));
        }
        amps = next;
        dims.extend_from_slice(&factor.dims);
    }
    State::new(dims, amps)
}

/// Party label used in reports: 0 → `A`, 1 → `B`, …, 25 → `Z`, then `A26`, ….
pub fn party_label(index: usize) -> String {
    if index < 26 {
        char::from(b'A' + index as u8).to_string()
    } else {
        format!("A{index}")
    }
}

/// Named states used throughout the tests and the CLI replay.
pub mod named {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    pub fn ghz(n: usize) -> State {
        let mut state = State::zeros(vec![2; n]).expect("n ≥ 1");
        let last = state.len() - 1;
        state.amps[0] = c(std::f64::consts::FRAC_1_SQRT_2);
        state.amps[last] = c(std::f64::consts::FRAC_1_SQRT_2);
        state
    }

    /// `(|0…01⟩ + |0…10⟩ + … + |10…0⟩)/√n` on `n` qubits.
    pub fn w(n: usize) -> State {
        let mut state = State::zeros(vec![2; n]).expect("n ≥ 1");
        let weight = 1.0 / (n as f64).sqrt();
        for k in 0..n {
            state.amps[1 << k] = c(weight);
        }
        state
    }

    /// `(|0⟩ + |1⟩) ⊗ |0⟩ ⊗ |0⟩`, unnormalized.
    pub fn plus_zero_zero() -> State {
        State::from_real(vec![2, 2, 2], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap()
    }

    /// `|000⟩ + |110⟩`, unnormalized: partially but not completely separable.
    pub fn bell_pair_times_zero() -> State {
        State::from_real(vec![2, 2, 2], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_vector_and_counterexample_states() {
        let e0 = State::from_real(vec![2, 2, 2], &[1., 0., 0., 0., 0., 0., 0., 0.]).unwrap();
        assert_eq!(e0, State::basis(vec![2, 2, 2], &[0, 0, 0]).unwrap());
        let x = named::bell_pair_times_zero();
        let expected = State::basis(vec![2, 2, 2], &[0, 0, 0])
            .unwrap()
            .add(&State::basis(vec![2, 2, 2], &[1, 1, 0]).unwrap())
            .unwrap();
        assert_eq!(x, expected);
        assert_eq!(x.amps()[6], c(1.0, 0.0));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            State::from_real(vec![2, 2], &[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        );
        assert_eq!(State::new(vec![], vec![]), Err(Error::EmptyDims));
        assert_eq!(State::new(vec![2, 0], vec![]), Err(Error::ZeroDimension { party: 1 }));
    }

    #[test]
    fn inner_products_from_counterexamples() {
        let e000 = State::basis(vec![2, 2, 2], &[0, 0, 0]).unwrap();
        assert_eq!(inner_product(&e000, &e000).unwrap(), c(1.0, 0.0));
        let psi0 = State::basis(vec![2, 2], &[0, 0]).unwrap();
        let psi1 = State::basis(vec![2, 2], &[1, 0]).unwrap();
        assert_eq!(inner_product(&psi0, &psi0).unwrap(), c(1.0, 0.0));
        assert_eq!(inner_product(&psi0, &psi1).unwrap(), c(0.0, 0.0));
        assert!(inner_product(&psi0, &e000).is_err());
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_slot() {
        let x = State::new(vec![2], vec![c(1.0, 2.0), c(0.5, -1.0)]).unwrap();
        let y = State::new(vec![2], vec![c(-0.3, 0.1), c(2.0, 0.7)]).unwrap();
        let s = c(0.0, 1.0);
        let lhs = inner_product(&x.scaled(s), &y).unwrap();
        let rhs = s.conj() * inner_product(&x, &y).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn partial_inner_products_from_counterexamples() {
        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        let one = [c(0.0, 0.0), c(1.0, 0.0)];
        let r = partial_inner_product(&zero, 0, &named::plus_zero_zero()).unwrap();
        assert_eq!(r, State::basis(vec![2, 2], &[0, 0]).unwrap());
        let r = partial_inner_product(&one, 0, &named::bell_pair_times_zero()).unwrap();
        assert_eq!(r, State::basis(vec![2, 2], &[1, 0]).unwrap());
        // contracting party C of |000⟩+|110⟩ with ⟨0| leaves |00⟩+|11⟩
        let r = partial_inner_product(&zero, 2, &named::bell_pair_times_zero()).unwrap();
        assert_eq!(r, State::from_real(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]).unwrap());
    }

    #[test]
    fn partial_inner_product_orthogonal_to_factor_is_zero() {
        let x = tensor_product(&[
            State::single(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap(),
            State::single(vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap(),
        ])
        .unwrap();
        let v = [c(0.8, 0.0), c(-0.6, 0.0)];
        let r = partial_inner_product(&v, 1, &x).unwrap();
        assert!(r.norm() < 1e-15);
        assert_eq!(r.dims(), &[2]);
    }

    #[test]
    fn partial_inner_product_errors() {
        let x = named::ghz(3);
        assert!(matches!(
            partial_inner_product(&[c(1.0, 0.0)], 0, &x),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            partial_inner_product(&[c(1.0, 0.0), c(0.0, 0.0)], 3, &x),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn tensor_products() {
        let plus = State::from_real(vec![2], &[1.0, 1.0]).unwrap();
        let zero = State::from_real(vec![2], &[1.0, 0.0]).unwrap();
        let x = tensor_product(&[plus, zero.clone(), zero.clone()]).unwrap();
        assert_eq!(x, named::plus_zero_zero());
        assert_eq!(
            tensor_product(&[zero.clone(), zero.clone()]).unwrap(),
            State::basis(vec![2, 2], &[0, 0]).unwrap()
        );
        let nothing = State::zeros(vec![3]).unwrap();
        assert!(tensor_product(&[zero, nothing]).unwrap().is_zero());
    }

    #[test]
    fn permutation_moves_digits() {
        let x = State::basis(vec![2, 3, 4], &[1, 2, 3]).unwrap();
        let y = x.permute_parties(&[2, 0, 1]).unwrap();
        assert_eq!(y, State::basis(vec![4, 2, 3], &[3, 1, 2]).unwrap());
        assert!(x.permute_parties(&[0, 0, 1]).is_err());
    }

    #[test]
    fn local_operator_acts_on_one_party() {
        let x = State::basis(vec![2, 2], &[0, 1]).unwrap();
        let flip = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        assert_eq!(x.apply_local(0, &flip).unwrap(), State::basis(vec![2, 2], &[1, 1]).unwrap());
        assert_eq!(x.apply_local(1, &flip).unwrap(), State::basis(vec![2, 2], &[0, 0]).unwrap());
    }

    #[test]
    fn labels() {
        assert_eq!(party_label(0), "A");
        assert_eq!(party_label(2), "C");
        assert_eq!(party_label(30), "A30");
    }
}
