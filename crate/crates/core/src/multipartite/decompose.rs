use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bipartite::{bipartite_schmidt, Bipartition, DEGENERACY_GAP};
use crate::error::{Error, Result};
use crate::linalg::{dominant_index, dot, gram_deviation, hermitian_eigen, norm};
use crate::state::{party_label, tensor_product, State};
use crate::TOL_ORTHO;

use super::separability::is_completely_separable;

/// Seeds for the random probe combinations used on degenerate clusters.
const PROBE_SEEDS: [u64; 3] = [1, 2, 3];
/// Largest off-diagonal probe entry tolerated after rotating a cluster.
const COMMUTING_TOL: f64 = 1e-8;
/// Minimum relative eigenvalue gap of a probe combination.
const PROBE_GAP: f64 = 1e-6;
/// Gram deviation above which extracted factors are declared non-orthogonal.
const FACTOR_ORTHO_TOL: f64 = 1e-8;

/// `x = Σ_i λ_i ⊗_j u_i^{A_j}` with an orthonormal family on every party.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    dims: Vec<usize>,
    coefficients: Vec<f64>,
    /// `party_vectors[j][i]` is `u_i^{A_j}`.
    party_vectors: Vec<Vec<Vec<Complex64>>>,
}

impl SchmidtDecomposition {
    /// Checks shapes only; use [`crate::oracle::verify_decomposition`] for the
    /// orthonormality and reconstruction invariants.
    pub fn new(dims: Vec<usize>, coefficients: Vec<f64>, party_vectors: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        if party_vectors.len() != dims.len() {
            return Err(Error::DimensionMismatch { expected: dims.len(), found: party_vectors.len() });
        }
        for (vectors, &dim) in party_vectors.iter().zip(&dims) {
            if vectors.len() != coefficients.len() {
                return Err(Error::DimensionMismatch { expected: coefficients.len(), found: vectors.len() });
            }
            if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
            }
        }
        Ok(Self { dims, coefficients, party_vectors })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn n_terms(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Vectors of party `j`, one per term.
    pub fn party_vectors(&self, j: usize) -> &[Vec<Complex64>] {
        &self.party_vectors[j]
    }

    /// Worst per-party Gram deviation from the identity.
    pub fn max_gram_deviation(&self) -> f64 {
        self.party_vectors.iter().map(|v| gram_deviation(v)).fold(0.0, f64::max)
    }

    /// `Σ_i λ_i ⊗_j u_i^{A_j}`.
    pub fn reconstruct(&self) -> State {
        let mut total = State::zeros(self.dims.clone()).expect("valid dims");
        for (i, &lambda) in self.coefficients.iter().enumerate() {
            let term = product_state(self.party_vectors.iter().map(|v| &v[i])).scaled(Complex64::new(lambda, 0.0));
            total = total.add(&term).expect("same dims");
        }
        total
    }
}

fn product_state<'a>(vectors: impl Iterator<Item = &'a Vec<Complex64>>) -> State {
    let factors: Vec<State> = vectors.map(|v| State::single(v.clone()).expect("nonempty")).collect();
    tensor_product(&factors).expect("nonempty")
}

/// Why the decomposer concluded that no decomposition exists.
#[derive(Debug, Clone)]
pub enum Absence {
    /// A right Schmidt vector across `{A}|{rest}` is not a product state.
    NonSeparableTerm { term: usize, coefficient: f64, residual: State },
    /// Every right vector is a product, but the factors of `party` are not orthonormal.
    NonOrthogonalFactors { party: usize, deviation: f64 },
    /// A degenerate cluster whose conditional operators do not commute.
    NonCommutingCluster { cluster: Range<usize>, residual: f64 },
    /// The assembled candidate failed the final reconstruction check.
    ReconstructionMismatch { relative_error: f64 },
}

impl fmt::Display for Absence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Absence::NonSeparableTerm { term, coefficient, .. } => write!(
                f,
                "right Schmidt vector {term} (coefficient {coefficient:.10}) across {{A}}|{{rest}} is not completely separable"
            ),
            Absence::NonOrthogonalFactors { party, deviation } => write!(
                f,
                "product factors on party {} are not orthonormal (Gram deviation {deviation:.3e})",
                party_label(*party)
            ),
            Absence::NonCommutingCluster { cluster, residual } => write!(
                f,
                "degenerate coefficients {}..{} admit no product basis (probe residual {residual:.3e})",
                cluster.start, cluster.end
            ),
            Absence::ReconstructionMismatch { relative_error } => {
                write!(f, "candidate decomposition misses the state by {relative_error:.3e} (relative)")
            }
        }
    }
}

/// Verdict of [`decompose`].
#[derive(Debug, Clone)]
pub enum Decomposition {
    Decomposable(SchmidtDecomposition),
    NotDecomposable(Absence),
}

impl Decomposition {
    pub fn into_option(self) -> Option<SchmidtDecomposition> {
        match self {
            Decomposition::Decomposable(d) => Some(d),
            Decomposition::NotDecomposable(_) => None,
        }
    }

    pub fn is_decomposable(&self) -> bool {
        matches!(self, Decomposition::Decomposable(_))
    }
}

/// [`decompose`], keeping only the decomposition.
pub fn multipartite_schmidt_decompose(x: &State, tol: f64) -> Result<Option<SchmidtDecomposition>> {
    Ok(decompose(x, tol)?.into_option())
}

/// Decides whether `x` has a multipartite Schmidt decomposition and builds it.
///
/// Takes the Schmidt decomposition across `{A}|{rest}`, resolves the
/// rotational freedom inside degenerate coefficient clusters, and requires
/// every right vector to be a product whose factors are orthonormal on each
/// party. Any returned decomposition has passed a reconstruction check;
/// `NotDecomposable` carries the reason.
pub fn decompose(x: &State, tol: f64) -> Result<Decomposition> {
    let x_norm = x.checked_norm()?;
    let n = x.n_parties();

    if n == 1 {
        let unit = x.amps().iter().map(|a| a / x_norm).collect();
        let d = SchmidtDecomposition::new(x.dims().to_vec(), vec![x_norm], vec![vec![unit]])?;
        return Ok(Decomposition::Decomposable(d));
    }

    let product = is_completely_separable(x, tol)?;
    if let (Some(factors), Some(scale)) = (product.factors, product.scale) {
        let mut party_vectors: Vec<Vec<Vec<Complex64>>> = factors.into_iter().map(|f| vec![f]).collect();
        let phase = scale / scale.norm();
        party_vectors[0][0].iter_mut().for_each(|z| *z *= phase);
        return finish(x, x_norm, vec![scale.norm()], party_vectors, tol);
    }

    let split = Bipartition::first_vs_rest(n)?;
    let schmidt = bipartite_schmidt(x, &split, tol)?;
    let rank = schmidt.rank;
    let rest_dims = schmidt.right_dims();
    let sigma = schmidt.coefficients[..rank].to_vec();
    let mut left = schmidt.left_vectors[..rank].to_vec();
    let mut right = schmidt.right_vectors[..rank].to_vec();

    let mut non_commuting: Option<Absence> = None;
    if n >= 3 {
        for cluster in schmidt.clusters.iter().filter(|c| c.len() > 1) {
            let resolution = resolve_cluster(&right[cluster.clone()], &rest_dims)?;
            rotate_cluster(&mut left, &mut right, cluster.clone(), &resolution.rotation);
            if !resolution.commuting && non_commuting.is_none() {
                non_commuting = Some(Absence::NonCommutingCluster {
                    cluster: cluster.clone(),
                    residual: resolution.residual,
                });
            }
        }
    }

    // factor every right vector over the remaining parties
    let mut party_vectors: Vec<Vec<Vec<Complex64>>> = vec![Vec::with_capacity(rank); n];
    for i in 0..rank {
        let residual = State::new(rest_dims.clone(), right[i].clone())?;
        let report = is_completely_separable(&residual, tol)?;
        let (Some(factors), Some(scale)) = (report.factors, report.scale) else {
            return Ok(Decomposition::NotDecomposable(non_commuting.unwrap_or(
                Absence::NonSeparableTerm { term: i, coefficient: sigma[i], residual },
            )));
        };
        let phase = scale / scale.norm();
        party_vectors[0].push(left[i].iter().map(|z| z * phase).collect());
        for (k, factor) in factors.into_iter().enumerate() {
            party_vectors[k + 1].push(factor);
        }
    }

    let decision_tol = FACTOR_ORTHO_TOL.max(tol);
    for (party, vectors) in party_vectors.iter().enumerate() {
        let deviation = gram_deviation(vectors);
        if deviation > decision_tol {
            return Ok(Decomposition::NotDecomposable(
                non_commuting.unwrap_or(Absence::NonOrthogonalFactors { party, deviation }),
            ));
        }
    }

    finish(x, x_norm, sigma, party_vectors, tol)
}

/// Polishes the per-party families, recomputes coefficients by projection,
/// orders the terms and verifies the reconstruction.
fn finish(
    x: &State,
    x_norm: f64,
    _sigma: Vec<f64>,
    mut party_vectors: Vec<Vec<Vec<Complex64>>>,
    tol: f64,
) -> Result<Decomposition> {
    for vectors in party_vectors.iter_mut() {
        orthonormalize(vectors);
    }
    let terms = party_vectors[0].len();
    let mut coefficients = Vec::with_capacity(terms);
    for i in 0..terms {
        let overlap = project_onto_product(x, party_vectors.iter().map(|v| v[i].as_slice()))?;
        let magnitude = overlap.norm();
        if magnitude > 0.0 {
            let phase = overlap / magnitude;
            party_vectors[0][i].iter_mut().for_each(|z| *z *= phase);
        }
        coefficients.push(magnitude);
    }

    let order = canonical_order(&coefficients, &party_vectors[0]);
    let coefficients: Vec<f64> = order.iter().map(|&i| coefficients[i]).collect();
    let party_vectors: Vec<Vec<Vec<Complex64>>> = party_vectors
        .into_iter()
        .map(|v| order.iter().map(|&i| v[i].clone()).collect())
        .collect();

    let d = SchmidtDecomposition::new(x.dims().to_vec(), coefficients, party_vectors)?;
    let deviation = d.max_gram_deviation();
    if deviation > TOL_ORTHO {
        let party = (0..d.n_parties())
            .max_by(|&a, &b| gram_deviation(d.party_vectors(a)).total_cmp(&gram_deviation(d.party_vectors(b))))
            .unwrap_or(0);
        return Ok(Decomposition::NotDecomposable(Absence::NonOrthogonalFactors { party, deviation }));
    }
    let relative_error = d.reconstruct().distance(x)? / x_norm;
    if relative_error > tol.max(1e-10) {
        return Ok(Decomposition::NotDecomposable(Absence::ReconstructionMismatch { relative_error }));
    }
    Ok(Decomposition::Decomposable(d))
}

/// Descending coefficients; near-equal coefficients ordered by the dominant
/// index of the first party's vector.
fn canonical_order(coefficients: &[f64], first_party: &[Vec<Complex64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..coefficients.len()).collect();
    order.sort_by(|&a, &b| coefficients[b].total_cmp(&coefficients[a]));
    let scale = order.first().map_or(0.0, |&i| coefficients[i]);
    let mut start = 0;
    for end in 1..=order.len() {
        if end == order.len() || coefficients[order[end - 1]] - coefficients[order[end]] > DEGENERACY_GAP * scale {
            order[start..end].sort_by_key(|&i| dominant_index(&first_party[i]));
            start = end;
        }
    }
    order
}

/// Modified Gram–Schmidt with one re-orthogonalization pass, in place.
fn orthonormalize(vectors: &mut [Vec<Complex64>]) {
    for i in 0..vectors.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let overlap = dot(&vectors[j], &vectors[i]);
                let (done, current) = vectors.split_at_mut(i);
                for (z, u) in current[0].iter_mut().zip(&done[j]) {
                    *z -= overlap * u;
                }
            }
        }
        let scale = norm(&vectors[i]);
        if scale > 0.0 {
            vectors[i].iter_mut().for_each(|z| *z /= scale);
        }
    }
}

/// `⟨⊗_j v_j | x⟩`.
fn project_onto_product<'a>(x: &State, vectors: impl Iterator<Item = &'a [Complex64]>) -> Result<Complex64> {
    let mut amps = x.amps().to_vec();
    for v in vectors {
        let d = v.len();
        let inner = amps.len() / d;
        let mut next = vec![Complex64::new(0.0, 0.0); inner];
        for (a, va) in v.iter().enumerate() {
            let w = va.conj();
            for (i, z) in next.iter_mut().enumerate() {
                *z += w * amps[a * inner + i];
            }
        }
        amps = next;
    }
    match amps.as_slice() {
        [value] => Ok(*value),
        _ => Err(Error::DimensionMismatch { expected: 1, found: amps.len() }),
    }
}

struct ClusterResolution {
    /// Unitary `W`; the new right vectors are `r'_i = Σ_a W[a,i] r_a`.
    rotation: DMatrix<Complex64>,
    commuting: bool,
    residual: f64,
}

/// Cross operators `K[q][(a,b)] = Tr_{¬q} |r_b⟩⟨r_a|` for every remaining party `q`,
/// stored as `d_q × d_q` matrices with entries `Σ conj(r_a[m,·]) r_b[n,·]`.
fn cross_operators(vectors: &[Vec<Complex64>], dims: &[usize]) -> Vec<Vec<DMatrix<Complex64>>> {
    let k = vectors.len();
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(dims.len());
    for (q, &d) in dims.iter().enumerate() {
        let outer: usize = dims[..q].iter().product();
        let inner = total / (outer * d);
        let mut per_pair = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                let mut m = DMatrix::zeros(d, d);
                for o in 0..outer {
                    for row in 0..d {
                        for col in 0..d {
                            let base_r = (o * d + row) * inner;
                            let base_c = (o * d + col) * inner;
                            let mut acc = Complex64::new(0.0, 0.0);
                            for i in 0..inner {
                                acc += vectors[a][base_r + i].conj() * vectors[b][base_c + i];
                            }
                            m[(row, col)] += acc;
                        }
                    }
                }
                per_pair.push(m);
            }
        }
        out.push(per_pair);
    }
    out
}

/// A random Hermitian combination of the Hermitian matrix units of dimension `d`.
fn random_probe(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut b = DMatrix::zeros(d, d);
    for m in 0..d {
        b[(m, m)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for n in m + 1..d {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            b[(m, n)] = Complex64::new(re, -im);
            b[(n, m)] = Complex64::new(re, im);
        }
    }
    b
}

/// Finds the rotation of a degenerate cluster that makes every conditional
/// operator `⟨r_a|(B ⊗ I)|r_b⟩` diagonal, for probes `B` on every remaining party.
///
/// A random Hermitian combination is diagonalized for each fixed seed; a
/// rotation is accepted once all cross operators vanish off the diagonal.
fn resolve_cluster(vectors: &[Vec<Complex64>], dims: &[usize]) -> Result<ClusterResolution> {
    let k = vectors.len();
    let cross = cross_operators(vectors, dims);
    let mut fallback: Option<ClusterResolution> = None;

    for seed in PROBE_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probes: Vec<DMatrix<Complex64>> = dims.iter().map(|&d| random_probe(d, &mut rng)).collect();
        let mut combined = DMatrix::zeros(k, k);
        for (q, probe) in probes.iter().enumerate() {
            for a in 0..k {
                for b in 0..k {
                    let kab = &cross[q][a * k + b];
                    combined[(a, b)] += probe.zip_map(kab, |p, c| p * c).sum();
                }
            }
        }
        let combined = (&combined + combined.adjoint()) * Complex64::new(0.5, 0.0);
        let (values, rotation) = hermitian_eigen(&combined)?;
        let spread = combined.norm().max(f64::MIN_POSITIVE);
        let gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if gap <= PROBE_GAP * spread {
            continue;
        }
        let residual = off_diagonal_residual(&cross, &rotation, k);
        let commuting = residual <= COMMUTING_TOL;
        let resolution = ClusterResolution { rotation, commuting, residual };
        if commuting {
            return Ok(resolution);
        }
        fallback = Some(resolution);
    }
    fallback.ok_or_else(|| {
        Error::NumericalAmbiguity(format!(
            "no probe combination separates a cluster of {k} equal coefficients"
        ))
    })
}

/// Largest off-diagonal entry of the rotated cross operators.
fn off_diagonal_residual(cross: &[Vec<DMatrix<Complex64>>], w: &DMatrix<Complex64>, k: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for per_pair in cross {
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let mut rotated = DMatrix::<Complex64>::zeros(per_pair[0].nrows(), per_pair[0].ncols());
                for a in 0..k {
                    for b in 0..k {
                        let weight = w[(a, i)].conj() * w[(b, j)];
                        rotated += &per_pair[a * k + b] * weight;
                    }
                }
                worst = worst.max(rotated.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    worst
}

fn rotate_cluster(
    left: &mut [Vec<Complex64>],
    right: &mut [Vec<Complex64>],
    cluster: Range<usize>,
    w: &DMatrix<Complex64>,
) {
    let old_left: Vec<Vec<Complex64>> = left[cluster.clone()].to_vec();
    let old_right: Vec<Vec<Complex64>> = right[cluster.clone()].to_vec();
    for (i, target) in cluster.enumerate() {
        let mut l = vec![Complex64::new(0.0, 0.0); old_left[0].len()];
        let mut r = vec![Complex64::new(0.0, 0.0); old_right[0].len()];
        for a in 0..old_left.len() {
            let wa = w[(a, i)];
            for (z, u) in l.iter_mut().zip(&old_left[a]) {
                *z += wa.conj() * u;
            }
            for (z, v) in r.iter_mut().zip(&old_right[a]) {
                *z += wa * v;
            }
        }
        left[target] = l;
        right[target] = r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::named;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn ghz_decomposes_into_computational_vectors() {
        let d = multipartite_schmidt_decompose(&named::ghz(3), 1e-9).unwrap().unwrap();
        assert_eq!(d.n_terms(), 2);
        for &lambda in d.coefficients() {
            assert!((lambda - H).abs() < 1e-12);
        }
        for j in 0..3 {
            let v = d.party_vectors(j);
            assert!((v[0][0].norm() - 1.0).abs() < 1e-12);
            assert!((v[1][1].norm() - 1.0).abs() < 1e-12);
        }
        assert!(d.reconstruct().distance(&named::ghz(3)).unwrap() < 1e-12);
    }

    #[test]
    fn counterexample_and_w_are_not_decomposable() {
        // the {A}|{BC} coefficients are degenerate and the right vectors |00⟩, |10⟩
        // share the C factor, so no rotation of the cluster yields a product basis
        match decompose(&named::bell_pair_times_zero(), 1e-9).unwrap() {
            Decomposition::NotDecomposable(Absence::NonCommutingCluster { cluster, .. }) => assert_eq!(cluster, 0..2),
            other => panic!("unexpected verdict {other:?}"),
        }
        match decompose(&named::w(3), 1e-9).unwrap() {
            Decomposition::NotDecomposable(Absence::NonSeparableTerm { .. }) => {}
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn product_state_takes_single_term_path() {
        let x = named::plus_zero_zero();
        let d = multipartite_schmidt_decompose(&x, 1e-9).unwrap().unwrap();
        assert_eq!(d.n_terms(), 1);
        assert!((d.coefficients()[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!(d.reconstruct().distance(&x).unwrap() < 1e-12);
    }

    #[test]
    fn single_party_and_bipartite_states_always_decompose() {
        let x = State::new(vec![3], vec![Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let d = multipartite_schmidt_decompose(&x, 1e-9).unwrap().unwrap();
        assert!((d.coefficients()[0] - 5f64.sqrt()).abs() < 1e-12);
        assert!(d.reconstruct().distance(&x).unwrap() < 1e-12);

        let amps: Vec<Complex64> = (0..12).map(|k| Complex64::new((k as f64).cos(), (2.0 * k as f64).sin())).collect();
        let x = State::new(vec![3, 4], amps).unwrap();
        let d = multipartite_schmidt_decompose(&x, 1e-9).unwrap().unwrap();
        assert_eq!(d.n_terms(), 3);
        assert!(d.reconstruct().distance(&x).unwrap() < 1e-12 * x.norm());
    }

    #[test]
    fn degenerate_ghz_in_rotated_first_party_basis() {
        // GHZ with party A in the |±⟩ basis: the {A}|{BC} coefficients are
        // degenerate, so the SVD vectors are arbitrary until the cluster is resolved
        let hadamard = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(H, 0.0), Complex64::new(H, 0.0),
            Complex64::new(H, 0.0), Complex64::new(-H, 0.0),
        ]);
        let x = named::ghz(3).apply_local(1, &hadamard).unwrap();
        let d = multipartite_schmidt_decompose(&x, 1e-9).unwrap().unwrap();
        assert_eq!(d.n_terms(), 2);
        assert!(d.reconstruct().distance(&x).unwrap() < 1e-12);
        assert!(d.max_gram_deviation() < 1e-10);
    }

    #[test]
    fn terms_are_ordered_canonically() {
        let d = multipartite_schmidt_decompose(&named::ghz(4), 1e-9).unwrap().unwrap();
        assert_eq!(dominant_index(&d.party_vectors(0)[0]), 0);
        assert_eq!(dominant_index(&d.party_vectors(0)[1]), 1);
    }

    #[test]
    fn projection_matches_inner_product() {
        let x = named::ghz(3);
        let zero = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let value = project_onto_product(&x, [zero.as_slice(), zero.as_slice(), zero.as_slice()].into_iter()).unwrap();
        assert!((value.re - H).abs() < 1e-15);
    }

    #[test]
    fn shape_validation() {
        assert!(SchmidtDecomposition::new(vec![2, 2], vec![1.0], vec![vec![vec![Complex64::new(1.0, 0.0); 2]]]).is_err());
        assert!(SchmidtDecomposition::new(vec![2], vec![1.0], vec![vec![vec![Complex64::new(1.0, 0.0); 3]]]).is_err());
    }
}
