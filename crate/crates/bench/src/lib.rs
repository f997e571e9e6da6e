//! Fixed workloads shared by the benchmarks.

use multischmidt::oracle::{random_schmidt_state, random_state};
use multischmidt::{named, tensor_product, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A labelled input state.
pub struct Fixture {
    pub label: String,
    pub state: State,
}

fn fixture(label: impl Into<String>, state: State) -> Fixture {
    Fixture { label: label.into(), state }
}

/// Decomposable inputs, from small to the largest sizes the tests use.
pub fn decomposable() -> Vec<Fixture> {
    let mut out = vec![fixture("ghz3", named::ghz(3)), fixture("ghz6", named::ghz(6))];
    for (dims, lambdas, seed) in [
        (vec![2, 2, 2], vec![0.8, 0.6], 7u64),
        (vec![3, 3, 3], vec![1.0, 1.0, 1.0], 11),
        (vec![4, 4, 4, 4], vec![0.6, 0.5, 0.4, 0.3], 5),
        (vec![4, 4, 4, 4, 4], vec![1.0, 1.0, 0.5, 0.5], 9),
    ] {
        let label = format!("schmidt{}x{}", dims[0], dims.len());
        out.push(fixture(label, random_schmidt_state(&dims, &lambdas, seed).expect("valid").0));
    }
    out
}

/// Inputs without a decomposition, each rejected by a different path.
pub fn non_decomposable() -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pair = random_state(&[3, 3], &mut rng).expect("valid");
    let single = random_state(&[3], &mut rng).expect("valid");
    vec![
        fixture("w3", named::w(3)),
        fixture("bell_x_zero", named::bell_pair_times_zero()),
        fixture("biseparable3x3", tensor_product(&[pair, single]).expect("valid")),
        fixture("generic4x4", random_state(&[4, 4, 4, 4], &mut rng).expect("valid")),
    ]
}
