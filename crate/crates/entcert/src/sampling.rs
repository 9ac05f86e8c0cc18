//! Random states for property tests and operator checks.

use crate::qmat::{validate_density, ComplexMatrix, DensityMatrix, PureState, QmatError, C64};
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure_state(n: usize, rng: &mut impl Rng) -> Result<PureState, QmatError> {
    let amps = (0..1usize << n).map(|_| gaussian(rng)).collect();
    PureState::normalized(n, amps)
}

/// Tensor product of independent single-qubit Haar-random states.
pub fn random_product_state(n: usize, rng: &mut impl Rng) -> Result<PureState, QmatError> {
    let mut state = random_pure_state(1, rng)?;
    for _ in 1..n {
        state = state.kron(&random_pure_state(1, rng)?);
    }
    Ok(state)
}

/// Random mixed state G G^dagger / Tr(G G^dagger) with G a d x rank Ginibre matrix.
pub fn random_density(n: usize, rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix, QmatError> {
    let d = 1usize << n;
    let g = ComplexMatrix::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let m = g.mul(&g.adjoint());
    let tr = m.trace()?.re;
    validate_density(&m.scale_real(1.0 / tr), n, 1e-9)
}

/// Random convex mixture of `terms` product states, which is fully separable.
pub fn random_separable(n: usize, terms: usize, rng: &mut impl Rng) -> Result<DensityMatrix, QmatError> {
    let weights: Vec<f64> = (0..terms.max(1)).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let d = 1usize << n;
    let mut m = ComplexMatrix::zeros(d, d);
    for w in weights {
        let p = random_product_state(n, rng)?.projector();
        m = m.add(&p.matrix().scale_real(w / total));
    }
    validate_density(&m, n, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::is_ppt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            let p = random_pure_state(n, &mut rng).unwrap();
            assert!((p.inner(&p).re - 1.0).abs() < 1e-12);
            random_density(n, 2, &mut rng).unwrap();
        }
        let sep = random_separable(3, 4, &mut rng).unwrap();
        assert!(is_ppt(&sep, &[0], 1e-9).unwrap());
    }
}
