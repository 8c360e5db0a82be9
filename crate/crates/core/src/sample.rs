//! Deterministic instance generation: seeded transforms and random structured
//! specs. The same seed always produces the same value, which keeps CLI runs
//! and test corpora reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::jordan::{EigenGroup, JordanSpec};
use crate::matrix::MatrixC;
use crate::scalar::{Scalar, ScalarMode, Tolerance};

/// Well-conditioned float transform: identity plus a small uniform
/// perturbation, deterministic in the seed.
pub fn seeded_transform(dim: usize, seed: u64) -> MatrixC {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = MatrixC::identity(dim, ScalarMode::Float);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.random_range(-0.35..0.35);
            let im: f64 = rng.random_range(-0.35..0.35);
            m[(i, j)] = &m[(i, j)] + &Scalar::float(re, im);
        }
    }
    m
}

/// Exact transform with small integer entries, guaranteed invertible.
pub fn seeded_exact_transform(dim: usize, seed: u64) -> MatrixC {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = MatrixC::from_fn(dim, dim, |i, j| {
            let diag = if i == j { 3 } else { 0 };
            Scalar::exact_int(diag + rng.random_range(-2..=2), rng.random_range(-1..=1))
        })
        .unwrap();
        if !m.determinant().unwrap().is_zero() {
            return m;
        }
    }
}

/// Random structured spec: random partition of the dimension into eigenvalue
/// groups and Jordan blocks, random well-separated eigenvalues, seeded
/// transform.
pub fn random_spec(
    seed: u64,
    max_dim: usize,
    max_block: usize,
    mode: ScalarMode,
) -> JordanSpec {
    random_spec_with(seed, max_dim, max_block, mode, 2.5)
}

/// As [`random_spec`] with eigenvalues drawn from a disc of the given radius
/// (units of 1/4 in exact mode).
pub fn random_spec_with(
    seed: u64,
    max_dim: usize,
    max_block: usize,
    mode: ScalarMode,
    eigen_radius: f64,
) -> JordanSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let dim = rng.random_range(2..=max_dim.max(2));

    // Split dim into group multiplicities, then each multiplicity into
    // nonincreasing block sizes.
    let mut remaining = dim;
    let mut groups_sizes: Vec<Vec<usize>> = Vec::new();
    while remaining > 0 {
        let alpha = rng.random_range(1..=remaining);
        let mut sizes = Vec::new();
        let mut left = alpha;
        while left > 0 {
            let b = rng.random_range(1..=left.min(max_block));
            sizes.push(b);
            left -= b;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        groups_sizes.push(sizes);
        remaining -= alpha;
    }

    // Distinct eigenvalues, well separated.
    let mut eigenvalues: Vec<Scalar> = Vec::new();
    while eigenvalues.len() < groups_sizes.len() {
        let candidate = match mode {
            ScalarMode::Float => {
                let re = rng.random_range(-eigen_radius..eigen_radius);
                let im = rng.random_range(-eigen_radius..eigen_radius);
                Scalar::float(re, im)
            }
            ScalarMode::Exact => {
                let steps = (eigen_radius * 4.0).max(4.0) as i64;
                Scalar::exact_ratio(
                    rng.random_range(-steps..=steps),
                    4,
                    rng.random_range(-steps..=steps),
                    4,
                )
            }
        };
        let separated = eigenvalues.iter().all(|e| e.dist(&candidate) > 0.25);
        if separated {
            eigenvalues.push(candidate);
        }
    }

    let groups: Vec<EigenGroup> = eigenvalues
        .into_iter()
        .zip(groups_sizes)
        .map(|(ev, sizes)| EigenGroup::new(ev, sizes))
        .collect();

    let transform = match mode {
        ScalarMode::Float => seeded_transform(dim, seed),
        ScalarMode::Exact => seeded_exact_transform(dim, seed),
    };
    JordanSpec::new(transform, groups, &Tolerance::default()).unwrap()
}

/// Fixed 4x4 showcase instance: eigenvalues 2 and 3 with one block each,
/// eigenvalue 5 with a single size-2 block, small integer transform.
pub fn showcase_4x4(mode: ScalarMode) -> JordanSpec {
    let transform = match mode {
        ScalarMode::Exact => MatrixC::exact_from_int(&[
            &[1, 2, 3, 4],
            &[0, 1, 4, 3],
            &[2, 0, 1, 1],
            &[3, 4, 1, 2],
        ])
        .unwrap(),
        ScalarMode::Float => MatrixC::float_from_real(&[
            &[1.0, 2.0, 3.0, 4.0],
            &[0.0, 1.0, 4.0, 3.0],
            &[2.0, 0.0, 1.0, 1.0],
            &[3.0, 4.0, 1.0, 2.0],
        ])
        .unwrap(),
    };
    let (two, three, five) = match mode {
        ScalarMode::Exact => (
            Scalar::exact_int(2, 0),
            Scalar::exact_int(3, 0),
            Scalar::exact_int(5, 0),
        ),
        ScalarMode::Float => (
            Scalar::float(2.0, 0.0),
            Scalar::float(3.0, 0.0),
            Scalar::float(5.0, 0.0),
        ),
    };
    JordanSpec::new(
        transform,
        vec![
            EigenGroup::new(two, vec![1]),
            EigenGroup::new(three, vec![1]),
            EigenGroup::new(five, vec![2]),
        ],
        &Tolerance::default(),
    )
    .unwrap()
}
