#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use schrodingerisation::linalg::{hermitian_eigenvalues, norm2};
use schrodingerisation::ode::{LinearOdeSystem, MatrixFn, SourceFn};
use schrodingerisation::{SparseMatrix, C64};

pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, norm: f64) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| complex_normal(rng)).collect();
    let s = norm / norm2(&v);
    v.into_iter().map(|z| z * s).collect()
}

/// Complex A with λ_max((A + A†)/2) ≤ 0 and ‖A‖₂ ∈ [0.5, 1]: a Gaussian
/// matrix shifted below zero by a random margin, then rescaled.
pub fn random_dissipative<R: Rng>(rng: &mut R, n: usize) -> SparseMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| complex_normal(rng) / (n as f64).sqrt());
    let h1 = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let top = *hermitian_eigenvalues(&SparseMatrix::from_dense(&h1)).unwrap().last().unwrap();
    let shift = top + rng.gen_range(0.0..0.5);
    let a = g - DMatrix::identity(n, n) * C64::new(shift, 0.0);
    let norm = a.clone().svd(false, false).singular_values[0];
    let scale = rng.gen_range(0.5..1.0) / norm;
    SparseMatrix::from_dense(&(a * C64::new(scale, 0.0)))
}

/// Random dissipative system with unit-norm u0; `with_source` adds a
/// constant b with ‖b‖ ∈ [0.1, 1].
pub fn random_system<R: Rng>(rng: &mut R, n: usize, with_source: bool) -> LinearOdeSystem {
    let a = random_dissipative(rng, n);
    let u0 = random_vector(rng, n, 1.0);
    let b = if with_source {
        let nb = rng.gen_range(0.1..1.0);
        SourceFn::Constant(random_vector(rng, n, nb))
    } else {
        SourceFn::Zero
    };
    LinearOdeSystem::new(MatrixFn::Constant(a), b, u0).unwrap()
}
