//! Fixtures shared by the criterion benches.

use ddmet_core::{ComplexMatrix, ReservoirParams, C64};

/// λ = 0.5, γ₀ = 5, Δ = 1.5, ω₀ = 10.
pub fn reference_params() -> ReservoirParams {
    ReservoirParams::new(0.5, 5.0, 1.5, 10.0).expect("valid parameters")
}

/// Deterministic dense Hermitian matrix with a spread spectrum.
pub fn hermitian(dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        m[(i, i)] = C64::new(i as f64 - dim as f64 / 2.0, 0.0);
        for j in i + 1..dim {
            let z = C64::new(((i * 7 + j * 3) as f64).sin(), ((i * 5 + j) as f64).cos()) * 0.3;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}
