//! Inputs shared by the criterion benches.

use ifsproj_core::geometry::Mat;

/// Deterministic irreducible nonnegative `q × q` matrix.
pub fn test_matrix(q: usize) -> Mat {
    Mat::from_fn(q, q, |i, j| {
        let base = ((i * 31 + j * 17) % 13) as f64 / 13.0;
        if (i + 1) % q == j {
            base + 0.5
        } else {
            base
        }
    })
}
