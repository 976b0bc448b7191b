use num_complex::Complex64;

/// Eighth-order central stencil for the second derivative.
const STENCIL: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Half-width of the stencil: results start at index `FD_MARGIN`.
pub const FD_MARGIN: usize = 4;

/// Second derivative of uniformly spaced samples at indices
/// `FD_MARGIN..len - FD_MARGIN`.
pub fn second_derivative(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    if n <= 2 * FD_MARGIN {
        return Vec::new();
    }
    let inv = 1.0 / (h * h);
    (FD_MARGIN..n - FD_MARGIN)
        .map(|i| {
            STENCIL
                .iter()
                .enumerate()
                .map(|(s, c)| *c * values[i + s - FD_MARGIN])
                .sum::<Complex64>()
                * inv
        })
        .collect()
}
