//! Composite Simpson rule on uniform periodic grids.

/// Uniform grid `x_i = i h`, `i = 0..points`, covering `[0, length)`.
pub fn periodic_grid(length: f64, points: usize) -> Vec<f64> {
    let h = length / points as f64;
    (0..points).map(|i| i as f64 * h).collect()
}

/// Simpson integral of a periodic function sampled on [`periodic_grid`].
///
/// The closing point `x = length` equals `x = 0`, so the endpoint weights
/// merge into `2/3`. `values.len()` must be even.
pub fn simpson_periodic(values: &[f64], length: f64) -> f64 {
    let n = values.len();
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even number of intervals");
    let h = length / n as f64;
    let mut even = 0.0;
    let mut odd = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i % 2 == 0 {
            even += v;
        } else {
            odd += v;
        }
    }
    h / 3.0 * (2.0 * even + 4.0 * odd)
}
