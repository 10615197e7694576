#![allow(dead_code)]

/// Tanh–sinh rule on `[0, 1]`. The integrand receives both `x` and `1 − x`,
/// each computed without cancellation, so endpoint singularities such as
/// `(1 − x)^{−1/2}` stay accurate.
pub fn tanh_sinh<F: FnMut(f64, f64) -> f64>(mut f: F) -> f64 {
    let h = 1.0 / 64.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut total = 0.0;
    for k in -320i32..=320 {
        let t = k as f64 * h;
        let s = half_pi * t.sinh();
        let w = h * half_pi * t.cosh() / (2.0 * s.cosh().powi(2));
        if !(w > 1e-300) {
            continue;
        }
        let x = 1.0 / (1.0 + (-2.0 * s).exp());
        let xc = 1.0 / (1.0 + (2.0 * s).exp());
        total += w * f(x, xc);
    }
    total
}

/// Mean and standard error from batch means of an autocorrelated series.
pub fn batch_mean(xs: &[f64], batches: usize) -> (f64, f64) {
    let per = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(per).map(|c| c.iter().sum::<f64>() / per as f64).collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (m, (var / means.len() as f64).sqrt())
}
