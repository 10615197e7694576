//! Quadrature rules used by the exact oracles.

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = 0.5 * (1.0 - x);
        ws[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Tanh–sinh rule on `[0, 1]`. Robust to the infinite slopes Beta CDFs have
/// at the endpoints when a shape parameter is below one.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F) -> f64 {
    let h = 1.0 / 64.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut total = 0.0;
    for k in -320i32..=320 {
        let t = k as f64 * h;
        let s = half_pi * t.sinh();
        let c = s.cosh();
        let x = 0.5 * (1.0 + s.tanh());
        let w = h * 0.5 * half_pi * t.cosh() / (c * c);
        if w < 1e-300 {
            continue;
        }
        total += w * f(x);
    }
    total
}
