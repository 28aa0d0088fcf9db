//! Small fixed-order quadrature rules and special functions.

/// 4-point Gauss–Legendre nodes on `[-1, 1]`; exact for degree ≤ 7.
pub const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
pub const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_85,
];

/// 4-point Gauss–Legendre rule on `[a, b]`.
#[inline]
pub fn gl4<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for k in 0..4 {
        s += GL4_WEIGHTS[k] * f(mid + half * GL4_NODES[k]);
    }
    s * half
}

/// Pushes the nodes and weights of `gl4` on every panel of `[a, b]` split
/// into pieces no longer than `max_panel`.
pub fn push_gl4_panels(a: f64, b: f64, max_panel: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    if b <= a {
        return;
    }
    let n = ((b - a) / max_panel).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    for i in 0..n {
        let lo = a + i as f64 * h;
        let mid = lo + 0.5 * h;
        for k in 0..4 {
            nodes.push(mid + 0.5 * h * GL4_NODES[k]);
            weights.push(0.5 * h * GL4_WEIGHTS[k]);
        }
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Cosine integral `Ci(x) = −∫_x^∞ cos t / t dt` for `x > 0`.
///
/// Power series below 2, complex continued fraction (modified Lentz)
/// for the auxiliary function `E₁(ix)` above.
pub fn cosine_integral(x: f64) -> f64 {
    assert!(x > 0.0, "Ci requires x > 0");
    if x < 2.0 {
        // Ci(x) = γ + ln x + Σ_{k≥1} (−x²)^k / (2k (2k)!)
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= -x2 / ((2.0 * kf - 1.0) * (2.0 * kf));
            let add = term / (2.0 * kf);
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        use num_complex::Complex64;
        // E₁(ix) via continued fraction; Ci(x) = −Re E₁(ix)
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..200 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        let e1 = Complex64::new(x.cos(), -x.sin()) * h;
        -e1.re
    }
}

/// `∫_a^∞ cos x / x³ dx` for `a > 0`.
pub fn cos_over_cube_tail(a: f64) -> f64 {
    let (s, c) = a.sin_cos();
    c / (2.0 * a * a) - s / (2.0 * a) + 0.5 * cosine_integral(a)
}

/// `∫_a^∞ sin x / x⁴ dx` for `a > 0`.
pub fn sin_over_quartic_tail(a: f64) -> f64 {
    a.sin() / (3.0 * a * a * a) + cos_over_cube_tail(a) / 3.0
}
