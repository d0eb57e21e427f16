//! Reference values for J0, J1, Y0, Y1 computed without the library path:
//! ascending series for small arguments, trapezoid / Gauss-Legendre
//! quadrature of the Bessel integrals in the middle range, and the Hankel
//! asymptotic expansion for large arguments.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// J_n(x) = (1/π) ∫_0^π cos(nθ − x sinθ) dθ. The integrand extends to an
/// even 2π-periodic function, so the trapezoid rule converges spectrally.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x <= 2.0 {
        return series_j(n, x);
    }
    let m = (2.0 * x) as usize + 96;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for k in 1..m {
        s += f(k as f64 * h);
    }
    s * h / PI
}

fn series_j(n: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = (0.5 * x).powi(n as i32) / factorial(n);
    let mut sum = term;
    for k in 1..60u32 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn digamma_int(m: u32) -> f64 {
    // ψ(m) for positive integer m
    -EULER_GAMMA + (1..m).map(|k| 1.0 / k as f64).sum::<f64>()
}

/// Ascending series for Y_n, n ∈ {0, 1}.
fn series_y(n: u32, x: f64) -> f64 {
    let z2 = 0.25 * x * x;
    let mut head = 0.0;
    if n == 1 {
        head = -2.0 / (PI * x);
    }
    let log_part = 2.0 / PI * (0.5 * x).ln() * series_j(n, x);
    let mut sum = 0.0;
    let mut pow = (0.5 * x).powi(n as i32) / factorial(n);
    for k in 0..80u32 {
        let t = (digamma_int(k + 1) + digamma_int(n + k + 1)) * pow;
        sum += t;
        pow *= -z2 / ((k + 1) as f64 * (n + k + 1) as f64);
        if t.abs() < 1e-19 && k > 4 {
            break;
        }
    }
    head + log_part - sum / PI
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    for i in 1..=order {
        let mut x = (PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, x);
                for k in 2..=order {
                    let q2 = ((2 * k - 1) as f64 * x * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = order as f64 * (x * q1 - q0) / (x * x - 1.0);
                out.push((x, 2.0 / ((1.0 - x * x) * dq * dq)));
                break;
            }
        }
    }
    out
}

fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let s: f64 = rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum();
        total += 0.5 * h * s;
    }
    total
}

/// Integral representation of Y_n (valid for x > 0).
fn quadrature_y(n: u32, x: f64) -> f64 {
    let rule = gauss_legendre(20);
    let nf = n as f64;
    let osc = integrate(
        |t| (x * t.sin() - nf * t).sin(),
        0.0,
        PI,
        (x as usize).max(8) * 2,
        &rule,
    );
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let t_max = (60.0 / x).asinh() + 1.0;
    let tail = integrate(
        |t| ((nf * t).exp() + sign * (-nf * t).exp()) * (-x * t.sinh()).exp(),
        0.0,
        t_max,
        400,
        &rule,
    );
    (osc - tail) / PI
}

/// Hankel asymptotic expansion; accurate to rounding for x ≳ 25.
fn asymptotic(n: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n * n) as f64;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0; // a_k / x^k
    let mut prev: f64 = f64::INFINITY;
    for k in 0..60u32 {
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        let odd = (2 * k + 1) as f64;
        a *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
    }
    // χ = x − (n/2 + 1/4)π; expand sin/cos of the exact x to avoid
    // reducing a rounded large argument.
    let phi = (0.5 * n as f64 + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let sin_chi = sx * cp - cx * sp;
    let cos_chi = cx * cp + sx * sp;
    let amp = (2.0 / (PI * x)).sqrt();
    let j = amp * (p * cos_chi - q * sin_chi);
    let y = amp * (p * sin_chi + q * cos_chi);
    (j, y)
}

pub fn bessel_y(n: u32, x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 3.0 {
        series_y(n, x)
    } else if x <= 30.0 {
        quadrature_y(n, x)
    } else {
        asymptotic(n, x).1
    }
}

/// J_n from the asymptotic branch, used to cross-check the quadrature.
pub fn bessel_j_asymptotic(n: u32, x: f64) -> f64 {
    asymptotic(n, x).0
}
