use std::sync::OnceLock;

use statrs::function::erf::erfc;

pub(crate) const NODES: usize = 32;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on `P_32`.
pub(crate) fn gauss_legendre() -> &'static ([f64; NODES], [f64; NODES]) {
    static RULE: OnceLock<([f64; NODES], [f64; NODES])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = NODES;
        let mut x = [0.0; NODES];
        let mut w = [0.0; NODES];
        for i in 0..n.div_ceil(2) {
            let mut r = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, r);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * r * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (r * p1 - p0) / (r * r - 1.0);
                let step = p1 / dp;
                r -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = -r;
            x[n - 1 - i] = r;
            let wi = 2.0 / ((1.0 - r * r) * dp * dp);
            w[i] = wi;
            w[n - 1 - i] = wi;
        }
        (x, w)
    })
}

/// Calls `f(node, weight)` for a composite rule on `[a, b]` with panels no wider than `h`.
pub(crate) fn for_each_node(a: f64, b: f64, h: f64, max_panels: usize, mut f: impl FnMut(f64, f64)) {
    if b <= a {
        return;
    }
    let panels = (((b - a) / h).ceil() as usize).clamp(1, max_panels);
    let width = (b - a) / panels as f64;
    let (xs, ws) = gauss_legendre();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        for (x, w) in xs.iter().zip(ws) {
            f(mid + half * x, half * w);
        }
    }
}

/// Standard normal upper tail `Pr{N > z}`.
#[inline]
pub(crate) fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `Pr{a < N(mean, sd²) < b}`, evaluated on the side that avoids cancellation.
#[inline]
pub(crate) fn interval_mass(a: f64, b: f64, mean: f64, sd: f64) -> f64 {
    let za = (a - mean) / sd;
    let zb = (b - mean) / sd;
    if za >= 0.0 {
        upper_tail(za) - upper_tail(zb)
    } else if zb <= 0.0 {
        upper_tail(-zb) - upper_tail(-za)
    } else {
        1.0 - upper_tail(-za) - upper_tail(zb)
    }
}

#[inline]
pub(crate) fn normal_pdf(x: f64, sd: f64) -> f64 {
    let z = x / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}
