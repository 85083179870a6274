//! Closed-form solutions of the model problems and error norms.

use std::f64::consts::PI;

/// u(t, x) = e^{x−t}
pub fn exact_convection(t: f64, x: f64) -> f64 {
    (x - t).exp()
}

/// u(t, x) = e^{−π²t} sin(πx)
pub fn exact_heat(t: f64, x: f64) -> f64 {
    (-PI * PI * t).exp() * (PI * x).sin()
}

/// Raised cosine on [lo, hi], zero outside.
pub fn cosine_bump(s: f64, lo: f64, hi: f64) -> f64 {
    if s < lo || s > hi {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    0.5 * (1.0 + (PI * (s - mid) / half).cos())
}

/// Initial bump of the interface-advection run on [−a, a]: a raised cosine
/// centred at s = 0.28 with half-width 0.24 in the unit variable
/// s = (x + a)/(2a).
pub fn interface_bump(x: f64, a: f64) -> f64 {
    cosine_bump((x + a) / (2.0 * a), 0.04, 0.52)
}

/// Characteristic solution of u_t + c(x)u_x = 0 with c = c⁻ (x < 0),
/// c⁺ (x > 0) and u(0⁺) = ρ·u(0⁻). Boundary points go to the left branch.
pub fn exact_interface_advection(t: f64, x: f64, u0: &dyn Fn(f64) -> f64, c_minus: f64, c_plus: f64, rho: f64) -> f64 {
    if x <= 0.0 {
        u0(x - c_minus * t)
    } else if x <= c_plus * t {
        rho * u0(c_minus / c_plus * x - c_minus * t)
    } else {
        u0(x - c_plus * t)
    }
}

/// Parameters of the moving-interface diffusion problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StefanParams {
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// α(t) = alpha0 + alpha1·t
    pub alpha0: f64,
    pub alpha1: f64,
}

impl Default for StefanParams {
    fn default() -> Self {
        StefanParams { beta_minus: 1.0, beta_plus: 2.0, alpha0: 0.25, alpha1: 0.5 }
    }
}

impl StefanParams {
    pub fn alpha(&self, t: f64) -> f64 {
        self.alpha0 + self.alpha1 * t
    }
}

/// ((x−α)² + 1/β⁻)eˣ for x ≤ α, ((x−α)² + 1/β⁺)eˣ + (1/β⁻ − 1/β⁺)e^α otherwise.
pub fn exact_stefan(t: f64, x: f64, p: &StefanParams) -> f64 {
    let a = p.alpha(t);
    let q = x - a;
    if x <= a {
        (q * q + 1.0 / p.beta_minus) * x.exp()
    } else {
        (q * q + 1.0 / p.beta_plus) * x.exp() + (1.0 / p.beta_minus - 1.0 / p.beta_plus) * a.exp()
    }
}

/// f = u_t − (βu_x)_x for `exact_stefan`, per side of the interface.
pub fn stefan_source(t: f64, x: f64, p: &StefanParams) -> f64 {
    let a = p.alpha(t);
    let ad = p.alpha1;
    let q = x - a;
    let ex = x.exp();
    let poly = 2.0 + 4.0 * q + q * q;
    if x <= a {
        -2.0 * ad * q * ex - p.beta_minus * (poly + 1.0 / p.beta_minus) * ex
    } else {
        -2.0 * ad * q * ex + (1.0 / p.beta_minus - 1.0 / p.beta_plus) * ad * a.exp()
            - p.beta_plus * (poly + 1.0 / p.beta_plus) * ex
    }
}

fn sqrt0(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

/// Initial phase-space density: indicator of two half-ellipses.
pub fn optics_initial(x: f64, xi: f64) -> f64 {
    let left = x < 0.0 && xi > 0.0 && (x * x + 4.0 * xi * xi).sqrt() < 1.0;
    let right = x > 0.0 && xi < 0.0 && (x * x + xi * xi).sqrt() < 1.0;
    if left || right {
        1.0
    } else {
        0.0
    }
}

/// Index of the region of the t = 1 optics solution containing (x, ξ), in
/// the order the regions are listed by `exact_optics_t1`.
pub fn optics_regions(x: f64, xi: f64) -> [bool; 6] {
    [
        0.0 < x && x < 0.2 && sqrt0(1.0 - (0.2 - x).powi(2)) < xi && xi < 1.5 * sqrt0(1.0 - (3.0 * x - 0.6).powi(2)),
        0.0 < x && x < 0.2 && 0.0 < xi && xi < sqrt0(1.0 - (0.2 - x).powi(2)),
        0.0 < x && x < 0.8 && -sqrt0(1.0 - (x + 0.2).powi(2)) < xi && xi < 0.0,
        -0.4 < x && x < 0.0 && 0.0 < xi && xi < 0.5 * sqrt0(1.0 - (x - 0.6).powi(2)),
        -0.6 < x && x < 0.0 && -sqrt0(1.0 - (x / 3.0 + 0.2).powi(2)) / 3.0 < xi && xi < 0.0,
        -0.6 < x && x < 0.0 && -0.5 * sqrt0(1.0 - (x + 0.6).powi(2)) < xi
            && xi < -sqrt0(1.0 - (x / 3.0 + 0.2).powi(2)) / 3.0,
    ]
}

/// Density at t = 1: a_T on the transmitted region, 1 on the four
/// unaffected regions, a_R on the reflected region, 0 elsewhere.
pub fn exact_optics_t1(x: f64, xi: f64, a_t: f64, a_r: f64) -> f64 {
    let r = optics_regions(x, xi);
    let values = [a_t, 1.0, 1.0, 1.0, 1.0, a_r];
    for (hit, v) in r.iter().zip(values) {
        if *hit {
            return v;
        }
    }
    0.0
}

/// Cell average of `f` over [xc ± dx/2] × [ξc ± dξ/2] by the q×q midpoint rule.
pub fn cell_average(f: &dyn Fn(f64, f64) -> f64, xc: f64, xic: f64, dx: f64, dxi: f64, q: usize) -> f64 {
    let mut acc = 0.0;
    for a in 0..q {
        let ox = ((a as f64 + 0.5) / q as f64 - 0.5) * dx;
        for b in 0..q {
            let oy = ((b as f64 + 0.5) / q as f64 - 0.5) * dxi;
            acc += f(xc + ox, xic + oy);
        }
    }
    acc / (q * q) as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub l_inf: f64,
    pub l2: f64,
    pub l1: f64,
    pub n_points: usize,
}

/// Weighted norms of numeric − exact.
pub fn error_norms(numeric: &[f64], exact: &[f64], weights: &[f64]) -> ErrorReport {
    assert_eq!(numeric.len(), exact.len());
    assert_eq!(numeric.len(), weights.len());
    let mut r = ErrorReport { l_inf: 0.0, l2: 0.0, l1: 0.0, n_points: numeric.len() };
    for ((a, b), w) in numeric.iter().zip(exact).zip(weights) {
        let d = (a - b).abs();
        r.l_inf = r.l_inf.max(d);
        r.l2 += w * d * d;
        r.l1 += w * d;
    }
    r.l2 = r.l2.sqrt();
    r
}

/// Max-norm error relative to the max-norm of the exact values.
pub fn relative_linf(numeric: &[f64], exact: &[f64]) -> f64 {
    let num = numeric.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = exact.iter().map(|v| v.abs()).fold(0.0, f64::max);
    num / den
}
