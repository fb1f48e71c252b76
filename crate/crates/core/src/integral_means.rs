//! Circle means `M(x)`, the radial accumulation `h(x)` and the Gaussian
//! integral mean `h(x)/φ(x)` on geometric radius grids.

use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entire::EntireFunction;
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::special_fn::{lower_incomplete_gamma, phi};

const TRAPEZOID_START: usize = 64;
const TRAPEZOID_CAP: usize = 1 << 16;
const RADIAL_MAX_PANELS: usize = 4000;
const RETRY_MAX_PANELS: usize = 4000;
const SERIES_TERM_CAP: usize = 4000;

/// The pair `(p, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanParams {
    pub p: f64,
    pub alpha: f64,
}

impl MeanParams {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::domain(format!(
                "p must be positive and finite, got {p}"
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { p, alpha })
    }
}

/// `M(x) = ∫₀^{2π} |f(√x e^{iθ})|^p dθ` with its first two `x`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleMean {
    pub x: f64,
    pub value: f64,
    pub quadrature_error: f64,
    pub dm: f64,
    /// `NaN` when `M″` does not exist at `x` (a zero of `f` on the circle
    /// with `p ≤ 1`).
    pub d2m: f64,
}

impl CircleMean {
    /// `y = xM′/M`
    pub fn slope(&self) -> f64 {
        self.x * self.dm / self.value
    }
}

fn validate_circle_args(p: f64, x: f64, tolerance: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("circle mean needs x > 0, got {x}")));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("circle mean needs p > 0, got {p}")));
    }
    if !(tolerance > 0.0 && tolerance <= 1e-2) {
        return Err(Error::domain(format!(
            "circle mean tolerance must lie in (0, 1e-2], got {tolerance}"
        )));
    }
    Ok(())
}

/// Circle mean with derivatives.
///
/// For `p = 2` and a finite power series this is the orthogonality identity
/// `2π Σ |c_j|² x^j` and its term-wise derivatives. Otherwise the periodic
/// trapezoidal rule with node doubling from 64 to 2¹⁶ nodes is applied to
/// `|f|^p` and to its `x`-derivatives, obtained by differentiating under the
/// integral. If doubling stalls (a zero of `f` on or near the circle with
/// `p` not an even integer) the integral is redone once by adaptive
/// Gauss–Legendre on `[θ*, θ* + 2π]`, where `θ*` is the node with the
/// smallest `|f|`.
pub fn circle_mean(f: &EntireFunction, p: f64, x: f64, tolerance: f64) -> Result<CircleMean> {
    circle_moments(f, p, x, tolerance, 2)
}

/// `M(x)` alone; convergence is only required of the value.
pub fn circle_mean_value(f: &EntireFunction, p: f64, x: f64, tolerance: f64) -> Result<f64> {
    circle_moments(f, p, x, tolerance, 0).map(|m| m.value)
}

fn circle_moments(
    f: &EntireFunction,
    p: f64,
    x: f64,
    tolerance: f64,
    order: usize,
) -> Result<CircleMean> {
    validate_circle_args(p, x, tolerance)?;
    if p == 2.0 {
        if let Some(coefficients) = f.coefficients() {
            return Ok(parseval(&coefficients, x));
        }
    }
    trapezoid(f, p, x, tolerance, order)
}

fn parseval(coefficients: &[Complex64], x: f64) -> CircleMean {
    let (mut value, mut dm, mut d2m) = (0.0, 0.0, 0.0);
    // Horner in x on the weights |c_j|²
    for (j, c) in coefficients.iter().enumerate().rev() {
        let w = c.norm_sqr();
        let jf = j as f64;
        d2m = d2m * x + w * jf * (jf - 1.0);
        dm = dm * x + w * jf;
        value = value * x + w;
    }
    CircleMean {
        x,
        value: TAU * value,
        quadrature_error: 0.0,
        dm: TAU * dm / x,
        d2m: TAU * d2m / (x * x),
    }
}

/// `|f|^p` at `√x e^{iθ}` and its first two derivatives in `x`.
fn circle_integrand(f: &EntireFunction, p: f64, x: f64, theta: f64) -> ([f64; 3], f64) {
    let z = Complex64::from_polar(x.sqrt(), theta);
    let [f0, f1, f2] = f.jet(z);
    let dz = z / (2.0 * x);
    let df = f1 * dz;
    let d2f = f2 * dz * dz - f1 * z / (4.0 * x * x);
    let q = f0.norm_sqr();
    if q == 0.0 {
        return ([0.0; 3], 0.0);
    }
    let q1 = 2.0 * (f0.conj() * df).re;
    let q2 = 2.0 * (df.norm_sqr() + (f0.conj() * d2f).re);
    let half = 0.5 * p;
    let g = q.powf(half);
    let g1 = half * g / q * q1;
    let g2 = half * (half - 1.0) * g / (q * q) * q1 * q1 + half * g / q * q2;
    ([g, g1, g2], q)
}

fn converged(prev: &[f64; 3], next: &[f64; 3], x: f64, tolerance: f64, order: usize) -> bool {
    let base = next[0].abs();
    (0..=order).all(|k| {
        let scale = next[k].abs() + base / x.powi(k as i32);
        (next[k] - prev[k]).abs() <= tolerance * scale
    })
}

fn trapezoid(
    f: &EntireFunction,
    p: f64,
    x: f64,
    tolerance: f64,
    order: usize,
) -> Result<CircleMean> {
    let mut sums = [0.0; 3];
    let mut min_q = f64::INFINITY;
    let mut min_theta = 0.0;
    let mut add_nodes = |sums: &mut [f64; 3], n: usize, stride: usize, offset: usize| {
        for j in (offset..n).step_by(stride) {
            let theta = TAU * j as f64 / n as f64;
            let (g, q) = circle_integrand(f, p, x, theta);
            for k in 0..3 {
                sums[k] += g[k];
            }
            if q < min_q {
                min_q = q;
                min_theta = theta;
            }
        }
    };
    let mut n = TRAPEZOID_START;
    add_nodes(&mut sums, n, 1, 0);
    let mut estimate = sums.map(|s| TAU * s / n as f64);
    while n < TRAPEZOID_CAP {
        n *= 2;
        add_nodes(&mut sums, n, 2, 1);
        let next = sums.map(|s| TAU * s / n as f64);
        if next.iter().take(order + 1).any(|v| !v.is_finite()) {
            break;
        }
        if converged(&estimate, &next, x, tolerance, order) {
            return Ok(CircleMean {
                x,
                value: next[0],
                quadrature_error: (next[0] - estimate[0]).abs(),
                dm: next[1],
                d2m: next[2],
            });
        }
        estimate = next;
    }
    retry_around_zero(f, p, x, tolerance, order, min_theta)
}

fn retry_around_zero(
    f: &EntireFunction,
    p: f64,
    x: f64,
    tolerance: f64,
    order: usize,
    theta_star: f64,
) -> Result<CircleMean> {
    let component = |k: usize| {
        integrate_adaptive(
            &|theta: f64| circle_integrand(f, p, x, theta).0[k],
            theta_star,
            theta_star + TAU,
            tolerance,
            0.0,
            RETRY_MAX_PANELS,
        )
    };
    let value = component(0).map_err(|_| {
        Error::non_convergence(
            format!("circle mean at x={x} (p={p}, zero of f near the circle)"),
            TRAPEZOID_CAP,
        )
    })?;
    let dm = match component(1) {
        Ok(v) => v.value,
        Err(e) if order >= 1 => return Err(e),
        Err(_) => f64::NAN,
    };
    let d2m = component(2).map(|v| v.value).unwrap_or(f64::NAN);
    Ok(CircleMean {
        x,
        value: value.value,
        quadrature_error: value.error,
        dm,
        d2m,
    })
}

/// `h(x)` with the adaptive quadrature's error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HValue {
    pub h: f64,
    pub error: f64,
}

/// `h(x) = ∫₀ˣ M(t) e^{−αt} dt` at every point of the increasing list `xs`.
///
/// The integral is split at the grid points; each piece is integrated
/// independently (concurrently) by adaptive Gauss–Legendre to relative
/// `tolerance`, and the pieces are summed in grid order.
pub fn accumulate_h(
    f: &EntireFunction,
    params: MeanParams,
    xs: &[f64],
    tolerance: f64,
) -> Result<Vec<HValue>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    if !(xs[0] > 0.0) || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(
            "x values must be positive and strictly increasing".into(),
        ));
    }
    let bounds: Vec<(f64, f64)> = std::iter::once((0.0, xs[0]))
        .chain(xs.windows(2).map(|w| (w[0], w[1])))
        .collect();
    let pieces: Vec<(f64, f64)> = bounds
        .par_iter()
        .map(|&(a, b)| integrate_piece(f, params, a, b, tolerance))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    let mut error = 0.0;
    Ok(pieces
        .into_iter()
        .map(|(v, e)| {
            total += v;
            error += e;
            HValue { h: total, error }
        })
        .collect())
}

fn integrate_piece(
    f: &EntireFunction,
    params: MeanParams,
    a: f64,
    b: f64,
    tolerance: f64,
) -> Result<(f64, f64)> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |t: f64| match circle_mean_value(f, params.p, t, tolerance) {
        Ok(m) => m * (-params.alpha * t).exp(),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let result = integrate_adaptive(&integrand, a, b, tolerance, 0.0, RADIAL_MAX_PANELS);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result.map(|r| (r.value, r.error))
}

/// Radii `r_min · q^i`, `i = 0..points`, uniform in `ln r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    values: Vec<f64>,
}

impl GeometricGrid {
    pub fn new(r_min: f64, r_max: f64, points: usize) -> Result<Self> {
        if !(r_min > 0.0) || !r_min.is_finite() || !r_max.is_finite() || !(r_max > r_min) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < r_min < r_max, got r_min={r_min}, r_max={r_max}"
            )));
        }
        if points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {points}"
            )));
        }
        let step = (r_max / r_min).ln() / (points - 1) as f64;
        let mut values: Vec<f64> = (0..points)
            .map(|i| r_min * (step * i as f64).exp())
            .collect();
        values[points - 1] = r_max;
        Ok(Self { values })
    }

    /// Accept an explicit list if it is strictly increasing and geometric to
    /// relative `1e-9` in the ratio.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidGrid("need at least 3 points".into()));
        }
        if !(values[0] > 0.0) || values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "grid must be positive and strictly increasing".into(),
            ));
        }
        let step = (values[1] / values[0]).ln();
        if values
            .windows(2)
            .any(|w| ((w[1] / w[0]).ln() - step).abs() > 1e-9 * step)
        {
            return Err(Error::InvalidGrid("grid is not geometric".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Spacing in `ln r`.
    pub fn log_step(&self) -> f64 {
        let n = self.values.len();
        (self.values[n - 1] / self.values[0]).ln() / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub r: f64,
    pub x: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub h: f64,
    pub phi: f64,
    pub mean: f64,
}

/// Gaussian integral means sampled on a geometric radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanProfile {
    pub params: MeanParams,
    pub tolerance: f64,
    pub grid: GeometricGrid,
    pub rows: Vec<ProfileRow>,
}

impl MeanProfile {
    pub fn means(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|row| row.mean)
    }
}

/// `M_{p,α}(f, r) = h(r²)/φ(r²)` at every radius of `grid`.
pub fn radial_mean_profile(
    f: &EntireFunction,
    params: MeanParams,
    grid: &GeometricGrid,
    tolerance: f64,
) -> Result<MeanProfile> {
    let xs: Vec<f64> = grid.values().iter().map(|r| r * r).collect();
    let m: Vec<f64> = xs
        .par_iter()
        .map(|&x| circle_mean_value(f, params.p, x, tolerance))
        .collect::<Result<_>>()?;
    let h = accumulate_h(f, params, &xs, tolerance)?;
    let rows = grid
        .values()
        .iter()
        .zip(&xs)
        .zip(m.iter().zip(&h))
        .map(|((&r, &x), (&m, hv))| {
            let (phi, _) = phi(params.alpha, x);
            ProfileRow {
                r,
                x,
                m,
                h: hv.h,
                phi,
                mean: hv.h / (TAU * phi),
            }
        })
        .collect();
    Ok(MeanProfile {
        params,
        tolerance,
        grid: grid.clone(),
        rows,
    })
}

/// Closed form of the Gaussian mean of `z^k`:
/// `∫₀^{r²} t^{a} e^{−αt} dt / ∫₀^{r²} e^{−αt} dt` with `a = kp/2`.
///
/// `α > 0` goes through the lower incomplete gamma function, `α < 0`
/// through the positive-term series `Σ (βx)^n / (n! (a + 1 + n))` with
/// `β = −α`, and `α = 0` is the ratio `x^a/(a + 1)`.
pub fn monomial_mean_closed_form(k: u32, p: f64, alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("r must be positive, got {r}")));
    }
    if !(p > 0.0) || !p.is_finite() || !alpha.is_finite() {
        return Err(Error::domain("p must be positive, alpha finite"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let a = k as f64 * p / 2.0;
    let x = r * r;
    let ax = alpha * x;
    if ax.abs() > 700.0 {
        return Err(Error::Saturation(format!(
            "alpha·r² = {ax} is out of range"
        )));
    }
    if alpha == 0.0 {
        return Ok(x.powf(a) / (a + 1.0));
    }
    if alpha > 0.0 {
        let num = lower_incomplete_gamma(a + 1.0, ax)?;
        let den = lower_incomplete_gamma(1.0, ax)?;
        let value = num / (alpha.powf(a) * den);
        return if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Saturation("monomial mean overflows".into()))
        };
    }
    let bx = -ax;
    let (mut num, mut den) = (0.0, 0.0);
    let mut power = 1.0; // (βx)^n / n!
    for n in 0..SERIES_TERM_CAP {
        let nf = n as f64;
        if n > 0 {
            power *= bx / nf;
        }
        let tn = power / (a + 1.0 + nf);
        let td = power / (nf + 1.0);
        num += tn;
        den += td;
        if nf > bx && tn < num * 1e-17 && td < den * 1e-17 {
            let value = x.powf(a) * num / den;
            return if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::Saturation("monomial mean overflows".into()))
            };
        }
    }
    Err(Error::non_convergence(
        "monomial mean series",
        SERIES_TERM_CAP,
    ))
}
