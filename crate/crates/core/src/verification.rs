//! Grid suites for the inequalities behind the convexity criteria: the
//! φ and `g` sign facts, positivity of `S` and the bracket on `h/M`, the
//! `d₂` minimisation in `y`, the boundary behaviour of `δ`, and the `d₃`
//! bounds. Failures are data; each one carries every evaluated operand.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::{d_operator, sample_points, y0_threshold, PointSample};
use crate::entire::EntireFunction;
use crate::error::{Error, Result};
use crate::integral_means::MeanParams;
use crate::special_fn::{aux_abcs, aux_g, phi, x0_of_alpha, AuxiliaryBundle};
use crate::tolerance::{self, rel_close, zero_band};

/// Parameter grid for a suite: α values, a geometric x-range and slope samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha_values: Vec<f64>,
    pub x_lo: f64,
    pub x_hi: f64,
    pub count: usize,
    pub y_values: Vec<f64>,
}

impl GridSpec {
    pub fn new(
        alpha_values: Vec<f64>,
        x_lo: f64,
        x_hi: f64,
        count: usize,
        y_values: Vec<f64>,
    ) -> Result<Self> {
        let g = Self {
            alpha_values,
            x_lo,
            x_hi,
            count,
            y_values,
        };
        g.validate()?;
        Ok(g)
    }

    /// α ∈ {−2, −1, −0.5, 0, 0.5, 1, 2}, 400 points in (1e−3, 20].
    pub fn lemma4_default() -> Self {
        Self {
            alpha_values: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
            x_lo: 1e-3,
            x_hi: 20.0,
            count: 400,
            y_values: vec![0.0, 0.5, 1.0, 2.0, 5.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .alpha_values
            .iter()
            .chain(&self.y_values)
            .all(|v| v.is_finite());
        if !finite || !self.x_hi.is_finite() {
            return Err(Error::InvalidGrid("grid values must be finite".into()));
        }
        if !(self.x_lo > 0.0) || !(self.x_hi > self.x_lo) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < x_lo < x_hi, got ({}, {})",
                self.x_lo, self.x_hi
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid("count must be at least 2".into()));
        }
        if self.y_values.iter().any(|&y| y < 0.0) {
            return Err(Error::InvalidGrid("y values must be nonnegative".into()));
        }
        Ok(())
    }

    fn echo(&self) -> [(&'static str, f64); 3] {
        [
            ("x_lo", self.x_lo),
            ("x_hi", self.x_hi),
            ("count", self.count as f64),
        ]
    }

    /// Geometric x-points, with the right end hit exactly. The left end is
    /// excluded: the range is `(x_lo, x_hi]`.
    pub fn xs(&self) -> Vec<f64> {
        let ratio = (self.x_hi / self.x_lo).ln() / self.count as f64;
        let mut v: Vec<f64> = (1..=self.count)
            .map(|i| self.x_lo * (ratio * i as f64).exp())
            .collect();
        v[self.count - 1] = self.x_hi;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteStatus {
    Passed,
    Failed,
    HypothesesNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteFailure {
    pub check: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub operands: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks_run: usize,
    pub failures: Vec<SuiteFailure>,
    pub status: SuiteStatus,
    /// Fixed parameters of the run (α, p, x, ...), empty for pure grid suites.
    pub parameters: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks gathered at one grid point.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<SuiteFailure>,
    hypothesis_failed: bool,
}

impl Tally {
    /// Records `lhs ≤ rhs + tol`.
    fn le(&mut self, check: &str, lhs: f64, rhs: f64, tol: f64, ctx: &Context) {
        self.checks += 1;
        let slack = rhs - lhs;
        if !(slack >= -tol) {
            self.fail(check, lhs, rhs, slack, ctx);
        }
    }

    fn ge(&mut self, check: &str, lhs: f64, rhs: f64, tol: f64, ctx: &Context) {
        self.checks += 1;
        let slack = lhs - rhs;
        if !(slack >= -tol) {
            self.fail(check, lhs, rhs, slack, ctx);
        }
    }

    fn close(&mut self, check: &str, lhs: f64, rhs: f64, rel: f64, floor: f64, ctx: &Context) {
        self.checks += 1;
        if !rel_close(lhs, rhs, rel, floor) {
            let slack = rel * lhs.abs().max(rhs.abs()).max(floor) - (lhs - rhs).abs();
            self.fail(check, lhs, rhs, slack, ctx);
        }
    }

    fn fail(&mut self, check: &str, lhs: f64, rhs: f64, slack: f64, ctx: &Context) {
        self.failures.push(SuiteFailure {
            check: check.to_string(),
            params: ctx.params.clone(),
            lhs,
            rhs,
            slack,
            operands: ctx.operands.clone(),
        });
    }

    fn merge(parts: Vec<Tally>) -> Tally {
        let mut out = Tally::default();
        for t in parts {
            out.checks += t.checks;
            out.failures.extend(t.failures);
            out.hypothesis_failed |= t.hypothesis_failed;
        }
        out
    }

    fn into_report(
        self,
        suite: &str,
        parameters: &[(&str, f64)],
        tolerances: &[(&str, f64)],
    ) -> SuiteReport {
        let status = if self.hypothesis_failed {
            SuiteStatus::HypothesesNotMet
        } else if self.failures.is_empty() {
            SuiteStatus::Passed
        } else {
            SuiteStatus::Failed
        };
        SuiteReport {
            suite: suite.to_string(),
            checks_run: self.checks,
            failures: self.failures,
            status,
            parameters: parameters
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
            tolerances: tolerances
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
        }
    }
}

#[derive(Default, Clone)]
struct Context {
    params: BTreeMap<String, f64>,
    operands: BTreeMap<String, f64>,
}

impl Context {
    fn new(params: &[(&str, f64)]) -> Self {
        Self {
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            operands: BTreeMap::new(),
        }
    }

    fn with(mut self, operands: &[(&str, f64)]) -> Self {
        self.operands
            .extend(operands.iter().map(|&(k, v)| (k.to_string(), v)));
        self
    }

    fn with_bundle(self, b: &AuxiliaryBundle) -> Self {
        self.with(&[
            ("phi", b.phi),
            ("dphi", b.dphi),
            ("g1", b.g1),
            ("g2", b.g2),
            ("g3", b.g3),
            ("A", b.A),
            ("B", b.B),
            ("C", b.C),
            ("S", b.S),
            ("y", b.y),
        ])
    }
}

/// `φ′ = 1 − αφ`, the sign of `φ − x`, `g₁ ≤ 0` (α ≥ 0), `g₂ ≤ 0`, and the
/// sign of `g₃`, at every `(α, x)` of the grid.
pub fn verify_lemma4(grid: &GridSpec) -> Result<SuiteReport> {
    grid.validate()?;
    let sign_tol = tolerance::SIGN;
    let xs = grid.xs();
    let pairs: Vec<(f64, f64)> = grid
        .alpha_values
        .iter()
        .flat_map(|&a| xs.iter().map(move |&x| (a, x)))
        .collect();
    let parts: Vec<Tally> = pairs
        .par_iter()
        .map(|&(alpha, x)| {
            let (p, dp) = phi(alpha, x);
            let g = aux_g(alpha, x);
            let ctx = Context::new(&[("alpha", alpha), ("x", x)]).with(&[
                ("phi", p),
                ("dphi", dp),
                ("g1", g.g1),
                ("g2", g.g2),
                ("g3", g.g3),
            ]);
            let mut t = Tally::default();
            let rhs = 1.0 - alpha * p;
            t.close(
                "dphi = 1 - alpha*phi",
                dp,
                rhs,
                tolerance::PHI_IDENTITY,
                1.0 + (alpha * p).abs(),
                &ctx,
            );
            let band = zero_band(sign_tol, p + x);
            if alpha <= 0.0 {
                t.ge("phi - x >= 0", p - x, 0.0, band, &ctx);
            }
            if alpha >= 0.0 {
                t.le("phi - x <= 0", p - x, 0.0, band, &ctx);
                let scale = x + (alpha * x * x).abs() + p;
                t.le("g1 <= 0", g.g1, 0.0, zero_band(sign_tol, scale), &ctx);
            }
            let scale2 = alpha.abs() * p * p + 2.0 * (1.0 + alpha * x).abs() * p + 2.0 * x;
            t.le("g2 <= 0", g.g2, 0.0, zero_band(sign_tol, scale2), &ctx);
            let band3 = zero_band(sign_tol, x + (1.0 + alpha * x).abs() * p);
            if alpha <= 0.0 {
                t.ge("g3 >= 0", g.g3, 0.0, band3, &ctx);
            }
            if alpha >= 0.0 {
                t.le("g3 <= 0", g.g3, 0.0, band3, &ctx);
            }
            t
        })
        .collect();
    Ok(Tally::merge(parts).into_report(
        "lemma4",
        &grid.echo(),
        &[
            ("phi_identity_rel", tolerance::PHI_IDENTITY),
            ("sign", sign_tol),
        ],
    ))
}

/// `S > 0`, the discriminant identity, the lower bound on `S²` (α ≤ 0),
/// sign equivalence of the two forms of `Δ`, the quotient rule for `D`, and
/// `h/M ≤ φ ≤ (B+S)/(2A)` (α < 0), along the x-points of `grid` at
/// `params.alpha`. The grid's α and y values are not used.
///
/// The slope hypothesis is `M′ ≥ 0`; the constant function is admitted.
pub fn verify_lemma5(
    f: &EntireFunction,
    params: MeanParams,
    grid: &GridSpec,
    quadrature_tol: f64,
) -> Result<SuiteReport> {
    grid.validate()?;
    let sign_tol = tolerance::SIGN;
    let alpha = params.alpha;
    let samples = sample_points(f, params, &grid.xs(), quadrature_tol)?;
    let parts: Vec<Tally> = samples
        .par_iter()
        .map(|s| lemma5_point(s, params, sign_tol))
        .collect::<Result<_>>()?;
    Ok(Tally::merge(parts).into_report(
        "lemma5",
        &[
            ("alpha", alpha),
            ("p", params.p),
            ("x_lo", grid.x_lo),
            ("x_hi", grid.x_hi),
            ("count", grid.count as f64),
        ],
        &[
            ("discriminant_rel", tolerance::DISCRIMINANT),
            ("quotient_rule_rel", QUOTIENT_RULE),
            ("quadrature", quadrature_tol),
            ("sign", sign_tol),
        ],
    ))
}

const QUOTIENT_RULE: f64 = 1e-8;

fn lemma5_point(s: &PointSample, params: MeanParams, sign_tol: f64) -> Result<Tally> {
    let (alpha, x) = (s.alpha, s.x);
    let mut t = Tally::default();
    let base = Context::new(&[("alpha", alpha), ("x", x), ("p", params.p)]).with(&[
        ("M", s.m.value),
        ("dM", s.m.dm),
        ("h", s.h),
        ("h_error", s.h_error),
    ]);
    t.checks += 1;
    if !(s.m.dm >= -zero_band(sign_tol, s.m.value / x)) {
        t.hypothesis_failed = true;
        t.fail("hypothesis M' >= 0", s.m.dm, 0.0, s.m.dm, &base);
        return Ok(t);
    }
    let b = s.bundle()?;
    let ctx = base.with_bundle(&b);

    t.ge("S > 0", b.S, 0.0, 0.0, &ctx);
    if b.S == 0.0 {
        t.fail("S > 0", b.S, 0.0, 0.0, &ctx);
    }

    let lhs_terms = [
        (1.0 - alpha * x).powi(2),
        4.0 * x * b.dphi * (b.phi - x) / (b.phi * b.phi),
    ];
    let floor = b.s_floor();
    t.close(
        "discriminant identity",
        lhs_terms[0] - lhs_terms[1],
        floor * floor,
        tolerance::DISCRIMINANT,
        lhs_terms[0].abs() + lhs_terms[1].abs(),
        &ctx,
    );
    if alpha <= 0.0 {
        let s2 = b.S * b.S;
        t.ge(
            "S^2 >= ((2x-(1+ax)phi)/phi)^2",
            s2,
            floor * floor,
            zero_band(sign_tol, s2),
            &ctx,
        );
    }

    let cmp = s.comparison()?;
    let ctx = ctx.with(&[
        ("delta_direct", cmp.delta_direct),
        ("delta_quadratic", cmp.delta_quadratic),
        ("d_quotient", cmp.d_quotient),
    ]);
    t.checks += 1;
    if !cmp.sign_equivalent(sign_tol) {
        t.fail(
            "sign(delta_direct) = sign(delta_quadratic)",
            cmp.delta_direct,
            cmp.delta_quadratic,
            -cmp.delta_direct.abs(),
            &ctx,
        );
    }
    t.close(
        "D(h/phi) = D(h) - D(phi)",
        cmp.d_quotient,
        cmp.delta_direct,
        QUOTIENT_RULE,
        cmp.direct_scale,
        &ctx,
    );

    if alpha < 0.0 {
        let ratio = s.h / s.m.value;
        let big_root = (b.B + b.S) / (2.0 * b.A);
        t.le("h/M <= phi", ratio, b.phi, zero_band(sign_tol, b.phi), &ctx);
        t.le(
            "phi <= (B+S)/(2A)",
            b.phi,
            big_root,
            zero_band(sign_tol, big_root),
            &ctx,
        );
        t.le(
            "h/M <= (B+S)/(2A)",
            ratio,
            big_root,
            zero_band(sign_tol, big_root),
            &ctx,
        );
    }
    Ok(t)
}

/// `y* ` at which `d₂` is minimal over `y`.
pub fn y_star(alpha: f64, x: f64) -> f64 {
    let (p, _) = phi(alpha, x);
    let (f1, f2) = bracket_facts(alpha, x, p);
    (p - x * (1.0 - alpha * x)) * f2 / (2.0 * (p - x) * f1)
}

/// `−½ (1 + αx²/(φ − x))²`
pub fn d2_minimum(alpha: f64, x: f64) -> f64 {
    let (p, _) = phi(alpha, x);
    let u = 1.0 + alpha * x * x / (p - x);
    -0.5 * u * u
}

/// `φ² − x(3 + αx)φ + 2x²` and `−(1 + 2αx)φ² + x(5 + 3αx)φ − 4x²`.
fn bracket_facts(alpha: f64, x: f64, p: f64) -> (f64, f64) {
    let f1 = p * p - x * (3.0 + alpha * x) * p + 2.0 * x * x;
    let f2 = -(1.0 + 2.0 * alpha * x) * p * p + x * (5.0 + 3.0 * alpha * x) * p - 4.0 * x * x;
    (f1, f2)
}

/// `d₂(y) = (y − xA′/A)(B − S) + 2xA′φ`, with `B − S` in the stable form.
pub fn d2(alpha: f64, x: f64, y: f64) -> Result<f64> {
    let b = aux_abcs(alpha, x, y)?;
    let x_da = b.x_a_prime();
    Ok((y - x_da / b.A) * b.b_minus_s() + 2.0 * x_da * b.phi)
}

/// Sum of the magnitudes of the two terms of `d₂(y)`.
fn d2_scale(alpha: f64, x: f64, y: f64) -> Result<f64> {
    let b = aux_abcs(alpha, x, y)?;
    let x_da = b.x_a_prime();
    Ok(((y - x_da / b.A) * b.b_minus_s()).abs() + (2.0 * x_da * b.phi).abs())
}

/// `[0, max(10, 4y*)]` with 10⁵ intervals.
pub fn default_y_grid(alpha: f64, x: f64) -> Vec<f64> {
    let hi = (4.0 * y_star(alpha, x)).max(10.0);
    let n = 100_000;
    (0..=n).map(|i| hi * i as f64 / n as f64).collect()
}

/// Location and value of the minimum of `d₂` found numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D2Minimum {
    pub grid_y: f64,
    pub grid_value: f64,
    pub grid_step: f64,
    pub refined_y: f64,
    pub refined_value: f64,
    pub refined_step: f64,
}

/// Grid argmin of `d₂`, refined by golden section on the neighbouring cells
/// down to a width of 1/100 of the local grid step.
pub fn minimize_d2(alpha: f64, x: f64, y_grid: &[f64]) -> Result<D2Minimum> {
    if y_grid.len() < 3 {
        return Err(Error::InvalidGrid("y grid needs at least 3 points".into()));
    }
    if y_grid.windows(2).any(|w| !(w[1] > w[0])) || !(y_grid[0] >= 0.0) {
        return Err(Error::InvalidGrid(
            "y grid must be increasing and nonnegative".into(),
        ));
    }
    let values: Vec<f64> = y_grid
        .par_iter()
        .map(|&y| d2(alpha, x, y))
        .collect::<Result<_>>()?;
    let (i, &grid_value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let lo = y_grid[i.saturating_sub(1)];
    let hi = y_grid[(i + 1).min(y_grid.len() - 1)];
    let grid_step = y_grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let refined_step = (hi - lo) / 200.0;
    let (refined_y, refined_value) = golden_section(|y| d2(alpha, x, y), lo, hi, refined_step)?;
    let (refined_y, refined_value) = if refined_value <= grid_value {
        (refined_y, refined_value)
    } else {
        (y_grid[i], grid_value)
    };
    Ok(D2Minimum {
        grid_y: y_grid[i],
        grid_value,
        grid_step,
        refined_y,
        refined_value,
        refined_step,
    })
}

fn golden_section(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    width: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let m = 0.5 * (a + b);
    Ok((m, f(m)?))
}

/// Numerical minimisation of `d₂` over `y_grid` against `y*` and the closed
/// form of `d₂(y*)`, plus the two bracket positivity facts behind `y* ≥ 0`.
pub fn verify_d_chain(alpha: f64, x: f64, y_grid: &[f64]) -> Result<SuiteReport> {
    if !(alpha < 0.0) {
        return Err(Error::domain(format!(
            "d-chain requires alpha < 0, got {alpha}"
        )));
    }
    let x0 = x0_of_alpha(alpha)?;
    if !(x > x0) {
        return Err(Error::domain(format!(
            "d-chain requires x > x0 = {x0}, got {x}"
        )));
    }
    let sign_tol = tolerance::SIGN;
    let (p, _) = phi(alpha, x);
    let g = aux_g(alpha, x);
    let (f1, f2) = bracket_facts(alpha, x, p);
    let ys = y_star(alpha, x);
    let closed = d2_minimum(alpha, x);
    let min = minimize_d2(alpha, x, y_grid)?;
    let ctx = Context::new(&[("alpha", alpha), ("x", x)]).with(&[
        ("phi", p),
        ("g1", g.g1),
        ("g2", g.g2),
        ("g3", g.g3),
        ("y_star", ys),
        ("d2_closed", closed),
        ("grid_y", min.grid_y),
        ("grid_min", min.grid_value),
        ("grid_step", min.grid_step),
        ("refined_y", min.refined_y),
        ("refined_min", min.refined_value),
        ("refined_step", min.refined_step),
        ("bracket1", f1),
        ("bracket2", f2),
    ]);
    let mut t = Tally::default();
    t.le(
        "|grid argmin - y*| <= grid step",
        (min.grid_y - ys).abs(),
        min.grid_step,
        0.0,
        &ctx,
    );
    t.le(
        "|refined argmin - y*| <= refined step",
        (min.refined_y - ys).abs(),
        min.refined_step,
        0.0,
        &ctx,
    );
    // relative 1e-6, or the sign band of the term scale where the minimum
    // itself is at rounding level (x near x0)
    let band = zero_band(sign_tol, d2_scale(alpha, x, ys.max(0.0))?);
    for (check, value) in [
        ("grid min d2 = closed form", min.grid_value),
        ("refined min d2 = closed form", min.refined_value),
        ("d2(y*) = closed form", d2(alpha, x, ys.max(0.0))?),
    ] {
        t.le(
            check,
            (value - closed).abs(),
            D2_REL * closed.abs(),
            band,
            &ctx,
        );
    }
    let scale1 = p * p + (x * (3.0 + alpha * x) * p).abs() + 2.0 * x * x;
    t.ge(
        "phi^2 - x(3+ax)phi + 2x^2 >= 0",
        f1,
        0.0,
        zero_band(sign_tol, scale1),
        &ctx,
    );
    t.close(
        "phi^2 - x(3+ax)phi + 2x^2 = (phi-x)^2 + x g3",
        f1,
        (p - x).powi(2) + x * g.g3,
        tolerance::REL,
        scale1,
        &ctx,
    );
    let scale2 = (1.0 + 2.0 * alpha * x).abs() * p * p
        + (x * (5.0 + 3.0 * alpha * x) * p).abs()
        + 4.0 * x * x;
    t.ge(
        "-(1+2ax)phi^2 + x(5+3ax)phi - 4x^2 >= 0",
        f2,
        0.0,
        zero_band(sign_tol, scale2),
        &ctx,
    );
    t.ge("y* >= 0", ys, 0.0, zero_band(sign_tol, 0.0), &ctx);
    Ok(t.into_report(
        "dchain",
        &[
            ("alpha", alpha),
            ("x", x),
            ("y_points", y_grid.len() as f64),
        ],
        &[
            ("d2_min_rel", D2_REL),
            ("identity_rel", tolerance::REL),
            ("sign", sign_tol),
        ],
    ))
}

const D2_REL: f64 = 1e-6;

/// Which algebraic form of the small root `(B − S)/(2A)` to use in `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaForm {
    /// `2C/(B + S)`
    Stable,
    /// `(B − S)/(2A)`, refused below `x = 1e−4`.
    Unstable,
}

const UNSTABLE_FLOOR: f64 = 1e-4;

/// The small root of `−At² + Bt − C` in the requested form.
pub fn small_root(b: &AuxiliaryBundle, form: DeltaForm) -> Result<f64> {
    match form {
        DeltaForm::Stable => Ok(b.small_root()),
        DeltaForm::Unstable => {
            if b.x < UNSTABLE_FLOOR {
                return Err(Error::Cancellation(format!(
                    "(B-S)/(2A) loses all digits below x = {UNSTABLE_FLOOR}, got x = {}",
                    b.x
                )));
            }
            if b.A == 0.0 {
                return Err(Error::Cancellation("(B-S)/(2A) with A = 0".into()));
            }
            Ok((b.B - b.S) / (2.0 * b.A))
        }
    }
}

/// `δ = h − M · (B − S)/(2A)` along a decreasing sequence of probes in
/// `(0, 1]`: `|δ|` must not increase, `δ` must carry the sign of its regime
/// (`≥ 0` for α < 0 where the convexity hypotheses hold, `≤ 0` for α ≥ 0
/// where `M` is log-concave), and, when `magnitude_bound` is given,
/// `|δ| ≤ magnitude_bound · Mφ` at the last probe.
pub fn verify_delta_boundary(
    f: &EntireFunction,
    params: MeanParams,
    probes: &[f64],
    form: DeltaForm,
    magnitude_bound: Option<f64>,
    quadrature_tol: f64,
) -> Result<SuiteReport> {
    if probes.is_empty() {
        return Err(Error::InvalidGrid("no probes".into()));
    }
    if probes.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::InvalidGrid("probes must lie in (0, 1]".into()));
    }
    if probes.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidGrid(
            "probes must be strictly decreasing".into(),
        ));
    }
    let sign_tol = tolerance::SIGN;
    let alpha = params.alpha;
    let ascending: Vec<f64> = probes.iter().rev().copied().collect();
    let mut samples = sample_points(f, params, &ascending, quadrature_tol)?;
    samples.reverse();
    let x0 = if alpha < 0.0 {
        Some(x0_of_alpha(alpha)?)
    } else {
        None
    };

    let mut t = Tally::default();
    let mut previous: Option<(f64, f64)> = None;
    for (i, s) in samples.iter().enumerate() {
        let b = s.bundle()?;
        let root = small_root(&b, form)?;
        let delta = s.h - s.m.value * root;
        let scale = s.m.value * b.phi;
        let jet = s.m_jet();
        let dm_log = d_operator(&jet, s.x);
        let dm_band = zero_band(sign_tol, jet.d_scale(s.x));
        let ctx = Context::new(&[("alpha", alpha), ("p", params.p), ("x", s.x)])
            .with_bundle(&b)
            .with(&[
                ("M", s.m.value),
                ("dM", s.m.dm),
                ("d2M", s.m.d2m),
                ("h", s.h),
                ("delta", delta),
                ("D(M)", dm_log),
            ]);
        let band = sign_tol * scale;
        if let Some((prev_x, prev_abs)) = previous {
            let _ = prev_x;
            t.le("|delta| nonincreasing", delta.abs(), prev_abs, band, &ctx);
        }
        previous = Some((s.x, delta.abs()));

        if alpha < 0.0 {
            let slope_ok = s.x < x0.unwrap_or(0.0) || {
                let y0 = y0_threshold(alpha, s.x)?;
                b.y >= y0 - zero_band(sign_tol, y0.abs() + b.y)
            };
            if dm_log >= -dm_band && slope_ok {
                t.ge("delta >= 0", delta, 0.0, band, &ctx);
            }
        } else if dm_log <= dm_band {
            t.le("delta <= 0", delta, 0.0, band, &ctx);
        }
        if i + 1 == samples.len() {
            if let Some(bound) = magnitude_bound {
                t.le(
                    "|delta| <= bound * M * phi",
                    delta.abs(),
                    bound * scale,
                    0.0,
                    &ctx,
                );
            }
        }
    }
    let mut tolerances = vec![("sign", sign_tol), ("quadrature", quadrature_tol)];
    if let Some(bound) = magnitude_bound {
        tolerances.push(("magnitude_bound", bound));
    }
    Ok(t.into_report(
        "delta",
        &[
            ("alpha", alpha),
            ("p", params.p),
            ("probes", probes.len() as f64),
        ],
        &tolerances,
    ))
}

/// For α > 0: `α/(φA′) ≤ 0`, `S ≥ |2x/φ − 1 − αx|` and
/// `d₃ ≤ (2x/φ − 1 − αx) − S ≤ 0`; for α < 0: `α/(φA′) ≥ 1`.
/// Here `d₃ = α/(φA′) · y + (2x/φ − 1 − αx) − S`, over the grid's y values.
pub fn verify_d3_bounds(grid: &GridSpec) -> Result<SuiteReport> {
    grid.validate()?;
    let sign_tol = tolerance::SIGN;
    let xs = grid.xs();
    let ys = if grid.y_values.is_empty() {
        vec![0.0]
    } else {
        grid.y_values.clone()
    };
    let triples: Vec<(f64, f64, f64)> = grid
        .alpha_values
        .iter()
        .filter(|&&a| a != 0.0)
        .flat_map(|&a| {
            xs.iter().flat_map({
                let ys = &ys;
                move |&x| ys.iter().map(move |&y| (a, x, y))
            })
        })
        .collect();
    let parts: Vec<Tally> = triples
        .par_iter()
        .map(|&(alpha, x, y)| {
            let b = aux_abcs(alpha, x, y)?;
            let coef = alpha * b.phi * b.phi / b.g2;
            let lin = 2.0 * x / b.phi - 1.0 - alpha * x;
            let d3 = coef * y + lin - b.S;
            let ctx = Context::new(&[("alpha", alpha), ("x", x), ("y", y)])
                .with_bundle(&b)
                .with(&[("alpha/(phi A')", coef), ("d3", d3)]);
            let mut t = Tally::default();
            if alpha > 0.0 {
                let scale = (coef * y).abs() + lin.abs() + b.S;
                t.le("d3 <= 0", d3, 0.0, zero_band(sign_tol, scale), &ctx);
                t.le(
                    "alpha/(phi A') <= 0",
                    coef,
                    0.0,
                    zero_band(sign_tol, 0.0),
                    &ctx,
                );
                t.ge(
                    "S >= |2x/phi - 1 - ax|",
                    b.S,
                    lin.abs(),
                    zero_band(sign_tol, b.S),
                    &ctx,
                );
                let scale = (coef * y).abs() + lin.abs() + b.S;
                t.le(
                    "d3 <= (2x/phi-1-ax) - S",
                    d3,
                    lin - b.S,
                    zero_band(sign_tol, scale),
                    &ctx,
                );
                t.le(
                    "(2x/phi-1-ax) - S <= 0",
                    lin - b.S,
                    0.0,
                    zero_band(sign_tol, lin.abs() + b.S),
                    &ctx,
                );
            } else {
                t.ge(
                    "alpha/(phi A') >= 1",
                    coef,
                    1.0,
                    zero_band(sign_tol, coef),
                    &ctx,
                );
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(Tally::merge(parts).into_report("d3", &grid.echo(), &[("sign", sign_tol)]))
}
