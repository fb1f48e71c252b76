//! The `D` operator, `Δ = D(h) − D(φ)`, the explicit thresholds of the
//! convexity criteria, grid checks of each criterion, and a brute-force
//! second-difference oracle for convexity in `ln r`.
//!
//! `ln F` is convex in `ln x` exactly when `D(F) ≥ 0`, and
//! `D(F₁/F₂) = D(F₁) − D(F₂)`. The Gaussian mean is `h/φ`, so its
//! log-convexity is the sign of `Δ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entire::EntireFunction;
use crate::error::{Error, Result};
use crate::integral_means::{accumulate_h, circle_mean, CircleMean, MeanParams, MeanProfile};
use crate::special_fn::{aux_abcs, aux_g, phi, t0, x0_of_alpha, AuxiliaryBundle};
use crate::tolerance::{self, zero_band, Tolerances};

/// A positive function value with its first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl FunctionJet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Result<Self> {
        if !(value > 0.0) {
            return Err(Error::domain(format!(
                "jet value must be positive, got {value}"
            )));
        }
        Ok(Self { value, d1, d2 })
    }

    /// The three terms `f′/f`, `x f″/f`, `−x (f′/f)²` of `D`.
    pub fn d_terms(&self, x: f64) -> [f64; 3] {
        let l = self.d1 / self.value;
        [l, x * self.d2 / self.value, -x * l * l]
    }

    /// Sum of the magnitudes of the terms of `D`, the scale for sign tests.
    pub fn d_scale(&self, x: f64) -> f64 {
        self.d_terms(x).iter().map(|t| t.abs()).sum()
    }

    /// Jet of `self / other`.
    pub fn quotient(&self, other: &FunctionJet) -> FunctionJet {
        let q = self.value / other.value;
        let q1 = (self.d1 - q * other.d1) / other.value;
        let q2 = (self.d2 - 2.0 * q1 * other.d1 - q * other.d2) / other.value;
        FunctionJet {
            value: q,
            d1: q1,
            d2: q2,
        }
    }
}

/// `D(f)(x) = f′/f + x f″/f − x (f′/f)²`.
pub fn d_operator(jet: &FunctionJet, x: f64) -> f64 {
    jet.d_terms(x).iter().sum()
}

/// `D(φ) = (φ − x) φ′/φ² = A φ′`.
pub fn d_of_phi(alpha: f64, x: f64) -> f64 {
    let (p, dp) = phi(alpha, x);
    (p - x) * dp / (p * p)
}

pub(crate) fn phi_jet(alpha: f64, x: f64) -> FunctionJet {
    let (p, dp) = phi(alpha, x);
    FunctionJet {
        value: p,
        d1: dp,
        d2: -alpha * dp,
    }
}

/// `y = xM′/M` and its derivative `(xM′/M)′`, which equals `D(M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFunction {
    pub x: f64,
    pub y: f64,
    pub dy: f64,
}

impl SlopeFunction {
    pub fn from_circle_mean(m: &CircleMean) -> Self {
        let l = m.dm / m.value;
        Self {
            x: m.x,
            y: m.x * l,
            dy: (m.dm + m.x * m.d2m) / m.value - m.x * l * l,
        }
    }
}

/// Everything evaluated at one grid point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointSample {
    pub alpha: f64,
    pub x: f64,
    pub m: CircleMean,
    pub h: f64,
    pub h_error: f64,
}

impl PointSample {
    pub fn m_jet(&self) -> FunctionJet {
        FunctionJet {
            value: self.m.value,
            d1: self.m.dm,
            d2: self.m.d2m,
        }
    }

    /// `h`, `h′ = Mφ′`, `h″ = (M′ − αM)φ′`.
    pub fn h_jet(&self) -> FunctionJet {
        let (_, dp) = phi(self.alpha, self.x);
        FunctionJet {
            value: self.h,
            d1: self.m.value * dp,
            d2: (self.m.dm - self.alpha * self.m.value) * dp,
        }
    }

    pub fn slope(&self) -> SlopeFunction {
        SlopeFunction::from_circle_mean(&self.m)
    }

    /// Bundle at `y = xM′/M`, clamped at zero.
    pub fn bundle(&self) -> Result<AuxiliaryBundle> {
        aux_abcs(self.alpha, self.x, self.m.slope().max(0.0))
    }

    pub fn comparison(&self) -> Result<DeltaComparison> {
        DeltaComparison::from_sample(self, tolerance::SIGN)
    }
}

pub(crate) fn sample_points(
    f: &EntireFunction,
    params: MeanParams,
    xs: &[f64],
    quadrature_tol: f64,
) -> Result<Vec<PointSample>> {
    let means: Vec<CircleMean> = xs
        .par_iter()
        .map(|&x| circle_mean(f, params.p, x, quadrature_tol))
        .collect::<Result<_>>()?;
    let h = accumulate_h(f, params, xs, quadrature_tol)?;
    Ok(means
        .into_iter()
        .zip(h)
        .map(|(m, hv)| PointSample {
            alpha: params.alpha,
            x: m.x,
            m,
            h: hv.h,
            h_error: hv.error,
        })
        .collect())
}

/// `Δ` computed two ways, with the quotient-jet value of `D(h/φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaComparison {
    pub x: f64,
    /// `D(h) − D(φ)` from the exact jets of `h` and `φ`.
    pub delta_direct: f64,
    /// `−A (h/M)² + B (h/M) − C`, which has the sign of `Δ`.
    pub delta_quadratic: f64,
    /// `D(h/φ)` from the jet of the quotient.
    pub d_quotient: f64,
    pub direct_scale: f64,
    pub quadratic_scale: f64,
    pub signs_agree: bool,
}

fn sign_class(v: f64, scale: f64, sign_tol: f64) -> i8 {
    if v.abs() <= zero_band(sign_tol, scale) {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

impl DeltaComparison {
    pub(crate) fn from_sample(s: &PointSample, sign_tol: f64) -> Result<Self> {
        let hj = s.h_jet();
        let pj = phi_jet(s.alpha, s.x);
        let delta_direct = d_operator(&hj, s.x) - d_operator(&pj, s.x);
        let direct_scale = hj.d_scale(s.x) + pj.d_scale(s.x);
        let d_quotient = d_operator(&hj.quotient(&pj), s.x);
        let b = s.bundle()?;
        let ratio = s.h / s.m.value;
        let delta_quadratic = -b.A * ratio * ratio + b.B * ratio - b.C;
        let quadratic_scale = b.A.abs() * ratio * ratio + b.B.abs() * ratio + b.C.abs();
        let signs_agree = sign_class(delta_direct, direct_scale, sign_tol)
            == sign_class(delta_quadratic, quadratic_scale, sign_tol);
        Ok(Self {
            x: s.x,
            delta_direct,
            delta_quadratic,
            d_quotient,
            direct_scale,
            quadratic_scale,
            signs_agree,
        })
    }

    /// No strict sign conflict where the quadratic form is outside its zero band.
    pub fn sign_equivalent(&self, sign_tol: f64) -> bool {
        let q = sign_class(self.delta_quadratic, self.quadratic_scale, sign_tol);
        q == 0 || sign_class(self.delta_direct, self.direct_scale, sign_tol) == q
    }
}

/// `Δ(x)` at a single point, both directly and through the quadratic form.
pub fn delta_both_ways(
    f: &EntireFunction,
    params: MeanParams,
    x: f64,
    quadrature_tol: f64,
) -> Result<DeltaComparison> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("delta needs x > 0, got {x}")));
    }
    let samples = sample_points(f, params, &[x], quadrature_tol)?;
    samples[0].comparison()
}

fn require_negative_alpha(alpha: f64, what: &str) -> Result<()> {
    if alpha < 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} requires alpha < 0, got {alpha}"
        )))
    }
}

/// `y₀ = g₁ g₂ / ((φ − x) g₃)`, the slope threshold for `α < 0`.
pub fn y0_threshold(alpha: f64, x: f64) -> Result<f64> {
    require_negative_alpha(alpha, "y0")?;
    if !(x > 0.0) {
        return Err(Error::domain(format!("y0 needs x > 0, got {x}")));
    }
    let (p, _) = phi(alpha, x);
    let g = aux_g(alpha, x);
    let denom = (p - x) * g.g3;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::domain(format!(
            "y0 denominator (φ−x)·g₃ = {denom:e} is not positive at x = {x}"
        )));
    }
    Ok(g.g1 * g.g2 / denom)
}

/// Lower bound for `(xM′/M)′`: zero below `x₀`, `g₁²/(4x(φ−x)²)` from `x₀` on.
pub fn theorem2_bound(alpha: f64, x: f64) -> Result<f64> {
    require_negative_alpha(alpha, "theorem 2 bound")?;
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "theorem 2 bound needs x > 0, got {x}"
        )));
    }
    let x0 = x0_of_alpha(alpha)?;
    let upper = || {
        let (p, _) = phi(alpha, x);
        let g1 = aux_g(alpha, x).g1;
        g1 * g1 / (4.0 * x * (p - x) * (p - x))
    };
    if (x - x0).abs() < 1e-6 * x0 {
        Ok(upper().max(0.0))
    } else if x < x0 {
        Ok(0.0)
    } else {
        Ok(upper())
    }
}

/// `√(t₀/(−α))`
pub fn corollary1_radius(alpha: f64) -> Result<f64> {
    require_negative_alpha(alpha, "corollary 1 radius")?;
    Ok((t0() / -alpha).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Theorem1,
    Theorem2,
    Theorem3,
    Corollary1,
    Corollary2,
    Corollary3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    HypothesesNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub x: f64,
    pub slack: f64,
    pub tolerance: f64,
}

impl Witness {
    fn tightness(&self) -> f64 {
        if self.slack.is_finite() {
            self.slack / self.tolerance
        } else {
            f64::NEG_INFINITY
        }
    }

    fn violated(&self) -> bool {
        !(self.slack >= -self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub interval: (f64, f64),
    pub verdict: Verdict,
    pub points: usize,
    pub hypothesis_failures: usize,
    pub conclusion_failures: usize,
    /// Maximal runs of grid points on which every hypothesis holds.
    pub hypothesis_runs: Vec<(f64, f64)>,
    /// Tightest conclusion slacks.
    pub witnesses: Vec<Witness>,
    /// Tightest hypothesis slacks.
    pub hypothesis_witnesses: Vec<Witness>,
    pub tolerances: Tolerances,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub points: usize,
    pub tolerances: Tolerances,
    pub witnesses: usize,
    /// Left end used where a criterion's interval is open at zero, as a
    /// fraction of the right end.
    pub lower_fraction: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            points: 512,
            tolerances: Tolerances::default(),
            witnesses: 5,
            lower_fraction: 1e-3,
        }
    }
}

/// Conclusion direction: `D(h/φ) ≥ 0` or `D(h/φ) ≤ 0`.
#[derive(Clone, Copy)]
enum Direction {
    Convex,
    Concave,
}

type Hypotheses<'a> = dyn Fn(&PointSample, f64) -> Result<Vec<Witness>> + Sync + 'a;

struct CheckSpec<'a> {
    criterion: Criterion,
    interval: (f64, f64),
    direction: Direction,
    hypotheses: &'a Hypotheses<'a>,
    global_failure: Option<String>,
    note: Option<String>,
}

fn geometric_points(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "need 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidGrid("need at least 2 points".into()));
    }
    let step = (hi / lo).ln() / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo * (step * i as f64).exp()).collect();
    v[n - 1] = hi;
    Ok(v)
}

fn positivity_hypotheses(s: &PointSample, sign_tol: f64) -> Vec<Witness> {
    vec![
        Witness {
            label: "M > 0".into(),
            x: s.x,
            slack: s.m.value,
            tolerance: 0.0,
        },
        Witness {
            label: "M' >= 0".into(),
            x: s.x,
            slack: s.m.dm,
            tolerance: zero_band(sign_tol, s.m.value / s.x),
        },
    ]
}

fn tightest(mut ws: Vec<Witness>, k: usize) -> Vec<Witness> {
    ws.sort_by(|a, b| a.tightness().total_cmp(&b.tightness()));
    ws.truncate(k);
    ws
}

fn run_check(
    f: &EntireFunction,
    params: MeanParams,
    spec: CheckSpec<'_>,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    let sign_tol = opts.tolerances.sign;
    let xs = geometric_points(spec.interval.0, spec.interval.1, opts.points)?;
    let samples = sample_points(f, params, &xs, opts.tolerances.quadrature)?;
    let per_point: Vec<(Vec<Witness>, Witness)> = samples
        .par_iter()
        .map(|s| {
            let mut hyps = positivity_hypotheses(s, sign_tol);
            hyps.extend((spec.hypotheses)(s, sign_tol)?);
            let cmp = DeltaComparison::from_sample(s, sign_tol)?;
            let slack = match spec.direction {
                Direction::Convex => cmp.d_quotient,
                Direction::Concave => -cmp.d_quotient,
            };
            let conclusion = Witness {
                label: match spec.direction {
                    Direction::Convex => "D(h/phi) >= 0".into(),
                    Direction::Concave => "D(h/phi) <= 0".into(),
                },
                x: s.x,
                slack,
                tolerance: zero_band(sign_tol, cmp.direct_scale),
            };
            Ok((hyps, conclusion))
        })
        .collect::<Result<_>>()?;

    let mut runs = Vec::new();
    let mut run_start: Option<f64> = None;
    let mut last_ok = 0.0;
    let mut hypothesis_failures = 0;
    let mut all_hyps = Vec::new();
    let mut conclusions = Vec::new();
    for (hyps, conclusion) in per_point {
        let ok = hyps.iter().all(|w| !w.violated());
        if ok {
            run_start.get_or_insert(conclusion.x);
            last_ok = conclusion.x;
        } else {
            hypothesis_failures += 1;
            if let Some(start) = run_start.take() {
                runs.push((start, last_ok));
            }
        }
        all_hyps.extend(
            hyps.into_iter()
                .filter(|w| w.tolerance > 0.0 || w.violated()),
        );
        conclusions.push(conclusion);
    }
    if let Some(start) = run_start {
        runs.push((start, last_ok));
    }
    let conclusion_failures = conclusions.iter().filter(|w| w.violated()).count();
    let verdict = if spec.global_failure.is_some() || hypothesis_failures > 0 {
        Verdict::HypothesesNotMet
    } else if conclusion_failures > 0 {
        Verdict::Fails
    } else {
        Verdict::Holds
    };
    let note = match (spec.global_failure, spec.note) {
        (Some(g), Some(n)) => Some(format!("{g}; {n}")),
        (g, n) => g.or(n),
    };
    Ok(CriterionReport {
        criterion: spec.criterion,
        interval: spec.interval,
        verdict,
        points: xs.len(),
        hypothesis_failures,
        conclusion_failures,
        hypothesis_runs: runs,
        witnesses: tightest(conclusions, opts.witnesses),
        hypothesis_witnesses: tightest(all_hyps, opts.witnesses),
        tolerances: opts.tolerances,
        note,
    })
}

fn log_convex_hypothesis(s: &PointSample, sign_tol: f64) -> Witness {
    let jet = s.m_jet();
    Witness {
        label: "D(M) >= 0".into(),
        x: s.x,
        slack: d_operator(&jet, s.x),
        tolerance: zero_band(sign_tol, jet.d_scale(s.x)),
    }
}

fn log_concave_hypothesis(s: &PointSample, sign_tol: f64) -> Witness {
    let jet = s.m_jet();
    Witness {
        label: "D(M) <= 0".into(),
        x: s.x,
        slack: -d_operator(&jet, s.x),
        tolerance: zero_band(sign_tol, jet.d_scale(s.x)),
    }
}

fn slope_bound_hypothesis(s: &PointSample, sign_tol: f64, bound: f64) -> Witness {
    let slope = s.slope();
    let jet = s.m_jet();
    Witness {
        label: "(xM'/M)' >= bound".into(),
        x: s.x,
        slack: slope.dy - bound,
        tolerance: zero_band(sign_tol, jet.d_scale(s.x) + bound.abs()),
    }
}

/// Log-convexity for `α < 0` on an interval `I`, given that `ln M` is convex
/// in `ln x` on `I` and `xM′/M ≥ y₀` there.
pub fn check_theorem1(
    f: &EntireFunction,
    params: MeanParams,
    interval: (f64, f64),
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    require_negative_alpha(params.alpha, "theorem 1")?;
    let hyp = |s: &PointSample, tol: f64| -> Result<Vec<Witness>> {
        let y = s.slope().y;
        let y0 = y0_threshold(s.alpha, s.x)?;
        Ok(vec![
            log_convex_hypothesis(s, tol),
            Witness {
                label: "xM'/M >= y0".into(),
                x: s.x,
                slack: y - y0,
                tolerance: zero_band(tol, y.abs() + y0.abs()),
            },
        ])
    };
    run_check(
        f,
        params,
        CheckSpec {
            criterion: Criterion::Theorem1,
            interval,
            direction: Direction::Convex,
            hypotheses: &hyp,
            global_failure: None,
            note: Some("interval reading: hypotheses (i) and (ii) checked on I".into()),
        },
        opts,
    )
}

/// The `(0, x₀)` reading of the first criterion: there `y₀ ≤ 0 ≤ y`, so
/// only convexity of `ln M` is required.
pub fn check_theorem1_below_x0(
    f: &EntireFunction,
    params: MeanParams,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    require_negative_alpha(params.alpha, "theorem 1")?;
    let x0 = x0_of_alpha(params.alpha)?;
    let hyp = |s: &PointSample, tol: f64| -> Result<Vec<Witness>> {
        Ok(vec![log_convex_hypothesis(s, tol)])
    };
    run_check(
        f,
        params,
        CheckSpec {
            criterion: Criterion::Theorem1,
            interval: (x0 * opts.lower_fraction, x0),
            direction: Direction::Convex,
            hypotheses: &hyp,
            global_failure: None,
            note: Some("(0, x0) reading: only D(M) >= 0 is required below x0".into()),
        },
        opts,
    )
}

/// Log-convexity for `α < 0` on `(0, x_max]` under the piecewise slope bound.
pub fn check_theorem2(
    f: &EntireFunction,
    params: MeanParams,
    x_max: f64,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    require_negative_alpha(params.alpha, "theorem 2")?;
    let hyp = |s: &PointSample, tol: f64| -> Result<Vec<Witness>> {
        let bound = theorem2_bound(s.alpha, s.x)?;
        Ok(vec![slope_bound_hypothesis(s, tol, bound)])
    };
    run_check(
        f,
        params,
        CheckSpec {
            criterion: Criterion::Theorem2,
            interval: (x_max * opts.lower_fraction, x_max),
            direction: Direction::Convex,
            hypotheses: &hyp,
            global_failure: None,
            note: None,
        },
        opts,
    )
}

/// Log-concavity for `α ≥ 0` given log-concavity of `M`.
pub fn check_theorem3(
    f: &EntireFunction,
    params: MeanParams,
    interval: (f64, f64),
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    if !(params.alpha >= 0.0) {
        return Err(Error::domain(format!(
            "theorem 3 requires alpha >= 0, got {}",
            params.alpha
        )));
    }
    let hyp = |s: &PointSample, tol: f64| -> Result<Vec<Witness>> {
        Ok(vec![log_concave_hypothesis(s, tol)])
    };
    run_check(
        f,
        params,
        CheckSpec {
            criterion: Criterion::Theorem3,
            interval,
            direction: Direction::Concave,
            hypotheses: &hyp,
            global_failure: None,
            note: None,
        },
        opts,
    )
}

/// Log-convexity of the mean of any entire `f` for `r < √(t₀/(−α))`.
pub fn check_corollary1(
    f: &EntireFunction,
    params: MeanParams,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    require_negative_alpha(params.alpha, "corollary 1")?;
    let x0 = x0_of_alpha(params.alpha)?;
    let hyp = |_: &PointSample, _: f64| -> Result<Vec<Witness>> { Ok(Vec::new()) };
    run_check(
        f,
        params,
        CheckSpec {
            criterion: Criterion::Corollary1,
            interval: (x0 * opts.lower_fraction, x0),
            direction: Direction::Convex,
            hypotheses: &hyp,
            global_failure: None,
            note: None,
        },
        opts,
    )
}

/// The second criterion specialised to circle means: the slope bound is only
/// required from `x₀` on, since `(xM′/M)′ = D(M) ≥ 0` for every entire `f`.
pub fn check_corollary2(
    f: &EntireFunction,
    params: MeanParams,
    x_max: f64,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    require_negative_alpha(params.alpha, "corollary 2")?;
    let x0 = x0_of_alpha(params.alpha)?;
    let hyp = move |s: &PointSample, tol: f64| -> Result<Vec<Witness>> {
        if s.x < x0 {
            return Ok(Vec::new());
        }
        let bound = theorem2_bound(s.alpha, s.x)?;
        Ok(vec![slope_bound_hypothesis(s, tol, bound)])
    };
    run_check(
        f,
        params,
        CheckSpec {
            criterion: Criterion::Corollary2,
            interval: (x_max * opts.lower_fraction, x_max),
            direction: Direction::Convex,
            hypotheses: &hyp,
            global_failure: None,
            note: None,
        },
        opts,
    )
}

/// Log-concavity of the mean of `z^k` for `α ≥ 0`.
pub fn check_corollary3(
    f: &EntireFunction,
    params: MeanParams,
    interval: (f64, f64),
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    if !(params.alpha >= 0.0) {
        return Err(Error::domain(format!(
            "corollary 3 requires alpha >= 0, got {}",
            params.alpha
        )));
    }
    let hyp = |_: &PointSample, _: f64| -> Result<Vec<Witness>> { Ok(Vec::new()) };
    run_check(
        f,
        params,
        CheckSpec {
            criterion: Criterion::Corollary3,
            interval,
            direction: Direction::Concave,
            hypotheses: &hyp,
            global_failure: (!f.is_monomial()).then(|| "f is not a monomial".to_string()),
            note: None,
        },
        opts,
    )
}

/// Which variable the logarithmic abscissa is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    Radius,
    SquaredRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Within tolerance of both: log-log linear.
    Linear,
    Convex,
    Concave,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub abscissa: Abscissa,
    /// Spacing of the logarithmic abscissa.
    pub step: f64,
    pub tol_curv: f64,
    /// `(r, second difference)` at interior grid points.
    pub points: Vec<(f64, f64)>,
    pub shape: Shape,
}

impl CurvatureReport {
    pub fn is_convex(&self) -> bool {
        self.points.iter().all(|&(_, v)| v >= -self.tol_curv)
    }

    pub fn is_concave(&self) -> bool {
        self.points.iter().all(|&(_, v)| v <= self.tol_curv)
    }
}

/// Centred second differences of `ln(mean)` in `ln r` (or `ln x`), scaled by
/// the squared step so they estimate the second derivative.
///
/// The tolerance is `step² · max|second difference| + 4 · tol / step²`: the
/// first term bounds the discretisation error, the second the amplification
/// of a relative error `tol` in the mean.
pub fn loglog_second_difference(
    profile: &MeanProfile,
    abscissa: Abscissa,
) -> Result<CurvatureReport> {
    let radii: Vec<f64> = profile.rows.iter().map(|row| row.r).collect();
    let grid = crate::integral_means::GeometricGrid::from_values(radii)?;
    let step = match abscissa {
        Abscissa::Radius => grid.log_step(),
        Abscissa::SquaredRadius => 2.0 * grid.log_step(),
    };
    let logs: Vec<f64> = profile.rows.iter().map(|row| row.mean.ln()).collect();
    if logs.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("mean must be positive on the whole grid"));
    }
    let points: Vec<(f64, f64)> = logs
        .windows(3)
        .zip(&profile.rows[1..])
        .map(|(w, row)| (row.r, (w[2] - 2.0 * w[1] + w[0]) / (step * step)))
        .collect();
    let curvature = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let tol_curv = step * step * curvature + 4.0 * profile.tolerance / (step * step);
    let convex = points.iter().all(|&(_, v)| v >= -tol_curv);
    let concave = points.iter().all(|&(_, v)| v <= tol_curv);
    let shape = match (convex, concave) {
        (true, true) => Shape::Linear,
        (true, false) => Shape::Convex,
        (false, true) => Shape::Concave,
        (false, false) => Shape::Mixed,
    };
    Ok(CurvatureReport {
        abscissa,
        step,
        tol_curv,
        points,
        shape,
    })
}
