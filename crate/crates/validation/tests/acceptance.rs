//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use gaussmean::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn bisection_t0() -> f64 {
    let u = |t: f64| t.exp() - 1.0 - t - t * t;
    let (mut lo, mut hi) = (1.0f64, 3.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if u(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c1_constant_t0() -> Outcome {
    let r = match solve_t0(1e-13) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let digits = format!("{:.2}", (r.value * 100.0).trunc() / 100.0);
    let oracle = bisection_t0();
    let gap = (r.value - oracle).abs();
    outcome(
        digits == "1.79" && r.residual.abs() < 1e-12 && gap < 1e-10,
        format!(
            "t0={:.16} residual={:e} bisection gap={gap:e}",
            r.value, r.residual
        ),
    )
}

fn c2_lemma4() -> Outcome {
    match verify_lemma4(&GridSpec::lemma4_default()) {
        Ok(r) => outcome(
            r.passed() && r.checks_run > 0,
            format!("{} checks, {} failures", r.checks_run, r.failures.len()),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion3_functions() -> Vec<(&'static str, EntireFunction)> {
    ["mono:0", "mono:1", "mono:2", "poly:1,1", "exp:1"]
        .into_iter()
        .map(|s| (s, s.parse().unwrap()))
        .collect()
}

fn c3_c8_lemma5() -> (Outcome, Outcome) {
    let mut configs = 0;
    let mut failures = Vec::new();
    let mut quotient_checks = 0usize;
    let mut quotient_failures = Vec::new();
    let mut worst_quotient = 0.0f64;
    for (name, f) in criterion3_functions() {
        for p in [1.0, 2.0] {
            for alpha in [-2.0, -1.0, 1.0, 2.0] {
                configs += 1;
                let params = MeanParams::new(p, alpha).unwrap();
                let grid = GridSpec::new(vec![alpha], 0.01, 10.0, 200, Vec::new()).unwrap();
                match verify_lemma5(&f, params, &grid, 1e-10) {
                    Ok(r) if r.passed() => {}
                    Ok(r) => failures.push(format!(
                        "{name} p={p} alpha={alpha}: {} ({})",
                        r.failures.len(),
                        r.failures[0].check
                    )),
                    Err(e) => failures.push(format!("{name} p={p} alpha={alpha}: {e}")),
                }
                for x in grid.xs() {
                    quotient_checks += 1;
                    match delta_both_ways(&f, params, x, 1e-10) {
                        Ok(c) => {
                            let err = (c.d_quotient - c.delta_direct).abs()
                                / c.d_quotient
                                    .abs()
                                    .max(c.delta_direct.abs())
                                    .max(c.direct_scale);
                            worst_quotient = worst_quotient.max(err);
                            if err > 1e-8 {
                                quotient_failures.push(format!("{name} p={p} alpha={alpha} x={x}"));
                            }
                        }
                        Err(e) => {
                            quotient_failures.push(format!("{name} p={p} alpha={alpha} x={x}: {e}"))
                        }
                    }
                }
            }
        }
    }
    let c3 = outcome(
        failures.is_empty(),
        format!("{configs} configurations, failing: {:?}", failures),
    );
    let c8 = outcome(
        quotient_failures.is_empty(),
        format!(
            "{quotient_checks} points, worst relative gap {worst_quotient:e}, failing: {:?}",
            &quotient_failures[..quotient_failures.len().min(5)]
        ),
    );
    (c3, c8)
}

fn c4_closed_form() -> Outcome {
    let grid = GeometricGrid::new(0.5, 2.0, 3).unwrap();
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for k in 0..=4u32 {
        for p in [1.0, 2.0, 3.0] {
            for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let prof = radial_mean_profile(
                    &EntireFunction::monomial(k),
                    MeanParams::new(p, alpha).unwrap(),
                    &grid,
                    1e-10,
                );
                let prof = match prof {
                    Ok(p) => p,
                    Err(e) => {
                        errors.push(e.to_string());
                        continue;
                    }
                };
                for row in &prof.rows {
                    let exact = monomial_mean_closed_form(k, p, alpha, row.r).unwrap();
                    worst = worst.max((row.mean - exact).abs() / exact);
                }
            }
        }
    }
    outcome(
        worst < 1e-8 && errors.is_empty(),
        format!("225 comparisons, worst relative gap {worst:e}"),
    )
}

fn c5_corollary3() -> Outcome {
    let grid = GeometricGrid::new(0.05, 3.0, 200).unwrap();
    let opts = CheckOptions::default();
    let mut bad = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=4u32 {
        for p in [1.0, 2.0, 3.0] {
            for alpha in [0.0, 0.5, 1.0, 2.0] {
                let f = EntireFunction::monomial(k);
                let params = MeanParams::new(p, alpha).unwrap();
                let label = format!("k={k} p={p} alpha={alpha}");
                let curv = radial_mean_profile(&f, params, &grid, 1e-10)
                    .and_then(|prof| loglog_second_difference(&prof, Abscissa::Radius));
                match curv {
                    Ok(c) => {
                        for &(_, v) in &c.points {
                            worst = worst.max(v / c.tol_curv);
                        }
                        if !c.is_concave() {
                            bad.push(format!("{label}: second differences"));
                        }
                    }
                    Err(e) => bad.push(format!("{label}: {e}")),
                }
                match check_theorem3(&f, params, (0.05 * 0.05, 9.0), &opts) {
                    Ok(r) if r.verdict == Verdict::Holds => {}
                    Ok(r) => bad.push(format!("{label}: theorem 3 {:?}", r.verdict)),
                    Err(e) => bad.push(format!("{label}: {e}")),
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "60 configurations, max second difference / tol_curv = {worst:.3e}, failing: {bad:?}"
        ),
    )
}

fn criterion6_functions() -> Vec<(&'static str, EntireFunction)> {
    ["poly:1,1", "exp:1", "poly:2,0,1"]
        .into_iter()
        .map(|s| (s, s.parse().unwrap()))
        .collect()
}

fn c6_corollary1() -> Outcome {
    let mut bad = Vec::new();
    let mut worst = f64::INFINITY;
    for alpha in [-0.5, -1.0, -2.0] {
        let radius = corollary1_radius(alpha).unwrap();
        let grid = GeometricGrid::new(0.05, radius, 200).unwrap();
        for (name, f) in criterion6_functions() {
            let params = MeanParams::new(2.0, alpha).unwrap();
            let curv = radial_mean_profile(&f, params, &grid, 1e-10)
                .and_then(|prof| loglog_second_difference(&prof, Abscissa::Radius));
            match curv {
                Ok(c) => {
                    for &(_, v) in &c.points {
                        worst = worst.min(v / c.tol_curv);
                    }
                    if !c.is_convex() {
                        bad.push(format!("{name} alpha={alpha}"));
                    }
                }
                Err(e) => bad.push(format!("{name} alpha={alpha}: {e}")),
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "9 configurations, min second difference / tol_curv = {worst:.3e}, failing: {bad:?}"
        ),
    )
}

fn c7_d_chain() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for x in [2.0, 3.0, 5.0] {
        let closed = d2_minimum(-1.0, x);
        let ys = y_star(-1.0, x);
        let m = minimize_d2(-1.0, x, &default_y_grid(-1.0, x)).unwrap();
        let rel = (m.grid_value - closed).abs() / closed.abs();
        let loc = (m.refined_y - ys).abs();
        let ok = rel <= 1e-6 && loc <= m.refined_step;
        pass &= ok;
        lines.push(format!(
            "x={x}: rel {rel:.1e}, |y-y*| {loc:.1e} <= {:.1e}",
            m.refined_step
        ));
    }
    outcome(pass, lines.join("; "))
}

fn c9_delta_boundary() -> Outcome {
    let probes = [0.1, 0.01, 0.001];
    let mut configs = Vec::new();
    for k in 0..=4u32 {
        for p in [1.0, 2.0, 3.0] {
            for alpha in [0.0, 0.5, 1.0, 2.0] {
                configs.push((
                    format!("z^{k} p={p} alpha={alpha}"),
                    EntireFunction::monomial(k),
                    p,
                    alpha,
                ));
            }
        }
    }
    for alpha in [-0.5, -1.0, -2.0] {
        for (name, f) in criterion6_functions() {
            configs.push((format!("{name} p=2 alpha={alpha}"), f, 2.0, alpha));
        }
    }
    let mut failing_monotone = Vec::new();
    let mut failing_sign = Vec::new();
    let mut failing_magnitude = 0;
    for (label, f, p, alpha) in &configs {
        let params = MeanParams::new(*p, *alpha).unwrap();
        match verify_delta_boundary(f, params, &probes, DeltaForm::Stable, Some(1e-6), 1e-12) {
            Ok(r) => {
                for fail in &r.failures {
                    if fail.check.starts_with("|delta| nonincreasing") {
                        failing_monotone.push(label.clone());
                    } else if fail.check.starts_with("delta") {
                        failing_sign.push(label.clone());
                    } else {
                        failing_magnitude += 1;
                    }
                }
            }
            Err(e) => failing_sign.push(format!("{label}: {e}")),
        }
    }
    outcome(
        failing_monotone.is_empty() && failing_sign.is_empty() && failing_magnitude == 0,
        format!(
            "{} configurations; monotone failures {:?}; sign failures {:?}; |delta| > 1e-6*M*phi at x=0.001 in {} (|delta|/(M phi) is of order x there)",
            configs.len(),
            failing_monotone,
            failing_sign,
            failing_magnitude
        ),
    )
}

fn c10_determinism() -> Outcome {
    let commands: [&[&str]; 6] = [
        &[
            "means",
            "--f",
            "poly:1,0,2+1i",
            "--alpha",
            "-1",
            "--p",
            "1.5",
            "--points",
            "30",
            "--format",
            "csv",
        ],
        &[
            "means", "--f", "exp:1", "--alpha", "0.5", "--points", "30", "--format", "json",
        ],
        &[
            "analyze", "--f", "poly:1,1", "--alpha", "-1", "--points", "128", "--format", "json",
        ],
        &[
            "verify", "--suite", "lemma5", "--f", "exp:1", "--alpha", "1", "--count", "60",
            "--format", "json",
        ],
        &["roots", "--alpha", "-1,-2", "--format", "text"],
        &[
            "scan",
            "--f",
            "poly:1,1",
            "--alpha-steps",
            "3",
            "--points",
            "40",
            "--format",
            "json",
        ],
    ];
    let strip = |bytes: &[u8]| -> String {
        let s = String::from_utf8_lossy(bytes);
        s.lines()
            .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut bad = Vec::new();
    for args in commands {
        let run = || {
            let mut out = Vec::new();
            let mut err = Vec::new();
            let argv = std::iter::once("gaussmean").chain(args.iter().copied());
            let code = gaussmean_cli::run_with(argv, &mut out, &mut err);
            (code, out)
        };
        let (a, b) = (run(), run());
        if a.0 != b.0 || strip(&a.1) != strip(&b.1) || a.1.is_empty() {
            bad.push(args[0]);
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} commands run twice, differing: {bad:?}", commands.len()),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let (c3, c8) = c3_c8_lemma5();
    let results = [
        (1, "constant t0", c1_constant_t0()),
        (2, "phi and g sign facts", c2_lemma4()),
        (3, "S, discriminant, bracket, delta sign", c3),
        (4, "monomial closed form vs quadrature", c4_closed_form()),
        (5, "log-concavity for alpha >= 0 monomials", c5_corollary3()),
        (6, "log-convexity below sqrt(t0/-alpha)", c6_corollary1()),
        (7, "d2 minimum closed form", c7_d_chain()),
        (8, "quotient rule for D", c8),
        (9, "delta boundary behaviour", c9_delta_boundary()),
        (10, "CLI determinism", c10_determinism()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}  {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
