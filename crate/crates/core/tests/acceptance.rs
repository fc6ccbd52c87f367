//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are pinned here and not configurable.

use koppelman_core::curve::CuspCurve;
use koppelman_core::quad::{integrate_circle, CircleRule};
use koppelman_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

const CUSPS: [(u32, u32); 4] = [(2, 3), (2, 5), (3, 4), (3, 5)];

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn koppelman_targets() -> Vec<Complex64> {
    (0..20).map(|k| Complex64::from_polar(0.26 + 0.23 * k as f64 / 19.0, 2.39996 * k as f64 + 0.1)).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    check(elapsed < limit, format!("{detail}; {:.2?} (limit {:?})", elapsed, limit))
}

fn reproduction() -> Outcome {
    let start = Instant::now();
    let curve = Curve::cusp(2, 3).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in [0u32, 2, 3, 4, 5, 6, 7] {
        let phi = parse_expr(&format!("tau^{k}")).map_err(|e| e.to_string())?;
        for t in [c(0.3, 0.0), c(0.2, 0.2), c(0.0, -0.4)] {
            let v = represent_boundary(&curve, &phi, 1.0, t, 2048).map_err(|e| e.to_string())?;
            let want = t.powu(k);
            worst = worst.max((v - want).norm() / want.norm().max(1.0));
        }
    }
    let elapsed = start.elapsed();
    if worst > 1e-10 {
        return Err(format!("max scaled error {worst:.3e} > 1e-10"));
    }
    within(elapsed, Duration::from_secs(1), format!("max scaled error {worst:.3e}"))
}

fn gap_annihilation() -> Outcome {
    let curve = Curve::cusp(2, 3).map_err(|e| e.to_string())?;
    let phi = parse_expr("tau").map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for t in [c(0.3, 0.0), c(0.2, 0.2), c(0.0, -0.4)] {
        worst = worst.max(represent_boundary(&curve, &phi, 1.0, t, 2048).map_err(|e| e.to_string())?.norm());
    }
    check(worst <= 1e-10, format!("max |P(tau)(t)| = {worst:.3e}"))
}

fn moment_semigroup() -> Outcome {
    let start = Instant::now();
    let cfg = MomentConfig::default();
    let (mut min_fail, mut max_pass, mut max_drift): (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0);
    for (r, s) in CUSPS {
        let curve = Curve::cusp(r, s).map_err(|e| e.to_string())?;
        let sg = semigroup(r, s).map_err(|e| e.to_string())?;
        for k in 0..=(sg.frobenius as u32 + r * s) {
            let phi = parse_expr(&format!("tau^{k}")).map_err(|e| e.to_string())?;
            let rep = moment_check(&curve, &phi, &cfg).map_err(|e| format!("({r},{s}) k={k}: {e}"))?;
            if rep.verdict != sg.contains(k) {
                return Err(format!("({r},{s}) k={k}: verdict {} but membership {}", rep.verdict, sg.contains(k)));
            }
            let check_cfg = MomentConfig { eps: rep.eps_check, ..cfg };
            let again = moment_check(&curve, &phi, &check_cfg).map_err(|e| e.to_string())?;
            for (a, b) in rep.entries.iter().zip(&again.entries) {
                let m = a.value().norm();
                if a.zero {
                    max_pass = max_pass.max(m);
                } else {
                    min_fail = min_fail.min(m);
                }
                max_drift = max_drift.max((a.value() - b.value()).norm());
            }
        }
    }
    let elapsed = start.elapsed();
    let detail =
        format!("min failing |m_j| {min_fail:.3}, max passing |m_j| {max_pass:.3e}, radius drift {max_drift:.3e}");
    if !(min_fail >= 1.0 && max_pass <= 1e-9 && max_drift <= 1e-9) {
        return Err(detail);
    }
    within(elapsed, Duration::from_secs(10), detail)
}

fn koppelman_identity() -> Outcome {
    let start = Instant::now();
    let phi = parse_expr("bump(0.04,0.36)*~tau, dbar").map_err(|e| e.to_string())?;
    let targets = koppelman_targets();
    let opts = SolveOptions::default();
    let cusp = Curve::cusp(2, 3).map_err(|e| e.to_string())?;
    let a = verify_koppelman(&KernelContext::new(cusp, 0), &phi, &targets, 1e-4, &opts).map_err(|e| e.to_string())?;
    let b = verify_koppelman(&KernelContext::new(Curve::smooth_model(), 0), &phi, &targets, 1e-4, &opts)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let detail = format!("cusp(2,3) residual {:.3e}, smooth model residual {:.3e}", a.max_residual, b.max_residual);
    if !(a.max_residual <= 1e-4 && b.max_residual <= 1e-4) {
        return Err(detail);
    }
    within(elapsed, Duration::from_secs(300), detail)
}

fn classical_anchor() -> Outcome {
    let phi = parse_expr("1, dbar").map_err(|e| e.to_string())?;
    let targets: Vec<Complex64> =
        (0..12).map(|k| Complex64::from_polar(0.5 * (k + 1) as f64 / 12.0, 1.3 * k as f64)).collect();
    let ctx = KernelContext::new(Curve::smooth_model(), 0);
    let opts = SolveOptions { rho: Some(1.0), ..Default::default() };
    let rep = solve_area(&ctx, &phi, &targets, &opts).map_err(|e| e.to_string())?;
    let worst = rep.values.iter().map(|(t, u)| (u - t.conj()).norm()).fold(0.0, f64::max);
    check(worst <= 1e-8, format!("max |K(dtaubar)(t) - conj(t)| = {worst:.3e}"))
}

fn canonical_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for (r, s) in CUSPS {
        let closed = Curve::cusp(r, s).map_err(|e| e.to_string())?;
        let general =
            Curve::from_param(CuspCurve::new(r, s).map_err(|e| e.to_string())?.param()).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let tau = Complex64::from_polar(rng.random_range(0.05..2.0), rng.random_range(0.0..TAU));
            let a = closed.canonical_weight(tau).map_err(|e| e.to_string())?;
            let b = general.canonical_weight_general(tau).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).norm() / a.norm());
        }
    }
    check(worst <= 1e-12, format!("max relative difference {worst:.3e} over 400 points"))
}

fn kernel_stability() -> Outcome {
    let mut worst: f64 = 0.0;
    for (r, s) in CUSPS {
        let ctx = KernelContext::new(Curve::cusp(r, s).map_err(|e| e.to_string())?, 0);
        let t = c(0.6, 0.35);
        let n = r * s;
        for k in (1..n).filter(|k| k % r == 0 || k % s == 0) {
            let w = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
            for d in [c(1e-3, 0.0), c(0.0, 1e-3), c(-7e-4, 7e-4), c(1e-9, 0.0)] {
                let tau = w * t + d;
                // fully cancelled product form of (τ^{rs} − t^{rs})/((τʳ − tʳ)(τˢ − tˢ))
                let mut prod = Complex64::new(1.0, 0.0);
                for j in (0..n).filter(|j| j % r != 0 && j % s != 0) {
                    prod *= tau - Complex64::from_polar(1.0, TAU * j as f64 / n as f64) * t;
                }
                let want = prod / ((tau - t) * 2.0 * PI * I);
                let got = ctx.cauchy_c(t, tau).map_err(|e| e.to_string())?;
                worst = worst.max((got - want).norm() / want.norm());
            }
        }
    }
    let ctx = KernelContext::new(Curve::cusp(2, 3).map_err(|e| e.to_string())?, 0);
    let exact = ctx.cauchy_c(c(1.0, 0.0), c(-1.0, 0.0)).map_err(|e| e.to_string())?;
    worst = worst.max((exact - c(0.0, 3.0 / (4.0 * PI))).norm() / (3.0 / (4.0 * PI)));
    let t = c(0.5, 0.0);
    let rule = CircleRule::centered(t, 1e-2, 2048).map_err(|e| e.to_string())?;
    let curve = ctx.curve().clone();
    let residue = integrate_circle(
        |tau| {
            ctx.cauchy_c(t, tau).unwrap_or(c(f64::NAN, 0.0)) * curve.canonical_weight(tau).unwrap_or(c(f64::NAN, 0.0))
        },
        &rule,
    )
    .map_err(|e| e.to_string())?;
    let res_err = (residue - 1.0).norm();
    check(
        worst <= 1e-8 && res_err <= 1e-8,
        format!("removable-point relative error {worst:.3e}, diagonal residue error {res_err:.3e}"),
    )
}

fn weighted_vanishing() -> Outcome {
    let phi = parse_expr("(bump(0.04,0.36) - bump(0.01,0.04))*(tau + tau^3 + tau^5 + tau^7), dbar")
        .map_err(|e| e.to_string())?;
    let curve = Curve::cusp(2, 3).map_err(|e| e.to_string())?;
    let radii: Vec<f64> = (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let opts = SolveOptions::default();
    let mut slopes = Vec::new();
    for mu in 0..4 {
        let ctx = KernelContext::new(curve.clone(), mu);
        let targets: Vec<Complex64> = radii.iter().map(|&r| Complex64::from_polar(r, 0.3)).collect();
        let rep = solve_area(&ctx, &phi, &targets, &opts).map_err(|e| e.to_string())?;
        let fit = growth_profile(
            |t| Ok(rep.values.iter().find(|(p, _)| *p == t).map(|v| v.1).unwrap_or(c(f64::NAN, 0.0))),
            0.3,
            &radii,
        )
        .map_err(|e| e.to_string())?;
        slopes.push(fit.slope);
    }
    let ctx = KernelContext::new(curve, 2);
    let rep = verify_koppelman(&ctx, &phi, &koppelman_targets(), 1e-4, &opts).map_err(|e| e.to_string())?;
    let increments_ok = slopes.windows(2).all(|w| w[1] >= w[0] + 1.5);
    check(
        increments_ok && rep.max_residual <= 1e-4,
        format!(
            "slopes [{}], mu=2 Koppelman residual {:.3e}",
            slopes.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(", "),
            rep.max_residual
        ),
    )
}

fn param_curve_example() -> Outcome {
    let spec: CurveSpec = serde_json::from_str(include_str!("fixtures/curve_3_7_8.json")).map_err(|e| e.to_string())?;
    let curve = make_curve(&spec).map_err(|e| e.to_string())?;
    let pulled = curve.pullback("~w, dzbar").map_err(|e| e.to_string())?;
    let expected = parse_expr("3*~tau^9 + 3*~tau^10, dbar").map_err(|e| e.to_string())?;
    if pulled != expected {
        return Err(format!("pullback gave {pulled}, expected {expected}"));
    }
    let phi =
        parse_expr("(bump(0.04,0.36) - bump(0.01,0.04))*3*(~tau^9 + ~tau^10), dbar").map_err(|e| e.to_string())?;
    let rep =
        verify_koppelman(&KernelContext::new(curve, 0), &phi, &koppelman_targets(), 1e-4, &SolveOptions::default())
            .map_err(|e| e.to_string())?;
    check(rep.max_residual <= 1e-4, format!("pullback exact; localized Koppelman residual {:.3e}", rep.max_residual))
}

fn quadrature_floor() -> Outcome {
    let rule = CircleRule::new(1.0, 2048).map_err(|e| e.to_string())?;
    let v = integrate_circle(|t| 1.0 / t, &rule).map_err(|e| e.to_string())?;
    let floor = (v - c(0.0, TAU)).norm();
    let errs: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&n| {
            let r = CircleRule::new(1.0, n).expect("valid rule");
            integrate_circle(|t| 1.0 / (t - 2.0), &r).expect("finite").norm()
        })
        .collect();
    // exact error 2π·2^{−n}/(1 − 2^{−n}): each doubling squares the ratio
    let geometric = errs.windows(2).all(|w| w[1] <= w[0] * w[0]);
    check(
        floor <= 1e-14 && geometric,
        format!(
            "|circle(1/tau) - 2 pi i| = {floor:.3e}; errors under doubling {}",
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("reproduction", reproduction),
        ("gap annihilation", gap_annihilation),
        ("moment criterion vs semigroup", moment_semigroup),
        ("Koppelman identity", koppelman_identity),
        ("classical anchor", classical_anchor),
        ("canonical form cross-check", canonical_form),
        ("kernel stability", kernel_stability),
        ("weighted vanishing", weighted_vanishing),
        ("parametrized curve", param_curve_example),
        ("quadrature floor", quadrature_floor),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{secs:.2}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
