//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fpds_cli::{run, sweep_selector};
use fpds_core::{
    builtin_scenario, certificate, envelope_check, integrate, mittag_leffler, picard_solve,
    project_box, project_implicit, residual, scalar_relaxation, BoxSet, DMatrix, DVector,
    MlfParams, Network, PicardOptions, Realization, ScenarioName, Selector, StateVector,
    ValidatedSystem, Weights,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{what} = {got}, expected {want}")
    })
}

fn scenario(name: ScenarioName) -> ValidatedSystem {
    builtin_scenario(name).expect("builtin scenarios are valid")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

/// Fastest of a few timed calls, to keep scheduler noise out of sub-millisecond limits.
fn best_of<T>(mut f: impl FnMut() -> T) -> (T, Duration) {
    let (mut v, mut best) = timed(&mut f);
    for _ in 0..4 {
        let (w, d) = timed(&mut f);
        if d < best {
            best = d;
        }
        v = w;
    }
    (v, best)
}

fn certificate_example_42() -> Outcome {
    let sys = scenario(ScenarioName::Example42);
    let w = Weights::from_flat(&[2.0, 1.0], 2).unwrap();
    let (c, dt) = best_of(|| certificate(&sys, &w).unwrap());
    within(c.a2_margins[0], 0.05, 1e-12, "a2[1]")?;
    within(c.a2_margins[1], 0.04, 1e-12, "a2[2]")?;
    within(c.xi[0], 0.95, 1e-12, "xi[1]")?;
    within(c.xi[1], 0.875, 1e-12, "xi[2]")?;
    within(c.kappa, 0.95, 1e-12, "kappa")?;
    within(c.theta, 0.05, 1e-12, "theta")?;
    ensure(c.pass, || "certificate does not pass".into())?;
    ensure(dt < Duration::from_millis(1), || format!("took {dt:?}"))?;
    Ok(format!("kappa = {}, theta = {}, {dt:?}", c.kappa, c.theta))
}

fn certificate_example_41() -> Outcome {
    let sys = scenario(ScenarioName::Example41);
    let w = Weights::unit(3, 2);
    let (c, dt) = best_of(|| certificate(&sys, &w).unwrap());
    ensure(
        c.a2_margins
            .iter()
            .chain(c.a3_margins.iter())
            .all(|&m| m >= 0.0),
        || format!("margins {:?} {:?}", c.a2_margins, c.a3_margins),
    )?;
    ensure(c.factors().all(|f| f > 0.0 && f < 1.0), || {
        format!("factors {:?}", c.factors().collect::<Vec<_>>())
    })?;
    ensure(c.pass, || "certificate does not pass".into())?;
    ensure(dt < Duration::from_millis(1), || format!("took {dt:?}"))?;
    Ok(format!("kappa = {}, {dt:?}", c.kappa))
}

fn random_state(rng: &mut ChaCha8Rng, sys: &ValidatedSystem) -> StateVector {
    let mut draw = |bx: &BoxSet| {
        DVector::from_fn(bx.len(), |i, _| {
            let (c, r) = (0.5 * (bx.lo[i] + bx.hi[i]), bx.hi[i] - bx.lo[i]);
            c + 5.0 * r * (2.0 * rng.random::<f64>() - 1.0)
        })
    };
    StateVector::new(draw(&sys.box1), draw(&sys.box2))
}

fn contraction() -> Outcome {
    let (res, dt) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst: f64 = 0.0;
        let mut violations = 0;
        for name in [ScenarioName::Example41, ScenarioName::Example42] {
            let sys = scenario(name);
            let w = sys.weights.clone().unwrap();
            let kappa = certificate(&sys, &w).unwrap().kappa;
            for sel in [Selector::Lower, Selector::Upper] {
                let real = Realization::select(&sys, sel);
                let net = Network::new(&sys, &real).unwrap();
                for _ in 0..1000 {
                    let (z1, z2) = (random_state(&mut rng, &sys), random_state(&mut rng, &sys));
                    let lhs = w.distance(&net.map(&z2), &net.map(&z1));
                    let rhs = kappa * w.distance(&z2, &z1);
                    if lhs > rhs {
                        violations += 1;
                    }
                    worst = worst.max(lhs / rhs);
                }
            }
        }
        (violations, worst)
    });
    let (violations, worst) = res;
    ensure(violations == 0, || format!("{violations} violations"))?;
    ensure(dt < Duration::from_secs(1), || format!("took {dt:?}"))?;
    Ok(format!(
        "4000 pairs, worst ratio to kappa {worst:.6}, {dt:?}"
    ))
}

fn equilibrium_oracle() -> Outcome {
    let sys = scenario(ScenarioName::Example42);
    let w = sys.weights.clone().unwrap();
    let (res, dt) = timed(|| -> Outcome {
        let mut notes = Vec::new();
        for sel in [Selector::Lower, Selector::Upper] {
            let real = Realization::select(&sys, sel);
            let eq = picard_solve(&sys, &real, &w, &PicardOptions::default())
                .map_err(|e| e.to_string())?;
            let r = residual(&sys, &real, &w, &eq.point).unwrap();
            ensure(r <= 1e-10, || format!("{sel:?}: residual {r:e}"))?;
            // Grid over [0, 2.5] x [-0.5, 1.0] with step 1e-3.
            let (x_lo, y_lo, h) = (0.0, -0.5, 1e-3);
            let inside =
                |p: &StateVector| (0.0..=2.5).contains(&p.x[0]) && (-0.5..=1.0).contains(&p.x[1]);
            ensure(inside(&eq.point), || {
                format!("{sel:?}: solution outside grid box")
            })?;
            let net = Network::new(&sys, &real).unwrap();
            let mut grid_min = f64::INFINITY;
            let mut s = StateVector::zeros(2, 0);
            for i in 0..=2500 {
                s.x[0] = x_lo + h * i as f64;
                for j in 0..=1500 {
                    s.x[1] = y_lo + h * j as f64;
                    grid_min = grid_min.min(w.distance(&net.map(&s), &s));
                }
            }
            ensure(r < grid_min, || {
                format!("{sel:?}: residual {r:e} vs grid {grid_min:e}")
            })?;
            notes.push(format!(
                "{sel:?} residual {r:.1e} < grid min {grid_min:.1e}"
            ));
        }
        Ok(notes.join("; "))
    });
    let detail = res?;
    ensure(dt < Duration::from_secs(10), || format!("took {dt:?}"))?;
    Ok(format!("{detail}, {dt:?}"))
}

fn relaxation_error(alpha: f64, steps: usize) -> f64 {
    let sys = scalar_relaxation(alpha);
    let real = Realization::select(&sys, Selector::Lower);
    let z0 = StateVector::from_slices(&[1.0], &[]);
    let x = integrate(&sys, &real, &z0, 1.0, steps).unwrap().last().x[0];
    let exact = mittag_leffler(MlfParams::one(alpha).unwrap(), -1.0).unwrap();
    ((x - exact) / exact).abs()
}

fn fractional_solver() -> Outcome {
    let (res, dt) = timed(|| -> Outcome {
        let mut notes = Vec::new();
        for alpha in [0.5, 0.8, 0.9, 1.0] {
            let coarse = relaxation_error(alpha, 2000);
            let fine = relaxation_error(alpha, 4000);
            ensure(coarse <= 1e-3, || {
                format!("alpha {alpha}: error {coarse:e}")
            })?;
            ensure(fine < coarse, || {
                format!("alpha {alpha}: {fine:e} !< {coarse:e}")
            })?;
            notes.push(format!("{alpha}: {coarse:.1e}->{fine:.1e}"));
        }
        Ok(notes.join(", "))
    });
    let detail = res?;
    ensure(dt < Duration::from_secs(5), || format!("took {dt:?}"))?;
    Ok(format!("{detail}, {dt:?}"))
}

fn mittag_leffler_accuracy() -> Outcome {
    let e1 = MlfParams::one(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let z = -30.0 + 33.0 * k as f64 / 99.0;
        let got = mittag_leffler(e1, z).map_err(|e| e.to_string())?;
        worst = worst.max(((got - z.exp()) / z.exp()).abs());
    }
    ensure(worst <= 1e-10, || format!("E_1 vs exp: {worst:e}"))?;
    let half = mittag_leffler(MlfParams::one(0.5).unwrap(), -1.0).map_err(|e| e.to_string())?;
    // e * erfc(1)
    let want = 0.427_583_576_155_807;
    let rel = ((half - want) / want).abs();
    ensure(rel <= 1e-8, || format!("E_1/2(-1) error {rel:e}"))?;
    for alpha in [0.1, 0.3, 0.5, 0.8, 0.9, 0.99, 1.0] {
        let v = mittag_leffler(MlfParams::one(alpha).unwrap(), 0.0).unwrap();
        ensure(v == 1.0, || format!("E_{alpha}(0) = {v}"))?;
    }
    Ok(format!("E_1 worst {worst:.1e}, E_1/2(-1) {rel:.1e}"))
}

fn envelope_run(sys: &ValidatedSystem, sel: Selector) -> Result<f64, String> {
    let w = sys.weights.clone().unwrap();
    let theta = certificate(sys, &w).unwrap().theta;
    let real = Realization::select(sys, sel);
    let eq = picard_solve(sys, &real, &w, &PicardOptions::default()).map_err(|e| e.to_string())?;
    let traj = integrate(sys, &real, sys.initial.as_ref().unwrap(), 20.0, 4000)
        .map_err(|e| e.to_string())?;
    let rep = envelope_check(&traj, &eq, &w, theta, 0.05).map_err(|e| e.to_string())?;
    ensure(rep.pass, || {
        format!(
            "{sel:?}: max ratio {}, {} violations",
            rep.max_ratio, rep.violations
        )
    })?;
    Ok(rep.max_ratio)
}

fn envelope() -> Outcome {
    let (res, dt) = timed(|| -> Result<f64, String> {
        let mut worst: f64 = 0.0;
        for name in [ScenarioName::Example41, ScenarioName::Example42] {
            let sys = scenario(name);
            for sel in [Selector::Lower, Selector::Upper] {
                worst = worst.max(envelope_run(&sys, sel).map_err(|e| format!("{name}: {e}"))?);
            }
        }
        Ok(worst)
    });
    let worst = res?;
    ensure(dt < Duration::from_secs(60), || format!("took {dt:?}"))?;
    Ok(format!("max ratio {worst}, {dt:?}"))
}

fn sweep() -> Outcome {
    let (res, dt) = timed(|| -> Outcome {
        let sys = scenario(ScenarioName::Example41);
        let w = sys.weights.clone().unwrap();
        let cert = certificate(&sys, &w).unwrap();
        ensure(cert.pass, || "certificate does not pass".into())?;
        for k in 0..50 {
            let real = Realization::select(&sys, sweep_selector(0, k));
            real.check(&sys).map_err(|e| format!("sample {k}: {e}"))?;
        }
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            [
                "fpds",
                "sweep",
                "example-4.1",
                "--samples",
                "50",
                "--seed",
                "0",
            ],
            &mut out,
            &mut err,
        );
        let text = String::from_utf8(out).unwrap();
        ensure(code == 0, || {
            format!("exit {code}: {}", String::from_utf8_lossy(&err))
        })?;
        ensure(text.contains("summary = 50/50 passed"), || text.clone())?;
        Ok(format!("50/50 realizations pass, kappa = {}", cert.kappa))
    });
    let detail = res?;
    ensure(dt < Duration::from_secs(600), || format!("took {dt:?}"))?;
    Ok(format!("{detail}, {dt:?}"))
}

fn projection_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    let mut worst_shift: f64 = 0.0;
    for _ in 0..10_000 {
        let k = rng.random_range(1..=6);
        let mut lo = Vec::with_capacity(k);
        let mut hi = Vec::with_capacity(k);
        for _ in 0..k {
            let a = rng.random_range(-10.0..10.0);
            lo.push(a);
            hi.push(a + rng.random_range(0.0..5.0));
        }
        let bx = BoxSet::from_slices(&lo, &hi).unwrap();
        let mut vec = |s: f64| DVector::from_fn(k, |_, _| rng.random_range(-s..s));
        let (u, v, x) = (vec(20.0), vec(20.0), vec(20.0));
        let shift = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));

        let (pu, pv) = (project_box(&bx, &u).unwrap(), project_box(&bx, &v).unwrap());
        if (&pu - &pv).lp_norm(1) > (&u - &v).lp_norm(1) || (&pu - &pv).norm() > (&u - &v).norm() {
            violations += 1;
        }

        let hx = &shift * &x;
        let direct = project_implicit(&shift, &bx, &x, &v).unwrap();
        let via_box = &hx + project_box(&bx, &(&v - &hx)).unwrap();
        if direct != via_box {
            violations += 1;
        }
        let shifted = BoxSet::new(&bx.lo + &hx, &bx.hi + &hx).unwrap();
        let onto_shifted = project_box(&shifted, &v).unwrap();
        let scale = 1.0 + v.amax().max(hx.amax());
        let gap = (&direct - &onto_shifted).amax() / scale;
        worst_shift = worst_shift.max(gap);
        if gap > 8.0 * f64::EPSILON {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!(
        "10000 cases, shifted-box agreement {worst_shift:.1e}"
    ))
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["fpds"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    out.extend_from_slice(&err);
    (code, out)
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("fpds-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let csv_a = dir.join("a.csv");
    let csv_b = dir.join("b.csv");
    let commands: Vec<Vec<String>> = vec![
        vec!["certify", "example-4.1"],
        vec!["certify", "example-4.2", "--weights", "2,1"],
        vec![
            "equilibrium",
            "example-4.1",
            "--selector",
            "random",
            "--seed",
            "17",
        ],
        vec![
            "simulate",
            "example-4.1",
            "--selector",
            "random",
            "--seed",
            "17",
            "--steps",
            "1000",
        ],
        vec![
            "envelope",
            "example-4.2",
            "--selector",
            "random",
            "--seed",
            "17",
        ],
        vec![
            "sweep",
            "example-4.1",
            "--samples",
            "6",
            "--seed",
            "17",
            "--steps",
            "1000",
        ],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let (c1, o1) = cli(&args);
        let (c2, o2) = cli(&args);
        ensure(c1 == c2 && o1 == o2, || {
            format!("`{}` differs between runs", cmd.join(" "))
        })?;
        ensure(c1 == 0, || format!("`{}` exited {c1}", cmd.join(" ")))?;
    }
    for path in [&csv_a, &csv_b] {
        let p = path.to_str().unwrap();
        let (code, _) = cli(&[
            "simulate",
            "example-4.2",
            "--selector",
            "upper",
            "--output",
            p,
        ]);
        ensure(code == 0, || format!("simulate to file exited {code}"))?;
    }
    let same = std::fs::read(&csv_a).unwrap() == std::fs::read(&csv_b).unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    ensure(same, || "CSV files differ".into())?;
    Ok(format!(
        "{} commands repeated byte-identically",
        commands.len() + 1
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "certificate reproduction, example 4.2",
            certificate_example_42,
        ),
        (
            "certificate reproduction, example 4.1",
            certificate_example_41,
        ),
        ("contraction property", contraction),
        ("equilibrium oracle equivalence", equilibrium_oracle),
        ("fractional solver oracle", fractional_solver),
        ("Mittag-Leffler accuracy", mittag_leffler_accuracy),
        ("envelope verification", envelope),
        ("interval robustness sweep", sweep),
        ("projection suite", projection_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
