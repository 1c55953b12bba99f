//! Acceptance suite. Runs without the libtest harness and prints one line per
//! criterion; exits non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{self, Command};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revlp_core::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn prec() -> Precision {
    Precision::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn finite(r: &Ratio) -> Result<&Real, String> {
    r.finite().ok_or_else(|| format!("expected a finite ratio, got {r:?}"))
}

fn jensen_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e45);
    let (one, two) = (Real::one(), Real::int(2));
    for case in 0..10_000 {
        let len = rng.gen_range(1..=24);
        let values: Vec<Real> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.15) {
                    Real::zero()
                } else {
                    Real::ratio(rng.gen_range(0..=1000), rng.gen_range(1..=64))
                }
            })
            .collect();
        let b = Sequence::new(values.clone()).map_err(|e| e.to_string())?;
        let r = verify_jensen(&b, &one, &two, IndexRange::new(1, len), prec()).map_err(|e| e.to_string())?;
        let sum = values.iter().fold(Real::zero(), |acc, v| &acc + v);
        let squares = values.iter().fold(Real::zero(), |acc, v| &acc + &(v * v));
        ensure(r.holds && r.rhs == sum && squares <= &sum * &sum, || format!("exact case {case} failed: {values:?}"))?;
    }

    let mut worst: f64 = 0.0;
    for case in 0..1_000 {
        let len = rng.gen_range(1..=32);
        let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..100.0)).collect();
        let alpha = loop {
            let a: f64 = rng.gen_range(0.05..4.0);
            if a.fract() != 0.0 {
                break a;
            }
        };
        let beta = alpha + rng.gen_range(0.05..4.0);
        let b = Sequence::from_f64_exact(&raw).map_err(|e| e.to_string())?;
        let (ar, br) = (Real::from_f64_exact(alpha).unwrap(), Real::from_f64_exact(beta).unwrap());
        let r = verify_jensen(&b, &ar, &br, IndexRange::new(1, len), prec()).map_err(|e| e.to_string())?;
        let norm = |e: f64| raw.iter().map(|x| x.powf(e)).sum::<f64>().powf(1.0 / e);
        let (lhs, rhs) = (norm(beta), norm(alpha));
        let err = ((r.lhs.to_f64() - lhs) / lhs.max(f64::MIN_POSITIVE)).abs().max(((r.rhs.to_f64() - rhs) / rhs).abs());
        worst = worst.max(err);
        ensure(r.holds && err < 1e-12, || {
            format!("float case {case} (alpha {alpha}, beta {beta}): holds {}, rel err {err:e}", r.holds)
        })?;
    }
    Ok(format!("10000 exact (1,2) cases and 1000 float cases hold; worst float deviation from f64 norms {worst:.1e}"))
}

fn unit_instances() -> Outcome {
    let f = make_named_form(&FormSpec::new(FormId::T2_2, Real::one(), 1, 16).weights(WeightSpec::Unit), prec())
        .map_err(|e| e.to_string())?;
    let r = eval_form(&f, &Sequence::ones(16)).map_err(|e| e.to_string())?;
    let lhs: i64 = (1..=16).map(|mu| 17 - mu).sum();
    let rhs0: i64 = (8..=16).sum();
    ensure(r.exact && r.lhs == Real::int(lhs) && r.rhs0 == Real::int(rhs0), || {
        format!("T2_2 unit instance gave {} / {}", r.lhs, r.rhs0)
    })?;

    for n in [4usize, 8, 16, 32, 64] {
        let spec = FormSpec::new(FormId::C5_2a, Real::one(), 1, n).alpha(Real::one()).lambda_exp(Real::zero());
        let f = make_named_form(&spec, prec()).map_err(|e| e.to_string())?;
        let a = power_sequence(&Real::int(-1), n, prec());
        let r = eval_form(&f, &a).map_err(|e| e.to_string())?;
        ensure(r.exact && r.ratio == Ratio::Finite(Real::one()), || {
            format!("C5_2a harmonic n = {n}: ratio {:?}", r.ratio)
        })?;
        ensure(r.lhs == Real::int(n as i64), || format!("C5_2a harmonic n = {n}: lhs {} != {n}", r.lhs))?;
    }
    Ok(format!("T2_2 ones gives {lhs}/{rhs0}; harmonic C5_2a ratio is exactly 1 for n = 4..64"))
}

fn certificate_soundness() -> Outcome {
    let lambda_exps = [Real::ratio(-1, 2), Real::zero(), Real::one()];
    let gamma_exps = [Real::int(-1), Real::zero(), Real::one()];
    let ge_ps = [Real::one(), Real::ratio(3, 2), Real::int(2)];
    let le_ps = [Real::ratio(1, 4), Real::ratio(1, 2), Real::one()];
    let mut runs = 0;
    let mut trials = 0;
    let mut vacuous = 0;
    for (id, ps, nu_max) in
        [(FormId::T2_1, &ge_ps, 7u32), (FormId::T2_2, &ge_ps, 7), (FormId::T2_3, &le_ps, 5), (FormId::T2_4, &le_ps, 5)]
    {
        for le in &lambda_exps {
            for ge in &gamma_exps {
                let len = 1usize << nu_max;
                let lambda = power_sequence(le, len, prec());
                let gamma = power_sequence(ge, len, prec());
                let w = measure_weights(&lambda, &gamma, nu_max).map_err(|e| e.to_string())?;
                for p in ps {
                    let cert = derive_constant(id, &w.lambda, &w.gamma, Some(&w.kgeo), p, prec())
                        .map_err(|e| e.to_string())?;
                    let cfg = ValidationConfig::new(id, 10_000, 2024 + runs as u64)
                        .with_witness(WitnessWeights { lambda: lambda.clone(), gamma: gamma.clone() });
                    let r = validate_certificate(&cert, &cfg).map_err(|e| e.to_string())?;
                    ensure(r.fail_count == 0 && r.pass_count == r.trials, || {
                        format!(
                            "{id} lambda mu^{le} gamma nu^{ge} p {p}: {} failures, {} skipped, first {:?}",
                            r.fail_count, r.skipped_count, r.first_failure
                        )
                    })?;
                    runs += 1;
                    trials += r.trials;
                    vacuous += r.vacuous_count;
                }
            }
        }
    }
    Ok(format!("{runs} profile/p combinations, {trials} trials, 0 failures ({vacuous} vacuous)"))
}

fn random_p1_form(rng: &mut ChaCha8Rng, max_m: usize) -> InequalityForm {
    let ids = [FormId::T2_1, FormId::T2_2, FormId::T2_3, FormId::T2_4];
    loop {
        let id = ids[rng.gen_range(0..ids.len())];
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(4..=max_m);
        let weights = if rng.gen_bool(0.25) {
            WeightSpec::Unit
        } else {
            let len = weight_len(m);
            WeightSpec::Explicit {
                lambda: power_sequence(&Real::int(rng.gen_range(-2..=2)), len, prec()),
                gamma: power_sequence(&Real::int(rng.gen_range(-1..=1)), len, prec()),
            }
        };
        if let Ok(f) = make_named_form(&FormSpec::new(id, Real::one(), n, m).weights(weights), prec()) {
            return f;
        }
    }
}

fn p1_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e1);
    let mut worst: f64 = 0.0;
    let mut grid_checked = 0;
    for i in 0..50 {
        let form = random_p1_form(&mut rng, if i < 20 { 16 } else { 64 });
        let tag = format!("{} (n {}, m {})", form.id, form.n, form.m);
        let exact = exact_best_constant_p1(&form).map_err(|e| format!("{tag}: {e}"))?;
        let found = search_best_constant(&form, 8, 2, i as u64).map_err(|e| format!("{tag}: {e}"))?;
        let d = Real::rel_diff(finite(&exact.c_star)?, finite(&found.best_ratio)?);
        worst = worst.max(d);
        ensure(d < 1e-9, || format!("{tag}: search {:?} vs exact {:?}", found.best_ratio, exact.c_star))?;
        if form.m <= 16 {
            let grid = grid_bruteforce(&form, 1).map_err(|e| format!("{tag}: {e}"))?;
            ensure(grid.best_ratio == exact.c_star, || {
                format!("{tag}: grid {:?} vs exact {:?}", grid.best_ratio, exact.c_star)
            })?;
            grid_checked += 1;
        }
    }
    Ok(format!("50 forms, worst search deviation {worst:.1e}; {grid_checked} forms with m <= 16 match the level-1 grid exactly"))
}

fn sample_extremum(form: &InequalityForm, seeds: std::ops::Range<u64>, upper: bool) -> f64 {
    let (lf, gf) = form.weights_f64();
    let mut best = if upper { 0.0 } else { f64::INFINITY };
    for seed in seeds {
        let a = random_decreasing(form.m, seed, IncrementDist::default()).to_f64_vec();
        let (l, r) = evaluate_sides(&form.shape, &lf, &gf, &a, &form.p, form.precision);
        if r > 0.0 {
            best = if upper { best.max(l / r) } else { best.min(l / r) };
        }
    }
    best
}

fn hardy_littlewood_boundedness() -> Outcome {
    let mut summary = Vec::new();
    for (id, p, upper) in [
        (FormId::HL_1_1, Real::int(2), true),
        (FormId::HL_1_2, Real::ratio(3, 2), true),
        (FormId::HL_1_3, Real::ratio(1, 2), false),
        (FormId::HL_1_4, Real::one(), false),
    ] {
        let form = make_named_form(&FormSpec::new(id, p, 2, 64).alpha(Real::ratio(1, 2)), prec())
            .map_err(|e| e.to_string())?;
        let a = sample_extremum(&form, 0..1_000, upper);
        let b = sample_extremum(&form, 1_000_000..1_001_000, upper);
        ensure(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0, || format!("{id}: extrema {a}, {b}"))?;
        let spread = (a - b).abs() / a.max(b);
        ensure(spread <= 0.2, || format!("{id}: extrema {a} and {b} differ by {:.0}%", spread * 100.0))?;
        summary.push(format!("{id} {} {a:.4}/{b:.4}", if upper { "max" } else { "min" }));
    }
    Ok(summary.join(", "))
}

fn sharpness_sandwich() -> Outcome {
    let mut count = 0;
    let mut unit_t2_2 = None;
    for (le, ge) in [
        (Real::zero(), Real::zero()),
        (Real::ratio(-1, 2), Real::int(-1)),
        (Real::one(), Real::one()),
        (Real::ratio(-1, 2), Real::one()),
    ] {
        let lambda = power_sequence(&le, 128, prec());
        let gamma = power_sequence(&ge, 128, prec());
        let w = measure_weights(&lambda, &gamma, 7).map_err(|e| e.to_string())?;
        for id in [FormId::T2_1, FormId::T2_2] {
            let cert = derive_constant(id, &w.lambda, &w.gamma, Some(&w.kgeo), &Real::one(), prec())
                .map_err(|e| e.to_string())?;
            for (n, m) in [(1, 16), (2, 32), (4, 64)] {
                let weights = WeightSpec::Explicit { lambda: lambda.clone(), gamma: gamma.clone() };
                let form = make_named_form(&FormSpec::new(id, Real::one(), n, m).weights(weights), prec())
                    .map_err(|e| e.to_string())?;
                let sharp = exact_best_constant_p1(&form).map_err(|e| e.to_string())?;
                let sharp = finite(&sharp.c_star)?.clone();
                let ones = eval_form(&form, &Sequence::ones(m)).map_err(|e| e.to_string())?;
                let ones = finite(&ones.ratio)?.clone();
                ensure(cert.c <= sharp && sharp <= ones, || {
                    format!("{id} ({n},{m}) mu^{le} nu^{ge}: {} / {sharp} / {ones}", cert.c)
                })?;
                if id == FormId::T2_2 && (n, m) == (1, 16) && le.is_zero() && ge.is_zero() {
                    unit_t2_2 = Some((cert.c.clone(), sharp.clone(), ones.clone()));
                }
                count += 1;
            }
        }
    }
    let (c, s, o) = unit_t2_2.ok_or("unit T2_2 instance missing")?;
    ensure(o == Real::ratio(34, 27), || format!("unit T2_2 all-ones ratio {o}"))?;
    Ok(format!("{count} GE instances; unit T2_2: {c} <= {s} <= {o}"))
}

fn golden(name: &str) -> Vec<u8> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read(path).unwrap_or_default()
}

fn cli_reproducibility() -> Outcome {
    let cases: [(&[&str], &str, i32, bool); 3] = [
        (&["classify", "--seq", "power:1", "--len", "32", "--nu-max", "4"], "classify_power1_nu4.json", 0, true),
        (
            &["eval", "--form", "T2_2", "--n", "1", "--m", "16", "--p", "1", "--weights", "unit", "--a", "ones"],
            "eval_t2_2_unit_ones.json",
            0,
            true,
        ),
        (
            &["derive", "--form", "T2_2", "--n", "1", "--m", "15", "--p", "1", "--weights", "unit"],
            "derive_t2_2_m15.stderr",
            2,
            false,
        ),
    ];
    for (args, file, code, on_stdout) in cases {
        let expected = golden(file);
        for run in 0..2 {
            let out = Command::new(env!("CARGO_BIN_EXE_revlp"))
                .args(args)
                .env_remove("REVLP_DIGITS")
                .output()
                .map_err(|e| e.to_string())?;
            let got = if on_stdout { &out.stdout } else { &out.stderr };
            ensure(out.status.code() == Some(code), || format!("{file} run {run}: exit {:?}", out.status.code()))?;
            ensure(*got == expected, || format!("{file} run {run}: output differs from golden file"))?;
        }
    }
    Ok("classify, eval and derive (precondition error) match golden files on two runs".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("jensen suite", jensen_suite),
        ("unit-instance exactness", unit_instances),
        ("certificate soundness", certificate_soundness),
        ("p = 1 oracle equivalence", p1_oracles),
        ("Hardy-Littlewood boundedness", hardy_littlewood_boundedness),
        ("sharpness sandwich", sharpness_sandwich),
        ("CLI reproducibility", cli_reproducibility),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        process::exit(1);
    }
}
