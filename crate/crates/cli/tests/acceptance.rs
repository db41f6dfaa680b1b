//! Acceptance suite: one line per criterion, non-zero exit when any fails.

use isoslice::pipeline::Budget;
use isoslice::{Body, Constants, Report};
use isoslice_cli::corpus;
use isoslice_cli::suite::{convex_cross_check, indicator_consistency, run_check, Context};
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn context(dims: &[usize]) -> Context {
    Context::new(Budget::new(SEED), Constants::default(), dims.to_vec())
}

fn check(ctx: &Context, id: &str) -> Vec<Report> {
    run_check(id, ctx).unwrap_or_else(|e| panic!("check {id} is not runnable: {e}"))
}

/// Pass when every report passes; the detail names the failures.
fn all_pass(reports: &[Report]) -> Outcome {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}/{}: {}", r.check, r.subject, r.notes.join("; ")))
        .collect();
    Outcome {
        pass: failed.is_empty() && !reports.is_empty(),
        detail: if failed.is_empty() {
            format!("{} reports", reports.len())
        } else {
            failed.join(" | ")
        },
    }
}

fn within(outcome: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    let fast = elapsed <= limit;
    Outcome {
        pass: outcome.pass && fast,
        detail: format!(
            "{}; {:.1}s of {:.0}s",
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        ),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    within(o, start.elapsed(), limit)
}

fn exact_identities() -> Outcome {
    timed(Duration::from_secs(1), || {
        let ctx = context(&[2]);
        let mut r = check(&ctx, "eq3");
        r.extend(check(&ctx, "eq4"));
        all_pass(&r)
    })
}

fn moment_equality_cases() -> Outcome {
    timed(Duration::from_secs(5), || {
        all_pass(&check(&context(&[2, 3]), "lem-2.4"))
    })
}

fn indicator_self_consistency() -> Outcome {
    timed(Duration::from_secs(10), || {
        let reports: Vec<Report> = corpus::all_bodies(&[2, 3, 4], SEED)
            .iter()
            .map(|k| indicator_consistency(k).expect("indicator K_f"))
            .collect();
        all_pass(&reports)
    })
}

fn busemann() -> Outcome {
    timed(Duration::from_secs(60), || {
        all_pass(&check(&context(&[2, 3]), "thm-2.1"))
    })
}

fn isotropic_equivalence() -> Outcome {
    timed(Duration::from_secs(300), || {
        all_pass(&check(&context(&[2, 3]), "lem-2.3"))
    })
}

fn distance_stability() -> Outcome {
    timed(Duration::from_secs(300), || {
        let reports = check(&context(&[2, 3, 4]), "lem-2.2");
        let stability: Vec<Report> = reports
            .into_iter()
            .filter(|r| r.subject.ends_with("(stability)"))
            .collect();
        all_pass(&stability)
    })
}

fn mass_concentration() -> Outcome {
    timed(Duration::from_secs(600), || {
        let reports = check(&context(&[2, 3, 4]), "prop-3.1");
        let mixed = reports.iter().filter(|r| r.subject.ends_with("(mixed volume)")).count();
        let mut o = all_pass(&reports);
        // two n ≤ 3 dimensions of seven bodies each
        if mixed != 14 {
            o.pass = false;
            o.detail = format!("{} mixed-volume reports, expected 14; {}", mixed, o.detail);
        }
        o
    })
}

fn main_pipeline() -> Outcome {
    timed(Duration::from_secs(900), || {
        let reports = check(&context(&[2, 3, 4]), "thm-1.2");
        let mut o = all_pass(&reports);
        let balls = reports.iter().filter(|r| r.subject.ends_with("(ball)")).count();
        let invariance = reports
            .iter()
            .filter(|r| r.subject.ends_with("(linear invariance)"))
            .count();
        if balls != 3 || invariance != 3 {
            o.pass = false;
            o.detail = format!(
                "{balls} ball and {invariance} invariance reports, expected 3 each; {}",
                o.detail
            );
        }
        o
    })
}

fn quasi_suite() -> Outcome {
    timed(Duration::from_secs(900), || {
        let ctx = context(&corpus::QUASI_DIMS);
        let mut reports = check(&ctx, "lem-4.1");
        let tails = check(&ctx, "lem-4.2");
        let mut o = if tails.len() == 2 * corpus::QUASI_DIMS.len() {
            reports.extend(tails);
            for n in corpus::QUASI_DIMS {
                reports.push(convex_cross_check(&Body::cube(n).with_name(format!("cube:{n}")), &ctx));
            }
            all_pass(&reports)
        } else {
            Outcome {
                pass: false,
                detail: format!("{} tail reports", tails.len()),
            }
        };
        if ctx.constants.quasi_c3 != 8.0 {
            o.pass = false;
            o.detail = format!("quasi_c3 = {}; {}", ctx.constants.quasi_c3, o.detail);
        }
        o
    })
}

fn section_suite() -> Outcome {
    timed(Duration::from_secs(600), || {
        let ctx = context(&[3, 4]);
        let mut reports = check(&ctx, "prop-5.2");
        reports.extend(check(&ctx, "prop-5.3"));
        let mut o = all_pass(&reports);
        let mut extra = Vec::new();
        for r in reports
            .iter()
            .filter(|r| r.subject.starts_with("cube:") && r.subject.contains(" on E["))
        {
            let d = r.value("d_G").unwrap_or(f64::INFINITY);
            if d > 1.1 {
                extra.push(format!("{}: d_G = {d}", r.subject));
            }
        }
        let near = reports
            .iter()
            .find(|r| r.check == "prop-5.3" && r.subject == corpus::near_origin_box().name());
        match near {
            Some(r) => {
                let full = r.inputs.get("branch").and_then(|b| b.as_str()) == Some("full");
                let margin = r.value("surface_margin").unwrap_or(f64::NEG_INFINITY);
                if !full || margin.is_nan() || margin <= 0.0 {
                    extra.push(format!("near-origin branch full = {full}, surface margin {margin}"));
                }
            }
            None => extra.push("no near-origin report for the elongated box".into()),
        }
        if !extra.is_empty() {
            o.pass = false;
            o.detail = format!("{}; {}", extra.join(" | "), o.detail);
        }
        o
    })
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_isoslice"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success() || out.status.code() == Some(1),
        "cli failed: {:?}",
        out
    );
    out.stdout
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 2] = [
        &["verify", "--ids", "lem-2.3,thm-2.1", "--dims", "2"],
        &["perturb", "--body", "random-hpoly:2:8"],
    ];
    let mut diffs = Vec::new();
    for cmd in runs {
        let with = |threads: &str| {
            let mut args = vec!["--seed", "11", "--threads", threads];
            args.extend_from_slice(cmd);
            run_cli(&args)
        };
        let (a, b, c) = (with("1"), with("1"), with("4"));
        if a.is_empty() || a != b || a != c {
            diffs.push(cmd.join(" "));
        }
    }
    Outcome {
        pass: diffs.is_empty(),
        detail: if diffs.is_empty() {
            "byte-identical at 1 and 4 threads".into()
        } else {
            format!("differs: {}", diffs.join(" | "))
        },
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact identities", exact_identities),
        ("moment lemma equality cases", moment_equality_cases),
        ("indicator self-consistency", indicator_self_consistency),
        ("Busemann triangle inequality", busemann),
        ("L_{K_f} / L_f equivalence", isotropic_equivalence),
        ("K_f distance stability", distance_stability),
        ("mass concentration", mass_concentration),
        ("main perturbation pipeline", main_pipeline),
        ("quasi-convex suite", quasi_suite),
        ("sections and projections", section_suite),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
