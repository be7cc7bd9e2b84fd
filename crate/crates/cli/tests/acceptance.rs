use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hpqc_core::runner::verify::{
    budget_boundary, codec_roundtrip, cross_mode, cut_rank_identity, descriptor_purity,
    fuzz_replay, ledger_fuzz, oracle_equivalence, severing, CheckResult,
};
use hpqc_core::runner::{run_scenario, RunReport, Scenario};

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario(name: &str) -> Result<RunReport, String> {
    let dir = scenarios_dir();
    let s = Scenario::load(&dir.join(format!("{name}.toml"))).map_err(|e| e.to_string())?;
    let seed = s.seed.unwrap_or(0);
    run_scenario(&s, seed, Some(&dir)).map_err(|e| e.to_string())
}

fn check(c: CheckResult) -> Outcome {
    if c.passed() {
        Ok(format!("{} {} cases", c.name, c.cases))
    } else {
        Err(format!("{}: {}", c.name, c.detail.unwrap_or_default()))
    }
}

fn all(checks: Vec<Outcome>) -> Outcome {
    let mut notes = Vec::new();
    for c in checks {
        notes.push(c?);
    }
    Ok(notes.join(", "))
}

fn within(limit: Duration, started: Instant, outcome: Outcome) -> Outcome {
    let took = started.elapsed();
    if took > limit {
        return Err(format!("took {took:?}, limit {limit:?}"));
    }
    outcome
}

fn estimate_fields(width: &str, depth: &str) -> Result<BTreeMap<String, String>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hpqc"))
        .args(["estimate", "--width", width, "--depth", depth])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

fn expect_fields(have: &BTreeMap<String, String>, want: &[(&str, &str)], what: &str) -> Outcome {
    for (k, v) in want {
        match have.get(*k) {
            Some(got) if got == v => {}
            got => return Err(format!("{what} {k}: want {v}, got {got:?}")),
        }
    }
    Ok(String::new())
}

fn ac1() -> Outcome {
    let started = Instant::now();
    let global = estimate_fields("4000", "500000")?;
    expect_fields(
        &global,
        &[("chips", "7500000000"), ("logical", "2500000"), ("chips_per_logical", "3000")],
        "estimate 4000x500000",
    )?;
    let region = estimate_fields("1000", "1000")?;
    expect_fields(
        &region,
        &[("chips", "3750000"), ("logical", "1250"), ("tiles", "50x25")],
        "estimate 1000x1000",
    )?;
    let r = scenario("paper_fig2")?;
    let fields: BTreeMap<String, String> = r.fields().into_iter().collect();
    expect_fields(
        &fields,
        &[
            ("global.width", "4000"),
            ("global.depth", "500000"),
            ("chips.total", "7500000000"),
            ("logical.total", "2500000"),
            ("users", "1000"),
            ("user_region.chips", "3750000"),
            ("user_region.logical", "1250"),
            ("user_region.tiles", "50x25"),
            ("footprint.dims", "20x40"),
            ("footprint.chips", "3000"),
        ],
        "paper_fig2",
    )?;
    if !r.passed() {
        return Err(format!("paper_fig2: {:?}", r.failures));
    }
    within(Duration::from_secs(1), started, Ok("estimate and paper_fig2 exact".into()))
}

fn ac2() -> Outcome {
    let started = Instant::now();
    let outcome = all((0..3).map(|seed| check(severing(seed))).collect());
    within(Duration::from_secs(10), started, outcome)
}

fn ac3() -> Outcome {
    check(oracle_equivalence(200, 7))
}

fn ac4() -> Outcome {
    check(cut_rank_identity(500, 7))
}

fn ac5() -> Outcome {
    let r = scenario("two_users_bell")?;
    if !r.passed() {
        return Err(format!("two_users_bell: {:?}", r.failures));
    }
    let severed: Vec<usize> = r.entropies.iter().filter(|e| e.0 == 6 || e.0 == 7).map(|e| e.2).collect();
    if severed != [0, 0] {
        return Err(format!("severed cuts {severed:?}, want [0, 0]"));
    }
    match r.bells.first().and_then(|b| b.cut_entropy) {
        Some((a, b)) if a >= 1 && b >= 1 => Ok(format!("severed cuts 0/0, brokered cuts {a}/{b}")),
        other => Err(format!("brokered cuts {other:?}")),
    }
}

fn ac6() -> Outcome {
    all(vec![check(ledger_fuzz(10_000, 7)), check(fuzz_replay(2_000, 7))])
}

fn ac7() -> Outcome {
    let cross = cross_mode(50, 12);
    if cross.cases < 50 {
        return Err(format!("cross_mode ran {} cases", cross.cases));
    }
    all(vec![check(codec_roundtrip(1000, 9)), check(descriptor_purity(50, 4)), check(cross)])
}

fn ac8() -> Outcome {
    for name in ["paper_fig2", "two_users_bell"] {
        let r = scenario(name)?;
        if r.budget.consumed() != r.log_cross_sum {
            return Err(format!(
                "{name}: consumed {} but log cross-sum {}",
                r.budget.consumed(),
                r.log_cross_sum
            ));
        }
    }
    check(budget_boundary())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1", "resource arithmetic", ac1),
        ("AC2", "severing", ac2),
        ("AC3", "oracle equivalence", ac3),
        ("AC4", "cut-rank identity", ac4),
        ("AC5", "retained-link sharing", ac5),
        ("AC6", "ledger fuzz", ac6),
        ("AC7", "protocol round-trip and purity", ac7),
        ("AC8", "budget accounting", ac8),
    ];
    let mut failed = 0;
    for (id, title, run) in criteria {
        let started = Instant::now();
        let outcome = run();
        let took = started.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => println!("PASS {id} {title} ({took:.2}s) {note}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {title} ({took:.2}s) {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
