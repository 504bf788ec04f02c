//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 1 to 11 come from the verification suite. Criterion 12 runs the
//! whole suite a second time and compares the serialized reports byte for byte.
//!
//! Failing criteria are reported but do not fail the run unless
//! `PACKDIM_STRICT=1` is set.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use packdim::suite::{self, SuiteConfig, GROUPS};

fn main() -> ExitCode {
    let start = Instant::now();
    let report = match suite::run(&SuiteConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("suite failed to run: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut by_criterion: BTreeMap<u8, Vec<&suite::Clause>> = BTreeMap::new();
    for c in &report.clauses {
        by_criterion.entry(c.criterion).or_default().push(c);
    }
    let mut all = true;
    let mut passed = 0;
    for (group, criterion) in GROUPS {
        let clauses = by_criterion.get(&criterion).cloned().unwrap_or_default();
        let pass = !clauses.is_empty() && clauses.iter().all(|c| c.pass);
        all &= pass;
        passed += usize::from(pass);
        let failing: Vec<String> = clauses
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                format!(
                    "{} (deviation {:.4e} > tolerance {:.4e})",
                    c.name, c.deviation, c.tolerance
                )
            })
            .collect();
        println!(
            "criterion {criterion}: {} [{group}] {} clauses{}",
            if pass { "PASS" } else { "FAIL" },
            clauses.len(),
            if failing.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failing.join(", "))
            }
        );
    }

    let first = serde_json::to_vec_pretty(&report).expect("report serializes");
    let deterministic = match suite::run(&SuiteConfig::default()) {
        Ok(again) => serde_json::to_vec_pretty(&again).expect("report serializes") == first,
        Err(_) => false,
    };
    all &= deterministic;
    passed += usize::from(deterministic);
    println!(
        "criterion 12: {} [determinism] two full runs produce identical reports",
        if deterministic { "PASS" } else { "FAIL" }
    );
    println!("{passed} of {} criteria pass", GROUPS.len() + 1);
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    let strict = std::env::var("PACKDIM_STRICT").is_ok_and(|v| v == "1");
    if all || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
