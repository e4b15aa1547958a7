//! Acceptance criteria: one PASS/FAIL line each, plus the regression fixture.

use std::process::ExitCode;

use eqindex::acceptance::*;

fn main() -> ExitCode {
    let reports = run_all(None, &RunOptions::default());
    for r in &reports {
        println!("{r}");
    }
    let mut ok = reports.len() == 12 && reports.iter().all(|r| r.pass);
    println!("{}/{} criteria passed", reports.iter().filter(|r| r.pass).count(), reports.len());

    let opts = RunOptions {
        fixture: Fixture::FlippedCliffordSign,
        ..RunOptions::default()
    };
    let fixture = run_all(Some("2"), &opts);
    let detected = fixture.len() == 1 && !fixture[0].pass;
    println!(
        "{} flipped Clifford sign fixture is {}",
        if detected { "PASS" } else { "FAIL" },
        if detected { "detected" } else { "not detected" }
    );
    ok &= detected;

    let ids = |f: &str| criteria().iter().filter(|c| c.matches(f)).map(|c| c.id).collect::<Vec<u8>>();
    let filters = ids("mehler") == [4, 5, 7] && ids("jlo-limit") == [9];
    if !filters {
        println!("FAIL tag filters select {:?} and {:?}", ids("mehler"), ids("jlo-limit"));
    }
    ok &= filters;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
