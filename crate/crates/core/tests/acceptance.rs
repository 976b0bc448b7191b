//! Runs every acceptance criterion at the default desk-scale settings and
//! prints one line per criterion. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use pts_core::verify::{run_criterion, VerifyConfig, CRITERIA};

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut failed = 0;
    println!("\nrunning {} acceptance criteria", CRITERIA.len());
    for (id, title) in CRITERIA {
        let start = Instant::now();
        match run_criterion(id, &cfg) {
            Ok(report) => {
                if !report.pass() {
                    failed += 1;
                }
                println!("{} ({:.1}s)", report.summary_line(), start.elapsed().as_secs_f64());
                for c in report.checks.iter().filter(|c| !c.pass) {
                    println!("    {} = {:e} exceeds {:e}", c.check_id, c.value, c.threshold);
                }
            }
            Err(e) => {
                failed += 1;
                println!("criterion {id:02} FAIL {title} [error: {e}]");
            }
        }
    }
    println!(
        "\nacceptance: {} passed, {failed} failed\n",
        CRITERIA.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
