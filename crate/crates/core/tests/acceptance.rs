//! Runs every acceptance criterion once, in order, and prints one line per
//! criterion. Exits non-zero if any criterion fails or overruns its budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dbal::harness::verify::{self, CriterionReport};
use dbal::{EdgeSample, Point, SplitStats};

/// Wall-clock budget per criterion, `None` where none is imposed.
const BUDGETS: &[(&str, Option<u64>)] = &[
    (verify::COORDINATE, Some(10)),
    (verify::PSI, Some(60)),
    (verify::SPLIT_IMPLICATIONS, Some(60)),
    (verify::AVERAGE_SPLIT, Some(300)),
    (verify::SELECT, Some(300)),
    (verify::TERMINATION, Some(120)),
    (verify::ROUND_BOUND, None),
    (verify::SAMPLER, None),
    (verify::END_TO_END, Some(600)),
];

// Cross edges leak into the plus side.
fn leaky_split_stats(e: &EdgeSample, x: &Point) -> SplitStats {
    let honest = verify::honest_split_stats(e, x);
    SplitStats {
        psi_plus: honest.psi_total - honest.psi_minus,
        ..honest
    }
}

fn check(r: &CriterionReport, budget: Option<u64>) -> bool {
    let within = budget.is_none_or(|s| r.elapsed <= Duration::from_secs(s));
    let note = match (budget, within) {
        (Some(s), true) => format!(" (budget {s}s)"),
        (Some(s), false) => format!(" (OVER budget {s}s)"),
        (None, _) => String::new(),
    };
    println!("{r}{note}");
    r.passed && within
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut ok = true;
    for &(name, budget) in BUDGETS {
        let reports = verify::run_verification_suite(|n| n == name);
        assert_eq!(reports.len(), 1, "{name} not in suite");
        ok &= check(&reports[0], budget);
    }

    // The unbiasedness check must notice a corrupted statistic.
    let t = Instant::now();
    let mutant = verify::psi_unbiasedness(5, 50, 2_000, verify::PSI_SEED, leaky_split_stats);
    let caught = !mutant.passed;
    println!(
        "[{}] psi_mutation_detected: leaky statistic {} | required: rejected | {:.1}s",
        if caught { "PASS" } else { "FAIL" },
        if caught { "rejected" } else { "accepted" },
        t.elapsed().as_secs_f64()
    );
    ok &= caught;

    println!("acceptance total {:.1}s", start.elapsed().as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
