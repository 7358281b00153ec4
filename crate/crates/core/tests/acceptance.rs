//! Runs every acceptance criterion at its pinned seed and scale and prints
//! one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Duration;

use treegrade::selftest::{run_suite, SelftestConfig};

struct Criterion {
    label: &'static str,
    suite: &'static str,
    budget: Option<Duration>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        label: "essential-loop decision agrees with the oracle (200 graphs x 50 loops)",
        suite: "essential_loops",
        budget: Some(Duration::from_secs(60)),
    },
    Criterion {
        label: "quotient distances equal the chain pseudometric (all Q, all pairs)",
        suite: "quotient_metric",
        budget: Some(Duration::from_secs(120)),
    },
    Criterion {
        label: "parameterization is a tree whose fibers are the pieces",
        suite: "parameterization",
        budget: None,
    },
    Criterion {
        label: "retractions are idempotent, fix Y, collapse complements, non-expansive",
        suite: "retraction",
        budget: None,
    },
    Criterion {
        label: "piece cycle ranks sum to the graph cycle rank",
        suite: "rank_identity",
        budget: None,
    },
    Criterion {
        label: "filtration words cohere under bonding maps and track the witness",
        suite: "phi_coherence",
        budget: None,
    },
    Criterion {
        label: "radius-12 cover balls: lifts close iff inessential, lifted metric exact",
        suite: "covers",
        budget: None,
    },
    Criterion {
        label: "constructed grade-preserving maps keep sampled essential loops essential",
        suite: "injectivity_maps",
        budget: None,
    },
    Criterion {
        label: "wedge-arc double cover has rank 3 and a single piece",
        suite: "wedge_arc",
        budget: None,
    },
];

fn main() -> ExitCode {
    let cfg = SelftestConfig::default();
    println!("acceptance: seed {}", cfg.seed);
    let mut failed = 0;
    for (i, c) in CRITERIA.iter().enumerate() {
        let r = run_suite(c.suite, &cfg).expect("criterion suite exists");
        let elapsed = Duration::from_millis(r.millis as u64);
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let ok = r.passed && in_budget;
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{}] {} ({} cases, {} failures, {:.2}s{})",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.label,
            r.cases,
            r.failure_count,
            elapsed.as_secs_f64(),
            c.budget.map_or(String::new(), |b| format!(" of {}s budget", b.as_secs())),
        );
        for f in &r.failures {
            println!("    {f}");
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
