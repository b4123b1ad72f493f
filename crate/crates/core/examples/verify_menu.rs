//! Solve a menu, write it as CSV, read it back and verify it, then run the
//! built-in property suites.

use twin_contract::harness::{cmd_solve, cmd_verify, ExperimentConfig, RunOptions};

fn main() -> twin_contract::Result<()> {
    let mut config = ExperimentConfig::default();
    config.search.grid_points = 5;
    let out = std::env::temp_dir().join("twin-contract-verify");
    let opts = RunOptions::new(config, Some(1), None, Some(out.clone()))?;

    let solved = cmd_solve(&opts)?;
    println!("solved objective {:.4}", solved.result.objective);
    let summary = cmd_verify(&opts, Some(&out.join("solve_menu.csv")))?;
    for s in &summary.suites {
        println!("{:<32} {} cases {}", s.name, s.cases, if s.passed() { "ok" } else { "FAILED" });
    }
    if let Some(r) = &summary.menu_report {
        println!("menu violations: {}", r.violation_count());
    }
    println!("failures: {:?}", summary.failures());
    Ok(())
}
