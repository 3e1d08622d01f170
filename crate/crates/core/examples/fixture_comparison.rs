//! Runs the desk-scale fixture: every comparison arm over ten paired seeds,
//! then the balanced vs. long-tailed contrast.
//!
//! cargo run --release -p imwa-core --example fixture_comparison

use std::time::Instant;

use imwa_core::harness::{ablate_gamma, arm_table, fixture, run_plan, summarize_arms};

fn main() -> imwa_core::Result<()> {
    let mut plan = fixture::plan();
    plan.parallel_runs = true;

    let started = Instant::now();
    let results = run_plan(&plan)?;
    println!("{}", arm_table(&summarize_arms(&plan.arms, &results)));
    println!("({:.1}s)\n", started.elapsed().as_secs_f64());

    let started = Instant::now();
    let gamma = ablate_gamma(&plan, &[1.0, 10.0])?;
    println!("{}", gamma.to_table());
    println!("({:.1}s)", started.elapsed().as_secs_f64());
    Ok(())
}
