//! Optimise a menu on the search lattice, refine it and print the per-type
//! breakdown.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twin_contract::econ::PtParams;
use twin_contract::feasibility::check_full;
use twin_contract::scenario::ScenarioConfig;
use twin_contract::solver::{refine_local, solve_grid, SearchSpec};

fn main() -> twin_contract::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scenario = ScenarioConfig::default().sample(&mut rng)?;
    let pt = PtParams::default();
    let spec = SearchSpec { grid_points: 7, refine_iters: 50, ..Default::default() };
    println!("scoring {} candidates", spec.candidate_count(scenario.dim()));

    let coarse = solve_grid(&spec, &scenario, &pt)?;
    let refined = refine_local(&coarse, &spec, &scenario, &pt)?;
    println!("lattice objective {:.4}, refined {:.4}", coarse.objective, refined.objective);
    print!("{}", refined.to_csv());
    println!("constraint violations: {}", check_full(&refined.menu, &scenario.grid)?.violation_count());
    Ok(())
}
