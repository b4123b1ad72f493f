//! Complete rewards for a monotone resource grid and check the menu with the
//! full and reduced constraint checkers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twin_contract::econ::ContractMenu;
use twin_contract::feasibility::{check_full, check_reduced, minimal_reward_oracle, optimal_rewards};
use twin_contract::sampling::{monotone_grid, random_type_grid};

fn main() -> twin_contract::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = random_type_grid(&mut rng, (2, 2), (10.0, 200.0), (10.0, 200.0))?;
    let b = monotone_grid(&mut rng, (2, 2), 20.0);
    let f = monotone_grid(&mut rng, (2, 2), 10.0);
    println!("theta {:?} sigma {:?}", grid.theta(), grid.sigma());
    println!("bandwidth\n{b}\nfrequency\n{f}");

    let recurrence = optimal_rewards(&b, &f, &grid)?;
    let menu = ContractMenu::from_grids(&b, &f, &recurrence)?;
    let full = check_full(&menu, &grid)?;
    println!("recurrence rewards\n{recurrence}");
    println!("full check: {} violations; reduced check feasible: {}", full.violation_count(), check_reduced(&menu, &grid)?.feasible());

    match minimal_reward_oracle(&b, &f, &grid) {
        Ok(o) => println!("minimal feasible rewards\n{}", o.rewards),
        Err(e) => println!("no reward vector makes this grid feasible: {e}"),
    }
    print!("{}", full.to_csv());
    Ok(())
}
