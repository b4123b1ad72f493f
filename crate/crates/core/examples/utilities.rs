//! Evaluate RSU and AV utilities, the prospect-theory value and the
//! probability weighting for a sampled scenario.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twin_contract::econ::{prob_weight, pt_value, rsu_utility, ContractItem, ContractMenu, PtParams};
use twin_contract::scenario::ScenarioConfig;

fn main() -> twin_contract::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scenario = ScenarioConfig::default().sample(&mut rng)?;
    let pt = PtParams::default();
    let item = ContractItem::new(40.0, 20.0, 30.0);
    let menu = ContractMenu::constant(scenario.dim(), item)?;

    let av = scenario.av_utilities(&menu)?;
    let grid = &scenario.grid;
    for m in 0..grid.rows() {
        for n in 0..grid.cols() {
            let v = rsu_utility(&item, grid.theta()[m], grid.sigma()[n])?;
            println!("type ({m},{n}): RSU {v:8.3}  AV {:8.3}  PT value {:8.3}", av[(m, n)], pt_value(av[(m, n)], &pt));
        }
    }
    println!("expected utility {:.4}", scenario.eut_expected(&menu)?);
    println!("prospect-theory expected utility {:.4}", scenario.pt_expected(&menu, &pt)?);
    for p in [0.1, 0.25, 0.5, 1.0] {
        println!("H({p}) = {:.4}", prob_weight(p, pt.weight_coeff)?);
    }
    Ok(())
}
