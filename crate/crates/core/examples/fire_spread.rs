//! Stochastic fire growth on the default map, plus a Monte Carlo check of the
//! per-cell ignition probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_evac::fire::{ignition_probability, FireState};
use uav_evac::world::{load_map, DEFAULT_MAP};

fn main() -> anyhow::Result<()> {
    let map = load_map(DEFAULT_MAP)?;
    let origin = map.fire_origins()[0];
    let mut fire = FireState::seed(&map, &[origin], 0.05)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    println!("fire from {origin}, p_fire = {}", fire.p_fire());
    for t in 1..=60 {
        let ignited = fire.step(&mut rng);
        if t % 10 == 0 {
            println!(
                "t={t:>2} burning={:>3} (+{} this step)",
                fire.burning_count(),
                ignited.len()
            );
        }
    }

    let mut rows = map.render_rows();
    for c in fire.burning_cells() {
        rows[c.y as usize].replace_range(c.x as usize..c.x as usize + 1, "*");
    }
    println!("{}", rows.join("\n"));

    // A cell with k burning neighbours gets k independent chances.
    let draws = 100_000;
    for k in 1..=4u32 {
        let hits = (0..draws)
            .filter(|_| (0..k).any(|_| rng.random::<f64>() < 0.05))
            .count();
        println!(
            "k={k}: empirical {:.4}  closed form {:.4}",
            hits as f64 / draws as f64,
            ignition_probability(k, 0.05)
        );
    }
    Ok(())
}
