//! Builds a small strip by hand, lists its enabled events and fires a few.

use couette::kmc::{self, Simulator};
use couette::lattice::{Configuration, Params};
use couette::rng;

fn main() -> couette::Result<()> {
    let text = "1 6\n..V0V.\n0V..0V\nVV00..\n";
    let config: Configuration = text.parse()?;
    let params = Params::new(1, 6).with_rates(1.0, 2.0, 0.5, 0.1);
    println!("{config}");
    println!("particles: {}", config.total_particles());

    for (event, rate) in kmc::enabled_events(&config, &params) {
        println!("{event:?} at rate {rate}");
    }
    println!("total rate: {}", kmc::total_rate(&config, &params));

    let mut sim = Simulator::new(config, params)?;
    let mut rng = rng::stream(3, 0);
    for _ in 0..5 {
        let (event, dt) = sim.step(&mut rng)?;
        println!("t = {:.4} (+{dt:.4}): {event:?}", sim.time());
    }
    println!("{}", sim.config());
    println!("particles: {}", sim.config().total_particles());
    Ok(())
}
