// Entanglement of the two-source network, ideal and with the default
// losses.

use cvchip::measurement::sum_diff_noise_db;
use cvchip::netlist::{evaluate, validate, Fig1bConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (label, cfg) in [
        ("ideal r=0.5", Fig1bConfig::ideal(0.5)),
        ("default losses", Fig1bConfig::default()),
    ] {
        let net = cfg.build();
        let res = evaluate(&net, &validate(&net)?)?;
        let j = &res.correlations[0];
        let c = j.correlation;
        println!(
            "{label:>15}: delta^2 = {:.4} (x diff {:.2} dB, p sum {:.2} dB) -> {}",
            c.delta_sq,
            sum_diff_noise_db(c.term_x)?,
            sum_diff_noise_db(c.term_p)?,
            j.inseparability.verdict
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
