// Relative phase between the two squeezers versus arm noise and
// correlation.

use cvchip::netlist::{linspace, sweep, Fig1bConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = Fig1bConfig::default().build();
    let rows = sweep(&net, "elements.theta12.phase_deg", &linspace(0.0, 90.0, 10))?;
    println!("{:>6} {:>16} {:>16} {:>9}", "θ12", "hd1 min/max", "hd2 min/max", "delta^2");
    for r in rows {
        let (a, b) = (&r.homodynes[0], &r.homodynes[1]);
        println!(
            "{:>6.1} {:>7.2}/{:>7.2}  {:>7.2}/{:>7.2}  {:>8.4}",
            r.value,
            a.db_min,
            a.db_max,
            b.db_min,
            b.db_max,
            r.correlations[0].correlation.delta_sq
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
