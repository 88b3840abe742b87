// Fit the two arm efficiencies to the measured joint-quadrature levels.

use cvchip::calibrate::{calibrate_epr, REFERENCE_TERM_P_DB, REFERENCE_TERM_X_DB};
use cvchip::netlist::Fig1bConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cal = calibrate_epr(&Fig1bConfig::default(), REFERENCE_TERM_X_DB, REFERENCE_TERM_P_DB)?;
    let [a1, a2] = cal.config.arm_eta;
    println!("arm efficiencies: {a1:.4}, {a2:.4} ({} rounds)", cal.rounds);
    println!("x diff {:.3} dB, p sum {:.3} dB", cal.term_x_db, cal.term_p_db);
    println!(
        "delta^2 = {:.4}, {}",
        cal.joint.correlation.delta_sq, cal.joint.inseparability.verdict
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
