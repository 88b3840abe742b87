// Squeezing and antisqueezing versus pump power from the closed-form model.

use cvchip::opo::{predict, EfficiencyChain, OpoParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let chain = EfficiencyChain::reference();
    println!("{:>8} {:>8} {:>10} {:>10}", "P (mW)", "x", "sq (dB)", "asq (dB)");
    for p_mw in (0..=170).step_by(10) {
        let p = predict(&OpoParams::reference(p_mw as f64 / 1e3), &chain)?;
        println!("{p_mw:>8} {:>8.4} {:>10.4} {:>10.4}", p.x, p.db_minus, p.db_plus);
    }

    let lossless = EfficiencyChain {
        eta_coupling: 1.0,
        ..chain
    };
    let p = predict(&OpoParams::reference(0.1), &lossless)?;
    println!("at 100 mW with perfect coupling: {:.3} dB", p.db_minus);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
