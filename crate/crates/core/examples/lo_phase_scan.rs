// Homodyne noise versus LO phase for the single-squeezer circuit.

use cvchip::netlist::{evaluate, preset_fig1a, validate};
use cvchip::opo::EfficiencyChain;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let net = preset_fig1a(0.1, &EfficiencyChain::reference());
    let res = evaluate(&net, &validate(&net)?)?;
    let scan = res.lo_scan("hd", 24)?;
    for r in &scan.records {
        let bar = "#".repeat(((r.db + 6.0) * 2.0).max(0.0) as usize);
        println!("{:>6.1}° {:>8.3} dB {bar}", r.lo_phase.to_degrees(), r.db);
    }
    let h = res.homodyne("hd").expect("declared");
    println!("exact extremes: {:.4} / {:.4} dB", h.db_min, h.db_max);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
