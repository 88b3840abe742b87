// Parse, validate, edit and re-serialize a netlist.

use cvchip::netlist::{parse_netlist, validate};

const TEXT: &str = "\
# squeezer through a tunable splitter
source sq opo pump_mw=80 threshold_mw=179 t_oc=0.113 l0=0.00254 bliira_per_w=0.00922 fwhm_mhz=11.8 sideband_mhz=1.5
source lo coherent power_mw=3.5
source v vacuum
bs tap in=sq,v mzi_phase_deg=20
homodyne hd signal=tap.0 lo=lo lo_phase_deg=scan
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut net = parse_netlist(TEXT)?;
    let checked = validate(&net)?;
    println!("order: {:?}", checked.order);
    for w in &checked.warnings {
        println!("warning: {w}");
    }

    net.set_param("elements.tap.mzi_phase_deg", "40")?;
    let canonical = net.serialize();
    print!("{canonical}");
    assert_eq!(parse_netlist(&canonical)?, net);

    match parse_netlist("source a vacuum\nbs b in=a,a ratio=0.5") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
