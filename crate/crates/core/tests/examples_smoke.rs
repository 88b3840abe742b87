mod gaussian_basics_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gaussian_basics.rs"));
}

#[test]
fn gaussian_basics_runs() {
    gaussian_basics_example::run_example().expect("gaussian_basics example should run");
}

mod squeezing_curve_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/squeezing_curve.rs"));
}

#[test]
fn squeezing_curve_runs() {
    squeezing_curve_example::run_example().expect("squeezing_curve example should run");
}

mod epr_entanglement_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/epr_entanglement.rs"));
}

#[test]
fn epr_entanglement_runs() {
    epr_entanglement_example::run_example().expect("epr_entanglement example should run");
}

mod netlist_roundtrip_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/netlist_roundtrip.rs"));
}

#[test]
fn netlist_roundtrip_runs() {
    netlist_roundtrip_example::run_example().expect("netlist_roundtrip example should run");
}

mod lo_phase_scan_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/lo_phase_scan.rs"));
}

#[test]
fn lo_phase_scan_runs() {
    lo_phase_scan_example::run_example().expect("lo_phase_scan example should run");
}

mod theta12_sweep_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/theta12_sweep.rs"));
}

#[test]
fn theta12_sweep_runs() {
    theta12_sweep_example::run_example().expect("theta12_sweep example should run");
}

mod calibrate_epr_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/calibrate_epr.rs"));
}

#[test]
fn calibrate_epr_runs() {
    calibrate_epr_example::run_example().expect("calibrate_epr example should run");
}
