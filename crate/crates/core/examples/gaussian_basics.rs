// Build a two-mode squeezed state by hand and inspect it.

use std::f64::consts::FRAC_PI_2;

use cvchip::gaussian::GaussianState;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let r = 0.5;
    let state = GaussianState::product(&[
        GaussianState::squeezed_mode(r, 0.0)?,
        GaussianState::squeezed_mode(r, FRAC_PI_2)?,
    ])?
    .beam_splitter(0, 1, 0.5)?;

    println!("covariance:{:.4}", state.cov());
    println!("symplectic eigenvalues: {:?}", state.symplectic_eigenvalues());

    let arm = state.reduce(&[0])?;
    for deg in [0.0f64, 45.0, 90.0] {
        let v = arm.quadrature_variance(0, deg.to_radians())?;
        println!("arm 1 variance at {deg:>4}°: {v:.6}");
    }

    let lossy = state.loss_channel(0, 0.8)?;
    println!("after 20% loss on arm 1: {:?}", lossy.symplectic_eigenvalues());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
