// Lambert W0, the D/M/1 root computed two ways, and golden-section search.
//
// Run with `cargo run --example lambert_fixed_point`.

use noma_aoii::numerics::{self, Interval, SolveSettings};
use noma_aoii::queueing;

pub fn run_example() -> noma_aoii::Result<()> {
    for x in [
        -0.367_879_441_171_442_3,
        -0.2,
        0.0,
        1.0,
        std::f64::consts::E,
        100.0,
    ] {
        let w = numerics::lambert_w0(x)?;
        println!(
            "W0({x:>10.6}) = {w:.12}   w e^w - x = {:+.2e}",
            w * w.exp() - x
        );
    }

    println!("\n  rho   eta (Lambert)     eta (iteration)   |diff|");
    for k in 1..=19 {
        let rho = 0.05 * k as f64;
        let lambert = queueing::eta_dm1(rho)?;
        let iterated = queueing::eta_dm1_fixed_point(rho)?;
        println!(
            "{rho:>6.2}  {lambert:.12}  {iterated:.12}  {:.1e}",
            (lambert - iterated).abs()
        );
    }

    let (x, fx) = numerics::minimize_1d(
        |x| (x - 2.0).powi(2) + 1.0,
        Interval::new(0.0, 5.0)?,
        SolveSettings::default(),
    )?;
    println!("\nmin of (x-2)^2 + 1 on [0, 5]: x = {x:.9}, f = {fx:.9}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> noma_aoii::Result<()> {
    run_example()
}
