//! Item response curves in both parameterizations, and the 1.7 rescale.
//!
//! cargo run --example response_curves

use irtfa::{FaItem, IrtItem, Link, Rescale};

fn main() -> irtfa::Result<()> {
    // a very discriminating item with heavy guessing
    let irt = IrtItem::new(2.9137, -0.003, 0.7124, 0.9991)?;
    let fa = irt.to_fa()?;
    println!("IRT a={} b={}  ->  FA alpha={:.6} tau={:.6}", irt.a(), irt.b(), fa.alpha(), fa.tau());

    let normal = irt.rescale(Rescale::LogisticToNormal);
    println!("on the normal-ogive metric a={:.6}", normal.a());

    println!("{:>6} {:>10} {:>10} {:>10}", "theta", "irt", "fa", "normal");
    for k in -4..=4 {
        let theta = k as f64 * 0.5;
        println!(
            "{theta:6.1} {:10.6} {:10.6} {:10.6}",
            irt.response_prob(theta, Link::Logistic),
            fa.response_prob(theta, Link::Logistic),
            normal.response_prob(theta, Link::NormalOgive),
        );
    }

    let plain = FaItem::two_param(0.6, 0.2)?;
    let back = plain.to_irt()?.to_fa()?;
    println!("round trip alpha {} -> {}, tau {} -> {}", plain.alpha(), back.alpha(), plain.tau(), back.tau());
    Ok(())
}
