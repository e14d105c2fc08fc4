//! Normal forms of the dual potential at a cuspidal edge and an A3 point.

use emfront::normalform::round_trip;
use emfront::{extract_normal_form, Branch, ChartWindow, GeneratingFunction, Tolerances};

fn main() -> emfront::Result<()> {
    let tols = Tolerances::default();
    let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 41)?;

    let a2 = GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1])?;
    let (nf, _) = extract_normal_form(&a2, &w, &tols)?;
    for p in [[0.25, 0.0], [1.0, 0.5]] {
        let plus = nf.reconstruct(&p, Branch::Plus)?;
        let minus = nf.reconstruct(&p, Branch::Minus)?;
        let exact = 2.0 / 3.0 * p[0].powf(1.5);
        println!("A2 at p = {p:?}: z' = {plus:.9} / {minus:.9}  (±{exact:.9} + {:.9})", p[1] * p[1] / 2.0);
    }
    println!("A2 below the fold: {}", nf.reconstruct(&[-0.1, 0.0], Branch::Plus).unwrap_err());
    println!(
        "A2 dphi/dy1 at base: {:.9} closed form, {:.9} finite difference",
        nf.dphi_dy1_at_base, nf.dphi_dy1_finite_difference
    );
    println!("A2 round trip: {:?}", round_trip(&nf, &a2, &w)?);

    let a3 = GeneratingFunction::parse("x1^4/4 - p2^2/2", 2, &[1])?;
    let (nf, _) = extract_normal_form(&a3, &w, &tols)?;
    for p in [[1.0, 0.0], [-0.5, 0.3]] {
        let z = nf.reconstruct(&p, Branch::Plus)?;
        let exact = 0.75 * p[0].abs().powf(4.0 / 3.0) + p[1] * p[1] / 2.0;
        println!("A3 at p = {p:?}: z' = {z:.9}  (exact {exact:.9})");
    }
    println!("A3 round trip: {:?}", round_trip(&nf, &a3, &w)?);

    let sw = GeneratingFunction::parse("x1^4/4 + p2*x1^2/2", 2, &[1])?;
    println!("swallowtail: {}", extract_normal_form(&sw, &w, &tols).unwrap_err());
    Ok(())
}
