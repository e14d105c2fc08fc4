//! The canonical divergence, its derivative functionals, and the
//! randomized identity suite.

use emfront::geometry::{criterion_t3, metric};
use emfront::identities::{run_identity_suite, IdentityOptions};
use emfront::{canonical_divergence, divergence_functional, ChartWindow, GeneratingFunction, Tolerances};

fn main() -> emfront::Result<()> {
    let g = GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1])?;
    let o = [0.0, 0.0];
    println!("D((0,0), (1,0)) = {:.12}", canonical_divergence(&g, &o, &[1.0, 0.0])?);
    let (x, y) = ([0.3, -0.8], [1.0, 0.4]);
    let q = [0.2, 0.1];
    println!(
        "h(X, Y) = {:.12}, -D[X|Y] = {:.12}",
        metric(&g, &q, &x, &y)?,
        -divergence_functional(&g, &q, &[&x], &[&y])?
    );
    let k = [1.0, 0.0];
    println!(
        "T3 = {:.12}, -1/2 D[X|XX] = {:.12}",
        criterion_t3(&g, &o, &k)?,
        -0.5 * divergence_functional(&g, &o, &[&k], &[&k, &k])?
    );

    let w3 = ChartWindow::cube(&[0.0; 3], 1.0, 9)?;
    for (src, n, i, w) in [
        ("x1^3/3 - p2^2/2", 2, vec![1], ChartWindow::cube(&o, 1.0, 21)?),
        ("x1^3/3 + x1*x2^2 - p3^2/2 + x2^3/5", 3, vec![1, 2], w3.clone()),
        ("sin(x1)*exp(p2/2) + log(2 + x1^2) - p2^2/2", 2, vec![1], ChartWindow::cube(&o, 1.0, 21)?),
    ] {
        let g = GeneratingFunction::parse(src, n, &i)?;
        let r = run_identity_suite(&g, &w, &Tolerances::default(), 100, 1, IdentityOptions::default())?;
        println!("{src}: max residual {:.2e} (threshold {:.0e}, pass {})", r.residuals.max(), r.threshold, r.pass);
    }
    Ok(())
}
