//! Taylor jets: derivatives of `exp(x) sin(y)` through order 4 at one point.

use emfront::{Jet, MultiIndex, Scalar};
use emfront::scalar::Elementary;

fn main() -> emfront::Result<()> {
    let vars = Jet::variables(&[0.3, 0.7], 4)?;
    let f = vars[0].apply(Elementary::Exp)?.mul(&vars[1].apply(Elementary::Sin)?);
    println!("f        = {:.12}", f.value());
    for alpha in [[1, 0], [0, 1], [2, 1], [1, 3], [4, 0]] {
        let d = f.derivative(&MultiIndex::new(&alpha)?)?;
        let exact = 0.3f64.exp()
            * match alpha[1] % 4 {
                0 => 0.7f64.sin(),
                1 => 0.7f64.cos(),
                2 => -0.7f64.sin(),
                _ => -0.7f64.cos(),
            };
        println!("d{alpha:?} f = {d:.12}  (closed form {exact:.12})");
    }
    println!("mixed x,y,y along chosen variables: {:.12}", f.derivative_along(&[0, 1, 1])?);
    Ok(())
}
