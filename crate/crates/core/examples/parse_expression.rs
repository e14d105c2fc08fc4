//! Parsing generating functions, their symbolic gradients, and errors.

use emfront::GeneratingFunction;

fn main() {
    for (src, n, i) in [
        ("x1^3/3 - p2^2/2", 2, vec![1]),
        ("x1^4/4 + p2*x1^2/2", 2, vec![1]),
        ("-2^2 + sin(x1)*exp(p2/2) + log(2 + x1^2)", 2, vec![1]),
        ("x1*x2 - p3^2", 3, vec![1, 2]),
    ] {
        let g = GeneratingFunction::parse(src, n, &i).expect("valid source");
        println!("g = {g}");
        for (v, d) in g.partition().chart_vars().iter().zip(g.gradient_exprs()) {
            println!("  dg/d{v} = {d}");
        }
        println!("  g(0.5, ..) = {}", g.eval_real(&vec![0.5; n]).expect("in domain"));
    }
    for bad in ["x1^^2", "x1 + p1", "sin(x1", "x1 $ 2"] {
        println!("{bad:>10}: {}", GeneratingFunction::parse(bad, 2, &[1]).unwrap_err());
    }
}
