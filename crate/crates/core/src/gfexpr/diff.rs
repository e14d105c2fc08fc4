//! Symbolic partial derivatives with light constant folding.

use super::ast::{Expr, Func, Var};

pub fn derivative(e: &Expr, v: Var) -> Expr {
    match e {
        Expr::Num(_) => num(0.0),
        Expr::Var(w) => num(if *w == v { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, v)),
        Expr::Add(a, b) => add(derivative(a, v), derivative(b, v)),
        Expr::Sub(a, b) => sub(derivative(a, v), derivative(b, v)),
        Expr::Mul(a, b) => add(
            mul(derivative(a, v), (**b).clone()),
            mul((**a).clone(), derivative(b, v)),
        ),
        Expr::Div(a, b) => {
            let da = derivative(a, v);
            let db = derivative(b, v);
            sub(
                div(da, (**b).clone()),
                div(mul((**a).clone(), db), pow((**b).clone(), num(2.0))),
            )
        }
        Expr::Pow(a, b) => {
            let da = derivative(a, v);
            if let (true, Ok(k)) = (b.is_constant(), b.eval_constant()) {
                if k == 0.0 {
                    return num(0.0);
                }
                return mul(mul(num(k), pow((**a).clone(), num(k - 1.0))), da);
            }
            // d(a^b) = a^b (b' log a + b a'/a)
            let db = derivative(b, v);
            let inner = add(
                mul(db, call(Func::Log, (**a).clone())),
                div(mul((**b).clone(), da), (**a).clone()),
            );
            mul(e.clone(), inner)
        }
        Expr::Call(f, a) => {
            let da = derivative(a, v);
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => div(num(1.0), (**a).clone()),
                Func::Sin => call(Func::Cos, (**a).clone()),
                Func::Cos => neg(call(Func::Sin, (**a).clone())),
                Func::Sqrt => div(num(0.5), e.clone()),
            };
            mul(outer, da)
        }
    }
}

fn num(c: f64) -> Expr {
    Expr::Num(c)
}

fn as_num(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(c) => Some(*c),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(c) => num(-c),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x + y),
        (Some(x), None) if x == 0.0 => b,
        (None, Some(y)) if y == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x - y),
        (Some(x), None) if x == 0.0 => neg(b),
        (None, Some(y)) if y == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) => num(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => num(0.0),
        (Some(x), None) if x == 1.0 => b,
        (None, Some(y)) if y == 1.0 => a,
        (Some(x), None) if x == -1.0 => neg(b),
        (None, Some(y)) if y == -1.0 => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (as_num(&a), as_num(&b)) {
        (Some(x), Some(y)) if y != 0.0 => num(x / y),
        (Some(x), None) if x == 0.0 => num(0.0),
        (None, Some(y)) if y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match as_num(&b) {
        Some(k) if k == 0.0 => num(1.0),
        Some(k) if k == 1.0 => a,
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfexpr::parser::parse_expr;

    fn at(e: &Expr, x1: f64, x2: f64) -> f64 {
        e.eval(&0.0, &|v| {
            Ok(match v {
                Var::X(1) => x1,
                _ => x2,
            })
        })
        .unwrap()
    }

    #[test]
    fn polynomial_rules() {
        let e = parse_expr("x1^3/3 - x2^2/2 + x1*x2").unwrap();
        let d1 = derivative(&e, Var::X(1));
        let d2 = derivative(&e, Var::X(2));
        assert_eq!(at(&d1, 2.0, 5.0), 4.0 + 5.0);
        assert_eq!(at(&d2, 2.0, 5.0), -5.0 + 2.0);
        assert_eq!(derivative(&parse_expr("7").unwrap(), Var::X(1)), Expr::Num(0.0));
    }

    #[test]
    fn transcendental_rules() {
        let e = parse_expr("exp(x1)*sin(x2) + log(x1) + sqrt(x1) + x1^x2 + cos(x1/x2)").unwrap();
        let d1 = derivative(&e, Var::X(1));
        let (a, b) = (1.3f64, 0.7f64);
        let expect = a.exp() * b.sin() + 1.0 / a + 0.5 / a.sqrt() + b * a.powf(b - 1.0) - (a / b).sin() / b;
        assert!((at(&d1, a, b) - expect).abs() < 1e-12);
        let d2 = derivative(&e, Var::X(2));
        let expect2 = a.exp() * b.cos() + a.powf(b) * a.ln() + (a / b).sin() * a / (b * b);
        assert!((at(&d2, a, b) - expect2).abs() < 1e-12);
    }
}
