use super::ast::{Expr, Func, Var};
use super::lexer::{tokenize, Token, TokenKind};
use crate::error::{Error, Result};

const ATOM_START: &str = "number, variable, function call or `(`";

/// Parses `source` into an AST. Variable names are checked for shape
/// (`x<k>` / `p<k>`, `k ≥ 1`) but not against any partition.
pub fn parse_expr(source: &str) -> Result<Expr> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Error {
        let t = self.peek();
        Error::Parse {
            position: t.position,
            expected: expected.to_string(),
            found: t.kind.describe(),
        }
    }

    fn expect_end(&self) -> Result<()> {
        if self.peek().kind == TokenKind::End {
            Ok(())
        } else {
            Err(self.error("operator or end of input"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                TokenKind::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().kind == TokenKind::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek().kind == TokenKind::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().kind.clone() {
            TokenKind::Num(c) => {
                self.bump();
                Ok(Expr::Num(c))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.expr()?;
                if self.peek().kind != TokenKind::RParen {
                    return Err(self.error("`)`"));
                }
                self.bump();
                Ok(e)
            }
            TokenKind::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.bump();
                    if self.peek().kind != TokenKind::LParen {
                        return Err(self.error("`(` after function name"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if self.peek().kind != TokenKind::RParen {
                        return Err(self.error("`)`"));
                    }
                    self.bump();
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match variable(&name) {
                    Some(v) => {
                        self.bump();
                        Ok(Expr::Var(v))
                    }
                    None => Err(self.error("variable x1..xn / p1..pn or one of exp, log, sin, cos, sqrt")),
                }
            }
            _ => Err(self.error(ATOM_START)),
        }
    }
}

fn variable(name: &str) -> Option<Var> {
    let (head, digits) = name.split_at(1);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    if k == 0 {
        return None;
    }
    match head {
        "x" => Some(Var::X(k)),
        "p" => Some(Var::P(k)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn show(s: &str) -> String {
        parse_expr(s).unwrap().to_string()
    }

    #[test]
    fn precedence() {
        assert_eq!(show("-x1^2"), "-x1^2");
        assert!(matches!(parse_expr("-x1^2").unwrap(), Expr::Neg(_)));
        assert!(matches!(parse_expr("x1^2^3").unwrap(), Expr::Pow(_, ref e) if matches!(**e, Expr::Pow(..))));
        assert_eq!(show("(x1 + x2)*x3"), "(x1 + x2)*x3");
        assert_eq!(show("x1 - (x2 - x3)"), "x1 - (x2 - x3)");
        assert_eq!(show("x1/(x2*x3)"), "x1/(x2*x3)");
        assert_eq!(show("2^-x1"), "2^-x1");
        assert_eq!(show("(-x1)^2"), "(-x1)^2");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("x1 + * 2") {
            Err(Error::Parse { position, found, .. }) => {
                assert_eq!(position, 5);
                assert_eq!(found, "`*`");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("(x1"), Err(Error::Parse { position: 3, .. })));
        assert!(matches!(parse_expr("exp x1"), Err(Error::Parse { position: 4, .. })));
        assert!(matches!(parse_expr("y1"), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_expr("x0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("x1 x2"), Err(Error::Parse { position: 3, .. })));
        assert!(matches!(parse_expr(""), Err(Error::Parse { position: 0, .. })));
    }
}
