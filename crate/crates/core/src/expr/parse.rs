use super::ast::{BinOp, Expr, Func};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at column {}: {message}", position + 1)]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at column {}", position + 1)]
    UnknownIdentifier { position: usize, name: String },
    #[error("variable u{index} at column {} is out of range (arity {arity})", position + 1)]
    VariableOutOfRange {
        position: usize,
        index: usize,
        arity: usize,
    },
}

impl ParseError {
    /// Zero-based byte offset of the offending token.
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. }
            | ParseError::VariableOutOfRange { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let done = t.0 == Tok::End;
            out.push(t);
            if done {
                return Ok(out);
            }
        }
    }

    fn syntax(&self, position: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if !c.is_ascii() {
            return Err(self.syntax(start, "non-ASCII character"));
        }
        let tok = match c {
            b'0'..=b'9' | b'.' => return self.number(start),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok((Tok::Ident(name.to_string()), start));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => return Err(self.syntax(start, format!("unexpected character `{}`", c as char))),
        };
        self.pos += 1;
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let digits = |lx: &mut Lexer| {
            let s = lx.pos;
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(self.syntax(start, "malformed number"));
        }
        // An exponent is only consumed when digits follow, so `2*e` still lexes.
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text
            .parse()
            .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.syntax(start, format!("number `{text}` overflows")));
        }
        Ok((Tok::Num(value), start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    arity: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position: self.pos(),
            message: message.into(),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::unary(Func::Neg, self.unary()?));
        }
        self.power()
    }

    // power := primary ('^' unary)?   -- right associative, binds tighter than unary minus
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, position) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, position),
            Tok::End => Err(ParseError::Syntax {
                position,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                position,
                message: format!("unexpected token {}", describe(&other)),
            }),
        }
    }

    fn identifier(&mut self, name: String, position: usize) -> Result<Expr, ParseError> {
        if let Some(func) = Func::from_name(&name) {
            if *self.peek() != Tok::LParen {
                return Err(self.syntax(format!("expected `(` after `{name}`")));
            }
            self.bump();
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(Expr::unary(func, arg));
        }
        match name.as_str() {
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            "e" => return Ok(Expr::Const(std::f64::consts::E)),
            _ => {}
        }
        if let Some(digits) = name.strip_prefix('u') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.arity {
                    return Err(ParseError::VariableOutOfRange {
                        position,
                        index,
                        arity: self.arity,
                    });
                }
                return Ok(Expr::Var(index - 1));
            }
        }
        Err(ParseError::UnknownIdentifier { position, name })
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            other => {
                let msg = format!("expected `)`, found {}", describe(other));
                Err(self.syntax(msg))
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses `text` as an expression in the chart variables `u1..u{arity}`.
///
/// Precedence from tightest: `^` (right associative), unary `-`, `* /`, `+ -`.
/// Recognized functions are `sin cos tan atan exp log sqrt`; `pi` and `e` are
/// constants.
pub fn parse(text: &str, arity: usize) -> Result<Expr, ParseError> {
    if arity == 0 {
        return Err(ParseError::Syntax {
            position: 0,
            message: "arity must be at least 1".into(),
        });
    }
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        arity,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        let msg = format!("unexpected trailing {}", describe(p.peek()));
        return Err(p.syntax(msg));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Expr {
        Expr::Var(i)
    }

    #[test]
    fn single_function_call() {
        assert_eq!(parse("cos(u1)", 2).unwrap(), Expr::unary(Func::Cos, v(0)));
    }

    #[test]
    fn precedence_of_power_and_product() {
        let want = Expr::binary(
            BinOp::Add,
            Expr::binary(BinOp::Pow, v(0), Expr::Const(2.0)),
            Expr::binary(BinOp::Mul, Expr::Const(3.0), v(1)),
        );
        assert_eq!(parse("u1^2 + 3*u2", 2).unwrap(), want);
    }

    #[test]
    fn variable_out_of_range() {
        let err = parse("u3", 2).unwrap_err();
        assert!(matches!(
            err,
            ParseError::VariableOutOfRange { index: 3, arity: 2, position: 0 }
        ));
        assert!(matches!(parse("u0", 2), Err(ParseError::VariableOutOfRange { .. })));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let want = Expr::unary(Func::Neg, Expr::binary(BinOp::Pow, v(0), Expr::Const(2.0)));
        assert_eq!(parse("-u1^2", 1).unwrap(), want);
    }

    #[test]
    fn power_is_right_associative() {
        let want = Expr::binary(
            BinOp::Pow,
            Expr::Const(2.0),
            Expr::binary(BinOp::Pow, Expr::Const(3.0), Expr::Const(2.0)),
        );
        assert_eq!(parse("2^3^2", 1).unwrap(), want);
        let neg_exp = Expr::binary(
            BinOp::Pow,
            v(0),
            Expr::unary(Func::Neg, Expr::Const(1.0)),
        );
        assert_eq!(parse("u1^-1", 1).unwrap(), neg_exp);
    }

    #[test]
    fn subtraction_and_division_are_left_associative() {
        let want = Expr::binary(
            BinOp::Sub,
            Expr::binary(BinOp::Sub, v(0), v(1)),
            Expr::Const(1.0),
        );
        assert_eq!(parse("u1 - u2 - 1", 2).unwrap(), want);
        let div = Expr::binary(
            BinOp::Div,
            Expr::binary(BinOp::Div, v(0), Expr::Const(2.0)),
            Expr::Const(4.0),
        );
        assert_eq!(parse("u1/2/4", 1).unwrap(), div);
    }

    #[test]
    fn numbers_and_constants() {
        assert_eq!(parse("1.5e-3", 1).unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse(".5", 1).unwrap(), Expr::Const(0.5));
        assert_eq!(
            parse("2*e", 1).unwrap(),
            Expr::binary(BinOp::Mul, Expr::Const(2.0), Expr::Const(std::f64::consts::E))
        );
        assert_eq!(parse("pi", 1).unwrap(), Expr::Const(std::f64::consts::PI));
    }

    #[test]
    fn error_positions() {
        assert_eq!(parse("u1 + foo", 1).unwrap_err().position(), 5);
        assert!(matches!(
            parse("u1 + foo", 1),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert_eq!(parse("sin(u1", 1).unwrap_err().position(), 6);
        assert_eq!(parse("u1 $ 2", 1).unwrap_err().position(), 3);
        assert_eq!(parse("", 1).unwrap_err().position(), 0);
        assert!(parse("sin u1", 1).is_err());
        assert!(parse("1e999", 1).is_err());
        assert!(parse("u1 u1", 1).is_err());
        assert!(parse("ü", 1).is_err());
    }

    #[test]
    fn print_then_reparse_is_identity() {
        for text in [
            "u1^2 + 3*u2",
            "-u1^2/(1 + exp(u2)) - tan(atan(u1))",
            "sqrt(log(2 + u1*u1))^-1.25",
            "1e-20 * pi - 2^3^2",
        ] {
            let e = parse(text, 2).unwrap();
            let again = parse(&e.to_string(), 2).unwrap();
            assert_eq!(e, again, "{text}");
        }
    }
}
