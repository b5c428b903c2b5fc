use super::{BinOp, Constant, Expr, Func};
use crate::error::{Error, Result};

/// Parse `text` into an expression; errors carry a byte offset.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: String) -> Error {
        Error::Parse { offset: self.pos, message }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("malformed number".into()));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.error("malformed exponent".into()));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Expr::Num).map_err(|e| Error::Parse { offset: start, message: e.to_string() })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let unknown = || Error::Parse { offset: start, message: format!("unknown identifier `{name}`") };
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.error(format!("`{name}` takes one argument in parentheses")));
            }
            let arg = self.expr()?;
            if self.peek() == Some(b',') {
                return Err(self.error(format!("`{name}` takes exactly one argument")));
            }
            if !self.eat(b')') {
                return Err(self.error("expected `)`".into()));
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let atom = match name {
            "pi" => Expr::Const(Constant::Pi),
            "e" => Expr::Const(Constant::E),
            _ => match name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                Some(i) if i >= 1 && !name[1..].starts_with('0') => Expr::Coord(i - 1),
                _ => return Err(unknown()),
            },
        };
        if self.peek() == Some(b'(') {
            return Err(self.error(format!("`{name}` is not a function")));
        }
        Ok(atom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn offset(src: &str) -> usize {
        match parse(src) {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("{src}: {other:?}"),
        }
    }

    #[test]
    fn error_offsets() {
        assert_eq!(offset("1 +"), 3);
        assert_eq!(offset("1 + * 2"), 4);
        assert_eq!(offset("(1 + 2"), 6);
        assert_eq!(offset("foo + 1"), 0);
        assert_eq!(offset("2 * y1"), 4);
        assert_eq!(offset("x0"), 0);
        assert_eq!(offset("sin(1, 2)"), 5);
        assert_eq!(offset("sin x1"), 4);
        assert_eq!(offset("x1(2)"), 2);
        assert_eq!(offset("1 2"), 2);
        assert_eq!(offset("1e+"), 1);
        assert_eq!(offset(""), 0);
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse(" x1 *\t( 2+x2 ) ").unwrap(), parse("x1*(2+x2)").unwrap());
    }
}
