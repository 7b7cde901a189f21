use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{BinOp, Constant, Expr, Func, Node};
use crate::error::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(u8),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(usize, Token), ExprError> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((start, Token::End));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                // exponent only when followed by digits, so `2e` stays an error
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut k = end + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = &self.src[start..end];
                let value = text.parse::<f64>().map_err(|_| ExprError::Parse {
                    offset: start,
                    message: alloc::format!("malformed number `{text}`"),
                })?;
                self.pos = end;
                Token::Num(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                self.pos = end;
                Token::Ident(self.src[start..end].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Token::Op(c)
            }
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            b',' => {
                self.pos += 1;
                Token::Comma
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Parse {
                    offset: start,
                    message: alloc::format!("unexpected character `{ch}`"),
                });
            }
        };
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Token),
    allowed: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(usize, Token), ExprError> {
        let next = self.lexer.next()?;
        Ok(core::mem::replace(&mut self.peeked, next))
    }

    fn error<T>(&self, offset: usize, message: &str) -> Result<T, ExprError> {
        Err(ExprError::Parse {
            offset,
            message: message.to_string(),
        })
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peeked.1 {
                Token::Op(b'+') => BinOp::Add,
                Token::Op(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peeked.1 {
                Token::Op(b'*') => BinOp::Mul,
                Token::Op(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peeked.1 {
            Token::Op(b'-') => {
                self.advance()?;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Token::Op(b'+') => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.peeked.1 == Token::Op(b'^') {
            self.advance()?;
            let exponent = self.exponent()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Node, ExprError> {
        match self.peeked.1 {
            Token::Op(b'-') => {
                self.advance()?;
                Ok(Node::Neg(Box::new(self.exponent()?)))
            }
            Token::Op(b'+') => {
                self.advance()?;
                self.exponent()
            }
            _ => self.power(),
        }
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let (offset, tok) = self.advance()?;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::LParen => {
                let inner = self.expr()?;
                match self.advance()? {
                    (_, Token::RParen) => Ok(inner),
                    (at, _) => self.error(at, "expected `)`"),
                }
            }
            Token::Ident(name) => self.identifier(offset, name),
            Token::End => self.error(offset, "unexpected end of input"),
            _ => self.error(offset, "expected a number, name or `(`"),
        }
    }

    fn identifier(&mut self, offset: usize, name: String) -> Result<Node, ExprError> {
        if let Some(index) = self.allowed.iter().position(|v| *v == name) {
            return Ok(Node::Var(index));
        }
        if let Some(func) = Func::from_name(&name) {
            if self.peeked.1 != Token::LParen {
                return self.error(self.peeked.0, "expected `(` after function name");
            }
            self.advance()?;
            let mut args: Vec<Node> = Vec::new();
            if self.peeked.1 != Token::RParen {
                args.push(self.expr()?);
                while self.peeked.1 == Token::Comma {
                    self.advance()?;
                    args.push(self.expr()?);
                }
            }
            match self.advance()? {
                (_, Token::RParen) => {}
                (at, _) => return self.error(at, "expected `)`"),
            }
            if args.len() != 1 {
                return Err(ExprError::Arity {
                    name,
                    offset,
                    expected: 1,
                    found: args.len(),
                });
            }
            return Ok(Node::Call(func, Box::new(args.pop().unwrap())));
        }
        match name.as_str() {
            "pi" => Ok(Node::Const(Constant::Pi)),
            "e" => Ok(Node::Const(Constant::E)),
            _ => Err(ExprError::UnknownIdentifier { name, offset }),
        }
    }
}

/// Parses `text` into an expression over `allowed_vars`.
pub fn parse_expr(text: &str, allowed_vars: &[&str]) -> Result<Expr, ExprError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let first = lexer.next()?;
    if first.1 == Token::End {
        return Err(ExprError::Parse {
            offset: 0,
            message: "empty expression".to_string(),
        });
    }
    let mut parser = Parser {
        lexer,
        peeked: first,
        allowed: allowed_vars,
    };
    let root = parser.expr()?;
    if parser.peeked.1 != Token::End {
        return parser.error(parser.peeked.0, "unexpected trailing input");
    }
    Ok(Expr {
        vars: allowed_vars.iter().map(|v| v.to_string()).collect(),
        root,
    })
}
