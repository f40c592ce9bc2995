//! Recursive-descent parser and evaluator for univariate formulas.
//!
//! Grammar: reals, the variable `x`, `+ - * / ^`, unary minus, parentheses,
//! functions `sin cos exp ln abs`, constants `pi` and `e`. `^` binds tighter
//! than unary minus and associates to the right.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
}

#[derive(Debug, Clone)]
pub enum Ast {
    Const(f64),
    Var,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Call(Func2, Box<Ast>),
}

// Func is private; re-wrap for the public enum variant.
#[derive(Debug, Clone, Copy)]
pub struct Func2(Func);

impl Ast {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Ast::Const(c) => *c,
            Ast::Var => x,
            Ast::Neg(a) => -a.eval(x),
            Ast::Add(a, b) => a.eval(x) + b.eval(x),
            Ast::Sub(a, b) => a.eval(x) - b.eval(x),
            Ast::Mul(a, b) => a.eval(x) * b.eval(x),
            Ast::Div(a, b) => a.eval(x) / b.eval(x),
            Ast::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Ast::Call(Func2(f), a) => {
                let v = a.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Token)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                // exponent part like 1e-3
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap();
                let value = text.parse::<f64>().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("invalid number literal `{text}`"),
                })?;
                self.pos = end;
                return Ok(Some((start, Token::Number(value))));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
                self.pos = end;
                return Ok(Some((start, Token::Ident(text))));
            }
            other => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((start, tok)))
    }
}

pub struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    pub fn parse(src: &str) -> Result<Ast> {
        let mut lexer = Lexer::new(src);
        let mut tokens = Vec::new();
        while let Some(t) = lexer.next()? {
            tokens.push(t);
        }
        let mut p = Parser {
            tokens,
            cursor: 0,
            end: src.len(),
        };
        let ast = p.expr()?;
        if let Some((off, tok)) = p.peek_full() {
            return Err(Error::Parse {
                offset: off,
                message: format!("unexpected trailing token {tok:?}"),
            });
        }
        Ok(ast)
    }

    fn peek_full(&self) -> Option<(usize, Token)> {
        self.tokens.get(self.cursor).cloned()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map(|(o, _)| *o)
            .unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek() {
            let op = op.clone();
            match op {
                Token::Plus => {
                    self.bump();
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek() {
            let op = op.clone();
            match op {
                Token::Star => {
                    self.bump();
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.bump();
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            // right-associative; exponent may carry a unary minus
            let exp = self.unary()?;
            return Ok(Ast::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast> {
        let off = self.offset();
        match self.bump() {
            Some((_, Token::Number(v))) => Ok(Ast::Const(v)),
            Some((_, Token::LParen)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((_, Token::RParen)) => Ok(inner),
                    _ => Err(Error::Parse {
                        offset: self.offset(),
                        message: "expected `)`".into(),
                    }),
                }
            }
            Some((ioff, Token::Ident(name))) => match name.as_str() {
                "x" => Ok(Ast::Var),
                "pi" => Ok(Ast::Const(std::f64::consts::PI)),
                "e" => Ok(Ast::Const(std::f64::consts::E)),
                "sin" | "cos" | "exp" | "ln" | "abs" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "ln" => Func::Ln,
                        _ => Func::Abs,
                    };
                    match self.bump() {
                        Some((_, Token::LParen)) => {
                            let arg = self.expr()?;
                            match self.bump() {
                                Some((_, Token::RParen)) => {
                                    Ok(Ast::Call(Func2(f), Box::new(arg)))
                                }
                                _ => Err(Error::Parse {
                                    offset: self.offset(),
                                    message: format!("expected `)` after argument of {name}"),
                                }),
                            }
                        }
                        _ => Err(Error::Parse {
                            offset: ioff,
                            message: format!("function {name} requires parentheses"),
                        }),
                    }
                }
                other => Err(Error::Parse {
                    offset: ioff,
                    message: format!("unknown identifier `{other}`"),
                }),
            },
            Some((ioff, tok)) => Err(Error::Parse {
                offset: ioff,
                message: format!("unexpected token {tok:?}"),
            }),
            None => Err(Error::Parse {
                offset: off,
                message: "unexpected end of input".into(),
            }),
        }
    }
}
