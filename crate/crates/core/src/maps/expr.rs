//! The map-expression language.
//!
//! ```text
//! map    := "(" expr { "," expr } ")"
//! expr   := term { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := number | var | func "(" expr { "," expr } ")" | "(" expr ")" | "-" factor
//! var    := "x" digit+        (x1 .. xn, one-based)
//! func   := "abs" | "min" | "max" | "sqrt" | "floor"
//! ```
//!
//! The Unicode minus sign is accepted wherever `-` is.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier,
    Arity,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?} error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation error in output coordinate {component}: {message}")]
pub struct EvalError {
    /// Zero-based output coordinate.
    pub component: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Min,
    Max,
    Sqrt,
    Floor,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "sqrt" => Func::Sqrt,
            "floor" => Func::Floor,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Sqrt => "sqrt",
            Func::Floor => "floor",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Func::Abs | Func::Sqrt | Func::Floor => n == 1,
            Func::Min | Func::Max => n >= 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) => e.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
        }
    }

    fn eval(&self, x: &[f64]) -> Result<f64, String> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err("division by zero".into());
                        }
                        a / b
                    }
                }
            }
            Expr::Call(f, args) => {
                let vals = args.iter().map(|a| a.eval(x)).collect::<Result<Vec<_>, _>>()?;
                match f {
                    Func::Abs => vals[0].abs(),
                    Func::Floor => vals[0].floor(),
                    Func::Sqrt => {
                        if vals[0] < 0.0 {
                            return Err(format!("sqrt of negative value {}", vals[0]));
                        }
                        vals[0].sqrt()
                    }
                    Func::Min => vals.into_iter().fold(f64::INFINITY, f64::min),
                    Func::Max => vals.into_iter().fold(f64::NEG_INFINITY, f64::max),
                }
            }
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a}{s}{b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// One expression per output coordinate over `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub outputs: Vec<Expr>,
}

impl ExprAst {
    pub fn arity(&self) -> usize {
        self.outputs.len()
    }

    /// Number of input variables referenced (highest index used).
    pub fn inputs_used(&self) -> usize {
        self.outputs.iter().filter_map(Expr::max_var).max().map_or(0, |m| m + 1)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.outputs
            .iter()
            .enumerate()
            .map(|(component, e)| e.eval(x).map_err(|message| EvalError { component, message }))
            .collect()
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.outputs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax, line, column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' | '\u{2212}' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, line: l0, column: c0 });
            i += 1;
            column += 1;
        } else if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
        } else if c.is_whitespace() {
            i += 1;
            column += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| syntax(l0, c0, format!("malformed number `{s}`")))?;
            out.push(Token { tok: Tok::Num(v), line: l0, column: c0 });
            column += i - start;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(s), line: l0, column: c0 });
            column += i - start;
        } else {
            return Err(syntax(l0, c0, format!("unexpected character `{c}`")));
        }
    }
    // End of input is reported at the last token, the one left dangling.
    let (line, column) = out.last().map_or((1, 1), |t| (t.line, t.column));
    out.push(Token { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            Err(self.unexpected(&t, what))
        }
    }

    fn unexpected(&self, t: &Token, what: &str) -> ParseError {
        let msg = match &t.tok {
            Tok::Eof => format!("unexpected end of input, expected {what}"),
            other => format!("unexpected {other:?}, expected {what}"),
        };
        syntax(t.line, t.column, msg)
    }

    fn map(&mut self) -> Result<ExprAst, ParseError> {
        self.expect(Tok::LParen, "`(` opening the map")?;
        let mut outputs = vec![self.expr()?];
        loop {
            let t = self.next();
            match t.tok {
                Tok::Comma => outputs.push(self.expr()?),
                Tok::RParen => break,
                _ => return Err(self.unexpected(&t, "`,` or `)`")),
            }
        }
        let t = self.next();
        if t.tok != Tok::Eof {
            return Err(self.unexpected(&t, "end of input"));
        }
        Ok(ExprAst { outputs })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.factor()?))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(ref name) => {
                if let Some(idx) = var_index(name) {
                    return Ok(Expr::Var(idx));
                }
                let Some(func) = Func::from_name(name) else {
                    return Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier,
                        line: t.line,
                        column: t.column,
                        message: format!("unknown identifier `{name}`"),
                    });
                };
                self.expect(Tok::LParen, "`(` after function name")?;
                let mut args = vec![self.expr()?];
                loop {
                    let s = self.next();
                    match s.tok {
                        Tok::Comma => args.push(self.expr()?),
                        Tok::RParen => break,
                        _ => return Err(self.unexpected(&s, "`,` or `)`")),
                    }
                }
                if !func.arity_ok(args.len()) {
                    return Err(ParseError {
                        kind: ParseErrorKind::Arity,
                        line: t.line,
                        column: t.column,
                        message: format!("`{name}` does not take {} argument(s)", args.len()),
                    });
                }
                Ok(Expr::Call(func, args))
            }
            _ => Err(self.unexpected(&t, "an operand")),
        }
    }
}

/// `x7` -> `Some(6)`; `x0`, `x`, `y1` -> `None`.
fn var_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    k.checked_sub(1)
}

/// Parses `"(e1, ..., em)"`. The variable set is checked against the output
/// arity: an endomap of `R^m` may only use `x1..xm`.
pub fn parse(text: &str) -> Result<ExprAst, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let ast = p.map()?;
    if ast.inputs_used() > ast.arity() {
        return Err(ParseError {
            kind: ParseErrorKind::Arity,
            line: 1,
            column: 1,
            message: format!(
                "uses x{} but the map has {} output coordinate(s)",
                ast.inputs_used(),
                ast.arity()
            ),
        });
    }
    Ok(ast)
}
