//! Text syntax for builtin maps.
//!
//! ```text
//! identity | antipodal | reflect(i) | translate(v1,...) | rotate(theta[,i,j])
//! scale(k) | shear(k) | linear(a11,a12,...) | radial(a,b)
//! fold{spec} | perturb(eps,seed){spec} | compose{spec;spec;...}
//! (e1, ..., en)            expression map, see `expr`
//! ```
//!
//! `compose{a;b}` applies `a` first. `translate` pads missing trailing
//! components with zeros.

use super::expr::{self, ParseError, ParseErrorKind};
use super::{MapError, MapSpec, RadialProfile};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

fn parse_number(tok: &str, pos: usize) -> Result<f64, MapError> {
    tok.parse().map_err(|_| err(ParseErrorKind::Syntax, pos, format!("bad number `{tok}`")))
}

fn err(kind: ParseErrorKind, pos: usize, msg: impl Into<String>) -> MapError {
    MapError::Parse(ParseError { kind, line: 1, column: pos + 1, message: msg.into() })
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), MapError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(ParseErrorKind::Syntax, self.pos, format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str), MapError> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(err(ParseErrorKind::Syntax, start, "expected a map name or `(`"));
        }
        self.pos += len;
        Ok((start, &self.src[start..start + len]))
    }

    /// Comma-separated numbers up to the closing `)`.
    /// Raw comma-separated tokens of a parenthesized list, with positions.
    fn token_list(&mut self) -> Result<Vec<(String, usize)>, MapError> {
        self.expect('(')?;
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            self.skip_ws();
            let start = self.pos;
            let len = self
                .rest()
                .find(|c: char| matches!(c, ',' | ')') || c.is_whitespace())
                .unwrap_or(self.rest().len());
            out.push((self.src[start..start + len].replace('\u{2212}', "-"), start));
            self.pos += len;
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn number_list(&mut self) -> Result<Vec<f64>, MapError> {
        self.token_list()?.iter().map(|(tok, pos)| parse_number(tok, *pos)).collect()
    }

    /// Raw text of a balanced `( ... )` group, parentheses included.
    fn paren_group(&mut self) -> Result<&'a str, MapError> {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0usize;
        for (i, c) in self.rest().char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos = start + i + 1;
                        return Ok(&self.src[start..self.pos]);
                    }
                }
                _ => {}
            }
        }
        Err(err(ParseErrorKind::Syntax, self.src.len(), "unbalanced `(`"))
    }
}

fn int_arg(v: f64, pos: usize, what: &str) -> Result<usize, MapError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(err(ParseErrorKind::Syntax, pos, format!("{what} must be a nonnegative integer")))
    }
}

fn arity(got: usize, want: &str, name: &str, pos: usize) -> MapError {
    err(ParseErrorKind::Arity, pos, format!("`{name}` takes {want} argument(s), got {got}"))
}

fn spec(cur: &mut Cursor, dim: usize) -> Result<MapSpec, MapError> {
    cur.skip_ws();
    if cur.rest().starts_with('(') {
        let start = cur.pos;
        let text = cur.paren_group()?;
        let ast = expr::parse(text).map_err(|mut e| {
            if e.line == 1 {
                e.column += start;
            }
            MapError::Parse(e)
        })?;
        return MapSpec::expression(ast, dim);
    }
    let (pos, name) = cur.ident()?;
    let m = match name {
        "identity" => MapSpec::identity(dim),
        "antipodal" => MapSpec::antipodal(dim),
        "reflect" => {
            let a = cur.number_list()?;
            if a.len() != 1 {
                return Err(arity(a.len(), "1", name, pos));
            }
            MapSpec::reflection(dim, int_arg(a[0], pos, "axis")?)?
        }
        "translate" => {
            let mut v = cur.number_list()?;
            if v.is_empty() || v.len() > dim {
                return Err(arity(v.len(), &format!("1..={dim}"), name, pos));
            }
            v.resize(dim, 0.0);
            MapSpec::translation(v)
        }
        "rotate" => {
            let a = cur.number_list()?;
            match a.len() {
                1 => MapSpec::rotation(dim, a[0], 0, 1)?,
                3 => MapSpec::rotation(
                    dim,
                    a[0],
                    int_arg(a[1], pos, "axis")?,
                    int_arg(a[2], pos, "axis")?,
                )?,
                n => return Err(arity(n, "1 or 3", name, pos)),
            }
        }
        "scale" => {
            let a = cur.number_list()?;
            if a.len() != 1 {
                return Err(arity(a.len(), "1", name, pos));
            }
            MapSpec::scaling(dim, a[0])
        }
        "shear" => {
            let a = cur.number_list()?;
            if a.len() != 1 {
                return Err(arity(a.len(), "1", name, pos));
            }
            MapSpec::shear(dim, a[0])?
        }
        "linear" => {
            let a = cur.number_list()?;
            if a.len() != dim * dim {
                return Err(arity(a.len(), &(dim * dim).to_string(), name, pos));
            }
            MapSpec::linear(dim, a)?
        }
        "radial" => {
            let a = cur.number_list()?;
            if a.len() != 2 {
                return Err(arity(a.len(), "2", name, pos));
            }
            MapSpec::radial(dim, RadialProfile { scale: a[0], offset: a[1] })
        }
        "fold" => {
            cur.expect('{')?;
            let inner = spec(cur, dim)?;
            cur.expect('}')?;
            super::fold_to_full_space(inner)?
        }
        "perturb" => {
            let a = cur.token_list()?;
            if a.len() != 2 {
                return Err(arity(a.len(), "2", name, pos));
            }
            let eps = parse_number(&a[0].0, a[0].1)?;
            // Seeds use all 64 bits, so they never pass through f64.
            let seed: u64 = a[1].0.parse().map_err(|_| {
                err(ParseErrorKind::Syntax, a[1].1, format!("seed must be a nonnegative integer, got `{}`", a[1].0))
            })?;
            cur.expect('{')?;
            let inner = spec(cur, dim)?;
            cur.expect('}')?;
            MapSpec::perturbation(inner, eps, seed)?
        }
        "compose" => {
            cur.expect('{')?;
            let mut parts = vec![spec(cur, dim)?];
            while cur.eat(';') {
                parts.push(spec(cur, dim)?);
            }
            cur.expect('}')?;
            MapSpec::composition(parts)?
        }
        other => {
            return Err(err(
                ParseErrorKind::UnknownIdentifier,
                pos,
                format!("unknown map `{other}`"),
            ))
        }
    };
    Ok(m)
}

/// Parses builtin or expression syntax into an endomap of `R^dim`.
pub fn parse_map(text: &str, dim: usize) -> Result<MapSpec, MapError> {
    if dim == 0 {
        return Err(MapError::InvalidSpec("dimension must be at least 1".into()));
    }
    let mut cur = Cursor { src: text, pos: 0 };
    let m = spec(&mut cur, dim)?;
    cur.skip_ws();
    if !cur.rest().is_empty() {
        return Err(err(ParseErrorKind::Syntax, cur.pos, "trailing input"));
    }
    Ok(m)
}

/// Dimension implied by the text alone, when it has one: the arity of an
/// expression map or the length of a translation vector.
pub fn implied_dim(text: &str) -> Option<usize> {
    let t = text.trim();
    if t.starts_with('(') {
        return expr::parse(t).ok().map(|a| a.arity());
    }
    if let Some(rest) = t.strip_prefix("fold{") {
        return implied_dim(rest.strip_suffix('}')?);
    }
    if let Some(rest) = t.strip_prefix("perturb(") {
        let (_, body) = rest.split_once('{')?;
        return implied_dim(body.strip_suffix('}')?);
    }
    if let Some(inner) = t.strip_prefix("compose{") {
        return inner.trim_end_matches('}').split(';').find_map(implied_dim);
    }
    if let Some(args) = t.strip_prefix("translate(") {
        return Some(args.trim_end_matches(')').split(',').count());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str, dim: usize, p: &[f64]) -> Vec<f64> {
        parse_map(text, dim).unwrap().evaluate(p).unwrap()
    }

    #[test]
    fn builtins() {
        assert_eq!(eval("identity", 2, &[1.0, 2.0]), vec![1.0, 2.0]);
        assert_eq!(eval("antipodal", 3, &[1.0, -2.0, 3.0]), vec![-1.0, 2.0, -3.0]);
        assert_eq!(eval("reflect(0)", 2, &[3.0, 5.0]), vec![-3.0, 5.0]);
        assert_eq!(eval("translate(1)", 2, &[2.0, 5.0]), vec![3.0, 5.0]);
        assert_eq!(eval("scale(2)", 2, &[2.0, -5.0]), vec![4.0, -10.0]);
        assert_eq!(eval("shear(1)", 2, &[2.0, 5.0]), vec![7.0, 5.0]);
        assert_eq!(eval("linear(0,1,1,0)", 2, &[2.0, 5.0]), vec![5.0, 2.0]);
        assert_eq!(eval(" fold{ translate(1) } ", 2, &[2.0, -5.0]), vec![3.0, 5.0]);
        assert_eq!(eval("compose{translate(1,0); antipodal}", 2, &[2.0, 5.0]), vec![-3.0, -5.0]);
        assert_eq!(eval("(x1+1, abs(x2))", 2, &[0.0, -4.0]), vec![1.0, 4.0]);
        let r = eval("rotate(1.5707963267948966)", 2, &[1.0, 0.0]);
        assert!(r[0].abs() < 1e-15 && (r[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_map("reflect(2)", 2), Err(MapError::InvalidSpec(_))));
        assert!(matches!(
            parse_map("bogus", 2),
            Err(MapError::Parse(ParseError { kind: ParseErrorKind::UnknownIdentifier, .. }))
        ));
        assert!(matches!(
            parse_map("translate(1,2,3)", 2),
            Err(MapError::Parse(ParseError { kind: ParseErrorKind::Arity, .. }))
        ));
        assert!(matches!(parse_map("(x1, x2, x3)", 2), Err(MapError::DimensionMismatch { .. })));
        assert!(matches!(parse_map("fold{antipodal}", 2), Err(MapError::DomainViolation { .. })));
        let e = parse_map("compose{identity, antipodal}", 2).unwrap_err();
        assert!(matches!(e, MapError::Parse(ParseError { column: 17, .. })), "{e:?}");
        assert!(parse_map("identity extra", 2).is_err());
    }

    #[test]
    fn expression_errors_are_shifted_to_input_columns() {
        let e = parse_map("perturb(1,2){(x1 +)}", 1).unwrap_err();
        let MapError::Parse(pe) = e else { panic!() };
        assert_eq!(pe.column, 19);
    }

    #[test]
    fn implied_dimensions() {
        assert_eq!(implied_dim("translate(1,0)"), Some(2));
        assert_eq!(implied_dim("(x1, x2, x3)"), Some(3));
        assert_eq!(implied_dim("fold{(x1+1, abs(x2)+1)}"), Some(2));
        assert_eq!(implied_dim("perturb(1,3){translate(1,0,0)}"), Some(3));
        assert_eq!(implied_dim("compose{identity;(x1,x2)}"), Some(2));
        assert_eq!(implied_dim("antipodal"), None);
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "identity",
            "antipodal",
            "reflect(1)",
            "translate(1,-2)",
            "rotate(0.5,0,1)",
            "scale(3)",
            "shear(2)",
            "linear(1,2,3,4)",
            "radial(2,1)",
            "fold{translate(1,0)}",
            "perturb(0.5,7){antipodal}",
            "compose{reflect(0);(x1+x2, abs(x2))}",
        ] {
            let m = parse_map(text, 2).unwrap();
            let again = parse_map(&m.to_string(), 2).unwrap();
            assert_eq!(m, again, "{text} -> {m}");
        }
    }
}
