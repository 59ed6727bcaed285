//! Canonical text form for [`ScalarFunc`], used in config files.
//!
//! Grammar:
//!
//! ```text
//!     func   := base ('^' number)?
//!     base   := 'pow' '(' 't' ',' number ')'          single power t^k
//!             | 'msum' '(' term ('+' term)* ')'        monomial sum
//!             | 'exp' '(' number '*' 't' ')'           exponential
//!     term   := number '*' 't' '^' number              c * t^k
//!     number := f64 literal (sign, decimals, exponent)
//! ```
//!
//! Examples: `pow(t, 0.5)`, `msum(1*t^0.5 + 2*t^1)`, `exp(1.0*t)`,
//! `msum(1*t^0 + 1*t^1)^2.0`. Errors carry the byte offset of the offending
//! character.

use crate::scalar::{ScalarError, ScalarFunc};
use std::fmt;

/// Parse failure with position information (byte offset into the input).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

struct Cursor<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(input: &'a str) -> Self {
        Cursor { input, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.input.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { position: self.pos, message: message.into() }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let mut len = 0;
        let bytes = rest.as_bytes();
        if len < bytes.len() && (bytes[len] == b'+' || bytes[len] == b'-') {
            len += 1;
        }
        let digits_start = len;
        while len < bytes.len() && (bytes[len].is_ascii_digit() || bytes[len] == b'.') {
            len += 1;
        }
        if len == digits_start {
            return Err(self.error("expected a number"));
        }
        if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            let mut exp_len = len + 1;
            if exp_len < bytes.len() && (bytes[exp_len] == b'+' || bytes[exp_len] == b'-') {
                exp_len += 1;
            }
            let exp_digits = exp_len;
            while exp_len < bytes.len() && bytes[exp_len].is_ascii_digit() {
                exp_len += 1;
            }
            if exp_len > exp_digits {
                len = exp_len;
            }
        }
        match rest[..len].parse::<f64>() {
            Ok(v) => {
                self.pos += len;
                Ok(v)
            }
            Err(_) => Err(self.error(format!("invalid number `{}`", &rest[..len]))),
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.input.len()
    }
}

/// Parses the canonical text form into a [`ScalarFunc`].
pub fn parse_scalar(input: &str) -> Result<ScalarFunc, ParseError> {
    let mut cur = Cursor::new(input);
    let func = parse_base(&mut cur)?;
    let func = if cur.peek() == Some('^') {
        cur.expect("^")?;
        let e_pos = cur.pos;
        let e = cur.number()?;
        raise_to(func, e).map_err(|err| ParseError {
            position: e_pos,
            message: err.to_string(),
        })?
    } else {
        func
    };
    if !cur.at_end() {
        return Err(cur.error("trailing input"));
    }
    Ok(func)
}

fn parse_base(cur: &mut Cursor) -> Result<ScalarFunc, ParseError> {
    cur.skip_ws();
    let start = cur.pos;
    if cur.rest().starts_with("pow") {
        cur.pos += 3;
        cur.expect("(")?;
        cur.expect("t")?;
        cur.expect(",")?;
        let k = cur.number()?;
        cur.expect(")")?;
        ScalarFunc::monomial_sum(vec![(1.0, k)])
            .map_err(|e| ParseError { position: start, message: e.to_string() })
    } else if cur.rest().starts_with("msum") {
        cur.pos += 4;
        cur.expect("(")?;
        let mut terms = Vec::new();
        loop {
            let c = cur.number()?;
            cur.expect("*")?;
            cur.expect("t")?;
            cur.expect("^")?;
            let k = cur.number()?;
            terms.push((c, k));
            match cur.peek() {
                Some('+') => {
                    cur.expect("+")?;
                }
                Some(')') => {
                    cur.expect(")")?;
                    break;
                }
                _ => return Err(cur.error("expected `+` or `)` in msum")),
            }
        }
        ScalarFunc::monomial_sum(terms)
            .map_err(|e| ParseError { position: start, message: e.to_string() })
    } else if cur.rest().starts_with("exp") {
        cur.pos += 3;
        cur.expect("(")?;
        let beta = cur.number()?;
        cur.expect("*")?;
        cur.expect("t")?;
        cur.expect(")")?;
        ScalarFunc::exponential(beta)
            .map_err(|e| ParseError { position: start, message: e.to_string() })
    } else {
        Err(cur.error("expected `pow(`, `msum(` or `exp(`"))
    }
}

fn raise_to(func: ScalarFunc, e: f64) -> Result<ScalarFunc, ScalarError> {
    match func {
        ScalarFunc::MonomialSum(m) => {
            let terms = m.terms().iter().map(|t| (t.coeff, t.exponent)).collect();
            ScalarFunc::power_of_monomial_sum(terms, e)
        }
        ScalarFunc::Exponential { .. } | ScalarFunc::PowerOfMonomialSum { .. } => {
            Err(ScalarError::UnsupportedVariant { op: "postfix `^`", variant: "non-msum base" })
        }
    }
}

/// Renders a [`ScalarFunc`] back into the canonical text form.
pub fn format_scalar(f: &ScalarFunc) -> String {
    match f {
        ScalarFunc::MonomialSum(m) => {
            if m.terms().len() == 1 && m.terms()[0].coeff == 1.0 {
                format!("pow(t, {})", m.terms()[0].exponent)
            } else {
                let body: Vec<String> =
                    m.terms().iter().map(|t| format!("{}*t^{}", t.coeff, t.exponent)).collect();
                format!("msum({})", body.join(" + "))
            }
        }
        ScalarFunc::Exponential { rate } => format!("exp({rate}*t)"),
        ScalarFunc::PowerOfMonomialSum { base, exponent } => {
            let body: Vec<String> =
                base.terms().iter().map(|t| format!("{}*t^{}", t.coeff, t.exponent)).collect();
            format!("msum({})^{}", body.join(" + "), exponent)
        }
    }
}
