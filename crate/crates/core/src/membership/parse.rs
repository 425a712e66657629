//! Envelope literal syntax.
//!
//! ```text
//! envelope := item ('+' item)*
//! item     := 'zero' | 'identity'
//!           | 'term(' [field (',' field)*] ')'
//!           | 'diag:' factor ('*' factor)*
//!           | 'patch(' int ',' int ')=' number
//! field    := 'c=' q | 'min^' q | 'max^' q | 'rho=' q | 'band=' int
//!           | 'region=' region | region
//! region   := 'full' | 'upper' | 'lower' | 'band(' int ')'
//! factor   := q | 'j' | 'j^' q | q '^-j' | q '^j'
//! ```
//!
//! Unspecified term fields default to `c=1, min^0, max^0, rho=1, full`.

use num::traits::{One, Zero};

use super::envelope::{parse_q, EnvelopeError, EnvelopeMatrix, EnvelopeTerm, Region, Q};

fn err(msg: impl Into<String>) -> EnvelopeError {
    EnvelopeError::Parse(msg.into())
}

/// Splits on `sep` outside parentheses.
fn split_top(s: &str, sep: char) -> Result<Vec<&str>, EnvelopeError> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (pos, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(err("unbalanced `)`"));
                }
            }
            c if c == sep && depth == 0 => {
                parts.push(&s[start..pos]);
                start = pos + ch.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(err("unbalanced `(`"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

pub fn parse_envelope(s: &str) -> Result<EnvelopeMatrix, EnvelopeError> {
    let mut env = EnvelopeMatrix::default();
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err("empty envelope"));
    }
    for item in split_top(&compact, '+')? {
        parse_item(item, &mut env)?;
    }
    env.validate()?;
    Ok(env)
}

fn parse_item(item: &str, env: &mut EnvelopeMatrix) -> Result<(), EnvelopeError> {
    if item.is_empty() {
        return Err(err("empty item"));
    }
    if item == "zero" {
        return Ok(());
    }
    if item == "identity" {
        env.terms.extend(EnvelopeMatrix::identity().terms);
        return Ok(());
    }
    if let Some(body) = item.strip_prefix("term(").and_then(|r| r.strip_suffix(')')) {
        env.terms.push(parse_term(body)?);
        return Ok(());
    }
    if let Some(body) = item.strip_prefix("diag:") {
        env.terms.push(parse_diag(body)?);
        return Ok(());
    }
    if let Some(rest) = item.strip_prefix("patch(") {
        let (idx, value) = rest
            .split_once(")=")
            .ok_or_else(|| err(format!("expected `patch(i,j)=v`, got `{item}`")))?;
        let (i, j) = idx
            .split_once(',')
            .ok_or_else(|| err(format!("expected two patch indices in `{item}`")))?;
        let i: usize = i.parse().map_err(|_| err(format!("bad patch row `{i}`")))?;
        let j: usize = j.parse().map_err(|_| err(format!("bad patch column `{j}`")))?;
        let v = parse_q(value).map_err(err)?;
        let taken = std::mem::take(env);
        *env = taken.with_patch(i, j, v)?;
        return Ok(());
    }
    Err(err(format!("unknown item `{item}`")))
}

fn parse_region(s: &str) -> Result<Region, EnvelopeError> {
    match s {
        "full" => Ok(Region::Full),
        "upper" => Ok(Region::Upper),
        "lower" => Ok(Region::Lower),
        _ => {
            let w = s
                .strip_prefix("band(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err(format!("unknown region `{s}`")))?;
            w.parse()
                .map(Region::Band)
                .map_err(|_| err(format!("bad band width `{w}`")))
        }
    }
}

fn parse_term(body: &str) -> Result<EnvelopeTerm, EnvelopeError> {
    let mut c = Q::one();
    let mut gamma = Q::zero();
    let mut delta = Q::zero();
    let mut rho = Q::one();
    let mut region = Region::Full;
    if !body.is_empty() {
        for field in split_top(body, ',')? {
            let num = |v: &str| parse_q(v).map_err(err);
            if let Some(v) = field.strip_prefix("c=") {
                c = num(v)?;
            } else if let Some(v) = field.strip_prefix("min^") {
                gamma = num(v)?;
            } else if let Some(v) = field.strip_prefix("max^") {
                delta = num(v)?;
            } else if let Some(v) = field.strip_prefix("rho=") {
                rho = num(v)?;
            } else if let Some(v) = field.strip_prefix("band=") {
                region = Region::Band(v.parse().map_err(|_| err(format!("bad band width `{v}`")))?);
            } else if let Some(v) = field.strip_prefix("region=") {
                region = parse_region(v)?;
            } else {
                region = parse_region(field)?;
            }
        }
    }
    EnvelopeTerm::new(c, gamma, delta, rho, region)
}

fn parse_diag(body: &str) -> Result<EnvelopeTerm, EnvelopeError> {
    let mut c = Q::one();
    let mut exponent = Q::zero();
    let mut rho = Q::one();
    for factor in split_top(body, '*')? {
        if factor == "j" {
            exponent += Q::one();
        } else if let Some(e) = factor.strip_prefix("j^") {
            exponent += parse_q(e).map_err(err)?;
        } else if let Some(base) = factor.strip_suffix("^-j") {
            let b = parse_q(base).map_err(err)?;
            if b.is_zero() {
                return Err(err("zero base in decay factor"));
            }
            rho *= b.recip();
        } else if let Some(base) = factor.strip_suffix("^j") {
            rho *= parse_q(base).map_err(err)?;
        } else {
            c *= parse_q(factor).map_err(err)?;
        }
    }
    EnvelopeTerm::new(c, exponent, Q::zero(), rho, Region::Band(0))
}
