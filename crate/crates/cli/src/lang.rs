//! The small text language for values, integrands and multifunctions.
//!
//! Values: `2.5`, `[1,2]` or `1,2` (coordinates).
//!
//! Integrands:
//! - `const:V`
//! - `pieces:SET=V;SET=V;…` (a simple function, zero elsewhere)
//! - `counterexample` (the c00 spike function)
//! - any scalar formula (`t`, `sin:3`, `2*t + exp:1`, …) times the unit
//!
//! Multifunctions:
//! - `[lo,hi]` (constant)
//! - `simple:SET=[lo,hi];SET=[lo,hi];…`
//! - `between:LOWER;UPPER` with two integrands
//! - `singleton:F`

use kh_riesz::domain::BorelSet;
use kh_riesz::kh::{Integrand, ScalarForm};
use kh_riesz::lattice::RieszValue;
use kh_riesz::setvalued::{Multifunction, OrderInterval};

use crate::config::Space;

pub fn parse_value(s: &str, space: &Space) -> Result<RieszValue, String> {
    let body = s.trim();
    let body = body
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .unwrap_or(body);
    let xs = body
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("cannot parse {x:?} as a number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    space.value(&xs)
}

pub fn parse_set(s: &str) -> Result<BorelSet, String> {
    s.parse::<BorelSet>()
        .map_err(|e| format!("cannot parse set {s:?}: {e}"))
}

/// Splits `SET=RHS` at the `=`.
fn piece(s: &str) -> Result<(BorelSet, &str), String> {
    let (set, rhs) = s
        .split_once('=')
        .ok_or_else(|| format!("piece {s:?} needs the form SET=VALUE"))?;
    Ok((parse_set(set)?, rhs.trim()))
}

pub fn parse_integrand(s: &str, space: &Space) -> Result<Integrand, String> {
    let s = s.trim();
    if s == "counterexample" {
        return Ok(Integrand::CounterexampleC00);
    }
    if let Some(v) = s.strip_prefix("const:") {
        return Ok(Integrand::Constant(parse_value(v, space)?));
    }
    if let Some(list) = s.strip_prefix("pieces:") {
        let pieces = list
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (set, v) = piece(p)?;
                Ok((set, parse_value(v, space)?))
            })
            .collect::<Result<Vec<_>, String>>()?;
        return Integrand::simple(pieces).map_err(|e| e.to_string());
    }
    let form: ScalarForm = s.parse().map_err(|e: kh_riesz::Error| e.to_string())?;
    Integrand::scalar_formula(form, space.unit()).map_err(|e| e.to_string())
}

fn parse_interval(s: &str, space: &Space) -> Result<OrderInterval, String> {
    let body = s
        .trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| format!("interval {s:?} must look like [lo,hi]"))?;
    let (lo, hi) = body
        .split_once(',')
        .ok_or_else(|| format!("interval {s:?} must look like [lo,hi]"))?;
    OrderInterval::new(parse_value(lo, space)?, parse_value(hi, space)?).map_err(|e| e.to_string())
}

pub fn parse_multifunction(s: &str, space: &Space) -> Result<Multifunction, String> {
    let s = s.trim();
    if s.starts_with('[') {
        return Ok(Multifunction::ConstantSet(parse_interval(s, space)?));
    }
    if let Some(list) = s.strip_prefix("simple:") {
        let pieces = list
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (set, v) = piece(p)?;
                Ok((set, parse_interval(v, space)?))
            })
            .collect::<Result<Vec<_>, String>>()?;
        return Multifunction::simple(pieces).map_err(|e| e.to_string());
    }
    if let Some(pair) = s.strip_prefix("between:") {
        let (lo, hi) = pair
            .split_once(';')
            .ok_or_else(|| "between: needs LOWER;UPPER".to_string())?;
        let (lo, hi) = (parse_integrand(lo, space)?, parse_integrand(hi, space)?);
        return Multifunction::interval_valued(lo, hi).map_err(|e| e.to_string());
    }
    if let Some(f) = s.strip_prefix("singleton:") {
        return Ok(Multifunction::singleton(parse_integrand(f, space)?));
    }
    Err(format!("cannot parse multifunction {s:?}"))
}
