//! Exact rational arithmetic helpers shared across the crate.

use num::bigint::BigInt;
use num::{BigRational, One, Zero};

use crate::error::{GameError, Result};

pub type Rat = BigRational;

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn from_u64s(num: u64, den: u64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3"`, `"1/2"`, `"-2/7"`.
pub fn parse(text: &str) -> Result<Rat> {
    let bad = || GameError::Invalid(format!("malformed rational `{text}`"));
    let mut parts = text.splitn(2, '/');
    let num: BigInt = parts.next().unwrap().trim().parse().map_err(|_| bad())?;
    let den: BigInt = match parts.next() {
        Some(d) => d.trim().parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(GameError::Invalid(format!("zero denominator in `{text}`")));
    }
    Ok(Rat::new(num, den))
}

/// Canonical text form: `"1"`, `"1/2"`.
pub fn format(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
