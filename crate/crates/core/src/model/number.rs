use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A numeric tag value or query operand.
///
/// Integers and floats keep their identity (they come from distinct wire
/// tokens) but compare with each other exactly, without rounding the integer
/// through `f64`. Floats are always finite.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    /// Returns `None` for NaN and infinities.
    pub fn float(value: f64) -> Option<Number> {
        value.is_finite().then_some(Number::Float(value))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }
}

const TWO_POW_63: f64 = 9_223_372_036_854_775_808.0;

fn cmp_int_float(i: i64, f: f64) -> Ordering {
    if f >= TWO_POW_63 {
        return Ordering::Less;
    }
    if f < -TWO_POW_63 {
        return Ordering::Greater;
    }
    // |trunc(f)| < 2^63 here, so the cast is exact.
    let whole = f.trunc();
    match i.cmp(&(whole as i64)) {
        Ordering::Equal => 0.0f64.partial_cmp(&(f - whole)).unwrap_or(Ordering::Equal),
        other => other,
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        match (*self, *other) {
            (Number::Int(a), Number::Int(b)) => a.cmp(&b),
            (Number::Float(a), Number::Float(b)) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
            (Number::Int(a), Number::Float(b)) => cmp_int_float(a, b),
            (Number::Float(a), Number::Int(b)) => cmp_int_float(b, a).reverse(),
        }
    }
}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl fmt::Display for Number {
    /// Integers print bare; floats always carry a `.` or exponent so that
    /// they parse back as floats.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Float(x) => write!(f, "{x:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mixed_comparisons_are_exact() {
        assert_eq!(Number::Int(5), Number::Float(5.0));
        assert!(Number::Int(4) < Number::Float(4.5));
        assert!(Number::Int(5) > Number::Float(4.5));
        assert!(Number::Int(-5) < Number::Float(-4.5));
        assert!(Number::Int(-4) > Number::Float(-4.5));
        // 2^53 + 1 is not representable as f64 and must not collapse onto 2^53.
        let big = (1i64 << 53) + 1;
        assert!(Number::Int(big) > Number::Float((1u64 << 53) as f64));
        assert!(Number::Int(i64::MAX) < Number::Float(TWO_POW_63));
        assert!(Number::Int(i64::MIN) == Number::Float(-TWO_POW_63));
        assert!(Number::Int(i64::MIN) > Number::Float(-1e300));
        assert_eq!(Number::Float(0.0), Number::Float(-0.0));
    }

    #[test]
    fn display_keeps_float_identity() {
        assert_eq!(Number::Int(4).to_string(), "4");
        assert_eq!(Number::Float(4.0).to_string(), "4.0");
        assert_eq!(Number::Float(1e300).to_string(), "1e300");
    }

    proptest! {
        // Against an arbitrary-precision reference: compare a*2^0 with the
        // float's exact rational value via i128 for floats in i128 range.
        #[test]
        fn int_float_order_matches_exact_reference(i in any::<i64>(), f in -1e19f64..1e19f64) {
            let exact = {
                let whole = f.trunc() as i128;
                let frac = f - f.trunc();
                match (i as i128).cmp(&whole) {
                    Ordering::Equal => 0.0f64.partial_cmp(&frac).unwrap(),
                    o => o,
                }
            };
            prop_assert_eq!(Number::Int(i).cmp(&Number::Float(f)), exact);
        }

        #[test]
        fn ordering_is_antisymmetric(a in any::<i64>(), b in -1e20f64..1e20f64) {
            let x = Number::Int(a);
            let y = Number::Float(b);
            prop_assert_eq!(x.cmp(&y), y.cmp(&x).reverse());
        }
    }
}
