//! Extended reals for reports: finite values serialize as JSON numbers,
//! infinities as the strings `"inf"` / `"-inf"`.

use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(pub f64);

impl ExtReal {
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            v if v == f64::INFINITY => write!(f, "inf"),
            v if v == f64::NEG_INFINITY => write!(f, "-inf"),
            v if v.is_nan() => write!(f, "nan"),
            v => write!(f, "{v}"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}
