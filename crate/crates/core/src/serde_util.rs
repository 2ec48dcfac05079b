//! Serde adapters that write vectors as plain numeric sequences.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::Vector;

pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        let xs = Vec::<f64>::deserialize(d)?;
        Ok(Vector::from_vec(xs))
    }
}
