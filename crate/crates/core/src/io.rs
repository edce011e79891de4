//! JSON forms of polytopes. Rationals travel as `"p/q"` strings.
//!
//! A polytope is read from `{"vertices": [[..], ..]}` or from
//! `{"normals": [[..], ..], "offsets": [..]}` (meaning `<n, x> >= -offset`)
//! and is written in the vertex form.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{Halfspace, Polytope};
use crate::scalar::{Scalar, Vector};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normals: Option<Vec<Vector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offsets: Option<Vec<Scalar>>,
}

fn build(j: PolytopeJson) -> Result<Polytope> {
    match (j.vertices, j.normals, j.offsets) {
        (Some(v), None, None) => Polytope::from_vertices(&v),
        (None, Some(n), Some(o)) => {
            if n.len() != o.len() {
                return Err(Error::Invalid(format!(
                    "{} normals but {} offsets",
                    n.len(),
                    o.len()
                )));
            }
            let hs: Vec<Halfspace> = n
                .into_iter()
                .zip(o)
                .map(|(n, o)| Halfspace::new(n, o))
                .collect();
            Polytope::from_halfspaces(&hs)
        }
        _ => Err(Error::Invalid(
            "polytope needs either \"vertices\" or both \"normals\" and \"offsets\"".into(),
        )),
    }
}

impl Serialize for Polytope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson {
            vertices: Some(self.vertices().to_vec()),
            normals: None,
            offsets: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        build(PolytopeJson::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// H-representation in the input schema.
pub fn halfspace_json(p: &Polytope) -> serde_json::Value {
    let normals: Vec<&Vector> = p.halfspaces().iter().map(|h| &h.normal).collect();
    let offsets: Vec<&Scalar> = p.halfspaces().iter().map(|h| &h.offset).collect();
    serde_json::json!({ "normals": normals, "offsets": offsets })
}
