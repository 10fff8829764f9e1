//! JSON form of a net. Lengths and tangents are recomputed on load.

use super::{assemble_net, ArcSpec, AssembleOptions, GeodesicNet, NetError};
use crate::geomcore::AmbientVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcRecord {
    pub from: usize,
    pub to: usize,
    #[serde(default)]
    pub via: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetFile {
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub arcs: Vec<ArcRecord>,
    #[serde(default)]
    pub name: Option<String>,
}

impl NetFile {
    pub fn from_net(net: &GeodesicNet) -> Self {
        Self {
            ambient_dim: net.ambient_dim(),
            vertices: net.vertices().iter().map(|v| v.as_slice().to_vec()).collect(),
            arcs: net
                .arcs()
                .iter()
                .map(|a| ArcRecord {
                    from: a.from,
                    to: a.to,
                    via: a.via.as_ref().map(|w| w.as_slice().to_vec()),
                })
                .collect(),
            name: net.name.clone(),
        }
    }

    /// Assemble, allowing non-3-valent vertices (the great circle).
    pub fn to_net(&self, tol: f64) -> Result<GeodesicNet, NetError> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| AmbientVector::from_column_slice(v))
            .collect();
        let specs: Vec<ArcSpec> = self
            .arcs
            .iter()
            .map(|a| ArcSpec {
                from: a.from,
                to: a.to,
                via: a.via.as_ref().map(|w| AmbientVector::from_column_slice(w)),
            })
            .collect();
        let mut net = assemble_net(
            self.ambient_dim,
            vertices,
            &specs,
            AssembleOptions {
                tol,
                allow_nonpolyhedral: true,
            },
        )?;
        net.name = self.name.clone();
        Ok(net)
    }

    pub fn parse(text: &str) -> Result<Self, NetError> {
        serde_json::from_str(text).map_err(|e| NetError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("net file serializes")
    }
}

impl GeodesicNet {
    pub fn to_json(&self) -> String {
        NetFile::from_net(self).to_json()
    }

    pub fn from_json(text: &str, tol: f64) -> Result<GeodesicNet, NetError> {
        NetFile::parse(text)?.to_net(tol)
    }
}
