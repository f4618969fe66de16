//! JSON documents for systems and graph-directed systems.

use ifsproj_core::fixtures::Fixture;
use ifsproj_core::{Edge, Gdifs, Mat, Similarity, Ssifs, Tolerances, Vect};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub ratio: f64,
    /// Row-major `d x d`.
    pub rotation: Vec<f64>,
    pub translation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDirection {
    pub name: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_sim_dim: Option<f64>,
    #[serde(default)]
    pub osc_certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_dimension: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub directions: Vec<NamedDirection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsDocument {
    pub schema_version: String,
    pub ambient_dim: usize,
    pub maps: Vec<MapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

fn row_major(m: &Mat) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

fn map_doc(s: &Similarity) -> MapDoc {
    MapDoc {
        ratio: s.ratio(),
        rotation: row_major(s.rotation()),
        translation: s.translation().iter().copied().collect(),
    }
}

fn check_len(what: &str, index: usize, got: usize, want: usize) -> Result<(), CliError> {
    if got != want {
        return Err(CliError::Schema(format!(
            "map {}: {what} has {got} entries, expected {want}",
            index + 1
        )));
    }
    Ok(())
}

impl MapDoc {
    fn to_similarity(&self, index: usize, d: usize, tol: &Tolerances) -> Result<Similarity, CliError> {
        check_len("rotation", index, self.rotation.len(), d * d)?;
        check_len("translation", index, self.translation.len(), d)?;
        let rotation = Mat::from_row_slice(d, d, &self.rotation);
        let translation = Vect::from_column_slice(&self.translation);
        Similarity::with_tolerances(self.ratio, rotation, translation, tol)
            .map_err(|e| CliError::Schema(format!("map {}: {e}", index + 1)))
    }
}

impl IfsDocument {
    pub fn from_ssifs(ifs: &Ssifs, metadata: Option<Metadata>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            ambient_dim: ifs.dim(),
            maps: ifs.maps().iter().map(map_doc).collect(),
            metadata,
        }
    }

    pub fn from_fixture(f: &Fixture) -> Self {
        let metadata = Metadata {
            name: Some(f.name.into()),
            expected_sim_dim: f.expected_sim_dim,
            osc_certified: f.osc_certified,
            known_dimension: f.known_dimension,
            directions: f
                .directions
                .iter()
                .map(|(n, v)| NamedDirection {
                    name: (*n).into(),
                    vector: v.clone(),
                })
                .collect(),
        };
        Self::from_ssifs(&f.ifs, Some(metadata))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: IfsDocument = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
                doc.schema_version
            )));
        }
        if doc.ambient_dim == 0 {
            return Err(CliError::Schema("ambient_dim must be >= 1".into()));
        }
        if doc.maps.is_empty() {
            return Err(CliError::Schema("maps must be nonempty".into()));
        }
        Ok(doc)
    }

    pub fn name(&self) -> Option<&str> {
        self.metadata.as_ref()?.name.as_deref()
    }

    pub fn osc_certified(&self) -> bool {
        self.metadata.as_ref().is_some_and(|m| m.osc_certified)
    }

    pub fn directions(&self) -> &[NamedDirection] {
        self.metadata.as_ref().map_or(&[], |m| &m.directions)
    }

    /// Revalidates every map; a degenerate system surfaces as a core error.
    pub fn to_ssifs(&self, tol: &Tolerances) -> Result<Ssifs, CliError> {
        let d = self.ambient_dim;
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_similarity(i, d, tol))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ssifs::with_tolerances(maps, *tol)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: usize,
    pub to: usize,
    pub ratio: f64,
    pub rotation: Vec<f64>,
    pub translation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdifsDocument {
    pub vertices: usize,
    pub edges: Vec<EdgeDoc>,
}

impl GdifsDocument {
    pub fn from_gdifs(g: &Gdifs) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g
                .edges()
                .iter()
                .map(|e| {
                    let m = map_doc(&e.map);
                    EdgeDoc {
                        from: e.from,
                        to: e.to,
                        ratio: m.ratio,
                        rotation: m.rotation,
                        translation: m.translation,
                    }
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn to_gdifs(&self, tol: &Tolerances) -> Result<Gdifs, CliError> {
        let first = self.edges.first().ok_or_else(|| CliError::Schema("edges must be nonempty".into()))?;
        let d = first.translation.len();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let m = MapDoc {
                    ratio: e.ratio,
                    rotation: e.rotation.clone(),
                    translation: e.translation.clone(),
                };
                Ok(Edge {
                    from: e.from,
                    to: e.to,
                    map: m.to_similarity(i, d, tol)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Gdifs::new(self.vertices, edges)?)
    }
}
