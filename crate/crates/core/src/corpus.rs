//! Built-in graphs, the graph file format, and the invariant suite run over them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{laplacian_tree_count, Graph, Modification};
use crate::hypersurface::patterson_scan;
use crate::linalg::QMatrix;
use crate::poly::MultiPoly;
use crate::rational::{self, Rational};
use crate::symanzik::{first_symanzik, Configuration, PsiMethod};

/// `{"vertices": [...], "edges": [[u, v], ...], "masses": [...], "momenta": {"v": [...]}}`.
///
/// Numbers are JSON numbers (read as exact decimals) or `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default)]
    pub vertices: Vec<i64>,
    pub edges: Vec<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momenta: Option<BTreeMap<String, Vec<Value>>>,
}

fn number(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => rational::parse(&n.to_string()),
        Value::String(s) => rational::parse(s),
        other => Err(Error::GraphFile(format!("expected a number, got {other}"))),
    }
}

impl GraphFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::GraphFile(e.to_string()))
    }

    pub fn graph(&self) -> Result<Graph> {
        let edges: Vec<(i64, i64)> = self.edges.iter().map(|[u, v]| (*u, *v)).collect();
        let mut vertices = self.vertices.clone();
        for &(u, v) in &edges {
            for w in [u, v] {
                if !vertices.contains(&w) {
                    vertices.push(w);
                }
            }
        }
        Graph::new(&vertices, &edges)
    }

    /// Masses in edge order, if present.
    pub fn masses(&self, g: &Graph) -> Result<Option<Vec<Rational>>> {
        let Some(m) = &self.masses else { return Ok(None) };
        if m.len() != g.n_edges() {
            return Err(Error::DimensionMismatch { expected: g.n_edges(), got: m.len() });
        }
        m.iter().map(number).collect::<Result<Vec<_>>>().map(Some)
    }

    /// External momenta indexed like `g`'s vertices; unlisted vertices get zero.
    pub fn momenta(&self, g: &Graph) -> Result<Option<Vec<Vec<Rational>>>> {
        let Some(map) = &self.momenta else { return Ok(None) };
        let dim = map.values().map(Vec::len).max().unwrap_or(1);
        let mut out = vec![vec![rational::zero(); dim]; g.n_vertices()];
        for (label, values) in map {
            let id: i64 = label.trim().parse().map_err(|_| Error::GraphFile(format!("bad vertex label {label:?}")))?;
            let v = g.vertex_index(id)?;
            if values.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: values.len() });
            }
            out[v] = values.iter().map(number).collect::<Result<_>>()?;
        }
        Ok(Some(out))
    }

    /// Serialization with every number rewritten in reduced `p/q` form, so that
    /// equivalent files hash identically.
    pub fn canonical_json(&self) -> Result<String> {
        let canon = |vs: &[Value]| -> Result<Vec<Value>> {
            vs.iter().map(|v| number(v).map(|q| Value::String(rational::format(&q)))).collect()
        };
        let g = self.graph()?;
        let out = GraphFile {
            vertices: g.vertex_labels().to_vec(),
            edges: self.edges.clone(),
            masses: self.masses.as_deref().map(canon).transpose()?,
            momenta: self
                .momenta
                .as_ref()
                .map(|m| m.iter().map(|(k, v)| Ok((k.trim().to_string(), canon(v)?))).collect::<Result<BTreeMap<_, _>>>())
                .transpose()?,
        };
        serde_json::to_string(&out).map_err(|e| Error::GraphFile(e.to_string()))
    }

    pub fn from_graph(g: &Graph) -> Self {
        let labels = g.vertex_labels();
        GraphFile {
            vertices: labels.to_vec(),
            edges: (0..g.n_edges())
                .map(|e| {
                    let (t, h) = g.endpoints(e);
                    [labels[t], labels[h]]
                })
                .collect(),
            masses: None,
            momenta: None,
        }
    }
}

const BUILTIN: &[(&str, &str)] = &[
    ("bubble", r#"{"vertices":[1,2],"edges":[[1,2],[1,2]]}"#),
    ("triangle", r#"{"vertices":[1,2,3],"edges":[[1,2],[2,3],[3,1]]}"#),
    ("banana3", r#"{"vertices":[1,2],"edges":[[1,2],[1,2],[1,2]]}"#),
    ("banana4", r#"{"vertices":[1,2],"edges":[[1,2],[1,2],[1,2],[1,2]]}"#),
    ("banana5", r#"{"vertices":[1,2],"edges":[[1,2],[1,2],[1,2],[1,2],[1,2]]}"#),
    ("double_bubble", r#"{"vertices":[1,2,3],"edges":[[1,2],[1,2],[2,3],[2,3]]}"#),
    ("wheel3", r#"{"vertices":[1,2,3,4],"edges":[[1,2],[2,3],[3,1],[1,4],[2,4],[3,4]]}"#),
    (
        "wheel4",
        r#"{"vertices":[1,2,3,4,5],"edges":[[1,2],[2,3],[3,4],[4,1],[1,5],[2,5],[3,5],[4,5]]}"#,
    ),
    ("tadpole_bubble", r#"{"vertices":[1,2],"edges":[[1,2],[1,2],[2,2]]}"#),
    ("chain3", r#"{"vertices":[1,2,3],"edges":[[1,2],[2,3]]}"#),
    ("chain4", r#"{"vertices":[1,2,3,4],"edges":[[1,2],[2,3],[3,4]]}"#),
    ("chain5", r#"{"vertices":[1,2,3,4,5],"edges":[[1,2],[2,3],[3,4],[4,5]]}"#),
    ("chain6", r#"{"vertices":[1,2,3,4,5,6],"edges":[[1,2],[2,3],[3,4],[4,5],[5,6]]}"#),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_file(name: &str) -> Option<GraphFile> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, j)| GraphFile::parse(j).expect("built-in graph parses"))
}

pub fn builtin(name: &str) -> Option<Graph> {
    builtin_file(name).map(|f| f.graph().expect("built-in graph is valid"))
}

/// All built-in graphs in a fixed order.
pub fn all() -> Vec<(&'static str, Graph)> {
    BUILTIN.iter().map(|(n, _)| (*n, builtin(n).expect("listed"))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub graph: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

fn psi(g: &Graph, method: PsiMethod) -> Result<MultiPoly> {
    first_symanzik(&Configuration::from_graph(g), method)
}

/// Exact invariant checks on one graph: the two ways of computing the first Symanzik
/// polynomial, unit coefficients, tree counts, the cycle basis, deletion/contraction
/// and a short Patterson scan.
pub fn verify_graph(name: &str, g: &Graph, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |check: &str, passed: bool, detail: String| {
        out.push(Check { graph: name.to_string(), check: check.to_string(), passed, detail })
    };
    let det = psi(g, PsiMethod::Determinant)?;
    let trees = psi(g, PsiMethod::SpanningTree)?;
    push("psi_methods_agree", det == trees, format!("{} terms", det.n_terms()));
    let unit = det.terms().all(|(_, c)| c == &rational::one());
    push("unit_coefficients", unit, String::new());

    let count = g.spanning_trees()?.len();
    let lap = laplacian_tree_count(g);
    push("tree_count", lap == count.into(), format!("{count} trees, laplacian {lap}"));

    let basis = g.cycle_basis();
    let boundary = g.boundary_matrix();
    let ok = basis.rows.iter().all(|row| {
        boundary.entries.iter().all(|b| b.iter().zip(row).map(|(x, y)| x * y).sum::<i64>() == 0)
    });
    let rank = QMatrix::from_i64_rows(&basis.rows, g.n_edges())?.rank();
    push("cycle_basis", ok && rank == g.loop_number(), format!("g = {}", g.loop_number()));

    let vars = Configuration::from_graph(g).vars().to_vec();
    let mut dc_ok = true;
    for e in 0..g.n_edges() {
        let restricted = det.substitute(e, &rational::zero());
        if g.is_tadpole(e) {
            dc_ok &= restricted.is_zero();
            continue;
        }
        let cut = g.modify(e, Modification::Delete)?;
        let shrunk = g.modify(e, Modification::Contract)?;
        // edges keep their names, so the polynomials compare directly
        let cut_psi = if cut.is_connected() { psi(&cut, PsiMethod::Determinant)? } else { MultiPoly::zero(&vars) };
        let shrunk_psi = psi(&shrunk, PsiMethod::Determinant)?;
        dc_ok &= det.derivative(e) == cut_psi && restricted == shrunk_psi;
    }
    push("deletion_contraction", dc_ok, String::new());

    if g.loop_number() >= 1 {
        let report = patterson_scan(&Configuration::from_graph(g), 20, seed)?;
        push("patterson", report.all_match, format!("{} samples", report.samples.len()));
    }
    Ok(out)
}

/// [`verify_graph`] over every built-in graph.
pub fn verify_all(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (name, g) in all() {
        out.extend(verify_graph(name, &g, seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_exact_numbers() {
        let f = GraphFile::parse(r#"{"vertices":[1,2],"edges":[[1,2],[1,2]],"masses":[1,"1/3"],"momenta":{"1":[0.1],"2":["-1/10"]}}"#).unwrap();
        let g = f.graph().unwrap();
        assert_eq!(f.masses(&g).unwrap().unwrap()[1], rational::frac(1, 3));
        assert_eq!(f.momenta(&g).unwrap().unwrap()[0][0], rational::frac(1, 10));
        let same = GraphFile::parse(r#"{"edges":[[1,2],[1,2]],"masses":["1","2/6"],"momenta":{"2":[-0.1],"1":["1/10"]}}"#).unwrap();
        assert_eq!(f.canonical_json().unwrap(), same.canonical_json().unwrap());
        assert!(GraphFile::parse(r#"{"edges":[[1,2]],"colour":1}"#).is_err());
    }

    #[test]
    fn builtins_load() {
        assert_eq!(all().len(), 13);
        assert_eq!(builtin("wheel3").unwrap().loop_number(), 3);
        assert_eq!(builtin("wheel4").unwrap().loop_number(), 4);
    }
}
