//! Width-parameter modes: how an input and a mode turn into a separation
//! system, a star family and a universe; plus the witness file format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::duality::{strong_duality_with_stats, tangle_violation, validate_tree, DualityWitness, EngineStats, StarFamily};
use crate::error::{usage, Error, Result};
use crate::families::{BagFamily, ExplicitFamily, MatroidFamily, TangleFamily};
use crate::separation::{Orientation, SeparationSystem, SetSep};
use crate::stree::{EdgeJson, STree};
use crate::universe::{Graph, Matroid, Universe};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Branch,
    Tree,
    Path,
    Adhesion,
    Carving,
    Rank,
    MatroidTree,
    Custom,
}

impl Mode {
    pub const ALL: [Mode; 8] =
        [Mode::Branch, Mode::Tree, Mode::Path, Mode::Adhesion, Mode::Carving, Mode::Rank, Mode::MatroidTree, Mode::Custom];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Branch => "branch",
            Mode::Tree => "tree",
            Mode::Path => "path",
            Mode::Adhesion => "adhesion",
            Mode::Carving => "carving",
            Mode::Rank => "rank",
            Mode::MatroidTree => "matroid-tree",
            Mode::Custom => "custom",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown mode {s:?}")))
    }
}

/// The object a mode is applied to.
#[derive(Clone, Debug)]
pub enum Instance {
    Graph(Graph),
    Matroid(Matroid),
}

impl Instance {
    /// Reads a graph (JSON or DIMACS) or a matroid (JSON with a `type` field).
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let value: serde_json::Value =
                serde_json::from_str(trimmed).map_err(|e| Error::Input(format!("instance JSON: {e}")))?;
            if value.get("type").is_some() {
                return Matroid::from_json_str(trimmed).map(Instance::Matroid);
            }
        }
        Graph::parse(text).map(Instance::Graph)
    }

    pub fn graph(&self) -> Option<&Graph> {
        match self {
            Instance::Graph(g) => Some(g),
            Instance::Matroid(_) => None,
        }
    }
}

/// Everything the engine needs for one `(instance, mode, k)`.
pub struct Problem {
    pub mode: Mode,
    pub k: usize,
    pub w: Option<usize>,
    pub universe: Universe,
    pub system: SeparationSystem,
    pub family: Box<dyn StarFamily + Send>,
    /// The listed stars of a custom family; empty in other modes.
    pub custom_stars: Vec<Vec<SetSep>>,
}

fn need_graph(instance: &Instance, mode: Mode) -> Result<Graph> {
    instance
        .graph()
        .cloned()
        .ok_or_else(|| Error::Usage(format!("mode {mode} needs a graph, not a matroid")))
}

impl Problem {
    pub fn build(instance: &Instance, mode: Mode, k: usize, w: Option<usize>, custom: Option<ExplicitFamily>) -> Result<Self> {
        if k == 0 {
            return usage("k must be a positive integer");
        }
        if w.is_some() && mode != Mode::Adhesion {
            return usage("--w only applies to adhesion mode");
        }
        if custom.is_some() && mode != Mode::Custom {
            return usage("a family file only applies to custom mode");
        }
        let universe = match mode {
            Mode::Branch | Mode::Tree | Mode::Path | Mode::Adhesion => Universe::vertex_separations(need_graph(instance, mode)?)?,
            Mode::Carving => Universe::carving(need_graph(instance, mode)?)?,
            Mode::Rank => Universe::cut_rank(need_graph(instance, mode)?)?,
            Mode::MatroidTree => match instance {
                Instance::Graph(g) => Universe::matroid(Matroid::graphic(g.clone())?)?,
                Instance::Matroid(m) => Universe::matroid(m.clone())?,
            },
            Mode::Custom => match instance {
                Instance::Graph(g) => Universe::vertex_separations(g.clone())?,
                Instance::Matroid(m) => Universe::matroid(m.clone())?,
            },
        };
        let u = universe.clone();
        let custom_stars = custom.as_ref().map(|f| f.members()).unwrap_or_default();
        let family: Box<dyn StarFamily + Send> = match mode {
            Mode::Branch | Mode::Carving | Mode::Rank => Box::new(TangleFamily::new(u, k, true)?),
            Mode::Tree => Box::new(BagFamily::treewidth(u, k)?),
            Mode::Path => Box::new(BagFamily::pathwidth(u, k)?),
            Mode::Adhesion => {
                let w = w.ok_or_else(|| Error::Usage("adhesion mode needs --w".into()))?;
                Box::new(BagFamily::adhesion(u, k, w)?)
            }
            Mode::MatroidTree => Box::new(MatroidFamily::new(u, k)?),
            Mode::Custom => Box::new(custom.ok_or_else(|| Error::Usage("custom mode needs --family".into()))?),
        };
        let system = universe.system_below(k)?;
        Ok(Problem { mode, k, w, universe, system, family, custom_stars })
    }

    pub fn family(&self) -> &dyn StarFamily {
        self.family.as_ref()
    }

    pub fn solve(&self) -> Result<DualityWitness> {
        self.solve_with_stats().map(|(w, _)| w)
    }

    pub fn solve_with_stats(&self) -> Result<(DualityWitness, EngineStats)> {
        strong_duality_with_stats(&self.system, self.family(), &self.universe)
    }

    /// Checks a witness against this problem; `Err` names the violation.
    pub fn verify(&self, witness: &DualityWitness) -> std::result::Result<(), String> {
        match witness {
            DualityWitness::Tree(t) => {
                let report = validate_tree(t, &self.system, self.family());
                if report.is_ok() {
                    Ok(())
                } else {
                    Err(report.describe())
                }
            }
            DualityWitness::Tangle(o) => match tangle_violation(o, &self.system, self.family()) {
                None => Ok(()),
                Some(why) => Err(why),
            },
        }
    }

    /// What a side means for the width parameter of this mode.
    pub fn interpret(&self, tangle: bool) -> String {
        let k = self.k;
        match (self.mode, tangle) {
            (Mode::Branch, _) if k <= 2 => {
                format!("tangle-number{}{k} (branch-width differs for stars and matchings)", if tangle { ">=" } else { "<" })
            }
            (Mode::Branch, true) => format!("branch-width>={k}"),
            (Mode::Branch, false) => format!("branch-width<{k}"),
            (Mode::Tree, true) => format!("tree-width>={}", k - 1),
            (Mode::Tree, false) => format!("tree-width<{}", k - 1),
            (Mode::Path, true) => format!("path-width>={}", k - 1),
            (Mode::Path, false) => format!("path-width<{}", k - 1),
            (Mode::Adhesion, t) => {
                let w = self.w.unwrap_or(k);
                if t {
                    format!("no-decomposition(width<{},adhesion<{k})", w - 1)
                } else {
                    format!("decomposition(width<{},adhesion<{k})", w - 1)
                }
            }
            (Mode::Carving, true) => format!("carving-tangle-order>={k}"),
            (Mode::Carving, false) => format!("carving-width<{k}"),
            (Mode::Rank, true) => format!("rank-tangle-order>={k}"),
            (Mode::Rank, false) => format!("rank-width<{k}"),
            (Mode::MatroidTree, true) => format!("matroid-tree-width>={k}"),
            (Mode::MatroidTree, false) => format!("matroid-tree-width<{k}"),
            (Mode::Custom, true) => "family-tangle".into(),
            (Mode::Custom, false) => "tree-over-family".into(),
        }
    }

    pub fn witness_file(&self, witness: &DualityWitness) -> WitnessFile {
        let body = match witness {
            DualityWitness::Tree(t) => {
                let json = t.to_json();
                WitnessBody::Stree { nodes: json.nodes, edges: json.edges }
            }
            DualityWitness::Tangle(o) => WitnessBody::Tangle { oriented: o.payloads(&self.system) },
        };
        WitnessFile { schema_version: SCHEMA_VERSION, mode: Some(self.mode), k: Some(self.k), w: self.w, body }
    }

    /// Turns a witness file back into a witness over this problem's system.
    pub fn witness_from_file(&self, file: &WitnessFile) -> Result<DualityWitness> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!("unsupported schema_version {}", file.schema_version)));
        }
        match &file.body {
            WitnessBody::Stree { edges, .. } => {
                STree::from_edges(edges.iter().map(|e| (e.x, e.y, e.alpha_xy))).map(DualityWitness::Tree)
            }
            WitnessBody::Tangle { oriented } => {
                let mut ids = Vec::with_capacity(oriented.len());
                for s in oriented {
                    let id = self
                        .system
                        .id_of(s)
                        .ok_or_else(|| Error::Validation(format!("{s} is not in S_{}", self.k)))?;
                    ids.push(id);
                }
                Orientation::new(&self.system, ids)
                    .map(DualityWitness::Tangle)
                    .map_err(|e| Error::Validation(e.to_string()))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessBody {
    Stree { nodes: Vec<usize>, edges: Vec<EdgeJson> },
    Tangle { oriented: Vec<SetSep> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct WitnessFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    #[serde(flatten)]
    pub body: WitnessBody,
}

impl WitnessFile {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serialises")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("witness JSON: {e}")))
    }
}
