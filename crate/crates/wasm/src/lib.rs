//! Bindings for the static demo page in `www/`.
//!
//! Every call takes and returns JSON text. Results carry `"ok": true` or
//! `"ok": false` with an `"error"` message, so the page never sees a throw.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use wdk_core::duality::DualityWitness;
use wdk_core::oracle::{branchwidth_exact, carving_width_exact, pathwidth_exact, rank_width_exact, treewidth_exact};
use wdk_core::problem::{Instance, Mode, Problem, WitnessFile};
use wdk_core::Error;

fn reply(result: Result<Value, Error>) -> String {
    match result {
        Ok(mut v) => {
            v["ok"] = json!(true);
            v.to_string()
        }
        Err(e) => json!({ "ok": false, "error": e.to_string() }).to_string(),
    }
}

fn build(instance: &str, mode: &str, k: usize, w: Option<usize>) -> Result<Problem, Error> {
    let instance = Instance::parse(instance)?;
    Problem::build(&instance, mode.parse::<Mode>()?, k, w, None)
}

/// Runs the duality engine. `w` is only read in adhesion mode; pass 0 for none.
#[wasm_bindgen]
pub fn solve(instance: &str, mode: &str, k: usize, w: usize) -> String {
    reply((|| {
        let p = build(instance, mode, k, (w > 0).then_some(w))?;
        let witness = p.solve()?;
        let node_stars = match &witness {
            DualityWitness::Tree(t) => t.nodes().map(|x| t.oriented_star_at(x).len()).collect(),
            DualityWitness::Tangle(_) => Vec::new(),
        };
        let file = serde_json::to_value(p.witness_file(&witness)).map_err(|e| Error::Internal(e.to_string()))?;
        Ok(json!({
            "side": witness.side(),
            "width_param": p.interpret(witness.is_tangle()),
            "separations": p.system.separations().count(),
            "node_star_sizes": node_stars,
            "witness": file,
        }))
    })())
}

/// Checks a witness (as produced by `solve`) against an instance.
#[wasm_bindgen]
pub fn verify(instance: &str, witness: &str) -> String {
    reply((|| {
        let file = WitnessFile::from_json_str(witness)?;
        let mode = file.mode.ok_or_else(|| Error::Input("witness has no mode".into()))?;
        let k = file.k.ok_or_else(|| Error::Input("witness has no k".into()))?;
        let p = build(instance, mode.as_str(), k, file.w)?;
        let w = p.witness_from_file(&file)?;
        Ok(match p.verify(&w) {
            Ok(()) => json!({ "valid": true, "side": w.side() }),
            Err(why) => json!({ "valid": false, "side": w.side(), "violation": why }),
        })
    })())
}

/// Exact classical widths of a small graph, from the exhaustive oracles.
#[wasm_bindgen]
pub fn widths(instance: &str) -> String {
    reply((|| {
        let instance = Instance::parse(instance)?;
        let g = instance.graph().ok_or_else(|| Error::Usage("widths need a graph".into()))?;
        Ok(json!({
            "vertices": g.vertex_count(),
            "edges": g.edge_count(),
            "tree_width": treewidth_exact(g)?,
            "path_width": pathwidth_exact(g)?,
            "branch_width": branchwidth_exact(g)?,
            "carving_width": carving_width_exact(g)?,
            "rank_width": rank_width_exact(g)?,
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    const K3: &str = r#"{"vertices": 3, "edges": [[0,1],[1,2],[0,2]]}"#;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn solve_then_verify() {
        let out = parse(&solve(K3, "tree", 3, 0));
        assert_eq!(out["ok"], true);
        assert_eq!(out["side"], "tangle");
        let checked = parse(&verify(K3, &out["witness"].to_string()));
        assert_eq!(checked["valid"], true);
    }

    #[test]
    fn bad_mode_is_reported() {
        let out = parse(&solve(K3, "sideways", 2, 0));
        assert_eq!(out["ok"], false);
        assert!(out["error"].as_str().unwrap().contains("sideways"));
    }

    #[test]
    fn triangle_widths() {
        let out = parse(&widths(K3));
        assert_eq!(out["tree_width"], 2);
        assert_eq!(out["path_width"], 2);
        assert_eq!(out["branch_width"], 2);
    }
}
