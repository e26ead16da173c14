//! Function-level call graph with name-based, context- and flow-insensitive
//! target resolution, plus reachability from the entry set.

mod resolve;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entry_recognizer::EntrySet;
use crate::package_model::{FunctionId, PackageModel, ScopeOwner};

pub use resolve::{Resolution, Resolver, MAX_ALIAS_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    /// Qualnames indexed by [`FunctionId`].
    pub nodes: Vec<String>,
    pub edges: BTreeSet<(FunctionId, FunctionId)>,
    pub unresolved: Vec<(FunctionId, String)>,
    successors: Vec<Vec<FunctionId>>,
    index: HashMap<String, FunctionId>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("entry {0} is not a function in the package")]
    EntryNotInGraph(String),
    #[error("malformed graph document: {0}")]
    Malformed(String),
}

/// Serialized form: `{"nodes": [...], "edges": [[caller, callee]...], "unresolved": [[caller, text]...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub unresolved: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityResult {
    pub indispensable: BTreeSet<String>,
    pub optional: BTreeSet<String>,
}

/// Resolved edges and unresolved references found in one function body.
type FunctionEdges = (Vec<(FunctionId, FunctionId)>, Vec<(FunctionId, String)>);

/// Builds the call graph over every function definition in `pkg`.
pub fn build_call_graph(pkg: &PackageModel) -> CallGraph {
    let resolver = Resolver::new(pkg);
    let per_function: Vec<FunctionEdges> = pkg
        .functions
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let caller = FunctionId(i);
            let mut edges = Vec::new();
            let mut unresolved = Vec::new();
            if let Some(p) = f.parent {
                edges.push((p, caller));
            }
            for r in &f.refs {
                let res = resolver.resolve(r);
                edges.extend(res.targets.iter().map(|t| (caller, *t)));
                if res.unresolved {
                    unresolved.push((caller, r.text.clone()));
                }
            }
            unresolved.sort();
            unresolved.dedup();
            (edges, unresolved)
        })
        .collect();
    let mut edges = BTreeSet::new();
    let mut unresolved = Vec::new();
    for (e, u) in per_function {
        edges.extend(e);
        unresolved.extend(u);
    }
    CallGraph::from_parts(
        pkg.functions.iter().map(|f| f.qualname.clone()).collect(),
        edges,
        unresolved,
    )
}

/// Functions referenced by module-level code (top-level calls, decorators,
/// arguments passed at import time, class bodies).
pub fn module_level_targets(pkg: &PackageModel) -> BTreeMap<FunctionId, String> {
    let resolver = Resolver::new(pkg);
    let mut out = BTreeMap::new();
    for m in &pkg.modules {
        for r in &m.top_refs {
            debug_assert!(!matches!(r.scope, ScopeOwner::Function(_)));
            for t in resolver.resolve(r).targets {
                out.entry(t)
                    .or_insert_with(|| format!("{}:{} {}", m.dotted_name, r.line, r.text));
            }
        }
    }
    out
}

impl CallGraph {
    fn from_parts(
        nodes: Vec<String>,
        edges: BTreeSet<(FunctionId, FunctionId)>,
        unresolved: Vec<(FunctionId, String)>,
    ) -> CallGraph {
        let mut successors = vec![Vec::new(); nodes.len()];
        for (a, b) in &edges {
            successors[a.0].push(*b);
        }
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), FunctionId(i)))
            .collect();
        CallGraph {
            nodes,
            edges,
            unresolved,
            successors,
            index,
        }
    }

    pub fn id_of(&self, qualname: &str) -> Option<FunctionId> {
        self.index.get(qualname).copied()
    }

    pub fn successors(&self, id: FunctionId) -> &[FunctionId] {
        &self.successors[id.0]
    }

    /// Adds an edge; used by tests and tools that post-process graphs.
    pub fn add_edge(&mut self, from: FunctionId, to: FunctionId) {
        if self.edges.insert((from, to)) {
            self.successors[from.0].push(to);
        }
    }

    pub fn edge_names(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|(a, b)| (self.nodes[a.0].clone(), self.nodes[b.0].clone()))
            .collect()
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            nodes: self.nodes.clone(),
            edges: self.edge_names().into_iter().collect(),
            unresolved: self
                .unresolved
                .iter()
                .map(|(c, t)| (self.nodes[c.0].clone(), t.clone()))
                .collect(),
        }
    }

    pub fn from_document(doc: &GraphDocument) -> Result<CallGraph, GraphError> {
        let index: BTreeMap<&str, usize> = doc
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        if index.len() != doc.nodes.len() {
            return Err(GraphError::Malformed("duplicate node".into()));
        }
        let id = |n: &str| {
            index
                .get(n)
                .map(|i| FunctionId(*i))
                .ok_or_else(|| GraphError::Malformed(format!("edge endpoint {n} is not a node")))
        };
        let mut edges = BTreeSet::new();
        for (a, b) in &doc.edges {
            edges.insert((id(a)?, id(b)?));
        }
        let mut unresolved = Vec::new();
        for (c, t) in &doc.unresolved {
            unresolved.push((id(c)?, t.clone()));
        }
        Ok(CallGraph::from_parts(doc.nodes.clone(), edges, unresolved))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph callgraph {\n");
        let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        for n in &self.nodes {
            let _ = writeln!(out, "  {};", quote(n));
        }
        for (a, b) in self.edge_names() {
            let _ = writeln!(out, "  {} -> {};", quote(&a), quote(&b));
        }
        out.push_str("}\n");
        out
    }

    /// Breadth-first closure from `roots`; `true` at every reached id.
    pub fn closure(&self, roots: impl IntoIterator<Item = FunctionId>) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<FunctionId> = VecDeque::new();
        for r in roots {
            if !seen[r.0] {
                seen[r.0] = true;
                queue.push_back(r);
            }
        }
        while let Some(n) = queue.pop_front() {
            for s in &self.successors[n.0] {
                if !seen[s.0] {
                    seen[s.0] = true;
                    queue.push_back(*s);
                }
            }
        }
        seen
    }

    /// A shortest path from any of `roots` to `target`, inclusive.
    pub fn shortest_path(
        &self,
        roots: &[FunctionId],
        target: FunctionId,
    ) -> Option<Vec<FunctionId>> {
        let mut prev: Vec<Option<FunctionId>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::new();
        for r in roots {
            if !seen[r.0] {
                seen[r.0] = true;
                queue.push_back(*r);
            }
        }
        while let Some(n) = queue.pop_front() {
            if n == target {
                let mut path = vec![n];
                let mut cur = n;
                while let Some(p) = prev[cur.0] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for s in &self.successors[n.0] {
                if !seen[s.0] {
                    seen[s.0] = true;
                    prev[s.0] = Some(n);
                    queue.push_back(*s);
                }
            }
        }
        None
    }
}

/// Forward closure of the entries; everything else is optional.
pub fn compute_reachability(
    cg: &CallGraph,
    entries: &EntrySet,
) -> Result<ReachabilityResult, GraphError> {
    let mut roots = Vec::new();
    for q in entries.all() {
        roots.push(
            cg.id_of(q)
                .ok_or_else(|| GraphError::EntryNotInGraph(q.to_string()))?,
        );
    }
    let seen = cg.closure(roots);
    let mut result = ReachabilityResult::default();
    for (i, n) in cg.nodes.iter().enumerate() {
        if seen[i] {
            result.indispensable.insert(n.clone());
        } else {
            result.optional.insert(n.clone());
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests;
