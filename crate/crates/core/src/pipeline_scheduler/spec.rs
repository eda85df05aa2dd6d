use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::PipelineError;

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub name: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
    /// The filter runs on frames whose index is a multiple of this.
    #[serde(default = "one", alias = "frequency_divider")]
    pub divider: u32,
    /// Simulated cost used by the sleep benchmark, milliseconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_ms: Option<u64>,
}

impl FilterSpec {
    pub fn new(name: &str, inputs: &[&str], outputs: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            divider: 1,
            cost_ms: None,
        }
    }

    pub fn with_divider(mut self, divider: u32) -> Self {
        self.divider = divider;
        self
    }

    pub fn runs_on(&self, frame: u64) -> bool {
        frame % self.divider.max(1) as u64 == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSpec {
    #[serde(default)]
    pub source_slots: Vec<String>,
    pub filters: Vec<FilterSpec>,
}

impl PipelineSpec {
    pub fn filter(&self, name: &str) -> Option<&FilterSpec> {
        self.filters.iter().find(|f| f.name == name)
    }

    /// Producer filter of every non-source slot.
    pub fn producers(&self) -> HashMap<&str, &str> {
        let mut m = HashMap::new();
        for f in &self.filters {
            for o in &f.outputs {
                m.insert(o.as_str(), f.name.as_str());
            }
        }
        m
    }

    /// `(producer, consumer)` name pairs, deduplicated and sorted.
    pub fn edges(&self) -> Vec<(String, String)> {
        let prod = self.producers();
        let mut set = BTreeSet::new();
        for f in &self.filters {
            for i in &f.inputs {
                if let Some(p) = prod.get(i.as_str()) {
                    set.insert((p.to_string(), f.name.clone()));
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let mut names = BTreeSet::new();
        for f in &self.filters {
            if f.name.is_empty() {
                return Err(PipelineError::Invalid("filter with an empty name".into()));
            }
            if !names.insert(f.name.as_str()) {
                return Err(PipelineError::DuplicateName(f.name.clone()));
            }
            if f.divider == 0 {
                return Err(PipelineError::Invalid(format!("filter {} has divider 0", f.name)));
            }
        }
        let sources: BTreeSet<&str> = self.source_slots.iter().map(String::as_str).collect();
        let mut producer: BTreeMap<&str, &str> = BTreeMap::new();
        for f in &self.filters {
            for o in &f.outputs {
                if f.inputs.contains(o) {
                    return Err(PipelineError::SelfLoop {
                        filter: f.name.clone(),
                        slot: o.clone(),
                    });
                }
                if sources.contains(o.as_str()) {
                    return Err(PipelineError::DuplicateProducer {
                        slot: o.clone(),
                        first: "<source>".into(),
                        second: f.name.clone(),
                    });
                }
                if let Some(prev) = producer.insert(o.as_str(), f.name.as_str()) {
                    return Err(PipelineError::DuplicateProducer {
                        slot: o.clone(),
                        first: prev.to_string(),
                        second: f.name.clone(),
                    });
                }
            }
        }
        for f in &self.filters {
            for i in &f.inputs {
                if !sources.contains(i.as_str()) && !producer.contains_key(i.as_str()) {
                    return Err(PipelineError::UnknownSlot {
                        filter: f.name.clone(),
                        slot: i.clone(),
                    });
                }
            }
        }
        if let Some(cycle) = find_cycle(self) {
            return Err(PipelineError::Cycle(cycle));
        }
        Ok(())
    }
}

/// Names along one dependency cycle, if any, starting from its
/// lexicographically smallest member.
fn find_cycle(spec: &PipelineSpec) -> Option<Vec<String>> {
    let mut adj: BTreeMap<&str, Vec<&str>> = spec.filters.iter().map(|f| (f.name.as_str(), Vec::new())).collect();
    let edges = spec.edges();
    for (p, c) in &edges {
        adj.get_mut(p.as_str()).expect("producer is a filter").push(c.as_str());
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark: BTreeMap<&str, Mark> = adj.keys().map(|k| (*k, Mark::New)).collect();
    let roots: Vec<&str> = adj.keys().copied().collect();
    for root in roots {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS keeping the active path
        let mut path: Vec<(&str, usize)> = vec![(root, 0)];
        mark.insert(root, Mark::Active);
        while let Some(&(node, next)) = path.last() {
            let succ = &adj[node];
            if next < succ.len() {
                let s = succ[next];
                if let Some(top) = path.last_mut() {
                    top.1 += 1;
                }
                match mark[s] {
                    Mark::New => {
                        mark.insert(s, Mark::Active);
                        path.push((s, 0));
                    }
                    Mark::Active => {
                        let start = path.iter().position(|(n, _)| *n == s).expect("active node is on the path");
                        let mut cycle: Vec<String> = path[start..].iter().map(|(n, _)| n.to_string()).collect();
                        let min = (0..cycle.len()).min_by_key(|&i| cycle[i].clone()).unwrap_or(0);
                        cycle.rotate_left(min);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark.insert(node, Mark::Done);
                path.pop();
            }
        }
    }
    None
}

/// Parses and validates a pipeline description.
pub fn parse_pipeline(document: &str) -> Result<PipelineSpec, PipelineError> {
    let spec: PipelineSpec = serde_json::from_str(document).map_err(|e| PipelineError::Json(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Filters grouped into batches that can run concurrently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batches: Vec<Vec<String>>,
}

impl BatchPlan {
    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn batch_of(&self, name: &str) -> Option<usize> {
        self.batches.iter().position(|b| b.iter().any(|n| n == name))
    }
}

/// Greedy layering: batch `k` holds every filter whose inputs are all
/// sources or outputs of earlier batches, names sorted within a batch.
pub fn compute_batches(spec: &PipelineSpec) -> BatchPlan {
    let prod = spec.producers();
    let mut done: BTreeSet<&str> = BTreeSet::new();
    let mut left: BTreeSet<&str> = spec.filters.iter().map(|f| f.name.as_str()).collect();
    let mut batches = Vec::new();
    while !left.is_empty() {
        let ready: Vec<&str> = left
            .iter()
            .copied()
            .filter(|n| {
                let f = spec.filter(n).expect("listed filter exists");
                f.inputs.iter().all(|i| prod.get(i.as_str()).is_none_or(|p| done.contains(p)))
            })
            .collect();
        if ready.is_empty() {
            // only reachable for specs that skipped validation
            break;
        }
        for n in &ready {
            left.remove(n);
            done.insert(n);
        }
        batches.push(ready.into_iter().map(String::from).collect());
    }
    BatchPlan { batches }
}
