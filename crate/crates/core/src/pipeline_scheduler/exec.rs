use std::any::Any;
use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::spec::{compute_batches, BatchPlan, PipelineSpec};
use super::PipelineError;

/// Immutable value published into a slot.
pub type Payload = Arc<dyn Any + Send + Sync>;

/// Read access to a filter's declared inputs.
pub struct FilterInputs<'a> {
    pub frame: u64,
    names: &'a [String],
    values: Vec<Option<Payload>>,
}

impl FilterInputs<'_> {
    /// Raw payload of an input slot; `None` until its producer first ran.
    pub fn payload(&self, slot: &str) -> Option<&Payload> {
        let i = self.names.iter().position(|n| n == slot)?;
        self.values[i].as_ref()
    }

    pub fn get<T: 'static>(&self, slot: &str) -> Option<&T> {
        self.payload(slot)?.downcast_ref::<T>()
    }
}

/// A filter returns one payload per declared output, in declaration order.
pub type FilterFn = Box<dyn Fn(&FilterInputs) -> Result<Vec<Payload>, String> + Send + Sync>;

/// Filter implementations by name.
#[derive(Default)]
pub struct Registry {
    filters: HashMap<String, FilterFn>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, f: impl Fn(&FilterInputs) -> Result<Vec<Payload>, String> + Send + Sync + 'static) {
        self.filters.insert(name.to_string(), Box::new(f));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.filters.contains_key(name)
    }
}

/// Start and end of one filter execution, measured from the pipeline's epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterTiming {
    pub name: String,
    pub batch: usize,
    pub start: Duration,
    pub end: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub frame: u64,
    /// Filters that ran this frame, by batch then name.
    pub executed: Vec<String>,
    pub timings: Vec<FilterTiming>,
    pub wall: Duration,
}

/// Executes a validated pipeline frame by frame.
pub struct Executor {
    spec: PipelineSpec,
    plan: BatchPlan,
    registry: Registry,
    pool: rayon::ThreadPool,
    serial: bool,
    slots: HashMap<String, Option<Payload>>,
    runs: HashMap<String, u64>,
    epoch: Instant,
}

impl Executor {
    /// `workers = None` uses the available hardware parallelism.
    pub fn new(spec: PipelineSpec, registry: Registry, workers: Option<usize>) -> Result<Self, PipelineError> {
        spec.validate()?;
        if let Some(missing) = spec.filters.iter().find(|f| !registry.contains(&f.name)) {
            return Err(PipelineError::MissingFilter(missing.name.clone()));
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = workers {
            builder = builder.num_threads(n.max(1));
        }
        let pool = builder.build().map_err(|e| PipelineError::Invalid(e.to_string()))?;
        let plan = compute_batches(&spec);
        let mut slots = HashMap::new();
        for s in &spec.source_slots {
            slots.insert(s.clone(), None);
        }
        for f in &spec.filters {
            for o in &f.outputs {
                slots.insert(o.clone(), None);
            }
        }
        Ok(Self {
            spec,
            plan,
            registry,
            pool,
            serial: false,
            slots,
            runs: HashMap::new(),
            epoch: Instant::now(),
        })
    }

    /// Runs batch members one after another instead of concurrently.
    pub fn set_serial(&mut self, serial: bool) {
        self.serial = serial;
    }

    pub fn plan(&self) -> &BatchPlan {
        &self.plan
    }

    pub fn spec(&self) -> &PipelineSpec {
        &self.spec
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Number of executions of `name` so far.
    pub fn run_count(&self, name: &str) -> u64 {
        self.runs.get(name).copied().unwrap_or(0)
    }

    pub fn slot(&self, name: &str) -> Option<&Payload> {
        self.slots.get(name)?.as_ref()
    }

    /// Publishes the capture-stage values and runs one frame. Skipped
    /// filters keep their previous outputs.
    pub fn run_frame(&mut self, frame: u64, sources: Vec<(String, Payload)>) -> Result<FrameReport, PipelineError> {
        for (name, value) in sources {
            if !self.spec.source_slots.contains(&name) {
                return Err(PipelineError::UnknownSource(name));
            }
            self.slots.insert(name, Some(value));
        }
        let t0 = Instant::now();
        let mut executed = Vec::new();
        let mut timings = Vec::new();
        for (bi, batch) in self.plan.batches.iter().enumerate() {
            let jobs: Vec<Job<'_>> = batch
                .iter()
                .map(|n| self.spec.filter(n).expect("planned filter exists"))
                .filter(|f| f.runs_on(frame))
                .map(|f| {
                    let vals = f.inputs.iter().map(|i| self.slots.get(i).cloned().flatten()).collect();
                    (f.name.as_str(), f.inputs.as_slice(), vals)
                })
                .collect();
            let registry = &self.registry;
            let epoch = self.epoch;
            let results: Vec<_> = if self.serial {
                jobs.into_iter().map(|j| run_job(registry, epoch, frame, j)).collect()
            } else {
                self.pool
                    .install(|| jobs.into_par_iter().map(|j| run_job(registry, epoch, frame, j)).collect())
            };
            let mut failure = None;
            let mut publish = Vec::new();
            for (name, out, start, end) in results {
                let f = self.spec.filter(name).expect("planned filter exists");
                match out {
                    Ok(values) if values.len() == f.outputs.len() => {
                        publish.push((name, values));
                        timings.push(FilterTiming {
                            name: name.to_string(),
                            batch: bi,
                            start,
                            end,
                        });
                    }
                    Ok(values) => {
                        failure.get_or_insert(PipelineError::Filter {
                            filter: name.to_string(),
                            message: format!("returned {} outputs, {} declared", values.len(), f.outputs.len()),
                        });
                    }
                    Err(message) => {
                        failure.get_or_insert(PipelineError::Filter {
                            filter: name.to_string(),
                            message,
                        });
                    }
                }
            }
            if let Some(e) = failure {
                return Err(e);
            }
            for (name, values) in publish {
                let f = self.spec.filter(name).expect("planned filter exists");
                for (slot, v) in f.outputs.iter().zip(values) {
                    self.slots.insert(slot.clone(), Some(v));
                }
                *self.runs.entry(name.to_string()).or_default() += 1;
                executed.push(name.to_string());
            }
        }
        Ok(FrameReport {
            frame,
            executed,
            timings,
            wall: t0.elapsed(),
        })
    }
}

type Job<'a> = (&'a str, &'a [String], Vec<Option<Payload>>);

fn run_job<'a>(registry: &Registry, epoch: Instant, frame: u64, job: Job<'a>) -> (&'a str, Result<Vec<Payload>, String>, Duration, Duration) {
    let (name, names, values) = job;
    let inputs = FilterInputs { frame, names, values };
    let start = epoch.elapsed();
    let out = (registry.filters[name])(&inputs);
    let end = epoch.elapsed();
    (name, out, start, end)
}

/// Registry where every filter sleeps for its `cost_ms` (or `default_ms`)
/// and publishes unit values.
pub fn sleep_registry(spec: &PipelineSpec, default_ms: u64) -> Registry {
    let mut r = Registry::new();
    for f in &spec.filters {
        let d = Duration::from_millis(f.cost_ms.unwrap_or(default_ms));
        let n = f.outputs.len();
        r.insert(&f.name, move |_| {
            std::thread::sleep(d);
            Ok((0..n).map(|_| Arc::new(()) as Payload).collect())
        });
    }
    r
}

/// Checks that no consumer started before each of its producers finished
/// in the same frame. Returns the offending `(producer, consumer)` pairs.
pub fn audit_timings(spec: &PipelineSpec, report: &FrameReport) -> Vec<(String, String)> {
    let by_name: HashMap<&str, &FilterTiming> = report.timings.iter().map(|t| (t.name.as_str(), t)).collect();
    spec.edges()
        .into_iter()
        .filter(|(p, c)| match (by_name.get(p.as_str()), by_name.get(c.as_str())) {
            (Some(tp), Some(tc)) => tp.end > tc.start,
            _ => false,
        })
        .collect()
}
