//! C interface to the socialtie classifier.
//!
//! Objects are opaque handles created by `st_*_new`/`st_*_build`/`st_*_load`
//! style calls and released by the matching `st_*_free`. Every fallible call
//! returns a [`StStatus`]; on failure a message is available from
//! [`st_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use socialtie::classifier::{class_summary, classify, ClassLabel, ClassificationResult};
use socialtie::config::RunConfig;
use socialtie::graph::{ActorId, AttributeId, EdgeInstance, Interner, TemporalNetwork};
use socialtie::io::load_network;
use socialtie::metrics::{compute_all, BetweennessMode, MetricsConfig, MetricsReport};
use socialtie::pipeline::run_pipeline;
use socialtie::relevance::{extract_relevant, OutlierMethod, RelevanceConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    OutOfRange = 4,
    Graph = 5,
    Classify = 6,
    Metrics = 7,
    Io = 8,
    Pipeline = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StClass {
    /// Actor has no interactions.
    None = -1,
    Innocuous = 0,
    Brokerage = 1,
    Closure = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StMethod {
    Iqr = 0,
    ModifiedZ = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StMetric {
    Degree = 0,
    Closeness = 1,
    Betweenness = 2,
    Clustering = 3,
    Pagerank = 4,
}

/// Per-class counts, indexed by `StClass` value.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StClassCounts {
    pub counts: [usize; 3],
    pub total: usize,
}

pub struct StNetworkBuilder {
    snapshots: usize,
    actors: Interner,
    attributes: Interner,
    instances: Vec<EdgeInstance>,
}

pub struct StNetwork(TemporalNetwork);

pub struct StClassification(ClassificationResult);

pub struct StMetrics(MetricsReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("no interior NUL")));
}

struct Fail(StStatus, String);

type Res<T> = Result<T, Fail>;

fn fail<T>(status: StStatus, msg: impl Into<String>) -> Res<T> {
    Err(Fail(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Res<()>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            StStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return fail(StStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(StStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref()
        .map_or_else(|| fail(StStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Res<&'a mut T> {
    p.as_mut()
        .map_or_else(|| fail(StStatus::NullPointer, format!("{what} is null")), Ok)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn st_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Starts an empty network with `snapshots` snapshots.
#[no_mangle]
pub extern "C" fn st_builder_new(snapshots: usize) -> *mut StNetworkBuilder {
    Box::into_raw(Box::new(StNetworkBuilder {
        snapshots,
        actors: Interner::new(),
        attributes: Interner::new(),
        instances: Vec::new(),
    }))
}

/// Adds an interaction between actors `u` and `v` at 0-based `snapshot`
/// carrying `n_attrs` attribute names.
///
/// # Safety
/// `b` must come from [`st_builder_new`]. `u` and `v` must be NUL-terminated
/// strings; `attrs` must point to `n_attrs` such strings (or be NULL when
/// `n_attrs` is 0).
#[no_mangle]
pub unsafe extern "C" fn st_builder_add(
    b: *mut StNetworkBuilder,
    u: *const c_char,
    v: *const c_char,
    snapshot: u32,
    attrs: *const *const c_char,
    n_attrs: usize,
) -> StStatus {
    guard(|| {
        let b = out(b, "builder")?;
        let u = str_arg(u, "u")?;
        let v = str_arg(v, "v")?;
        if n_attrs > 0 && attrs.is_null() {
            return fail(StStatus::NullPointer, "attrs is null");
        }
        let mut names = Vec::with_capacity(n_attrs);
        for i in 0..n_attrs {
            names.push(str_arg(*attrs.add(i), "attribute")?);
        }
        let uid = ActorId(b.actors.intern(u));
        let vid = ActorId(b.actors.intern(v));
        let ids: Vec<AttributeId> = names
            .iter()
            .map(|a| AttributeId(b.attributes.intern(a)))
            .collect();
        b.instances.push(EdgeInstance::new(uid, vid, snapshot, ids));
        Ok(())
    })
}

/// Consumes the builder and writes the finished network to `*net`. The
/// builder is freed whether or not the call succeeds.
///
/// # Safety
/// `b` must come from [`st_builder_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn st_builder_build(b: *mut StNetworkBuilder, net: *mut *mut StNetwork) -> StStatus {
    guard(|| {
        if b.is_null() {
            return fail(StStatus::NullPointer, "builder is null");
        }
        let b = Box::from_raw(b);
        let slot = out(net, "net")?;
        let n = TemporalNetwork::build(b.actors, b.attributes, b.instances, b.snapshots)
            .or_else(|e| fail(StStatus::Graph, e.to_string()))?;
        *slot = Box::into_raw(Box::new(StNetwork(n)));
        Ok(())
    })
}

/// # Safety
/// `b` must come from [`st_builder_new`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn st_builder_free(b: *mut StNetworkBuilder) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Loads `network.tsv` from a run directory.
///
/// # Safety
/// `dir` must be a NUL-terminated path; `net` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_network_load(dir: *const c_char, net: *mut *mut StNetwork) -> StStatus {
    guard(|| {
        let dir = str_arg(dir, "dir")?;
        let slot = out(net, "net")?;
        let n = load_network(Path::new(dir)).or_else(|e| fail(StStatus::Io, e.to_string()))?;
        *slot = Box::into_raw(Box::new(StNetwork(n)));
        Ok(())
    })
}

/// # Safety
/// `net` must be a network handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn st_network_free(net: *mut StNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// # Safety
/// `net` must be a valid network handle.
#[no_mangle]
pub unsafe extern "C" fn st_network_actor_count(net: *const StNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.actor_count())
}

/// # Safety
/// `net` must be a valid network handle.
#[no_mangle]
pub unsafe extern "C" fn st_network_instance_count(net: *const StNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.instances().len())
}

/// # Safety
/// `net` must be a valid network handle.
#[no_mangle]
pub unsafe extern "C" fn st_network_snapshot_count(net: *const StNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.t())
}

/// Id of the actor called `name`.
///
/// # Safety
/// `net` must be a valid handle, `name` NUL-terminated, `id` writable.
#[no_mangle]
pub unsafe extern "C" fn st_network_actor_id(
    net: *const StNetwork,
    name: *const c_char,
    id: *mut u32,
) -> StStatus {
    guard(|| {
        let n = obj(net, "net")?;
        let name = str_arg(name, "name")?;
        let slot = out(id, "id")?;
        match n.0.actor_id(name) {
            Some(a) => {
                *slot = a.0;
                Ok(())
            }
            None => fail(StStatus::OutOfRange, format!("no actor `{name}`")),
        }
    })
}

/// Endpoints and snapshot of instance `i`. Instances are ordered by
/// snapshot, ties in insertion order.
///
/// # Safety
/// `net` must be a valid handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_network_instance(
    net: *const StNetwork,
    i: usize,
    u: *mut u32,
    v: *mut u32,
    snapshot: *mut u32,
) -> StStatus {
    guard(|| {
        let n = obj(net, "net")?;
        let (u, v, s) = (out(u, "u")?, out(v, "v")?, out(snapshot, "snapshot")?);
        let Some(inst) = n.0.instances().get(i) else {
            return fail(StStatus::OutOfRange, format!("instance {i} out of range"));
        };
        (*u, *v, *s) = (inst.u.0, inst.v.0, inst.snapshot);
        Ok(())
    })
}

/// Extracts relevant attributes and labels every node and instance.
/// `method` is a [`StMethod`] value.
///
/// # Safety
/// `net` must be a valid handle; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn st_classify(
    net: *const StNetwork,
    method: u32,
    result: *mut *mut StClassification,
) -> StStatus {
    guard(|| {
        let n = obj(net, "net")?;
        let slot = out(result, "result")?;
        let cfg = RelevanceConfig {
            method: match method {
                m if m == StMethod::Iqr as u32 => OutlierMethod::Iqr,
                m if m == StMethod::ModifiedZ as u32 => OutlierMethod::ModifiedZ,
                m => return fail(StStatus::InvalidArgument, format!("unknown method {m}")),
            },
            ..Default::default()
        };
        let rel = extract_relevant(&n.0, &cfg);
        let r = classify(&n.0, &rel).or_else(|e| fail(StStatus::Classify, e.to_string()))?;
        *slot = Box::into_raw(Box::new(StClassification(r)));
        Ok(())
    })
}

/// # Safety
/// `result` must be a classification handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn st_classification_free(result: *mut StClassification) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

fn to_st(c: Option<ClassLabel>) -> StClass {
    match c {
        None => StClass::None,
        Some(ClassLabel::Innocuous) => StClass::Innocuous,
        Some(ClassLabel::Brokerage) => StClass::Brokerage,
        Some(ClassLabel::Closure) => StClass::Closure,
    }
}

/// # Safety
/// `result` must be a valid handle; `class` writable.
#[no_mangle]
pub unsafe extern "C" fn st_node_class(
    result: *const StClassification,
    actor: u32,
    class: *mut StClass,
) -> StStatus {
    guard(|| {
        let r = obj(result, "result")?;
        let slot = out(class, "class")?;
        let Some(c) = r.0.nodes.get(actor as usize) else {
            return fail(StStatus::OutOfRange, format!("actor {actor} out of range"));
        };
        *slot = to_st(*c);
        Ok(())
    })
}

/// Class of instance `i`, in the order of [`st_network_instance`].
///
/// # Safety
/// `result` must be a valid handle; `class` writable.
#[no_mangle]
pub unsafe extern "C" fn st_edge_class(
    result: *const StClassification,
    i: usize,
    class: *mut StClass,
) -> StStatus {
    guard(|| {
        let r = obj(result, "result")?;
        let slot = out(class, "class")?;
        let Some(e) = r.0.edges.get(i) else {
            return fail(StStatus::OutOfRange, format!("instance {i} out of range"));
        };
        *slot = to_st(Some(e.class));
        Ok(())
    })
}

/// # Safety
/// `result` must be a valid handle; `nodes` and `edges` writable.
#[no_mangle]
pub unsafe extern "C" fn st_class_counts(
    result: *const StClassification,
    nodes: *mut StClassCounts,
    edges: *mut StClassCounts,
) -> StStatus {
    guard(|| {
        let r = obj(result, "result")?;
        let (n, e) = (out(nodes, "nodes")?, out(edges, "edges")?);
        let s = class_summary(&r.0);
        let conv = |c: &socialtie::classifier::ClassCounts| StClassCounts {
            counts: [
                c.count(ClassLabel::Innocuous),
                c.count(ClassLabel::Brokerage),
                c.count(ClassLabel::Closure),
            ],
            total: c.total,
        };
        *n = conv(&s.nodes);
        *e = conv(&s.edges);
        Ok(())
    })
}

/// Structural metrics on the collapsed graph. `pivots` 0 means exact
/// betweenness; otherwise that many sampled sources drawn with `seed`.
///
/// # Safety
/// `net` must be a valid handle; `metrics` writable.
#[no_mangle]
pub unsafe extern "C" fn st_metrics_compute(
    net: *const StNetwork,
    pivots: usize,
    seed: u64,
    metrics: *mut *mut StMetrics,
) -> StStatus {
    guard(|| {
        let n = obj(net, "net")?;
        let slot = out(metrics, "metrics")?;
        let cfg = MetricsConfig {
            betweenness: if pivots == 0 {
                BetweennessMode::Exact
            } else {
                BetweennessMode::Sampled { pivots, seed }
            },
            ..Default::default()
        };
        let m = compute_all(&n.0.simple_view(), &cfg).or_else(|e| fail(StStatus::Metrics, e.to_string()))?;
        *slot = Box::into_raw(Box::new(StMetrics(m)));
        Ok(())
    })
}

/// # Safety
/// `metrics` must be a metrics handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn st_metrics_free(metrics: *mut StMetrics) {
    if !metrics.is_null() {
        drop(Box::from_raw(metrics));
    }
}

/// Node metric of `actor`; `metric` is a [`StMetric`] value.
///
/// # Safety
/// `metrics` must be a valid handle; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn st_metric_value(
    metrics: *const StMetrics,
    metric: u32,
    actor: u32,
    value: *mut f64,
) -> StStatus {
    guard(|| {
        let m = obj(metrics, "metrics")?;
        let slot = out(value, "value")?;
        if metric > StMetric::Pagerank as u32 {
            return fail(StStatus::InvalidArgument, format!("unknown metric {metric}"));
        }
        let col = m.0.node_column(metric as usize);
        let Some(&x) = col.get(actor as usize) else {
            return fail(StStatus::OutOfRange, format!("actor {actor} out of range"));
        };
        *slot = x;
        Ok(())
    })
}

/// Runs the whole pipeline from a TOML config file into `out_dir`.
/// `exit_code` receives the code the command-line tool would return.
///
/// # Safety
/// `config` and `out_dir` must be NUL-terminated paths; `exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn st_run_config(
    config: *const c_char,
    out_dir: *const c_char,
    exit_code: *mut i32,
) -> StStatus {
    guard(|| {
        let config = str_arg(config, "config")?;
        let out_dir = str_arg(out_dir, "out_dir")?;
        let code = out(exit_code, "exit_code")?;
        let cfg = RunConfig::load(Path::new(config)).map(|mut c| {
            c.output = Some(out_dir.into());
            c
        });
        let res = cfg.map_err(Into::into).and_then(|c| run_pipeline(&c));
        match res {
            Ok(_) => {
                *code = 0;
                Ok(())
            }
            Err(e) => {
                *code = e.stage.exit_code() as i32;
                fail(StStatus::Pipeline, e.to_string())
            }
        }
    })
}
