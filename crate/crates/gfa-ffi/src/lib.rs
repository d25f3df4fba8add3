//! C ABI over the gfa library: opaque cluster handles, integer status codes,
//! and a per-thread error message channel. Every entry point catches panics,
//! so no unwinding ever crosses the FFI boundary.
//!
//! The generated header lands in `include/gfa.h` at build time.

use gfa::analysis::hit_probabilities;
use gfa::flow::FlowConfig;
use gfa::geometry::Cluster;
use gfa::growth::{grow, GrowthConfig};
use gfa::{GfaError, PotentialKind};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfaStatus {
    Ok = 0,
    /// A pointer was null or a parameter was out of range.
    InvalidArgument = 1,
    /// Growth gave up (stall cap exhausted or a launch failed outright).
    GrowthAborted = 2,
    /// The filesystem said no.
    IoError = 3,
    /// The potential/dimension combination is not defined.
    Unsupported = 4,
    /// A panic was caught at the boundary; state may be stale, message set.
    InternalError = 5,
}

/// A grown or loaded particle cluster. Opaque: create with `gfa_grow` or
/// `gfa_cluster_read_csv`, inspect with the accessors, destroy with
/// `gfa_cluster_free`.
pub struct GfaCluster {
    inner: ClusterImpl,
}

enum ClusterImpl {
    D2(Cluster<2>),
    D3(Cluster<3>),
}

impl GfaCluster {
    fn len(&self) -> usize {
        match &self.inner {
            ClusterImpl::D2(c) => c.len(),
            ClusterImpl::D3(c) => c.len(),
        }
    }

    fn dim(&self) -> u32 {
        match &self.inner {
            ClusterImpl::D2(_) => 2,
            ClusterImpl::D3(_) => 3,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = CString::new(msg.replace('\0', " ")).expect("NULs stripped");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn fail(status: GfaStatus, msg: &str) -> GfaStatus {
    set_error(msg);
    status
}

fn fail_with(err: &GfaError) -> GfaStatus {
    let status = match err {
        GfaError::GrowthAborted { .. } | GfaError::FlowFailed { .. } => GfaStatus::GrowthAborted,
        GfaError::Unsupported(_) => GfaStatus::Unsupported,
        GfaError::Io(_) | GfaError::Json(_) => GfaStatus::IoError,
        _ => GfaStatus::InvalidArgument,
    };
    fail(status, &err.to_string())
}

fn guarded(f: impl FnOnce() -> GfaStatus) -> GfaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(GfaStatus::InternalError, "internal panic caught at FFI boundary"),
    }
}

fn kind_for(alpha: f64) -> Result<PotentialKind, String> {
    if alpha == 0.0 {
        Ok(PotentialKind::Log)
    } else if alpha.is_infinite() && alpha > 0.0 {
        Ok(PotentialKind::NearestMax)
    } else if alpha > 0.0 && alpha.is_finite() {
        Ok(PotentialKind::Power(alpha))
    } else {
        Err(format!("alpha must be 0 (log), a positive real, or +inf, got {alpha}"))
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static Path, String> {
    if ptr.is_null() {
        return Err("path is null".into());
    }
    let s = CStr::from_ptr(ptr).to_str().map_err(|_| "path is not valid UTF-8".to_string())?;
    Ok(Path::new(s))
}

/// Message for the most recent failure on the calling thread. Never null;
/// empty before the first failure. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn gfa_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Grow a cluster of `n` particles from a single seed at the origin.
/// `alpha`: 0 selects the logarithmic potential, a positive real the
/// inverse-power potential, +infinity the nearest-particle maximum.
/// `dim` is 2 or 3 (3D supports alpha = 1 and +infinity). On success
/// `*out` owns the cluster; free it with `gfa_cluster_free`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn gfa_grow(
    alpha: f64,
    dim: u32,
    n: usize,
    seed: u64,
    out: *mut *mut GfaCluster,
) -> GfaStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GfaStatus::InvalidArgument, "out is null");
        }
        let kind = match kind_for(alpha) {
            Ok(k) => k,
            Err(msg) => return fail(GfaStatus::InvalidArgument, &msg),
        };
        let config = GrowthConfig::new(kind, n, seed);
        let inner = match dim {
            2 => grow::<2>(&config).map(|(c, _)| ClusterImpl::D2(c)),
            3 => grow::<3>(&config).map(|(c, _)| ClusterImpl::D3(c)),
            d => return fail(GfaStatus::InvalidArgument, &format!("dim must be 2 or 3, got {d}")),
        };
        match inner {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GfaCluster { inner }));
                GfaStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Load a cluster from CSV (`id,x,y[,z],parent,order`); the dimension comes
/// from the header. On success `*out` owns the cluster.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_read_csv(
    path: *const c_char,
    out: *mut *mut GfaCluster,
) -> GfaStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GfaStatus::InvalidArgument, "out is null");
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(msg) => return fail(GfaStatus::InvalidArgument, &msg),
        };
        let inner = match gfa::io::cluster_csv_dim(path) {
            Ok(2) => gfa::io::read_cluster_csv::<2>(path).map(ClusterImpl::D2),
            Ok(_) => gfa::io::read_cluster_csv::<3>(path).map(ClusterImpl::D3),
            Err(e) => return fail_with(&e),
        };
        match inner {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GfaCluster { inner }));
                GfaStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Write a cluster as CSV.
///
/// # Safety
/// `cluster` must come from this library and be live; `path` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_write_csv(
    cluster: *const GfaCluster,
    path: *const c_char,
) -> GfaStatus {
    guarded(|| {
        let Some(cluster) = cluster.as_ref() else {
            return fail(GfaStatus::InvalidArgument, "cluster is null");
        };
        let path = match path_from(path) {
            Ok(p) => p,
            Err(msg) => return fail(GfaStatus::InvalidArgument, &msg),
        };
        let written = match &cluster.inner {
            ClusterImpl::D2(c) => gfa::io::write_cluster_csv(path, c),
            ClusterImpl::D3(c) => gfa::io::write_cluster_csv(path, c),
        };
        match written {
            Ok(()) => GfaStatus::Ok,
            Err(e) => fail_with(&e),
        }
    })
}

/// Number of particles; 0 if `cluster` is null.
///
/// # Safety
/// `cluster` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_len(cluster: *const GfaCluster) -> usize {
    cluster.as_ref().map_or(0, |c| c.len())
}

/// Ambient dimension (2 or 3); 0 if `cluster` is null.
///
/// # Safety
/// `cluster` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_dim(cluster: *const GfaCluster) -> u32 {
    cluster.as_ref().map_or(0, |c| c.dim())
}

/// Largest pairwise distance; 0 for singletons and null handles.
///
/// # Safety
/// `cluster` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_diameter(cluster: *const GfaCluster) -> f64 {
    match cluster.as_ref() {
        Some(GfaCluster { inner: ClusterImpl::D2(c) }) => c.diameter(),
        Some(GfaCluster { inner: ClusterImpl::D3(c) }) => c.diameter(),
        None => 0.0,
    }
}

/// Copy particle positions into `out` as row-major doubles
/// (`len * dim` values). `cap` is the capacity of `out` in doubles.
///
/// # Safety
/// `out` must point to at least `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_positions(
    cluster: *const GfaCluster,
    out: *mut f64,
    cap: usize,
) -> GfaStatus {
    guarded(|| {
        let Some(cluster) = cluster.as_ref() else {
            return fail(GfaStatus::InvalidArgument, "cluster is null");
        };
        if out.is_null() {
            return fail(GfaStatus::InvalidArgument, "out is null");
        }
        let needed = cluster.len() * cluster.dim() as usize;
        if cap < needed {
            return fail(
                GfaStatus::InvalidArgument,
                &format!("capacity {cap} is below the {needed} doubles required"),
            );
        }
        let dst = std::slice::from_raw_parts_mut(out, needed);
        match &cluster.inner {
            ClusterImpl::D2(c) => {
                for (i, p) in c.positions().iter().enumerate() {
                    dst[2 * i..2 * i + 2].copy_from_slice(p);
                }
            }
            ClusterImpl::D3(c) => {
                for (i, p) in c.positions().iter().enumerate() {
                    dst[3 * i..3 * i + 3].copy_from_slice(p);
                }
            }
        }
        GfaStatus::Ok
    })
}

/// Parent id of particle `id`, or -1 for roots, out-of-range ids, and null
/// handles.
///
/// # Safety
/// `cluster` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_parent(cluster: *const GfaCluster, id: usize) -> i64 {
    let Some(cluster) = cluster.as_ref() else { return -1 };
    if id >= cluster.len() {
        return -1;
    }
    let parent = match &cluster.inner {
        ClusterImpl::D2(c) => c.parent(id as u32),
        ClusterImpl::D3(c) => c.parent(id as u32),
    };
    parent.map_or(-1, |q| q as i64)
}

/// Monte Carlo attachment probabilities: launches `samples` flows at the
/// cluster and writes one probability per particle into `out` (`cap` is the
/// capacity in doubles, at least the particle count). `workers` = 0 uses the
/// shared thread pool; results are identical for every worker count.
///
/// # Safety
/// `cluster` must be a live handle; `out` must point to `cap` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn gfa_hit_probabilities(
    cluster: *const GfaCluster,
    alpha: f64,
    samples: u64,
    seed: u64,
    workers: usize,
    out: *mut f64,
    cap: usize,
) -> GfaStatus {
    guarded(|| {
        let Some(cluster) = cluster.as_ref() else {
            return fail(GfaStatus::InvalidArgument, "cluster is null");
        };
        if out.is_null() {
            return fail(GfaStatus::InvalidArgument, "out is null");
        }
        if cap < cluster.len() {
            return fail(
                GfaStatus::InvalidArgument,
                &format!("capacity {cap} is below the particle count {}", cluster.len()),
            );
        }
        let kind = match kind_for(alpha) {
            Ok(k) => k,
            Err(msg) => return fail(GfaStatus::InvalidArgument, &msg),
        };
        let flow = FlowConfig::default();
        let stats = match &cluster.inner {
            ClusterImpl::D2(c) => hit_probabilities(c, kind, samples, seed, &flow, workers),
            ClusterImpl::D3(c) => hit_probabilities(c, kind, samples, seed, &flow, workers),
        };
        match stats {
            Ok(stats) => {
                let dst = std::slice::from_raw_parts_mut(out, cluster.len());
                for (slot, particle) in dst.iter_mut().zip(&stats.per_particle) {
                    *slot = particle.p_hat;
                }
                GfaStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Destroy a cluster handle. Null is a no-op. The handle must not be used
/// afterwards.
///
/// # Safety
/// `cluster` must be null or an owned handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn gfa_cluster_free(cluster: *mut GfaCluster) {
    if !cluster.is_null() {
        drop(Box::from_raw(cluster));
    }
}
