//! C interface to the CID toolkit.
//!
//! Clouds and spatial indexes are opaque handles created and released through
//! this API. Every fallible call returns a [`CidStatus`]; on failure the
//! message is kept per thread and can be copied out with
//! [`cid_last_error_message`]. Output buffers are owned by the caller.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cid_core::abstraction::MergeMode;
use cid_core::geometry::{
    cid_p as core_cid_p, point_to_set_distance, Point, PointCloud, SegmentDiscretization, SpatialIndex,
};
use cid_core::io::{read_point_cloud, to_json};
use cid_core::pipeline::{abstract_scene, segment, SceneReport};
use cid_core::sampling::cid_fps as core_cid_fps;
use cid_core::synth::{synth_scene, SceneKind};
use cid_core::{CidError, RunConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CidStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    IndexOutOfRange = 4,
    Parse = 5,
    Io = 6,
    Serialization = 7,
    Panic = 8,
}

/// Opaque point cloud.
pub struct CidCloud {
    inner: PointCloud,
}

/// Opaque exact nearest-neighbour index over a cloud.
pub struct CidIndex {
    inner: SpatialIndex,
}

/// Pipeline settings. A negative `merge_iterations` and a NaN
/// `merge_threshold` both mean "not set"; when both are set the iteration
/// count wins.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CidRunConfig {
    pub subsample_size: usize,
    pub k_seeds: usize,
    pub m_discretization: usize,
    pub group_cap: usize,
    pub merge_iterations: i64,
    pub merge_threshold: f64,
    pub rng_seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CidStatus, msg: &str) -> CidStatus {
    set_error(msg);
    status
}

fn status_of(e: &CidError) -> CidStatus {
    match e {
        CidError::InvalidInput(_) => CidStatus::InvalidInput,
        CidError::DimensionMismatch { .. } => CidStatus::DimensionMismatch,
        CidError::IndexOutOfRange { .. } => CidStatus::IndexOutOfRange,
        CidError::Parse { .. } => CidStatus::Parse,
        CidError::Io { .. } => CidStatus::Io,
        CidError::Json(_) => CidStatus::Serialization,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CidStatus, String)>) -> CidStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CidStatus::Ok,
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(CidStatus::Panic, "internal panic"),
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (CidStatus, String)>;
}

impl<T> IntoFfi<T> for Result<T, CidError> {
    fn ffi(self) -> Result<T, (CidStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (CidStatus, String) {
    (CidStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CidStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (CidStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

unsafe fn point_from(coords: *const f64, dim: u32) -> Result<Point, (CidStatus, String)> {
    if coords.is_null() {
        return Err(null("point coordinates"));
    }
    if dim != 2 && dim != 3 {
        return Err((CidStatus::InvalidInput, format!("dimension must be 2 or 3, got {dim}")));
    }
    Point::new(std::slice::from_raw_parts(coords, dim as usize)).ffi()
}

impl CidRunConfig {
    fn to_core(self) -> RunConfig {
        let merge = if self.merge_iterations >= 0 {
            Some(MergeMode::FixedIterations(self.merge_iterations as usize))
        } else if !self.merge_threshold.is_nan() {
            Some(MergeMode::Threshold(self.merge_threshold))
        } else {
            None
        };
        RunConfig {
            subsample_size: self.subsample_size,
            k_seeds: self.k_seeds,
            m_discretization: self.m_discretization,
            group_cap: self.group_cap,
            merge,
            rng_seed: self.rng_seed,
            ..RunConfig::default()
        }
    }
}

/// Library defaults: 20000-point subsample, 100 seeds, 100 segment samples,
/// 32 points per group, no merging, seed 0.
#[no_mangle]
pub extern "C" fn cid_run_config_default() -> CidRunConfig {
    let d = RunConfig::default();
    CidRunConfig {
        subsample_size: d.subsample_size,
        k_seeds: d.k_seeds,
        m_discretization: d.m_discretization,
        group_cap: d.group_cap,
        merge_iterations: -1,
        merge_threshold: f64::NAN,
        rng_seed: d.rng_seed,
    }
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or 0
/// when there is none.
#[no_mangle]
pub unsafe extern "C" fn cid_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Builds a cloud from `n` points of `dim` (2 or 3) interleaved coordinates.
#[no_mangle]
pub unsafe extern "C" fn cid_cloud_new(coords: *const f64, n: usize, dim: u32, out: *mut *mut CidCloud) -> CidStatus {
    guard(|| {
        if coords.is_null() || out.is_null() {
            return Err(null("coords or out"));
        }
        if dim != 2 && dim != 3 {
            return Err((CidStatus::InvalidInput, format!("dimension must be 2 or 3, got {dim}")));
        }
        let d = dim as usize;
        let flat = std::slice::from_raw_parts(coords, n * d);
        let points = flat
            .chunks_exact(d)
            .map(|c| [c[0], c[1], if d == 3 { c[2] } else { 0.0 }])
            .collect();
        let cloud = PointCloud::new(points, d).ffi()?;
        *out = Box::into_raw(Box::new(CidCloud { inner: cloud }));
        Ok(())
    })
}

/// Attaches ground-truth labels; either array may be null.
#[no_mangle]
pub unsafe extern "C" fn cid_cloud_set_labels(
    cloud: *mut CidCloud,
    semantic: *const i32,
    instance: *const i32,
    n: usize,
) -> CidStatus {
    guard(|| {
        let cloud = cloud.as_mut().ok_or_else(|| null("cloud"))?;
        let take = |p: *const i32| (!p.is_null()).then(|| std::slice::from_raw_parts(p, n).to_vec());
        cloud.inner = cloud.inner.clone().with_labels(take(semantic), take(instance)).ffi()?;
        Ok(())
    })
}

/// Reads a PLY or whitespace text scene.
#[no_mangle]
pub unsafe extern "C" fn cid_cloud_read(path: *const c_char, out: *mut *mut CidCloud) -> CidStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cloud = read_point_cloud(Path::new(path), None, None).ffi()?;
        *out = Box::into_raw(Box::new(CidCloud { inner: cloud }));
        Ok(())
    })
}

/// Generates a labelled synthetic scene (`l_shape`, `four_arcs`, `two_planes`
/// or `box_room`). A non-positive `density` selects the scene default.
#[no_mangle]
pub unsafe extern "C" fn cid_cloud_synth(
    scene: *const c_char,
    density: f64,
    rng_seed: u64,
    out: *mut *mut CidCloud,
) -> CidStatus {
    guard(|| {
        let kind: SceneKind = c_str(scene, "scene")?.parse().ffi()?;
        if out.is_null() {
            return Err(null("out"));
        }
        let density = (density > 0.0).then_some(density);
        let cloud = synth_scene(kind, density, rng_seed).ffi()?;
        *out = Box::into_raw(Box::new(CidCloud { inner: cloud }));
        Ok(())
    })
}

/// Number of points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cid_cloud_len(cloud: *const CidCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.inner.len())
}

/// Copies the coordinates of point `i` (always 3 values, z = 0 in 2D).
#[no_mangle]
pub unsafe extern "C" fn cid_cloud_point(cloud: *const CidCloud, i: usize, xyz: *mut f64) -> CidStatus {
    guard(|| {
        let cloud = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        cloud.inner.check_index(i).ffi()?;
        ptr::copy_nonoverlapping(cloud.inner.coords(i).as_ptr(), xyz, 3);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cid_cloud_free(cloud: *mut CidCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cid_index_build(cloud: *const CidCloud, out: *mut *mut CidIndex) -> CidStatus {
    guard(|| {
        let cloud = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(CidIndex {
            inner: SpatialIndex::build(&cloud.inner),
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cid_index_free(index: *mut CidIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Exact distance from `q` to the nearest indexed point.
#[no_mangle]
pub unsafe extern "C" fn cid_point_distance(
    index: *const CidIndex,
    q: *const f64,
    dim: u32,
    out: *mut f64,
) -> CidStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = point_to_set_distance(&point_from(q, dim)?, &index.inner).ffi()?;
        Ok(())
    })
}

/// CID between points `a` and `b` with `m` segment samples.
#[no_mangle]
pub unsafe extern "C" fn cid_p(
    index: *const CidIndex,
    a: *const f64,
    b: *const f64,
    dim: u32,
    m: usize,
    out: *mut f64,
) -> CidStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let disc = SegmentDiscretization::new(m).ffi()?;
        *out = core_cid_p(&point_from(a, dim)?, &point_from(b, dim)?, &index.inner, disc).ffi()?;
        Ok(())
    })
}

/// CID farthest point sampling. Writes `k` point indices, in selection order,
/// into `seeds_out`.
#[no_mangle]
pub unsafe extern "C" fn cid_fps(
    cloud: *const CidCloud,
    index: *const CidIndex,
    k: usize,
    m: usize,
    rng_seed: u64,
    seeds_out: *mut usize,
) -> CidStatus {
    guard(|| {
        let cloud = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        let index = index.as_ref().ok_or_else(|| null("index"))?;
        if seeds_out.is_null() {
            return Err(null("seeds_out"));
        }
        let disc = SegmentDiscretization::new(m).ffi()?;
        let proposal = core_cid_fps(&cloud.inner, &index.inner, k, disc, rng_seed).ffi()?;
        ptr::copy_nonoverlapping(proposal.seed_indices.as_ptr(), seeds_out, k);
        Ok(())
    })
}

/// Ground-truth seeded segmentation. Writes one predicted label pair per
/// point (`n` = cloud length) and `[ap25, ap50, ap75]` into `ap_out`; any
/// output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn cid_segment(
    cloud: *const CidCloud,
    config: *const CidRunConfig,
    semantic_out: *mut i32,
    instance_out: *mut i32,
    ap_out: *mut f64,
) -> CidStatus {
    guard(|| {
        let cloud = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let run = segment(&cloud.inner, &config.to_core()).ffi()?;
        for (i, l) in run.full_labels.iter().enumerate() {
            if !semantic_out.is_null() {
                *semantic_out.add(i) = l.semantic;
            }
            if !instance_out.is_null() {
                *instance_out.add(i) = l.instance;
            }
        }
        if !ap_out.is_null() {
            let m = run
                .ap
                .mean
                .ok_or((CidStatus::InvalidInput, "cloud has no ground-truth instances".into()))?;
            *ap_out = m.ap25;
            *ap_out.add(1) = m.ap50;
            *ap_out.add(2) = m.ap75;
        }
        Ok(())
    })
}

/// Seeds, merges and groups the full cloud. Writes a group id per point into
/// `group_of_out` (may be null), the group count, and the purity (NaN when
/// the cloud has no instance labels).
#[no_mangle]
pub unsafe extern "C" fn cid_abstract(
    cloud: *const CidCloud,
    config: *const CidRunConfig,
    group_of_out: *mut usize,
    group_count_out: *mut usize,
    purity_out: *mut f64,
) -> CidStatus {
    guard(|| {
        let cloud = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let run = abstract_scene(&cloud.inner, &config.to_core()).ffi()?;
        if !group_of_out.is_null() {
            let g = run.full_groups.group_of();
            ptr::copy_nonoverlapping(g.as_ptr(), group_of_out, g.len());
        }
        if !group_count_out.is_null() {
            *group_count_out = run.full_groups.group_count();
        }
        if !purity_out.is_null() {
            *purity_out = run.report.map_or(f64::NAN, |r| r.purity);
        }
        Ok(())
    })
}

/// Segmentation report as JSON. The string must be released with
/// [`cid_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cid_segment_report_json(
    cloud: *const CidCloud,
    config: *const CidRunConfig,
    json_out: *mut *mut c_char,
) -> CidStatus {
    guard(|| {
        let cloud = cloud.as_ref().ok_or_else(|| null("cloud"))?;
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        if json_out.is_null() {
            return Err(null("json_out"));
        }
        let cfg = config.to_core();
        let run = segment(&cloud.inner, &cfg).ffi()?;
        let json = to_json(&SceneReport::new("scene", &cfg).with_ap(&run.ap)).ffi()?;
        *json_out = CString::new(json)
            .map_err(|e| (CidStatus::Serialization, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cid_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
