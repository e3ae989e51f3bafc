//! C ABI over the phosphene engine.
//!
//! Layouts and mask archives are opaque handles created and released by
//! this library. Images cross the boundary as row-major `double` buffers in
//! [0, 1] owned by the caller. Every fallible call returns a [`PvStatus`];
//! on failure, [`pv_last_error_message`] describes the error for the calling
//! thread. Panics never unwind into C and are reported as `PV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use phosphene::analysis::gaze_entropy;
use phosphene::imaging::{canny_edges, EdgeParams, GrayFrame};
use phosphene::maskstore::{compose_gcss, decode_archive, load_archive, GazePoint, MaskArchive, SelectionPolicy};
use phosphene::simulator::{render_frame, sample_layout, ElectrodeLayout, SimParams};
use phosphene::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed mask archive.
    Format = 3,
    Io = 4,
    /// A metric is undefined for the input, e.g. an empty gaze trace.
    UndefinedMetric = 5,
    /// The output buffer is too small; the required size was still written.
    BufferTooSmall = 6,
    Panic = 7,
    Internal = 8,
}

/// Values accepted by the `policy` argument of [`pv_render_gcss`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvSelectionPolicy {
    /// Highlight every mask under the gaze point.
    Union = 0,
    /// Highlight only the smallest mask under the gaze point.
    SmallestArea = 1,
}

/// Simulation parameters; see [`pv_sim_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvSimParams {
    pub n_electrodes: u32,
    pub field_radius_deg: f64,
    pub pulse_freq_hz: f64,
    pub current_ua: f64,
    /// Nonzero enables the activation threshold.
    pub thresholding: u8,
    pub threshold_ua: f64,
    pub magnification_a_deg: f64,
    pub magnification_k_mm: f64,
    pub excitability_ua_mm2: f64,
    pub output_size: u32,
}

impl From<&SimParams> for PvSimParams {
    fn from(p: &SimParams) -> Self {
        Self {
            n_electrodes: u32::try_from(p.n_electrodes).unwrap_or(u32::MAX),
            field_radius_deg: p.field_radius_deg,
            pulse_freq_hz: p.pulse_freq_hz,
            current_ua: p.current_ua,
            thresholding: u8::from(p.thresholding),
            threshold_ua: p.threshold_ua,
            magnification_a_deg: p.magnification_a_deg,
            magnification_k_mm: p.magnification_k_mm,
            excitability_ua_mm2: p.excitability_ua_mm2,
            output_size: p.output_size,
        }
    }
}

impl From<&PvSimParams> for SimParams {
    fn from(p: &PvSimParams) -> Self {
        Self {
            n_electrodes: p.n_electrodes as usize,
            field_radius_deg: p.field_radius_deg,
            pulse_freq_hz: p.pulse_freq_hz,
            current_ua: p.current_ua,
            thresholding: p.thresholding != 0,
            threshold_ua: p.threshold_ua,
            magnification_a_deg: p.magnification_a_deg,
            magnification_k_mm: p.magnification_k_mm,
            excitability_ua_mm2: p.excitability_ua_mm2,
            output_size: p.output_size,
        }
    }
}

/// Electrode layout handle.
pub struct PvLayout(ElectrodeLayout);

/// Mask archive handle.
pub struct PvArchive(MaskArchive);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(PvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) | Error::Json(_) => PvStatus::InvalidArgument,
            Error::Format(_) => PvStatus::Format,
            Error::Io { .. } | Error::Image(_) => PvStatus::Io,
            Error::UndefinedMetric(_) => PvStatus::UndefinedMetric,
            _ => PvStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: PvStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PvStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PvStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer to a live `T`.
    unsafe { p.as_ref() }.ok_or_else(|| fail(PvStatus::NullPointer, format!("{name} is null")))
}

fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass either null or a pointer to writable storage for a `T`.
    unsafe { p.as_mut() }.ok_or_else(|| fail(PvStatus::NullPointer, format!("{name} is null")))
}

fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(PvStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(PvStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: the caller guarantees `len` writable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

fn pixel_count(width: u32, height: u32) -> Result<usize, Failure> {
    (width as usize)
        .checked_mul(height as usize)
        .filter(|n| *n > 0)
        .ok_or_else(|| fail(PvStatus::InvalidArgument, format!("bad image size {width}x{height}")))
}

fn gray(data: *const f64, width: u32, height: u32) -> Result<GrayFrame, Failure> {
    let n = pixel_count(width, height)?;
    Ok(GrayFrame::from_vec(width, height, slice(data, n, "image")?.to_vec())?)
}

fn write_frame(frame: &GrayFrame, out: *mut f64) -> Result<(), Failure> {
    slice_mut(out, frame.data().len(), "out")?.copy_from_slice(frame.data());
    Ok(())
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the default simulation parameters to `out`.
///
/// # Safety
/// `out` must be null or point to writable storage for a `PvSimParams`.
#[no_mangle]
pub unsafe extern "C" fn pv_sim_params_default(out: *mut PvSimParams) -> PvStatus {
    guard(|| {
        *out_ptr(out, "out")? = PvSimParams::from(&SimParams::default());
        Ok(())
    })
}

/// Samples an electrode layout. Release it with [`pv_layout_free`].
///
/// # Safety
/// `params` must be null or point to a `PvSimParams`; `out` must be null or
/// point to writable storage for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_layout_sample(params: *const PvSimParams, seed: u64, out: *mut *mut PvLayout) -> PvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let layout = sample_layout(&SimParams::from(non_null(params, "params")?), seed)?;
        *out = Box::into_raw(Box::new(PvLayout(layout)));
        Ok(())
    })
}

/// Number of electrodes in a layout, or 0 for null.
///
/// # Safety
/// `layout` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pv_layout_len(layout: *const PvLayout) -> usize {
    // SAFETY: null or a live handle, per the contract above.
    unsafe { layout.as_ref() }.map_or(0, |l| l.0.centers.len())
}

/// Copies electrode `i`'s visual-field position in degrees (y up).
///
/// # Safety
/// `layout` must be null or a live handle; `x_deg` and `y_deg` must be null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn pv_layout_electrode(layout: *const PvLayout, i: usize, x_deg: *mut f64, y_deg: *mut f64) -> PvStatus {
    guard(|| {
        let l = non_null(layout, "layout")?;
        let c = l.0.centers.get(i).ok_or_else(|| {
            fail(PvStatus::InvalidArgument, format!("electrode {i} out of range ({} electrodes)", l.0.centers.len()))
        })?;
        *out_ptr(x_deg, "x_deg")? = c.x_deg;
        *out_ptr(y_deg, "y_deg")? = c.y_deg;
        Ok(())
    })
}

/// Releases a layout. Null is ignored.
///
/// # Safety
/// `layout` must be null or a handle from [`pv_layout_sample`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pv_layout_free(layout: *mut PvLayout) {
    if !layout.is_null() {
        // SAFETY: created by Box::into_raw in pv_layout_sample and freed once.
        drop(unsafe { Box::from_raw(layout) });
    }
}

/// Loads a PMSK archive from a file. Release it with [`pv_archive_free`].
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pv_archive_load(path: *const c_char, out: *mut *mut PvArchive) -> PvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if path.is_null() {
            return Err(fail(PvStatus::NullPointer, "path is null"));
        }
        // SAFETY: non-null and NUL-terminated per the contract above.
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| fail(PvStatus::InvalidArgument, "path is not UTF-8"))?;
        *out = Box::into_raw(Box::new(PvArchive(load_archive(Path::new(path))?)));
        Ok(())
    })
}

/// Decodes a PMSK archive held in memory. `image_id` may be null.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `image_id` must be null or
/// NUL-terminated; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pv_archive_decode(
    bytes: *const u8,
    len: usize,
    image_id: *const c_char,
    out: *mut *mut PvArchive,
) -> PvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let data = slice(bytes, len, "bytes")?;
        let id = if image_id.is_null() {
            String::new()
        } else {
            // SAFETY: non-null and NUL-terminated per the contract above.
            unsafe { CStr::from_ptr(image_id) }.to_string_lossy().into_owned()
        };
        let archive = decode_archive(data, &id).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(PvArchive(archive)));
        Ok(())
    })
}

/// Writes the archive's frame size.
///
/// # Safety
/// `archive` must be null or a live handle; `width` and `height` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn pv_archive_size(archive: *const PvArchive, width: *mut u32, height: *mut u32) -> PvStatus {
    guard(|| {
        let a = non_null(archive, "archive")?;
        *out_ptr(width, "width")? = a.0.width();
        *out_ptr(height, "height")? = a.0.height();
        Ok(())
    })
}

/// Number of masks in an archive, or 0 for null.
///
/// # Safety
/// `archive` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pv_archive_mask_count(archive: *const PvArchive) -> usize {
    // SAFETY: null or a live handle, per the contract above.
    unsafe { archive.as_ref() }.map_or(0, |a| a.0.masks().len())
}

/// Ids of the masks covering pixel (x, y), in archive order. Writes up to
/// `capacity` ids to `ids` and the total to `count`; returns
/// `PV_STATUS_BUFFER_TOO_SMALL` when the total exceeds `capacity`.
///
/// # Safety
/// `archive` must be null or a live handle; `ids` must hold `capacity`
/// writable elements (or be null with `capacity` 0); `count` must be null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn pv_archive_masks_at(
    archive: *const PvArchive,
    x: f64,
    y: f64,
    ids: *mut u32,
    capacity: usize,
    count: *mut usize,
) -> PvStatus {
    guard(|| {
        let a = non_null(archive, "archive")?;
        let count = out_ptr(count, "count")?;
        let found = a.0.masks_at(&GazePoint::new(x, y));
        *count = found.len();
        let n = found.len().min(capacity);
        slice_mut(ids, n, "ids")?.copy_from_slice(&found[..n]);
        if found.len() > capacity {
            return Err(fail(PvStatus::BufferTooSmall, format!("{} ids found, capacity {capacity}", found.len())));
        }
        Ok(())
    })
}

/// Releases an archive. Null is ignored.
///
/// # Safety
/// `archive` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pv_archive_free(archive: *mut PvArchive) {
    if !archive.is_null() {
        // SAFETY: created by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(archive) });
    }
}

/// Canny edge map of a `width` x `height` grayscale image. `out` receives
/// `width * height` values, 1 on edges and 0 elsewhere.
///
/// # Safety
/// `image` must hold `width * height` readable values and `out` as many
/// writable ones.
#[no_mangle]
pub unsafe extern "C" fn pv_canny(
    image: *const f64,
    width: u32,
    height: u32,
    low_threshold: f64,
    high_threshold: f64,
    gaussian_sigma: f64,
    out: *mut f64,
) -> PvStatus {
    guard(|| {
        let p = EdgeParams { low_threshold, high_threshold, gaussian_sigma };
        write_frame(&canny_edges(&gray(image, width, height)?, &p)?, out)
    })
}

/// Renders the phosphene percept of a grayscale stimulus for a gaze point
/// in stimulus pixels. `out` receives `output_size * output_size` values.
///
/// # Safety
/// `layout` and `params` must be null or valid; `stimulus` must hold
/// `width * height` readable values; `out` must hold `output_size²`
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn pv_render_frame(
    layout: *const PvLayout,
    params: *const PvSimParams,
    stimulus: *const f64,
    width: u32,
    height: u32,
    gaze_x: f64,
    gaze_y: f64,
    out: *mut f64,
) -> PvStatus {
    guard(|| {
        let layout = non_null(layout, "layout")?;
        let p = SimParams::from(non_null(params, "params")?);
        let s = gray(stimulus, width, height)?;
        write_frame(&render_frame(&s, &GazePoint::new(gaze_x, gaze_y), &layout.0, &p)?, out)
    })
}

/// Composes the object-highlighting stimulus for a gaze point (masks under
/// the gaze at full brightness over edges scaled by `edge_gain`) and
/// renders it. `edges` may be null for a mask-only stimulus; otherwise it
/// holds one value per archive pixel. `policy` is a [`PvSelectionPolicy`].
///
/// # Safety
/// Handles and `params` must be null or valid; `edges` must be null or hold
/// the archive's pixel count; `out` must hold `output_size²` values.
#[no_mangle]
pub unsafe extern "C" fn pv_render_gcss(
    layout: *const PvLayout,
    params: *const PvSimParams,
    archive: *const PvArchive,
    edges: *const f64,
    gaze_x: f64,
    gaze_y: f64,
    edge_gain: f64,
    policy: i32,
    out: *mut f64,
) -> PvStatus {
    guard(|| {
        let layout = non_null(layout, "layout")?;
        let p = SimParams::from(non_null(params, "params")?);
        let a = &non_null(archive, "archive")?.0;
        let policy = match policy {
            x if x == PvSelectionPolicy::Union as i32 => SelectionPolicy::Union,
            x if x == PvSelectionPolicy::SmallestArea as i32 => SelectionPolicy::SmallestArea,
            other => return Err(fail(PvStatus::InvalidArgument, format!("unknown selection policy {other}"))),
        };
        let e = if edges.is_null() { GrayFrame::zeros(a.width(), a.height())? } else { gray(edges, a.width(), a.height())? };
        let g = GazePoint::new(gaze_x, gaze_y);
        let stimulus = compose_gcss(a, &g, &e, edge_gain, policy)?;
        write_frame(&render_frame(&stimulus, &g, &layout.0, &p)?, out)
    })
}

/// Shannon entropy in bits of `n` gaze samples, given as interleaved
/// (x, y) pixel pairs, binned on a `grid_size` square grid over the frame.
///
/// # Safety
/// `xy` must hold `2 * n` readable values; `bits` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn pv_gaze_entropy(
    xy: *const f64,
    n: usize,
    width: u32,
    height: u32,
    grid_size: u32,
    bits: *mut f64,
) -> PvStatus {
    guard(|| {
        let bits = out_ptr(bits, "bits")?;
        let len = n.checked_mul(2).ok_or_else(|| fail(PvStatus::InvalidArgument, "sample count overflows"))?;
        let trace: Vec<GazePoint> = slice(xy, len, "xy")?.chunks_exact(2).map(|c| GazePoint::new(c[0], c[1])).collect();
        *bits = gaze_entropy(&trace, width, height, grid_size as usize)?.entropy_bits;
        Ok(())
    })
}
