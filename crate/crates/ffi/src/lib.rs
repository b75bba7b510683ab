//! C ABI over atlas-core: parameter handles, JSON classification and visibility records,
//! and parameter-plane rendering.
//!
//! Every fallible call returns an `AtlasStatus`. On failure the message is kept per thread
//! and can be read with `atlas_last_error_message`. Strings handed out by this library must
//! be released with `atlas_string_free`.

use atlas_core::error::AtlasError;
use atlas_core::family::{Family, Parameter, C64};
use atlas_core::orbit::Tier;
use atlas_core::records::{classify_query, visibility_record};
use atlas_core::render::{render_parameter, Rendered, Viewport};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtlasStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDomain = 3,
    NumericalFailure = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtlasFamily {
    Newton = 0,
    Antipodal = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtlasTier {
    Preview = 0,
    Standard = 1,
    Analysis = 2,
}

/// Opaque parameter of one of the two families.
pub struct AtlasParameter(Parameter);

/// Opaque rendered image with its class raster and metadata.
pub struct AtlasImage(Rendered);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: AtlasStatus, msg: impl Into<String>) -> AtlasStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &AtlasError) -> AtlasStatus {
    match e {
        AtlasError::OutsideDomain(_) => AtlasStatus::OutsideDomain,
        AtlasError::InvalidArgument(_) | AtlasError::NonFiniteParameter | AtlasError::DegenerateParameter(_) => {
            AtlasStatus::InvalidArgument
        }
        AtlasError::Io(_) => AtlasStatus::Io,
        _ => AtlasStatus::NumericalFailure,
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's error message.
fn guard(f: impl FnOnce() -> Result<(), AtlasError> + std::panic::UnwindSafe) -> AtlasStatus {
    match std::panic::catch_unwind(f) {
        Ok(Ok(())) => AtlasStatus::Ok,
        Ok(Err(e)) => fail(status_of(&e), e.to_string()),
        Err(_) => fail(AtlasStatus::Panic, "internal panic"),
    }
}

fn family(f: AtlasFamily) -> Family {
    match f {
        AtlasFamily::Newton => Family::NewtonQuartic,
        AtlasFamily::Antipodal => Family::AntipodalCubic,
    }
}

fn tier(t: AtlasTier) -> Tier {
    match t {
        AtlasTier::Preview => Tier::Preview,
        AtlasTier::Standard => Tier::Standard,
        AtlasTier::Analysis => Tier::Analysis,
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Library version as a static NUL-terminated string. Do not free it.
#[no_mangle]
pub extern "C" fn atlas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy of the last error message raised on this thread, or NULL when there is none.
/// Release it with `atlas_string_free`.
#[no_mangle]
pub extern "C" fn atlas_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|c| c.clone().into_raw()).unwrap_or(ptr::null_mut()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn atlas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a parameter handle. Newton parameters outside the region U are accepted here;
/// calls that need the domain report `OutsideDomain`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn atlas_parameter_new(fam: AtlasFamily, re: f64, im: f64, out: *mut *mut AtlasParameter) -> AtlasStatus {
    if out.is_null() {
        return fail(AtlasStatus::NullPointer, "out is null");
    }
    let p = Parameter::new(family(fam), C64::new(re, im));
    if let Err(e) = p.check_finite() {
        return fail(status_of(&e), e.to_string());
    }
    *out = Box::into_raw(Box::new(AtlasParameter(p)));
    AtlasStatus::Ok
}

/// Releases a parameter handle.
///
/// # Safety
/// `p` must be NULL or a handle from `atlas_parameter_new` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn atlas_parameter_free(p: *mut AtlasParameter) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Whether the parameter lies in the family's domain (always 1 for the antipodal family).
///
/// # Safety
/// `p` must be NULL or a live parameter handle.
#[no_mangle]
pub unsafe extern "C" fn atlas_parameter_in_domain(p: *const AtlasParameter) -> i32 {
    match p.as_ref() {
        Some(p) => p.0.in_u as i32,
        None => 0,
    }
}

/// Classification document of the parameter as JSON, same as `atlas classify`.
///
/// # Safety
/// `p` must be a live parameter handle and `out` valid writable storage for one pointer.
/// The string written to `out` must be released with `atlas_string_free`.
#[no_mangle]
pub unsafe extern "C" fn atlas_classify_json(p: *const AtlasParameter, t: AtlasTier, out: *mut *mut c_char) -> AtlasStatus {
    let (Some(p), false) = (p.as_ref(), out.is_null()) else {
        return fail(AtlasStatus::NullPointer, "null argument");
    };
    let param = p.0;
    let mut doc = String::new();
    let st = guard(std::panic::AssertUnwindSafe(|| {
        let q = classify_query(&param, tier(t))?;
        doc = serde_json::to_string(&q).map_err(|e| AtlasError::Io(e.to_string()))?;
        Ok(())
    }));
    if st == AtlasStatus::Ok {
        *out = into_c_string(doc);
    }
    st
}

/// Boundary triple and co-root visibility verdicts as JSON, same as `atlas visibility`.
///
/// # Safety
/// `p` must be a live parameter handle and `out` valid writable storage for one pointer.
/// The string written to `out` must be released with `atlas_string_free`.
#[no_mangle]
pub unsafe extern "C" fn atlas_visibility_json(p: *const AtlasParameter, out: *mut *mut c_char) -> AtlasStatus {
    let (Some(p), false) = (p.as_ref(), out.is_null()) else {
        return fail(AtlasStatus::NullPointer, "null argument");
    };
    let param = p.0;
    let mut doc = String::new();
    let st = guard(std::panic::AssertUnwindSafe(|| {
        let r = visibility_record(&param)?;
        doc = serde_json::to_string(&r).map_err(|e| AtlasError::Io(e.to_string()))?;
        Ok(())
    }));
    if st == AtlasStatus::Ok {
        *out = into_c_string(doc);
    }
    st
}

/// Renders a parameter-plane viewport.
///
/// # Safety
/// `out` must be valid writable storage for one handle pointer. Release the image with
/// `atlas_image_free`.
#[no_mangle]
pub unsafe extern "C" fn atlas_render_parameter(
    fam: AtlasFamily,
    center_re: f64,
    center_im: f64,
    scale: f64,
    width: u32,
    height: u32,
    t: AtlasTier,
    out: *mut *mut AtlasImage,
) -> AtlasStatus {
    if out.is_null() {
        return fail(AtlasStatus::NullPointer, "out is null");
    }
    let mut img = None;
    let st = guard(std::panic::AssertUnwindSafe(|| {
        let vp = Viewport::new(C64::new(center_re, center_im), scale, width as usize, height as usize)?;
        img = Some(render_parameter(family(fam), &vp, tier(t), false)?);
        Ok(())
    }));
    if let Some(r) = img {
        *out = Box::into_raw(Box::new(AtlasImage(r)));
    }
    st
}

/// # Safety
/// `img` must be NULL or a live image handle.
#[no_mangle]
pub unsafe extern "C" fn atlas_image_width(img: *const AtlasImage) -> u32 {
    img.as_ref().map(|i| i.0.meta.viewport.width as u32).unwrap_or(0)
}

/// # Safety
/// `img` must be NULL or a live image handle.
#[no_mangle]
pub unsafe extern "C" fn atlas_image_height(img: *const AtlasImage) -> u32 {
    img.as_ref().map(|i| i.0.meta.viewport.height as u32).unwrap_or(0)
}

/// Borrowed RGBA8 pixels, row-major, 4 * width * height bytes. Valid until the image is freed.
///
/// # Safety
/// `img` must be a live image handle; `len` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn atlas_image_rgba(img: *const AtlasImage, len: *mut usize) -> *const u8 {
    let Some(i) = img.as_ref() else { return ptr::null() };
    if let Some(l) = len.as_mut() {
        *l = i.0.rgba.len();
    }
    i.0.rgba.as_ptr()
}

/// Render metadata as JSON (family, viewport, palette_version, class_histogram, max_period).
///
/// # Safety
/// `img` must be a live image handle. Release the result with `atlas_string_free`.
#[no_mangle]
pub unsafe extern "C" fn atlas_image_meta_json(img: *const AtlasImage) -> *mut c_char {
    match img.as_ref() {
        Some(i) => into_c_string(i.0.meta_json()),
        None => {
            set_error("image is null".into());
            ptr::null_mut()
        }
    }
}

/// Writes the image as PNG to a UTF-8 path.
///
/// # Safety
/// `img` must be a live image handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn atlas_image_write_png(img: *const AtlasImage, path: *const c_char) -> AtlasStatus {
    let (Some(i), false) = (img.as_ref(), path.is_null()) else {
        return fail(AtlasStatus::NullPointer, "null argument");
    };
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return fail(AtlasStatus::InvalidArgument, "path is not UTF-8");
    };
    guard(std::panic::AssertUnwindSafe(|| {
        std::fs::write(path, i.0.png()?)?;
        Ok(())
    }))
}

/// Releases an image handle.
///
/// # Safety
/// `img` must be NULL or a handle from `atlas_render_parameter` that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn atlas_image_free(img: *mut AtlasImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}
