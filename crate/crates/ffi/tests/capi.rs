use atlas_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { atlas_string_free(s) };
    out
}

#[test]
fn classify_through_the_c_api() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(atlas_parameter_new(AtlasFamily::Newton, 0.0, 2.0, &mut p), AtlasStatus::Ok);
        assert_eq!(atlas_parameter_in_domain(p), 1);
        let mut doc = ptr::null_mut();
        assert_eq!(atlas_classify_json(p, AtlasTier::Standard, &mut doc), AtlasStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(doc)).unwrap();
        assert_eq!(v["region"], "InU");
        assert_eq!(v["parameter"], "0,2");
        atlas_parameter_free(p);
    }
}

#[test]
fn outside_parameter_classifies_as_outside_domain() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(atlas_parameter_new(AtlasFamily::Newton, 2.0, 0.0, &mut p), AtlasStatus::Ok);
        assert_eq!(atlas_parameter_in_domain(p), 0);
        let mut doc = ptr::null_mut();
        assert_eq!(atlas_classify_json(p, AtlasTier::Preview, &mut doc), AtlasStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(doc)).unwrap();
        assert_eq!(v["verdict"], "OutsideDomain");
        // the half-return triple needs a parameter in the domain
        let mut vis = ptr::null_mut();
        assert_eq!(atlas_visibility_json(p, &mut vis), AtlasStatus::OutsideDomain);
        assert!(vis.is_null());
        let msg = take_string(atlas_last_error_message());
        assert!(msg.contains("outside"), "{msg}");
        atlas_parameter_free(p);
    }
}

#[test]
fn null_and_non_finite_arguments_are_rejected() {
    unsafe {
        assert_eq!(atlas_parameter_new(AtlasFamily::Newton, 0.0, 2.0, ptr::null_mut()), AtlasStatus::NullPointer);
        let mut p = ptr::null_mut();
        assert_eq!(atlas_parameter_new(AtlasFamily::Antipodal, f64::NAN, 0.0, &mut p), AtlasStatus::InvalidArgument);
        assert!(p.is_null());
        let mut doc = ptr::null_mut();
        assert_eq!(atlas_classify_json(ptr::null(), AtlasTier::Preview, &mut doc), AtlasStatus::NullPointer);
        atlas_parameter_free(ptr::null_mut());
        atlas_image_free(ptr::null_mut());
        atlas_string_free(ptr::null_mut());
    }
}

#[test]
fn render_and_write_png() {
    unsafe {
        let mut img = ptr::null_mut();
        let st = atlas_render_parameter(AtlasFamily::Newton, 0.0, 2.0, 8.0 / 32.0, 32, 24, AtlasTier::Preview, &mut img);
        assert_eq!(st, AtlasStatus::Ok);
        assert_eq!((atlas_image_width(img), atlas_image_height(img)), (32, 24));
        let mut len = 0;
        let px = atlas_image_rgba(img, &mut len);
        assert!(!px.is_null());
        assert_eq!(len, 32 * 24 * 4);
        let meta: serde_json::Value = serde_json::from_str(&take_string(atlas_image_meta_json(img))).unwrap();
        assert_eq!(meta["family"], "newton");
        assert!(meta["class_histogram"].as_object().unwrap().contains_key("outside-domain"));
        let dir = std::env::temp_dir().join(format!("atlas-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.png");
        let cpath = CString::new(path.to_str().unwrap()).unwrap();
        assert_eq!(atlas_image_write_png(img, cpath.as_ptr()), AtlasStatus::Ok);
        assert_eq!(&std::fs::read(&path).unwrap()[1..4], b"PNG");
        atlas_image_free(img);
        std::fs::remove_dir_all(dir).unwrap();

        let mut bad = ptr::null_mut();
        let st = atlas_render_parameter(AtlasFamily::Newton, 0.0, 2.0, -1.0, 8, 8, AtlasTier::Preview, &mut bad);
        assert_eq!(st, AtlasStatus::InvalidArgument);
        assert!(bad.is_null());
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/atlas.h")).unwrap();
    for name in [
        "atlas_parameter_new",
        "atlas_classify_json",
        "atlas_visibility_json",
        "atlas_render_parameter",
        "atlas_string_free",
        "atlas_last_error_message",
        "typedef struct AtlasParameter AtlasParameter",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
    let v = unsafe { CStr::from_ptr(atlas_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
