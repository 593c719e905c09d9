//! C interface to sentimix.
//!
//! Every function returns a [`SentimixStatus`]; on failure a description is
//! kept per thread and can be read with [`sentimix_last_error_message`].
//! Strings returned to the caller are freed with [`sentimix_string_free`],
//! predictors with [`sentimix_predictor_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use sentimix::corpus::SentimentLabel;
use sentimix::features::{FeaturePipeline, FeatureResources, FeatureVector, ResourcePaths};
use sentimix::preprocess::{clean_text, CleanDocument};
use sentimix::svr::{decode_label, encode_label, load_model, SvrModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentimixStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// Model file, resource file or fingerprint problem.
    Model = 4,
    /// Inputs the model cannot score, e.g. non-finite values.
    Data = 5,
    /// A bug: a panic was caught at the boundary.
    Internal = 6,
}

/// A loaded model with its restored feature pipeline.
pub struct SentimixPredictor {
    model: SvrModel<FeatureVector>,
    pipeline: FeaturePipeline,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

type FfiResult<T> = Result<T, (SentimixStatus, String)>;

/// Runs `f`, recording any error or panic as this thread's last error.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> SentimixStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SentimixStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: panic in sentimix");
            SentimixStatus::Internal
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> FfiResult<()> {
    if p.is_null() {
        Err((SentimixStatus::NullArgument, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SentimixStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn read_path(p: *const c_char, name: &str) -> FfiResult<Option<PathBuf>> {
    if p.is_null() {
        Ok(None)
    } else {
        read_str(p, name).map(|s| Some(PathBuf::from(s)))
    }
}

fn model_err(e: impl std::fmt::Display) -> (SentimixStatus, String) {
    (SentimixStatus::Model, e.to_string())
}

fn label_code(label: SentimentLabel) -> i32 {
    encode_label(label) as i32
}

fn label_from_code(code: i32) -> Option<SentimentLabel> {
    match code {
        -1 => Some(SentimentLabel::Negative),
        0 => Some(SentimentLabel::Neutral),
        1 => Some(SentimentLabel::Positive),
        _ => None,
    }
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn sentimix_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sentimix_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a model file. The resource paths must name the same files the
/// model was trained with; pass null for a resource the model did not use.
///
/// # Safety
/// String arguments must be null or valid NUL-terminated strings, and `out`
/// must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sentimix_predictor_open(
    model_path: *const c_char,
    embeddings_path: *const c_char,
    lexicon_dir: *const c_char,
    easy_words_path: *const c_char,
    out: *mut *mut SentimixPredictor,
) -> SentimixStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let model_path = PathBuf::from(read_str(model_path, "model_path")?);
        let paths = ResourcePaths {
            embeddings: read_path(embeddings_path, "embeddings_path")?,
            lexicon_dir: read_path(lexicon_dir, "lexicon_dir")?,
            easy_words: read_path(easy_words_path, "easy_words_path")?,
        };
        let (model, state) = load_model(&model_path).map_err(model_err)?;
        let resources = FeatureResources::load(&paths, state.syllable_threshold).map_err(model_err)?;
        let pipeline = FeaturePipeline::restore(state, resources).map_err(model_err)?;
        *out = Box::into_raw(Box::new(SentimixPredictor { model, pipeline }));
        Ok(())
    })
}

/// Cleans and scores one raw tweet. Writes the regression score to
/// `out_score` and the label (-1 negative, 0 neutral, 1 positive) to
/// `out_label`; either may be null.
///
/// # Safety
/// `predictor` must come from [`sentimix_predictor_open`] and not be freed;
/// `text` must be a valid NUL-terminated string; output pointers must be
/// null or valid.
#[no_mangle]
pub unsafe extern "C" fn sentimix_predict_text(
    predictor: *const SentimixPredictor,
    text: *const c_char,
    out_score: *mut f64,
    out_label: *mut i32,
) -> SentimixStatus {
    guard(|| {
        non_null(predictor, "predictor")?;
        let p = &*predictor;
        let doc = CleanDocument::new("", clean_text(read_str(text, "text")?));
        let data_err = |e: &dyn std::fmt::Display| (SentimixStatus::Data, e.to_string());
        let score = p.model.predict(&p.pipeline.transform(&doc)).map_err(|e| data_err(&e))?;
        let label = decode_label(score).map_err(|e| data_err(&e))?;
        if !out_score.is_null() {
            *out_score = score;
        }
        if !out_label.is_null() {
            *out_label = label_code(label);
        }
        Ok(())
    })
}

/// Releases a predictor. Null is ignored.
///
/// # Safety
/// `predictor` must be null or come from [`sentimix_predictor_open`], and
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sentimix_predictor_free(predictor: *mut SentimixPredictor) {
    if !predictor.is_null() {
        drop(Box::from_raw(predictor));
    }
}

/// Cleans a raw tweet into space-separated lowercase words. The result is
/// written to `out` and must be released with [`sentimix_string_free`].
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sentimix_clean_text(text: *const c_char, out: *mut *mut c_char) -> SentimixStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let words = clean_text(read_str(text, "text")?).join(" ");
        // Input had no interior NUL, and cleaning only removes characters.
        *out = CString::new(words).expect("no interior NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sentimix_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Macro-averaged F1 of `len` predicted labels against gold labels, both
/// coded -1, 0, 1.
///
/// # Safety
/// `gold` and `pred` must point to `len` readable values; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn sentimix_macro_f1(
    gold: *const i32,
    pred: *const i32,
    len: usize,
    out: *mut f64,
) -> SentimixStatus {
    guard(|| {
        non_null(gold, "gold")?;
        non_null(pred, "pred")?;
        non_null(out, "out")?;
        if len == 0 {
            return Err((SentimixStatus::InvalidArgument, "`len` must be at least 1".into()));
        }
        let decode = |codes: &[i32], name: &str| -> FfiResult<Vec<SentimentLabel>> {
            codes
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    label_from_code(c).ok_or_else(|| {
                        (SentimixStatus::InvalidArgument, format!("`{name}[{i}]` is {c}; labels are -1, 0 or 1"))
                    })
                })
                .collect()
        };
        let g = decode(std::slice::from_raw_parts(gold, len), "gold")?;
        let p = decode(std::slice::from_raw_parts(pred, len), "pred")?;
        *out = sentimix::eval::macro_f1(&g, &p).map_err(|e| (SentimixStatus::Data, e.to_string()))?;
        Ok(())
    })
}
