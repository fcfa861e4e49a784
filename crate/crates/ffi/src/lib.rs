//! C ABI over the `airdemand` library.
//!
//! Every function returns an [`AdStatus`]. On failure a message describing the
//! error is available from [`ad_last_error`] on the same thread. Handles are
//! opaque; release them with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use airdemand::dataset::Dataset;
use airdemand::metrics::{self, EvalPair};
use airdemand::model::ModelArtifact;
use airdemand::synth::{self, SynthConfig};
use airdemand::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Domain = 5,
    Panic = 6,
}

/// A loaded or generated dataset.
pub struct AdDataset {
    inner: Dataset,
}

/// A trained model loaded from its JSON artifact.
pub struct AdModel {
    inner: ModelArtifact,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdMetrics {
    pub rmse: f64,
    pub mse: f64,
    pub cc: f64,
    pub si: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(AdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => AdStatus::Io,
            Error::MissingColumn { .. } | Error::BadRow { .. } | Error::Config(_) | Error::Json(_) => {
                AdStatus::Parse
            }
            Error::InvalidArgument(_) | Error::LengthMismatch { .. } | Error::UnknownDam(_) => {
                AdStatus::InvalidArgument
            }
            _ => AdStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AdStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            AdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AdStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Message for the most recent failure on this thread. Empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Aeration coefficient for Froude number `fr`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn ad_kalinske_beta(fr: f64, out: *mut f64) -> AdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = synth::kalinske_beta(fr)?;
        Ok(())
    })
}

/// Reads a CSV dataset.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable. On success `*out` owns a handle for [`ad_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn ad_dataset_load_csv(path: *const c_char, out: *mut *mut AdDataset) -> AdStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let inner = Dataset::load_csv(path)?;
        *out = Box::into_raw(Box::new(AdDataset { inner }));
        Ok(())
    })
}

/// Generates `n` synthetic samples for a named dam preset.
///
/// # Safety
/// As for [`ad_dataset_load_csv`], with `dam` in place of `path`.
#[no_mangle]
pub unsafe extern "C" fn ad_dataset_synth(
    dam: *const c_char,
    n: usize,
    noise_rel: f64,
    seed: u64,
    out: *mut *mut AdDataset,
) -> AdStatus {
    guard(|| {
        let dam = str_arg(dam, "dam")?;
        let out = out_arg(out, "out")?;
        let spec = synth::preset_by_name(dam)?;
        let inner = synth::generate(&spec, &SynthConfig { n, noise_rel, seed })?;
        *out = Box::into_raw(Box::new(AdDataset { inner }));
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ad_dataset_len(ds: *const AdDataset, out: *mut usize) -> AdStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        *out_arg(out, "out")? = ds.inner.len();
        Ok(())
    })
}

/// Reads sample `index` as (flow m³/s, opening %, air velocity m/s).
///
/// # Safety
/// `ds` must be null or a live handle; each out pointer null or writable.
#[no_mangle]
pub unsafe extern "C" fn ad_dataset_get(
    ds: *const AdDataset,
    index: usize,
    flow: *mut f64,
    opening: *mut f64,
    air_velocity: *mut f64,
) -> AdStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let (flow, opening, air_velocity) = (
            out_arg(flow, "flow")?,
            out_arg(opening, "opening")?,
            out_arg(air_velocity, "air_velocity")?,
        );
        let s = ds.inner.samples().get(index).ok_or_else(|| {
            Failure(
                AdStatus::InvalidArgument,
                format!(
                    "index {index} out of range for dataset of {} samples",
                    ds.inner.len()
                ),
            )
        })?;
        *flow = s.flow();
        *opening = s.opening();
        *air_velocity = s.air_velocity();
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a live handle; `path` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ad_dataset_save_csv(ds: *const AdDataset, path: *const c_char) -> AdStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let path = str_arg(path, "path")?;
        ds.inner.save_csv(path)?;
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ad_dataset_free(ds: *mut AdDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Loads a model artifact written by `airdemand train` or `airdemand grid`.
///
/// # Safety
/// As for [`ad_dataset_load_csv`]; release with [`ad_model_free`].
#[no_mangle]
pub unsafe extern "C" fn ad_model_load(path: *const c_char, out: *mut *mut AdModel) -> AdStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let inner = ModelArtifact::load(path)?;
        *out = Box::into_raw(Box::new(AdModel { inner }));
        Ok(())
    })
}

/// Predicts air velocity (m/s) for one operating point.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ad_model_predict(
    model: *const AdModel,
    flow: f64,
    opening: f64,
    out: *mut f64,
) -> AdStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out_arg(out, "out")?;
        *out = model.inner.predict_raw(&[[flow, opening]])?[0];
        Ok(())
    })
}

/// Predicts `n` points; `flow`, `opening` and `out` each hold `n` doubles.
///
/// # Safety
/// Each array pointer must be valid for `n` elements (or null when `n` is 0).
#[no_mangle]
pub unsafe extern "C" fn ad_model_predict_batch(
    model: *const AdModel,
    flow: *const f64,
    opening: *const f64,
    n: usize,
    out: *mut f64,
) -> AdStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let flow = slice_arg(flow, n, "flow")?;
        let opening = slice_arg(opening, n, "opening")?;
        if n > 0 && out.is_null() {
            return Err(null("out"));
        }
        let inputs: Vec<[f64; 2]> = flow.iter().zip(opening).map(|(&q, &o)| [q, o]).collect();
        let pred = model.inner.predict_raw(&inputs)?;
        if n > 0 {
            std::slice::from_raw_parts_mut(out, n).copy_from_slice(&pred);
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ad_model_free(model: *mut AdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// RMSE, MSE, correlation coefficient and scatter index of `predicted`
/// against `observed`.
///
/// # Safety
/// Both arrays must be valid for `n` elements; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ad_metrics(
    observed: *const f64,
    predicted: *const f64,
    n: usize,
    out: *mut AdMetrics,
) -> AdStatus {
    guard(|| {
        let o = slice_arg(observed, n, "observed")?;
        let p = slice_arg(predicted, n, "predicted")?;
        let out = out_arg(out, "out")?;
        let e = EvalPair::new(o.to_vec(), p.to_vec())?;
        *out = AdMetrics {
            rmse: metrics::rmse(&e),
            mse: metrics::mse(&e),
            cc: metrics::cc(&e)?,
            si: metrics::si(&e)?,
        };
        Ok(())
    })
}
