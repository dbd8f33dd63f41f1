//! C interface to crimescope.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns a
//! [`CrimescopeStatus`]; on failure a description is kept per thread and can be
//! read with [`crimescope_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use crimescope::harness::{self, ExperimentConfig, MaskSpec};
use crimescope::imaging::{dft2_centered, idft2_centered, ComplexImage, KSpace};
use crimescope::metrics::{nrmse_with, ssim, NrmseNorm};
use crimescope::pipelines::jpeg_codec;
use crimescope::sampling::{effective_rate, SamplingMask, SamplingScheme, SchemeKind};
use crimescope::solvers::{cs_fista, dictl_reconstruct, CsParams, DictlParams};
use crimescope::Error;
use ndarray::Array2;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrimescopeStatus {
    Ok = 0,
    InvalidInput = 1,
    InvalidArgument = 2,
    InfeasibleRate = 3,
    UndefinedMetric = 4,
    Config = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
    Other = 9,
}

/// Sampling scheme selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrimescopeScheme {
    Uniform = 0,
    WeakVd = 1,
    StrongVd = 2,
}

/// Complex image.
pub struct CrimescopeImage(ComplexImage);

/// Centred k-space.
pub struct CrimescopeKSpace(KSpace);

/// Boolean sampling mask.
pub struct CrimescopeMask(SamplingMask);

/// Dictionary-learning settings; obtain defaults from
/// [`crimescope_dictl_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CrimescopeDictlParams {
    pub atoms: usize,
    pub sparsity: usize,
    pub lambda_d: f64,
    pub block: usize,
    pub n_iter: usize,
    /// 0 selects the default training-set size.
    pub train_patches: usize,
    pub stride: usize,
    pub ksvd_sweeps: usize,
    pub subtract_mean: bool,
    pub seed: u64,
}

impl From<CrimescopeDictlParams> for DictlParams {
    fn from(p: CrimescopeDictlParams) -> Self {
        DictlParams {
            atoms: p.atoms,
            sparsity: p.sparsity,
            lambda_d: p.lambda_d,
            block: p.block,
            n_iter: p.n_iter,
            train_patches: p.train_patches,
            stride: p.stride,
            ksvd_sweeps: p.ksvd_sweeps,
            subtract_mean: p.subtract_mean,
            seed: p.seed,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CrimescopeStatus {
    match e {
        Error::InvalidInput(_) => CrimescopeStatus::InvalidInput,
        Error::InvalidArgument(_) => CrimescopeStatus::InvalidArgument,
        Error::InfeasibleRate { .. } => CrimescopeStatus::InfeasibleRate,
        Error::UndefinedMetric(_) => CrimescopeStatus::UndefinedMetric,
        Error::Config(_) => CrimescopeStatus::Config,
        Error::Io(_) | Error::Ingest { .. } => CrimescopeStatus::Io,
        Error::Case { source, .. } => status_of(source),
        _ => CrimescopeStatus::Other,
    }
}

struct Failure(CrimescopeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CrimescopeStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CrimescopeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CrimescopeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            CrimescopeStatus::Panic
        }
    }
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn checked_len(h: usize, w: usize) -> Result<usize, Failure> {
    h.checked_mul(w)
        .ok_or_else(|| Failure(CrimescopeStatus::InvalidArgument, format!("{h} x {w} overflows")))
}

fn bad_len(what: &str, got: usize, want: usize) -> Failure {
    Failure(CrimescopeStatus::InvalidArgument, format!("{what} has length {got}, expected {want}"))
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn crimescope_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crimescope_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a real image from `h * w` row-major values.
///
/// # Safety
/// `data` must point to `h * w` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn crimescope_image_from_real(
    data: *const f64,
    h: usize,
    w: usize,
    out: *mut *mut CrimescopeImage,
) -> CrimescopeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let n = checked_len(h, w)?;
        let v = slice(data, n, "data")?;
        let arr = Array2::from_shape_vec((h, w), v.to_vec()).map_err(|e| Failure(CrimescopeStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(CrimescopeImage(ComplexImage::from_real(&arr)?)));
        Ok(())
    })
}

/// Builds a complex image from `2 * h * w` interleaved (re, im) values.
///
/// # Safety
/// `data` must point to `2 * h * w` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn crimescope_image_from_complex(
    data: *const f64,
    h: usize,
    w: usize,
    out: *mut *mut CrimescopeImage,
) -> CrimescopeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let n = checked_len(h, w)?;
        let v = slice(data, 2 * n, "data")?;
        let vals: Vec<Complex64> = v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let arr = Array2::from_shape_vec((h, w), vals).map_err(|e| Failure(CrimescopeStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(CrimescopeImage(ComplexImage::new(arr)?)));
        Ok(())
    })
}

/// Writes the image height and width.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_image_shape(img: *const CrimescopeImage, h: *mut usize, w: *mut usize) -> CrimescopeStatus {
    guard(|| {
        let (ih, iw) = in_ref(img, "img")?.0.shape();
        *out_ptr(h, "h")? = ih;
        *out_ptr(w, "w")? = iw;
        Ok(())
    })
}

/// Copies `|img|` into `out` (`len` must equal `h * w`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn crimescope_image_magnitude(img: *const CrimescopeImage, out: *mut f64, len: usize) -> CrimescopeStatus {
    guard(|| {
        let img = &in_ref(img, "img")?.0;
        if len != img.len() {
            return Err(bad_len("out", len, img.len()));
        }
        let out = slice_mut(out, len, "out")?;
        for (o, v) in out.iter_mut().zip(img.data().iter()) {
            *o = v.norm();
        }
        Ok(())
    })
}

/// Copies the image as interleaved (re, im) pairs (`len` must equal
/// `2 * h * w`).
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn crimescope_image_copy(img: *const CrimescopeImage, out: *mut f64, len: usize) -> CrimescopeStatus {
    guard(|| {
        let img = &in_ref(img, "img")?.0;
        if len != 2 * img.len() {
            return Err(bad_len("out", len, 2 * img.len()));
        }
        let out = slice_mut(out, len, "out")?;
        for (o, v) in out.chunks_exact_mut(2).zip(img.data().iter()) {
            o[0] = v.re;
            o[1] = v.im;
        }
        Ok(())
    })
}

/// Releases an image; null is ignored.
///
/// # Safety
/// `img` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn crimescope_image_free(img: *mut CrimescopeImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Centred unitary forward DFT.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_dft2(img: *const CrimescopeImage, out: *mut *mut CrimescopeKSpace) -> CrimescopeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let k = dft2_centered(&in_ref(img, "img")?.0)?;
        *out = Box::into_raw(Box::new(CrimescopeKSpace(k)));
        Ok(())
    })
}

/// Centred unitary inverse DFT.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_idft2(k: *const CrimescopeKSpace, out: *mut *mut CrimescopeImage) -> CrimescopeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let img = idft2_centered(&in_ref(k, "k")?.0)?;
        *out = Box::into_raw(Box::new(CrimescopeImage(img)));
        Ok(())
    })
}

/// Releases k-space; null is ignored.
///
/// # Safety
/// `k` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn crimescope_kspace_free(k: *mut CrimescopeKSpace) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Draws a mask over an `h x w` grid at rate `1 / acceleration`, with a fully
/// sampled central `calib_h x calib_w` block. `power` 0 selects the scheme's
/// default.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn crimescope_mask_draw(
    h: usize,
    w: usize,
    scheme: CrimescopeScheme,
    acceleration: f64,
    power: u32,
    calib_h: usize,
    calib_w: usize,
    seed: u64,
    out: *mut *mut CrimescopeMask,
) -> CrimescopeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if !(acceleration >= 1.0) {
            return Err(Failure(CrimescopeStatus::InvalidArgument, format!("acceleration must be >= 1, got {acceleration}")));
        }
        let kind = match scheme {
            CrimescopeScheme::Uniform => SchemeKind::Uniform,
            CrimescopeScheme::WeakVd => SchemeKind::WeakVd,
            CrimescopeScheme::StrongVd => SchemeKind::StrongVd,
        };
        let mut s = SamplingScheme::for_kind(kind, acceleration);
        if power > 0 {
            s.power = power;
        }
        let spec = MaskSpec { scheme: s, acceleration, calibration: (calib_h, calib_w), master_seed: seed };
        let pdf = spec.pdf((h, w))?;
        *out = Box::into_raw(Box::new(CrimescopeMask(crimescope::sampling::draw_mask(&pdf, seed))));
        Ok(())
    })
}

/// Fraction of sampled entries.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_mask_realized_rate(mask: *const CrimescopeMask, rate: *mut f64) -> CrimescopeStatus {
    guard(|| {
        *out_ptr(rate, "rate")? = in_ref(mask, "mask")?.0.realized_rate();
        Ok(())
    })
}

/// Sampled fraction of the central `h x w` region of the mask.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_mask_effective_rate(
    mask: *const CrimescopeMask,
    h: usize,
    w: usize,
    rate: *mut f64,
) -> CrimescopeStatus {
    guard(|| {
        let r = effective_rate(&in_ref(mask, "mask")?.0, (h, w))?;
        *out_ptr(rate, "rate")? = r;
        Ok(())
    })
}

/// Copies the mask as 0/1 bytes, row-major.
///
/// # Safety
/// `out` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn crimescope_mask_copy(mask: *const CrimescopeMask, out: *mut u8, len: usize) -> CrimescopeStatus {
    guard(|| {
        let m = in_ref(mask, "mask")?.0.mask();
        if len != m.len() {
            return Err(bad_len("out", len, m.len()));
        }
        for (o, &b) in slice_mut(out, len, "out")?.iter_mut().zip(m.iter()) {
            *o = b as u8;
        }
        Ok(())
    })
}

/// Releases a mask; null is ignored.
///
/// # Safety
/// `mask` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn crimescope_mask_free(mask: *mut CrimescopeMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// ℓ1-wavelet compressed-sensing reconstruction (db4, 4 levels). `max_iters`
/// 0 selects the default.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_reconstruct_cs(
    k: *const CrimescopeKSpace,
    mask: *const CrimescopeMask,
    lambda: f64,
    max_iters: usize,
    out: *mut *mut CrimescopeImage,
) -> CrimescopeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mut p = CsParams::with_lambda(lambda);
        if max_iters > 0 {
            p.max_iters = max_iters;
        }
        let img = cs_fista(&in_ref(k, "k")?.0, &in_ref(mask, "mask")?.0, &p)?;
        *out = Box::into_raw(Box::new(CrimescopeImage(img)));
        Ok(())
    })
}

/// Default dictionary-learning settings.
#[no_mangle]
pub extern "C" fn crimescope_dictl_params_default() -> CrimescopeDictlParams {
    let d = DictlParams::default();
    CrimescopeDictlParams {
        atoms: d.atoms,
        sparsity: d.sparsity,
        lambda_d: d.lambda_d,
        block: d.block,
        n_iter: d.n_iter,
        train_patches: d.train_patches,
        stride: d.stride,
        ksvd_sweeps: d.ksvd_sweeps,
        subtract_mean: d.subtract_mean,
        seed: d.seed,
    }
}

/// Dictionary-learning reconstruction.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_reconstruct_dictl(
    k: *const CrimescopeKSpace,
    mask: *const CrimescopeMask,
    params: *const CrimescopeDictlParams,
    out: *mut *mut CrimescopeImage,
) -> CrimescopeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let p: DictlParams = (*in_ref(params, "params")?).into();
        let img = dictl_reconstruct(&in_ref(k, "k")?.0, &in_ref(mask, "mask")?.0, &p)?;
        *out = Box::into_raw(Box::new(CrimescopeImage(img)));
        Ok(())
    })
}

/// Range-normalised NRMSE of `est` against `reference` (magnitudes).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_nrmse(
    reference: *const CrimescopeImage,
    est: *const CrimescopeImage,
    out: *mut f64,
) -> CrimescopeStatus {
    guard(|| {
        let v = nrmse_with(&in_ref(reference, "reference")?.0, &in_ref(est, "est")?.0, NrmseNorm::Range)?;
        *out_ptr(out, "out")? = v;
        Ok(())
    })
}

/// Mean SSIM of `est` against `reference` (magnitudes).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn crimescope_ssim(
    reference: *const CrimescopeImage,
    est: *const CrimescopeImage,
    out: *mut f64,
) -> CrimescopeStatus {
    guard(|| {
        let v = ssim(&in_ref(reference, "reference")?.0, &in_ref(est, "est")?.0)?;
        *out_ptr(out, "out")? = v;
        Ok(())
    })
}

/// JPEG round trip of an 8-bit greyscale image at quality `qf` (1 to 100).
///
/// # Safety
/// `pixels` and `out` must each hold `h * w` bytes.
#[no_mangle]
pub unsafe extern "C" fn crimescope_jpeg_roundtrip(
    pixels: *const u8,
    h: usize,
    w: usize,
    qf: u8,
    out: *mut u8,
) -> CrimescopeStatus {
    guard(|| {
        let n = checked_len(h, w)?;
        let src = slice(pixels, n, "pixels")?;
        let img = Array2::from_shape_vec((h, w), src.to_vec()).map_err(|e| Failure(CrimescopeStatus::InvalidArgument, e.to_string()))?;
        let dec = jpeg_codec(&img, qf)?;
        slice_mut(out, n, "out")?.copy_from_slice(dec.as_slice().expect("standard layout"));
        Ok(())
    })
}

/// Runs the experiment described by a TOML file and writes its report.
/// `out_dir` may be null to keep the configured directory; `jobs` 0 uses all
/// cores.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn crimescope_run_experiment(
    config_path: *const c_char,
    out_dir: *const c_char,
    jobs: usize,
) -> CrimescopeStatus {
    guard(|| {
        let path = CStr::from_ptr(in_ref(config_path, "config_path")?).to_string_lossy().into_owned();
        let mut config = ExperimentConfig::from_file(&PathBuf::from(path))?;
        if !out_dir.is_null() {
            config.output_dir = PathBuf::from(CStr::from_ptr(out_dir).to_string_lossy().into_owned());
        }
        let outcome = harness::run_experiment(&config, (jobs > 0).then_some(jobs))?;
        harness::report(&outcome, &config.output_dir)?;
        Ok(())
    })
}
