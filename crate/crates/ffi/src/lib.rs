//! C ABI over `relu_atlas`.
//!
//! Objects are opaque handles created by `ra_*_new`/`ra_*_from_*` functions
//! and released with the matching `ra_*_free`. Fallible calls return a
//! [`RaStatus`]; the message for the most recent failure on the calling
//! thread is available from [`ra_last_error_message`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use relu_atlas::enumerate::{enumerate_brute, enumerate_traverse};
use relu_atlas::metric::hamming_matrix;
use relu_atlas::persistence::barcodes;
use relu_atlas::{
    Barcode, BitVector, BoxRegion, DecompositionAtlas, DistanceMatrix, EnumerateOptions, Error, NetworkSpec,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Infeasible = 4,
    ResourceCap = 5,
    Io = 6,
    Internal = 7,
}

/// Enumeration strategy for [`ra_enumerate`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RaMode {
    Brute = 0,
    Traverse = 1,
}

pub struct RaNetwork {
    inner: NetworkSpec,
}

pub struct RaAtlas {
    inner: DecompositionAtlas,
    bits: Vec<BitVector>,
}

pub struct RaDistanceMatrix {
    inner: DistanceMatrix,
}

pub struct RaBarcode {
    inner: Barcode,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(e: &Error) -> RaStatus {
    match e {
        Error::InvalidArgument(_) => RaStatus::InvalidArgument,
        Error::Parse(_)
        | Error::ParseLine { .. }
        | Error::LayerDimension { .. }
        | Error::NonFinite { .. }
        | Error::Dimension { .. }
        | Error::Json(_) => RaStatus::Parse,
        Error::Infeasible
        | Error::Degenerate { .. }
        | Error::OnBoundary { .. }
        | Error::Seed(_)
        | Error::IterationLimit(_) => RaStatus::Infeasible,
        Error::ResourceCap(_) => RaStatus::ResourceCap,
        Error::Io(_) => RaStatus::Io,
        Error::RegionFailure { source, .. } => status_of(source),
        Error::Consistency(_) => RaStatus::Internal,
    }
}

/// Runs `body`, turning errors and panics into a status plus last-error text.
fn guard(body: impl FnOnce() -> Result<(), (RaStatus, String)>) -> RaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RaStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside relu_atlas".into());
            RaStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (RaStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RaStatus, String) {
    (RaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RaStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (RaStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (RaStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RaStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (RaStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ra_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ra_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a network from its JSON description.
#[no_mangle]
pub unsafe extern "C" fn ra_network_from_json(json: *const c_char, out: *mut *mut RaNetwork) -> RaStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let inner = NetworkSpec::from_json_str(text).map_err(lib_err)?;
        store(out, RaNetwork { inner })
    })
}

#[no_mangle]
pub unsafe extern "C" fn ra_network_free(net: *mut RaNetwork) {
    free(net)
}

/// Input dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ra_network_input_dim(net: *const RaNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.input_dim())
}

/// Total number of hidden nodes, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ra_network_hidden_count(net: *const RaNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.hidden_count())
}

/// Network output at `x` (length `input_dim`) into `out` (length `output_dim`).
#[no_mangle]
pub unsafe extern "C" fn ra_network_forward(
    net: *const RaNetwork,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> RaStatus {
    guard(|| {
        let net = &handle(net, "network")?.inner;
        let x = slice_arg(x, x_len, "x")?;
        let pass = net.forward(x).map_err(lib_err)?;
        if out_len != pass.output.len() || out.is_null() {
            return Err((RaStatus::InvalidArgument, format!("output buffer must hold {} values", pass.output.len())));
        }
        slice::from_raw_parts_mut(out, out_len).copy_from_slice(&pass.output);
        Ok(())
    })
}

/// Activation pattern of `x`: one byte (0 or 1) per hidden node into `bits`.
#[no_mangle]
pub unsafe extern "C" fn ra_network_bit_vector(
    net: *const RaNetwork,
    x: *const f64,
    x_len: usize,
    bits: *mut u8,
    bits_len: usize,
) -> RaStatus {
    guard(|| {
        let net = &handle(net, "network")?.inner;
        let x = slice_arg(x, x_len, "x")?;
        let b = net.bit_vector(x).map_err(lib_err)?;
        if bits_len != b.len() || bits.is_null() {
            return Err((RaStatus::InvalidArgument, format!("bit buffer must hold {} bytes", b.len())));
        }
        for (slot, bit) in slice::from_raw_parts_mut(bits, bits_len).iter_mut().zip(b.iter()) {
            *slot = u8::from(bit);
        }
        Ok(())
    })
}

/// Enumerates all regions. `lower`/`upper` (length `box_dim`) bound the input
/// box; pass `box_dim == 0` for the whole space. `seed` (length `seed_len`)
/// is the traversal start and may be empty for the box center or origin.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ra_enumerate(
    net: *const RaNetwork,
    mode: RaMode,
    lower: *const f64,
    upper: *const f64,
    box_dim: usize,
    seed: *const f64,
    seed_len: usize,
    rng_seed: u64,
    out: *mut *mut RaAtlas,
) -> RaStatus {
    guard(|| {
        let net = &handle(net, "network")?.inner;
        let bounds = if box_dim == 0 {
            None
        } else {
            let l = slice_arg(lower, box_dim, "lower")?.to_vec();
            let u = slice_arg(upper, box_dim, "upper")?.to_vec();
            Some(BoxRegion::new(l, u).map_err(lib_err)?)
        };
        let opts = EnumerateOptions { rng_seed, ..EnumerateOptions::default() };
        let atlas = match mode {
            RaMode::Brute => enumerate_brute(net, bounds.as_ref(), &opts),
            RaMode::Traverse => {
                let start = if seed_len > 0 {
                    slice_arg(seed, seed_len, "seed")?.to_vec()
                } else if let Some(b) = &bounds {
                    b.lower().iter().zip(b.upper()).map(|(l, u)| 0.5 * (l + u)).collect()
                } else {
                    vec![0.0; net.input_dim()]
                };
                enumerate_traverse(net, &start, bounds.as_ref(), &opts)
            }
        }
        .map_err(lib_err)?;
        let bits = atlas.regions.keys().cloned().collect();
        store(out, RaAtlas { inner: atlas, bits })
    })
}

#[no_mangle]
pub unsafe extern "C" fn ra_atlas_free(atlas: *mut RaAtlas) {
    free(atlas)
}

#[no_mangle]
pub unsafe extern "C" fn ra_atlas_region_count(atlas: *const RaAtlas) -> usize {
    atlas.as_ref().map_or(0, |a| a.inner.regions.len())
}

#[no_mangle]
pub unsafe extern "C" fn ra_atlas_edge_count(atlas: *const RaAtlas) -> usize {
    atlas.as_ref().map_or(0, |a| a.inner.edges.len())
}

/// Bit vector of region `index` (regions sorted by bit string) as a newly
/// allocated 0/1 string; release with [`ra_string_free`]. Null on error.
#[no_mangle]
pub unsafe extern "C" fn ra_atlas_region_bits(atlas: *const RaAtlas, index: usize) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let atlas = handle(atlas, "atlas")?;
        let bits = atlas.bits.get(index).ok_or((RaStatus::InvalidArgument, format!("no region {index}")))?;
        result = CString::new(bits.to_string()).expect("bit strings have no NUL").into_raw();
        Ok(())
    });
    result
}

/// Hamming distance matrix of `count` bit vectors of `len` bytes each
/// (row-major, one 0/1 byte per bit).
#[no_mangle]
pub unsafe extern "C" fn ra_distmat_hamming(
    bits: *const u8,
    count: usize,
    len: usize,
    deduplicate: bool,
    out: *mut *mut RaDistanceMatrix,
) -> RaStatus {
    guard(|| {
        let flat = slice_arg(bits, count * len, "bits")?;
        let mut vectors = Vec::with_capacity(count);
        for row in flat.chunks(len.max(1)).take(count) {
            if row.iter().any(|&b| b > 1) {
                return Err((RaStatus::InvalidArgument, "bit bytes must be 0 or 1".into()));
            }
            vectors.push(BitVector::from_fn(len, |i| row[i] == 1));
        }
        let inner = hamming_matrix(&vectors, deduplicate).map_err(lib_err)?;
        store(out, RaDistanceMatrix { inner })
    })
}

/// Matrix from `n * n` row-major values.
#[no_mangle]
pub unsafe extern "C" fn ra_distmat_from_values(
    values: *const f64,
    n: usize,
    out: *mut *mut RaDistanceMatrix,
) -> RaStatus {
    guard(|| {
        let data = slice_arg(values, n * n, "values")?.to_vec();
        let inner = DistanceMatrix::from_square(n, data).map_err(lib_err)?;
        store(out, RaDistanceMatrix { inner })
    })
}

/// Matrix from lower-triangular CSV text.
#[no_mangle]
pub unsafe extern "C" fn ra_distmat_from_lower_csv(
    text: *const c_char,
    out: *mut *mut RaDistanceMatrix,
) -> RaStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let inner = DistanceMatrix::read_lower(text.as_bytes()).map_err(lib_err)?;
        store(out, RaDistanceMatrix { inner })
    })
}

/// Lower-triangular CSV text; release with [`ra_string_free`]. Null on error.
#[no_mangle]
pub unsafe extern "C" fn ra_distmat_to_lower_csv(d: *const RaDistanceMatrix) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let d = &handle(d, "matrix")?.inner;
        let mut buf = Vec::new();
        d.write_lower(&mut buf).map_err(lib_err)?;
        result = CString::new(buf).map_err(|e| (RaStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    });
    result
}

#[no_mangle]
pub unsafe extern "C" fn ra_distmat_free(d: *mut RaDistanceMatrix) {
    free(d)
}

#[no_mangle]
pub unsafe extern "C" fn ra_distmat_size(d: *const RaDistanceMatrix) -> usize {
    d.as_ref().map_or(0, |d| d.inner.len())
}

/// Entry `(i, j)`; NaN when out of range or for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ra_distmat_get(d: *const RaDistanceMatrix, i: usize, j: usize) -> f64 {
    match d.as_ref() {
        Some(d) if i < d.inner.len() && j < d.inner.len() => d.inner.get(i, j),
        _ => f64::NAN,
    }
}

/// Rips barcodes in dimensions `0..=max_dim`. A NaN `t_max` means the
/// largest finite entry. Bars with birth equal to death are dropped unless
/// `include_zero` is set.
#[no_mangle]
pub unsafe extern "C" fn ra_barcode_compute(
    d: *const RaDistanceMatrix,
    max_dim: usize,
    t_max: f64,
    include_zero: bool,
    out: *mut *mut RaBarcode,
) -> RaStatus {
    guard(|| {
        let d = &handle(d, "matrix")?.inner;
        let t = (!t_max.is_nan()).then_some(t_max);
        let mut inner = barcodes(d, max_dim, t).map_err(lib_err)?;
        if !include_zero {
            inner = inner.without_zero_length();
        }
        store(out, RaBarcode { inner })
    })
}

#[no_mangle]
pub unsafe extern "C" fn ra_barcode_free(b: *mut RaBarcode) {
    free(b)
}

/// Number of bars in dimension `dim`.
#[no_mangle]
pub unsafe extern "C" fn ra_barcode_bar_count(b: *const RaBarcode, dim: usize) -> usize {
    b.as_ref().map_or(0, |b| b.inner.dim(dim).len())
}

/// Bar `index` of dimension `dim`; an infinite bar reports `death = INFINITY`.
#[no_mangle]
pub unsafe extern "C" fn ra_barcode_bar(
    b: *const RaBarcode,
    dim: usize,
    index: usize,
    birth: *mut f64,
    death: *mut f64,
) -> RaStatus {
    guard(|| {
        let b = &handle(b, "barcode")?.inner;
        let bar = b.dim(dim).get(index).ok_or((RaStatus::InvalidArgument, format!("no bar {index} in dim {dim}")))?;
        if birth.is_null() || death.is_null() {
            return Err(null("birth/death output"));
        }
        *birth = bar.birth;
        *death = bar.death.unwrap_or(f64::INFINITY);
        Ok(())
    })
}

/// Barcode JSON; release with [`ra_string_free`]. Null on error.
#[no_mangle]
pub unsafe extern "C" fn ra_barcode_to_json(b: *const RaBarcode) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let b = &handle(b, "barcode")?.inner;
        result = CString::new(b.to_json()).expect("JSON has no NUL").into_raw();
        Ok(())
    });
    result
}
