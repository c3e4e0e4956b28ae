//! C ABI over the decoder.
//!
//! Strings cross the boundary as NUL-terminated UTF-8. Results come back
//! as JSON through an out pointer and must be released with
//! `dunstan_string_free`. Every call returns a `DunstanStatus`; on failure
//! `dunstan_last_error` describes the problem.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dunstan::decoder::{decode_line, enumerate_readings, DecodeOptions};
use dunstan::encoder::encode_line;
use dunstan::sidecodes::roman_date_candidates;
use dunstan::transcription::{parse_line, serialize};
use dunstan::Codebook;
use serde_json::json;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DunstanStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidNumeral = 4,
    Internal = 5,
}

/// A decoder bound to the shipped key table and lexicon.
pub struct DunstanDecoder {
    codebook: Codebook,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: DunstanStatus, msg: impl Into<String>) -> DunstanStatus {
    set_error(msg);
    status
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn input<'a>(s: *const c_char) -> Result<&'a str, DunstanStatus> {
    if s.is_null() {
        return Err(fail(DunstanStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(DunstanStatus::InvalidUtf8, e.to_string()))
}

/// # Safety
/// `out` is null or valid for writing one pointer.
unsafe fn output(out: *mut *mut c_char, value: String) -> DunstanStatus {
    if out.is_null() {
        return fail(DunstanStatus::NullArgument, "null out pointer");
    }
    match CString::new(value) {
        Ok(s) => {
            *out = s.into_raw();
            DunstanStatus::Ok
        }
        Err(_) => fail(DunstanStatus::Internal, "result contains NUL"),
    }
}

fn guarded(f: impl FnOnce() -> DunstanStatus) -> DunstanStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(DunstanStatus::Internal, "panic"))
}

/// Creates a decoder. Release it with `dunstan_decoder_free`.
#[no_mangle]
pub extern "C" fn dunstan_decoder_new() -> *mut DunstanDecoder {
    catch_unwind(|| {
        Box::into_raw(Box::new(DunstanDecoder {
            codebook: Codebook::shipped(),
        }))
    })
    .unwrap_or(ptr::null_mut())
}

/// # Safety
/// `decoder` is null or came from `dunstan_decoder_new` and was not freed.
#[no_mangle]
pub unsafe extern "C" fn dunstan_decoder_free(decoder: *mut DunstanDecoder) {
    if !decoder.is_null() {
        drop(Box::from_raw(decoder));
    }
}

/// Decodes one DST line into a JSON array of the `top` best readings.
///
/// # Safety
/// `decoder` is a live handle, `dst` a NUL-terminated string, and `out`
/// valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn dunstan_decode_line(
    decoder: *const DunstanDecoder,
    dst: *const c_char,
    top: u32,
    out: *mut *mut c_char,
) -> DunstanStatus {
    guarded(|| {
        let Some(d) = decoder.as_ref() else {
            return fail(DunstanStatus::NullArgument, "null decoder");
        };
        let text = match input(dst) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cb = &d.codebook;
        let line = match parse_line(text, "ffi", &cb.table) {
            Ok(l) => l,
            Err(e) => return fail(DunstanStatus::ParseError, e.to_string()),
        };
        let lattice = decode_line(&line, DecodeOptions::default(), cb);
        let readings: Vec<_> = enumerate_readings(&lattice, top.max(1) as usize, cb)
            .iter()
            .map(|r| {
                json!({
                    "surface": r.surface,
                    "score": r.score,
                    "words": r.segmentation.words(),
                })
            })
            .collect();
        output(out, json!(readings).to_string())
    })
}

/// Encodes space-separated uppercase words as a DST line. Words that cannot
/// be encoded are left out; the call still succeeds.
///
/// # Safety
/// As for `dunstan_decode_line`.
#[no_mangle]
pub unsafe extern "C" fn dunstan_encode(
    decoder: *const DunstanDecoder,
    text: *const c_char,
    out: *mut *mut c_char,
) -> DunstanStatus {
    guarded(|| {
        let Some(d) = decoder.as_ref() else {
            return fail(DunstanStatus::NullArgument, "null decoder");
        };
        let text = match input(text) {
            Ok(t) => t.to_uppercase(),
            Err(s) => return s,
        };
        let enc = encode_line(&text, &d.codebook);
        output(out, serialize(&enc.line, &d.codebook.table))
    })
}

/// Both date readings of a roman numeral string, as JSON.
///
/// # Safety
/// `letters` is a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn dunstan_romandate(
    letters: *const c_char,
    out: *mut *mut c_char,
) -> DunstanStatus {
    guarded(|| {
        let text = match input(letters) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match roman_date_candidates(text) {
            Ok(c) => output(out, json!(c).to_string()),
            Err(e) => fail(DunstanStatus::InvalidNumeral, e.to_string()),
        }
    })
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dunstan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The message of the last failed call on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dunstan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
