//! C interface to the consensus and cooperation core.
//!
//! Conventions:
//!
//! - Every fallible function returns a [`CoosStatus`]; results are written
//!   through out-pointers only on `COOS_STATUS_OK`.
//! - Objects are opaque handles created by `*_new`/`*_load` functions and
//!   released by the matching `*_free` function (which accepts NULL).
//! - After a failure, [`coos_last_error`] returns a message for the calling
//!   thread, valid until that thread's next call into this library.
//! - Panics never cross the boundary; they surface as
//!   `COOS_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use coos_core::consensus::positionality_choice;
use coos_core::intent::IntentGroup;
use coos_core::kenn::{self, CooperationRecord, KennModel};
use coos_core::pclm::{
    select_question, ComparisonResponse, ParticipantId, PreferenceModel, ScenarioCloud, Winner,
};
use coos_core::sim::{read_scenarios, Scenario};
use coos_core::ternary::{constant_coordinate_intersection, to_ternary};
use coos_core::{board, Axis, CoosError, TernaryPoint};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoosStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Input violates a precondition (domain error).
    InvalidArgument = 2,
    NotFound = 3,
    /// The cross-point function has no sign change over the interval.
    Bracketing = 4,
    /// A file or document is malformed.
    Format = 5,
    Io = 6,
    /// A buffer passed by the caller is too small.
    BufferTooSmall = 7,
    /// Unexpected failure (including a caught panic).
    Internal = 8,
}

/// A point on the simplex; `a + b + c = 1`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoosPoint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Preference estimate of one participant.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoosEstimate {
    pub map_estimate: CoosPoint,
    pub credible_region_diameter: f64,
    pub converged: bool,
    pub responses: usize,
}

/// Opaque normalized scenario set.
pub struct CoosScenarioSet {
    scenarios: Vec<Scenario>,
    cloud: ScenarioCloud,
}

/// Opaque preference model of one participant.
pub struct CoosPreference {
    model: PreferenceModel,
    next_question_id: u64,
}

/// Opaque trained cooperation model.
pub struct CoosKenn {
    model: KennModel,
}

/// Scalar function callback: `f(x, user_data)`.
pub type CoosScalarFn = Option<unsafe extern "C" fn(x: f64, user_data: *mut c_void) -> f64>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes replaced"));
}

struct Failure(CoosStatus, String);

impl From<CoosError> for Failure {
    fn from(e: CoosError) -> Self {
        let status = match &e {
            CoosError::Domain(_) | CoosError::SweepTooLarge { .. } => CoosStatus::InvalidArgument,
            CoosError::NotFound { .. } => CoosStatus::NotFound,
            CoosError::Bracketing(_) => CoosStatus::Bracketing,
            CoosError::Format(_) | CoosError::Json(_) => CoosStatus::Format,
            CoosError::Io(_) => CoosStatus::Io,
            CoosError::IllegalTransition { .. } | CoosError::Forbidden(_) | CoosError::Conflict(_) => {
                CoosStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn null(name: &str) -> Failure {
    Failure(CoosStatus::NullPointer, format!("{name} must not be NULL"))
}

/// Runs `f`, converting errors and panics into a status and last-error message.
fn guard(f: impl FnOnce() -> FfiResult) -> CoosStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CoosStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CoosStatus::Internal
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path_arg(p: *const c_char) -> FfiResult<PathBuf> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CoosStatus::InvalidArgument, "path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

fn point_in(p: CoosPoint) -> FfiResult<TernaryPoint> {
    Ok(TernaryPoint::new(p.a, p.b, p.c)?)
}

fn point_out(p: TernaryPoint) -> CoosPoint {
    let [a, b, c] = p.coords();
    CoosPoint { a, b, c }
}

fn axis_in(i: u32) -> FfiResult<Axis> {
    Axis::from_index(i as usize)
        .ok_or_else(|| Failure(CoosStatus::InvalidArgument, format!("axis index {i} is not 0, 1 or 2")))
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message describing the calling thread's most recent failure (empty after a
/// success). Never NULL.
#[no_mangle]
pub extern "C" fn coos_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a NUL-terminated string with static lifetime.
#[no_mangle]
pub extern "C" fn coos_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Projects three nonnegative values onto the simplex; all zeros map to the
/// center.
///
/// # Safety
/// `values` must point to three doubles and `out` to a writable point.
#[no_mangle]
pub unsafe extern "C" fn coos_to_ternary(values: *const f64, out_point: *mut CoosPoint) -> CoosStatus {
    guard(|| {
        let v = slice(values, 3, "values")?;
        let p = to_ternary([v[0], v[1], v[2]])?;
        *out(out_point, "out_point")? = point_out(p);
        Ok(())
    })
}

/// Intersection of the line through `p` holding coordinate `axis_p` constant
/// with the line through `q` holding `axis_q` constant (axes 0=a, 1=b, 2=c).
/// `*found` is false when the lines meet outside the simplex.
///
/// # Safety
/// `out_point` and `found` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coos_constant_coordinate_intersection(
    p: CoosPoint,
    axis_p: u32,
    q: CoosPoint,
    axis_q: u32,
    out_point: *mut CoosPoint,
    found: *mut bool,
) -> CoosStatus {
    guard(|| {
        let out_point = out(out_point, "out_point")?;
        let found = out(found, "found")?;
        let hit = constant_coordinate_intersection(&point_in(p)?, axis_in(axis_p)?, &point_in(q)?, axis_in(axis_q)?)?;
        *found = hit.is_some();
        if let Some(h) = hit {
            *out_point = point_out(h);
        }
        Ok(())
    })
}

/// Loads a normalized scenario file (JSON Lines).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coos_scenarios_load(path: *const c_char, out_set: *mut *mut CoosScenarioSet) -> CoosStatus {
    guard(|| {
        let out_set = out(out_set, "out_set")?;
        let scenarios = read_scenarios(&path_arg(path)?)?;
        let cloud = ScenarioCloud::from_scenarios(&scenarios)?;
        *out_set = into_handle(CoosScenarioSet { scenarios, cloud });
        Ok(())
    })
}

/// Number of scenarios in a set (0 for NULL).
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn coos_scenarios_len(set: *const CoosScenarioSet) -> usize {
    set.as_ref().map_or(0, |s| s.scenarios.len())
}

/// Simplex point of a scenario by id.
///
/// # Safety
/// `set` must be a live handle and `out_point` writable.
#[no_mangle]
pub unsafe extern "C" fn coos_scenarios_point(
    set: *const CoosScenarioSet,
    scenario_id: u64,
    out_point: *mut CoosPoint,
) -> CoosStatus {
    guard(|| {
        let set = handle(set, "set")?;
        *out(out_point, "out_point")? = point_out(set.cloud.point(scenario_id)?);
        Ok(())
    })
}

/// Renders the scenario cloud as an SVG document. Release the string with
/// [`coos_string_free`].
///
/// # Safety
/// `set` must be a live handle and `out_svg` writable.
#[no_mangle]
pub unsafe extern "C" fn coos_scenarios_svg(set: *const CoosScenarioSet, out_svg: *mut *mut c_char) -> CoosStatus {
    guard(|| {
        let set = handle(set, "set")?;
        let out_svg = out(out_svg, "out_svg")?;
        let points = set
            .scenarios
            .iter()
            .map(|s| Ok((s.id, set.cloud.point(s.id)?)))
            .collect::<Result<Vec<_>, CoosError>>()?;
        let svg = board::scenario_cloud(&points, &format!("{} scenarios", points.len()));
        *out_svg = CString::new(svg)
            .map_err(|_| Failure(CoosStatus::Internal, "svg contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a handle from [`coos_scenarios_load`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coos_scenarios_free(set: *mut CoosScenarioSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coos_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// New preference model with a uniform prior.
///
/// # Safety
/// `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coos_preference_new(participant_id: u64, out_model: *mut *mut CoosPreference) -> CoosStatus {
    guard(|| {
        let out_model = out(out_model, "out_model")?;
        *out_model = into_handle(CoosPreference {
            model: PreferenceModel::new(ParticipantId(participant_id)),
            next_question_id: 0,
        });
        Ok(())
    })
}

/// Selects the next question. `*found` is false once every pair has been
/// asked.
///
/// # Safety
/// Handles must be live; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn coos_preference_select(
    model: *const CoosPreference,
    set: *const CoosScenarioSet,
    seed: u64,
    out_a: *mut u64,
    out_b: *mut u64,
    found: *mut bool,
) -> CoosStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let set = handle(set, "set")?;
        let (out_a, out_b, found) = (out(out_a, "out_a")?, out(out_b, "out_b")?, out(found, "found")?);
        let asked: BTreeSet<(u64, u64)> = model.model.responses().iter().map(|r| r.pair()).collect();
        let pick = select_question(&model.model, &set.cloud, &asked, seed)?;
        *found = pick.is_some();
        if let Some((a, b)) = pick {
            *out_a = a;
            *out_b = b;
        }
        Ok(())
    })
}

/// Records that scenario `winner` (0 = a, 1 = b) was preferred.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn coos_preference_record(
    model: *mut CoosPreference,
    set: *const CoosScenarioSet,
    scenario_a: u64,
    scenario_b: u64,
    winner: u32,
) -> CoosStatus {
    guard(|| {
        let model = out(model, "model")?;
        let set = handle(set, "set")?;
        let winner = match winner {
            0 => Winner::A,
            1 => Winner::B,
            w => return Err(Failure(CoosStatus::InvalidArgument, format!("winner {w} is not 0 or 1"))),
        };
        let response = ComparisonResponse {
            question_id: model.next_question_id,
            scenario_a_id: scenario_a,
            scenario_b_id: scenario_b,
            winner,
            timestamp: 0,
        };
        model.model.apply(&response, &set.cloud)?;
        model.next_question_id += 1;
        Ok(())
    })
}

/// Current estimate of a preference model.
///
/// # Safety
/// `model` must be live and `out_estimate` writable.
#[no_mangle]
pub unsafe extern "C" fn coos_preference_estimate(
    model: *const CoosPreference,
    out_estimate: *mut CoosEstimate,
) -> CoosStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let s = model.model.summary();
        *out(out_estimate, "out_estimate")? = CoosEstimate {
            map_estimate: point_out(s.map_estimate),
            credible_region_diameter: s.credible_region_diameter,
            converged: s.converged,
            responses: s.responses,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`coos_preference_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coos_preference_free(model: *mut CoosPreference) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Loads a model document written by `coos kenn-train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_model` writable.
#[no_mangle]
pub unsafe extern "C" fn coos_kenn_load(path: *const c_char, out_model: *mut *mut CoosKenn) -> CoosStatus {
    guard(|| {
        let out_model = out(out_model, "out_model")?;
        let text = std::fs::read_to_string(path_arg(path)?).map_err(CoosError::from)?;
        *out_model = into_handle(CoosKenn {
            model: KennModel::from_json(&text)?,
        });
        Ok(())
    })
}

/// Number of feature inputs (0 for NULL).
///
/// # Safety
/// `model` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn coos_kenn_feature_count(model: *const CoosKenn) -> usize {
    model.as_ref().map_or(0, |m| m.model.schema().feature_count())
}

/// Number of trait inputs (0 for NULL).
///
/// # Safety
/// `model` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn coos_kenn_trait_count(model: *const CoosKenn) -> usize {
    model.as_ref().map_or(0, |m| m.model.schema().trait_count())
}

/// Number of determinant scores (0 for NULL).
///
/// # Safety
/// `model` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn coos_kenn_group_count(model: *const CoosKenn) -> usize {
    model.as_ref().map_or(0, |m| m.model.groups())
}

/// Predicted cooperation rate and raw determinant scores for one record.
/// `scores` may be NULL when `scores_len` is 0; otherwise it must hold at
/// least [`coos_kenn_group_count`] doubles.
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn coos_kenn_predict(
    model: *const CoosKenn,
    features: *const f64,
    features_len: usize,
    traits: *const f64,
    traits_len: usize,
    out_rate: *mut f64,
    scores: *mut f64,
    scores_len: usize,
) -> CoosStatus {
    guard(|| {
        let model = handle(model, "model")?;
        let out_rate = out(out_rate, "out_rate")?;
        let record = CooperationRecord {
            features: slice(features, features_len, "features")?.to_vec(),
            traits: slice(traits, traits_len, "traits")?.to_vec(),
            rate: 0.0,
        };
        let (rate, s) = model.model.predict(&record)?;
        if scores_len > 0 {
            if scores.is_null() {
                return Err(null("scores"));
            }
            if scores_len < s.raw.len() {
                return Err(Failure(
                    CoosStatus::BufferTooSmall,
                    format!("scores needs {} entries, got {scores_len}", s.raw.len()),
                ));
            }
            std::slice::from_raw_parts_mut(scores, s.raw.len()).copy_from_slice(&s.raw);
        }
        *out_rate = rate;
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`coos_kenn_load`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coos_kenn_free(model: *mut CoosKenn) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Positionality-weighted target between a majority and a minority group and
/// the nearest of `count` candidate scenarios (ties by lowest id).
///
/// # Safety
/// `ids` and `points` must each hold `count` elements; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn coos_positionality_choice(
    majority: CoosPoint,
    majority_size: usize,
    minority: CoosPoint,
    minority_size: usize,
    dims_total: u32,
    dims_respected: u32,
    ids: *const u64,
    points: *const CoosPoint,
    count: usize,
    out_target: *mut CoosPoint,
    out_scenario_id: *mut u64,
) -> CoosStatus {
    guard(|| {
        let out_target = out(out_target, "out_target")?;
        let out_scenario_id = out(out_scenario_id, "out_scenario_id")?;
        let group = |id: usize, p: CoosPoint, size: usize| -> FfiResult<IntentGroup> {
            Ok(IntentGroup {
                group_id: id,
                member_ids: (0..size as u64).map(ParticipantId).collect(),
                aggregation_point: point_in(p)?,
                size,
                is_majority: id == 0,
            })
        };
        let ids = slice(ids, count, "ids")?;
        let pts = slice(points, count, "points")?;
        let scenarios = ids
            .iter()
            .zip(pts)
            .map(|(&id, &p)| Ok((id, point_in(p)?)))
            .collect::<FfiResult<Vec<_>>>()?;
        let result = positionality_choice(
            &group(0, majority, majority_size)?,
            &group(1, minority, minority_size)?,
            dims_total,
            dims_respected,
            &scenarios,
        )?;
        *out_target = point_out(result.target_point);
        *out_scenario_id = result.chosen_scenario_id;
        Ok(())
    })
}

/// Crossing of a utility and a norm curve on `[lo, hi]` by bisection.
/// Returns `COOS_STATUS_BRACKETING` when `u - n` does not change sign.
///
/// # Safety
/// Callbacks must be safe to call with `user_data` for any `x` in range.
#[no_mangle]
pub unsafe extern "C" fn coos_cross_point(
    utility: CoosScalarFn,
    norm: CoosScalarFn,
    user_data: *mut c_void,
    lo: f64,
    hi: f64,
    out_x: *mut f64,
) -> CoosStatus {
    guard(|| {
        let u = utility.ok_or_else(|| null("utility"))?;
        let n = norm.ok_or_else(|| null("norm"))?;
        let out_x = out(out_x, "out_x")?;
        *out_x = kenn::cross_point(|x| u(x, user_data), |x| n(x, user_data), lo, hi)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn last_error_tracks_the_latest_call() {
        let mut p = CoosPoint { a: 0.0, b: 0.0, c: 0.0 };
        let bad = [1.0, -1.0, 0.0];
        assert_eq!(unsafe { coos_to_ternary(bad.as_ptr(), &mut p) }, CoosStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(coos_last_error()) }.to_str().unwrap().to_string();
        assert!(!msg.is_empty());
        let good = [1.0, 1.0, 2.0];
        assert_eq!(unsafe { coos_to_ternary(good.as_ptr(), &mut p) }, CoosStatus::Ok);
        assert_eq!(unsafe { CStr::from_ptr(coos_last_error()) }.to_bytes(), b"");
        assert_eq!(p, CoosPoint { a: 0.25, b: 0.25, c: 0.5 });
    }

    #[test]
    fn null_pointers_are_reported() {
        assert_eq!(unsafe { coos_to_ternary(ptr::null(), ptr::null_mut()) }, CoosStatus::NullPointer);
        assert_eq!(unsafe { coos_scenarios_len(ptr::null()) }, 0);
        unsafe { coos_scenarios_free(ptr::null_mut()) };
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(coos_version()) }.to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
