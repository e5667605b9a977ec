//! C ABI over the `dynscat` engine.
//!
//! A potential is parsed once into an opaque [`DynscatProblem`] handle that
//! also carries the numerical settings. Every call returns a [`DynscatStatus`];
//! on failure [`dynscat_last_error`] gives the message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dynscat::halfline::{reflection, BoundaryCondition, HalfLineProblem};
use dynscat::lowenergy::classify_resonance;
use dynscat::potential::{parse_potential, truncate};
use dynscat::propagate::{amplitudes, transfer_matrix};
use dynscat::zeroenergy::{low_energy_coefficients, solve_phi};
use dynscat::{Error, Mat2C, PotentialSpec, Settings, SupportWindow, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynscatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Config = 5,
    Integration = 6,
    ZeroWavenumber = 7,
    SpectralSingularity = 8,
    HalfLineSingularity = 9,
    Contradiction = 10,
    Unsupported = 11,
    Io = 12,
    Panic = 13,
    Internal = 14,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DynscatComplex {
    pub re: f64,
    pub im: f64,
}

/// Row-major 2x2 complex matrix.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DynscatMatrix {
    pub m11: DynscatComplex,
    pub m12: DynscatComplex,
    pub m21: DynscatComplex,
    pub m22: DynscatComplex,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DynscatAmplitudes {
    pub rl: DynscatComplex,
    pub rr: DynscatComplex,
    pub t: DynscatComplex,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DynscatCoefficients {
    pub a1: DynscatComplex,
    pub a2: DynscatComplex,
    pub b1: DynscatComplex,
    pub b2: DynscatComplex,
    pub g1: DynscatComplex,
    pub ell: f64,
    /// 1 when `b1` is below the resonance threshold.
    pub resonant: i32,
    pub margin: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynscatSettings {
    pub rtol: f64,
    pub atol: f64,
    pub mesh_intervals: usize,
    pub tau: f64,
    pub eps_tail: f64,
    pub max_order: u32,
}

impl From<&Settings> for DynscatSettings {
    fn from(s: &Settings) -> Self {
        Self { rtol: s.rtol, atol: s.atol, mesh_intervals: s.mesh_intervals, tau: s.tau, eps_tail: s.eps_tail, max_order: s.max_order }
    }
}

impl DynscatSettings {
    fn to_settings(self) -> Settings {
        Settings {
            rtol: self.rtol,
            atol: self.atol,
            mesh_intervals: self.mesh_intervals,
            tau: self.tau,
            eps_tail: self.eps_tail,
            max_order: self.max_order,
            ..Settings::default()
        }
    }
}

/// Opaque: a parsed potential, its support window and the settings in use.
pub struct DynscatProblem {
    spec: PotentialSpec,
    window: SupportWindow,
    settings: Settings,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(e: &Error) -> DynscatStatus {
    match e {
        Error::InvalidInput(_) => DynscatStatus::InvalidInput,
        Error::Parse { .. } => DynscatStatus::Parse,
        Error::Config(_) => DynscatStatus::Config,
        Error::Integration { .. } => DynscatStatus::Integration,
        Error::ZeroWavenumber => DynscatStatus::ZeroWavenumber,
        Error::SpectralSingularity(_) => DynscatStatus::SpectralSingularity,
        Error::HalfLineSingularity(_) => DynscatStatus::HalfLineSingularity,
        Error::Contradiction => DynscatStatus::Contradiction,
        Error::Sequencing(_) => DynscatStatus::Internal,
        Error::Unsupported(_) => DynscatStatus::Unsupported,
        Error::Io(_) => DynscatStatus::Io,
    }
}

struct Fail(DynscatStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DynscatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DynscatStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            DynscatStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(DynscatStatus::NullPointer, format!("{what} is null"))
}

unsafe fn problem_ref<'a>(p: *const DynscatProblem) -> Result<&'a DynscatProblem, Fail> {
    p.as_ref().ok_or_else(|| null("problem"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn cx(z: C64) -> DynscatComplex {
    DynscatComplex { re: z.re, im: z.im }
}

fn to_c64(z: DynscatComplex) -> C64 {
    C64::new(z.re, z.im)
}

fn mx(m: &Mat2C) -> DynscatMatrix {
    DynscatMatrix { m11: cx(m.m11), m12: cx(m.m12), m21: cx(m.m21), m22: cx(m.m22) }
}

/// Library defaults.
#[no_mangle]
pub extern "C" fn dynscat_settings_default() -> DynscatSettings {
    DynscatSettings::from(&Settings::default())
}

/// Parses a JSON potential. `settings` may be null for the defaults.
/// The handle must be released with [`dynscat_problem_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string; `settings` null or valid; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dynscat_problem_new(
    json: *const c_char,
    settings: *const DynscatSettings,
    out: *mut *mut DynscatProblem,
) -> DynscatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        out.write(ptr::null_mut());
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json);
        std::str::from_utf8(text.to_bytes()).map_err(|e| Fail(DynscatStatus::InvalidUtf8, e.to_string()))?;
        let settings = match settings.as_ref() {
            Some(s) => s.to_settings(),
            None => Settings::default(),
        };
        settings.validate()?;
        let spec = parse_potential(text.to_bytes())?;
        let window = truncate(&spec, settings.eps_tail, settings.max_order)?;
        out.write(Box::into_raw(Box::new(DynscatProblem { spec, window, settings })));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `problem` must come from [`dynscat_problem_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dynscat_problem_free(problem: *mut DynscatProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Support window `[x_minus, x_plus]` used for the computation.
///
/// # Safety
/// `problem` must be a live handle; `x_minus` and `x_plus` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dynscat_problem_window(
    problem: *const DynscatProblem,
    x_minus: *mut f64,
    x_plus: *mut f64,
) -> DynscatStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        write_out(x_minus, p.window.x_minus)?;
        write_out(x_plus, p.window.x_plus)
    })
}

/// Transfer matrix `M(k)`.
///
/// # Safety
/// `problem` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dynscat_transfer_matrix(
    problem: *const DynscatProblem,
    k: DynscatComplex,
    out: *mut DynscatMatrix,
) -> DynscatStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let tm = transfer_matrix(&p.spec, to_c64(k), &p.window, &p.settings.tolerances())?;
        write_out(out, mx(&tm.m))
    })
}

/// Left/right reflection and transmission amplitudes at `k`.
///
/// # Safety
/// `problem` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dynscat_amplitudes(
    problem: *const DynscatProblem,
    k: DynscatComplex,
    out: *mut DynscatAmplitudes,
) -> DynscatStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let tm = transfer_matrix(&p.spec, to_c64(k), &p.window, &p.settings.tolerances())?;
        let a = amplitudes(&tm, p.settings.atol)?;
        write_out(out, DynscatAmplitudes { rl: cx(a.rl), rr: cx(a.rr), t: cx(a.t) })
    })
}

/// Zero-energy coefficients and the resonance verdict.
///
/// # Safety
/// `problem` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dynscat_zero_energy(problem: *const DynscatProblem, out: *mut DynscatCoefficients) -> DynscatStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let c = low_energy_coefficients(&solve_phi(&p.spec, &p.window, &p.settings)?);
        let v = classify_resonance(&c, p.settings.tau)?;
        write_out(
            out,
            DynscatCoefficients {
                a1: cx(c.a1),
                a2: cx(c.a2),
                b1: cx(c.b1),
                b2: cx(c.b2),
                g1: cx(c.g1()?),
                ell: c.ell,
                resonant: v.resonant as i32,
                margin: v.margin,
            },
        )
    })
}

/// Half-line reflection amplitude for `alpha psi(0) + beta psi'(0)/k = 0`.
///
/// # Safety
/// `problem` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn dynscat_halfline_reflection(
    problem: *const DynscatProblem,
    alpha: DynscatComplex,
    beta: DynscatComplex,
    k: DynscatComplex,
    out: *mut DynscatComplex,
) -> DynscatStatus {
    guard(|| {
        let p = problem_ref(problem)?;
        let bc = BoundaryCondition::constant(to_c64(alpha), to_c64(beta))?;
        let hp = HalfLineProblem::new(p.spec.clone(), bc)?;
        write_out(out, cx(reflection(&hp, to_c64(k), &p.settings)?))
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn dynscat_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}
