//! Adaptive one-dimensional integration over [0, pi].
//!
//! The integrands produced by the band structure are smooth except at the
//! zeros of the longitudinal kernel W(phi) = J(cos phi - 2D sin phi) - 1,
//! where the quasiparticle gap can close. [`gap_roots`] locates those zeros
//! in closed form; installed as breakpoints they restore piecewise
//! smoothness, and the nested Gauss-Kronrod rule never samples a panel
//! endpoint, so integrable 0/0 limits at the breakpoints are never touched.

use crate::error::QuadratureError;
use crate::spectrum::ModelParams;
use std::f64::consts::PI;

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationSpec {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target; the effective target is
    /// `max(abs_tol, rel_tol * |result|)`.
    pub rel_tol: f64,
    /// Number of interval bisections allowed after the initial
    /// breakpoint panels are laid down.
    pub max_subdivisions: usize,
    /// Forced panel boundaries, strictly increasing, all inside (0, pi).
    pub breakpoints: Vec<f64>,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 200,
            breakpoints: Vec::new(),
        }
    }
}

impl IntegrationSpec {
    /// Default tolerances with the given interior breakpoints.
    pub fn with_breakpoints(breakpoints: Vec<f64>) -> Self {
        Self {
            breakpoints,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec(format!(
                "tolerances must be positive, got abs_tol={} rel_tol={}",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        for pair in self.breakpoints.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(QuadratureError::InvalidSpec(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        if self
            .breakpoints
            .iter()
            .any(|&b| !(b > 0.0 && b < PI) || !b.is_finite())
        {
            return Err(QuadratureError::InvalidSpec(
                "breakpoints must lie strictly inside (0, pi)".into(),
            ));
        }
        Ok(())
    }
}

// 21-point Gauss-Kronrod rule: Kronrod abscissae (positive half, the last
// entry is the centre), 10-point Gauss weights, 21-point Kronrod weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// QUADPACK-style error rescaling: sharpen the raw |K - G| difference with
/// the integrand's total variation estimate, floored at roundoff level.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One 21-point Gauss-Kronrod panel; returns (integral, error estimate).
fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut fv1 = [0.0_f64; 10];
    let mut fv2 = [0.0_f64; 10];

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();

    // odd Kronrod indices coincide with the embedded Gauss nodes
    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += wg * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtw = 2 * j;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    (
        res_kronrod * half,
        rescale_error(err, res_abs * half.abs(), res_asc * half.abs()),
    )
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Integrate `f` over [0, pi], splitting first at `spec.breakpoints` and
/// then bisecting whichever panel carries the largest error estimate until
/// the summed estimate meets `max(abs_tol, rel_tol * |result|)`.
///
/// `f` is never evaluated at 0, pi, or any breakpoint.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &IntegrationSpec) -> Result<f64, QuadratureError> {
    spec.validate()?;

    let mut edges = Vec::with_capacity(spec.breakpoints.len() + 2);
    edges.push(0.0);
    edges.extend_from_slice(&spec.breakpoints);
    edges.push(PI);

    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|e| {
            let (value, error) = qk21(&f, e[0], e[1]);
            Panel {
                a: e[0],
                b: e[1],
                value,
                error,
            }
        })
        .collect();

    let mut splits = 0usize;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= target {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let width = panels[worst].b - panels[worst].a;
        if splits >= spec.max_subdivisions || width < 1e-14 {
            return Err(QuadratureError::NonConvergence {
                estimate: total_err,
                target,
                subdivisions: splits,
            });
        }
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        let (lv, le) = qk21(&f, a, mid);
        let (rv, re) = qk21(&f, mid, b);
        panels[worst] = Panel {
            a,
            b: mid,
            value: lv,
            error: le,
        };
        panels.push(Panel {
            a: mid,
            b,
            value: rv,
            error: re,
        });
        splits += 1;
    }
}

/// All phi in [0, pi] with J(cos phi - 2D sin phi) = 1, sorted ascending.
///
/// Amplitude-phase closed form: the left side is R cos(phi + theta) with
/// R = |J| sqrt(1 + 4 D^2) and theta = atan2(2JD, J), so solutions exist
/// iff R >= 1. Returns 0, 1, or 2 roots; each is polished with one Newton
/// step so the residual sits at roundoff.
pub fn gap_roots(params: &ModelParams) -> Vec<f64> {
    let (j, d) = (params.j, params.d);
    if j == 0.0 {
        return Vec::new();
    }
    let r = j.hypot(2.0 * j * d);
    if r < 1.0 {
        return Vec::new();
    }
    let theta = (2.0 * j * d).atan2(j);
    let u = (1.0 / r).acos();

    let mut roots = Vec::new();
    for s in [u, -u] {
        for n in [-1.0, 0.0, 1.0] {
            let mut phi = s - theta + 2.0 * PI * n;
            if !(-1e-12..=PI + 1e-12).contains(&phi) {
                continue;
            }
            phi = phi.clamp(0.0, PI);
            // Newton polish on W(phi) = J cos phi - 2JD sin phi - 1
            let w = j * (phi.cos() - 2.0 * d * phi.sin()) - 1.0;
            let dw = -j * (phi.sin() + 2.0 * d * phi.cos());
            if dw.abs() > 1e-10 {
                phi = (phi - w / dw).clamp(0.0, PI);
            }
            if !roots.iter().any(|&x: &f64| (x - phi).abs() < 1e-10) {
                roots.push(phi);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}
