//! Coherence sweeps over the coupling grid and critical-point detection.
//!
//! A sweep evaluates C on a uniform J grid for every requested (D, r,
//! basis) combination, fills in central-difference derivatives, and the
//! detector locates the transition as the interior peak of |d2C/dJ2|.
//! Peak height over the slice median is the sharpness figure.

use crate::coherence::qjsd_coherence;
use crate::error::ScanError;
use crate::rdm::{build_two_site, rotate_basis, Basis};
use crate::spectrum::{correlator_set, Calibration, ModelParams};
use rayon::prelude::*;

/// Grid description for one sweep. J runs over `j_steps` uniform points
/// from `j_min` to `j_max`; every combination with `d_values`, `r_values`
/// and `bases` becomes a slice of the output table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub gamma: f64,
    pub d_values: Vec<f64>,
    pub j_min: f64,
    pub j_max: f64,
    pub j_steps: usize,
    pub r_values: Vec<usize>,
    pub bases: Vec<Basis>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ScanError> {
        let bad = |msg: String| Err(ScanError::InvalidSpec(msg));
        if !self.gamma.is_finite() || !(-1.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma={} outside [-1, 1]", self.gamma));
        }
        if !self.j_min.is_finite() || !self.j_max.is_finite() || self.j_min >= self.j_max {
            return bad(format!(
                "need J_min < J_max, got [{}, {}]",
                self.j_min, self.j_max
            ));
        }
        if self.j_steps < 3 {
            return bad(format!(
                "j_steps={} leaves no interior for derivatives, need at least 3",
                self.j_steps
            ));
        }
        if self.d_values.is_empty() || self.d_values.iter().any(|d| !d.is_finite()) {
            return bad("d_values must be non-empty and finite".into());
        }
        if self.r_values.is_empty() || self.r_values.iter().any(|r| !(1..=10).contains(r)) {
            return bad("r_values must be non-empty with every r in 1..=10".into());
        }
        if self.bases.is_empty() {
            return bad("bases must be non-empty".into());
        }
        Ok(())
    }

    pub fn j_step(&self) -> f64 {
        (self.j_max - self.j_min) / (self.j_steps - 1) as f64
    }

    pub fn j_grid(&self) -> Vec<f64> {
        let h = self.j_step();
        (0..self.j_steps)
            .map(|i| self.j_min + h * i as f64)
            .collect()
    }
}

/// One grid point of a sweep. `c` is None exactly when `error` explains
/// why the point failed; derivative columns are None on grid edges and
/// wherever a neighbor is invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub j: f64,
    pub d: f64,
    pub gamma: f64,
    pub r: usize,
    pub basis: Basis,
    pub c: Option<f64>,
    pub dc_dj: Option<f64>,
    pub d2c_dj2: Option<f64>,
    pub error: Option<String>,
}

/// Sweep output, rows in canonical (D, r, basis, J) order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub gamma: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows of one (D, r, basis) slice in J order.
    pub fn slice(&self, d: f64, r: usize, basis: Basis) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|row| row.d == d && row.r == r && row.basis == basis)
            .collect()
    }

    /// Grid spacing recovered from the first two distinct J values.
    /// Derived rather than stored so the table survives a serialization
    /// round trip field for field.
    pub fn j_step(&self) -> Option<f64> {
        let first = self.rows.first()?.j;
        self.rows
            .iter()
            .map(|row| row.j)
            .find(|&j| j != first)
            .map(|j| (j - first).abs())
    }
}

/// Result of the curvature-peak detector on one slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPointEstimate {
    pub j_star: f64,
    /// Peak |d2C/dJ2| over the slice median of the same magnitude.
    pub sharpness: f64,
    /// d2C/dJ2 at the peak, sign retained.
    pub signed_peak: f64,
    pub basis: Basis,
    pub d: f64,
    pub r: usize,
}

/// First and second central differences of a uniformly spaced series.
/// Edges and points with an invalid neighbor come back None.
pub fn central_differences(
    values: &[Option<f64>],
    h: f64,
) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let n = values.len();
    let mut d1 = vec![None; n];
    let mut d2 = vec![None; n];
    for i in 1..n.saturating_sub(1) {
        if let (Some(lo), Some(mid), Some(hi)) = (values[i - 1], values[i], values[i + 1]) {
            d1[i] = Some((hi - lo) / (2.0 * h));
            d2[i] = Some((hi - 2.0 * mid + lo) / (h * h));
        }
    }
    (d1, d2)
}

/// C for every (r, basis) combination at one grid point, in the caller's
/// (r-major, basis-minor) slot order. Errors are carried per slot.
fn evaluate_point(
    j: f64,
    d: f64,
    gamma: f64,
    r_values: &[usize],
    bases: &[Basis],
    cal: &Calibration,
) -> Vec<Result<f64, String>> {
    let slots = r_values.len() * bases.len();
    let params = match ModelParams::new(j, gamma, d) {
        Ok(p) => p,
        Err(e) => return vec![Err(e.to_string()); slots],
    };
    let mut out = Vec::with_capacity(slots);
    for &r in r_values {
        let state = correlator_set(r, &params, cal)
            .map_err(|e| e.to_string())
            .and_then(|c| build_two_site(&c).map_err(|e| e.to_string()));
        for &basis in bases {
            out.push(state.as_ref().map_err(Clone::clone).and_then(|s| {
                qjsd_coherence(&rotate_basis(s, basis))
                    .map(|res| res.c)
                    .map_err(|e| e.to_string())
            }));
        }
    }
    out
}

/// Evaluate the full grid. Points are independent and computed in
/// parallel; the result is deterministic because every row is assembled
/// from its own point's arithmetic and collected by index.
pub fn sweep(spec: &SweepSpec, cal: &Calibration) -> Result<SweepTable, ScanError> {
    spec.validate()?;

    let mut d_values = spec.d_values.clone();
    d_values.sort_by(f64::total_cmp);
    d_values.dedup();
    let mut r_values = spec.r_values.clone();
    r_values.sort_unstable();
    r_values.dedup();
    let mut bases = spec.bases.clone();
    bases.sort_unstable();
    bases.dedup();

    let js = spec.j_grid();
    let h = spec.j_step();
    let points: Vec<(f64, f64)> = d_values
        .iter()
        .flat_map(|&d| js.iter().map(move |&j| (d, j)))
        .collect();

    let computed: Vec<Vec<Result<f64, String>>> = points
        .par_iter()
        .map(|&(d, j)| evaluate_point(j, d, spec.gamma, &r_values, &bases, cal))
        .collect();

    let mut rows = Vec::with_capacity(points.len() * r_values.len() * bases.len());
    for (di, &d) in d_values.iter().enumerate() {
        for (ri, &r) in r_values.iter().enumerate() {
            for (bi, &basis) in bases.iter().enumerate() {
                let slot = ri * bases.len() + bi;
                let series: Vec<Option<f64>> = js
                    .iter()
                    .enumerate()
                    .map(|(ji, _)| computed[di * js.len() + ji][slot].as_ref().ok().copied())
                    .collect();
                let (d1, d2) = central_differences(&series, h);
                for (ji, &j) in js.iter().enumerate() {
                    let err = computed[di * js.len() + ji][slot]
                        .as_ref()
                        .err()
                        .cloned();
                    rows.push(SweepRow {
                        j,
                        d,
                        gamma: spec.gamma,
                        r,
                        basis,
                        c: series[ji],
                        dc_dj: d1[ji],
                        d2c_dj2: d2[ji],
                        error: err,
                    });
                }
            }
        }
    }

    Ok(SweepTable {
        gamma: spec.gamma,
        rows,
    })
}

fn median_of(mut mags: Vec<f64>) -> f64 {
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    if n % 2 == 1 {
        mags[n / 2]
    } else {
        0.5 * (mags[n / 2 - 1] + mags[n / 2])
    }
}

/// Locate the transition on one slice as the interior grid point
/// maximizing |d2C/dJ2|. Needs at least 5 valid interior points; a peak
/// not exceeding 3x the slice median is reported as NoSignal.
pub fn detect_critical_point(
    table: &SweepTable,
    d: f64,
    r: usize,
    basis: Basis,
) -> Result<CriticalPointEstimate, ScanError> {
    let slice = table.slice(d, r, basis);
    if slice.is_empty() {
        return Err(ScanError::InvalidSpec(format!(
            "table has no rows for D={d}, r={r}, basis={basis}"
        )));
    }
    let valid: Vec<(f64, f64)> = slice
        .iter()
        .filter_map(|row| row.d2c_dj2.map(|v| (row.j, v)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    if valid.len() < 5 {
        return Err(ScanError::TooFewPoints(valid.len()));
    }

    let (mut j_star, mut signed_peak) = valid[0];
    for &(j, v) in &valid[1..] {
        if v.abs() > signed_peak.abs() {
            j_star = j;
            signed_peak = v;
        }
    }
    let peak = signed_peak.abs();
    let median = median_of(valid.iter().map(|&(_, v)| v.abs()).collect());
    if peak <= 3.0 * median {
        return Err(ScanError::NoSignal { peak, median });
    }
    let sharpness = if median > 0.0 {
        peak / median
    } else {
        f64::INFINITY
    };
    Ok(CriticalPointEstimate {
        j_star,
        sharpness,
        signed_peak,
        basis,
        d,
        r,
    })
}

/// Sharpness laid against an ordering key, with both monotonicity
/// verdicts. `trivial` marks the single-estimate case where the orderings
/// hold vacuously.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub keys: Vec<f64>,
    pub sharpness: Vec<f64>,
    pub strictly_decreasing: bool,
    pub strictly_increasing: bool,
    pub trivial: bool,
}

/// Order estimates by `key` and report sharpness monotonicity. Keys must
/// be distinct.
pub fn sharpness_ordering(
    estimates: &[CriticalPointEstimate],
    key: impl Fn(&CriticalPointEstimate) -> f64,
) -> Result<OrderingReport, ScanError> {
    if estimates.is_empty() {
        return Err(ScanError::InvalidSpec(
            "ordering needs at least one estimate".into(),
        ));
    }
    let mut pairs: Vec<(f64, f64)> = estimates.iter().map(|e| (key(e), e.sharpness)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(ScanError::InvalidSpec(
            "ordering keys must be distinct".into(),
        ));
    }
    let strictly_decreasing = pairs.windows(2).all(|w| w[0].1 > w[1].1);
    let strictly_increasing = pairs.windows(2).all(|w| w[0].1 < w[1].1);
    Ok(OrderingReport {
        keys: pairs.iter().map(|p| p.0).collect(),
        sharpness: pairs.iter().map(|p| p.1).collect(),
        strictly_decreasing,
        strictly_increasing,
        trivial: pairs.len() < 2,
    })
}

/// Sharpness against D at fixed (gamma, r, basis).
pub fn sharpness_vs_d(estimates: &[CriticalPointEstimate]) -> Result<OrderingReport, ScanError> {
    sharpness_ordering(estimates, |e| e.d)
}

/// Sharpness against separation r at fixed (gamma, D, basis).
pub fn sharpness_vs_r(estimates: &[CriticalPointEstimate]) -> Result<OrderingReport, ScanError> {
    sharpness_ordering(estimates, |e| e.r as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> SweepSpec {
        SweepSpec {
            gamma: 0.5,
            d_values: vec![0.0],
            j_min: 0.9,
            j_max: 1.1,
            j_steps: 5,
            r_values: vec![1],
            bases: vec![Basis::Z],
        }
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let mut s = base_spec();
        s.j_steps = 2;
        assert!(matches!(s.validate(), Err(ScanError::InvalidSpec(_))));

        let mut s = base_spec();
        s.j_min = 2.0;
        assert!(s.validate().is_err());

        let mut s = base_spec();
        s.d_values.clear();
        assert!(s.validate().is_err());

        let mut s = base_spec();
        s.r_values = vec![11];
        assert!(s.validate().is_err());

        let mut s = base_spec();
        s.gamma = 1.5;
        assert!(s.validate().is_err());

        assert!(base_spec().validate().is_ok());
    }

    #[test]
    fn central_differences_are_second_order() {
        let f = |x: f64| (2.0 * x).sin();
        let df = |x: f64| 2.0 * (2.0 * x).cos();
        let d2f = |x: f64| -4.0 * (2.0 * x).sin();

        let max_err = |h: f64| {
            let xs: Vec<f64> = (0..=100).map(|i| 0.3 + h * i as f64).collect();
            let vals: Vec<Option<f64>> = xs.iter().map(|&x| Some(f(x))).collect();
            let (d1, d2) = central_differences(&vals, h);
            let mut e1: f64 = 0.0;
            let mut e2: f64 = 0.0;
            for i in 1..xs.len() - 1 {
                e1 = e1.max((d1[i].unwrap() - df(xs[i])).abs());
                e2 = e2.max((d2[i].unwrap() - d2f(xs[i])).abs());
            }
            (e1, e2)
        };

        let (a1, a2) = max_err(1e-2);
        let (b1, b2) = max_err(5e-3);
        // halving h should quarter the error of an O(h^2) scheme
        assert!(a1 / b1 > 3.5 && a1 / b1 < 4.5, "ratio {}", a1 / b1);
        assert!(a2 / b2 > 3.5 && a2 / b2 < 4.5, "ratio {}", a2 / b2);
    }

    #[test]
    fn invalid_neighbors_blank_derivatives() {
        let vals = vec![Some(0.0), Some(1.0), None, Some(3.0), Some(4.0)];
        let (d1, d2) = central_differences(&vals, 1.0);
        assert_eq!(d1, vec![None, None, None, None, None]);
        assert_eq!(d2[1], None);
        assert_eq!(d2[3], None);
    }

    fn synthetic_table(d2c: &[Option<f64>]) -> SweepTable {
        let n = d2c.len();
        let rows = (0..n)
            .map(|i| SweepRow {
                j: i as f64 * 0.1,
                d: 0.0,
                gamma: 0.5,
                r: 1,
                basis: Basis::Z,
                c: Some(0.0),
                dc_dj: None,
                d2c_dj2: d2c[i],
                error: None,
            })
            .collect();
        SweepTable { gamma: 0.5, rows }
    }

    #[test]
    fn flat_slice_reports_no_signal() {
        let table = synthetic_table(&[None, Some(0.0), Some(0.0), Some(0.0), Some(0.0), Some(0.0), None]);
        assert!(matches!(
            detect_critical_point(&table, 0.0, 1, Basis::Z),
            Err(ScanError::NoSignal { .. })
        ));
    }

    #[test]
    fn spike_is_located_with_sign() {
        let mut d2c = vec![Some(1.0); 9];
        d2c[0] = None;
        d2c[8] = None;
        d2c[5] = Some(-40.0);
        let table = synthetic_table(&d2c);
        let est = detect_critical_point(&table, 0.0, 1, Basis::Z).unwrap();
        assert!((est.j_star - 0.5).abs() < 1e-15);
        assert_eq!(est.signed_peak, -40.0);
        assert!((est.sharpness - 40.0).abs() < 1e-12);
    }

    #[test]
    fn short_slice_is_rejected() {
        let table = synthetic_table(&[None, Some(1.0), Some(2.0), Some(1.0), None]);
        assert!(matches!(
            detect_critical_point(&table, 0.0, 1, Basis::Z),
            Err(ScanError::TooFewPoints(3))
        ));
    }

    #[test]
    fn ordering_report_verdicts() {
        let est = |d: f64, s: f64| CriticalPointEstimate {
            j_star: 1.0,
            sharpness: s,
            signed_peak: s,
            basis: Basis::Z,
            d,
            r: 1,
        };
        let rep = sharpness_vs_d(&[est(0.0, 9.0), est(1.0, 3.0), est(0.5, 5.0)]).unwrap();
        assert!(rep.strictly_decreasing);
        assert!(!rep.strictly_increasing);
        assert!(!rep.trivial);
        assert_eq!(rep.keys, vec![0.0, 0.5, 1.0]);

        let rep = sharpness_vs_d(&[est(0.3, 2.0)]).unwrap();
        assert!(rep.trivial);
        assert!(rep.strictly_decreasing && rep.strictly_increasing);

        assert!(sharpness_vs_d(&[est(0.1, 1.0), est(0.1, 2.0)]).is_err());
    }

    #[test]
    fn sweep_rows_are_canonical_and_deterministic() {
        let spec = SweepSpec {
            gamma: 0.5,
            d_values: vec![0.5, 0.0],
            j_min: 0.5,
            j_max: 0.7,
            j_steps: 3,
            r_values: vec![2, 1],
            bases: vec![Basis::Z, Basis::X],
        };
        let cal = Calibration::default();
        let t1 = sweep(&spec, &cal).unwrap();
        let t2 = sweep(&spec, &cal).unwrap();

        let key = |row: &SweepRow| (row.d.to_bits(), row.r, row.basis, row.j.to_bits());
        let keys: Vec<_> = t1.rows.iter().map(key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(t1.rows.len(), 2 * 2 * 2 * 3);

        // bitwise determinism across runs
        let bits = |t: &SweepTable| -> Vec<Option<u64>> {
            t.rows.iter().map(|r| r.c.map(f64::to_bits)).collect()
        };
        assert_eq!(bits(&t1), bits(&t2));
        assert!(t1.rows.iter().all(|r| r.error.is_none()));
        // interior rows carry derivatives, edges do not
        for chunk in t1.rows.chunks(3) {
            assert!(chunk[0].d2c_dj2.is_none());
            assert!(chunk[1].d2c_dj2.is_some());
            assert!(chunk[2].d2c_dj2.is_none());
        }
    }
}
