//! Acceptance gate. One test per shipping criterion; each prints a single
//! summary line with the measured numbers before asserting, so a failed
//! run still reports everything it saw.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! summary lines of passing criteria too.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::time::Instant;
use xydm_core::{
    build_two_site, correlator_set, detect_critical_point, entropy, entropy_from_eigenvalues,
    ground_state, ground_state_dense, ising_specialization_check, oracle_coherence,
    oracle_correlators, qjsd_coherence, rotate_basis, sharpness_vs_d, sharpness_vs_r, sweep,
    xstate_eigenvalues, Basis, CMatrix4, Calibration, CriticalPointEstimate, Dephase,
    FiniteChainSpec, ModelParams, SweepSpec, TwoSiteState,
};

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Sweep one (D, r, basis) slice over J in [0.5, 1.5] on the standard
/// 201-point grid and locate the curvature peak.
fn estimate(gamma: f64, d: f64, r: usize, basis: Basis) -> CriticalPointEstimate {
    let spec = SweepSpec {
        gamma,
        d_values: vec![d],
        j_min: 0.5,
        j_max: 1.5,
        j_steps: 201,
        r_values: vec![r],
        bases: vec![basis],
    };
    let table = sweep(&spec, &Calibration::default()).expect("sweep failed");
    detect_critical_point(&table, d, r, basis).expect("no curvature peak detected")
}

#[test]
fn criterion_1_critical_point_location() {
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [0.0, 0.5, 1.0] {
        let start = Instant::now();
        let est = estimate(0.5, d, 1, Basis::Z);
        let secs = start.elapsed().as_secs_f64();
        // one grid step of slack, inclusive up to float rounding
        ok &= (est.j_star - 1.0).abs() <= 0.005 + 1e-12 && secs < 60.0;
        lines.push(format!("D={d}: J*={:.3} in {secs:.1}s", est.j_star));
    }
    let detail = lines.join(", ");
    println!(
        "criterion 1: {} - gamma=0.5 r=1 Z-basis curvature peak within 1.00 +- 0.005 ({detail})",
        verdict(ok)
    );
    assert!(ok, "critical point location: {detail}");
}

#[test]
fn criterion_2_isotropic_coherence_step() {
    let spec = SweepSpec {
        gamma: 0.0,
        d_values: vec![0.0],
        j_min: 0.0,
        j_max: 2.5,
        j_steps: 201,
        r_values: vec![1, 5],
        bases: vec![Basis::Z],
    };
    let table = sweep(&spec, &Calibration::default()).expect("sweep failed");
    let mut ok = true;
    let mut max_below = 0.0f64;
    let mut min_above = f64::INFINITY;
    for r in [1usize, 5] {
        for row in table.slice(0.0, r, Basis::Z) {
            let c = row.c.unwrap_or_else(|| {
                panic!("point J={} r={r} failed: {:?}", row.j, row.error)
            });
            if row.j <= 0.9 + 1e-12 {
                max_below = max_below.max(c);
                ok &= c < 1e-6;
            }
            if row.j >= 1.1 - 1e-12 {
                min_above = min_above.min(c);
                ok &= c > 1e-3;
            }
        }
    }
    println!(
        "criterion 2: {} - gamma=0 C_z step at J=1: max C on [0, 0.9] = {max_below:.2e}, \
         min C on [1.1, 2.5] = {min_above:.2e} (r = 1 and 5)",
        verdict(ok)
    );
    assert!(ok, "max below {max_below:.2e}, min above {min_above:.2e}");
}

#[test]
fn criterion_3_sharpness_decreasing_with_dm_coupling() {
    let estimates: Vec<CriticalPointEstimate> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&d| estimate(0.5, d, 1, Basis::Z))
        .collect();
    let report = sharpness_vs_d(&estimates).expect("ordering failed");
    let ok = report.strictly_decreasing;
    let values: Vec<String> = report
        .keys
        .iter()
        .zip(&report.sharpness)
        .map(|(d, s)| format!("D={d}: {s:.1}"))
        .collect();
    let detail = values.join(", ");
    println!(
        "criterion 3: {} - peak sharpness vs D at gamma=0.5 r=1 Z-basis expected strictly \
         decreasing, measured {detail}",
        verdict(ok)
    );
    assert!(ok, "sharpness not strictly decreasing with D: {detail}");
}

#[test]
fn criterion_4_sharpness_vs_separation() {
    // (a) no DM coupling: r=1 and r=5 peaks equally sharp within 10%
    let a1 = estimate(0.5, 0.0, 1, Basis::Z);
    let a5 = estimate(0.5, 0.0, 5, Basis::Z);
    let rel = (a1.sharpness - a5.sharpness).abs() / a1.sharpness.max(a5.sharpness);
    let ok_a = rel <= 0.10;

    // (b) D in {0.5, 1}: sharpness strictly decreasing from r=1 to r=5
    let mut ok_b = true;
    let mut b_parts = Vec::new();
    for d in [0.5, 1.0] {
        let pair = [estimate(0.5, d, 1, Basis::Z), estimate(0.5, d, 5, Basis::Z)];
        let report = sharpness_vs_r(&pair).expect("ordering failed");
        ok_b &= report.strictly_decreasing;
        b_parts.push(format!(
            "D={d}: r=1 {:.1} vs r=5 {:.1}",
            report.sharpness[0], report.sharpness[1]
        ));
    }

    // (c) gamma=1, D=0: sharpness strictly increasing from r=1 to r=5
    let pair = [estimate(1.0, 0.0, 1, Basis::Z), estimate(1.0, 0.0, 5, Basis::Z)];
    let c_report = sharpness_vs_r(&pair).expect("ordering failed");
    let ok_c = c_report.strictly_increasing;

    let ok = ok_a && ok_b && ok_c;
    let detail = format!(
        "(a) {} D=0 r=1 {:.1} vs r=5 {:.1}, rel dev {:.0}%; (b) {} {}; (c) {} gamma=1 r=1 {:.2} \
         vs r=5 {:.2}",
        verdict(ok_a),
        a1.sharpness,
        a5.sharpness,
        rel * 100.0,
        verdict(ok_b),
        b_parts.join(", "),
        verdict(ok_c),
        c_report.sharpness[0],
        c_report.sharpness[1],
    );
    println!("criterion 4: {} - sharpness vs separation: {detail}", verdict(ok));
    assert!(ok, "{detail}");
}

#[test]
fn criterion_5_ising_specialization() {
    let sets = [(0.5, 0.0), (1.0, 0.0), (1.5, 0.0), (1.0, 0.5), (2.0, 1.0)];
    let mut worst = 0.0f64;
    for (j, d) in sets {
        let p = ModelParams::new(j, 1.0, d).unwrap();
        let check = ising_specialization_check(&p).expect("specialization check failed");
        worst = worst.max(check.worst());
    }
    let ok = worst < 1e-10;
    println!(
        "criterion 5: {} - gamma=1 closed-form route agrees with the general kernel, worst \
         deviation {worst:.2e} over {} (J, D) sets",
        verdict(ok),
        sets.len()
    );
    assert!(ok, "worst deviation {worst:.2e} >= 1e-10");
}

#[test]
fn criterion_6_finite_chain_crosscheck() {
    const TOL: f64 = 5e-2;
    const QUANTITIES: [&str; 7] = ["m_z", "xx", "yy", "zz", "C_x", "C_y", "C_z"];
    let cal = Calibration::default();
    let mut ok = true;
    let mut detail = Vec::new();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut skipped = 0usize;

    for gamma in [0.5, 1.0] {
        for j in [0.5, 2.0] {
            for d in [0.0, 0.5] {
                let p = ModelParams::new(j, gamma, d).unwrap();
                let set = correlator_set(1, &p, &cal).unwrap();
                let state = build_two_site(&set).unwrap();
                let mut formula = vec![set.m_z, set.xx, set.yy, set.zz];
                for basis in [Basis::X, Basis::Y, Basis::Z] {
                    formula.push(qjsd_coherence(&rotate_basis(&state, basis)).unwrap().c);
                }

                // deviations at N = 12 and N = 14; the larger chain must be
                // both inside tolerance and no worse than the smaller one
                let mut devs = [[0.0f64; 7]; 2];
                let mut degenerate = false;
                for (ni, n) in [12usize, 14].into_iter().enumerate() {
                    let gs = ground_state(&FiniteChainSpec::new(n, p)).unwrap();
                    if gs.degenerate {
                        degenerate = true;
                        break;
                    }
                    let vector = &gs.vectors[0];
                    let ed_set = oracle_correlators(vector, n, 1).unwrap();
                    let mut ed = vec![ed_set.m_z, ed_set.xx, ed_set.yy, ed_set.zz];
                    for basis in [Basis::X, Basis::Y, Basis::Z] {
                        ed.push(oracle_coherence(vector, n, 1, basis).unwrap().c);
                    }
                    for q in 0..7 {
                        devs[ni][q] = (ed[q] - formula[q]).abs();
                    }
                }
                if degenerate {
                    skipped += 1;
                    detail.push(format!("(gamma={gamma}, J={j}, D={d}): degenerate, skipped"));
                    continue;
                }
                checked += 1;
                let mut bad = Vec::new();
                for q in 0..7 {
                    worst = worst.max(devs[1][q]);
                    if devs[1][q] >= TOL {
                        bad.push(format!("{} dev {:.3}", QUANTITIES[q], devs[1][q]));
                    } else if devs[1][q] > devs[0][q] {
                        bad.push(format!(
                            "{} dev grew {:.2e} -> {:.2e}",
                            QUANTITIES[q], devs[0][q], devs[1][q]
                        ));
                    }
                }
                if !bad.is_empty() {
                    ok = false;
                    detail.push(format!("(gamma={gamma}, J={j}, D={d}): {}", bad.join("; ")));
                }
            }
        }
    }
    let trailer = if detail.is_empty() {
        String::new()
    } else {
        format!("; {}", detail.join(" | "))
    };
    println!(
        "criterion 6: {} - N=14 chain vs closed form at r=1, {checked} points checked, \
         {skipped} degenerate skipped, worst N=14 deviation {worst:.3}{trailer}",
        verdict(ok)
    );
    assert!(ok, "{}", detail.join("\n"));
}

fn random_xstate(rng: &mut ChaCha8Rng) -> TwoSiteState {
    let mut diag = [0.0f64; 4];
    let mut sum = 0.0;
    for v in &mut diag {
        *v = rng.gen::<f64>() + 1e-3;
        sum += *v;
    }
    for v in &mut diag {
        *v /= sum;
    }
    let mut m = CMatrix4::zeros();
    for (i, v) in diag.iter().enumerate() {
        m[(i, i)] = Complex64::new(*v, 0.0);
    }
    let r03 = (diag[0] * diag[3]).sqrt() * rng.gen::<f64>();
    let r12 = (diag[1] * diag[2]).sqrt() * rng.gen::<f64>();
    let mut phase = |r: f64| Complex64::from_polar(r, rng.gen::<f64>() * TAU);
    m[(0, 3)] = phase(r03);
    m[(3, 0)] = m[(0, 3)].conj();
    m[(1, 2)] = phase(r12);
    m[(2, 1)] = m[(1, 2)].conj();
    TwoSiteState {
        matrix: m,
        basis: Basis::Z,
        r: 1,
    }
}

#[test]
fn criterion_7_measure_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0acc_e97);

    // closed-form spectrum vs a general Hermitian eigensolver
    let mut eig_dev = 0.0f64;
    for _ in 0..1000 {
        let s = random_xstate(&mut rng);
        let mut closed = xstate_eigenvalues(&s).unwrap();
        closed.sort_by(f64::total_cmp);
        let mut general: Vec<f64> = SymmetricEigen::new(s.matrix)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        general.sort_by(f64::total_cmp);
        for (c, g) in closed.iter().zip(&general) {
            eig_dev = eig_dev.max((c - g).abs());
        }
    }
    let ok_eig = eig_dev < 1e-12;

    // dephased input: coherence exactly zero, dephasing idempotent
    let mut ok_diag = true;
    let mut ok_idem = true;
    for _ in 0..100 {
        let diag = random_xstate(&mut rng).dephase();
        ok_diag &= qjsd_coherence(&diag).unwrap().c == 0.0;
        ok_idem &= diag.dephase().matrix == diag.matrix;
    }

    // maximally entangled reference point
    let half = Complex64::new(0.5, 0.0);
    let mut bell = CMatrix4::zeros();
    bell[(0, 0)] = half;
    bell[(3, 3)] = half;
    bell[(0, 3)] = half;
    bell[(3, 0)] = half;
    let bell = TwoSiteState {
        matrix: bell,
        basis: Basis::Z,
        r: 1,
    };
    let c_bell = qjsd_coherence(&bell).unwrap().c;
    let closed_bell = (1.5 - 0.75 * 3.0f64.log2()).sqrt();
    let bell_dev = (c_bell - 0.557923).abs().max((c_bell - closed_bell).abs());
    let ok_bell = (c_bell - 0.557923).abs() < 1e-6;

    // entropy invariance under a change of orthonormal basis
    let mut unitary_dev = 0.0f64;
    for _ in 0..50 {
        let rho = random_xstate(&mut rng).matrix;
        let raw = CMatrix4::from_fn(|_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let u = raw.qr().q();
        let rotated = u * rho * u.adjoint();
        unitary_dev = unitary_dev.max((entropy(&rotated) - entropy(&rho)).abs());
    }
    let ok_unitary = unitary_dev < 1e-12;

    let ok = ok_eig && ok_diag && ok_idem && ok_bell && ok_unitary;
    println!(
        "criterion 7: {} - measure contracts: eigenvalue closed form dev {eig_dev:.1e}, \
         diagonal C == 0 {}, dephase idempotent {}, |C_bell - 0.557923| <= {bell_dev:.1e}, \
         unitary entropy dev {unitary_dev:.1e}",
        verdict(ok),
        ok_diag,
        ok_idem
    );
    assert!(ok, "eig {ok_eig} diag {ok_diag} idem {ok_idem} bell {ok_bell} unitary {ok_unitary}");
}

#[test]
fn criterion_8_dm_sign_symmetry() {
    let mut worst = 0.0f64;
    for j in [0.4, 0.8, 1.2, 1.6, 2.0] {
        let mut c = [[0.0f64; 3]; 2];
        for (si, d) in [(0usize, 0.5f64), (1, -0.5)] {
            let p = ModelParams::new(j, 0.5, d).unwrap();
            let gs = ground_state_dense(&FiniteChainSpec::new(8, p)).unwrap();
            assert!(!gs.degenerate, "unexpected degeneracy at J={j}, D={d}");
            for (bi, basis) in [Basis::X, Basis::Y, Basis::Z].into_iter().enumerate() {
                c[si][bi] = oracle_coherence(&gs.vectors[0], 8, 1, basis).unwrap().c;
            }
        }
        for bi in 0..3 {
            worst = worst.max((c[0][bi] - c[1][bi]).abs());
        }
    }
    let ok = worst < 1e-9;
    println!(
        "criterion 8: {} - N=8 coherence invariant under D -> -D, worst |C(D) - C(-D)| = \
         {worst:.2e} across 5 couplings and 3 bases",
        verdict(ok)
    );
    assert!(ok, "worst deviation {worst:.2e} >= 1e-9");
}

// sanity anchor so a regression in the detector itself cannot silently
// relabel the physics criteria above: a kink in C makes the discrete
// curvature swing through a +/- dipole around J*, so a near-equal peak of
// the opposite sign must sit within one grid step of the reported one
#[test]
fn detector_peak_is_half_of_a_curvature_dipole() {
    let spec = SweepSpec {
        gamma: 0.5,
        d_values: vec![0.0],
        j_min: 0.5,
        j_max: 1.5,
        j_steps: 201,
        r_values: vec![1],
        bases: vec![Basis::Z],
    };
    let table = sweep(&spec, &Calibration::default()).unwrap();
    let est = detect_critical_point(&table, 0.0, 1, Basis::Z).unwrap();
    let h = table.j_step().expect("grid has at least two J values");
    let partner = table
        .slice(0.0, 1, Basis::Z)
        .iter()
        .filter(|row| (row.j - est.j_star).abs() <= 2.0 * h + 1e-12)
        .filter_map(|row| row.d2c_dj2)
        .fold(0.0f64, |acc, v| {
            if v * est.signed_peak < 0.0 {
                acc.max(v.abs())
            } else {
                acc
            }
        });
    assert!(
        partner > 0.9 * est.signed_peak.abs(),
        "no opposite-sign partner near J*: peak {}, partner {partner}",
        est.signed_peak
    );
}

// entropy_from_eigenvalues is re-exported for callers that already have a
// spectrum; keep its clamping contract pinned here where the eigensolver
// comparison lives
#[test]
fn entropy_accepts_slightly_negative_eigenvalues() {
    let s = entropy_from_eigenvalues([0.5f64, 0.5, -1e-15, 1e-300].into_iter());
    assert!((s - 1.0).abs() < 1e-9);
}
