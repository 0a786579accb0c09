use std::path::Path;

use wigner_core::crystal::*;
use wigner_core::scales::TrapSetup;

fn shells(state: &CrystalState) -> Vec<usize> {
    let mut radii: Vec<f64> = state.positions.iter().map(|r| r[0].hypot(r[1])).collect();
    radii.sort_by(f64::total_cmp);
    let outer = radii[radii.len() - 1];
    let mut counts = vec![1];
    for w in radii.windows(2) {
        if w[1] - w[0] > 0.25 * outer {
            counts.push(1);
        } else {
            *counts.last_mut().unwrap() += 1;
        }
    }
    counts
}

#[test]
fn small_cluster_shells() {
    let expected: [&[usize]; 7] = [&[2], &[3], &[4], &[5], &[1, 5], &[1, 6], &[1, 7]];
    for (n, want) in (2..=8).zip(expected) {
        let setup = TrapSetup::new(1.0, 0.7, n).unwrap();
        let state = find_equilibrium(&setup, 0.0, &EquilibriumSearch::new(n, 5)).unwrap();

        let mut exhaustive = EquilibriumSearch::new(n, 99);
        exhaustive.restarts = 24;
        let oracle = find_equilibrium(&setup, 0.0, &exhaustive).unwrap();
        assert!((state.energy - oracle.energy).abs() <= 1e-10 * oracle.energy, "N={n}");
        assert_eq!(shells(&state), want, "N={n}");
        assert!(state.max_axial_offset() < 1e-10);
    }
}

#[test]
fn rotation_invariance() {
    let setup = TrapSetup::new(1.0, 0.7, 7).unwrap();
    let state = find_equilibrium(&setup, 0.0, &EquilibriumSearch::new(7, 2)).unwrap();
    for angle in [0.3, 1.7, -2.9] {
        let (s, c) = f64::sin_cos(angle);
        let turned: Vec<Vec3> = state.positions.iter().map(|r| [c * r[0] - s * r[1], s * r[0] + c * r[1], r[2]]).collect();
        let e = effective_potential(&turned, 0.5, 0.7).unwrap();
        assert!((e - state.energy).abs() <= 1e-12 * state.energy);
    }
}

#[test]
fn zero_momentum_matches_fixed_frequency_minimum() {
    let setup = TrapSetup::new(1.0, 0.7, 6).unwrap();
    let search = EquilibriumSearch::new(6, 4);
    let state = find_equilibrium(&setup, 0.0, &search).unwrap();
    assert_eq!(state.rotation_frequency, 0.5);
    let direct = anneal_restarts(&setup, 0.5, &search.schedule, search.restarts).unwrap();
    let best = direct
        .iter()
        .filter_map(|c| newton_refine(c).ok())
        .map(|r| r.state.energy)
        .fold(f64::INFINITY, f64::min);
    assert!((best - state.energy).abs() <= 1e-10 * best);
}

fn fixture(name: &str) -> CrystalState {
    load_state(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)).unwrap()
}

#[test]
fn reference_configurations_reevaluate() {
    for name in ["n30_az070_p0.txt", "n30_az070_p4000.txt", "n30_az002_p130000.txt"] {
        let s = fixture(name);
        let e = effective_potential(&s.positions, s.rotation_frequency, s.axial_ratio).unwrap();
        assert!((e - s.energy).abs() <= 1e-12 * s.energy.abs(), "{name}");
        assert!(s.converged, "{name}: gradient {}", s.gradient_norm);
        let p = total_angular_momentum(&s.positions, s.rotation_frequency);
        assert!((p - s.angular_momentum).abs() <= 1e-10 * p.abs().max(1.0), "{name}");
        assert!(s.max_axial_offset() < 1e-10);
    }
}

#[test]
fn rotation_frequency_at_reference_momentum() {
    let s = fixture("n30_az070_p4000.txt");
    let alpha = rotation_frequency_from_angular_momentum(&s.positions, 4000.0).unwrap();
    assert!((alpha - 32.75 / 76.08).abs() < 0.002, "{alpha}");
    let s = fixture("n30_az002_p130000.txt");
    let ratio = s.rotation_frequency / (1.65 / 7608.0);
    assert!((ratio - 1.0).abs() < 0.15, "{ratio}");
}

#[test]
fn fresh_search_reproduces_fixture() {
    let setup = TrapSetup::new(1.0, 0.7, 30).unwrap();
    let s = find_equilibrium(&setup, 4000.0, &EquilibriumSearch::new(30, 1)).unwrap();
    let reference = fixture("n30_az070_p4000.txt");
    assert!((s.energy - reference.energy).abs() < 1e-9 * reference.energy);
    assert!((s.rotation_frequency - reference.rotation_frequency).abs() < 1e-9);
}
