//! Acceptance suite. One line per criterion; exits non-zero when a criterion outside
//! `KNOWN_RED` fails or a criterion inside it starts passing.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wigner_core::beams::*;
use wigner_core::bench::*;
use wigner_core::constants::HBAR;
use wigner_core::crystal::{find_equilibrium, CrystalState, EquilibriumSearch, Vec3};
use wigner_core::gate::{form_factor, leading_term, FormFactorRegime};
use wigner_core::modes::*;
use wigner_core::scales::*;

/// Criteria expected to fail, with the reason.
const KNOWN_RED: &[(usize, &str)] = &[(
    4,
    "omega_r(P_theta) falls monotonically along the slow branch and saturates toward the magnetron \
     limit; the computed curve has no interior minimum, only a knee near P_theta = 4e3",
)];

struct Outcome {
    id: usize,
    title: &'static str,
    checks: Vec<(String, bool)>,
    elapsed: f64,
}

impl Outcome {
    fn new(id: usize, title: &'static str) -> Self {
        Outcome { id, title, checks: Vec::new(), elapsed: 0.0 }
    }

    fn check(&mut self, passed: bool, detail: String) {
        self.checks.push((detail, passed));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    o.elapsed = start.elapsed().as_secs_f64();
    o
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn repo_config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

fn slow_branch(p_theta: f64) -> CrystalState {
    let setup = TrapSetup::new(1.0, 0.7, 30).unwrap();
    find_equilibrium(&setup, p_theta, &EquilibriumSearch::new(30, 1)).unwrap()
}

fn planar_crystal() -> CrystalState {
    let setup = TrapSetup::new(1.0, 0.02, 30).unwrap();
    find_equilibrium(&setup, 1.3e5, &EquilibriumSearch::new(30, 1)).unwrap()
}

fn trap_numbers() -> Outcome {
    let mut o = Outcome::new(1, "closed-form trap numbers");
    let f = trap_frequencies(&TrapSetup::from_hz(76.08e3, 0.7, 30).unwrap()).unwrap();
    let (z, xy) = (rad_to_hz(f.axial), rad_to_hz(f.in_plane));
    o.check((z - 53.26e3).abs() <= 10.0, format!("nu_z = {:.3} kHz", z / 1e3));
    o.check((xy - 5.38e3).abs() <= 10.0, format!("nu_xy = {:.3} kHz", xy / 1e3));
    let f = trap_frequencies(&TrapSetup::from_hz(7.608e6, 0.02, 30).unwrap()).unwrap();
    let (z, xy) = (rad_to_hz(f.axial), rad_to_hz(f.in_plane));
    o.check((z / 152.16e3 - 1.0).abs() <= 5e-3, format!("nu_z = {:.3} kHz", z / 1e3));
    o.check((xy / 3.80e6 - 1.0).abs() <= 5e-3, format!("nu_xy = {:.4} MHz", xy / 1e6));
    o
}

fn anisotropy_limits(stiff: &CrystalState, planar: &CrystalState) -> Outcome {
    let mut o = Outcome::new(2, "anisotropy and planarity");
    let b3 = anisotropy_ratio(stiff.rotation_frequency, 0.7);
    o.check((b3 - 3.4e-4).abs() <= 0.1e-4, format!("beta(alpha_z = 0.7, P = 4e3) = {b3:.3e}"));
    let b4 = anisotropy_ratio(planar.rotation_frequency, 0.02);
    o.check((b4 - 4e-2).abs() <= 0.3e-2, format!("beta(alpha_z = 0.02, P = 1.3e5) = {b4:.4e}"));
    let caption = anisotropy(hz_to_rad(32.75e3), &TrapSetup::from_hz(76.08e3, 0.7, 30).unwrap());
    o.check((caption - 3.4e-4).abs() <= 0.1e-4, format!("beta(32.75 kHz) = {caption:.3e}"));
    let bc = critical_anisotropy(30);
    o.check((bc - 0.1214).abs() <= 5e-4, format!("beta_c(30) = {bc:.5}"));
    o.check(stability_class(b4, 30) == StabilityClass::Planar2D, "alpha_z = 0.02 crystal is planar".into());
    o
}

fn effective_radial(planar: &CrystalState) -> Outcome {
    let mut o = Outcome::new(3, "effective radial frequency");
    let setup = TrapSetup::from_hz(7.608e6, 0.02, 30).unwrap();
    let wr = planar.rotation_frequency * setup.cyclotron_frequency;
    let nu = rad_to_hz(effective_radial_frequency(wr, &setup).unwrap());
    o.check((nu - 31.47e3).abs() <= 1e3, format!("nu_eff = {:.2} kHz at nu_r = {:.4} kHz", nu / 1e3, rad_to_hz(wr) / 1e3));
    let caption = rad_to_hz(effective_radial_frequency(hz_to_rad(1.65e3), &setup).unwrap());
    o.check((caption - 31.47e3).abs() <= 1e3, format!("nu_eff(1.65 kHz) = {:.2} kHz", caption / 1e3));
    let h = hz_to_rad(1.0);
    let slope = (effective_radial_frequency(wr + h, &setup).unwrap() - effective_radial_frequency(wr - h, &setup).unwrap()) / (2.0 * h);
    o.check(true, format!("sensitivity d nu_eff / d nu_r = {slope:.2}"));
    o
}

fn rotation_curve(curve: &[(f64, CrystalState)]) -> Outcome {
    let mut o = Outcome::new(4, "equilibrium pipeline along P_theta");
    let alpha: Vec<f64> = curve.iter().map(|(_, s)| s.rotation_frequency).collect();
    o.check((alpha[0] - 0.5).abs() < 1e-9, format!("omega_r/omega_c(0) = {:.10}", alpha[0]));
    let at_4000 = curve.iter().find(|(p, _)| *p == 4e3).unwrap().1.rotation_frequency;
    o.check((at_4000 - 0.4305).abs() <= 5e-3, format!("omega_r/omega_c(4e3) = {at_4000:.5}"));
    let interior: Vec<f64> = (1..alpha.len() - 1)
        .filter(|&i| alpha[i] < alpha[i - 1] && alpha[i] < alpha[i + 1])
        .map(|i| curve[i].0)
        .collect();
    let listing: Vec<String> = curve.iter().map(|(p, s)| format!("{p:.0}:{:.5}", s.rotation_frequency)).collect();
    o.check(
        interior.iter().any(|&p| (2e3..=6e3).contains(&p)),
        format!("interior minimum near 4e3: found {interior:?} on [{}]", listing.join(" ")),
    );
    o
}

/// Rotating-frame Hamiltonian from the lab form, phase vector (x, p_x, y, p_y, z, p_z) per ion.
fn hamiltonian(d: &[f64], alpha: f64, az: f64) -> f64 {
    let n = d.len() / 6;
    let c = alpha - 0.5;
    let mut e = 0.0;
    for k in 0..n {
        let v = &d[6 * k..6 * k + 6];
        e += 0.5 * (v[1] * v[1] + v[3] * v[3] + v[5] * v[5]);
        e += c * (v[0] * v[3] - v[2] * v[1]);
        e += (1.0 - 2.0 * az * az) / 8.0 * (v[0] * v[0] + v[2] * v[2]) + 0.5 * az * az * v[4] * v[4];
        for j in k + 1..n {
            let (dx, dy, dz) = (v[0] - d[6 * j], v[2] - d[6 * j + 2], v[4] - d[6 * j + 4]);
            e += 1.0 / (dx * dx + dy * dy + dz * dz).sqrt();
        }
    }
    e
}

fn finite_difference_hessian(positions: &[Vec3], alpha: f64, az: f64) -> DMatrix<f64> {
    let n = positions.len();
    let mut d = vec![0.0; 6 * n];
    for (k, r) in positions.iter().enumerate() {
        d[6 * k] = r[0];
        d[6 * k + 2] = r[1];
        d[6 * k + 4] = r[2];
        d[6 * k + 1] = (alpha - 0.5) * r[1];
        d[6 * k + 3] = -(alpha - 0.5) * r[0];
    }
    let h = 1e-3;
    let rows: Vec<Vec<f64>> = (0..6 * n)
        .into_par_iter()
        .map(|a| {
            (a..6 * n)
                .map(|b| {
                    let f = |sa: f64, sb: f64| {
                        let mut e = d.clone();
                        e[a] += sa * h;
                        e[b] += sb * h;
                        hamiltonian(&e, alpha, az)
                    };
                    (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * h * h)
                })
                .collect()
        })
        .collect();
    let mut out = DMatrix::zeros(6 * n, 6 * n);
    for (a, row) in rows.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            out[(a, a + offset)] = v;
            out[(a + offset, a)] = v;
        }
    }
    out
}

fn symplectic_checks(crystals: &[(&str, &CrystalState)], rest_frame: &CrystalState) -> Outcome {
    let mut o = Outcome::new(5, "symplectic correctness");
    let (mut sym, mut oracle, mut fd) = (0.0f64, 0.0f64, 0.0f64);
    for (_, state) in crystals {
        let qh = build_hessian(state).unwrap();
        let sp = mode_spectrum(&qh).unwrap();
        let j = symplectic_form(qh.dimension());
        let s = &sp.symplectic;
        sym = sym.max(max_abs(&(s * &j * s.transpose() - &j)));
        let u = qh.rotation_mode.clone().unwrap();
        let h = &qh.hessian + ZERO_MODE_SHIFT * (&u * u.transpose());
        for (a, b) in sp.frequencies.iter().zip(symplectic_eigenvalues_direct(&h)) {
            oracle = oracle.max((a - b).abs());
        }
        let exact = finite_difference_hessian(&state.positions, state.rotation_frequency, state.axial_ratio);
        fd = fd.max(max_abs(&(exact - &qh.hessian)));
    }
    let names: Vec<&str> = crystals.iter().map(|(n, _)| *n).collect();
    let names = names.join(", ");
    o.check(sym < 1e-10, format!("|S J S^T - J|_max = {sym:.2e} ({names})"));
    o.check(oracle < 1e-10, format!("Williamson vs J H eigenvalues = {oracle:.2e}"));
    o.check(fd < 1e-6, format!("Hessian vs finite differences = {fd:.2e}"));
    let sp = mode_spectrum(&build_hessian(rest_frame).unwrap()).unwrap();
    let orth = orthogonal_modes(rest_frame).unwrap();
    let gap = sp.frequencies.iter().zip(&orth.frequencies).skip(1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    o.check(gap < 1e-8, format!("symplectic vs orthogonal spectrum at omega_c/2 = {gap:.2e}"));
    o
}

fn form_factor_claims(rest_frame: &CrystalState) -> Outcome {
    let mut o = Outcome::new(6, "form-factor claims");
    let single = OrthogonalModes { transform: DMatrix::identity(3, 3), frequencies: vec![0.37; 3] };
    let hbar = 4.1289e-5;
    let (w, nu) = (0.37, 37.0);
    let ad = form_factor(&single, hbar, (0, 0), FormFactorRegime::Adiabatic).unwrap()[(0, 0)];
    let md = form_factor(&single, hbar, (0, 0), FormFactorRegime::Modulated(nu)).unwrap()[(0, 0)];
    let ratio = (md + 1.0 / (4.0 * hbar * nu * nu)) / ad;
    let expected = -(w / nu).powi(4) / 2.0;
    let rel = (ratio / expected - 1.0).abs();
    o.check(rel < 1e-3, format!("modulated/adiabatic ratio at nu = 100 omega: {ratio:.6e} vs {expected:.6e} (rel {rel:.1e})"));
    let orth = orthogonal_modes(rest_frame).unwrap();
    let lead = (0..30).flat_map(|n| [(n, n), (n, (n + 7) % 30)]).map(|p| leading_term(&orth, p).amax()).fold(0.0, f64::max);
    o.check(lead < 1e-12, format!("leading 1/nu^2 term = {lead:.2e}"));
    o
}

fn gate_fidelity() -> Outcome {
    let mut o = Outcome::new(7, "gate fidelity on the planar crystal");
    let config = repo_config("planar_gate.cfg");
    let env = Environment::new(&config).unwrap();
    let state = solve_equilibrium(&config, &env, config.angular_momentum).unwrap();
    let (spectrum, bands) = solve_spectrum(&state).unwrap();
    let gap = widest_gap(&bands).unwrap();
    let gate = build_gate(&config, &env, &state, &spectrum, &bands).unwrap();
    let result = gate.run(&config.temperatures).unwrap();
    let curve = &result.curve;
    let worst = curve.iter().map(|p| p.infidelity).fold(0.0, f64::max);
    let span = (curve[0].temperature, curve[curve.len() - 1].temperature);
    o.check(
        worst < 1e-3 && span.0 <= 1e-4 && span.1 >= 1e-2,
        format!("max 1 - F over [{:.1}, {:.1}] mK ({} points) = {worst:.2e}", span.0 * 1e3, span.1 * 1e3, curve.len()),
    );
    o.check(curve[0].infidelity < 1e-4, format!("1 - F at 0.1 mK = {:.2e}", curve[0].infidelity));
    o.check(curve.windows(2).all(|w| w[1].fidelity <= w[0].fidelity), "1 - F monotone in T".into());
    let theta = result.phase.theta;
    o.check((theta.abs() - PI).abs() < 1e-6, format!("|theta| - pi = {:.1e}", theta.abs() - PI));
    let fraction = gate.rotation_fraction(state.rotation_frequency);
    o.check((fraction - 6e-3).abs() < 1e-12, format!("tau_g/tau_r = {fraction:.3e}"));
    let nu = gate.spec.carrier_frequency / env.setup.cyclotron_frequency;
    let depth = (nu - gap.lower) / gap.width();
    o.check(
        (1.0 / 3.0..=2.0 / 3.0).contains(&depth),
        format!("tuned nu = {nu:.4} omega_c, {:.0}% into gap [{:.4}, {:.4}]", 100.0 * depth, gap.lower, gap.upper),
    );
    let mut midpoint = config.clone();
    midpoint.carrier = CarrierChoice::Hz(0.5 * (gap.lower + gap.upper) * env.setup.cyclotron_frequency / TAU);
    let literal = build_gate(&midpoint, &env, &state, &spectrum, &bands).unwrap().worst_infidelity(&[1e-3]).unwrap();
    o.check(true, format!("arithmetic gap midpoint gives 1 - F(1 mK) = {literal:.2e}"));
    o
}

fn force_design() -> Outcome {
    let mut o = Outcome::new(8, "force-design algebra");
    type Entry = fn(f64, f64) -> f64;
    // Coefficients of M E0^2 grad(chi^2)/hbar as printed, with zeeman = mu_B B/hbar.
    // `coefficient` carries the 1/hbar itself.
    let printed: [(Polarization, Line, Qubit, Option<Entry>); 12] = {
        use Line::*;
        use Polarization::*;
        use Qubit::*;
        [
            (SigmaMinus, D1, Zero, None),
            (SigmaMinus, D1, One, Some(|d, b| -1.0 / (2.0 * (3.0 * d + 4.0 * b)))),
            (SigmaMinus, D2, Zero, Some(|d, b| -1.0 / (4.0 * (d + b)))),
            (SigmaMinus, D2, One, Some(|d, b| -1.0 / (4.0 * (3.0 * d + 5.0 * b)))),
            (Pi, D1, Zero, Some(|d, b| 1.0 / (4.0 * (2.0 * b - 3.0 * d)))),
            (Pi, D1, One, Some(|d, b| -1.0 / (4.0 * (3.0 * d + 2.0 * b)))),
            (Pi, D2, Zero, Some(|d, b| 1.0 / (2.0 * (b - 3.0 * d)))),
            (Pi, D2, One, Some(|d, b| -1.0 / (2.0 * (3.0 * d + b)))),
            (SigmaPlus, D1, Zero, Some(|d, b| 1.0 / (2.0 * (4.0 * b - 3.0 * d)))),
            (SigmaPlus, D1, One, None),
            (SigmaPlus, D2, Zero, Some(|d, b| 1.0 / (4.0 * (5.0 * b - 3.0 * d)))),
            (SigmaPlus, D2, One, Some(|d, b| 1.0 / (4.0 * (b - d)))),
        ]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut table_error = 0.0f64;
    let mut shape_ok = true;
    for _ in 0..200 {
        let d = rng.random_range(-5e11..5e11);
        let b = rng.random_range(-5e9..5e9);
        for (pol, line, state, expected) in printed {
            match (table_entry(pol, line, state), expected) {
                (None, None) => {}
                (Some(e), Some(f)) => {
                    let want = f(d, b);
                    table_error = table_error.max((e.coefficient(d, b).unwrap() * HBAR - want).abs() / want.abs());
                }
                _ => shape_ok = false,
            }
        }
    }
    o.check(shape_ok && table_error < 1e-14, format!("12 table entries, max relative deviation {table_error:.1e}"));

    let mut balance = 0.0f64;
    for _ in 0..1000 {
        let d1 = rng.random_range(-5e11..5e11);
        let d2 = rng.random_range(-5e11..5e11);
        let b = rng.random_range(-5e9..5e9);
        let r = sigma_plus_ratio(d1, d2, b);
        let scale = [1.0 / (d2 - b), 1.0 / (3.0 * d2 - 5.0 * b), 2.0 * r / (3.0 * d1 - 4.0 * b)].iter().map(|t| t.abs()).fold(0.0, f64::max);
        balance = balance.max(sigma_plus_balance(r, d1, d2, b).abs() / scale);
    }
    o.check(balance < 1e-12, format!("sigma+ balance residual over 1000 draws = {balance:.1e}"));

    let (mut opposition, mut mean) = (0.0f64, 0.0f64);
    let be = species("Be").unwrap();
    let mg = species("Mg").unwrap();
    for scheme in Scheme::ALL {
        for (ion, design) in [
            (&be, PulseDesign::new(scheme, TAU * 2e6, 3, (-3e10, 3e10), 0.01)),
            (&mg, PulseDesign::new(scheme, TAU * 5e6, 4, (-8e11, 1e12), 0.5)),
        ] {
            let r = verify_conditions(&build_pulse_sequence(&design, ion).unwrap());
            opposition = opposition.max(r.opposition);
            mean = mean.max(r.mean[0]).max(r.mean[1]);
        }
    }
    o.check(opposition < 1e-8 && mean < 1e-8, format!("pulse residuals: opposition {opposition:.1e}, mean {mean:.1e}"));

    for (name, field, expected) in [("Be", 4.5, Regime::Zeeman), ("Mg", 12.0, Regime::Zeeman), ("Be", 30.0, Regime::PaschenBack)] {
        let got = classify_regime(&species(name).unwrap(), field).unwrap();
        o.check(got == expected, format!("{name} II at {field} T: {}", got.label()));
    }
    o
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != TIMING_FILE)
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let mut bytes = fs::read(&p).unwrap();
            if name == MANIFEST_FILE {
                let text = String::from_utf8(bytes).unwrap();
                bytes = text.lines().filter(|l| !l.starts_with("output")).collect::<Vec<_>>().join("\n").into_bytes();
            }
            (name, bytes)
        })
        .collect();
    files.sort();
    files
}

fn determinism(threads: usize) -> Outcome {
    let mut o = Outcome::new(9, "determinism across thread counts");
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs: Vec<PathBuf> = Vec::new();
    let mut sweeps = Vec::new();
    for n in [1, threads] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        let mut config = repo_config("planar_gate.cfg");
        config.output = tmp.path().join(format!("run{n}"));
        pool.install(|| run_experiment(&config)).unwrap();
        outputs.push(config.output.clone());
        let sweep = pool.install(|| run_sweep(&config, SweepAxis::CarrierHz, &[4.3e6, 4.43e6, 4.5e6])).unwrap();
        sweeps.push(sweep_csv(SweepAxis::CarrierHz, &sweep));
    }
    let (a, b) = (artifacts(&outputs[0]), artifacts(&outputs[1]));
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    o.check(a == b, format!("1 vs {threads} threads: {} identical", names.join(", ")));
    o.check(sweeps[0] == sweeps[1], format!("1 vs {threads} threads: 3-point sweep identical"));
    o
}

fn main() -> ExitCode {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(4);
    let mut outcomes = vec![timed(trap_numbers)];

    let start = Instant::now();
    let momenta = [0.0, 1e3, 2e3, 3e3, 4e3, 5e3, 6e3, 8e3, 1e4];
    let curve: Vec<(f64, CrystalState)> = momenta.par_iter().map(|&p| (p, slow_branch(p))).collect();
    let planar = planar_crystal();
    let shared = start.elapsed().as_secs_f64();
    let stiff = &curve[4].1;
    let rest = &curve[0].1;

    outcomes.push(timed(|| anisotropy_limits(stiff, &planar)));
    outcomes.push(timed(|| effective_radial(&planar)));
    let mut c4 = timed(|| rotation_curve(&curve));
    c4.elapsed += shared;
    outcomes.push(c4);
    outcomes.push(timed(|| symplectic_checks(&[("P=0", rest), ("P=4e3", stiff), ("planar", &planar)], rest)));
    outcomes.push(timed(|| form_factor_claims(rest)));
    outcomes.push(timed(gate_fidelity));
    outcomes.push(timed(force_design));
    outcomes.push(timed(|| determinism(threads)));

    let mut unexpected = Vec::new();
    for o in &outcomes {
        let known = KNOWN_RED.iter().find(|(id, _)| *id == o.id);
        let tag = match (o.passed(), known) {
            (true, None) => "PASS",
            (false, Some(_)) => "FAIL (known red)",
            (false, None) => "FAIL",
            (true, Some(_)) => "PASS (listed as known red)",
        };
        println!("criterion {}: {tag}  {} [{:.1} s]", o.id, o.title, o.elapsed);
        for (detail, ok) in &o.checks {
            println!("    {} {detail}", if *ok { "ok " } else { "bad" });
        }
        if let Some((_, reason)) = known {
            println!("    known red: {reason}");
        }
        if o.passed() == known.is_some() {
            unexpected.push(o.id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: {} criteria, all as expected", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
