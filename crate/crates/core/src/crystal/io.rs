use std::fmt::Write as _;
use std::path::Path;

use super::potential::Vec3;
use super::CrystalState;
use crate::error::{Error, Result};

/// Text form of an equilibrium: five `key value` header lines, then one `x y z` row per ion.
pub fn write_state(state: &CrystalState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "N {}", state.ion_count());
    let _ = writeln!(out, "alpha_z {:.16e}", state.axial_ratio);
    let _ = writeln!(out, "P_theta {:.16e}", state.angular_momentum);
    let _ = writeln!(out, "omega_r_over_omega_c {:.16e}", state.rotation_frequency);
    let _ = writeln!(out, "energy {:.16e}", state.energy);
    for r in &state.positions {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", r[0], r[1], r[2]);
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn header(lines: &mut std::iter::Enumerate<std::str::Lines>, key: &str) -> Result<(usize, String)> {
    let (i, raw) = lines.next().ok_or_else(|| parse_err(0, format!("missing header `{key}`")))?;
    let mut parts = raw.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok((i + 1, v.to_string())),
        _ => Err(parse_err(i + 1, format!("expected `{key} <value>`"))),
    }
}

fn number(line: usize, text: &str) -> Result<f64> {
    text.parse::<f64>().map_err(|_| parse_err(line, format!("bad number `{text}`")))
}

/// Parses the text form. Positions, α_z, P_θ, ω_r and the energy are restored bit-exactly;
/// gradient and convergence flag are recomputed.
pub fn parse_state(text: &str) -> Result<CrystalState> {
    let mut lines = text.lines().enumerate();
    let (l, n) = header(&mut lines, "N")?;
    let n: usize = n.parse().map_err(|_| parse_err(l, "bad ion count"))?;
    let (l, v) = header(&mut lines, "alpha_z")?;
    let axial_ratio = number(l, &v)?;
    let (l, v) = header(&mut lines, "P_theta")?;
    let angular_momentum = number(l, &v)?;
    let (l, v) = header(&mut lines, "omega_r_over_omega_c")?;
    let rotation_frequency = number(l, &v)?;
    let (l, v) = header(&mut lines, "energy")?;
    let energy = number(l, &v)?;

    let mut positions: Vec<Vec3> = Vec::with_capacity(n);
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(parse_err(i + 1, format!("expected 3 columns, found {}", cols.len())));
        }
        positions.push([number(i + 1, cols[0])?, number(i + 1, cols[1])?, number(i + 1, cols[2])?]);
    }
    if positions.len() != n {
        return Err(parse_err(0, format!("header says {n} ions, found {}", positions.len())));
    }
    let mut state = CrystalState::from_positions(positions, rotation_frequency, axial_ratio)?;
    state.angular_momentum = angular_momentum;
    state.energy = energy;
    Ok(state)
}

pub fn save_state(state: &CrystalState, path: &Path) -> Result<()> {
    std::fs::write(path, write_state(state))?;
    Ok(())
}

pub fn load_state(path: &Path) -> Result<CrystalState> {
    parse_state(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CrystalState {
        let x = vec![[0.1 + 1e-17, -2.0 / 3.0, 0.0], [std::f64::consts::PI, 1e-300, -0.0], [-5.5, 7.25, 1e-9]];
        CrystalState::from_positions(x, 0.4305, 0.7).unwrap()
    }

    #[test]
    fn bit_exact_round_trip() {
        let s = sample();
        let back = parse_state(&write_state(&s)).unwrap();
        for (a, b) in s.positions.iter().zip(&back.positions) {
            for c in 0..3 {
                assert_eq!(a[c].to_bits(), b[c].to_bits());
            }
        }
        assert_eq!(s.energy.to_bits(), back.energy.to_bits());
        assert_eq!(s.angular_momentum.to_bits(), back.angular_momentum.to_bits());
        assert_eq!(s.rotation_frequency.to_bits(), back.rotation_frequency.to_bits());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eq.txt");
        save_state(&sample(), &path).unwrap();
        assert_eq!(load_state(&path).unwrap().positions, sample().positions);
    }

    #[test]
    fn reports_line_of_bad_row() {
        let mut text = write_state(&sample());
        text = text.replacen("-5.5", "oops", 1);
        match parse_state(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn count_mismatch() {
        let text = write_state(&sample()).replacen("N 3", "N 4", 1);
        assert!(matches!(parse_state(&text), Err(Error::Parse { .. })));
    }
}
