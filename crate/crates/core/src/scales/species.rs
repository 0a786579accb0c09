//! Ion species and the bundled species table.

use std::f64::consts::PI;

use crate::constants::{ATOMIC_MASS_UNIT, BOHR_RADIUS, ELEMENTARY_CHARGE, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

const SPECIES_TABLE: &str = include_str!("../../data/species.txt");

/// Fine-structure level of the single valence electron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Level {
    S12,
    P12,
    P32,
}

impl Level {
    /// (L, S, J) quantum numbers.
    pub fn quantum_numbers(self) -> (f64, f64, f64) {
        match self {
            Level::S12 => (0.0, 0.5, 0.5),
            Level::P12 => (1.0, 0.5, 0.5),
            Level::P32 => (1.0, 0.5, 1.5),
        }
    }

    pub fn j(self) -> f64 {
        self.quantum_numbers().2
    }
}

/// Landé factor with g_s = 2 and the nuclear term dropped.
pub fn lande_g(l: f64, s: f64, j: f64) -> f64 {
    let jj = j * (j + 1.0);
    1.0 + (jj + s * (s + 1.0) - l * (l + 1.0)) / (2.0 * jj)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
    /// ΔE/ħ between P_{1/2} and P_{3/2}, rad/s
    pub fine_structure_splitting: f64,
    /// Γ, rad/s
    pub linewidth: f64,
    /// rad/s
    pub d1_frequency: f64,
    /// rad/s
    pub d2_frequency: f64,
    /// reduced dipole matrix element, C·m
    pub m_d1: f64,
    /// reduced dipole matrix element, C·m
    pub m_d2: f64,
    /// Upper field bound of the Zeeman regime, T.
    pub b_zeeman: f64,
    /// Lower field bound of the Paschen–Back regime, T.
    pub b_paschen_back: f64,
}

impl IonSpecies {
    pub fn lande(&self, level: Level) -> f64 {
        let (l, s, j) = level.quantum_numbers();
        lande_g(l, s, j)
    }

    pub fn d1_wavelength(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.d1_frequency
    }

    pub fn d2_wavelength(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.d2_frequency
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("{}: mass must be positive", self.name)));
        }
        if !(self.linewidth > 0.0) || !(self.fine_structure_splitting > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{}: linewidth and fine-structure splitting must be positive",
                self.name
            )));
        }
        Ok(())
    }

    /// Fails for neutral entries, which carry regime data only.
    pub fn require_ion(&self) -> Result<()> {
        if self.charge <= 0.0 {
            return Err(Error::InvalidParameter(format!("{} is not a positive ion", self.name)));
        }
        Ok(())
    }
}

fn parse_row(line_no: usize, line: &str) -> Result<IonSpecies> {
    let cols: Vec<&str> = line.split_whitespace().collect();
    if cols.len() != 11 {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected 11 columns, found {}", cols.len()),
        });
    }
    let num = |i: usize| -> Result<f64> {
        cols[i].parse::<f64>().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("column {}: {e}", i + 1),
        })
    };
    let wavelength_to_omega = |nm: f64| 2.0 * PI * SPEED_OF_LIGHT / (nm * 1e-9);
    let species = IonSpecies {
        name: cols[0].to_string(),
        mass: num(1)? * ATOMIC_MASS_UNIT,
        charge: num(2)? * ELEMENTARY_CHARGE,
        linewidth: 2.0 * PI * num(3)? * 1e6,
        fine_structure_splitting: num(4)? * 1e12,
        d1_frequency: wavelength_to_omega(num(5)?),
        d2_frequency: wavelength_to_omega(num(6)?),
        m_d1: num(7)? * ELEMENTARY_CHARGE * BOHR_RADIUS,
        m_d2: num(8)? * ELEMENTARY_CHARGE * BOHR_RADIUS,
        b_zeeman: num(9)?,
        b_paschen_back: num(10)?,
    };
    Ok(species)
}

/// Parses a species table in the bundled text format.
pub fn parse_species_table(text: &str) -> Result<Vec<IonSpecies>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let species = parse_row(i + 1, line)?;
        species.validate()?;
        out.push(species);
    }
    Ok(out)
}

/// The bundled table.
pub fn species_table() -> Vec<IonSpecies> {
    parse_species_table(SPECIES_TABLE).expect("bundled species table is well formed")
}

/// Looks a species up by name; `Be`, `Be_II`, `Be II` and `9Be+`-free spellings are accepted.
pub fn species(name: &str) -> Result<IonSpecies> {
    let wanted = normalize(name);
    species_table()
        .into_iter()
        .find(|s| {
            let key = normalize(&s.name);
            key == wanted || key.split('_').next() == Some(wanted.as_str())
        })
        .ok_or_else(|| Error::UnknownSpecies(name.to_string()))
}

fn normalize(name: &str) -> String {
    name.trim().replace([' ', '-'], "_").to_ascii_lowercase()
}
