//! State-dependent dipole forces: Zeeman shifts, field regimes, the force table, intensity
//! ratios and modulated pulse sequences. The common spatial profile ∇χ² is factored out of
//! every force.

mod pulses;
mod ratio;
mod table;
mod zeeman;

pub use pulses::{build_pulse_sequence, verify_conditions, ConditionResiduals, PulseDesign, PulseSequence, Segment, MIN_SAMPLES_PER_PERIOD};
pub use ratio::{sigma_plus_balance, sigma_plus_ratio, solve_intensity_ratio, Beam, Branch, RatioSolution, Scheme};
pub use table::{check_detuning_chain, dipole_force, table_entry, ForceTerm, Line, Polarization, Qubit, TableEntry};
pub use zeeman::{classify_regime, require_zeeman, zeeman_scale, zeeman_shift, Regime};
