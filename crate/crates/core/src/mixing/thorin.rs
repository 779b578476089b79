use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One atom `w_i δ_{t_i}` of a Thorin measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThorinAtom {
    pub location: f64,
    pub weight: f64,
}

/// GGC generator `(τ, ν)` with `ν` a finite sum of atoms.
///
/// Atoms are kept sorted by strictly increasing location, with duplicates
/// merged, so two generators describing the same law compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawThorinPair")]
pub struct ThorinPair {
    tau: f64,
    atoms: Vec<ThorinAtom>,
}

#[derive(Deserialize)]
struct RawThorinPair {
    #[serde(default)]
    tau: f64,
    atoms: Vec<ThorinAtom>,
}

impl TryFrom<RawThorinPair> for ThorinPair {
    type Error = Error;

    fn try_from(raw: RawThorinPair) -> Result<Self> {
        ThorinPair::new(raw.tau, raw.atoms)
    }
}

impl ThorinPair {
    pub fn new(tau: f64, atoms: Vec<ThorinAtom>) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::invalid("tau", "must be finite and nonnegative"));
        }
        if atoms.is_empty() {
            return Err(Error::invalid("atoms", "at least one atom is required"));
        }
        for (i, atom) in atoms.iter().enumerate() {
            if !(atom.location > 0.0) || !atom.location.is_finite() {
                return Err(Error::invalid(format!("atoms[{i}].location"), "must be finite and positive"));
            }
            if !(atom.weight > 0.0) || !atom.weight.is_finite() {
                return Err(Error::invalid(format!("atoms[{i}].weight"), "must be finite and positive"));
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let mut merged: Vec<ThorinAtom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.location == atom.location => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        Ok(ThorinPair { tau, atoms: merged })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Atoms in increasing location order.
    pub fn atoms(&self) -> &[ThorinAtom] {
        &self.atoms
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Smallest atom location; equals `-ŝ`.
    pub fn min_location(&self) -> f64 {
        self.atoms[0].location
    }

    /// `h(s) = 1 / F_ν^{-1}(s)` of the Wiener-Gamma representation
    /// `Z - τ = ∫ h(s) dγ_s`.
    ///
    /// `F_ν^{-1}(s) = inf{x : F_ν(x) > s}` is the right-continuous inverse of
    /// the cumulative weight. Beyond the total weight the measure is exhausted
    /// and `h` is zero.
    pub fn wiener_gamma_h(&self, s: f64) -> f64 {
        let mut cumulative = 0.0;
        for atom in &self.atoms {
            cumulative += atom.weight;
            if cumulative > s {
                return 1.0 / atom.location;
            }
        }
        0.0
    }

    /// `∫_(0, δ] ν(dt) / t`.
    pub fn partial_mean(&self, delta: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.location <= delta).map(|a| a.weight / a.location).sum()
    }
}
