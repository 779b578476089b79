#![allow(dead_code)]

use ggc_core::mixing::{FiniteGammaConvolution, GammaComponent, Gig, MixingLaw, ThorinAtom, ThorinPair};
use proptest::prelude::*;

pub fn fgc(tau: f64, parts: &[(f64, f64)]) -> FiniteGammaConvolution {
    FiniteGammaConvolution::new(tau, parts.iter().map(|&(alpha, beta)| GammaComponent { alpha, beta }).collect())
        .unwrap()
}

pub fn fgc_law(tau: f64, parts: &[(f64, f64)]) -> MixingLaw {
    fgc(tau, parts).into()
}

pub fn atomic_law(tau: f64, atoms: &[(f64, f64)]) -> MixingLaw {
    ThorinPair::new(tau, atoms.iter().map(|&(location, weight)| ThorinAtom { location, weight }).collect())
        .unwrap()
        .into()
}

pub fn gig_law(lambda: f64, a: f64, b: f64) -> MixingLaw {
    Gig::new(lambda, a, b).unwrap().into()
}

pub fn drift() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.0..2.0]
}

pub fn components() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.2f64..5.0, 0.1f64..5.0), 1..5)
}

pub fn fgc_strategy() -> impl Strategy<Value = MixingLaw> {
    (drift(), components()).prop_map(|(tau, parts)| fgc_law(tau, &parts))
}

pub fn atomic_strategy() -> impl Strategy<Value = MixingLaw> {
    (drift(), prop::collection::vec((0.2f64..10.0, 0.2f64..5.0), 1..5))
        .prop_map(|(tau, atoms)| atomic_law(tau, &atoms))
}

pub fn gig_strategy() -> impl Strategy<Value = MixingLaw> {
    (-3.0f64..3.0, 0.3f64..3.0, 0.3f64..3.0).prop_map(|(l, a, b)| gig_law(l, a, b))
}

pub fn any_law() -> impl Strategy<Value = MixingLaw> {
    prop_oneof![fgc_strategy(), atomic_strategy(), gig_strategy()]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
