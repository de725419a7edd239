//! Semi-analytic engine: closed forms for top-hat pulses, the Fock-state
//! ODE hierarchy, fluxes and regression-theorem correlations.

mod closed_form;
mod correlation;
mod flux;
mod hierarchy;

pub use closed_form::{
    coherence_1photon_rect, flux_chiral_rect, g1_chiral_rect, g1_chiral_rect_parts, g1_chiral_rect_terms,
    pop_1photon_rect, stationary_spectrum, G1Terms,
};
pub use correlation::{g1_free_pulse, g1_qrt, g1_qrt_terms};
pub use flux::{flux_general, flux_general_with, EmissionRecord};
pub use hierarchy::{
    hierarchy_integrate, hierarchy_integrate_with, pop_2photon_rect, HierarchyHistory, HierarchyOptions,
};
