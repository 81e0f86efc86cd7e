//! Finite-stage certificates. Every asymptotic property is reported at a
//! horizon, never claimed outright.

pub mod arithmetic;
pub mod conservativity;
pub mod counting;
pub mod ergodicity;
pub mod report;
pub mod rigidity;

pub use arithmetic::{
    arithmetic_report, divisibility_gcd, staircase_shape, staircase_subset_detect, wde_probe,
    StaircaseRun,
};
pub use conservativity::{
    cons_fraction_exact, cons_fraction_of, conservativity_sufficient, nonconservativity_check,
    rho_bound,
};
pub use counting::{gap_pair_count, printed_gap_pair_count, triangular_gap};
pub use ergodicity::{nonerg_pair_fraction, nonergodicity_certificate, pair_fraction_of};
pub use report::{CertificateKind, CertificateReport, Entry, Verdict};
pub use rigidity::{alpha_type_profile, koopman_decay_check, rigidity_ratio, rigidity_scan};
