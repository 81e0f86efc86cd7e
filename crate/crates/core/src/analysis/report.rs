use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CertificateKind {
    Conservativity,
    NonConservativity,
    NonErgodicity,
    Rigidity,
    AlphaType,
    Arithmetic,
    Divisibility,
    WdeProbe,
    KoopmanDecay,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::Conservativity => "conservativity",
            CertificateKind::NonConservativity => "non-conservativity",
            CertificateKind::NonErgodicity => "non-ergodicity",
            CertificateKind::Rigidity => "rigidity",
            CertificateKind::AlphaType => "alpha-type",
            CertificateKind::Arithmetic => "arithmetic",
            CertificateKind::Divisibility => "divisibility",
            CertificateKind::WdeProbe => "wde-probe",
            CertificateKind::KoopmanDecay => "koopman-decay",
        }
    }
}

/// What a finite computation can say about an asymptotic property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Satisfied,
    Refuted,
    InconclusiveAtHorizon,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Refuted => "refuted",
            Verdict::InconclusiveAtHorizon => "inconclusive-at-horizon",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One exact value, indexed by a stage or an iterate. `extra` holds
/// secondary exact columns such as a bound or a count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub at: BigInt,
    pub value: BigRational,
    pub extra: Vec<(&'static str, BigRational)>,
}

impl Entry {
    pub fn new(at: impl Into<BigInt>, value: BigRational) -> Self {
        Entry {
            at: at.into(),
            value,
            extra: Vec::new(),
        }
    }

    pub fn with(mut self, name: &'static str, v: BigRational) -> Self {
        self.extra.push((name, v));
        self
    }

    pub fn get(&self, name: &str) -> Option<&BigRational> {
        self.extra.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    /// Last stage (or iterate) examined.
    pub horizon: BigInt,
    /// Name of the index column of `values`, `stage` or `k`.
    pub index: &'static str,
    pub values: Vec<Entry>,
    pub verdict: Verdict,
    /// Free-form facts worth keeping with the numbers (skipped stages, witnesses).
    pub notes: Vec<(String, String)>,
}

impl CertificateReport {
    pub(crate) fn new(kind: CertificateKind, index: &'static str) -> Self {
        CertificateReport {
            kind,
            horizon: BigInt::from(0),
            index,
            values: Vec::new(),
            verdict: Verdict::InconclusiveAtHorizon,
            notes: Vec::new(),
        }
    }

    pub(crate) fn note(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.notes
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}
