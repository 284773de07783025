use crate::group::GroupElement;
use crate::polyfd::PolynomialFn;

/// A point (or pair) witnessing a failure, with a short description and
/// the offending numeric value when there is one.
#[derive(Clone, Debug)]
pub struct Witness {
    pub description: String,
    pub points: Vec<GroupElement>,
    pub value: Option<f64>,
}

impl Witness {
    pub fn at(description: impl Into<String>, points: Vec<GroupElement>, value: f64) -> Self {
        Witness {
            description: description.into(),
            points,
            value: Some(value),
        }
    }
}

/// A pass/fail claim with named numeric margins, an optional failure
/// witness (present whenever `pass` is false), and sub-certificates for
/// compound claims.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub claim: String,
    pub pass: bool,
    pub margins: Vec<(String, f64)>,
    pub witness: Option<Witness>,
    pub sub_certificates: Vec<Certificate>,
}

impl Certificate {
    pub fn leaf(claim: impl Into<String>, pass: bool) -> Self {
        Certificate {
            claim: claim.into(),
            pass,
            margins: vec![],
            witness: None,
            sub_certificates: vec![],
        }
    }

    pub fn margin(mut self, name: impl Into<String>, value: f64) -> Self {
        self.margins.push((name.into(), value));
        self
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_sub(mut self, sub: Certificate) -> Self {
        self.sub_certificates.push(sub);
        self
    }

    pub fn margin_value(&self, name: &str) -> Option<f64> {
        self.margins
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// Verdict of a Q-independence defect extraction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QVerdict {
    /// The defect is a nonzero polynomial within tolerance.
    QIndependent,
    /// The fitted defect is identically zero: plain independence.
    PlainIndependent,
    /// No polynomial defect exists on the window.
    NotQIndependent,
}

/// Outcome of one defect extraction: the fitted polynomial `q` (when the
/// fit succeeded), the fit residual, the verdict, and a witness point for
/// failures.
#[derive(Clone, Debug)]
pub struct QDefectReport {
    pub setting: String,
    pub q: Option<PolynomialFn>,
    pub residual: f64,
    pub verdict: QVerdict,
    pub witness: Option<Witness>,
}

impl QDefectReport {
    pub fn q_holds(&self) -> bool {
        matches!(
            self.verdict,
            QVerdict::QIndependent | QVerdict::PlainIndependent
        )
    }
}
