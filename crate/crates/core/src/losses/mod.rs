//! The loss zoo: value/gradient pairs for twelve classification objectives
//! and executable checks of their theoretical identities.

mod functions;
mod theory;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Dense2;

pub use functions::{
    cauchy_schwarz_loss, chebyshev_loss, expectation_loss, hinge_loss, log_loss, lp_loss,
    squared_log_loss_negated, tanimoto_loss, LossEval, Sigma,
};
pub use theory::{
    sigmoid_expectation_slope, verify_cs_decomposition, verify_expectation_identity,
    ExpectationResidual,
};

/// Hinge margin used unless configured otherwise.
pub const DEFAULT_HINGE_MARGIN: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossId {
    L1,
    L2,
    ExpectationL1,
    ExpectationL2,
    Chebyshev,
    Hinge,
    Hinge2,
    Hinge3,
    Log,
    Log2,
    Tanimoto,
    CauchySchwarz,
}

/// Whether a loss reads the raw output `o` or the probability estimate `σ(o)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputDomain {
    Raw,
    Probability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelEncoding {
    OneHot,
    Sign,
}

impl LossId {
    pub const ALL: [LossId; 12] = [
        LossId::L1,
        LossId::L2,
        LossId::ExpectationL1,
        LossId::ExpectationL2,
        LossId::Chebyshev,
        LossId::Hinge,
        LossId::Hinge2,
        LossId::Hinge3,
        LossId::Log,
        LossId::Log2,
        LossId::Tanimoto,
        LossId::CauchySchwarz,
    ];

    /// Stable machine name, used on the command line and in result paths.
    pub fn id(self) -> &'static str {
        match self {
            LossId::L1 => "l1",
            LossId::L2 => "l2",
            LossId::ExpectationL1 => "expectation_l1",
            LossId::ExpectationL2 => "expectation_l2",
            LossId::Chebyshev => "chebyshev",
            LossId::Hinge => "hinge",
            LossId::Hinge2 => "hinge2",
            LossId::Hinge3 => "hinge3",
            LossId::Log => "log",
            LossId::Log2 => "log2",
            LossId::Tanimoto => "tanimoto",
            LossId::CauchySchwarz => "cauchy_schwarz",
        }
    }

    /// Short mathematical symbol for legends and reports.
    pub fn symbol(self) -> &'static str {
        match self {
            LossId::L1 => "L1",
            LossId::L2 => "L2",
            LossId::ExpectationL1 => "L1∘σ",
            LossId::ExpectationL2 => "L2∘σ",
            LossId::Chebyshev => "L∞∘σ",
            LossId::Hinge => "hinge",
            LossId::Hinge2 => "hinge²",
            LossId::Hinge3 => "hinge³",
            LossId::Log => "log",
            LossId::Log2 => "log²",
            LossId::Tanimoto => "tan",
            LossId::CauchySchwarz => "D_CS",
        }
    }

    pub fn input_domain(self) -> InputDomain {
        match self {
            LossId::L1 | LossId::L2 | LossId::Hinge | LossId::Hinge2 | LossId::Hinge3 => {
                InputDomain::Raw
            }
            _ => InputDomain::Probability,
        }
    }

    pub fn label_encoding(self) -> LabelEncoding {
        match self {
            LossId::Hinge | LossId::Hinge2 | LossId::Hinge3 => LabelEncoding::Sign,
            _ => LabelEncoding::OneHot,
        }
    }

    /// σ used when nothing else is configured; `None` for raw-output losses.
    pub fn default_sigma(self) -> Option<Sigma> {
        match self.input_domain() {
            InputDomain::Raw => None,
            InputDomain::Probability => Some(Sigma::Softmax),
        }
    }

    pub fn ids() -> impl Iterator<Item = &'static str> {
        Self::ALL.iter().map(|l| l.id())
    }
}

impl fmt::Display for LossId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for LossId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossId::ALL
            .iter()
            .copied()
            .find(|l| l.id() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown loss `{s}`; known losses: {}",
                    LossId::ids().collect::<Vec<_>>().join(", ")
                ))
            })
    }
}

/// A configured loss: which one, which σ, and the few knobs that exist.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossSpec {
    pub id: LossId,
    /// Ignored by raw-output losses.
    pub sigma: Sigma,
    pub hinge_margin: f64,
    /// Evaluate squared log loss with its leading minus sign kept.
    pub negated_log2: bool,
}

impl LossSpec {
    pub fn new(id: LossId) -> Self {
        LossSpec {
            id,
            sigma: id.default_sigma().unwrap_or(Sigma::Softmax),
            hinge_margin: DEFAULT_HINGE_MARGIN,
            negated_log2: false,
        }
    }

    pub fn with_sigma(mut self, sigma: Sigma) -> Self {
        self.sigma = sigma;
        self
    }

    /// Evaluates the loss on one-hot labels `y` and outputs `o`.
    ///
    /// Hinge losses convert the labels to the ±1 encoding `2y − 1` first.
    pub fn evaluate(&self, y: &Dense2, o: &Dense2) -> Result<LossEval> {
        let sigma = self.sigma;
        match self.id {
            LossId::L1 => lp_loss(1, y, o),
            LossId::L2 => lp_loss(2, y, o),
            LossId::ExpectationL1 => expectation_loss(1, y, o, sigma),
            LossId::ExpectationL2 => expectation_loss(2, y, o, sigma),
            LossId::Chebyshev => chebyshev_loss(y, o, sigma),
            LossId::Hinge => hinge_loss(1, &sign_encoding(y), o, self.hinge_margin),
            LossId::Hinge2 => hinge_loss(2, &sign_encoding(y), o, self.hinge_margin),
            LossId::Hinge3 => hinge_loss(3, &sign_encoding(y), o, self.hinge_margin),
            LossId::Log => log_loss(1, y, o, sigma),
            LossId::Log2 if self.negated_log2 => squared_log_loss_negated(y, o, sigma),
            LossId::Log2 => log_loss(2, y, o, sigma),
            LossId::Tanimoto => tanimoto_loss(y, o, sigma),
            LossId::CauchySchwarz => cauchy_schwarz_loss(y, o, sigma),
        }
    }
}

impl From<LossId> for LossSpec {
    fn from(id: LossId) -> Self {
        LossSpec::new(id)
    }
}

/// `ŷ = 2y − 1`.
pub fn sign_encoding(y: &Dense2) -> Dense2 {
    y.map(|v| 2.0 * v - 1.0)
}
