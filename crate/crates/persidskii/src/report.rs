//! Machine-readable JSON reports. Field order is fixed by the struct
//! definitions and no timestamps are embedded, so output is byte-stable
//! for identical inputs, seeds and tool version.

use serde::{Deserialize, Serialize};

use crate::continuous::{ContinuousCertificate, DecayProfile, RateWindow};
use crate::discrete::{DiscreteCertificate, LambdaProfile};
use crate::outcome::Infeasibility;
use crate::simulate::ValidationReport;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: crate::VERSION.to_string(),
        }
    }
}

/// Top-level report envelope: one of the payload kinds below.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Report {
    #[serde(rename = "continuous_certificate")]
    ContinuousCertificate {
        tool: ToolInfo,
        certificate: ContinuousCertificate,
    },
    #[serde(rename = "discrete_certificate")]
    DiscreteCertificate {
        tool: ToolInfo,
        certificate: DiscreteCertificate,
    },
    #[serde(rename = "infeasible")]
    Infeasible {
        tool: ToolInfo,
        infeasibility: Infeasibility,
    },
    #[serde(rename = "decay_profile")]
    DecayProfile {
        tool: ToolInfo,
        xi: Vec<f64>,
        profile: DecayProfile,
        #[serde(skip_serializing_if = "Option::is_none")]
        rate_window: Option<RateWindow>,
    },
    #[serde(rename = "lambda_profile")]
    LambdaProfile {
        tool: ToolInfo,
        xi: Vec<f64>,
        profile: LambdaProfile,
    },
    #[serde(rename = "validation")]
    Validation {
        tool: ToolInfo,
        /// Finite-horizon simulation can only falsify an envelope claim,
        /// never verify it for all time.
        banner: String,
        report: ValidationReport,
    },
}

pub const FALSIFICATION_BANNER: &str =
    "falsification harness: a pass means no sampled run contradicted the envelope \
     on the simulated horizon, not a proof for all time";

impl Report {
    pub fn continuous_certificate(certificate: ContinuousCertificate) -> Report {
        Report::ContinuousCertificate {
            tool: ToolInfo::default(),
            certificate,
        }
    }

    pub fn discrete_certificate(certificate: DiscreteCertificate) -> Report {
        Report::DiscreteCertificate {
            tool: ToolInfo::default(),
            certificate,
        }
    }

    pub fn infeasible(infeasibility: Infeasibility) -> Report {
        Report::Infeasible {
            tool: ToolInfo::default(),
            infeasibility,
        }
    }

    pub fn decay_profile(
        xi: Vec<f64>,
        profile: DecayProfile,
        rate_window: Option<RateWindow>,
    ) -> Report {
        Report::DecayProfile {
            tool: ToolInfo::default(),
            xi,
            profile,
            rate_window,
        }
    }

    pub fn lambda_profile(xi: Vec<f64>, profile: LambdaProfile) -> Report {
        Report::LambdaProfile {
            tool: ToolInfo::default(),
            xi,
            profile,
        }
    }

    pub fn validation(report: ValidationReport) -> Report {
        Report::Validation {
            tool: ToolInfo::default(),
            banner: FALSIFICATION_BANNER.to_string(),
            report,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Single-line human summary, printed after the JSON body.
    pub fn summary(&self) -> String {
        match self {
            Report::ContinuousCertificate { certificate, .. } => format!(
                "certified: criterion={:?} alpha={} margin={:.3e} evidence={:?}",
                certificate.criterion, certificate.alpha, certificate.margin, certificate.evidence
            ),
            Report::DiscreteCertificate { certificate, .. } => format!(
                "certified: criterion={:?} lambda={} margin={:.3e} evidence={:?}",
                certificate.criterion, certificate.lambda, certificate.margin, certificate.evidence
            ),
            Report::Infeasible { infeasibility, .. } => {
                format!("infeasible: {}", infeasibility.describe())
            }
            Report::DecayProfile { profile, .. } => format!(
                "decay profile: alpha_max={} binding_row={}",
                profile.alpha_max, profile.binding_row
            ),
            Report::LambdaProfile { profile, .. } => format!(
                "rate profile: lambda_max={} binding_row={}",
                profile.lambda_max, profile.binding_row
            ),
            Report::Validation { report, .. } => format!(
                "validation: {} over {} runs (worst M={:.4}, worst slope={:.4})",
                if report.pass { "PASS" } else { "FAIL" },
                report.runs,
                report.worst_m_fit,
                report.worst_slope
            ),
        }
    }
}
