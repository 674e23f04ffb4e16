use std::fmt;

use serde::{Deserialize, Serialize};

use super::{connected_components, BranchId, BusId, BusType, NetworkCase, TopologyMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    /// Islands of the in-service network, each listed by its bus ids.
    Disconnected { components: Vec<Vec<BusId>> },
    MissingSlack { component: usize },
    MultipleSlack { buses: Vec<BusId> },
    ZeroReactance { branch: BranchId },
    NegativeReactance { branch: BranchId, x: f64 },
    ZeroRating { branches: Vec<BranchId> },
    EmergencyBelowNormal { branch: BranchId },
    VoltageBounds { bus: BusId },
    BaseKv { bus: BusId },
    GeneratorLimits { generator: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Disconnected { components } => {
                write!(f, "network splits into {} components:", components.len())?;
                for (i, comp) in components.iter().enumerate() {
                    let shown: Vec<String> = comp.iter().take(8).map(|b| b.to_string()).collect();
                    let more = if comp.len() > 8 { ", ..." } else { "" };
                    write!(f, " [{}] buses {{{}{more}}}", i + 1, shown.join(", "))?;
                }
                Ok(())
            }
            ValidationIssue::MissingSlack { component } => {
                write!(f, "component {} has no slack bus", component + 1)
            }
            ValidationIssue::MultipleSlack { buses } => {
                let ids: Vec<String> = buses.iter().map(|b| b.to_string()).collect();
                write!(f, "more than one slack bus: {}", ids.join(", "))
            }
            ValidationIssue::ZeroReactance { branch } => write!(f, "branch {branch} has zero reactance"),
            ValidationIssue::NegativeReactance { branch, x } => {
                write!(f, "negative reactance on branch {branch} (x = {x})")
            }
            ValidationIssue::ZeroRating { branches } => {
                write!(f, "{} branches have a zero rating and are unmonitored", branches.len())
            }
            ValidationIssue::EmergencyBelowNormal { branch } => {
                write!(f, "branch {branch} emergency rating is below its normal rating")
            }
            ValidationIssue::VoltageBounds { bus } => write!(f, "bus {bus} has v_min >= v_max"),
            ValidationIssue::BaseKv { bus } => write!(f, "bus {bus} has non-positive base kV"),
            ValidationIssue::GeneratorLimits { generator } => {
                write!(f, "generator {generator} has inverted limits")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_negative_reactance(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, ValidationIssue::NegativeReactance { .. }))
    }
}

pub fn validate_case(case: &NetworkCase) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mask = TopologyMask::empty();

    let labels = connected_components(case, &mask);
    let n_comp = labels.iter().max().map_or(0, |m| m + 1);
    if n_comp > 1 {
        let mut components = vec![Vec::new(); n_comp];
        for (pos, &label) in labels.iter().enumerate() {
            components[label].push(case.buses()[pos].id);
        }
        report.errors.push(ValidationIssue::Disconnected { components });
    }

    let mut slack_per_component = vec![Vec::new(); n_comp];
    for (pos, bus) in case.buses().iter().enumerate() {
        if bus.bus_type == BusType::Slack {
            slack_per_component[labels[pos]].push(bus.id);
        }
        if !(bus.v_min < bus.v_max) {
            report.errors.push(ValidationIssue::VoltageBounds { bus: bus.id });
        }
        if !(bus.base_kv > 0.0) {
            report.errors.push(ValidationIssue::BaseKv { bus: bus.id });
        }
    }
    for (component, slacks) in slack_per_component.into_iter().enumerate() {
        match slacks.len() {
            0 => report.errors.push(ValidationIssue::MissingSlack { component }),
            1 => {}
            _ => report.errors.push(ValidationIssue::MultipleSlack { buses: slacks }),
        }
    }

    let mut unrated = Vec::new();
    for br in case.branches() {
        if br.x == 0.0 {
            report.errors.push(ValidationIssue::ZeroReactance { branch: br.id });
        } else if br.x < 0.0 {
            report.warnings.push(ValidationIssue::NegativeReactance { branch: br.id, x: br.x });
        }
        if br.in_service && (br.rate_normal == 0.0 || br.rate_emergency == 0.0) {
            unrated.push(br.id);
        }
        if br.rate_normal > 0.0 && br.rate_emergency > 0.0 && br.rate_emergency < br.rate_normal {
            report.warnings.push(ValidationIssue::EmergencyBelowNormal { branch: br.id });
        }
    }
    if !unrated.is_empty() {
        report.warnings.push(ValidationIssue::ZeroRating { branches: unrated });
    }

    for gen in case.generators() {
        if gen.q_min > gen.q_max || gen.p_min > gen.p_max {
            report.errors.push(ValidationIssue::GeneratorLimits { generator: gen.id.0 });
        }
    }
    report
}
