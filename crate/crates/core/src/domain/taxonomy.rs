//! The annual-report taxonomy: sixteen submittable report types, each filed
//! under exactly one of five report categories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Sections of the consortium annual report, in the order they are printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReportCategory {
    RdManagementAndCoordination,
    StrategicRdActivities,
    RdResultsUtilization,
    CapabilityBuildingAndGovernance,
    PolicyAnalysisAndAdvocacy,
}

impl ReportCategory {
    pub const ALL: [ReportCategory; 5] = [
        ReportCategory::RdManagementAndCoordination,
        ReportCategory::StrategicRdActivities,
        ReportCategory::RdResultsUtilization,
        ReportCategory::CapabilityBuildingAndGovernance,
        ReportCategory::PolicyAnalysisAndAdvocacy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportCategory::RdManagementAndCoordination => "RdManagementAndCoordination",
            ReportCategory::StrategicRdActivities => "StrategicRdActivities",
            ReportCategory::RdResultsUtilization => "RdResultsUtilization",
            ReportCategory::CapabilityBuildingAndGovernance => "CapabilityBuildingAndGovernance",
            ReportCategory::PolicyAnalysisAndAdvocacy => "PolicyAnalysisAndAdvocacy",
        }
    }

    /// Human-readable section heading.
    pub fn title(self) -> &'static str {
        match self {
            ReportCategory::RdManagementAndCoordination => "R&D Management and Coordination",
            ReportCategory::StrategicRdActivities => "Strategic R&D Activities",
            ReportCategory::RdResultsUtilization => "R&D Results Utilization",
            ReportCategory::CapabilityBuildingAndGovernance => "Capability Building and Governance",
            ReportCategory::PolicyAnalysisAndAdvocacy => "Policy Analysis and Advocacy",
        }
    }

    /// Report types filed under this category, in canonical order.
    pub fn report_types(self) -> impl Iterator<Item = ReportType> {
        ReportType::ALL
            .into_iter()
            .filter(move |t| t.category() == self)
    }
}

impl fmt::Display for ReportCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportCategory {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownName(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReportType {
    GoverningCouncilMeeting,
    MonitoringEvaluationVisit,
    ProgressReport,
    NewProgram,
    NewProject,
    NewSubProject,
    CompletedProject,
    TechnologyTransfer,
    Publication,
    IntellectualProperty,
    TrainingWorkshop,
    ScholarshipHrDevelopment,
    AwardsRecognition,
    InfrastructureFacility,
    PolicyBrief,
    AdvocacyActivity,
}

impl ReportType {
    pub const ALL: [ReportType; 16] = [
        ReportType::GoverningCouncilMeeting,
        ReportType::MonitoringEvaluationVisit,
        ReportType::ProgressReport,
        ReportType::NewProgram,
        ReportType::NewProject,
        ReportType::NewSubProject,
        ReportType::CompletedProject,
        ReportType::TechnologyTransfer,
        ReportType::Publication,
        ReportType::IntellectualProperty,
        ReportType::TrainingWorkshop,
        ReportType::ScholarshipHrDevelopment,
        ReportType::AwardsRecognition,
        ReportType::InfrastructureFacility,
        ReportType::PolicyBrief,
        ReportType::AdvocacyActivity,
    ];

    pub fn category(self) -> ReportCategory {
        classify_report_type(self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReportType::GoverningCouncilMeeting => "GoverningCouncilMeeting",
            ReportType::MonitoringEvaluationVisit => "MonitoringEvaluationVisit",
            ReportType::ProgressReport => "ProgressReport",
            ReportType::NewProgram => "NewProgram",
            ReportType::NewProject => "NewProject",
            ReportType::NewSubProject => "NewSubProject",
            ReportType::CompletedProject => "CompletedProject",
            ReportType::TechnologyTransfer => "TechnologyTransfer",
            ReportType::Publication => "Publication",
            ReportType::IntellectualProperty => "IntellectualProperty",
            ReportType::TrainingWorkshop => "TrainingWorkshop",
            ReportType::ScholarshipHrDevelopment => "ScholarshipHrDevelopment",
            ReportType::AwardsRecognition => "AwardsRecognition",
            ReportType::InfrastructureFacility => "InfrastructureFacility",
            ReportType::PolicyBrief => "PolicyBrief",
            ReportType::AdvocacyActivity => "AdvocacyActivity",
        }
    }
}

/// Maps a report type to the annual-report section it is consolidated under.
pub fn classify_report_type(report_type: ReportType) -> ReportCategory {
    use ReportCategory::*;
    use ReportType::*;
    match report_type {
        GoverningCouncilMeeting | MonitoringEvaluationVisit | ProgressReport => {
            RdManagementAndCoordination
        }
        NewProgram | NewProject | NewSubProject | CompletedProject => StrategicRdActivities,
        TechnologyTransfer | Publication | IntellectualProperty => RdResultsUtilization,
        TrainingWorkshop
        | ScholarshipHrDevelopment
        | AwardsRecognition
        | InfrastructureFacility => CapabilityBuildingAndGovernance,
        PolicyBrief | AdvocacyActivity => PolicyAnalysisAndAdvocacy,
    }
}

impl fmt::Display for ReportType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportType {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownName(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown name {0:?}")]
pub struct UnknownName(pub String);
