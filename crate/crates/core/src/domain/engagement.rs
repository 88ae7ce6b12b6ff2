use std::collections::HashMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ids::{CmiId, EngagementId, ResearcherId};
use super::money::Pesos;

/// Level of an R&D engagement in the program → project → sub-project tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EngagementKind {
    Program,
    Project,
    SubProject,
}

impl EngagementKind {
    pub const ALL: [EngagementKind; 3] = [
        EngagementKind::Program,
        EngagementKind::Project,
        EngagementKind::SubProject,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EngagementStatus {
    Proposed,
    Ongoing,
    Completed,
    Terminated,
}

impl EngagementStatus {
    pub const ALL: [EngagementStatus; 4] = [
        EngagementStatus::Proposed,
        EngagementStatus::Ongoing,
        EngagementStatus::Completed,
        EngagementStatus::Terminated,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            EngagementStatus::Completed | EngagementStatus::Terminated
        )
    }
}

/// A program, project or sub-project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Engagement {
    pub id: EngagementId,
    pub kind: EngagementKind,
    pub parent_id: Option<EngagementId>,
    pub title: String,
    pub description: String,
    pub lead_cmi_id: CmiId,
    pub leader_id: ResearcherId,
    pub funding_agency: String,
    pub budget_total: Pesos,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub status: EngagementStatus,
    pub entity_version: u64,
    #[serde(default)]
    pub deleted: bool,
}

/// A broken program/project/sub-project link rule.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("hierarchy violation: {rule}")]
pub struct HierarchyViolation {
    pub rule: String,
}

impl HierarchyViolation {
    pub fn new(rule: impl Into<String>) -> Self {
        Self { rule: rule.into() }
    }
}

/// Checks that an engagement of `child` kind may sit under a parent of
/// `parent` kind (or be a root when `parent` is `None`).
pub fn validate_engagement_link(
    child: EngagementKind,
    parent: Option<EngagementKind>,
) -> Result<(), HierarchyViolation> {
    use EngagementKind::*;
    match (child, parent) {
        (Program, None)
        | (Project, None)
        | (Project, Some(Program))
        | (SubProject, Some(Project)) => Ok(()),
        (Program, Some(_)) => Err(HierarchyViolation::new("program must be a root")),
        (Project, Some(_)) => Err(HierarchyViolation::new("project parent must be a program")),
        (SubProject, None) => Err(HierarchyViolation::new(
            "sub-project requires a project parent",
        )),
        (SubProject, Some(_)) => Err(HierarchyViolation::new(
            "sub-project parent must be a project",
        )),
    }
}

/// Allowed status moves. Self-transitions are not moves; edits that keep the
/// status unchanged skip this check entirely.
pub fn validate_status_transition(from: EngagementStatus, to: EngagementStatus) -> bool {
    use EngagementStatus::*;
    matches!(
        (from, to),
        (Proposed, Ongoing) | (Proposed, Terminated) | (Ongoing, Completed) | (Ongoing, Terminated)
    )
}

impl fmt::Display for EngagementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for EngagementStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Aggregate over an engagement and everything beneath it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Rollup {
    pub project_count: u64,
    pub subproject_count: u64,
    pub budget_sum: Pesos,
}

/// Sums budgets over `root` and its transitive children and counts the
/// children by kind. Every descendant must hang off the root or another
/// descendant through a valid link.
pub fn rollup(root: &Engagement, descendants: &[Engagement]) -> Result<Rollup, HierarchyViolation> {
    let mut kinds: HashMap<&EngagementId, EngagementKind> =
        HashMap::with_capacity(descendants.len() + 1);
    kinds.insert(&root.id, root.kind);
    for d in descendants {
        if kinds.insert(&d.id, d.kind).is_some() {
            return Err(HierarchyViolation::new(format!(
                "engagement {} listed twice",
                d.id
            )));
        }
    }

    let mut out = Rollup {
        budget_sum: root.budget_total,
        ..Rollup::default()
    };
    for d in descendants {
        let parent_kind = d
            .parent_id
            .as_ref()
            .and_then(|p| kinds.get(p).copied())
            .ok_or_else(|| {
                HierarchyViolation::new(format!("engagement {} is not beneath the root", d.id))
            })?;
        validate_engagement_link(d.kind, Some(parent_kind))?;
        match d.kind {
            EngagementKind::Project => out.project_count += 1,
            EngagementKind::SubProject => out.subproject_count += 1,
            EngagementKind::Program => unreachable!("programs never validate under a parent"),
        }
        out.budget_sum = out.budget_sum + d.budget_total;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use EngagementKind::*;
    use EngagementStatus::*;

    fn node(id: &str, kind: EngagementKind, parent: Option<&str>, budget: u64) -> Engagement {
        Engagement {
            id: id.into(),
            kind,
            parent_id: parent.map(EngagementId::from),
            title: format!("engagement {id}"),
            description: String::new(),
            lead_cmi_id: "cmi".into(),
            leader_id: "res".into(),
            funding_agency: String::new(),
            budget_total: Pesos::from_whole(budget),
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            end_date: NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
            status: Proposed,
            entity_version: 1,
            deleted: false,
        }
    }

    #[test]
    fn link_examples() {
        assert!(validate_engagement_link(Project, None).is_ok());
        assert!(validate_engagement_link(SubProject, Some(Project)).is_ok());
        assert_eq!(
            validate_engagement_link(Program, Some(Project))
                .unwrap_err()
                .rule,
            "program must be a root"
        );
        assert_eq!(
            validate_engagement_link(SubProject, None).unwrap_err().rule,
            "sub-project requires a project parent"
        );
    }

    #[test]
    fn exactly_four_links_are_accepted() {
        let parents = [None, Some(Program), Some(Project), Some(SubProject)];
        let accepted: Vec<_> = EngagementKind::ALL
            .into_iter()
            .flat_map(|c| parents.into_iter().map(move |p| (c, p)))
            .filter(|(c, p)| validate_engagement_link(*c, *p).is_ok())
            .collect();
        assert_eq!(
            accepted,
            vec![
                (Program, None),
                (Project, None),
                (Project, Some(Program)),
                (SubProject, Some(Project))
            ]
        );
    }

    #[test]
    fn transition_examples() {
        assert!(validate_status_transition(Proposed, Ongoing));
        assert!(!validate_status_transition(Completed, Ongoing));
        assert!(!validate_status_transition(Ongoing, Ongoing));
    }

    #[test]
    fn terminal_states_have_no_moves_and_every_state_reaches_one_quickly() {
        for from in EngagementStatus::ALL {
            let moves: Vec<_> = EngagementStatus::ALL
                .into_iter()
                .filter(|to| validate_status_transition(from, *to))
                .collect();
            if from.is_terminal() {
                assert!(moves.is_empty());
                continue;
            }
            // breadth-first: some terminal state within two moves
            let one_step = moves.iter().any(|s| s.is_terminal());
            let two_steps = moves.iter().any(|mid| {
                EngagementStatus::ALL
                    .into_iter()
                    .any(|to| validate_status_transition(*mid, to) && to.is_terminal())
            });
            assert!(one_step || two_steps, "{from:?}");
        }
    }

    #[test]
    fn rollup_of_small_program() {
        let root = node("p", Program, None, 100);
        let kids = vec![
            node("a", Project, Some("p"), 200),
            node("b", Project, Some("p"), 300),
            node("s", SubProject, Some("a"), 50),
        ];
        assert_eq!(
            rollup(&root, &kids).unwrap(),
            Rollup {
                project_count: 2,
                subproject_count: 1,
                budget_sum: Pesos::from_whole(650)
            }
        );
    }

    #[test]
    fn rollup_leaf_and_zero_cases() {
        let leaf = node("x", Project, None, 75);
        assert_eq!(
            rollup(&leaf, &[]).unwrap(),
            Rollup {
                budget_sum: Pesos::from_whole(75),
                ..Default::default()
            }
        );
        let empty = node("p", Program, None, 0);
        assert_eq!(rollup(&empty, &[]).unwrap(), Rollup::default());
    }

    #[test]
    fn rollup_rejects_bad_links() {
        let root = node("p", Program, None, 1);
        assert!(rollup(&root, &[node("s", SubProject, Some("p"), 1)]).is_err());
        assert!(rollup(&root, &[node("a", Project, Some("elsewhere"), 1)]).is_err());
        assert!(rollup(&root, &[node("a", Project, None, 1)]).is_err());
    }
}
