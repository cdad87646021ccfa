use serde::{Deserialize, Serialize};

use crate::alignment::{is_reduction, verify_with_tables, ReductionMap, ViolationReport};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::optimality::{CriterionMode, OptimalityTable, SolvedMdp};
use crate::search::enumerate_with_tables;

/// Pairs `(M_x^i, M_y^i)` whose x-MDPs (and y-MDPs) differ only in reward.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSet {
    pairs: Vec<(TabularMdp, TabularMdp)>,
}

impl TaskSet {
    pub fn new(pairs: Vec<(TabularMdp, TabularMdp)>) -> Result<Self> {
        let Some((x0, y0)) = pairs.first() else {
            return Err(Error::InvalidConfig(
                "a task set needs at least one pair".into(),
            ));
        };
        for (i, (x, y)) in pairs.iter().enumerate().skip(1) {
            if !x.same_structure(x0)
                || x.dummy_state() != x0.dummy_state()
                || x.dummy_action() != x0.dummy_action()
            {
                return Err(Error::InvalidConfig(format!(
                    "x-mdp {i} does not share dynamics, eta and gamma with x-mdp 0"
                )));
            }
            if !y.same_structure(y0)
                || y.dummy_state() != y0.dummy_state()
                || y.dummy_action() != y0.dummy_action()
            {
                return Err(Error::InvalidConfig(format!(
                    "y-mdp {i} does not share dynamics, eta and gamma with y-mdp 0"
                )));
            }
        }
        Ok(TaskSet { pairs })
    }

    pub fn pairs(&self) -> &[(TabularMdp, TabularMdp)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Optimality tables of every pair under `mode`.
    pub fn solve(&self, mode: CriterionMode) -> Result<Vec<OTask>> {
        self.pairs
            .iter()
            .map(|(x, y)| OTask::solve(x, y, mode))
            .collect()
    }
}

/// A pair known only through its dynamics and optimality tables.
#[derive(Debug, Clone, PartialEq)]
pub struct OTask {
    pub mx: TabularMdp,
    pub ox: OptimalityTable,
    pub my: TabularMdp,
    pub oy: OptimalityTable,
}

impl OTask {
    pub fn solve(mx: &TabularMdp, my: &TabularMdp, mode: CriterionMode) -> Result<Self> {
        let sx = SolvedMdp::solve(mx.clone(), mode)?;
        let sy = SolvedMdp::solve(my.clone(), mode)?;
        Ok(OTask {
            mx: sx.mdp,
            ox: sx.opt.table,
            my: sy.mdp,
            oy: sy.opt.table,
        })
    }

    pub fn verify(&self, r: &ReductionMap) -> Result<ViolationReport> {
        verify_with_tables(&self.mx, &self.ox, &self.my, &self.oy, r)
    }
}

/// `Gamma(D)`: reductions shared by every task, sorted.
pub fn joint_reductions(tasks: &[OTask], cap: u64) -> Result<Vec<ReductionMap>> {
    let Some(first) = tasks.first() else {
        return Err(Error::InvalidConfig(
            "a task set needs at least one pair".into(),
        ));
    };
    let mut out = enumerate_with_tables(&first.mx, &first.ox, &first.my, &first.oy, cap)?;
    for t in &tasks[1..] {
        let mut kept = Vec::with_capacity(out.len());
        for r in out {
            if is_reduction(&t.mx, &t.ox, &t.my, &t.oy, &r)? {
                kept.push(r);
            }
        }
        out = kept;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferWitness {
    pub reduction: ReductionMap,
    pub report: ViolationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transferability {
    pub transferable: bool,
    pub joint_reduction_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TransferWitness>,
}

/// Whether every joint reduction of `tasks` is also a reduction of `target`.
/// The first counterexample in sorted order is returned as a witness.
pub fn is_transferable(tasks: &[OTask], target: &OTask, cap: u64) -> Result<Transferability> {
    let joint = joint_reductions(tasks, cap)?;
    for r in &joint {
        let report = target.verify(r)?;
        if !report.is_empty() {
            return Ok(Transferability {
                transferable: false,
                joint_reduction_count: joint.len(),
                witness: Some(TransferWitness {
                    reduction: r.clone(),
                    report,
                }),
            });
        }
    }
    Ok(Transferability {
        transferable: true,
        joint_reduction_count: joint.len(),
        witness: None,
    })
}

/// Positive disjunctive normal form over task indicators; task indices are
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdnfExpr {
    pub minterms: Vec<Vec<usize>>,
}

impl CdnfExpr {
    pub fn new(minterms: Vec<Vec<usize>>) -> Self {
        CdnfExpr { minterms }
    }

    pub fn validate(&self, task_count: usize) -> Result<()> {
        if self.minterms.is_empty() {
            return Err(Error::InvalidExpr("expression has no minterms".into()));
        }
        for (i, term) in self.minterms.iter().enumerate() {
            if term.is_empty() {
                return Err(Error::InvalidExpr(format!("minterm {i} is empty")));
            }
            if let Some(&bad) = term.iter().find(|&&t| t == 0 || t > task_count) {
                return Err(Error::InvalidExpr(format!(
                    "minterm {i} refers to task {bad}, valid tasks are 1..={task_count}"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, values: &[bool]) -> bool {
        self.minterms
            .iter()
            .any(|term| term.iter().all(|&t| values[t - 1]))
    }
}

fn compose_table(tables: &[&OptimalityTable], b: &CdnfExpr) -> OptimalityTable {
    let (n, m) = (tables[0].state_count(), tables[0].action_count());
    let o = (0..n)
        .map(|s| {
            (0..m)
                .map(|a| {
                    let values: Vec<bool> = tables.iter().map(|t| t.get(s, a)).collect();
                    b.eval(&values)
                })
                .collect()
        })
        .collect();
    OptimalityTable::new(tables[0].mode, o)
}

/// Target task whose optimality tables are `b` applied pointwise to the
/// tasks' tables, on the shared dynamics of the first task.
pub fn compose_cdnf(tasks: &[OTask], b: &CdnfExpr) -> Result<OTask> {
    b.validate(tasks.len())?;
    let ox: Vec<&OptimalityTable> = tasks.iter().map(|t| &t.ox).collect();
    let oy: Vec<&OptimalityTable> = tasks.iter().map(|t| &t.oy).collect();
    Ok(OTask {
        mx: tasks[0].mx.clone(),
        ox: compose_table(&ox, b),
        my: tasks[0].my.clone(),
        oy: compose_table(&oy, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_validation() {
        assert!(CdnfExpr::new(vec![vec![1, 2]]).validate(2).is_ok());
        assert!(CdnfExpr::new(vec![vec![3]]).validate(2).is_err());
        assert!(CdnfExpr::new(vec![vec![0]]).validate(2).is_err());
        assert!(CdnfExpr::new(vec![vec![]]).validate(2).is_err());
        assert!(CdnfExpr::new(vec![]).validate(2).is_err());
    }

    #[test]
    fn expression_eval() {
        let b = CdnfExpr::new(vec![vec![1, 2], vec![3]]);
        assert!(b.eval(&[true, true, false]));
        assert!(b.eval(&[false, false, true]));
        assert!(!b.eval(&[true, false, false]));
    }

    #[test]
    fn disjunction_is_union() {
        let mode = CriterionMode::Stationary;
        let t1 = OptimalityTable::new(mode, vec![vec![true, false]]);
        let t2 = OptimalityTable::new(mode, vec![vec![false, true]]);
        let c = compose_table(&[&t1, &t2], &CdnfExpr::new(vec![vec![1], vec![2]]));
        assert_eq!(c.o, vec![vec![true, true]]);
        let c = compose_table(&[&t1, &t2], &CdnfExpr::new(vec![vec![1]]));
        assert_eq!(c, t1);
    }
}
