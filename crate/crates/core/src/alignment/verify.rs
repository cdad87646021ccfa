use serde::{Deserialize, Serialize};

use super::maps::{preimages, ReductionMap};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::optimality::{OptimalityTable, SolvedMdp};

/// Every way a candidate `(phi, psi)` fails to be a reduction.
///
/// Dynamics are only checked on pairs `(s_y, a_y)` with `O_y(s_y, a_y) = 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    /// `(s_x, a_x)` with `O_y(phi(s_x), psi(a_x)) = 1` but `O_x(s_x, a_x) = 0`.
    pub optimality_violations: Vec<(usize, usize)>,
    /// `(s_y, a_y)` with `O_y = 1` and an empty preimage under phi or psi.
    pub surjectivity_violations: Vec<(usize, usize)>,
    /// `(s_y, a_y, s_x, a_x)` where `P_y(s_y, a_y) != phi(P_x(s_x, a_x))`.
    pub dynamics_violations: Vec<(usize, usize, usize, usize)>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.optimality_violations.is_empty()
            && self.surjectivity_violations.is_empty()
            && self.dynamics_violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.optimality_violations.len()
            + self.surjectivity_violations.len()
            + self.dynamics_violations.len()
    }
}

/// Checks the three reduction conditions exhaustively for solved MDPs.
pub fn verify_reduction(
    mx: &SolvedMdp,
    my: &SolvedMdp,
    r: &ReductionMap,
) -> Result<ViolationReport> {
    verify_with_tables(&mx.mdp, mx.table(), &my.mdp, my.table(), r)
}

fn check_tables(
    mx: &TabularMdp,
    ox: &OptimalityTable,
    my: &TabularMdp,
    oy: &OptimalityTable,
) -> Result<()> {
    if ox.mode != oy.mode {
        return Err(Error::ModeMismatch {
            x: ox.mode.to_string(),
            y: oy.mode.to_string(),
        });
    }
    for (name, mdp, table) in [("x", mx, ox), ("y", my, oy)] {
        if table.state_count() != mdp.state_count() || table.action_count() != mdp.action_count() {
            return Err(Error::DimensionMismatch(format!(
                "optimality table for {name} does not match its mdp"
            )));
        }
    }
    Ok(())
}

/// Same as [`verify_reduction`] with externally supplied optimality tables.
pub fn verify_with_tables(
    mx: &TabularMdp,
    ox: &OptimalityTable,
    my: &TabularMdp,
    oy: &OptimalityTable,
    r: &ReductionMap,
) -> Result<ViolationReport> {
    check_tables(mx, ox, my, oy)?;
    let (sx, ax, sy, ay) = (
        mx.state_count(),
        mx.action_count(),
        my.state_count(),
        my.action_count(),
    );
    r.check_dims(sx, ax, sy, ay)?;

    let mut report = ViolationReport::default();
    for s in 0..sx {
        for a in 0..ax {
            if oy.get(r.phi[s], r.psi[a]) && !ox.get(s, a) {
                report.optimality_violations.push((s, a));
            }
        }
    }
    let phi_inv = preimages(&r.phi, sy);
    let psi_inv = preimages(&r.psi, ay);
    for t in 0..sy {
        for b in 0..ay {
            if !oy.get(t, b) {
                continue;
            }
            if phi_inv[t].is_empty() || psi_inv[b].is_empty() {
                report.surjectivity_violations.push((t, b));
            }
            let target = my.next(t, b);
            for &s in &phi_inv[t] {
                for &a in &psi_inv[b] {
                    if r.phi[mx.next(s, a)] != target {
                        report.dynamics_violations.push((t, b, s, a));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Early-exit variant of [`verify_with_tables`]; dimensions are assumed valid.
pub(crate) fn is_reduction_unchecked(
    mx: &TabularMdp,
    ox: &OptimalityTable,
    my: &TabularMdp,
    oy: &OptimalityTable,
    r: &ReductionMap,
) -> bool {
    let (sx, ax, sy, ay) = (
        mx.state_count(),
        mx.action_count(),
        my.state_count(),
        my.action_count(),
    );
    for s in 0..sx {
        for a in 0..ax {
            let on_y = oy.get(r.phi[s], r.psi[a]);
            if on_y && (!ox.get(s, a) || r.phi[mx.next(s, a)] != my.next(r.phi[s], r.psi[a])) {
                return false;
            }
        }
    }
    let mut state_hit = vec![false; sy];
    let mut action_hit = vec![false; ay];
    for &t in &r.phi {
        state_hit[t] = true;
    }
    for &b in &r.psi {
        action_hit[b] = true;
    }
    (0..sy).all(|t| (0..ay).all(|b| !oy.get(t, b) || (state_hit[t] && action_hit[b])))
}

/// True when `r` passes [`verify_with_tables`] with an empty report.
pub fn is_reduction(
    mx: &TabularMdp,
    ox: &OptimalityTable,
    my: &TabularMdp,
    oy: &OptimalityTable,
    r: &ReductionMap,
) -> Result<bool> {
    check_tables(mx, ox, my, oy)?;
    r.check_dims(
        mx.state_count(),
        mx.action_count(),
        my.state_count(),
        my.action_count(),
    )?;
    Ok(is_reduction_unchecked(mx, ox, my, oy, r))
}
