use rayon::prelude::*;

use crate::alignment::{is_reduction_unchecked, ReductionMap};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::optimality::{OptimalityTable, SolvedMdp};

/// Default limit on `|S_y|^|S_x| * |A_y|^|A_x|`.
pub const DEFAULT_CAP: u64 = 100_000_000;

/// Size of the raw candidate space, as a float so it cannot overflow.
pub fn candidate_count(sx: usize, ax: usize, sy: usize, ay: usize) -> f64 {
    (sy as f64).powi(sx as i32) * (ay as f64).powi(ax as i32)
}

/// All `(phi, psi)` in `Gamma(M_x, M_y)`, sorted.
pub fn enumerate_reductions(mx: &SolvedMdp, my: &SolvedMdp, cap: u64) -> Result<Vec<ReductionMap>> {
    enumerate_with_tables(&mx.mdp, mx.table(), &my.mdp, my.table(), cap)
}

/// [`enumerate_reductions`] against externally supplied optimality tables.
pub fn enumerate_with_tables(
    mx: &TabularMdp,
    ox: &OptimalityTable,
    my: &TabularMdp,
    oy: &OptimalityTable,
    cap: u64,
) -> Result<Vec<ReductionMap>> {
    if ox.mode != oy.mode {
        return Err(Error::ModeMismatch {
            x: ox.mode.to_string(),
            y: oy.mode.to_string(),
        });
    }
    let (sx, ax, sy, ay) = (
        mx.state_count(),
        mx.action_count(),
        my.state_count(),
        my.action_count(),
    );
    if ox.state_count() != sx
        || ox.action_count() != ax
        || oy.state_count() != sy
        || oy.action_count() != ay
    {
        return Err(Error::DimensionMismatch(
            "optimality tables do not match the mdps".into(),
        ));
    }
    let candidates = candidate_count(sx, ax, sy, ay);
    if candidates > cap as f64 {
        return Err(Error::CapExceeded { candidates, cap });
    }

    // Pairs (s', a) with P_x(s', a) = s, used to check dynamics once both ends are assigned.
    let mut incoming: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sx];
    for s in 0..sx {
        for a in 0..ax {
            incoming[mx.next(s, a)].push((s, a));
        }
    }
    let ctx = Ctx {
        mx,
        ox,
        my,
        oy,
        incoming,
    };
    let psi_count = (ay as u64).pow(ax as u32);
    let mut out: Vec<ReductionMap> = (0..psi_count)
        .into_par_iter()
        .flat_map_iter(|code| {
            let psi = decode(code, ax, ay);
            let mut found = Vec::new();
            let mut phi = vec![usize::MAX; sx];
            ctx.assign(0, &psi, &mut phi, &mut found);
            found
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}

fn decode(mut code: u64, len: usize, base: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % base as u64) as usize;
        code /= base as u64;
    }
    out
}

struct Ctx<'a> {
    mx: &'a TabularMdp,
    ox: &'a OptimalityTable,
    my: &'a TabularMdp,
    oy: &'a OptimalityTable,
    incoming: Vec<Vec<(usize, usize)>>,
}

impl Ctx<'_> {
    /// Optimality and dynamics conditions for every pair whose endpoints are both assigned once
    /// state `s` is.
    fn consistent(&self, s: usize, psi: &[usize], phi: &[usize]) -> bool {
        let t = phi[s];
        for (a, &b) in psi.iter().enumerate() {
            if !self.oy.get(t, b) {
                continue;
            }
            if !self.ox.get(s, a) {
                return false;
            }
            let next = self.mx.next(s, a);
            if next <= s && phi[next] != self.my.next(t, b) {
                return false;
            }
        }
        for &(src, a) in &self.incoming[s] {
            if src < s {
                let (ts, b) = (phi[src], psi[a]);
                if self.oy.get(ts, b) && self.my.next(ts, b) != t {
                    return false;
                }
            }
        }
        true
    }

    fn assign(&self, s: usize, psi: &[usize], phi: &mut Vec<usize>, found: &mut Vec<ReductionMap>) {
        if s == phi.len() {
            let r = ReductionMap::new(phi.clone(), psi.to_vec());
            if is_reduction_unchecked(self.mx, self.ox, self.my, self.oy, &r) {
                found.push(r);
            }
            return;
        }
        for t in 0..self.my.state_count() {
            phi[s] = t;
            if self.consistent(s, psi, phi) {
                self.assign(s + 1, psi, phi, found);
            }
        }
        phi[s] = usize::MAX;
    }
}
