use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State and action maps `(phi: S_x -> S_y, psi: A_x -> A_y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionMap {
    pub phi: Vec<usize>,
    pub psi: Vec<usize>,
}

impl ReductionMap {
    pub fn new(phi: Vec<usize>, psi: Vec<usize>) -> Self {
        ReductionMap { phi, psi }
    }

    pub fn identity(state_count: usize, action_count: usize) -> Self {
        ReductionMap {
            phi: (0..state_count).collect(),
            psi: (0..action_count).collect(),
        }
    }

    /// True when both maps are bijections onto codomains of the given sizes.
    pub fn is_permutation(&self, state_count_y: usize, action_count_y: usize) -> bool {
        is_bijection(&self.phi, state_count_y) && is_bijection(&self.psi, action_count_y)
    }

    pub(crate) fn check_dims(&self, sx: usize, ax: usize, sy: usize, ay: usize) -> Result<()> {
        check_map("phi", &self.phi, sx, sy)?;
        check_map("psi", &self.psi, ax, ay)
    }
}

/// Alignment maps `(f: S_x -> S_y, g: A_y -> A_x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignmentMaps {
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

impl AlignmentMaps {
    pub fn new(f: Vec<usize>, g: Vec<usize>) -> Self {
        AlignmentMaps { f, g }
    }

    pub fn identity(state_count: usize, action_count: usize) -> Self {
        AlignmentMaps {
            f: (0..state_count).collect(),
            g: (0..action_count).collect(),
        }
    }

    /// Alignment derived from a reduction: `f = phi`, `g` supplied.
    pub fn from_reduction(r: &ReductionMap, g: Vec<usize>) -> Self {
        AlignmentMaps {
            f: r.phi.clone(),
            g,
        }
    }

    pub fn is_injective_g(&self) -> bool {
        let mut seen = self.g.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    pub(crate) fn check_dims(&self, sx: usize, ax: usize, sy: usize, ay: usize) -> Result<()> {
        check_map("f", &self.f, sx, sy)?;
        check_map("g", &self.g, ay, ax)
    }
}

fn check_map(name: &str, map: &[usize], domain: usize, codomain: usize) -> Result<()> {
    if map.len() != domain {
        return Err(Error::DimensionMismatch(format!(
            "{name} has {} entries, expected {domain}",
            map.len()
        )));
    }
    if let Some(i) = map.iter().position(|&v| v >= codomain) {
        return Err(Error::DimensionMismatch(format!(
            "{name}[{i}] = {} is outside 0..{codomain}",
            map[i]
        )));
    }
    Ok(())
}

fn is_bijection(map: &[usize], codomain: usize) -> bool {
    if map.len() != codomain {
        return false;
    }
    let mut hit = vec![false; codomain];
    for &v in map {
        if v >= codomain || hit[v] {
            return false;
        }
        hit[v] = true;
    }
    true
}

/// `map^-1(y)` for every `y` in `0..codomain`, each ascending.
pub fn preimages(map: &[usize], codomain: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); codomain];
    for (x, &y) in map.iter().enumerate() {
        out[y].push(x);
    }
    out
}
