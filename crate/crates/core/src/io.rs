//! JSON documents for every artifact: MDPs, policies, maps, task sets,
//! expressions and configurations.
//!
//! Parse errors carry the line and column of the offending text. Validation
//! errors on an MDP field are anchored at the first line mentioning that key.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{TabularMdp, TabularPolicy};
use crate::multitask::TaskSet;

fn default_gamma() -> f64 {
    0.95
}

/// On-disk form of [`TabularMdp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpDocument {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub transition: Vec<Vec<usize>>,
    pub reward: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dummy_state: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dummy_action: Option<usize>,
}

impl From<&TabularMdp> for MdpDocument {
    fn from(m: &TabularMdp) -> Self {
        MdpDocument {
            states: m.state_labels().to_vec(),
            actions: m.action_labels().to_vec(),
            transition: m.transitions().to_vec(),
            reward: m.rewards().to_vec(),
            eta: m.eta().to_vec(),
            gamma: m.gamma(),
            dummy_state: m.dummy_state(),
            dummy_action: m.dummy_action(),
        }
    }
}

impl TryFrom<MdpDocument> for TabularMdp {
    type Error = Error;

    fn try_from(d: MdpDocument) -> Result<Self> {
        TabularMdp::with_labels(d.states, d.actions, d.transition, d.reward, d.eta, d.gamma)?
            .with_dummies(d.dummy_state, d.dummy_action)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    pub probs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSetDocument {
    pub x_mdps: Vec<MdpDocument>,
    pub y_mdps: Vec<MdpDocument>,
}

fn parse_error(e: serde_json::Error) -> Error {
    let text = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let message = text.strip_suffix(&suffix).unwrap_or(&text).to_string();
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message,
    }
}

/// First line (1-based) containing the JSON key `key`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

fn anchor(text: &str, e: Error) -> Error {
    match &e {
        Error::InvalidMdp { field, .. } => match key_line(text, field) {
            Some(line) => Error::Parse {
                line,
                column: 1,
                message: e.to_string(),
            },
            None => e,
        },
        _ => e,
    }
}

/// Deserializes any document type, reporting syntax and schema errors with
/// their position.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(parse_error)
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

pub fn parse_mdp(text: &str) -> Result<TabularMdp> {
    let doc: MdpDocument = from_json(text)?;
    TabularMdp::try_from(doc).map_err(|e| anchor(text, e))
}

pub fn mdp_to_json(mdp: &TabularMdp) -> String {
    to_json(&MdpDocument::from(mdp))
}

pub fn parse_policy(text: &str) -> Result<TabularPolicy> {
    let doc: PolicyDocument = from_json(text)?;
    TabularPolicy::new(doc.probs)
}

pub fn policy_to_json(pi: &TabularPolicy) -> String {
    to_json(&PolicyDocument {
        probs: pi.rows().to_vec(),
    })
}

pub fn parse_task_set(text: &str) -> Result<TaskSet> {
    let doc: TaskSetDocument = from_json(text)?;
    if doc.x_mdps.len() != doc.y_mdps.len() {
        return Err(Error::InvalidConfig(format!(
            "{} x-mdps but {} y-mdps",
            doc.x_mdps.len(),
            doc.y_mdps.len()
        )));
    }
    let pairs = doc
        .x_mdps
        .into_iter()
        .zip(doc.y_mdps)
        .map(|(x, y)| Ok((TabularMdp::try_from(x)?, TabularMdp::try_from(y)?)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| anchor(text, e))?;
    TaskSet::new(pairs)
}

pub fn task_set_to_json(ts: &TaskSet) -> String {
    let (x_mdps, y_mdps) = ts
        .pairs()
        .iter()
        .map(|(x, y)| (MdpDocument::from(x), MdpDocument::from(y)))
        .unzip();
    to_json(&TaskSetDocument { x_mdps, y_mdps })
}
