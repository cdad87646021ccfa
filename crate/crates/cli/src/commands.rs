use std::path::Path;

use mdpalign::chain::stationary_triplet;
use mdpalign::io::{self, from_json, mdp_to_json, policy_to_json, to_json};
use mdpalign::multitask::maximal_reduction_ordered;
use mdpalign::search::DEFAULT_CAP;
use mdpalign::{
    adapt_policy, compose_cdnf, empirical_triplet, enumerate_reductions, generate_planted,
    inverse_action_map, is_transferable, policy_value, search_alignment, verify_reduction,
    AlignmentMaps, CdnfExpr, CriterionMode, Error, OTask, PlantSpec, ReductionMap, SearchConfig,
    SolvedMdp, TabularPolicy, TripletDistribution,
};
use serde_json::{json, Value};

use crate::report::{write_file, Inputs};
use crate::{Cli, CliError, Command, Outcome};

fn load<T>(
    inputs: &mut Inputs,
    path: &Path,
    parse: impl FnOnce(&str) -> mdpalign::Result<T>,
) -> Result<T, CliError> {
    let text = inputs.read(path)?;
    parse(&text).map_err(|e| CliError::InFile(path.to_path_buf(), e))
}

fn load_solved(
    inputs: &mut Inputs,
    path: &Path,
    mode: CriterionMode,
) -> Result<SolvedMdp, CliError> {
    let mdp = load(inputs, path, io::parse_mdp)?;
    Ok(SolvedMdp::solve(mdp, mode)?)
}

fn load_policy(
    inputs: &mut Inputs,
    path: Option<&Path>,
    m: &SolvedMdp,
) -> Result<TabularPolicy, CliError> {
    match path {
        Some(p) => load(inputs, p, io::parse_policy),
        None => Ok(m.covering_policy()),
    }
}

fn ok(payload: Value, seeds: Vec<u64>) -> Outcome {
    Outcome {
        payload,
        seeds,
        failed: false,
    }
}

fn triplet_rows(d: &TripletDistribution) -> Value {
    d.iter()
        .map(|((s, a, next), p)| json!({ "s": s, "a": a, "next": next, "p": p }))
        .collect()
}

pub fn dispatch(cli: &Cli, command: &Command, inputs: &mut Inputs) -> Result<Outcome, CliError> {
    let mode = cli.mode;
    let seed = cli.seed.unwrap_or(0);
    match command {
        Command::Solve {
            mdp,
            gamma_override,
        } => {
            let mut m = load(inputs, mdp, io::parse_mdp)?;
            if let Some(g) = gamma_override {
                m = m.with_gamma(*g)?;
            }
            let s = SolvedMdp::solve(m, mode)?;
            Ok(ok(
                json!({
                    "mode": mode,
                    "gamma": s.mdp.gamma(),
                    "j_optimal": s.opt.optimal_value(&s.mdp),
                    "v_star": s.opt.v_star,
                    "q_star": s.opt.q_star,
                    "greedy_sets": s.opt.greedy_sets,
                    "recurrent_states": s.opt.recurrent_states,
                    "o": s.opt.table.o,
                    "sweeps": s.opt.sweeps,
                }),
                vec![],
            ))
        }

        Command::Verify { mx, my, map } => {
            let sx = load_solved(inputs, mx, mode)?;
            let sy = load_solved(inputs, my, mode)?;
            let r: ReductionMap = load(inputs, map, from_json)?;
            let report = verify_reduction(&sx, &sy, &r)?;
            let failed = !report.is_empty();
            Ok(Outcome {
                payload: json!({ "is_reduction": !failed, "violations": report }),
                seeds: vec![],
                failed,
            })
        }

        Command::Adapt {
            my,
            map,
            mx,
            policy,
            policy_out,
        } => {
            let sy = load_solved(inputs, my, mode)?;
            let sx = load_solved(inputs, mx, mode)?;
            let pi_y = load_policy(inputs, policy.as_deref(), &sy)?;
            let text = inputs.read(map)?;
            let maps = parse_maps(&text, &sy).map_err(|e| CliError::InFile(map.clone(), e))?;
            let pi_x = adapt_policy(&pi_y, &maps, sx.mdp.action_count())?;
            let j_adapted = policy_value(&sx.mdp, &pi_x)?;
            let j_optimal = sx.opt.optimal_value(&sx.mdp);
            if let Some(path) = policy_out {
                write_file(path, &policy_to_json(&pi_x))?;
            }
            Ok(ok(
                json!({
                    "maps": maps,
                    "policy": { "probs": pi_x.rows() },
                    "j_adapted": j_adapted,
                    "j_optimal": j_optimal,
                    "suboptimality_gap": j_optimal - j_adapted,
                }),
                vec![],
            ))
        }

        Command::Align {
            mx,
            my,
            config,
            trace,
            maps_out,
        } => {
            let sx = load_solved(inputs, mx, mode)?;
            let sy = load_solved(inputs, my, mode)?;
            let mut cfg = match config {
                Some(p) => load(inputs, p, from_json::<SearchConfig>)?,
                None => SearchConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.rng_seed = s;
            }
            let pi_y = sy.covering_policy();
            let outcome = search_alignment(&sx, &sy, &pi_y, &cfg)?;
            if let Some(path) = trace {
                write_trace(path, &outcome.trace)?;
            }
            if let Some(path) = maps_out {
                write_file(path, &to_json(&outcome.maps))?;
            }
            let met = outcome.score.both_met();
            Ok(Outcome {
                payload: json!({
                    "config": cfg,
                    "maps": outcome.maps,
                    "score": outcome.score,
                    "loss": outcome.loss,
                    "restart": outcome.restart,
                    "g_injective": outcome.g_injective,
                    "iterations": outcome.trace.len(),
                }),
                seeds: vec![cfg.rng_seed],
                failed: cli.strict && !met,
            })
        }

        Command::Enumerate { mx, my, cap } => {
            let sx = load_solved(inputs, mx, mode)?;
            let sy = load_solved(inputs, my, mode)?;
            let all = enumerate_reductions(&sx, &sy, cap.unwrap_or(DEFAULT_CAP))?;
            Ok(ok(json!({ "count": all.len(), "reductions": all }), vec![]))
        }

        Command::Maximal { mdp, quotient_out } => {
            let m = load_solved(inputs, mdp, mode)?;
            let out = maximal_reduction_ordered(&m, cli.seed)?;
            if let Some(path) = quotient_out {
                write_file(path, &mdp_to_json(&out.quotient.mdp))?;
            }
            Ok(ok(
                json!({
                    "states_before": m.mdp.state_count(),
                    "actions_before": m.mdp.action_count(),
                    "states_after": out.quotient.mdp.state_count(),
                    "actions_after": out.quotient.mdp.action_count(),
                    "merges": out.merges,
                    "reduction": out.reduction,
                    "quotient": io::MdpDocument::from(&out.quotient.mdp),
                }),
                cli.seed.into_iter().collect(),
            ))
        }

        Command::Transfer {
            taskset,
            target,
            expr,
            cap,
        } => {
            let ts = load(inputs, taskset, io::parse_task_set)?;
            let tasks = ts.solve(mode)?;
            let target = match (target, expr) {
                (Some(files), None) => {
                    let tx = load(inputs, &files[0], io::parse_mdp)?;
                    let ty = load(inputs, &files[1], io::parse_mdp)?;
                    OTask::solve(&tx, &ty, mode)?
                }
                (None, Some(p)) => {
                    let b: CdnfExpr = load(inputs, p, from_json)?;
                    compose_cdnf(&tasks, &b)?
                }
                _ => {
                    return Err(CliError::Input(
                        "give exactly one of --target MX MY or --expr FILE".into(),
                    ))
                }
            };
            let result = is_transferable(&tasks, &target, cap.unwrap_or(DEFAULT_CAP))?;
            Ok(ok(
                serde_json::to_value(result).expect("serializes"),
                vec![],
            ))
        }

        Command::Generate { spec, out_dir } => {
            let mut spec: PlantSpec = load(inputs, spec, from_json)?;
            if let Some(s) = cli.seed {
                spec.rng_seed = s;
            }
            let pair = generate_planted(&spec)?;
            let sy = SolvedMdp::solve(pair.my.clone(), mode)?;
            let g = inverse_action_map(&pair.planted.psi, sy.table(), None)?;
            let maps = AlignmentMaps::from_reduction(&pair.planted, g);
            let files = [
                ("mx.json", mdp_to_json(&pair.mx)),
                ("my.json", mdp_to_json(&pair.my)),
                ("reduction.json", to_json(&pair.planted)),
                ("alignment.json", to_json(&maps)),
            ];
            for (name, text) in &files {
                write_file(&out_dir.join(name), text)?;
            }
            Ok(ok(
                json!({
                    "spec": spec,
                    "files": files.iter().map(|(n, _)| n).collect::<Vec<_>>(),
                    "states_x": pair.mx.state_count(),
                    "actions_x": pair.mx.action_count(),
                    "states_y": pair.my.state_count(),
                    "actions_y": pair.my.action_count(),
                }),
                vec![spec.rng_seed],
            ))
        }

        Command::Simulate {
            mdp,
            policy,
            steps,
            seeds,
        } => {
            let m = load_solved(inputs, mdp, mode)?;
            let pi = load_policy(inputs, policy.as_deref(), &m)?;
            let seeds = if seeds.is_empty() {
                vec![seed]
            } else {
                seeds.clone()
            };
            let empirical = empirical_triplet(&m.mdp, &pi, *steps, &seeds)?;
            let exact = match stationary_triplet(&m.mdp, &pi) {
                Ok(d) => Some(d),
                Err(Error::Multichain { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let tv = exact.as_ref().map(|d| empirical.total_variation(d));
            Ok(ok(
                json!({
                    "steps": steps,
                    "empirical": triplet_rows(&empirical),
                    "exact": exact.as_ref().map(triplet_rows),
                    "tv_distance": tv,
                }),
                seeds,
            ))
        }
    }
}

/// Alignment maps `{f, g}` as given, or a reduction `{phi, psi}` turned into
/// maps with `f = phi` and `g` the smallest-preimage inverse of `psi`.
fn parse_maps(text: &str, sy: &SolvedMdp) -> mdpalign::Result<AlignmentMaps> {
    let value: Value = from_json(text)?;
    if value.get("phi").is_some() {
        let r: ReductionMap = from_json(text)?;
        let g = inverse_action_map(&r.psi, sy.table(), None)?;
        Ok(AlignmentMaps::from_reduction(&r, g))
    } else {
        from_json(text)
    }
}

fn write_trace(path: &Path, rows: &[mdpalign::search::TraceRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    write_file(path, &String::from_utf8(bytes).expect("csv is utf-8"))
}
