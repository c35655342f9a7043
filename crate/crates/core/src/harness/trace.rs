//! JSONL episode traces: one header line carrying the seed, the full
//! environment configuration and the map text, then one line per state.

use super::HarnessError;
use crate::env::{Env, EnvConfig, JointAction, Outcome, Step};
use crate::world::{Cell, GridMap};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub version: u32,
    pub seed: u64,
    pub policy: String,
    pub config: EnvConfig,
}

/// Observable state after a transition (or after reset, with no action).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub t: u32,
    pub action: Option<Vec<f64>>,
    pub hlr: Cell,
    pub llr: Cell,
    pub llr_heading: f64,
    pub evac: Cell,
    pub evac_heading: f64,
    pub gamma: f64,
    pub guided: bool,
    pub visible: bool,
    pub burning: usize,
    pub ignited: Vec<Cell>,
    pub reward: f64,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

impl StepTrace {
    pub fn initial(env: &Env) -> Self {
        let st = env.state();
        Self {
            t: st.t,
            action: None,
            hlr: st.hlr.position,
            llr: st.llr.position,
            llr_heading: st.llr.heading,
            evac: st.evacuee.position(),
            evac_heading: st.evacuee.pose.heading,
            gamma: st.evacuee.panic.gamma,
            guided: st.evacuee.guided,
            visible: st.evac_visible(),
            burning: st.fire.burning_count(),
            ignited: st.fire.burning_cells(),
            reward: 0.0,
            done: st.done,
            outcome: st.outcome,
        }
    }

    pub fn capture(env: &Env, action: Option<&JointAction>, step: &Step) -> Self {
        Self {
            action: action.map(|a| a.to_vec()),
            ignited: step.info.ignited.clone(),
            reward: step.reward,
            ..Self::initial(env)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TraceLine {
    Header(Box<TraceHeader>),
    Step(StepTrace),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub header: TraceHeader,
    /// Reset state first, then one entry per transition.
    pub steps: Vec<StepTrace>,
}

impl EpisodeTrace {
    pub fn start(config: &EnvConfig, seed: u64, policy: &str, env: &Env) -> Self {
        Self {
            header: TraceHeader {
                version: TRACE_VERSION,
                seed,
                policy: policy.to_string(),
                config: config.clone(),
            },
            steps: vec![StepTrace::initial(env)],
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), HarnessError> {
        serde_json::to_writer(&mut out, &TraceLine::Header(Box::new(self.header.clone())))?;
        out.write_all(b"\n")?;
        for s in &self.steps {
            serde_json::to_writer(&mut out, &TraceLine::Step(s.clone()))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, HarnessError> {
        let mut header = None;
        let mut steps = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: TraceLine =
                serde_json::from_str(&line).map_err(|e| HarnessError::Trace(format!("line {}: {e}", i + 1)))?;
            match (parsed, header.is_some()) {
                (TraceLine::Header(h), false) => header = Some(*h),
                (TraceLine::Header(_), true) => {
                    return Err(HarnessError::Trace(format!("line {}: second header", i + 1)))
                }
                (TraceLine::Step(_), false) => {
                    return Err(HarnessError::Trace("trace does not start with a header".into()))
                }
                (TraceLine::Step(s), true) => steps.push(s),
            }
        }
        let header = header.ok_or_else(|| HarnessError::Trace("empty trace".into()))?;
        if header.version != TRACE_VERSION {
            return Err(HarnessError::Trace(format!(
                "unsupported trace version {}",
                header.version
            )));
        }
        Ok(Self { header, steps })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub steps: Vec<StepTrace>,
    /// Indices whose recomputed state differs from the recorded one.
    pub mismatches: Vec<usize>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-simulates a trace from its seed and recorded actions.
pub fn replay(trace: &EpisodeTrace) -> Result<ReplayReport, HarnessError> {
    let mut env = Env::new(Arc::new(trace.header.config.clone()))?;
    env.reset(trace.header.seed)?;
    let mut steps = vec![StepTrace::initial(&env)];
    for (i, recorded) in trace.steps.iter().enumerate().skip(1) {
        let action = recorded
            .action
            .as_deref()
            .ok_or_else(|| HarnessError::Trace(format!("step {i} has no action")))?;
        if action.len() != crate::env::JOINT_ACTION_DIM {
            return Err(HarnessError::Trace(format!(
                "step {i}: action has {} values",
                action.len()
            )));
        }
        let action = JointAction::from_slice(action);
        let step = env.step(&action)?;
        steps.push(StepTrace::capture(&env, Some(&action), &step));
    }
    let mut mismatches: Vec<usize> = steps
        .iter()
        .zip(&trace.steps)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i)
        .collect();
    if steps.len() != trace.steps.len() {
        mismatches.push(steps.len().min(trace.steps.len()));
    }
    Ok(ReplayReport { steps, mismatches })
}

/// ASCII frame of one traced state: map symbols, `*` burning (as far as the
/// trace's ignitions tell), `H`/`L`/`V` for the agents.
pub fn render_frame(map: &GridMap, burning: &[bool], s: &StepTrace) -> String {
    let mut rows: Vec<Vec<char>> = map.render_rows().into_iter().map(|r| r.chars().collect()).collect();
    for c in map.cells() {
        if burning[map.index(c)] {
            rows[c.y as usize][c.x as usize] = '*';
        }
    }
    for (cell, ch) in [(s.evac, 'V'), (s.llr, 'L'), (s.hlr, 'H')] {
        if map.in_bounds(cell) {
            rows[cell.y as usize][cell.x as usize] = ch;
        }
    }
    rows.into_iter()
        .map(|r| r.into_iter().collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_text(trace: &EpisodeTrace, frames: bool) -> String {
    let map = &trace.header.config.map;
    let mut burning = vec![false; map.len()];
    let mut out = String::new();
    for s in &trace.steps {
        for c in &s.ignited {
            if map.in_bounds(*c) {
                burning[map.index(*c)] = true;
            }
        }
        out.push_str(&format!(
            "t={:<3} hlr={} llr={} evac={} gamma={:.3} guided={} visible={} burning={} reward={:.4}",
            s.t, s.hlr, s.llr, s.evac, s.gamma, s.guided, s.visible, s.burning, s.reward
        ));
        if let Some(o) = s.outcome {
            out.push_str(&format!(
                " outcome={}",
                serde_json::to_string(&o).unwrap_or_default().trim_matches('"')
            ));
        }
        out.push('\n');
        if frames {
            out.push_str(&render_frame(map, &burning, s));
            out.push_str("\n\n");
        }
    }
    out
}

pub fn write_csv<W: Write>(trace: &EpisodeTrace, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t",
        "hlr_x",
        "hlr_y",
        "llr_x",
        "llr_y",
        "llr_heading",
        "evac_x",
        "evac_y",
        "evac_heading",
        "gamma",
        "guided",
        "visible",
        "burning",
        "reward",
        "done",
    ])?;
    for s in &trace.steps {
        w.write_record([
            s.t.to_string(),
            s.hlr.x.to_string(),
            s.hlr.y.to_string(),
            s.llr.x.to_string(),
            s.llr.y.to_string(),
            s.llr_heading.to_string(),
            s.evac.x.to_string(),
            s.evac.y.to_string(),
            s.evac_heading.to_string(),
            s.gamma.to_string(),
            s.guided.to_string(),
            s.visible.to_string(),
            s.burning.to_string(),
            s.reward.to_string(),
            s.done.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
