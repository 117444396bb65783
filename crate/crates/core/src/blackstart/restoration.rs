use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::comm::{comm_reachable, CommGraph};
use super::microgrid::{
    dispatch, form_microgrids, pick_up_area, reconnect_followers, synchronize_and_merge, Microgrid,
};
use super::service::{classify_service, ServiceClass};
use super::RestorationScenario;
use crate::error::{Error, Result, Validate};
use crate::format::sig9;
use crate::rng;

/// Restoration stages. `S4p` and `S5p` are the primed stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    /// Normal operation.
    S1,
    /// Blackout.
    S2,
    /// Grid-forming units have started isolated microgrids.
    S3,
    /// Followers reconnected inside the microgrids.
    S4,
    /// A microgrid picked up a neighbouring area.
    #[serde(rename = "S4'")]
    S4p,
    /// Two microgrids synchronized and merged.
    S5,
    /// Merging has reached its maximum extent.
    #[serde(rename = "S5'")]
    S5p,
}

impl Stage {
    /// Position in the stage order; S4' and S5 may alternate.
    pub fn rank(self) -> u8 {
        match self {
            Stage::S1 => 0,
            Stage::S2 => 1,
            Stage::S3 => 2,
            Stage::S4 => 3,
            Stage::S4p | Stage::S5 => 4,
            Stage::S5p => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::S1 => "S1",
            Stage::S2 => "S2",
            Stage::S3 => "S3",
            Stage::S4 => "S4",
            Stage::S4p => "S4'",
            Stage::S5 => "S5",
            Stage::S5p => "S5'",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "S1" => Stage::S1,
            "S2" => Stage::S2,
            "S3" => Stage::S3,
            "S4" => Stage::S4,
            "S4'" => Stage::S4p,
            "S5" => Stage::S5,
            "S5'" => Stage::S5p,
            _ => return Err(Error::Parse(format!("unknown stage `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub t: f64,
    pub stage: Stage,
    pub served_total: f64,
    pub served_critical: f64,
    pub service_class: ServiceClass,
    /// Capacity of all running units.
    #[serde(default)]
    pub generation_mw: f64,
    #[serde(default)]
    pub detail: String,
}

/// One attempt to close a tie between two microgrids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeAttempt {
    pub t: f64,
    pub switch: String,
    pub attempt: u32,
    pub freq_diff: f64,
    pub phase_diff: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationTimeline {
    pub events: Vec<TimelineEvent>,
    pub merges: Vec<MergeAttempt>,
    pub microgrids: Vec<Microgrid>,
    pub total_load: f64,
    pub total_critical: f64,
    /// Installed capacity of all units.
    pub total_generation: f64,
    /// Agent rounds run until the fixpoint, including the final idle one.
    pub rounds: usize,
}

const CSV_HEADER: &str = "t,stage,served_total,served_critical,service_class";

impl RestorationTimeline {
    pub fn final_event(&self) -> &TimelineEvent {
        self.events.last().expect("timeline starts with S2")
    }

    /// Final served load as a fraction of all load.
    pub fn restored_fraction(&self) -> f64 {
        if self.total_load > 0.0 {
            self.final_event().served_total / self.total_load
        } else {
            1.0
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for e in &self.events {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                sig9(e.t),
                e.stage,
                sig9(e.served_total),
                sig9(e.served_critical),
                e.service_class
            ));
        }
        out
    }

    /// Reads the event table back. Totals are unknown from the table alone
    /// and are left at zero.
    pub fn events_from_csv(text: &str) -> Result<Vec<TimelineEvent>> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != CSV_HEADER {
            return Err(Error::Parse(format!("timeline header must be `{CSV_HEADER}`")));
        }
        let mut out = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let num = |k: usize| -> Result<f64> {
                row[k]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number `{}`", i + 1, &row[k])))
            };
            out.push(TimelineEvent {
                t: num(0)?,
                stage: row[1].trim().parse()?,
                served_total: num(2)?,
                served_critical: num(3)?,
                service_class: row[4].trim().parse()?,
                generation_mw: 0.0,
                detail: String::new(),
            });
        }
        Ok(out)
    }
}

/// Upper bound of the phase difference on attempt `k` (0-based). The band
/// halves with every attempt while the alignment controller converges.
pub fn alignment_band(k: u32) -> f64 {
    PI * 0.5f64.powi(k as i32)
}

/// Step-by-step restoration engine.
pub struct Restoration<'a> {
    sc: &'a RestorationScenario,
    seed: u64,
    run: u64,
    t: f64,
    area_grid: Vec<Option<usize>>,
    grids: Vec<Option<Microgrid>>,
    powered: BTreeSet<String>,
    attempts: BTreeMap<String, u32>,
    closed: BTreeSet<String>,
    events: Vec<TimelineEvent>,
    merges: Vec<MergeAttempt>,
    rounds: usize,
    expanded: bool,
    comm_cache: Option<((usize, usize), CommGraph)>,
}

impl<'a> Restoration<'a> {
    /// Engine positioned right after the collapse, with the S2 event
    /// recorded.
    pub fn new(sc: &'a RestorationScenario, seed: u64, run: u64) -> Self {
        let mut r = Self {
            sc,
            seed,
            run,
            t: 0.0,
            area_grid: vec![None; sc.areas.len()],
            grids: Vec::new(),
            powered: BTreeSet::new(),
            attempts: BTreeMap::new(),
            closed: BTreeSet::new(),
            events: Vec::new(),
            merges: Vec::new(),
            rounds: 0,
            expanded: false,
            comm_cache: None,
        };
        r.record(Stage::S2, "blackout".into());
        r
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn microgrids(&self) -> impl Iterator<Item = &Microgrid> {
        self.grids.iter().flatten()
    }

    fn served(&self) -> (f64, f64, f64) {
        self.microgrids().fold((0.0, 0.0, 0.0), |(a, b, g), m| {
            (a + m.served_mw, b + m.served_critical_mw, g + m.generation_mw)
        })
    }

    fn record(&mut self, stage: Stage, detail: String) {
        let (total, critical, generation) = self.served();
        let (tl, tc) = (self.sc.total_load(), self.sc.total_critical());
        let class = classify_service(critical.min(tc), tc, total.min(tl), tl).unwrap_or(ServiceClass::Unacceptable);
        self.events.push(TimelineEvent {
            t: self.t,
            stage,
            served_total: total,
            served_critical: critical,
            service_class: class,
            generation_mw: generation,
            detail,
        });
    }

    fn energize(&mut self, grid: usize) {
        let mg = self.grids[grid].as_ref().expect("live grid");
        for a in &mg.areas {
            let ai = self.sc.area_index(a).expect("validated");
            self.area_grid[ai] = Some(grid);
        }
        let buses: Vec<String> = mg.buses(self.sc).into_iter().map(String::from).collect();
        self.powered.extend(buses);
    }

    /// Battery energy left at the current time for every unpowered station.
    fn charge(&self) -> BTreeMap<String, f64> {
        self.sc
            .comm
            .iter()
            .filter(|c| !c.bus.as_ref().is_some_and(|b| self.powered.contains(b)))
            .map(|c| (c.id.clone(), (c.battery_kwh - c.drain_kw * self.t / 3600.0).max(0.0)))
            .collect()
    }

    pub fn comm_graph(&self) -> CommGraph {
        comm_reachable(self.sc, &self.powered, &self.charge())
    }

    /// Number of battery stations that have run flat by now. Together with
    /// the powered bus count it determines the graph.
    fn depleted(&self) -> usize {
        self.sc
            .comm
            .iter()
            .filter(|c| c.has_battery && c.battery_kwh - c.drain_kw * self.t / 3600.0 <= 0.0)
            .count()
    }

    fn agents_connected(&mut self, a: usize, b: usize) -> bool {
        let key = (self.powered.len(), self.depleted());
        if !matches!(&self.comm_cache, Some((k, _)) if *k == key) {
            self.comm_cache = Some((key, self.comm_graph()));
        }
        let (_, graph) = self.comm_cache.as_ref().expect("just filled");
        graph.agents_connected(self.sc, a, b)
    }

    /// Stage S3: every grid-forming area starts its own microgrid.
    pub fn form(&mut self) {
        for mg in form_microgrids(self.sc) {
            self.t += self.sc.timing.switching_s;
            let id = mg.id.clone();
            self.grids.push(Some(mg));
            self.energize(self.grids.len() - 1);
            self.record(Stage::S3, format!("microgrid {id} formed"));
        }
    }

    /// Stage S4: followers inside the formed microgrids.
    pub fn start_followers(&mut self) {
        for i in 0..self.grids.len() {
            if self.try_followers(i) {
                self.t += self.sc.timing.switching_s;
                let id = self.grids[i].as_ref().map(|m| m.id.clone()).unwrap_or_default();
                self.record(Stage::S4, format!("followers started in {id}"));
            }
        }
    }

    fn try_followers(&mut self, i: usize) -> bool {
        let Some(mg) = self.grids[i].as_ref() else {
            return false;
        };
        let next = reconnect_followers(mg, self.sc);
        let changed = next.followers.len() != mg.followers.len();
        self.grids[i] = Some(next);
        changed
    }

    /// One agent round: area agents that can reach each other over the
    /// communication graph agree on closing ties, switch by switch in id
    /// order. Returns whether anything changed.
    pub fn agent_round(&mut self) -> bool {
        self.rounds += 1;
        let mut switches: Vec<usize> = (0..self.sc.switches.len()).collect();
        switches.sort_by(|&a, &b| self.sc.switches[a].id.cmp(&self.sc.switches[b].id));
        let mut changed = false;
        for si in switches {
            let sw = &self.sc.switches[si];
            if self.closed.contains(&sw.id) {
                continue;
            }
            let a = self.sc.area_index(&sw.a).expect("validated");
            let b = self.sc.area_index(&sw.b).expect("validated");
            let action = match (self.area_grid[a], self.area_grid[b]) {
                (Some(x), Some(y)) if x == y => continue,
                (None, None) => continue,
                (Some(x), None) => Some((x, b, None)),
                (None, Some(y)) => Some((y, a, None)),
                (Some(x), Some(y)) => Some((x.min(y), 0, Some(x.max(y)))),
            };
            let Some((grid, area, other)) = action else { continue };
            if !self.agents_connected(a, b) {
                continue;
            }
            changed |= match other {
                None => self.pick_up(&sw.id.clone(), grid, area),
                Some(o) => self.merge(&sw.id.clone(), si, grid, o),
            };
        }
        for i in 0..self.grids.len() {
            if self.try_followers(i) {
                self.t += self.sc.timing.switching_s;
                self.expanded = true;
                changed = true;
                let id = self.grids[i].as_ref().map(|m| m.id.clone()).unwrap_or_default();
                self.record(Stage::S4p, format!("deferred followers started in {id}"));
            }
        }
        changed
    }

    fn pick_up(&mut self, switch: &str, grid: usize, area: usize) -> bool {
        let sc = self.sc;
        let area_id = &sc.areas[area].id;
        let mg = self.grids[grid].as_ref().expect("live grid");
        let has_followers = sc.ders.iter().any(|d| sc.area_of_bus(&d.bus) == Some(area_id.as_str()));
        if !(mg.margin_mw > 0.0 || has_followers) {
            return false;
        }
        self.t += sc.timing.switching_s;
        self.grids[grid] = Some(pick_up_area(mg, area_id, sc));
        self.closed.insert(switch.to_string());
        self.energize(grid);
        self.expanded = true;
        let id = self.grids[grid].as_ref().map(|m| m.id.clone()).unwrap_or_default();
        self.record(Stage::S4p, format!("{id} picked up {area_id} via {switch}"));
        true
    }

    fn merge(&mut self, switch: &str, si: usize, keep: usize, drop: usize) -> bool {
        let sc = self.sc;
        let policy = sc.sync_policy;
        loop {
            let k = *self.attempts.get(switch).unwrap_or(&0);
            if k >= policy.max_attempts {
                return false;
            }
            self.attempts.insert(switch.to_string(), k + 1);
            let mut stream = rng::stream(
                self.seed,
                rng::purpose::MERGE_PHASE,
                rng::key(&[self.run, si as u64, k as u64]),
            );
            let delta = stream.random::<f64>() * alignment_band(k);
            let a = self.grids[keep].as_ref().expect("live grid");
            let mut b = self.grids[drop].clone().expect("live grid");
            b.phase = a.phase + delta;
            match synchronize_and_merge(a, &b, &policy) {
                Ok(mut merged) => {
                    self.merges.push(MergeAttempt {
                        t: self.t,
                        switch: switch.to_string(),
                        attempt: k,
                        freq_diff: (a.frequency - b.frequency).abs(),
                        phase_diff: delta,
                        accepted: true,
                    });
                    self.t += sc.timing.switching_s;
                    let (a_id, b_id) = (a.id.clone(), b.id.clone());
                    dispatch(&mut merged, sc);
                    let merged = reconnect_followers(&merged, sc);
                    self.grids[keep] = Some(merged);
                    self.grids[drop] = None;
                    self.closed.insert(switch.to_string());
                    self.energize(keep);
                    self.expanded = true;
                    self.record(Stage::S5, format!("{a_id} and {b_id} merged via {switch}"));
                    return true;
                }
                Err(Error::SyncRejected { freq_diff, phase_diff }) => {
                    self.merges.push(MergeAttempt {
                        t: self.t,
                        switch: switch.to_string(),
                        attempt: k,
                        freq_diff,
                        phase_diff,
                        accepted: false,
                    });
                    self.t += policy.alignment_delay_s;
                }
                Err(_) => return false,
            }
        }
    }

    /// Closes the run: adds the S5' event when the grid grew beyond the
    /// isolated microgrids.
    pub fn finish(mut self) -> RestorationTimeline {
        if self.expanded {
            self.t += self.sc.timing.switching_s;
            self.record(Stage::S5p, "maximum extent reached".into());
        }
        RestorationTimeline {
            microgrids: self.grids.into_iter().flatten().collect(),
            events: self.events,
            merges: self.merges,
            total_load: self.sc.total_load(),
            total_critical: self.sc.total_critical(),
            total_generation: self.sc.ders.iter().map(|d| d.capacity_mw).sum(),
            rounds: self.rounds,
        }
    }
}

/// Full staged restoration from blackout to the agent fixpoint.
pub fn run_restoration(scenario: &RestorationScenario, seed: u64) -> Result<RestorationTimeline> {
    scenario.validate()?;
    Ok(run_indexed(scenario, seed, 0))
}

/// Restoration for Monte Carlo run `run`; the merge draws depend on both
/// the seed and the run index.
pub(crate) fn run_indexed(scenario: &RestorationScenario, seed: u64, run: u64) -> RestorationTimeline {
    let mut r = Restoration::new(scenario, seed, run);
    r.form();
    if r.grids.is_empty() {
        return r.finish();
    }
    r.start_followers();
    while r.agent_round() {}
    r.finish()
}
