//! Partner unit problem: instances, encoding, decoding and checking.
//!
//! Atom naming: `on_<zone>` / `on_<sensor>` switch a component on,
//! `zu_<zone>_<u>` and `su_<sensor>_<u>` connect it to unit `u` (1-based),
//! `uu_<u>_<v>` with `u < v` makes two units partners. Stream atoms
//! `zone_off_<zone>` / `sensor_off_<sensor>` select `¬on_<x>`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{CnfBuilder, EncodedProblem, SelectorMap};
use crate::clause::Literal;
use crate::error::StreamError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PupInstance {
    pub zones: Vec<String>,
    pub sensors: Vec<String>,
    /// `(zone, sensor)` pairs.
    pub edges: Vec<(String, String)>,
    pub units: usize,
    pub ucap: usize,
    pub iucap: usize,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub disabled_zones: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub disabled_sensors: BTreeSet<String>,
}

impl PupInstance {
    pub fn validate(&self) -> Result<(), StreamError> {
        let bad = |m: String| Err(StreamError::InvalidInstance(m));
        if self.units == 0 {
            return bad("at least one unit is required".into());
        }
        if self.ucap == 0 || self.iucap == 0 {
            return bad("capacities must be positive".into());
        }
        let zones: BTreeSet<&str> = self.zones.iter().map(String::as_str).collect();
        let sensors: BTreeSet<&str> = self.sensors.iter().map(String::as_str).collect();
        if zones.len() != self.zones.len() || sensors.len() != self.sensors.len() {
            return bad("duplicate component name".into());
        }
        for (z, s) in &self.edges {
            if !zones.contains(z.as_str()) || !sensors.contains(s.as_str()) {
                return bad(format!("edge ({z}, {s}) references an unknown component"));
            }
        }
        for z in &self.disabled_zones {
            if !zones.contains(z.as_str()) {
                return bad(format!("unknown disabled zone {z}"));
            }
        }
        for s in &self.disabled_sensors {
            if !sensors.contains(s.as_str()) {
                return bad(format!("unknown disabled sensor {s}"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, StreamError> {
        let inst: PupInstance = serde_json::from_str(text)
            .map_err(|e| StreamError::InvalidInstance(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Default unit count for generated instances: `ceil((|Z|+|S|)/ucap) + 1`.
    pub fn default_units(zones: usize, sensors: usize, ucap: usize) -> usize {
        (zones + sensors).div_ceil(ucap) + 1
    }
}

pub fn zone_off(zone: &str) -> String {
    format!("zone_off_{zone}")
}

pub fn sensor_off(sensor: &str) -> String {
    format!("sensor_off_{sensor}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PupOptions {
    /// Component `i` (zones first, then sensors) may only use units `1..=i+1`.
    pub symmetry_breaking: bool,
}

pub fn encode_pup(instance: &PupInstance) -> EncodedProblem {
    encode_pup_with(instance, PupOptions::default())
}

pub fn encode_pup_with(instance: &PupInstance, options: PupOptions) -> EncodedProblem {
    let units = instance.units;
    let mut b = CnfBuilder::new();
    let mut selectors = SelectorMap::new();
    let mut initial = BTreeMap::new();

    let mut zu: HashMap<&str, Vec<Literal>> = HashMap::new();
    let mut su: HashMap<&str, Vec<Literal>> = HashMap::new();
    for z in &instance.zones {
        let on = Literal::pos(b.atom(format!("on_{z}")));
        let xs: Vec<Literal> = (1..=units)
            .map(|u| Literal::pos(b.atom(format!("zu_{z}_{u}"))))
            .collect();
        let name = zone_off(z);
        selectors.insert(name.clone(), !on);
        initial.insert(name, instance.disabled_zones.contains(z));
        exactly_one_when_on(&mut b, on, &xs);
        zu.insert(z, xs);
    }
    for s in &instance.sensors {
        let on = Literal::pos(b.atom(format!("on_{s}")));
        let xs: Vec<Literal> = (1..=units)
            .map(|u| Literal::pos(b.atom(format!("su_{s}_{u}"))))
            .collect();
        let name = sensor_off(s);
        selectors.insert(name.clone(), !on);
        initial.insert(name, instance.disabled_sensors.contains(s));
        exactly_one_when_on(&mut b, on, &xs);
        su.insert(s, xs);
    }
    let mut uu = vec![vec![None; units]; units];
    for u in 0..units {
        for v in u + 1..units {
            let x = Literal::pos(b.atom(format!("uu_{}_{}", u + 1, v + 1)));
            uu[u][v] = Some(x);
            uu[v][u] = Some(x);
        }
    }

    if options.symmetry_breaking {
        let comps = instance
            .zones
            .iter()
            .map(|z| &zu[z.as_str()])
            .chain(instance.sensors.iter().map(|s| &su[s.as_str()]));
        for (i, xs) in comps.enumerate() {
            for x in xs.iter().skip(i + 1) {
                b.clause([!*x]);
            }
        }
    }

    for u in 0..units {
        let zones: Vec<Literal> = instance.zones.iter().map(|z| zu[z.as_str()][u]).collect();
        b.at_most_k(&zones, instance.ucap);
        let sensors: Vec<Literal> = instance.sensors.iter().map(|s| su[s.as_str()][u]).collect();
        b.at_most_k(&sensors, instance.ucap);
        let partners: Vec<Literal> = (0..units).filter(|&v| v != u).map(|v| uu[u][v].unwrap()).collect();
        b.at_most_k(&partners, instance.iucap);
    }

    for (z, s) in &instance.edges {
        let (zx, sx) = (&zu[z.as_str()], &su[s.as_str()]);
        for u in 0..units {
            for v in 0..units {
                if u != v {
                    b.clause([!zx[u], !sx[v], uu[u][v].unwrap()]);
                }
            }
        }
    }

    EncodedProblem::from_builder(b, selectors, initial)
}

fn exactly_one_when_on(b: &mut CnfBuilder, on: Literal, xs: &[Literal]) {
    b.clause(std::iter::once(!on).chain(xs.iter().copied()));
    b.at_most_one_pairwise(xs);
    for &x in xs {
        b.clause([on, !x]);
    }
}

/// An edge of a solution graph. Units are 1-based; partner pairs are
/// stored with the smaller unit first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PupEdge {
    Zone(String, usize),
    Sensor(String, usize),
    Units(usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PupSolution {
    pub edges: BTreeSet<PupEdge>,
}

impl PupSolution {
    pub fn partner(u: usize, v: usize) -> PupEdge {
        PupEdge::Units(u.min(v), u.max(v))
    }
}

/// The solution edge an atom name stands for, if any.
pub fn edge_of(name: &str) -> Option<PupEdge> {
    let parts: Vec<&str> = name.split('_').collect();
    match parts.as_slice() {
        ["zu", comp @ .., u] if !comp.is_empty() => Some(PupEdge::Zone(comp.join("_"), u.parse().ok()?)),
        ["su", comp @ .., u] if !comp.is_empty() => Some(PupEdge::Sensor(comp.join("_"), u.parse().ok()?)),
        ["uu", u, v] => Some(PupEdge::Units(u.parse().ok()?, v.parse().ok()?)),
        _ => None,
    }
}

/// Reads the solution graph off a model of [`encode_pup`].
pub fn decode_pup(model: &[bool], problem: &EncodedProblem) -> PupSolution {
    let edges = problem
        .symbols
        .iter()
        .zip(model)
        .filter(|(_, &v)| v)
        .filter_map(|(name, _)| edge_of(name))
        .collect();
    PupSolution { edges }
}

/// Checks a solution graph directly against the problem definition,
/// honouring disabled components (`disabled` overrides the instance's own
/// sets when given).
pub fn check_pup(instance: &PupInstance, solution: &PupSolution) -> bool {
    check_pup_with(
        instance,
        &instance.disabled_zones,
        &instance.disabled_sensors,
        solution,
    )
}

pub fn check_pup_with(
    instance: &PupInstance,
    disabled_zones: &BTreeSet<String>,
    disabled_sensors: &BTreeSet<String>,
    solution: &PupSolution,
) -> bool {
    let mut zone_units: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut sensor_units: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut partners: BTreeSet<(usize, usize)> = BTreeSet::new();
    let valid_unit = |u: usize| u >= 1 && u <= instance.units;
    for e in &solution.edges {
        match e {
            PupEdge::Zone(z, u) => {
                if !valid_unit(*u) || !instance.zones.contains(z) {
                    return false;
                }
                zone_units.entry(z).or_default().push(*u);
            }
            PupEdge::Sensor(s, u) => {
                if !valid_unit(*u) || !instance.sensors.contains(s) {
                    return false;
                }
                sensor_units.entry(s).or_default().push(*u);
            }
            PupEdge::Units(u, v) => {
                if !valid_unit(*u) || !valid_unit(*v) || u == v {
                    return false;
                }
                partners.insert((*u.min(v), *u.max(v)));
            }
        }
    }

    // every enabled component on exactly one unit, disabled ones on none
    let mut unit_of_zone: HashMap<&str, usize> = HashMap::new();
    for z in &instance.zones {
        let us = zone_units.get(z.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if disabled_zones.contains(z) {
            if !us.is_empty() {
                return false;
            }
        } else if us.len() != 1 {
            return false;
        } else {
            unit_of_zone.insert(z, us[0]);
        }
    }
    let mut unit_of_sensor: HashMap<&str, usize> = HashMap::new();
    for s in &instance.sensors {
        let us = sensor_units.get(s.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if disabled_sensors.contains(s) {
            if !us.is_empty() {
                return false;
            }
        } else if us.len() != 1 {
            return false;
        } else {
            unit_of_sensor.insert(s, us[0]);
        }
    }

    // port capacities
    let mut zone_load = vec![0usize; instance.units + 1];
    let mut sensor_load = vec![0usize; instance.units + 1];
    let mut partner_load = vec![0usize; instance.units + 1];
    for &u in unit_of_zone.values() {
        zone_load[u] += 1;
    }
    for &u in unit_of_sensor.values() {
        sensor_load[u] += 1;
    }
    for &(u, v) in &partners {
        partner_load[u] += 1;
        partner_load[v] += 1;
    }
    if (1..=instance.units).any(|u| {
        zone_load[u] > instance.ucap
            || sensor_load[u] > instance.ucap
            || partner_load[u] > instance.iucap
    }) {
        return false;
    }

    // related components sit on the same or partnered units
    instance.edges.iter().all(|(z, s)| {
        match (unit_of_zone.get(z.as_str()), unit_of_sensor.get(s.as_str())) {
            (Some(&u), Some(&v)) => u == v || partners.contains(&(u.min(v), u.max(v))),
            _ => true,
        }
    })
}

/// Assumption literals describing one configuration of the instance.
pub fn assumptions_for(
    problem: &EncodedProblem,
    disabled_zones: &BTreeSet<String>,
    disabled_sensors: &BTreeSet<String>,
) -> Vec<Literal> {
    problem
        .selectors
        .iter()
        .map(|(name, lit)| {
            let off = match name.strip_prefix("zone_off_") {
                Some(z) => disabled_zones.contains(z),
                None => disabled_sensors.contains(name.strip_prefix("sensor_off_").unwrap_or(name)),
            };
            if off {
                lit
            } else {
                !lit
            }
        })
        .collect()
}

/// A small reference instance: four rooms, two
/// entrances, six zones and six door sensors.
pub fn example_instance() -> PupInstance {
    let zones = ["z1", "z123", "z24", "z35", "z456", "z6"];
    let sensors = ["s1", "s2", "s3", "s4", "s5", "s6"];
    let edges = [
        ("z1", "s1"),
        ("z123", "s1"),
        ("z123", "s2"),
        ("z123", "s3"),
        ("z24", "s2"),
        ("z24", "s4"),
        ("z35", "s3"),
        ("z35", "s5"),
        ("z456", "s4"),
        ("z456", "s5"),
        ("z456", "s6"),
        ("z6", "s6"),
    ];
    PupInstance {
        zones: zones.iter().map(|s| s.to_string()).collect(),
        sensors: sensors.iter().map(|s| s.to_string()).collect(),
        edges: edges.iter().map(|(z, s)| (z.to_string(), s.to_string())).collect(),
        units: 3,
        ucap: 2,
        iucap: 2,
        disabled_zones: BTreeSet::new(),
        disabled_sensors: BTreeSet::new(),
    }
}

/// The three-unit solution drawn for [`example_instance`].
pub fn example_solution() -> PupSolution {
    let mut edges = BTreeSet::new();
    for (z, u) in [("z1", 1), ("z123", 1), ("z24", 2), ("z35", 2), ("z6", 3), ("z456", 3)] {
        edges.insert(PupEdge::Zone(z.into(), u));
    }
    for (s, u) in [("s1", 1), ("s2", 1), ("s3", 2), ("s4", 2), ("s5", 3), ("s6", 3)] {
        edges.insert(PupEdge::Sensor(s.into(), u));
    }
    edges.insert(PupEdge::Units(1, 2));
    edges.insert(PupEdge::Units(2, 3));
    PupSolution { edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, EngineConfig};
    use std::collections::HashSet;

    /// Builds the full assignment that a solution graph induces on the
    /// encoding, extending auxiliary counter atoms by unit propagation.
    fn solve_under_solution(problem: &EncodedProblem, sol: &PupSolution, off: &BTreeSet<String>) -> bool {
        let mut assumptions = Vec::new();
        for (i, name) in problem.symbols.iter().enumerate() {
            let atom = i as u32 + 1;
            let value = if let Some(c) = name.strip_prefix("on_") {
                Some(!off.contains(c))
            } else {
                edge_of(name).map(|e| sol.edges.contains(&e))
            };
            if let Some(v) = value {
                assumptions.push(Literal::new(atom, v));
            }
        }
        let mut engine =
            Engine::load_program(&problem.clauses, problem.atom_count, EngineConfig::default()).unwrap();
        engine
            .solve(&assumptions, &[], &HashSet::new())
            .unwrap()
            .status
            .is_model()
    }

    #[test]
    fn example_solution_satisfies_encoding() {
        let inst = example_instance();
        let problem = encode_pup(&inst);
        assert!(solve_under_solution(&problem, &example_solution(), &BTreeSet::new()));
        assert_eq!(problem.selectors.len(), 12);
    }

    #[test]
    fn example_solution_passes_checker() {
        let inst = example_instance();
        let sol = example_solution();
        assert!(check_pup(&inst, &sol));
        let unit_edges = sol.edges.iter().filter(|e| matches!(e, PupEdge::Units(..))).count();
        assert_eq!(sol.edges.len() - unit_edges, 12);
        assert_eq!(unit_edges, 2);
    }

    #[test]
    fn broken_cover_is_rejected() {
        let inst = example_instance();
        let mut sol = example_solution();
        sol.edges.remove(&PupEdge::Zone("z1".into(), 1));
        assert!(!check_pup(&inst, &sol));
    }

    #[test]
    fn missing_partner_edge_is_rejected() {
        let inst = example_instance();
        let mut sol = example_solution();
        sol.edges.remove(&PupEdge::Units(1, 2));
        // z123 on u1 is related to s3 on u2
        assert!(!check_pup(&inst, &sol));
    }

    #[test]
    fn capacity_violation_is_rejected() {
        let inst = example_instance();
        let mut sol = example_solution();
        sol.edges.remove(&PupEdge::Zone("z24".into(), 2));
        sol.edges.insert(PupEdge::Zone("z24".into(), 1));
        assert!(!check_pup(&inst, &sol));
    }

    #[test]
    fn all_disabled_is_trivially_satisfiable() {
        let mut inst = example_instance();
        inst.disabled_zones = inst.zones.iter().cloned().collect();
        inst.disabled_sensors = inst.sensors.iter().cloned().collect();
        let problem = encode_pup(&inst);
        let assumptions = assumptions_for(&problem, &inst.disabled_zones, &inst.disabled_sensors);
        let mut engine =
            Engine::load_program(&problem.clauses, problem.atom_count, EngineConfig::default()).unwrap();
        let out = engine.solve(&assumptions, &[], &HashSet::new()).unwrap();
        let model = out.status.model().unwrap();
        let sol = decode_pup(model, &problem);
        assert!(sol.edges.iter().all(|e| matches!(e, PupEdge::Units(..))));
        let empty = PupSolution::default();
        assert!(check_pup(&inst, &empty));
    }

    #[test]
    fn solver_models_decode_to_valid_solutions() {
        let inst = example_instance();
        for sym in [false, true] {
            let problem = encode_pup_with(&inst, PupOptions { symmetry_breaking: sym });
            let mut engine =
                Engine::load_program(&problem.clauses, problem.atom_count, EngineConfig::default())
                    .unwrap();
            let out = engine.solve(&assumptions_for(&problem, &BTreeSet::new(), &BTreeSet::new()), &[], &HashSet::new()).unwrap();
            let sol = decode_pup(out.status.model().unwrap(), &problem);
            assert!(check_pup(&inst, &sol));
        }
    }

    #[test]
    fn two_units_are_not_enough_for_the_example() {
        // 6 zones need at least 3 units at ucap 2
        let mut inst = example_instance();
        inst.units = 2;
        let problem = encode_pup(&inst);
        let mut engine =
            Engine::load_program(&problem.clauses, problem.atom_count, EngineConfig::default()).unwrap();
        let out = engine.solve(&assumptions_for(&problem, &BTreeSet::new(), &BTreeSet::new()), &[], &HashSet::new()).unwrap();
        assert!(!out.status.is_model());
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = example_instance();
        let back = PupInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        let mut broken = inst.clone();
        broken.edges.push(("z9".into(), "s1".into()));
        assert!(PupInstance::from_json(&broken.to_json()).is_err());
    }
}
