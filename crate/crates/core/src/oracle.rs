//! Brute-force reference solvers working on the problem domains directly,
//! without the propositional encodings. Suitable for small instances only.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::encode::pup::{PupEdge, PupInstance, PupSolution};
use crate::encode::qc::{attacks, Square};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Comp {
    Zone(usize),
    Sensor(usize),
}

struct PupSearch<'a> {
    inst: &'a PupInstance,
    order: Vec<Comp>,
    neighbours: HashMap<Comp, Vec<Comp>>,
    unit_of: HashMap<Comp, usize>,
    zone_load: Vec<usize>,
    sensor_load: Vec<usize>,
    pairs: BTreeMap<(usize, usize), usize>,
    degree: Vec<usize>,
}

impl PupSearch<'_> {
    fn search(&mut self, i: usize, used: usize) -> bool {
        if i == self.order.len() {
            return true;
        }
        let comp = self.order[i];
        // units are interchangeable: a fresh unit is only ever the next one
        let limit = (used + 1).min(self.inst.units);
        for u in 0..limit {
            let load = match comp {
                Comp::Zone(_) => &mut self.zone_load[u],
                Comp::Sensor(_) => &mut self.sensor_load[u],
            };
            if *load >= self.inst.ucap {
                continue;
            }
            *load += 1;
            let mut added = Vec::new();
            let mut ok = true;
            for y in &self.neighbours[&comp] {
                let Some(&v) = self.unit_of.get(y) else { continue };
                if v == u {
                    continue;
                }
                let key = (u.min(v), u.max(v));
                let count = self.pairs.entry(key).or_insert(0);
                *count += 1;
                if *count == 1 {
                    self.degree[u] += 1;
                    self.degree[v] += 1;
                    if self.degree[u] > self.inst.iucap || self.degree[v] > self.inst.iucap {
                        ok = false;
                    }
                }
                added.push(key);
                if !ok {
                    break;
                }
            }
            if ok {
                self.unit_of.insert(comp, u);
                if self.search(i + 1, used.max(u + 1)) {
                    return true;
                }
                self.unit_of.remove(&comp);
            }
            for key in added {
                let count = self.pairs.get_mut(&key).unwrap();
                *count -= 1;
                if *count == 0 {
                    self.pairs.remove(&key);
                    self.degree[key.0] -= 1;
                    self.degree[key.1] -= 1;
                }
            }
            match comp {
                Comp::Zone(_) => self.zone_load[u] -= 1,
                Comp::Sensor(_) => self.sensor_load[u] -= 1,
            }
        }
        false
    }
}

/// Finds a solution for the enabled part of `inst` (its own disabled sets
/// are overridden by the arguments), or `None` if there is none.
pub fn solve_pup(
    inst: &PupInstance,
    disabled_zones: &BTreeSet<String>,
    disabled_sensors: &BTreeSet<String>,
) -> Option<PupSolution> {
    let zone_idx: HashMap<&str, usize> =
        inst.zones.iter().enumerate().map(|(i, z)| (z.as_str(), i)).collect();
    let sensor_idx: HashMap<&str, usize> =
        inst.sensors.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let enabled = |c: Comp| match c {
        Comp::Zone(i) => !disabled_zones.contains(&inst.zones[i]),
        Comp::Sensor(i) => !disabled_sensors.contains(&inst.sensors[i]),
    };
    let all: Vec<Comp> = (0..inst.zones.len())
        .map(Comp::Zone)
        .chain((0..inst.sensors.len()).map(Comp::Sensor))
        .filter(|&c| enabled(c))
        .collect();
    let mut neighbours: HashMap<Comp, Vec<Comp>> = all.iter().map(|&c| (c, Vec::new())).collect();
    for (z, s) in &inst.edges {
        let (z, s) = (Comp::Zone(zone_idx[z.as_str()]), Comp::Sensor(sensor_idx[s.as_str()]));
        if enabled(z) && enabled(s) {
            neighbours.get_mut(&z).unwrap().push(s);
            neighbours.get_mut(&s).unwrap().push(z);
        }
    }
    // breadth-first order so that related components are assigned close together
    let mut order = Vec::new();
    let mut seen: BTreeSet<Comp> = BTreeSet::new();
    for &start in &all {
        if !seen.insert(start) {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            order.push(c);
            for &y in &neighbours[&c] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
    }
    let mut search = PupSearch {
        inst,
        order,
        neighbours,
        unit_of: HashMap::new(),
        zone_load: vec![0; inst.units],
        sensor_load: vec![0; inst.units],
        pairs: BTreeMap::new(),
        degree: vec![0; inst.units],
    };
    if !search.search(0, 0) {
        return None;
    }
    let mut edges = BTreeSet::new();
    for (c, u) in &search.unit_of {
        edges.insert(match *c {
            Comp::Zone(i) => PupEdge::Zone(inst.zones[i].clone(), u + 1),
            Comp::Sensor(i) => PupEdge::Sensor(inst.sensors[i].clone(), u + 1),
        });
    }
    for &(u, v) in search.pairs.keys() {
        edges.insert(PupEdge::Units(u + 1, v + 1));
    }
    Some(PupSolution { edges })
}

/// Completes `placed` to a full placement on an `n x n` board, if possible.
pub fn solve_qc(n: u32, placed: &BTreeSet<Square>) -> Option<Vec<Square>> {
    let v: Vec<Square> = placed.iter().copied().collect();
    for (i, a) in v.iter().enumerate() {
        if v[i + 1..].iter().any(|&b| attacks(*a, b)) {
            return None;
        }
    }
    let fixed: HashMap<u32, u32> = placed.iter().copied().collect();
    let mut queens: Vec<Square> = Vec::with_capacity(n as usize);
    fn place(n: u32, row: u32, fixed: &HashMap<u32, u32>, queens: &mut Vec<Square>) -> bool {
        if row > n {
            return true;
        }
        let cols: Vec<u32> = match fixed.get(&row) {
            Some(&c) => vec![c],
            None => (1..=n).collect(),
        };
        for c in cols {
            if queens.iter().all(|&q| !attacks(q, (row, c))) {
                queens.push((row, c));
                if place(n, row + 1, fixed, queens) {
                    return true;
                }
                queens.pop();
            }
        }
        false
    }
    place(n, 1, &fixed, &mut queens).then_some(queens)
}
