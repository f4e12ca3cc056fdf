//! Double-row PUP instances and their mutation streams.
//!
//! Layout: two rows of `n` rooms. Room `(r, c)` is zone `z<(r-1)*n + c>`.
//! Every pair of adjacent rooms shares a door sensor, giving `n` doors
//! between the rows and `n - 1` along each row, `3n - 2` in total.
//! The entrance variant adds an entrance zone and door at the first room
//! of the top row and at the last room of the bottom row.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::zipf::ZipfSampler;
use super::{Mutation, Schema};
use crate::encode::pup::{sensor_off, zone_off, PupInstance};
use crate::stream::Delta;

fn room(n: usize, r: usize, c: usize) -> String {
    format!("z{}", (r - 1) * n + c)
}

fn grid(n: usize) -> (Vec<String>, Vec<String>, Vec<(String, String)>) {
    assert!(n >= 1, "row length must be positive");
    let zones: Vec<String> = (1..=2).flat_map(|r| (1..=n).map(move |c| room(n, r, c))).collect();
    let mut sensors = Vec::new();
    let mut edges = Vec::new();
    let mut door = |a: String, b: String| {
        let s = format!("s{}", sensors.len() + 1);
        edges.push((a, s.clone()));
        edges.push((b, s.clone()));
        sensors.push(s);
    };
    for c in 1..=n {
        door(room(n, 1, c), room(n, 2, c));
        if c < n {
            door(room(n, 1, c), room(n, 1, c + 1));
            door(room(n, 2, c), room(n, 2, c + 1));
        }
    }
    (zones, sensors, edges)
}

fn finish(zones: Vec<String>, sensors: Vec<String>, edges: Vec<(String, String)>) -> PupInstance {
    let ucap = 2;
    PupInstance {
        units: PupInstance::default_units(zones.len(), sensors.len(), ucap),
        zones,
        sensors,
        edges,
        ucap,
        iucap: 2,
        disabled_zones: BTreeSet::new(),
        disabled_sensors: BTreeSet::new(),
    }
}

/// `2n` zones and `3n - 2` sensors with `ucap = iucap = 2`.
pub fn gen_double_pup(row_length: usize) -> PupInstance {
    let (zones, sensors, edges) = grid(row_length);
    finish(zones, sensors, edges)
}

/// `2n + 2` zones and `3n` sensors; for `n = 2` this is the four-room,
/// two-entrance building of the running example.
pub fn gen_double_pup_with_entrances(row_length: usize) -> PupInstance {
    let n = row_length;
    let (mut zones, mut sensors, mut edges) = grid(n);
    for (zone, sensor, target) in [("z_in", "s_in", room(n, 1, 1)), ("z_out", "s_out", room(n, 2, n))] {
        zones.push(zone.into());
        sensors.push(sensor.into());
        edges.push((zone.into(), sensor.into()));
        edges.push((target, sensor.into()));
    }
    finish(zones, sensors, edges)
}

/// Mutation stream over a PUP instance.
#[derive(Debug, Clone)]
pub struct PupStream {
    instance: PupInstance,
    schema: Schema,
    p_restore: f64,
    rng: ChaCha8Rng,
    zones: ZipfSampler,
    sensors: ZipfSampler,
    disabled_zones: BTreeSet<String>,
    disabled_sensors: BTreeSet<String>,
    step: u64,
}

impl PupStream {
    pub fn new(instance: PupInstance, alpha: f64, p_restore: f64, schema: Schema, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zones = ZipfSampler::new(instance.zones.len().max(1), alpha, &mut rng);
        let sensors = ZipfSampler::new(instance.sensors.len().max(1), alpha, &mut rng);
        PupStream {
            instance,
            schema,
            p_restore,
            rng,
            zones,
            sensors,
            disabled_zones: BTreeSet::new(),
            disabled_sensors: BTreeSet::new(),
            step: 0,
        }
    }

    pub fn instance(&self) -> &PupInstance {
        &self.instance
    }

    pub fn disabled_zones(&self) -> &BTreeSet<String> {
        &self.disabled_zones
    }

    pub fn disabled_sensors(&self) -> &BTreeSet<String> {
        &self.disabled_sensors
    }

    /// Components currently disabled.
    pub fn modifications(&self) -> usize {
        self.disabled_zones.len() + self.disabled_sensors.len()
    }

    /// Advances the schema by one step. Ticks are numbered from 1.
    pub fn next_delta(&mut self) -> Delta {
        let mutation = self.schema.at(self.step);
        self.step += 1;
        let tick = self.step;
        match mutation {
            Mutation::M1 => {
                let names = &self.instance.zones;
                match pick(&self.zones, names, &self.disabled_zones, &mut self.rng) {
                    Some(z) => {
                        self.disabled_zones.insert(z.clone());
                        Delta { tick, add: vec![zone_off(&z)], remove: vec![] }
                    }
                    None => Delta::empty(tick),
                }
            }
            Mutation::M2 => {
                let names = &self.instance.sensors;
                match pick(&self.sensors, names, &self.disabled_sensors, &mut self.rng) {
                    Some(s) => {
                        self.disabled_sensors.insert(s.clone());
                        Delta { tick, add: vec![sensor_off(&s)], remove: vec![] }
                    }
                    None => Delta::empty(tick),
                }
            }
            Mutation::M3 => {
                if !self.rng.gen_bool(self.p_restore) {
                    return Delta::empty(tick);
                }
                let remove = std::mem::take(&mut self.disabled_zones)
                    .iter()
                    .map(|z| zone_off(z))
                    .chain(std::mem::take(&mut self.disabled_sensors).iter().map(|s| sensor_off(s)))
                    .collect();
                Delta { tick, add: vec![], remove }
            }
        }
    }
}

/// Draws an enabled component, retrying up to `|components|` times.
fn pick(
    sampler: &ZipfSampler,
    names: &[String],
    disabled: &BTreeSet<String>,
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    if names.is_empty() {
        return None;
    }
    for _ in 0..names.len() {
        let name = &names[sampler.sample(rng)];
        if !disabled.contains(name) {
            return Some(name.clone());
        }
    }
    None
}
