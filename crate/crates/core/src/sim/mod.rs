//! Simulation of random or replayed request sequences.
//!
//! Each row records the state after one request. The underallocation factor
//! `u` is the allocated pixel volume divided by the true area of the live
//! modules (1 while nothing is live).

mod output;
mod plot;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::first_fit::{ff_delete, ff_insert, invariant_check};
use crate::realloc::insert_with_defrag;
use crate::request::{generate, Request, RequestSequence, ScenarioConfig, Strategy};
use crate::shapes::underallocation;
use crate::{Configuration, CostLedger, Dyadic, Layer, ModuleId, Shape};

pub use output::{write_outputs, write_series_csv, SERIES_HEADER};
pub use plot::render_svg;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Placed,
    Collision,
    Deleted,
    /// Deletion of a module that was never placed because its insertion collided.
    Skipped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Placed => "placed",
            Outcome::Collision => "collision",
            Outcome::Deleted => "deleted",
            Outcome::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub index: usize,
    pub insert: bool,
    pub id: ModuleId,
    pub outcome: Outcome,
    /// Padded layer of the module the request concerns.
    pub layer: Layer,
    pub live_modules: usize,
    pub live_area: f64,
    pub pixel_volume: f64,
    pub u: f64,
    pub mean_u: f64,
    pub moves: u64,
    pub total_volume: Dyadic,
    pub rel_volume: Dyadic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub requests: usize,
    pub collisions: usize,
    pub final_u: f64,
    pub mean_u: f64,
    pub max_u: f64,
    pub max_moves: u64,
    pub max_total_volume: Dyadic,
    pub max_rel_volume: Dyadic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub strategy: Strategy,
    pub aspect: f64,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

/// Drives one strategy over a request stream.
pub struct Simulator {
    strategy: Strategy,
    aspect: f64,
    checked: bool,
    tree: Configuration,
    shapes: BTreeMap<ModuleId, Shape>,
    layers: BTreeMap<ModuleId, Layer>,
    rows: Vec<Row>,
    sum_u: f64,
}

impl Simulator {
    pub fn new(strategy: Strategy, aspect: f64, checked: bool) -> Self {
        Simulator {
            strategy,
            aspect,
            checked,
            tree: Configuration::new(),
            shapes: BTreeMap::new(),
            layers: BTreeMap::new(),
            rows: Vec::new(),
            sum_u: 0.0,
        }
    }

    pub fn configuration(&self) -> &Configuration {
        &self.tree
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn step(&mut self, request: &Request) -> Result<&Row> {
        let index = self.rows.len();
        let mut ledger;
        let outcome;
        let layer;
        match request {
            Request::Insert { id, shape } => {
                layer = shape.padded_layer(self.aspect)?;
                if self.layers.insert(*id, layer).is_some() {
                    return Err(Error::MalformedSequence {
                        index,
                        reason: format!("module {id} inserted twice"),
                    });
                }
                ledger = CostLedger::for_request(layer);
                let placed = match self.strategy {
                    Strategy::FirstFit => ff_insert(&mut self.tree, *id, layer),
                    Strategy::DefragInsert => {
                        insert_with_defrag(&mut self.tree, *id, layer, &mut ledger)
                    }
                };
                outcome = match placed {
                    Ok(_) => {
                        self.shapes.insert(*id, *shape);
                        Outcome::Placed
                    }
                    Err(Error::NoEmptyPixel(_) | Error::InsufficientCapacity(_)) => {
                        Outcome::Collision
                    }
                    Err(e) => return Err(e),
                };
            }
            Request::Delete { id } => {
                layer = self
                    .layers
                    .remove(id)
                    .ok_or_else(|| Error::MalformedSequence {
                        index,
                        reason: format!("delete of module {id}, which is not live"),
                    })?;
                ledger = CostLedger::for_request(layer);
                outcome = if self.shapes.remove(id).is_some() {
                    match self.strategy {
                        Strategy::FirstFit => ff_delete(&mut self.tree, *id, &mut ledger)?,
                        Strategy::DefragInsert => {
                            self.tree.unassign(*id)?;
                        }
                    }
                    Outcome::Deleted
                } else {
                    Outcome::Skipped
                };
            }
        }
        if self.checked {
            self.check()?;
        }
        let report = underallocation(&self.tree, &self.shapes)?;
        self.sum_u += report.factor;
        let rel_volume = ledger.relative_volume().unwrap_or(Dyadic::ZERO);
        self.rows.push(Row {
            index,
            insert: request.is_insert(),
            id: request.id(),
            outcome,
            layer,
            live_modules: self.tree.len(),
            live_area: report.module_area,
            pixel_volume: report.allocated_pixel_volume,
            u: report.factor,
            mean_u: self.sum_u / (index + 1) as f64,
            moves: ledger.moves,
            total_volume: ledger.total_volume,
            rel_volume,
        });
        Ok(self.rows.last().expect("just pushed"))
    }

    /// Verifies the invariants of the configuration and the active strategy.
    pub fn check(&self) -> Result<()> {
        self.tree.validate()?;
        self.tree.check_empty_partition()?;
        if self.strategy == Strategy::FirstFit {
            if !invariant_check(&self.tree) {
                return Err(Error::InvariantViolated(
                    "an occupied pixel follows an empty pixel of its layer".into(),
                ));
            }
            if !self.tree.is_compact() {
                return Err(Error::InvariantViolated(
                    "configuration is not compact".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn finish(self) -> SimulationResult {
        let rows = self.rows;
        let summary = Summary {
            requests: rows.len(),
            collisions: rows
                .iter()
                .filter(|r| r.outcome == Outcome::Collision)
                .count(),
            final_u: rows.last().map_or(1.0, |r| r.u),
            mean_u: rows.last().map_or(1.0, |r| r.mean_u),
            max_u: rows.iter().map(|r| r.u).fold(1.0, f64::max),
            max_moves: rows.iter().map(|r| r.moves).max().unwrap_or(0),
            max_total_volume: rows
                .iter()
                .map(|r| r.total_volume)
                .max()
                .unwrap_or(Dyadic::ZERO),
            max_rel_volume: rows
                .iter()
                .map(|r| r.rel_volume)
                .max()
                .unwrap_or(Dyadic::ZERO),
        };
        SimulationResult {
            strategy: self.strategy,
            aspect: self.aspect,
            rows,
            summary,
        }
    }
}

/// Runs a sequence from scratch.
pub fn replay(
    sequence: &RequestSequence,
    strategy: Strategy,
    aspect: f64,
    checked: bool,
) -> Result<SimulationResult> {
    let mut sim = Simulator::new(strategy, aspect, checked);
    for r in &sequence.requests {
        sim.step(r)?;
    }
    Ok(sim.finish())
}

/// Generates the scenario's sequence and runs it.
pub fn run(scenario: &ScenarioConfig) -> Result<(RequestSequence, SimulationResult)> {
    let sequence = generate(scenario)?;
    let result = replay(
        &sequence,
        scenario.strategy,
        scenario.aspect,
        scenario.is_checked(),
    )?;
    Ok((sequence, result))
}

/// Running mean of `u` recomputed from the rows, for comparison with the streamed value.
pub fn recomputed_means(rows: &[Row]) -> Vec<f64> {
    (1..=rows.len())
        .map(|n| rows[..n].iter().map(|r| r.u).sum::<f64>() / n as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_quarters_fill_without_collisions() {
        let seq = RequestSequence::new(
            (0..4)
                .map(|i| Request::Insert {
                    id: ModuleId(i),
                    shape: Shape::aligned(1),
                })
                .collect(),
        );
        for strategy in [Strategy::FirstFit, Strategy::DefragInsert] {
            let r = replay(&seq, strategy, 1.0, true).unwrap();
            assert_eq!(r.summary.collisions, 0);
            assert!(r.rows.iter().all(|row| row.u == 1.0));
            assert_eq!(r.rows[3].pixel_volume, 1.0);
        }
    }

    #[test]
    fn collision_leaves_configuration_alone() {
        let seq = RequestSequence::new(vec![
            Request::Insert {
                id: ModuleId(0),
                shape: Shape::square(0.6).unwrap(),
            },
            Request::Insert {
                id: ModuleId(1),
                shape: Shape::aligned(3),
            },
            Request::Delete { id: ModuleId(1) },
            Request::Delete { id: ModuleId(0) },
        ]);
        let r = replay(&seq, Strategy::FirstFit, 1.0, true).unwrap();
        let outcomes: Vec<_> = r.rows.iter().map(|row| row.outcome).collect();
        assert_eq!(
            outcomes,
            vec![
                Outcome::Placed,
                Outcome::Collision,
                Outcome::Skipped,
                Outcome::Deleted
            ]
        );
        assert_eq!(r.rows[1].pixel_volume, r.rows[0].pixel_volume);
        assert_eq!(r.summary.collisions, 1);
        assert_eq!(r.rows[3].u, 1.0);
    }

    #[test]
    fn streamed_mean_matches_recomputation() {
        let scenario = ScenarioConfig {
            seed: 11,
            n_requests: 300,
            bound: 0.25,
            aspect: 2.0,
            ..ScenarioConfig::default()
        };
        let (_, r) = run(&scenario).unwrap();
        for (row, m) in r.rows.iter().zip(recomputed_means(&r.rows)) {
            assert!((row.mean_u - m).abs() <= 1e-12 * m.abs());
        }
    }
}
