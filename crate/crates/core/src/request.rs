//! Request sequences, their volumes, and seeded random workloads.
//!
//! Random numbers come from xoshiro256** seeded through SplitMix64
//! (`rand_xoshiro::Xoshiro256StarStar::seed_from_u64`). A uniform draw in
//! `[0, 1)` is `(x >> 11) * 2^-53` for the next 64-bit output `x`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadtree::DEFAULT_MAX_DEPTH;
use crate::shapes::{pad_square, ShapeKind};
use crate::{Dyadic, ModuleId, Shape};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Request {
    Insert { id: ModuleId, shape: Shape },
    Delete { id: ModuleId },
}

impl Request {
    pub fn id(&self) -> ModuleId {
        match self {
            Request::Insert { id, .. } | Request::Delete { id } => *id,
        }
    }

    pub fn is_insert(&self) -> bool {
        matches!(self, Request::Insert { .. })
    }
}

/// Padded pixel volume `4^-i` of a shape.
pub fn padded_volume(shape: &Shape) -> Result<Dyadic> {
    let layer = pad_square(shape.width.max(shape.height))?;
    Ok(Dyadic::pow4(-(layer as i32)))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RequestSequence {
    pub requests: Vec<Request>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    index: usize,
    op: String,
    id: u64,
    width: Option<f64>,
    height: Option<f64>,
}

impl RequestSequence {
    pub fn new(requests: Vec<Request>) -> Self {
        RequestSequence { requests }
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Checks that insert ids are fresh and every delete names a live module.
    pub fn check_well_formed(&self) -> Result<()> {
        self.signed_volumes().map(|_| ())
    }

    /// Signed padded volume of each request: positive for inserts, negative for deletes.
    pub fn signed_volumes(&self) -> Result<Vec<Dyadic>> {
        let mut seen = BTreeSet::new();
        let mut live: BTreeMap<ModuleId, Dyadic> = BTreeMap::new();
        let mut out = Vec::with_capacity(self.requests.len());
        for (index, r) in self.requests.iter().enumerate() {
            let malformed = |reason: String| Error::MalformedSequence { index, reason };
            match r {
                Request::Insert { id, shape } => {
                    if !seen.insert(*id) {
                        return Err(malformed(format!("module {id} inserted twice")));
                    }
                    let v = padded_volume(shape).map_err(|e| malformed(e.to_string()))?;
                    live.insert(*id, v);
                    out.push(v);
                }
                Request::Delete { id } => {
                    let v = live.remove(id).ok_or_else(|| {
                        malformed(format!("delete of module {id}, which is not live"))
                    })?;
                    out.push(-v);
                }
            }
        }
        Ok(out)
    }

    /// Index of the first request whose prefix volume exceeds 1.
    pub fn first_invalid_prefix(&self) -> Result<Option<usize>> {
        let mut sum = Dyadic::ZERO;
        for (i, v) in self.signed_volumes()?.into_iter().enumerate() {
            sum += v;
            if sum > Dyadic::from_int(1) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Every prefix volume is at most 1.
    pub fn is_valid(&self) -> Result<bool> {
        Ok(self.first_invalid_prefix()?.is_none())
    }

    /// Every request concerns an aligned square.
    pub fn is_aligned(&self) -> Result<bool> {
        self.check_well_formed()?;
        Ok(self.requests.iter().all(|r| match r {
            Request::Insert { shape, .. } => shape.kind() == ShapeKind::AlignedSquare,
            Request::Delete { .. } => true,
        }))
    }

    /// Writes `index,op,id,width,height`; deletes leave the sides blank.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (index, r) in self.requests.iter().enumerate() {
            let row = match r {
                Request::Insert { id, shape } => CsvRow {
                    index,
                    op: "insert".into(),
                    id: id.0,
                    width: Some(shape.width),
                    height: Some(shape.height),
                },
                Request::Delete { id } => CsvRow {
                    index,
                    op: "delete".into(),
                    id: id.0,
                    width: None,
                    height: None,
                },
            };
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(reader: R) -> Result<Self> {
        let mut requests = Vec::new();
        for (index, row) in csv::Reader::from_reader(reader)
            .deserialize::<CsvRow>()
            .enumerate()
        {
            let row = row?;
            let malformed = |reason: String| Error::MalformedSequence { index, reason };
            if row.index != index {
                return Err(malformed(format!("row index {} out of order", row.index)));
            }
            let id = ModuleId(row.id);
            let r = match (row.op.as_str(), row.width, row.height) {
                ("insert", Some(w), Some(h)) => Request::Insert {
                    id,
                    shape: Shape::new(w, h).map_err(|e| malformed(e.to_string()))?,
                },
                ("delete", None, None) => Request::Delete { id },
                (op, _, _) => return Err(malformed(format!("bad row for op {op:?}"))),
            };
            requests.push(r);
        }
        let seq = RequestSequence { requests };
        seq.check_well_formed()?;
        Ok(seq)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(io::BufReader::new(file))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    FirstFit,
    DefragInsert,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::FirstFit => "first-fit",
            Strategy::DefragInsert => "defrag-insert",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "first-fit" => Ok(Strategy::FirstFit),
            "defrag-insert" => Ok(Strategy::DefragInsert),
            other => Err(Error::Parse(format!(
                "unknown strategy {other:?} (expected first-fit or defrag-insert)"
            ))),
        }
    }
}

/// Parameters of a random simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_requests: usize,
    /// Probability that a request is an insertion, in `(0, 1]`.
    pub p_insert: f64,
    /// Upper bound `b` on side lengths, in `(0, 1]`.
    pub bound: f64,
    /// Aspect ratio bound `k >= 1`.
    pub aspect: f64,
    pub strategy: Strategy,
    /// Verify invariants after every request. `None` means on for at most 1000 requests.
    pub checked: Option<bool>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            n_requests: 1000,
            p_insert: 0.7,
            bound: 1.0,
            aspect: 1.0,
            strategy: Strategy::FirstFit,
            checked: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Parse(what));
        if !(self.p_insert > 0.0 && self.p_insert <= 1.0) {
            return bad(format!("p_insert {} outside (0, 1]", self.p_insert));
        }
        if !(self.bound > 0.0 && self.bound <= 1.0) {
            return bad(format!("bound {} outside (0, 1]", self.bound));
        }
        if !(self.aspect >= 1.0 && self.aspect.is_finite()) {
            return bad(format!(
                "aspect {} must be a finite value >= 1",
                self.aspect
            ));
        }
        Ok(())
    }

    pub fn is_checked(&self) -> bool {
        self.checked.unwrap_or(self.n_requests <= 1000)
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ScenarioConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            let value = value.trim();
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {v:?}", n + 1)))
            };
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad integer {v:?}", n + 1)))
            };
            match key.trim() {
                "seed" => c.seed = int(value)?,
                "n_requests" => c.n_requests = int(value)? as usize,
                "p_insert" => c.p_insert = num(value)?,
                "bound" => c.bound = num(value)?,
                "aspect" => c.aspect = num(value)?,
                "strategy" => c.strategy = value.parse()?,
                "checked" => {
                    c.checked = Some(value.parse::<bool>().map_err(|_| {
                        Error::Parse(format!("line {}: bad boolean {value:?}", n + 1))
                    })?)
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "seed = {}\nn_requests = {}\np_insert = {}\nbound = {}\naspect = {}\nstrategy = {}\n",
            self.seed, self.n_requests, self.p_insert, self.bound, self.aspect, self.strategy
        );
        if let Some(c) = self.checked {
            s.push_str(&format!("checked = {c}\n"));
        }
        s
    }
}

/// Uniform draws in `[0, 1)` from a seeded xoshiro256** generator.
pub struct UnitRng(Xoshiro256StarStar);

impl UnitRng {
    pub fn new(seed: u64) -> Self {
        UnitRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Random request sequence for a scenario.
///
/// Each request is an insertion with probability `p_insert`, and otherwise
/// deletes a module chosen uniformly from the live ones (an insertion when
/// none is live). An inserted shape has width `b * (1 - u)`, height
/// `width * r` with `r` uniform in `[1, k]` capped at `b`, and is rotated by
/// a fair coin. Ids count up from zero.
pub fn generate(scenario: &ScenarioConfig) -> Result<RequestSequence> {
    scenario.validate()?;
    let mut rng = UnitRng::new(scenario.seed);
    let mut live: Vec<ModuleId> = Vec::new();
    let mut requests = Vec::with_capacity(scenario.n_requests);
    let mut next_id = 0u64;
    while requests.len() < scenario.n_requests {
        let insert = rng.next_unit() < scenario.p_insert || live.is_empty();
        if insert {
            let shape = random_shape(&mut rng, scenario.bound, scenario.aspect);
            let id = ModuleId(next_id);
            next_id += 1;
            live.push(id);
            requests.push(Request::Insert { id, shape });
        } else {
            let k = (rng.next_unit() * live.len() as f64) as usize;
            let id = live.remove(k.min(live.len() - 1));
            requests.push(Request::Delete { id });
        }
    }
    Ok(RequestSequence { requests })
}

fn random_shape(rng: &mut UnitRng, bound: f64, aspect: f64) -> Shape {
    loop {
        let w = bound * (1.0 - rng.next_unit());
        let r = 1.0 + (aspect - 1.0) * rng.next_unit();
        let h = (w * r).min(bound);
        let (w, h) = if rng.next_unit() < 0.5 {
            (h, w)
        } else {
            (w, h)
        };
        let Ok(shape) = Shape::new(w, h) else {
            continue;
        };
        // Redraw the rare shapes too small to address or skewed past k by rounding.
        match shape.padded_layer(aspect) {
            Ok(layer) if layer <= DEFAULT_MAX_DEPTH => return shape,
            _ => continue,
        }
    }
}
