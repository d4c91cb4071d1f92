//! Problem data model: points, paths, the point/path incidence matrix, and instance documents.

use std::fmt;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::rational::{is_nonnegative, parse_rational, to_decimal, Rational};
use num_traits::Zero;

/// 1-based point index. Point 1 is the depot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub usize);

/// 1-based path (unordered point pair) index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathId(pub usize);

pub const DEPOT: PointId = PointId(1);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Number of unordered pairs among `points` points.
pub fn path_count(points: usize) -> Result<usize> {
    if points < 2 {
        return Err(Error::InvalidInstance(format!(
            "need at least 2 points, got {points}"
        )));
    }
    Ok(points * (points - 1) / 2)
}

/// Bijection between path ids `1..=I` and unordered pairs of distinct points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathIndexMap {
    points: usize,
    /// `pairs[id - 1] = (a, b)` with `a < b`.
    pairs: Vec<(PointId, PointId)>,
    /// Dense `points × points` table of path ids, 0 on the diagonal.
    ids: Vec<usize>,
}

impl PathIndexMap {
    /// Builds a map from `pairs[id - 1]`, checking bijectivity.
    pub fn from_pairs(points: usize, pairs: Vec<(PointId, PointId)>) -> Result<Self> {
        let expected = path_count(points)?;
        if pairs.len() != expected {
            return Err(Error::schema(
                "path_map",
                format!(
                    "{} paths given, {points} points need {expected}",
                    pairs.len()
                ),
            ));
        }
        let mut ids = vec![0usize; points * points];
        let mut normalized = Vec::with_capacity(pairs.len());
        for (index, &(a, b)) in pairs.iter().enumerate() {
            let id = index + 1;
            for p in [a, b] {
                if p.0 < 1 || p.0 > points {
                    return Err(Error::schema(
                        format!("path_map[{id}]"),
                        format!("point {p} outside 1..={points}"),
                    ));
                }
            }
            if a == b {
                return Err(Error::schema(
                    format!("path_map[{id}]"),
                    format!("self-pair {{{a},{b}}}"),
                ));
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let slot = (lo.0 - 1) * points + (hi.0 - 1);
            if ids[slot] != 0 {
                return Err(Error::schema(
                    format!("path_map[{id}]"),
                    format!("duplicate pair {{{lo},{hi}}} (already path {})", ids[slot]),
                ));
            }
            ids[slot] = id;
            ids[(hi.0 - 1) * points + (lo.0 - 1)] = id;
            normalized.push((lo, hi));
        }
        Ok(PathIndexMap {
            points,
            pairs: normalized,
            ids,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Endpoints of `id`, smaller point first.
    pub fn pair(&self, id: PathId) -> (PointId, PointId) {
        self.pairs[id.0 - 1]
    }

    /// Path joining `a` and `b`, or `None` for `a == b` or out-of-range points.
    pub fn id(&self, a: PointId, b: PointId) -> Option<PathId> {
        if a.0 < 1 || b.0 < 1 || a.0 > self.points || b.0 > self.points {
            return None;
        }
        match self.ids[(a.0 - 1) * self.points + (b.0 - 1)] {
            0 => None,
            id => Some(PathId(id)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (PathId, (PointId, PointId))> + '_ {
        self.pairs
            .iter()
            .enumerate()
            .map(|(i, &pair)| (PathId(i + 1), pair))
    }
}

/// Deterministic map for arbitrary J: ids `1..=J` on the cycle edges
/// `{1,J}, {1,2}, {2,3}, …, {J−1,J}`, then the remaining pairs lexicographically.
pub fn canonical_path_map(points: usize) -> Result<PathIndexMap> {
    path_count(points)?;
    let mut pairs = Vec::new();
    let on_cycle = |a: usize, b: usize| (b == a + 1) || (a == 1 && b == points);
    if points > 2 {
        pairs.push((PointId(1), PointId(points)));
    }
    for a in 1..points {
        pairs.push((PointId(a), PointId(a + 1)));
    }
    for a in 1..=points {
        for b in a + 1..=points {
            if !on_cycle(a, b) {
                pairs.push((PointId(a), PointId(b)));
            }
        }
    }
    PathIndexMap::from_pairs(points, pairs)
}

/// Path numbering of the 11-point reference network, row `j` column `k`
/// holding the id of the path between points `j + 1` and `k + 1`.
const TABLE5: [[usize; 11]; 11] = [
    [0, 2, 12, 13, 14, 15, 16, 17, 18, 19, 1],
    [2, 0, 3, 28, 29, 31, 34, 35, 42, 49, 20],
    [12, 3, 0, 4, 30, 32, 41, 36, 50, 43, 21],
    [13, 28, 4, 0, 5, 33, 40, 46, 37, 51, 22],
    [14, 29, 30, 5, 0, 6, 39, 47, 52, 38, 23],
    [15, 31, 32, 33, 6, 0, 7, 48, 44, 53, 24],
    [16, 34, 41, 40, 39, 7, 0, 8, 54, 45, 25],
    [17, 35, 36, 46, 47, 48, 8, 0, 9, 55, 26],
    [18, 42, 50, 37, 52, 44, 54, 9, 0, 10, 27],
    [19, 49, 43, 51, 38, 53, 45, 55, 10, 0, 11],
    [1, 20, 21, 22, 23, 24, 25, 26, 27, 11, 0],
];

/// The 55-path numbering of the 11-point reference network.
pub fn table5_path_map() -> PathIndexMap {
    let mut pairs = vec![(PointId(0), PointId(0)); 55];
    for (r, row) in TABLE5.iter().enumerate() {
        for (c, &id) in row.iter().enumerate().skip(r + 1) {
            pairs[id - 1] = (PointId(r + 1), PointId(c + 1));
        }
    }
    PathIndexMap::from_pairs(11, pairs).expect("reference path table is a bijection")
}

/// Delivery demand of a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demand {
    pub mass: Rational,
    pub volume: Rational,
}

impl Demand {
    pub fn zero() -> Self {
        Demand {
            mass: Rational::zero(),
            volume: Rational::zero(),
        }
    }
}

/// A vehicle capacity limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Capacity {
    Unbounded,
    Limit(Rational),
}

impl Capacity {
    pub fn admits(&self, load: &Rational) -> bool {
        match self {
            Capacity::Unbounded => true,
            Capacity::Limit(limit) => load <= limit,
        }
    }

    pub fn limit(&self) -> Option<&Rational> {
        match self {
            Capacity::Unbounded => None,
            Capacity::Limit(limit) => Some(limit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vehicle {
    /// 1-based position in the fleet.
    pub id: usize,
    pub mass_capacity: Capacity,
    pub volume_capacity: Capacity,
    /// Cost per path, indexed by `PathId - 1`.
    pub costs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub path_map: PathIndexMap,
    /// `demands[j - 1]` is the demand of point `j`.
    pub demands: Vec<Demand>,
    pub fleet: Vec<Vehicle>,
}

impl Instance {
    /// Validates the assembled parts.
    pub fn new(path_map: PathIndexMap, demands: Vec<Demand>, fleet: Vec<Vehicle>) -> Result<Self> {
        let points = path_map.points();
        if demands.len() != points {
            return Err(Error::schema(
                "demand_mass",
                format!("{} entries for {points} points", demands.len()),
            ));
        }
        if demands[0] != Demand::zero() {
            return Err(Error::schema("demand_mass[0]", "depot demand must be zero"));
        }
        for (j, d) in demands.iter().enumerate() {
            if !is_nonnegative(&d.mass) {
                return Err(Error::schema(
                    format!("demand_mass[{j}]"),
                    "negative demand",
                ));
            }
            if !is_nonnegative(&d.volume) {
                return Err(Error::schema(
                    format!("demand_volume[{j}]"),
                    "negative demand",
                ));
            }
        }
        if fleet.is_empty() {
            return Err(Error::schema("vehicles", "fleet is empty"));
        }
        for (k, v) in fleet.iter().enumerate() {
            if v.id != k + 1 {
                return Err(Error::schema(
                    format!("vehicles[{k}].id"),
                    format!("expected id {}, got {}", k + 1, v.id),
                ));
            }
            if v.costs.len() != path_map.len() {
                return Err(Error::schema(
                    format!("vehicles[{k}].costs"),
                    format!("{} entries, path map has {}", v.costs.len(), path_map.len()),
                ));
            }
            if let Some(i) = v.costs.iter().position(|c| !is_nonnegative(c)) {
                return Err(Error::schema(
                    format!("vehicles[{k}].costs[{i}]"),
                    "negative cost",
                ));
            }
            for (field, cap) in [
                ("mass_capacity", &v.mass_capacity),
                ("volume_capacity", &v.volume_capacity),
            ] {
                if let Some(limit) = cap.limit() {
                    if !is_nonnegative(limit) {
                        return Err(Error::schema(
                            format!("vehicles[{k}].{field}"),
                            "negative capacity",
                        ));
                    }
                }
            }
        }
        Ok(Instance {
            path_map,
            demands,
            fleet,
        })
    }

    /// Point count J.
    pub fn points(&self) -> usize {
        self.path_map.points()
    }

    /// Vehicle count K.
    pub fn vehicles(&self) -> usize {
        self.fleet.len()
    }

    pub fn vehicle(&self, id: usize) -> Result<&Vehicle> {
        id.checked_sub(1)
            .and_then(|k| self.fleet.get(k))
            .ok_or_else(|| Error::InvalidQuery(format!("no vehicle {id}")))
    }

    /// Cost for vehicle `vehicle` to travel between `a` and `b`.
    pub fn pair_cost(&self, vehicle: usize, a: PointId, b: PointId) -> Result<Rational> {
        if a == b {
            return Err(Error::InvalidQuery(format!("pair cost of {a} with itself")));
        }
        let id = self
            .path_map
            .id(a, b)
            .ok_or_else(|| Error::InvalidQuery(format!("no path between {a} and {b}")))?;
        Ok(self.vehicle(vehicle)?.costs[id.0 - 1])
    }

    /// Dense symmetric `J × J` cost table for one vehicle (zero diagonal).
    pub fn cost_table(&self, vehicle: usize) -> Result<Vec<Vec<Rational>>> {
        let v = self.vehicle(vehicle)?;
        let n = self.points();
        let mut table = vec![vec![Rational::zero(); n]; n];
        for (id, (a, b)) in self.path_map.iter() {
            let c = v.costs[id.0 - 1];
            table[a.0 - 1][b.0 - 1] = c;
            table[b.0 - 1][a.0 - 1] = c;
        }
        Ok(table)
    }

    pub fn has_volume(&self) -> bool {
        self.demands.iter().any(|d| !d.volume.is_zero())
            || self
                .fleet
                .iter()
                .any(|v| v.volume_capacity != Capacity::Unbounded)
    }

    /// Parses and validates an instance document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text)
            .map_err(|e| Error::schema("<document>", format!("malformed JSON: {e}")))?;
        load_instance(&doc)
    }

    /// Serializes to an instance document with explicit costs and path map.
    pub fn to_json(&self) -> Value {
        let path_map: Vec<Value> = self
            .path_map
            .iter()
            .map(|(id, (a, b))| serde_json::json!({"id": id.0, "from": a.0, "to": b.0}))
            .collect();
        let vehicles: Vec<Value> = self
            .fleet
            .iter()
            .map(|v| {
                serde_json::json!({
                    "id": v.id,
                    "mass_capacity": capacity_value(&v.mass_capacity),
                    "volume_capacity": capacity_value(&v.volume_capacity),
                    "costs": v.costs.iter().map(rational_value).collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("points".into(), Value::from(self.points()));
        doc.insert("path_map".into(), Value::Array(path_map));
        doc.insert("vehicles".into(), Value::Array(vehicles));
        doc.insert(
            "demand_mass".into(),
            Value::Array(
                self.demands
                    .iter()
                    .map(|d| rational_value(&d.mass))
                    .collect(),
            ),
        );
        if self.has_volume() {
            doc.insert(
                "demand_volume".into(),
                Value::Array(
                    self.demands
                        .iter()
                        .map(|d| rational_value(&d.volume))
                        .collect(),
                ),
            );
        }
        Value::Object(doc)
    }
}

fn rational_value(value: &Rational) -> Value {
    if value.is_integer() {
        Value::from(value.to_integer() as i64)
    } else if to_decimal(value).starts_with('~') {
        Value::String(format!("{}/{}", value.numer(), value.denom()))
    } else {
        Value::String(to_decimal(value))
    }
}

fn capacity_value(cap: &Capacity) -> Value {
    match cap {
        Capacity::Unbounded => Value::Null,
        Capacity::Limit(limit) => rational_value(limit),
    }
}

fn number(value: &Value, field: &str) -> Result<Rational> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(Error::schema(field, "expected a number")),
    };
    parse_rational(&text)
        .ok_or_else(|| Error::schema(field, format!("not an exact number: {text}")))
}

fn capacity(value: Option<&Value>, field: &str) -> Result<Capacity> {
    match value {
        None | Some(Value::Null) => Ok(Capacity::Unbounded),
        Some(Value::String(s)) if s == "unbounded" => Ok(Capacity::Unbounded),
        Some(v) => Ok(Capacity::Limit(number(v, field)?)),
    }
}

fn index(value: &Value, field: &str) -> Result<usize> {
    value
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::schema(field, "expected a non-negative integer"))
}

fn number_array(value: &Value, field: &str) -> Result<Vec<Rational>> {
    let items = value
        .as_array()
        .ok_or_else(|| Error::schema(field, "expected an array"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| number(v, &format!("{field}[{i}]")))
        .collect()
}

enum CostSpec {
    Explicit(Vec<Rational>),
    Scale { of: usize, factor: Rational },
}

/// Builds a validated [`Instance`] from a parsed instance document.
pub fn load_instance(doc: &Value) -> Result<Instance> {
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::schema("<document>", "expected an object"))?;
    let points = index(
        obj.get("points")
            .ok_or_else(|| Error::schema("points", "missing"))?,
        "points",
    )?;
    if points < 2 {
        return Err(Error::schema(
            "points",
            format!("need at least 2, got {points}"),
        ));
    }
    let path_map = match obj.get("path_map") {
        None => return Err(Error::schema("path_map", "missing")),
        Some(Value::String(s)) if s == "canonical" => canonical_path_map(points)?,
        Some(Value::Array(entries)) => {
            let count = path_count(points)?;
            let mut pairs = vec![None; count];
            for (n, entry) in entries.iter().enumerate() {
                let field = format!("path_map[{n}]");
                let id = index(
                    entry
                        .get("id")
                        .ok_or_else(|| Error::schema(&field, "missing id"))?,
                    &format!("{field}.id"),
                )?;
                let from = index(
                    entry
                        .get("from")
                        .ok_or_else(|| Error::schema(&field, "missing from"))?,
                    &format!("{field}.from"),
                )?;
                let to = index(
                    entry
                        .get("to")
                        .ok_or_else(|| Error::schema(&field, "missing to"))?,
                    &format!("{field}.to"),
                )?;
                if id < 1 || id > count {
                    return Err(Error::schema(
                        format!("{field}.id"),
                        format!("id {id} outside 1..={count}"),
                    ));
                }
                if pairs[id - 1].is_some() {
                    return Err(Error::schema(
                        format!("{field}.id"),
                        format!("duplicate id {id}"),
                    ));
                }
                pairs[id - 1] = Some((PointId(from), PointId(to)));
            }
            if let Some(missing) = pairs.iter().position(Option::is_none) {
                return Err(Error::schema(
                    "path_map",
                    format!("no entry for id {}", missing + 1),
                ));
            }
            PathIndexMap::from_pairs(points, pairs.into_iter().flatten().collect())?
        }
        Some(_) => {
            return Err(Error::schema(
                "path_map",
                "expected \"canonical\" or an array of {id, from, to}",
            ))
        }
    };

    let masses = number_array(
        obj.get("demand_mass")
            .ok_or_else(|| Error::schema("demand_mass", "missing"))?,
        "demand_mass",
    )?;
    if masses.len() != points {
        return Err(Error::schema(
            "demand_mass",
            format!("{} entries for {points} points", masses.len()),
        ));
    }
    let volumes = match obj.get("demand_volume") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let volumes = number_array(v, "demand_volume")?;
            if volumes.len() != points {
                return Err(Error::schema(
                    "demand_volume",
                    format!("{} entries for {points} points", volumes.len()),
                ));
            }
            Some(volumes)
        }
    };

    let vehicle_docs = obj
        .get("vehicles")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::schema("vehicles", "expected an array"))?;
    let mut specs = Vec::with_capacity(vehicle_docs.len());
    let mut shells = Vec::with_capacity(vehicle_docs.len());
    for (k, v) in vehicle_docs.iter().enumerate() {
        let field = format!("vehicles[{k}]");
        let id = index(
            v.get("id")
                .ok_or_else(|| Error::schema(&field, "missing id"))?,
            &format!("{field}.id"),
        )?;
        let mass_capacity = capacity(v.get("mass_capacity"), &format!("{field}.mass_capacity"))?;
        let volume_capacity = if volumes.is_some() {
            capacity(
                v.get("volume_capacity"),
                &format!("{field}.volume_capacity"),
            )?
        } else {
            Capacity::Unbounded
        };
        let spec = match v.get("costs") {
            Some(Value::Array(_)) => {
                let costs = number_array(&v["costs"], &format!("{field}.costs"))?;
                if costs.len() != path_map.len() {
                    return Err(Error::schema(
                        format!("{field}.costs"),
                        format!("{} entries, path map has {}", costs.len(), path_map.len()),
                    ));
                }
                CostSpec::Explicit(costs)
            }
            Some(Value::Object(scale)) => {
                let of = index(
                    scale.get("scale_of").ok_or_else(|| {
                        Error::schema(format!("{field}.costs"), "missing scale_of")
                    })?,
                    &format!("{field}.costs.scale_of"),
                )?;
                let factor = number(
                    scale
                        .get("factor")
                        .ok_or_else(|| Error::schema(format!("{field}.costs"), "missing factor"))?,
                    &format!("{field}.costs.factor"),
                )?;
                if !is_nonnegative(&factor) {
                    return Err(Error::schema(
                        format!("{field}.costs.factor"),
                        "negative factor",
                    ));
                }
                CostSpec::Scale { of, factor }
            }
            _ => {
                return Err(Error::schema(
                    format!("{field}.costs"),
                    "expected an array or {scale_of, factor}",
                ))
            }
        };
        specs.push(spec);
        shells.push((id, mass_capacity, volume_capacity));
    }

    // Resolve scale shorthand; each pass resolves at least one vehicle or the chain is cyclic.
    let mut costs: Vec<Option<Vec<Rational>>> = specs
        .iter()
        .map(|s| match s {
            CostSpec::Explicit(c) => Some(c.clone()),
            CostSpec::Scale { .. } => None,
        })
        .collect();
    loop {
        let mut progressed = false;
        for k in 0..specs.len() {
            if costs[k].is_some() {
                continue;
            }
            if let CostSpec::Scale { of, factor } = &specs[k] {
                let base = shells.iter().position(|s| s.0 == *of).ok_or_else(|| {
                    Error::schema(
                        format!("vehicles[{k}].costs.scale_of"),
                        format!("no vehicle {of}"),
                    )
                })?;
                if let Some(base_costs) = &costs[base] {
                    costs[k] = Some(base_costs.iter().map(|c| c * factor).collect());
                    progressed = true;
                }
            }
        }
        if costs.iter().all(Option::is_some) {
            break;
        }
        if !progressed {
            let k = costs.iter().position(Option::is_none).unwrap_or(0);
            return Err(Error::schema(
                format!("vehicles[{k}].costs.scale_of"),
                "cyclic scale_of chain",
            ));
        }
    }

    let fleet = shells
        .into_iter()
        .zip(costs)
        .map(|((id, mass_capacity, volume_capacity), costs)| Vehicle {
            id,
            mass_capacity,
            volume_capacity,
            costs: costs.unwrap_or_default(),
        })
        .collect();
    let demands = masses
        .into_iter()
        .enumerate()
        .map(|(j, mass)| Demand {
            mass,
            volume: volumes
                .as_ref()
                .map(|v| v[j])
                .unwrap_or_else(Rational::zero),
        })
        .collect();
    Instance::new(path_map, demands, fleet)
}

/// Point/path incidence: row per point, column per path, a 1 where the path touches the point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl IncidenceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry for point `j` (1-based) and path `i` (1-based).
    pub fn get(&self, point: PointId, path: PathId) -> u8 {
        self.entries[(point.0 - 1) * self.cols + (path.0 - 1)]
    }

    /// Column of path `i` as a length-J 0/1 vector.
    pub fn column(&self, path: PathId) -> Vec<u8> {
        (0..self.rows)
            .map(|r| self.entries[r * self.cols + path.0 - 1])
            .collect()
    }

    /// `Π · x` for an integer path vector.
    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(x.len(), self.cols, "path vector length");
        (0..self.rows)
            .map(|r| {
                self.entries[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| e as i64 * xi)
                    .sum()
            })
            .collect()
    }
}

pub fn build_incidence(map: &PathIndexMap) -> IncidenceMatrix {
    let rows = map.points();
    let cols = map.len();
    let mut entries = vec![0u8; rows * cols];
    for (id, (a, b)) in map.iter() {
        entries[(a.0 - 1) * cols + id.0 - 1] = 1;
        entries[(b.0 - 1) * cols + id.0 - 1] = 1;
    }
    IncidenceMatrix {
        rows,
        cols,
        entries,
    }
}
