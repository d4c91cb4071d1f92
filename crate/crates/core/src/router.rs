//! Single-vehicle closed tours over an assigned point set.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::instance::{Instance, PathIndexMap, PointId, DEPOT};
use crate::rational::{common_denominator, scaled_integer, Rational};

/// Largest point count (depot included) `oracle_tsp` enumerates: (11 − 1)!/2 ≈ 1.8·10^6 tours.
pub const ORACLE_TSP_MAX_POINTS: usize = 11;

/// A closed tour starting and ending at the depot.
///
/// A depot-only tour is the single-element sequence `[1]`; an out-and-back
/// tour is `[1, j, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub vehicle: usize,
    pub sequence: Vec<PointId>,
    pub cost: Rational,
}

impl Tour {
    /// Points visited, depot included, ascending.
    pub fn points(&self) -> Vec<PointId> {
        let mut points: Vec<PointId> = self.sequence.clone();
        points.sort();
        points.dedup();
        points
    }

    /// `"1-7-10-11-1"`.
    pub fn render(&self) -> String {
        self.sequence
            .iter()
            .map(|p| p.0.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// One vehicle's routing subproblem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TspProblem {
    pub vehicle: usize,
    /// Ascending, depot first.
    points: Vec<PointId>,
    /// Symmetric cost table over `points`.
    costs: Vec<Vec<Rational>>,
}

impl TspProblem {
    /// Subproblem of `vehicle` over `points`; the depot is added if missing.
    pub fn new(instance: &Instance, vehicle: usize, points: &[PointId]) -> Result<Self> {
        let table = instance.cost_table(vehicle)?;
        let mut pts: Vec<PointId> = points.to_vec();
        pts.push(DEPOT);
        pts.sort();
        pts.dedup();
        if let Some(p) = pts.iter().find(|p| p.0 < 1 || p.0 > instance.points()) {
            return Err(Error::InvalidQuery(format!("point {p} not in instance")));
        }
        let costs = pts
            .iter()
            .map(|a| pts.iter().map(|b| table[a.0 - 1][b.0 - 1]).collect())
            .collect();
        Ok(TspProblem {
            vehicle,
            points: pts,
            costs,
        })
    }

    /// Builds a problem from an explicit symmetric table over points `1..=n`.
    pub fn from_table(vehicle: usize, costs: Vec<Vec<Rational>>) -> Result<Self> {
        let n = costs.len();
        if n == 0 || costs.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidQuery(
                "cost table must be square and non-empty".into(),
            ));
        }
        for a in 0..n {
            for b in 0..n {
                if costs[a][b] != costs[b][a] {
                    return Err(Error::InvalidQuery("cost table must be symmetric".into()));
                }
            }
        }
        Ok(TspProblem {
            vehicle,
            points: (1..=n).map(PointId).collect(),
            costs,
        })
    }

    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn local(&self, p: PointId) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }

    fn cost(&self, a: usize, b: usize) -> Rational {
        self.costs[a][b]
    }

    fn tour_from_locals(&self, locals: &[usize], cost: Rational) -> Tour {
        Tour {
            vehicle: self.vehicle,
            sequence: locals.iter().map(|&l| self.points[l]).collect(),
            cost,
        }
    }

    /// Forced tours for one or two points.
    fn trivial(&self) -> Option<Tour> {
        match self.points.len() {
            1 => Some(self.tour_from_locals(&[0], Rational::zero())),
            2 => {
                Some(self.tour_from_locals(&[0, 1, 0], self.cost(0, 1) * Rational::from_integer(2)))
            }
            _ => None,
        }
    }

    fn scaled(&self) -> ScaledTable {
        let scale = common_denominator(self.costs.iter().flatten());
        ScaledTable {
            scale,
            n: self.points.len(),
            c: self
                .costs
                .iter()
                .flatten()
                .map(|v| scaled_integer(v, scale))
                .collect(),
        }
    }
}

/// Cost table multiplied by the common denominator.
struct ScaledTable {
    scale: i128,
    n: usize,
    c: Vec<i128>,
}

impl ScaledTable {
    #[inline]
    fn at(&self, a: usize, b: usize) -> i128 {
        self.c[a * self.n + b]
    }

    fn to_rational(&self, value: i128) -> Rational {
        Rational::new(value, self.scale)
    }
}

/// Exact cost of a closed walk that visits every point of `problem` once.
pub fn tour_cost(problem: &TspProblem, sequence: &[PointId]) -> Result<Rational> {
    let invalid = |why: &str| Error::InvalidTour(format!("{why}: {sequence:?}"));
    let n = problem.len();
    if n == 1 {
        return if sequence == [DEPOT] || sequence == [DEPOT, DEPOT] {
            Ok(Rational::zero())
        } else {
            Err(invalid("depot-only tour must be [1]"))
        };
    }
    if sequence.len() != n + 1 {
        return Err(invalid("wrong length"));
    }
    if sequence[0] != DEPOT || sequence[n] != DEPOT {
        return Err(invalid("must start and end at the depot"));
    }
    let mut seen = vec![false; n];
    let mut locals = Vec::with_capacity(n + 1);
    for (pos, &p) in sequence.iter().enumerate() {
        let l = problem
            .local(p)
            .ok_or_else(|| invalid("visits a point outside the set"))?;
        if pos < n {
            if seen[l] {
                return Err(invalid("visits a point twice"));
            }
            seen[l] = true;
        }
        locals.push(l);
    }
    Ok(locals.windows(2).map(|w| problem.cost(w[0], w[1])).sum())
}

/// Doubled lower bound on completing a partial path `depot … end` through `remaining`.
///
/// Each remaining point needs two tour edges, the path end one more, the depot
/// one more (two at the root). Summing every slot's cheapest admissible edges
/// counts each remaining tour edge at most twice.
fn doubled_completion_bound(t: &ScaledTable, end: usize, remaining: &[usize]) -> i128 {
    if remaining.is_empty() {
        return 2 * t.at(end, 0);
    }
    let cheapest_two = |u: usize, others: &mut dyn Iterator<Item = usize>| -> i128 {
        let (mut a, mut b) = (i128::MAX, i128::MAX);
        for v in others {
            let c = t.at(u, v);
            if c < a {
                b = a;
                a = c;
            } else if c < b {
                b = c;
            }
        }
        a + b
    };
    let min_to_remaining = |u: usize| remaining.iter().map(|&v| t.at(u, v)).min().unwrap_or(0);
    let mut total = if end == 0 {
        // Root: depot needs two edges into the remaining set; a single remaining
        // point is reached twice over the same edge.
        if remaining.len() == 1 {
            2 * t.at(0, remaining[0])
        } else {
            cheapest_two(0, &mut remaining.iter().copied())
        }
    } else {
        min_to_remaining(end) + min_to_remaining(0)
    };
    for &u in remaining {
        let mut others = remaining
            .iter()
            .copied()
            .filter(|&v| v != u)
            .chain([end])
            .chain(if end == 0 { None } else { Some(0) });
        let two = if end == 0 && remaining.len() == 1 {
            2 * t.at(u, 0)
        } else {
            cheapest_two(u, &mut others)
        };
        total += two;
    }
    total
}

/// Root lower bound used by [`solve_tsp`].
pub fn root_lower_bound(problem: &TspProblem) -> Rational {
    if let Some(tour) = problem.trivial() {
        return tour.cost;
    }
    let t = problem.scaled();
    let remaining: Vec<usize> = (1..problem.len()).collect();
    t.to_rational(doubled_completion_bound(&t, 0, &remaining)) / Rational::from_integer(2)
}

struct TspSearch<'a> {
    t: &'a ScaledTable,
    path: Vec<usize>,
    visited: Vec<bool>,
    best: Option<(i128, Vec<usize>)>,
}

impl TspSearch<'_> {
    fn run(&mut self, cost: i128) {
        let n = self.t.n;
        let end = *self.path.last().expect("path starts at depot");
        let remaining: Vec<usize> = (1..n).filter(|&u| !self.visited[u]).collect();

        if remaining.is_empty() {
            // canonical direction: second element below second-to-last
            if self.path[1] > end {
                return;
            }
            let total = cost + self.t.at(end, 0);
            let mut seq = self.path.clone();
            seq.push(0);
            let improves = match &self.best {
                None => true,
                Some((c, s)) => total < *c || (total == *c && seq < *s),
            };
            if improves {
                self.best = Some((total, seq));
            }
            return;
        }
        if self.path.len() >= 2 && remaining.iter().all(|&u| u < self.path[1]) {
            return;
        }
        if let Some((best_cost, best_seq)) = &self.best {
            let bound = 2 * cost + doubled_completion_bound(self.t, end, &remaining);
            if bound > 2 * best_cost {
                return;
            }
            if bound == 2 * best_cost && self.path[..] > best_seq[..self.path.len()] {
                return;
            }
        }
        let mut children = remaining;
        children.sort_by_key(|&u| (self.t.at(end, u), u));
        for u in children {
            self.path.push(u);
            self.visited[u] = true;
            self.run(cost + self.t.at(end, u));
            self.visited[u] = false;
            self.path.pop();
        }
    }
}

/// Exact depth-first branch and bound from the depot.
///
/// Children are tried by ascending edge cost, then ascending point id. Among
/// optimal tours the lexicographically smallest one whose second point is
/// below its second-to-last point is returned.
pub fn solve_tsp(problem: &TspProblem) -> Tour {
    if let Some(tour) = problem.trivial() {
        return tour;
    }
    let t = problem.scaled();
    let mut visited = vec![false; t.n];
    visited[0] = true;
    let mut search = TspSearch {
        t: &t,
        path: vec![0],
        visited,
        best: None,
    };
    search.run(0);
    let (cost, seq) = search
        .best
        .expect("a tour over three or more points exists");
    problem.tour_from_locals(&seq, t.to_rational(cost))
}

/// Next lexicographic permutation in place; `false` after the last one.
fn next_permutation(items: &mut [usize]) -> bool {
    let Some(i) = (1..items.len()).rev().find(|&i| items[i - 1] < items[i]) else {
        return false;
    };
    let j = (i..items.len())
        .rev()
        .find(|&j| items[j] > items[i - 1])
        .expect("pivot has a larger successor");
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

/// Exhaustive enumeration of every distinct closed tour, same tie-break as [`solve_tsp`].
pub fn oracle_tsp(problem: &TspProblem) -> Result<Tour> {
    let n = problem.len();
    if n > ORACLE_TSP_MAX_POINTS {
        return Err(Error::OracleLimit {
            what: "tour enumeration".into(),
            size: n as u128,
            limit: ORACLE_TSP_MAX_POINTS as u128,
        });
    }
    if let Some(tour) = problem.trivial() {
        return Ok(tour);
    }
    let t = problem.scaled();
    let mut perm: Vec<usize> = (1..n).collect();
    let mut best: Option<(i128, Vec<usize>)> = None;
    loop {
        if perm[0] < perm[perm.len() - 1] {
            let mut cost = t.at(0, perm[0]) + t.at(perm[perm.len() - 1], 0);
            for w in perm.windows(2) {
                cost += t.at(w[0], w[1]);
            }
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, perm.clone()));
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (cost, perm) = best.expect("at least one canonical tour");
    let mut seq = vec![0];
    seq.extend(perm);
    seq.push(0);
    Ok(problem.tour_from_locals(&seq, t.to_rational(cost)))
}

/// Path multiplicities of a tour: 1 per traversed path, 2 for an out-and-back.
pub fn tour_to_route_vector(tour: &Tour, map: &PathIndexMap) -> Vec<u8> {
    let mut x = vec![0u8; map.len()];
    for w in tour.sequence.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let id = map.id(w[0], w[1]).expect("tour points belong to the map");
        x[id.0 - 1] += 1;
    }
    x
}

/// 0/1 visit vector of a tour, length J.
pub fn visit_vector(tour: &Tour, points: usize) -> Vec<u8> {
    let mut p = vec![0u8; points];
    for q in &tour.sequence {
        p[q.0 - 1] = 1;
    }
    p
}
