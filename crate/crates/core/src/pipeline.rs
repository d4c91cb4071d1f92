//! End-to-end solve: decompose, assign, route, and the joint exhaustive comparator.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::assignment::{
    assignment_cost, solve_assignment, vectors_from_owners, AssignmentProblem, AssignmentSolution,
};
use crate::decomposition::{
    compute_m, objective_split, partition_incidence, select_a_set, split_cost_vector, ABPartition,
    MCoefficients, ObjectiveBreakdown, RouteVector,
};
use crate::error::{Error, Result};
use crate::fixture::{reference_instance, reference_scenario, PUBLISHED_COEFFICIENTS};
use crate::instance::{build_incidence, Capacity, Demand, Instance, PointId};
use crate::rational::{common_denominator, scaled_integer, Rational};
use crate::router::{solve_tsp, tour_to_route_vector, visit_vector, Tour, TspProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Unconstrained,
    Mass,
    MassVolume,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 3] = [
        ScenarioName::Unconstrained,
        ScenarioName::Mass,
        ScenarioName::MassVolume,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Unconstrained => "unconstrained",
            ScenarioName::Mass => "mass",
            ScenarioName::MassVolume => "mass_volume",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                format!("unknown scenario `{s}` (expected unconstrained, mass, mass_volume)")
            })
    }
}

/// Capacity and demand overrides applied on top of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub mass_capacities: Option<Vec<Capacity>>,
    pub volume_capacities: Option<Vec<Capacity>>,
    pub demand_mass: Option<Vec<Rational>>,
    pub demand_volume: Option<Vec<Rational>>,
}

impl Scenario {
    /// Scenario for an arbitrary instance: `unconstrained` lifts every limit,
    /// `mass` lifts the volume limits, `mass_volume` keeps the instance as is.
    pub fn generic(name: ScenarioName, vehicles: usize) -> Self {
        let unbounded = Some(vec![Capacity::Unbounded; vehicles]);
        let (mass_capacities, volume_capacities) = match name {
            ScenarioName::Unconstrained => (unbounded.clone(), unbounded),
            ScenarioName::Mass => (None, unbounded),
            ScenarioName::MassVolume => (None, None),
        };
        Scenario {
            name,
            mass_capacities,
            volume_capacities,
            demand_mass: None,
            demand_volume: None,
        }
    }

    /// The bundled scenario when `instance` is the reference network, otherwise [`Scenario::generic`].
    pub fn resolve(name: ScenarioName, instance: &Instance) -> Self {
        if is_reference(instance) {
            reference_scenario(name)
        } else {
            Scenario::generic(name, instance.vehicles())
        }
    }

    pub fn apply(&self, instance: &Instance) -> Result<Instance> {
        let k = instance.vehicles();
        let n = instance.points();
        let mut fleet = instance.fleet.clone();
        if let Some(caps) = &self.mass_capacities {
            check_len("scenario.mass_capacities", caps.len(), k)?;
            for (v, c) in fleet.iter_mut().zip(caps) {
                v.mass_capacity = c.clone();
            }
        }
        if let Some(caps) = &self.volume_capacities {
            check_len("scenario.volume_capacities", caps.len(), k)?;
            for (v, c) in fleet.iter_mut().zip(caps) {
                v.volume_capacity = c.clone();
            }
        }
        let mut demands = instance.demands.clone();
        if let Some(m) = &self.demand_mass {
            check_len("scenario.demand_mass", m.len(), n)?;
            for (d, v) in demands.iter_mut().zip(m) {
                d.mass = *v;
            }
        }
        if let Some(m) = &self.demand_volume {
            check_len("scenario.demand_volume", m.len(), n)?;
            for (d, v) in demands.iter_mut().zip(m) {
                d.volume = *v;
            }
        }
        Instance::new(instance.path_map.clone(), demands, fleet)
    }
}

fn check_len(field: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::schema(
            field,
            format!("{got} entries, expected {want}"),
        ));
    }
    Ok(())
}

/// Whether `instance` is the bundled reference network.
pub fn is_reference(instance: &Instance) -> bool {
    *instance == reference_instance()
}

/// Where the assignment coefficients come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MSource {
    /// Computed from the invertible incidence block.
    Derived,
    /// The published coefficient vector, scaled per vehicle.
    PaperOverride,
}

impl MSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            MSource::Derived => "derived",
            MSource::PaperOverride => "paper_override",
        }
    }
}

impl FromStr for MSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "derived" => Ok(MSource::Derived),
            "paper_override" => Ok(MSource::PaperOverride),
            other => Err(format!(
                "unknown m-source `{other}` (expected derived, paper_override)"
            )),
        }
    }
}

/// How a plan was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Decomposition,
    Exhaustive,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub scenario: ScenarioName,
    pub method: Method,
    pub m_source: MSource,
    /// The instance after scenario overrides.
    pub instance: Instance,
    pub partition: ABPartition,
    /// Derived coefficients per vehicle (depot included).
    pub derived_m: Vec<MCoefficients>,
    /// Coefficients the assignment stage minimized.
    pub assignment_coefficients: Vec<Vec<Rational>>,
    pub assignment: AssignmentSolution,
    pub tours: Vec<Tour>,
    pub breakdown: ObjectiveBreakdown,
}

impl Plan {
    pub fn total(&self) -> Rational {
        self.breakdown.total
    }

    /// `(mass, volume)` carried by each vehicle.
    pub fn loads(&self) -> Vec<(Rational, Rational)> {
        self.assignment
            .vectors
            .iter()
            .map(|v| {
                v.points()
                    .iter()
                    .fold((Rational::zero(), Rational::zero()), |(m, vol), &j| {
                        let d: &Demand = &self.instance.demands[j - 1];
                        (m + d.mass, vol + d.volume)
                    })
            })
            .collect()
    }
}

fn decompose(instance: &Instance) -> Result<(ABPartition, Vec<MCoefficients>)> {
    let a_ids = select_a_set(instance)?;
    let partition = partition_incidence(&build_incidence(&instance.path_map), &a_ids)?;
    let m = instance
        .fleet
        .iter()
        .map(|v| {
            let (t_a, _) = split_cost_vector(&v.costs, &partition);
            compute_m(v.id, &t_a, &partition)
        })
        .collect();
    Ok((partition, m))
}

/// Published coefficients for points 2..=11, scaled by each vehicle's cost ratio
/// to vehicle 1. Needs an 11-point instance whose fleet costs are proportional.
pub fn published_coefficients(instance: &Instance) -> Result<Vec<Vec<Rational>>> {
    if instance.points() != PUBLISHED_COEFFICIENTS.len() + 1 {
        return Err(Error::InvalidQuery(format!(
            "published coefficients cover 11 points, instance has {}",
            instance.points()
        )));
    }
    let base = &instance.fleet[0].costs;
    let pivot = base
        .iter()
        .position(|c| !c.is_zero())
        .ok_or_else(|| Error::InvalidQuery("vehicle 1 has all-zero costs".into()))?;
    instance
        .fleet
        .iter()
        .map(|v| {
            let factor = v.costs[pivot] / base[pivot];
            if v.costs.iter().zip(base).any(|(c, b)| *c != b * factor) {
                return Err(Error::InvalidQuery(format!(
                    "vehicle {} costs are not a multiple of vehicle 1's",
                    v.id
                )));
            }
            let mut row = vec![Rational::zero()];
            row.extend(
                PUBLISHED_COEFFICIENTS
                    .iter()
                    .map(|&c| Rational::from_integer(c as i128) * factor),
            );
            Ok(row)
        })
        .collect()
}

fn route_tours(instance: &Instance, assignment: &AssignmentSolution) -> Result<Vec<Tour>> {
    let problems: Vec<TspProblem> = assignment
        .vectors
        .iter()
        .map(|v| {
            let points: Vec<PointId> = v.points().into_iter().map(PointId).collect();
            TspProblem::new(instance, v.vehicle, &points)
        })
        .collect::<Result<_>>()?;
    // Vehicles are independent; each solve is sequential and deterministic.
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = problems
            .iter()
            .map(|p| scope.spawn(move || solve_tsp(p)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tsp worker panicked"))
            .collect()
    }))
}

fn breakdown_for(
    instance: &Instance,
    partition: &ABPartition,
    m: &[MCoefficients],
    tours: &[Tour],
) -> Result<ObjectiveBreakdown> {
    let routes: Vec<RouteVector> = tours
        .iter()
        .map(|t| RouteVector {
            vehicle: t.vehicle,
            x: tour_to_route_vector(t, &instance.path_map),
            p: visit_vector(t, instance.points()),
        })
        .collect();
    let costs: Vec<&[Rational]> = instance.fleet.iter().map(|v| v.costs.as_slice()).collect();
    objective_split(
        &routes,
        m,
        partition,
        &build_incidence(&instance.path_map),
        &costs,
    )
}

/// Decompose → assign → route.
pub fn run_pipeline(instance: &Instance, scenario: &Scenario, m_source: MSource) -> Result<Plan> {
    let instance = scenario
        .apply(instance)
        .map_err(|e| e.in_stage("scenario"))?;
    let (partition, derived_m) = decompose(&instance).map_err(|e| e.in_stage("decomposition"))?;
    let coefficients = match m_source {
        MSource::Derived => derived_m.iter().map(|m| m.values.clone()).collect(),
        MSource::PaperOverride => {
            published_coefficients(&instance).map_err(|e| e.in_stage("coefficients"))?
        }
    };
    let problem = AssignmentProblem::from_instance(&instance, coefficients.clone());
    let assignment = solve_assignment(&problem).map_err(|e| e.in_stage("assignment"))?;
    let tours = route_tours(&instance, &assignment).map_err(|e| e.in_stage("routing"))?;
    let breakdown = breakdown_for(&instance, &partition, &derived_m, &tours)
        .map_err(|e| e.in_stage("objective"))?;
    Ok(Plan {
        scenario: scenario.name,
        method: Method::Decomposition,
        m_source,
        instance,
        partition,
        derived_m,
        assignment_coefficients: coefficients,
        assignment,
        tours,
        breakdown,
    })
}

/// Largest point count the joint comparator handles (subset dynamic program over J − 1 points).
pub const MONOLITHIC_MAX_POINTS: usize = 16;
/// Largest number of point-to-vehicle assignments the joint comparator enumerates.
pub const MONOLITHIC_MAX_ASSIGNMENTS: u128 = 10_000_000;

/// Optimal closed-tour cost of every subset of non-depot points (bit `j − 2`
/// set for point `j`), by dynamic programming over subsets and last point.
fn subset_tour_costs(table: &[Vec<i128>]) -> Vec<i128> {
    let m = table.len() - 1;
    let full = 1usize << m;
    let inf = i128::MAX / 4;
    // best[mask * m + last]: cheapest depot → … → last path covering exactly mask
    let mut best = vec![inf; full * m];
    for last in 0..m {
        best[(1 << last) * m + last] = table[0][last + 1];
    }
    for mask in 1..full {
        for last in 0..m {
            let here = best[mask * m + last];
            if here >= inf || mask & (1 << last) == 0 {
                continue;
            }
            for next in 0..m {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let slot = (mask | (1 << next)) * m + next;
                let cand = here + table[last + 1][next + 1];
                if cand < best[slot] {
                    best[slot] = cand;
                }
            }
        }
    }
    let mut tours = vec![0i128; full];
    for (mask, tour) in tours.iter_mut().enumerate().skip(1) {
        *tour = (0..m)
            .filter(|&last| mask & (1 << last) != 0)
            .map(|last| best[mask * m + last] + table[last + 1][0])
            .min()
            .unwrap_or(inf);
    }
    tours
}

/// True joint optimum: every feasible assignment, each vehicle routed optimally.
///
/// Ties go to the lexicographically smallest vehicle string (point 2's vehicle first).
pub fn solve_monolithic_oracle(instance: &Instance, scenario: &Scenario) -> Result<Plan> {
    let instance = scenario
        .apply(instance)
        .map_err(|e| e.in_stage("scenario"))?;
    let n = instance.points();
    let k_count = instance.vehicles();
    if n > MONOLITHIC_MAX_POINTS {
        return Err(Error::OracleLimit {
            what: "joint enumeration points".into(),
            size: n as u128,
            limit: MONOLITHIC_MAX_POINTS as u128,
        });
    }
    let size = (k_count as u128)
        .checked_pow((n - 1) as u32)
        .unwrap_or(u128::MAX);
    if size > MONOLITHIC_MAX_ASSIGNMENTS {
        return Err(Error::OracleLimit {
            what: "joint enumeration assignments".into(),
            size,
            limit: MONOLITHIC_MAX_ASSIGNMENTS,
        });
    }
    let (partition, derived_m) = decompose(&instance).map_err(|e| e.in_stage("decomposition"))?;

    let tables: Vec<Vec<Vec<Rational>>> = (1..=k_count)
        .map(|k| instance.cost_table(k))
        .collect::<Result<_>>()?;
    let scale = common_denominator(tables.iter().flatten().flatten());
    let subset_costs: Vec<Vec<i128>> = tables
        .iter()
        .map(|t| {
            let ints: Vec<Vec<i128>> = t
                .iter()
                .map(|row| row.iter().map(|c| scaled_integer(c, scale)).collect())
                .collect();
            subset_tour_costs(&ints)
        })
        .collect();
    let m = n - 1;
    let full = 1usize << m;
    let subset_load = |pick: fn(&Demand) -> Rational| -> Vec<Rational> {
        let mut loads = vec![Rational::zero(); full];
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            loads[mask] = loads[mask & (mask - 1)] + pick(&instance.demands[low + 1]);
        }
        loads
    };
    let mass_of = subset_load(|d| d.mass);
    let volume_of = subset_load(|d| d.volume);

    let mut owners = vec![1usize; m];
    let mut best: Option<(i128, Vec<usize>)> = None;
    loop {
        let mut masks = vec![0usize; k_count];
        for (j, &o) in owners.iter().enumerate() {
            masks[o - 1] |= 1 << j;
        }
        let feasible = instance.fleet.iter().zip(&masks).all(|(v, &mask)| {
            v.mass_capacity.admits(&mass_of[mask]) && v.volume_capacity.admits(&volume_of[mask])
        });
        if feasible {
            let total: i128 = masks
                .iter()
                .enumerate()
                .map(|(k, &mask)| subset_costs[k][mask])
                .sum();
            if best.as_ref().is_none_or(|(c, _)| total < *c) {
                best = Some((total, owners.clone()));
            }
        }
        let mut pos = m;
        let advanced = loop {
            if pos == 0 {
                break false;
            }
            pos -= 1;
            if owners[pos] < k_count {
                owners[pos] += 1;
                for o in owners.iter_mut().skip(pos + 1) {
                    *o = 1;
                }
                break true;
            }
        };
        if !advanced {
            break;
        }
    }
    let (joint_total, owners) = best.ok_or_else(|| {
        let problem =
            AssignmentProblem::from_instance(&instance, vec![vec![Rational::zero(); n]; k_count]);
        match solve_assignment(&problem) {
            Err(e) => e,
            Ok(_) => Error::InvalidQuery("no feasible assignment found".into()),
        }
    })?;
    let vectors = vectors_from_owners(&owners, k_count);
    let coefficients: Vec<Vec<Rational>> = derived_m.iter().map(|m| m.values.clone()).collect();
    let problem = AssignmentProblem::from_instance(&instance, coefficients.clone());
    let objective = assignment_cost(&problem, &vectors);
    let assignment = AssignmentSolution { vectors, objective };
    let tours = route_tours(&instance, &assignment)?;
    let routed: Rational = tours.iter().map(|t| t.cost).sum();
    debug_assert_eq!(routed, Rational::new(joint_total, scale));
    let breakdown = breakdown_for(&instance, &partition, &derived_m, &tours)
        .map_err(|e| e.in_stage("objective"))?;
    Ok(Plan {
        scenario: scenario.name,
        method: Method::Exhaustive,
        m_source: MSource::Derived,
        instance,
        partition,
        derived_m,
        assignment_coefficients: coefficients,
        assignment,
        tours,
        breakdown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{load_instance, DEPOT};
    use crate::rational::int;
    use crate::router::oracle_tsp;

    fn triangle() -> Instance {
        load_instance(&serde_json::json!({
            "points": 3,
            "path_map": "canonical",
            "vehicles": [{"id": 1, "costs": [4, 2, 3]}],
            "demand_mass": [0, 1, 1]
        }))
        .unwrap()
    }

    #[test]
    fn triangle_plan_is_trivial() {
        let inst = triangle();
        let plan = run_pipeline(
            &inst,
            &Scenario::generic(ScenarioName::MassVolume, 1),
            MSource::Derived,
        )
        .unwrap();
        assert_eq!(plan.tours[0].render(), "1-2-3-1");
        assert_eq!(plan.breakdown.total, int(9));
        assert_eq!(plan.breakdown.l_zero, int(0));
        assert!(plan
            .tours
            .iter()
            .all(|t| t.sequence.first() == Some(&DEPOT)));
    }

    #[test]
    fn single_vehicle_joint_optimum_is_pure_tsp() {
        let inst = load_instance(&serde_json::json!({
            "points": 4,
            "path_map": "canonical",
            "vehicles": [{"id": 1, "costs": [5, 1, 2, 3, 4, 6]}],
            "demand_mass": [0, 1, 1, 1]
        }))
        .unwrap();
        let scenario = Scenario::generic(ScenarioName::Unconstrained, 1);
        let joint = solve_monolithic_oracle(&inst, &scenario).unwrap();
        let all: Vec<PointId> = (1..=4).map(PointId).collect();
        let tsp = oracle_tsp(&TspProblem::new(&inst, 1, &all).unwrap()).unwrap();
        assert_eq!(joint.total(), tsp.cost);
        assert_eq!(joint.tours[0], tsp);
    }

    #[test]
    fn subset_dp_matches_hand_values() {
        // depot 0 and points 1, 2 on a line: 0 -1- 1 -1- 2, direct 0-2 costs 2
        let table = vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]];
        let tours = subset_tour_costs(&table);
        assert_eq!(tours, vec![0, 2, 4, 4]);
    }

    #[test]
    fn paper_override_needs_eleven_points() {
        assert!(published_coefficients(&triangle()).is_err());
    }

    #[test]
    fn scenario_names_parse() {
        for name in ScenarioName::ALL {
            assert_eq!(name.as_str().parse::<ScenarioName>().unwrap(), name);
        }
        assert!("bogus".parse::<ScenarioName>().is_err());
        assert_eq!(
            "paper_override".parse::<MSource>().unwrap(),
            MSource::PaperOverride
        );
    }
}
