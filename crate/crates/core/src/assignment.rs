//! Capacity-constrained assignment of points to vehicles: minimize `Σ_k M_k·P_k`
//! subject to per-vehicle mass and volume limits, with every non-depot point on
//! exactly one vehicle and the depot on all of them.

use num_traits::Zero;

use crate::error::{Error, InfeasibilityCertificate, Resource, Result};
use crate::instance::{Capacity, Demand, Instance};
use crate::rational::{common_denominator, scaled_integer, Rational};

/// Largest enumeration `oracle_assignment` agrees to run.
pub const ORACLE_ASSIGNMENT_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    /// `coefficients[k][j - 1]`: cost of putting point `j` on vehicle `k + 1`.
    /// The depot entry is ignored.
    pub coefficients: Vec<Vec<Rational>>,
    pub demands: Vec<Demand>,
    /// `(mass, volume)` per vehicle.
    pub capacities: Vec<(Capacity, Capacity)>,
}

impl AssignmentProblem {
    /// Takes demands and capacities from the instance.
    pub fn from_instance(instance: &Instance, coefficients: Vec<Vec<Rational>>) -> Self {
        AssignmentProblem {
            coefficients,
            demands: instance.demands.clone(),
            capacities: instance
                .fleet
                .iter()
                .map(|v| (v.mass_capacity.clone(), v.volume_capacity.clone()))
                .collect(),
        }
    }

    pub fn points(&self) -> usize {
        self.demands.len()
    }

    pub fn vehicles(&self) -> usize {
        self.capacities.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.points();
        if n < 2 || self.vehicles() == 0 {
            return Err(Error::InvalidQuery(
                "assignment needs at least 2 points and 1 vehicle".into(),
            ));
        }
        if self.coefficients.len() != self.vehicles()
            || self.coefficients.iter().any(|c| c.len() != n)
        {
            return Err(Error::InvalidQuery(
                "coefficient table must be K × J".into(),
            ));
        }
        Ok(())
    }
}

/// Visit indicator of one vehicle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentVector {
    pub vehicle: usize,
    /// Length J, `p[0]` is the depot.
    pub p: Vec<u8>,
}

impl AssignmentVector {
    /// Non-depot points this vehicle visits.
    pub fn points(&self) -> Vec<usize> {
        self.p
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &v)| v != 0)
            .map(|(j, _)| j + 1)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentSolution {
    pub vectors: Vec<AssignmentVector>,
    pub objective: Rational,
}

impl AssignmentSolution {
    /// Vehicle id of each point `2..=J`, in point order.
    pub fn owners(&self) -> Vec<usize> {
        let n = self.vectors.first().map_or(0, |v| v.p.len());
        (1..n)
            .map(|j| {
                self.vectors
                    .iter()
                    .find(|v| v.p[j] != 0)
                    .map_or(0, |v| v.vehicle)
            })
            .collect()
    }

    /// Non-depot point sets per vehicle.
    pub fn partitions(&self) -> Vec<Vec<usize>> {
        self.vectors.iter().map(AssignmentVector::points).collect()
    }
}

/// Builds the solution vectors from the vehicle id of each point `2..=J`.
pub fn vectors_from_owners(owners: &[usize], vehicles: usize) -> Vec<AssignmentVector> {
    (1..=vehicles)
        .map(|k| {
            let mut p = vec![0u8; owners.len() + 1];
            p[0] = 1;
            for (j, &owner) in owners.iter().enumerate() {
                if owner == k {
                    p[j + 1] = 1;
                }
            }
            AssignmentVector { vehicle: k, p }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Capacity {
        vehicle: usize,
        resource: Resource,
        load: Rational,
        limit: Rational,
    },
    /// Point `point` is visited by `count` vehicles instead of one.
    Coverage { point: usize, count: usize },
    /// Vehicle does not include the depot.
    Depot { vehicle: usize },
}

pub fn check_feasible(problem: &AssignmentProblem, vectors: &[AssignmentVector]) -> Vec<Violation> {
    let n = problem.points();
    let mut violations = Vec::new();
    for v in vectors {
        if v.p.first() != Some(&1) {
            violations.push(Violation::Depot { vehicle: v.vehicle });
        }
        let (mass_cap, volume_cap) = &problem.capacities[v.vehicle - 1];
        let mut mass = Rational::zero();
        let mut volume = Rational::zero();
        for (j, &flag) in v.p.iter().enumerate().skip(1) {
            if flag != 0 {
                mass += problem.demands[j].mass;
                volume += problem.demands[j].volume;
            }
        }
        for (resource, load, cap) in [
            (Resource::Mass, mass, mass_cap),
            (Resource::Volume, volume, volume_cap),
        ] {
            if let Capacity::Limit(limit) = cap {
                if !cap.admits(&load) {
                    violations.push(Violation::Capacity {
                        vehicle: v.vehicle,
                        resource,
                        load,
                        limit: *limit,
                    });
                }
            }
        }
    }
    for j in 1..n {
        let count = vectors.iter().filter(|v| v.p[j] != 0).count();
        if count != 1 {
            violations.push(Violation::Coverage {
                point: j + 1,
                count,
            });
        }
    }
    violations
}

/// `Σ_k Σ_{j≥2} M_k[j]·p_k[j]`.
pub fn assignment_cost(problem: &AssignmentProblem, vectors: &[AssignmentVector]) -> Rational {
    vectors
        .iter()
        .map(|v| {
            v.p.iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &flag)| flag != 0)
                .map(|(j, _)| problem.coefficients[v.vehicle - 1][j])
                .sum::<Rational>()
        })
        .sum()
}

/// Finds the certificate for an infeasible problem: aggregate shortfall first,
/// then a point no vehicle can carry, otherwise a packing failure.
fn infeasibility(problem: &AssignmentProblem) -> Option<InfeasibilityCertificate> {
    for resource in [Resource::Mass, Resource::Volume] {
        let demand_of = |d: &Demand| match resource {
            Resource::Mass => d.mass,
            Resource::Volume => d.volume,
        };
        let cap_of = |c: &(Capacity, Capacity)| match resource {
            Resource::Mass => c.0.clone(),
            Resource::Volume => c.1.clone(),
        };
        let demand: Rational = problem.demands.iter().skip(1).map(demand_of).sum();
        let caps: Vec<Capacity> = problem.capacities.iter().map(cap_of).collect();
        if caps.iter().all(|c| c.limit().is_some()) {
            let capacity: Rational = caps.iter().filter_map(Capacity::limit).sum();
            if demand > capacity {
                return Some(InfeasibilityCertificate::Aggregate {
                    resource,
                    demand,
                    capacity,
                });
            }
        }
    }
    for (j, d) in problem.demands.iter().enumerate().skip(1) {
        for resource in [Resource::Mass, Resource::Volume] {
            let demand = match resource {
                Resource::Mass => d.mass,
                Resource::Volume => d.volume,
            };
            let fits = problem.capacities.iter().any(|c| {
                let cap = match resource {
                    Resource::Mass => &c.0,
                    Resource::Volume => &c.1,
                };
                cap.admits(&demand)
            });
            if !fits {
                return Some(InfeasibilityCertificate::OversizedPoint {
                    point: j + 1,
                    resource,
                    demand,
                });
            }
        }
    }
    None
}

/// Exact integer image of a problem: costs, masses and volumes each multiplied
/// by their common denominator.
struct Scaled {
    cost: Vec<Vec<i128>>,
    mass: Vec<i128>,
    volume: Vec<i128>,
    mass_cap: Vec<i128>,
    volume_cap: Vec<i128>,
}

impl Scaled {
    fn new(problem: &AssignmentProblem) -> Self {
        let cost_scale = common_denominator(problem.coefficients.iter().flatten());
        let limits = |pick: fn(&(Capacity, Capacity)) -> &Capacity| {
            problem
                .capacities
                .iter()
                .filter_map(move |c| pick(c).limit())
        };
        let mass_scale = common_denominator(
            problem
                .demands
                .iter()
                .map(|d| &d.mass)
                .chain(limits(|c| &c.0)),
        );
        let volume_scale = common_denominator(
            problem
                .demands
                .iter()
                .map(|d| &d.volume)
                .chain(limits(|c| &c.1)),
        );
        let cap = |c: &Capacity, scale| match c {
            Capacity::Unbounded => i128::MAX,
            Capacity::Limit(l) => scaled_integer(l, scale),
        };
        Scaled {
            cost: problem
                .coefficients
                .iter()
                .map(|row| row.iter().map(|c| scaled_integer(c, cost_scale)).collect())
                .collect(),
            mass: problem
                .demands
                .iter()
                .map(|d| scaled_integer(&d.mass, mass_scale))
                .collect(),
            volume: problem
                .demands
                .iter()
                .map(|d| scaled_integer(&d.volume, volume_scale))
                .collect(),
            mass_cap: problem
                .capacities
                .iter()
                .map(|c| cap(&c.0, mass_scale))
                .collect(),
            volume_cap: problem
                .capacities
                .iter()
                .map(|c| cap(&c.1, volume_scale))
                .collect(),
        }
    }
}

struct Search<'a> {
    s: &'a Scaled,
    /// Branching order over point indices (0-based, depot excluded).
    order: Vec<usize>,
    /// `suffix_min[d]`: Σ of the cheapest coefficient over `order[d..]`.
    suffix_min: Vec<i128>,
    /// Smallest vehicle index achieving the cheapest coefficient, per point.
    cheapest_vehicle: Vec<usize>,
    suffix_mass: Vec<i128>,
    suffix_volume: Vec<i128>,
    mass_bounded: bool,
    volume_bounded: bool,
    /// Vehicle index per point; `usize::MAX` while uncommitted.
    assign: Vec<usize>,
    mass_load: Vec<i128>,
    volume_load: Vec<i128>,
    best: Option<(i128, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, cost: i128) {
        let bound = cost + self.suffix_min[depth];
        if let Some((best_cost, best_assign)) = &self.best {
            if bound > *best_cost {
                return;
            }
            if bound == *best_cost && !self.could_beat_lexicographically(best_assign) {
                return;
            }
        }
        if depth == self.order.len() {
            let improves = match &self.best {
                None => true,
                Some((c, a)) => cost < *c || (cost == *c && self.assign[1..] < a[1..]),
            };
            if improves {
                self.best = Some((cost, self.assign.clone()));
            }
            return;
        }
        if !self.aggregate_room(depth) {
            return;
        }
        let j = self.order[depth];
        for k in 0..self.s.cost.len() {
            let mass = self.mass_load[k] + self.s.mass[j];
            let volume = self.volume_load[k] + self.s.volume[j];
            if mass > self.s.mass_cap[k] || volume > self.s.volume_cap[k] {
                continue;
            }
            self.mass_load[k] = mass;
            self.volume_load[k] = volume;
            self.assign[j] = k;
            self.run(depth + 1, cost + self.s.cost[k][j]);
            self.assign[j] = usize::MAX;
            self.mass_load[k] -= self.s.mass[j];
            self.volume_load[k] -= self.s.volume[j];
        }
    }

    /// Whether any equal-cost completion could yield a smaller assignment string.
    fn could_beat_lexicographically(&self, incumbent: &[usize]) -> bool {
        for j in 1..self.assign.len() {
            let optimistic = match self.assign[j] {
                usize::MAX => self.cheapest_vehicle[j],
                k => k,
            };
            match optimistic.cmp(&incumbent[j]) {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {}
            }
        }
        false
    }

    fn aggregate_room(&self, depth: usize) -> bool {
        let room = |loads: &[i128], caps: &[i128]| -> i128 {
            loads.iter().zip(caps).map(|(l, c)| c - l).sum::<i128>()
        };
        (!self.mass_bounded || room(&self.mass_load, &self.s.mass_cap) >= self.suffix_mass[depth])
            && (!self.volume_bounded
                || room(&self.volume_load, &self.s.volume_cap) >= self.suffix_volume[depth])
    }
}

/// Exact depth-first branch and bound.
///
/// Points are branched in descending mass order (ties by id), each tried on
/// vehicles in ascending id order. The bound adds the cheapest coefficient of
/// every uncommitted point to the committed cost. Among optimal assignments the
/// one with the lexicographically smallest vehicle string (point 2's vehicle,
/// then point 3's, …) is returned.
pub fn solve_assignment(problem: &AssignmentProblem) -> Result<AssignmentSolution> {
    problem.validate()?;
    if let Some(cert) = infeasibility(problem) {
        return Err(Error::Infeasible(cert));
    }
    let n = problem.points();
    let k_count = problem.vehicles();
    let scaled = Scaled::new(problem);

    let mut order: Vec<usize> = (1..n).collect();
    order.sort_by(|&a, &b| {
        problem.demands[b]
            .mass
            .cmp(&problem.demands[a].mass)
            .then(a.cmp(&b))
    });
    let mut cheapest_vehicle = vec![0usize; n];
    let mut cheapest = vec![0i128; n];
    for j in 1..n {
        let (k, c) = (0..k_count)
            .map(|k| (k, scaled.cost[k][j]))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("at least one vehicle");
        cheapest_vehicle[j] = k;
        cheapest[j] = c;
    }
    let suffix = |values: &dyn Fn(usize) -> i128| -> Vec<i128> {
        let mut out = vec![0i128; order.len() + 1];
        for d in (0..order.len()).rev() {
            out[d] = out[d + 1] + values(order[d]);
        }
        out
    };
    let suffix_min = suffix(&|j| cheapest[j]);
    let suffix_mass = suffix(&|j| scaled.mass[j]);
    let suffix_volume = suffix(&|j| scaled.volume[j]);
    let mut search = Search {
        s: &scaled,
        mass_bounded: scaled.mass_cap.iter().all(|&c| c != i128::MAX),
        volume_bounded: scaled.volume_cap.iter().all(|&c| c != i128::MAX),
        order,
        suffix_min,
        cheapest_vehicle,
        suffix_mass,
        suffix_volume,
        assign: vec![usize::MAX; n],
        mass_load: vec![0; k_count],
        volume_load: vec![0; k_count],
        best: None,
    };
    search.assign[0] = 0;
    search.run(0, 0);
    let (_, assign) = search
        .best
        .ok_or(Error::Infeasible(InfeasibilityCertificate::Packing))?;
    let owners: Vec<usize> = assign[1..].iter().map(|k| k + 1).collect();
    let vectors = vectors_from_owners(&owners, k_count);
    let objective = assignment_cost(problem, &vectors);
    Ok(AssignmentSolution { vectors, objective })
}

/// Exhaustive enumeration of all `K^(J−1)` assignments in lexicographic order,
/// keeping the first strict minimum.
pub fn oracle_assignment(problem: &AssignmentProblem) -> Result<AssignmentSolution> {
    problem.validate()?;
    let n = problem.points();
    let k_count = problem.vehicles();
    let size = (k_count as u128)
        .checked_pow((n - 1) as u32)
        .unwrap_or(u128::MAX);
    if size > ORACLE_ASSIGNMENT_LIMIT {
        return Err(Error::OracleLimit {
            what: "assignment enumeration".into(),
            size,
            limit: ORACLE_ASSIGNMENT_LIMIT,
        });
    }
    let mut owners = vec![1usize; n - 1];
    let mut best: Option<(Rational, Vec<usize>)> = None;
    loop {
        let vectors = vectors_from_owners(&owners, k_count);
        if check_feasible(problem, &vectors).is_empty() {
            let cost = assignment_cost(problem, &vectors);
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, owners.clone()));
            }
        }
        // odometer, last point fastest
        let mut pos = owners.len();
        loop {
            if pos == 0 {
                let (objective, owners) = best.ok_or_else(|| {
                    Error::Infeasible(
                        infeasibility(problem).unwrap_or(InfeasibilityCertificate::Packing),
                    )
                })?;
                return Ok(AssignmentSolution {
                    vectors: vectors_from_owners(&owners, k_count),
                    objective,
                });
            }
            pos -= 1;
            if owners[pos] < k_count {
                owners[pos] += 1;
                for o in owners.iter_mut().skip(pos + 1) {
                    *o = 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse_rational, ratio};

    fn r(text: &str) -> Rational {
        parse_rational(text).unwrap()
    }

    fn masses() -> Vec<Demand> {
        ["0", "2", "1", "3", "1", "2", "2", "3", "4", "0.5", "0.5"]
            .iter()
            .map(|m| Demand {
                mass: r(m),
                volume: int(0),
            })
            .collect()
    }

    fn printed_problem(caps: [i64; 3]) -> AssignmentProblem {
        let base = [0, 11, 1, 14, 8, 8, 12, 5, 3, 6, 9];
        let scales = [int(1), ratio(6, 5), ratio(5, 4)];
        AssignmentProblem {
            coefficients: scales
                .iter()
                .map(|s| base.iter().map(|&c| int(c) * s).collect())
                .collect(),
            demands: masses(),
            capacities: caps
                .iter()
                .map(|&c| (Capacity::Limit(int(c)), Capacity::Unbounded))
                .collect(),
        }
    }

    fn owners_for(parts: &[&[usize]], n: usize) -> Vec<usize> {
        let mut owners = vec![0; n - 1];
        for (k, part) in parts.iter().enumerate() {
            for &j in *part {
                owners[j - 2] = k + 1;
            }
        }
        owners
    }

    #[test]
    fn printed_mass_partition_is_feasible_with_expected_cost() {
        let problem = printed_problem([3, 5, 15]);
        let vectors = vectors_from_owners(
            &owners_for(&[&[7, 10, 11], &[2, 5, 6], &[3, 4, 8, 9]], 11),
            3,
        );
        assert!(check_feasible(&problem, &vectors).is_empty());
        assert_eq!(assignment_cost(&problem, &vectors), r("88.15"));
    }

    #[test]
    fn overloaded_vehicle_is_reported() {
        let problem = printed_problem([3, 5, 15]);
        let vectors = vectors_from_owners(&[1; 10], 3);
        let violations = check_feasible(&problem, &vectors);
        assert_eq!(
            violations,
            vec![Violation::Capacity {
                vehicle: 1,
                resource: Resource::Mass,
                load: int(19),
                limit: int(3),
            }]
        );
    }

    #[test]
    fn double_coverage_is_reported() {
        let problem = printed_problem([30, 30, 30]);
        let mut vectors = vectors_from_owners(&[1; 10], 3);
        vectors[1].p[4] = 1;
        assert_eq!(
            check_feasible(&problem, &vectors),
            vec![Violation::Coverage { point: 5, count: 2 }]
        );
        vectors[2].p[0] = 0;
        assert!(check_feasible(&problem, &vectors).contains(&Violation::Depot { vehicle: 3 }));
    }

    #[test]
    fn depot_only_costs_nothing() {
        let problem = printed_problem([3, 5, 15]);
        let vectors = vectors_from_owners(&[0; 10], 3);
        assert_eq!(assignment_cost(&problem, &vectors), int(0));
    }

    #[test]
    fn solver_reproduces_printed_mass_partition() {
        let problem = printed_problem([3, 5, 15]);
        let solution = solve_assignment(&problem).unwrap();
        assert_eq!(
            solution.partitions(),
            vec![vec![7, 10, 11], vec![2, 5, 6], vec![3, 4, 8, 9]]
        );
        assert_eq!(solution.objective, r("88.15"));
        assert_eq!(oracle_assignment(&problem).unwrap(), solution);
    }

    #[test]
    fn unconstrained_puts_everything_on_cheapest_vehicle() {
        let mut problem = printed_problem([0, 0, 0]);
        for c in problem.capacities.iter_mut() {
            c.0 = Capacity::Unbounded;
        }
        let solution = solve_assignment(&problem).unwrap();
        assert_eq!(solution.owners(), vec![1; 10]);
    }

    #[test]
    fn single_point_single_vehicle() {
        let problem = AssignmentProblem {
            coefficients: vec![vec![int(0), int(4)]],
            demands: vec![Demand::zero(), Demand::zero()],
            capacities: vec![(Capacity::Unbounded, Capacity::Unbounded)],
        };
        let oracle = oracle_assignment(&problem).unwrap();
        assert_eq!(oracle.owners(), vec![1]);
        assert_eq!(solve_assignment(&problem).unwrap(), oracle);
    }

    #[test]
    fn infeasible_aggregate_certificate() {
        let problem = printed_problem([3, 5, 10]);
        match solve_assignment(&problem) {
            Err(Error::Infeasible(InfeasibilityCertificate::Aggregate {
                resource,
                demand,
                capacity,
            })) => {
                assert_eq!(resource, Resource::Mass);
                assert_eq!(demand, int(19));
                assert_eq!(capacity, int(18));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_packing_without_aggregate_shortfall() {
        // Three points of mass 2, two vehicles of capacity 3: total 6 ≤ 6 but each
        // vehicle holds only one point.
        let problem = AssignmentProblem {
            coefficients: vec![vec![int(0); 4]; 2],
            demands: vec![
                Demand::zero(),
                Demand {
                    mass: int(2),
                    volume: int(0),
                },
                Demand {
                    mass: int(2),
                    volume: int(0),
                },
                Demand {
                    mass: int(2),
                    volume: int(0),
                },
            ],
            capacities: vec![
                (Capacity::Limit(int(3)), Capacity::Unbounded),
                (Capacity::Limit(int(3)), Capacity::Unbounded),
            ],
        };
        assert!(matches!(
            solve_assignment(&problem),
            Err(Error::Infeasible(InfeasibilityCertificate::Packing))
        ));
        assert!(matches!(
            oracle_assignment(&problem),
            Err(Error::Infeasible(InfeasibilityCertificate::Packing))
        ));
    }

    #[test]
    fn oversized_point_certificate() {
        let problem = AssignmentProblem {
            coefficients: vec![vec![int(0); 3]; 2],
            demands: vec![
                Demand::zero(),
                Demand {
                    mass: int(1),
                    volume: int(9),
                },
                Demand {
                    mass: int(1),
                    volume: int(0),
                },
            ],
            capacities: vec![
                (Capacity::Unbounded, Capacity::Limit(int(5))),
                (Capacity::Unbounded, Capacity::Limit(int(5))),
            ],
        };
        assert!(matches!(
            solve_assignment(&problem),
            Err(Error::Infeasible(
                InfeasibilityCertificate::OversizedPoint {
                    point: 2,
                    resource: Resource::Volume,
                    ..
                }
            ))
        ));
    }

    #[test]
    fn ties_break_lexicographically() {
        let problem = AssignmentProblem {
            coefficients: vec![vec![int(0); 4]; 3],
            demands: vec![Demand::zero(); 4],
            capacities: vec![(Capacity::Unbounded, Capacity::Unbounded); 3],
        };
        assert_eq!(solve_assignment(&problem).unwrap().owners(), vec![1, 1, 1]);

        // Vehicle 1 can take only one point; every placement costs the same.
        let mut problem = problem;
        problem.demands = vec![
            Demand::zero(),
            Demand {
                mass: int(1),
                volume: int(0),
            },
            Demand {
                mass: int(1),
                volume: int(0),
            },
            Demand {
                mass: int(1),
                volume: int(0),
            },
        ];
        problem.capacities[0].0 = Capacity::Limit(int(1));
        problem.capacities[1].0 = Capacity::Limit(int(1));
        let solution = solve_assignment(&problem).unwrap();
        assert_eq!(solution.owners(), vec![1, 2, 3]);
        assert_eq!(oracle_assignment(&problem).unwrap(), solution);
    }

    #[test]
    fn oracle_refuses_huge_enumerations() {
        let problem = AssignmentProblem {
            coefficients: vec![vec![int(0); 16]; 4],
            demands: vec![Demand::zero(); 16],
            capacities: vec![(Capacity::Unbounded, Capacity::Unbounded); 4],
        };
        assert!(matches!(
            oracle_assignment(&problem),
            Err(Error::OracleLimit { .. })
        ));
    }
}
