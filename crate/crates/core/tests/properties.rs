mod common;

use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;

use matrix_routing::assignment::{oracle_assignment, solve_assignment, AssignmentProblem};
use matrix_routing::decomposition::{a_set_for, partition_incidence, recover_xa};
use matrix_routing::error::{Error, InfeasibilityCertificate, Resource};
use matrix_routing::instance::{build_incidence, canonical_path_map, Capacity, PointId};
use matrix_routing::pipeline::{run_pipeline, MSource, Scenario, ScenarioName};
use matrix_routing::rational::Rational;
use matrix_routing::router::{
    root_lower_bound, solve_tsp, tour_cost, tour_to_route_vector, visit_vector, Tour, TspProblem,
};

fn scale() -> impl Strategy<Value = Rational> {
    (1i128..=40, 1i128..=8).prop_map(|(n, d)| Rational::new(n, d))
}

fn coefficients(rng: &mut rand::rngs::StdRng, k: usize, j: usize) -> Vec<Vec<Rational>> {
    (0..k)
        .map(|_| (0..j).map(|_| common::signed_rational(rng, 15)).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_cost_is_symmetric(seed in any::<u64>(), j in 2usize..=9, k in 1usize..=3) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, j, k, 1.0, true);
        for v in 1..=k {
            for a in 1..=j {
                for b in 1..=j {
                    let forward = inst.pair_cost(v, PointId(a), PointId(b));
                    if a == b {
                        prop_assert!(forward.is_err());
                    } else {
                        prop_assert_eq!(forward.unwrap(), inst.pair_cost(v, PointId(b), PointId(a)).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn tour_cost_ignores_direction(seed in any::<u64>(), n in 3usize..=9) {
        let mut rng = common::rng(seed);
        let problem = TspProblem::from_table(1, common::cost_table(&mut rng, n, 10)).unwrap();
        let points: Vec<PointId> = (1..=n).map(PointId).collect();
        let seq = common::random_tour(&mut rng, &points);
        let reversed: Vec<PointId> = seq.iter().rev().copied().collect();
        prop_assert_eq!(tour_cost(&problem, &seq).unwrap(), tour_cost(&problem, &reversed).unwrap());
    }

    #[test]
    fn tour_solution_scales_with_costs(seed in any::<u64>(), n in 2usize..=8, c in scale()) {
        let mut rng = common::rng(seed);
        let table = common::cost_table(&mut rng, n, 10);
        let scaled: Vec<Vec<Rational>> = table.iter().map(|row| row.iter().map(|v| v * c).collect()).collect();
        let base = solve_tsp(&TspProblem::from_table(1, table).unwrap());
        let stretched = solve_tsp(&TspProblem::from_table(1, scaled).unwrap());
        prop_assert_eq!(&stretched.sequence, &base.sequence);
        prop_assert_eq!(stretched.cost, base.cost * c);
    }

    #[test]
    fn root_bound_never_exceeds_optimum(seed in any::<u64>(), n in 2usize..=9) {
        let mut rng = common::rng(seed);
        let problem = TspProblem::from_table(1, common::cost_table(&mut rng, n, 10)).unwrap();
        prop_assert!(root_lower_bound(&problem) <= solve_tsp(&problem).cost);
    }

    #[test]
    fn assignment_argmin_survives_positive_scaling(
        seed in any::<u64>(), j in 2usize..=9, k in 1usize..=3, c in scale()
    ) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, j, k, 0.8, seed % 2 == 0);
        let coeffs = coefficients(&mut rng, k, j);
        let scaled: Vec<Vec<Rational>> = coeffs.iter().map(|row| row.iter().map(|v| v * c).collect()).collect();
        let base = solve_assignment(&AssignmentProblem::from_instance(&inst, coeffs));
        let stretched = solve_assignment(&AssignmentProblem::from_instance(&inst, scaled));
        match (base, stretched) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.owners(), b.owners());
                prop_assert_eq!(a.objective * c, b.objective);
            }
            (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => {}
            (a, b) => prop_assert!(false, "diverged: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn relaxing_capacities_never_raises_the_objective(seed in any::<u64>(), j in 2usize..=9, k in 1usize..=3) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, j, k, 0.7, true);
        let coeffs = coefficients(&mut rng, k, j);
        let tight = AssignmentProblem::from_instance(&inst, coeffs.clone());
        let mut loose = tight.clone();
        for caps in &mut loose.capacities {
            caps.1 = Capacity::Unbounded;
        }
        let mut free = loose.clone();
        for caps in &mut free.capacities {
            caps.0 = Capacity::Unbounded;
        }
        let free_opt = solve_assignment(&free).unwrap().objective;
        if let Ok(loose_opt) = solve_assignment(&loose) {
            prop_assert!(free_opt <= loose_opt.objective);
            if let Ok(tight_opt) = solve_assignment(&tight) {
                prop_assert!(loose_opt.objective <= tight_opt.objective);
            }
        } else {
            prop_assert!(solve_assignment(&tight).is_err());
        }
    }

    #[test]
    fn infeasibility_certificates_are_truthful(seed in any::<u64>(), j in 2usize..=8, k in 1usize..=3) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, j, k, 0.4, seed % 3 != 0);
        let problem = AssignmentProblem::from_instance(&inst, coefficients(&mut rng, k, j));
        let Err(Error::Infeasible(cert)) = solve_assignment(&problem) else {
            return Ok(());
        };
        prop_assert!(oracle_assignment(&problem).is_err());
        let demand_of = |r: Resource, p: usize| {
            let d = &problem.demands[p];
            match r { Resource::Mass => d.mass, Resource::Volume => d.volume }
        };
        let cap_of = |r: Resource, v: usize| {
            let c = &problem.capacities[v];
            match r { Resource::Mass => c.0.clone(), Resource::Volume => c.1.clone() }
        };
        match cert {
            InfeasibilityCertificate::Aggregate { resource, demand, capacity } => {
                prop_assert!(demand > capacity);
                prop_assert_eq!(demand, (0..j).map(|p| demand_of(resource, p)).sum::<Rational>());
                let fleet: Option<Rational> = (0..k).map(|v| cap_of(resource, v).limit().copied()).sum();
                prop_assert_eq!(Some(capacity), fleet);
            }
            InfeasibilityCertificate::OversizedPoint { point, resource, demand } => {
                prop_assert_eq!(demand, demand_of(resource, point - 1));
                prop_assert!((0..k).all(|v| !cap_of(resource, v).admits(&demand)));
            }
            InfeasibilityCertificate::Packing => {
                for resource in [Resource::Mass, Resource::Volume] {
                    let total: Rational = (0..j).map(|p| demand_of(resource, p)).sum();
                    let fleet: Option<Rational> = (0..k).map(|v| cap_of(resource, v).limit().copied()).sum();
                    prop_assert!(fleet.is_none_or(|f| total <= f));
                }
            }
        }
    }

    #[test]
    fn route_recovery_round_trips(seed in any::<u64>(), j in 3usize..=12) {
        let mut rng = common::rng(seed);
        let map = canonical_path_map(j).unwrap();
        let part = partition_incidence(&build_incidence(&map), &a_set_for(&map).unwrap()).unwrap();
        let subset = common::subset_with_depot(&mut rng, j, 2);
        let tour = Tour { vehicle: 1, sequence: common::random_tour(&mut rng, &subset), cost: Rational::zero() };
        let x = tour_to_route_vector(&tour, &map);
        let p = visit_vector(&tour, j);
        let expected: Vec<Rational> = part.a_part(&x).iter().map(|&v| Rational::from_integer(v as i128)).collect();
        prop_assert_eq!(recover_xa(&p, &part.b_part(&x), &part), expected);
    }

    #[test]
    fn plans_are_internally_consistent(seed in any::<u64>(), j in 3usize..=8, k in 1usize..=3) {
        let mut rng = common::rng(seed);
        let inst = common::instance(&mut rng, j, k, 0.8, seed % 2 == 1);
        let plan = match run_pipeline(&inst, &Scenario::generic(ScenarioName::MassVolume, k), MSource::Derived) {
            Ok(plan) => plan,
            Err(e) => {
                prop_assert!(matches!(e.root(), Error::Infeasible(_)));
                return Ok(());
            }
        };
        let mut owners = plan.assignment.owners();
        owners.sort();
        let mut seen: Vec<usize> = plan.assignment.partitions().concat();
        seen.sort();
        prop_assert_eq!(seen, (2..=j).collect::<Vec<_>>());
        prop_assert_eq!(owners.len(), j - 1);
        for (tour, part) in plan.tours.iter().zip(plan.assignment.partitions()) {
            let mut visited: Vec<usize> = tour.points().iter().map(|p| p.0).filter(|&p| p != 1).collect();
            visited.sort();
            prop_assert_eq!(visited, part);
            let problem = TspProblem::new(&plan.instance, tour.vehicle, &tour.points()).unwrap();
            prop_assert_eq!(tour_cost(&problem, &tour.sequence).unwrap(), tour.cost);
        }
        let sum: Rational = plan.tours.iter().map(|t| t.cost).sum();
        prop_assert_eq!(plan.total(), sum);
        prop_assert_eq!(plan.breakdown.total, plan.breakdown.l_star + plan.breakdown.l_zero);
        for (vehicle, (mass, volume)) in plan.instance.fleet.iter().zip(plan.loads()) {
            prop_assert!(vehicle.mass_capacity.admits(&mass));
            prop_assert!(vehicle.volume_capacity.admits(&volume));
        }
    }
}

#[test]
fn shuffled_owner_order_does_not_change_the_optimum() {
    let mut rng = common::rng(99);
    for _ in 0..20 {
        let inst = common::instance(&mut rng, 7, 3, 1.0, false);
        let coeffs = coefficients(&mut rng, 3, 7);
        let mut perm: Vec<usize> = (0..3).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<Vec<Rational>> = perm.iter().map(|&v| coeffs[v].clone()).collect();
        let mut permuted_inst = inst.clone();
        permuted_inst.fleet = perm
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut vehicle = inst.fleet[v].clone();
                vehicle.id = i + 1;
                vehicle
            })
            .collect();
        let a = solve_assignment(&AssignmentProblem::from_instance(&inst, coeffs)).unwrap();
        let b =
            solve_assignment(&AssignmentProblem::from_instance(&permuted_inst, permuted)).unwrap();
        assert_eq!(a.objective, b.objective);
    }
}
