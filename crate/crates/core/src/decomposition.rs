//! Splitting the incidence matrix into an invertible block and the rest, and the
//! algebra built on it: per-point visit coefficients, recovery of the block
//! components of a route from its visit vector, and the two-part objective.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::instance::{IncidenceMatrix, Instance, PathId, PathIndexMap, PointId, DEPOT};
use crate::linalg::{invert, IntMatrix};
use crate::rational::Rational;

/// Chooses the J paths whose incidence columns form the invertible block.
///
/// Odd J: the Hamiltonian cycle `1-2-…-J-1`. Even J: the triangle on points
/// 1, 2, 3 plus the chain `3-4-…-J`, a spanning edge set whose only cycle is odd.
/// Ids come back in ascending order.
pub fn select_a_set(instance: &Instance) -> Result<Vec<PathId>> {
    a_set_for(&instance.path_map)
}

pub fn a_set_for(map: &PathIndexMap) -> Result<Vec<PathId>> {
    let n = map.points();
    if n < 3 {
        return Err(Error::DecompositionNotApplicable { points: n });
    }
    let mut edges: Vec<(usize, usize)> = if n % 2 == 1 {
        (1..n).map(|a| (a, a + 1)).chain([(n, 1)]).collect()
    } else {
        let mut e = vec![(1, 2), (2, 3), (3, 1)];
        e.extend((3..n).map(|a| (a, a + 1)));
        e
    };
    let mut ids: Vec<PathId> = edges
        .drain(..)
        .map(|(a, b)| {
            map.id(PointId(a), PointId(b))
                .expect("complete path map covers every pair")
        })
        .collect();
    ids.sort();
    Ok(ids)
}

/// `Π = [Π^A | Π^B]` with the exact inverse of the square block.
#[derive(Debug, Clone, PartialEq)]
pub struct ABPartition {
    pub a_ids: Vec<PathId>,
    /// Remaining path ids in ascending order.
    pub b_ids: Vec<PathId>,
    /// `J × J`, row per point.
    pub pa: Vec<Vec<u8>>,
    /// `J × (I − J)`, row per point.
    pub pb: Vec<Vec<u8>>,
    pub pa_inverse: Vec<Vec<Rational>>,
    /// `(Π^A)⁻¹ · Π^B`, `J × (I − J)`.
    reduced_b: Vec<Vec<Rational>>,
}

impl ABPartition {
    pub fn points(&self) -> usize {
        self.a_ids.len()
    }

    /// A-components of a path-indexed vector.
    pub fn a_part<T: Copy>(&self, full: &[T]) -> Vec<T> {
        self.a_ids.iter().map(|id| full[id.0 - 1]).collect()
    }

    /// B-components of a path-indexed vector.
    pub fn b_part<T: Copy>(&self, full: &[T]) -> Vec<T> {
        self.b_ids.iter().map(|id| full[id.0 - 1]).collect()
    }
}

pub fn partition_incidence(incidence: &IncidenceMatrix, a_ids: &[PathId]) -> Result<ABPartition> {
    let n = incidence.rows();
    let total = incidence.cols();
    let ids_vec = || a_ids.iter().map(|id| id.0).collect::<Vec<_>>();
    if a_ids.len() != n {
        return Err(Error::InvalidQuery(format!(
            "A-set needs {n} paths, got {}",
            a_ids.len()
        )));
    }
    let mut in_a = vec![false; total];
    for id in a_ids {
        if id.0 < 1 || id.0 > total || in_a[id.0 - 1] {
            return Err(Error::InvalidQuery(format!(
                "A-set {:?} has an invalid or repeated id",
                ids_vec()
            )));
        }
        in_a[id.0 - 1] = true;
    }
    let b_ids: Vec<PathId> = (1..=total).filter(|i| !in_a[i - 1]).map(PathId).collect();
    let block = |ids: &[PathId]| -> Vec<Vec<u8>> {
        (1..=n)
            .map(|j| {
                ids.iter()
                    .map(|&id| incidence.get(PointId(j), id))
                    .collect()
            })
            .collect()
    };
    let pa = block(a_ids);
    let pb = block(&b_ids);
    let int_rows: Vec<Vec<i128>> = pa
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    let inverse = invert(&IntMatrix::from_rows(&int_rows))
        .ok_or_else(|| Error::SingularPartition { a_ids: ids_vec() })?;
    let pa_inverse = inverse.entries;
    let reduced_b = (0..n)
        .map(|r| {
            (0..b_ids.len())
                .map(|c| {
                    (0..n)
                        .filter(|&k| pb[k][c] != 0)
                        .map(|k| pa_inverse[r][k])
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(ABPartition {
        a_ids: a_ids.to_vec(),
        b_ids,
        pa,
        pb,
        pa_inverse,
        reduced_b,
    })
}

/// Splits a path-indexed cost vector into its A and B parts.
pub fn split_cost_vector(
    costs: &[Rational],
    partition: &ABPartition,
) -> (Vec<Rational>, Vec<Rational>) {
    (partition.a_part(costs), partition.b_part(costs))
}

/// Per-point visit coefficients of one vehicle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MCoefficients {
    pub vehicle: usize,
    /// `values[j - 1]` belongs to point `j`.
    pub values: Vec<Rational>,
}

/// `2 · t_a · (Π^A)⁻¹`.
pub fn compute_m(vehicle: usize, t_a: &[Rational], partition: &ABPartition) -> MCoefficients {
    let n = partition.points();
    assert_eq!(t_a.len(), n, "A-cost length");
    let two = Rational::from_integer(2);
    let values = (0..n)
        .map(|c| {
            let dot: Rational = (0..n).map(|r| t_a[r] * partition.pa_inverse[r][c]).sum();
            two * dot
        })
        .collect();
    MCoefficients { vehicle, values }
}

/// Visit coefficients for an odd Hamiltonian-cycle A-set without inverting anything.
///
/// With cycle edges `f_0 = {v, v+1}, f_1 = {v+1, v+2}, …, f_{J−1} = {v−1, v}`
/// taken around the cycle from point `v`, the coefficient of `v` is
/// `t(f_0) − t(f_1) + t(f_2) − … + t(f_{J−1})`. The sum has an odd number of
/// terms, so both edges at `v` enter with a plus sign.
pub fn compute_m_closed_form(
    vehicle: usize,
    t_a: &[Rational],
    a_ids: &[PathId],
    map: &PathIndexMap,
) -> Result<MCoefficients> {
    let n = map.points();
    if n.is_multiple_of(2) {
        return Err(Error::ClosedFormNotApplicable { points: n });
    }
    if n < 3 {
        return Err(Error::DecompositionNotApplicable { points: n });
    }
    assert_eq!(t_a.len(), a_ids.len(), "A-cost length");
    // cycle_cost[s] = cost of edge {s+1, s+2} (cyclically)
    let mut cycle_cost = vec![None; n];
    for (&id, &t) in a_ids.iter().zip(t_a) {
        let (a, b) = map.pair(id);
        let slot = if b.0 == a.0 + 1 {
            a.0 - 1
        } else if a.0 == 1 && b.0 == n {
            n - 1
        } else {
            return Err(Error::InvalidQuery(format!(
                "path {id} = {{{a},{b}}} is not on the cycle 1-2-…-{n}-1"
            )));
        };
        cycle_cost[slot] = Some(t);
    }
    let cycle_cost: Vec<Rational> = cycle_cost
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidQuery("A-set does not cover the whole cycle".into()))?;
    let values = (0..n)
        .map(|v| {
            (0..n).fold(Rational::zero(), |acc, s| {
                let t = cycle_cost[(v + s) % n];
                if s % 2 == 0 {
                    acc + t
                } else {
                    acc - t
                }
            })
        })
        .collect();
    Ok(MCoefficients { vehicle, values })
}

/// `x^A = 2·(Π^A)⁻¹·p − (Π^A)⁻¹·Π^B·x^B`.
pub fn recover_xa(p: &[u8], x_b: &[u8], partition: &ABPartition) -> Vec<Rational> {
    let n = partition.points();
    assert_eq!(p.len(), n, "visit vector length");
    assert_eq!(x_b.len(), partition.b_ids.len(), "B-route length");
    (0..n)
        .map(|r| {
            let visits: Rational = (0..n)
                .filter(|&k| p[k] != 0)
                .map(|k| partition.pa_inverse[r][k] * Rational::from_integer(p[k] as i128))
                .sum();
            let through_b: Rational = x_b
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(c, &x)| partition.reduced_b[r][c] * Rational::from_integer(x as i128))
                .sum();
            Rational::from_integer(2) * visits - through_b
        })
        .collect()
}

/// Path multiplicities of one vehicle's route, with the matching visit vector.
///
/// Entries of `x` are 0 or 1 except for an out-and-back route `1-j-1`, which
/// travels its single path twice and stores 2 there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteVector {
    pub vehicle: usize,
    /// Length I.
    pub x: Vec<u8>,
    /// Length J visit indicator; depot only for an empty route.
    pub p: Vec<u8>,
}

impl RouteVector {
    pub fn empty(vehicle: usize, paths: usize, points: usize) -> Self {
        let mut p = vec![0; points];
        p[DEPOT.0 - 1] = 1;
        RouteVector {
            vehicle,
            x: vec![0; paths],
            p,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x.iter().all(|&v| v == 0)
    }
}

/// The two-part objective, `total = l_star + l_zero`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveBreakdown {
    pub l_star: Rational,
    pub l_zero: Rational,
    pub total: Rational,
}

/// Evaluates `Σ M_k·P_k`, `Σ (T^B_k − T^A_k·(Π^A)⁻¹·Π^B)·x^B_k` and `Σ T_k·x_k`.
///
/// Empty routes contribute nothing to any part. Non-empty routes must satisfy
/// `Π·x = 2·P` with the depot visited.
pub fn objective_split(
    routes: &[RouteVector],
    m: &[MCoefficients],
    partition: &ABPartition,
    incidence: &IncidenceMatrix,
    costs: &[&[Rational]],
) -> Result<ObjectiveBreakdown> {
    assert_eq!(routes.len(), m.len(), "one coefficient vector per route");
    assert_eq!(routes.len(), costs.len(), "one cost vector per route");
    let mut l_star = Rational::zero();
    let mut l_zero = Rational::zero();
    let mut total = Rational::zero();
    for ((route, coeffs), cost) in routes.iter().zip(m).zip(costs) {
        if route.is_empty() {
            continue;
        }
        check_route(route, incidence)?;
        let x_b = partition.b_part(&route.x);
        let (t_a, t_b) = split_cost_vector(cost, partition);
        l_star += coeffs
            .values
            .iter()
            .zip(&route.p)
            .filter(|(_, &p)| p != 0)
            .map(|(m, _)| *m)
            .sum::<Rational>();
        for (c, &x) in x_b.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let through_a: Rational = (0..partition.points())
                .map(|r| t_a[r] * partition.reduced_b[r][c])
                .sum();
            l_zero += (t_b[c] - through_a) * Rational::from_integer(x as i128);
        }
        total += route
            .x
            .iter()
            .zip(cost.iter())
            .filter(|(&x, _)| x != 0)
            .map(|(&x, c)| c * Rational::from_integer(x as i128))
            .sum::<Rational>();
    }
    Ok(ObjectiveBreakdown {
        l_star,
        l_zero,
        total,
    })
}

fn check_route(route: &RouteVector, incidence: &IncidenceMatrix) -> Result<()> {
    let invalid = |reason: String| Error::InvalidRoute {
        vehicle: route.vehicle,
        reason,
    };
    if route.x.len() != incidence.cols() || route.p.len() != incidence.rows() {
        return Err(invalid("dimension mismatch".into()));
    }
    if route.p[DEPOT.0 - 1] != 1 {
        return Err(invalid("route does not visit the depot".into()));
    }
    let x: Vec<i64> = route.x.iter().map(|&v| v as i64).collect();
    let degrees = incidence.apply(&x);
    if let Some(j) = (0..degrees.len()).find(|&j| degrees[j] != 2 * route.p[j] as i64) {
        return Err(invalid(format!(
            "point {} has degree {} but visit flag {}",
            j + 1,
            degrees[j],
            route.p[j]
        )));
    }
    Ok(())
}
