#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use matrix_routing::instance::{canonical_path_map, Capacity, Demand, Instance, PointId, Vehicle};
use matrix_routing::rational::Rational;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Non-negative rational with a small denominator.
pub fn rational(rng: &mut StdRng, max: i64) -> Rational {
    let den = *[1i64, 2, 4, 5, 10].choose(rng).unwrap();
    Rational::new(rng.gen_range(0..=max * den) as i128, den as i128)
}

/// Rational of either sign with a small denominator.
pub fn signed_rational(rng: &mut StdRng, max: i64) -> Rational {
    let den = *[1i64, 2, 4, 5, 10].choose(rng).unwrap();
    Rational::new(rng.gen_range(-max * den..=max * den) as i128, den as i128)
}

/// Symmetric `n × n` table with zero diagonal.
pub fn cost_table(rng: &mut StdRng, n: usize, max: i64) -> Vec<Vec<Rational>> {
    let mut t = vec![vec![Rational::from_integer(0); n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let c = rational(rng, max);
            t[a][b] = c;
            t[b][a] = c;
        }
    }
    t
}

/// Complete instance on the canonical path map with random costs, demands and capacities.
///
/// `tightness` in (0, 1]: each capacity is roughly that fraction of total demand.
pub fn instance(
    rng: &mut StdRng,
    points: usize,
    vehicles: usize,
    tightness: f64,
    volume: bool,
) -> Instance {
    let map = canonical_path_map(points).unwrap();
    let mut demands = vec![Demand::zero()];
    for _ in 1..points {
        demands.push(Demand {
            mass: rational(rng, 5),
            volume: if volume {
                rational(rng, 5)
            } else {
                Rational::from_integer(0)
            },
        });
    }
    let total_mass: Rational = demands.iter().map(|d| d.mass).sum();
    let total_volume: Rational = demands.iter().map(|d| d.volume).sum();
    let cap = |rng: &mut StdRng, total: Rational| {
        let pct = (tightness * 100.0) as i64;
        let jitter = rng.gen_range(pct / 2..=pct.max(1));
        Capacity::Limit(total * Rational::new(jitter as i128, 100))
    };
    let fleet = (1..=vehicles)
        .map(|id| Vehicle {
            id,
            mass_capacity: cap(rng, total_mass),
            volume_capacity: if volume {
                cap(rng, total_volume)
            } else {
                Capacity::Unbounded
            },
            costs: (0..map.len()).map(|_| rational(rng, 12)).collect(),
        })
        .collect();
    Instance::new(map, demands, fleet).unwrap()
}

/// Random subset of `1..=points` containing the depot, of size at least `min`.
pub fn subset_with_depot(rng: &mut StdRng, points: usize, min: usize) -> Vec<PointId> {
    let size = rng.gen_range(min..=points);
    let mut others: Vec<usize> = (2..=points).collect();
    others.shuffle(rng);
    let mut chosen: Vec<PointId> = others[..size - 1].iter().map(|&p| PointId(p)).collect();
    chosen.push(PointId(1));
    chosen.sort();
    chosen
}

/// Random closed tour through `points` (depot first and last).
pub fn random_tour(rng: &mut StdRng, points: &[PointId]) -> Vec<PointId> {
    let mut inner: Vec<PointId> = points.iter().copied().filter(|p| p.0 != 1).collect();
    inner.shuffle(rng);
    let mut seq = vec![PointId(1)];
    seq.extend(inner);
    if seq.len() > 1 {
        seq.push(PointId(1));
    }
    seq
}

/// Random vehicle per point `2..=points`.
pub fn random_owners(rng: &mut StdRng, points: usize, vehicles: usize) -> Vec<usize> {
    (2..=points).map(|_| rng.gen_range(1..=vehicles)).collect()
}
