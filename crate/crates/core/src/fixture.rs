//! The bundled 11-point, 3-vehicle reference network, its three capacity
//! scenarios, and the published results they are compared against.
//!
//! The instance document lives at `crates/core/fixtures/reference_fleet.json`.

use crate::instance::{Capacity, Instance};
use crate::pipeline::{Scenario, ScenarioName};
use crate::rational::{int, parse_rational, Rational};

pub const REFERENCE_DOCUMENT: &str = include_str!("../fixtures/reference_fleet.json");

/// Published assignment coefficients for points 2..=11 (vehicle 1 scale).
pub const PUBLISHED_COEFFICIENTS: [i64; 10] = [11, 1, 14, 8, 8, 12, 5, 3, 6, 9];

pub fn reference_instance() -> Instance {
    Instance::from_json(REFERENCE_DOCUMENT).expect("bundled reference document is valid")
}

fn decimals(values: &[&str]) -> Vec<Rational> {
    values
        .iter()
        .map(|v| parse_rational(v).expect("literal decimal"))
        .collect()
}

fn limits(values: &[i64]) -> Vec<Capacity> {
    values.iter().map(|&v| Capacity::Limit(int(v))).collect()
}

pub fn reference_masses() -> Vec<Rational> {
    decimals(&["0", "2", "1", "3", "1", "2", "2", "3", "4", "0.5", "0.5"])
}

pub fn reference_volumes() -> Vec<Rational> {
    decimals(&["0", "10", "12", "13", "11", "2", "2", "3", "4", "1", "3"])
}

/// The bundled scenario of the given name.
pub fn reference_scenario(name: ScenarioName) -> Scenario {
    match name {
        ScenarioName::Unconstrained => Scenario {
            name,
            mass_capacities: Some(vec![Capacity::Unbounded; 3]),
            volume_capacities: Some(vec![Capacity::Unbounded; 3]),
            demand_mass: None,
            demand_volume: None,
        },
        ScenarioName::Mass => Scenario {
            name,
            mass_capacities: Some(limits(&[3, 5, 15])),
            volume_capacities: Some(vec![Capacity::Unbounded; 3]),
            demand_mass: Some(reference_masses()),
            demand_volume: Some(vec![int(0); 11]),
        },
        ScenarioName::MassVolume => Scenario {
            name,
            mass_capacities: Some(limits(&[10, 15, 18])),
            volume_capacities: Some(limits(&[15, 20, 40])),
            demand_mass: Some(reference_masses()),
            demand_volume: Some(reference_volumes()),
        },
    }
}

/// A published result for one scenario.
#[derive(Debug, Clone)]
pub struct PublishedResult {
    pub scenario: ScenarioName,
    pub total: Rational,
    /// Non-depot points per vehicle; `None` when only routes were published.
    pub partitions: Option<[&'static [usize]; 3]>,
    /// Routes per vehicle, `None` for an unused vehicle.
    pub routes: [Option<&'static str>; 3],
}

pub fn published_result(name: ScenarioName) -> PublishedResult {
    match name {
        ScenarioName::Unconstrained => PublishedResult {
            scenario: name,
            total: int(46),
            partitions: Some([&[2, 3, 4, 5, 6, 7, 8, 9, 10, 11], &[], &[]]),
            routes: [Some("1-11-9-7-10-6-2-4-8-5-3-1"), None, None],
        },
        ScenarioName::Mass => PublishedResult {
            scenario: name,
            total: parse_rational("63.95").expect("literal"),
            partitions: Some([&[7, 10, 11], &[2, 5, 6], &[3, 4, 8, 9]]),
            routes: [Some("1-7-10-11-1"), Some("1-5-2-6-1"), Some("1-3-9-8-4-1")],
        },
        ScenarioName::MassVolume => PublishedResult {
            scenario: name,
            total: parse_rational("72.8").expect("literal"),
            partitions: Some([&[6, 7, 8, 10, 11], &[2, 9], &[3, 4, 5]]),
            routes: [Some("1-11-6-10-7-8-1"), Some("1-9-2-1"), Some("1-3-5-4-1")],
        },
    }
}
