//! Rendering plans as text or JSON, with stage oracle checks and the comparison
//! against published reference results.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::assignment::{
    assignment_cost, oracle_assignment, vectors_from_owners, AssignmentProblem,
    ORACLE_ASSIGNMENT_LIMIT,
};
use crate::fixture::{
    published_result, reference_instance, reference_scenario, PUBLISHED_COEFFICIENTS,
};
use crate::instance::PointId;
use crate::pipeline::Plan;
use crate::rational::{to_decimal, Rational};
use crate::router::{oracle_tsp, tour_cost, TspProblem, ORACLE_TSP_MAX_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text, json)")),
        }
    }
}

/// One difference (or agreement) between a published result and the recomputation.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub claim: String,
    pub source: String,
    pub computed: String,
    /// `computed − published` where both are numbers.
    pub delta: Option<Rational>,
}

/// Result of re-solving one stage exhaustively.
#[derive(Debug, Clone, PartialEq)]
pub struct StageCheck {
    pub stage: &'static str,
    pub subject: String,
    pub solver: Rational,
    pub oracle: Option<Rational>,
    /// `None` when the stage is too large to enumerate.
    pub matches: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub plan: Plan,
    pub oracle: Option<Plan>,
    pub stage_checks: Vec<StageCheck>,
    pub ledger: Vec<LedgerEntry>,
    pub dump_partition: bool,
}

impl Report {
    /// Builds the report; `check_stages` re-solves assignment and routing exhaustively.
    pub fn new(plan: Plan, oracle: Option<Plan>, check_stages: bool) -> Self {
        let stage_checks = if check_stages {
            stage_checks(&plan)
        } else {
            Vec::new()
        };
        let ledger = ledger(&plan);
        Report {
            plan,
            oracle,
            stage_checks,
            ledger,
            dump_partition: false,
        }
    }

    pub fn with_partition_dump(mut self, dump: bool) -> Self {
        self.dump_partition = dump;
        self
    }

    /// `plan total − oracle total`.
    pub fn oracle_gap(&self) -> Option<Rational> {
        self.oracle.as_ref().map(|o| self.plan.total() - o.total())
    }
}

fn stage_checks(plan: &Plan) -> Vec<StageCheck> {
    let mut checks = Vec::new();
    let problem =
        AssignmentProblem::from_instance(&plan.instance, plan.assignment_coefficients.clone());
    let enumeration = (plan.instance.vehicles() as u128)
        .checked_pow(plan.instance.points() as u32 - 1)
        .unwrap_or(u128::MAX);
    let assignment_oracle = (enumeration <= ORACLE_ASSIGNMENT_LIMIT)
        .then(|| oracle_assignment(&problem).ok())
        .flatten();
    checks.push(StageCheck {
        stage: "assignment",
        subject: "all vehicles".into(),
        solver: plan.assignment.objective,
        oracle: assignment_oracle.as_ref().map(|o| o.objective),
        matches: assignment_oracle.as_ref().map(|o| *o == plan.assignment),
    });
    for tour in &plan.tours {
        let points = tour.points();
        let oracle = (points.len() <= ORACLE_TSP_MAX_POINTS)
            .then(|| {
                TspProblem::new(&plan.instance, tour.vehicle, &points)
                    .and_then(|p| oracle_tsp(&p))
                    .ok()
            })
            .flatten();
        checks.push(StageCheck {
            stage: "routing",
            subject: format!("vehicle {}", tour.vehicle),
            solver: tour.cost,
            oracle: oracle.as_ref().map(|o| o.cost),
            matches: oracle.as_ref().map(|o| o == tour),
        });
    }
    checks
}

fn join(points: &[usize]) -> String {
    points
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_route(route: &str) -> Vec<PointId> {
    route
        .split('-')
        .map(|p| PointId(p.parse().expect("published route is numeric")))
        .collect()
}

fn ledger(plan: &Plan) -> Vec<LedgerEntry> {
    let scenario = reference_scenario(plan.scenario);
    let Ok(reference) = scenario.apply(&reference_instance()) else {
        return Vec::new();
    };
    if plan.instance != reference {
        return Vec::new();
    }
    let published = published_result(plan.scenario);
    let source = format!("published result, scenario {}", plan.scenario);
    let mut entries = vec![LedgerEntry {
        claim: format!("total objective L = {}", to_decimal(&published.total)),
        source: source.clone(),
        computed: to_decimal(&plan.total()),
        delta: Some(plan.total() - published.total),
    }];

    let ours = plan.assignment.partitions();
    if let Some(parts) = published.partitions {
        for (k, part) in parts.iter().enumerate() {
            entries.push(LedgerEntry {
                claim: format!("vehicle {} serves {{{}}}", k + 1, join(part)),
                source: source.clone(),
                computed: format!("{{{}}}", join(&ours[k])),
                delta: None,
            });
        }
        let owners: Vec<usize> = (2..=plan.instance.points())
            .map(|j| {
                parts
                    .iter()
                    .position(|p| p.contains(&j))
                    .map_or(0, |k| k + 1)
            })
            .collect();
        let problem =
            AssignmentProblem::from_instance(&plan.instance, plan.assignment_coefficients.clone());
        let published_cost = assignment_cost(
            &problem,
            &vectors_from_owners(&owners, plan.instance.vehicles()),
        );
        entries.push(LedgerEntry {
            claim: format!(
                "assignment objective of the published partition = {} ({} coefficients)",
                to_decimal(&published_cost),
                plan.m_source.as_str()
            ),
            source: source.clone(),
            computed: to_decimal(&plan.assignment.objective),
            delta: Some(plan.assignment.objective - published_cost),
        });
    }

    for (k, route) in published.routes.iter().enumerate() {
        let tour = &plan.tours[k];
        let Some(route) = route else {
            entries.push(LedgerEntry {
                claim: format!("vehicle {} unused", k + 1),
                source: source.clone(),
                computed: tour.render(),
                delta: Some(tour.cost),
            });
            continue;
        };
        let sequence = parse_route(route);
        let published_cost = TspProblem::new(&plan.instance, k + 1, &sequence)
            .and_then(|p| tour_cost(&p, &sequence))
            .expect("published routes are closed tours");
        entries.push(LedgerEntry {
            claim: format!(
                "vehicle {} route {} (costs {} here)",
                k + 1,
                route,
                to_decimal(&published_cost)
            ),
            source: source.clone(),
            computed: format!("{} costs {}", tour.render(), to_decimal(&tour.cost)),
            delta: Some(tour.cost - published_cost),
        });
    }

    let derived: Vec<Rational> = plan.derived_m[0].values[1..].to_vec();
    let derived_text = derived.iter().map(to_decimal).collect::<Vec<_>>().join(",");
    let published_text = PUBLISHED_COEFFICIENTS
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    entries.push(LedgerEntry {
        claim: format!("vehicle 1 coefficients for points 2..11 = [{published_text}]"),
        source: "published assignment objective".into(),
        computed: format!("[{derived_text}]"),
        delta: None,
    });
    entries
}

fn rational_json(value: &Rational) -> Value {
    let num = *value.numer();
    let den = *value.denom();
    let as_json = |v: i128| match i64::try_from(v) {
        Ok(v) => Value::from(v),
        Err(_) => Value::String(v.to_string()),
    };
    json!({"num": as_json(num), "den": as_json(den), "decimal": to_decimal(value)})
}

fn plan_json(plan: &Plan) -> (Value, Value, Value) {
    let loads = plan.loads();
    let assignment: Vec<Value> = plan
        .assignment
        .vectors
        .iter()
        .zip(&loads)
        .map(|(v, (mass, volume))| {
            json!({
                "vehicle": v.vehicle,
                "points": v.points(),
                "load_mass": rational_json(mass),
                "load_volume": rational_json(volume),
            })
        })
        .collect();
    let routes: Vec<Value> = plan
        .tours
        .iter()
        .map(|t| {
            json!({
                "vehicle": t.vehicle,
                "sequence": t.sequence.iter().map(|p| p.0).collect::<Vec<_>>(),
                "route": t.render(),
                "cost": rational_json(&t.cost),
            })
        })
        .collect();
    let objective = json!({
        "l_star": rational_json(&plan.breakdown.l_star),
        "l_zero": rational_json(&plan.breakdown.l_zero),
        "total": rational_json(&plan.breakdown.total),
    });
    (Value::Array(assignment), Value::Array(routes), objective)
}

fn to_json(report: &Report) -> Value {
    let plan = &report.plan;
    let (assignment, routes, objective) = plan_json(plan);
    let mut doc = Map::new();
    doc.insert("scenario".into(), json!(plan.scenario.as_str()));
    doc.insert("m_source".into(), json!(plan.m_source.as_str()));
    doc.insert("assignment".into(), assignment);
    doc.insert(
        "assignment_objective".into(),
        rational_json(&plan.assignment.objective),
    );
    doc.insert("routes".into(), routes);
    doc.insert("objective".into(), objective);
    let oracle = match &report.oracle {
        None if report.stage_checks.is_empty() => Value::Null,
        _ => {
            let mut o = Map::new();
            if let Some(joint) = &report.oracle {
                let (assignment, routes, objective) = plan_json(joint);
                o.insert("assignment".into(), assignment);
                o.insert("routes".into(), routes);
                o.insert("objective".into(), objective);
                o.insert(
                    "gap".into(),
                    rational_json(&report.oracle_gap().expect("oracle present")),
                );
            }
            let checks: Vec<Value> = report
                .stage_checks
                .iter()
                .map(|c| {
                    json!({
                        "stage": c.stage,
                        "subject": c.subject,
                        "solver": rational_json(&c.solver),
                        "oracle": c.oracle.as_ref().map(rational_json),
                        "matches": c.matches,
                    })
                })
                .collect();
            o.insert("stage_checks".into(), Value::Array(checks));
            Value::Object(o)
        }
    };
    doc.insert("oracle".into(), oracle);
    let ledger: Vec<Value> = report
        .ledger
        .iter()
        .map(|e| {
            json!({
                "claim": e.claim,
                "source": e.source,
                "computed": e.computed,
                "delta": e.delta.as_ref().map(rational_json),
            })
        })
        .collect();
    doc.insert("ledger".into(), Value::Array(ledger));
    if report.dump_partition {
        let part = &plan.partition;
        let inverse: Vec<Value> = part
            .pa_inverse
            .iter()
            .map(|row| Value::Array(row.iter().map(|v| json!(v.to_string())).collect()))
            .collect();
        let coefficients: Vec<Value> = plan
            .derived_m
            .iter()
            .map(|m| {
                json!({
                    "vehicle": m.vehicle,
                    "values": m.values.iter().map(|v| json!(v.to_string())).collect::<Vec<_>>(),
                })
            })
            .collect();
        doc.insert(
            "partition".into(),
            json!({
                "a_ids": part.a_ids.iter().map(|i| i.0).collect::<Vec<_>>(),
                "b_ids": part.b_ids.iter().map(|i| i.0).collect::<Vec<_>>(),
                "pa_inverse": inverse,
                "coefficients": coefficients,
            }),
        );
    }
    Value::Object(doc)
}

fn plan_text(out: &mut String, plan: &Plan) {
    let loads = plan.loads();
    let _ = writeln!(out, "assignment:");
    for (v, (mass, volume)) in plan.assignment.vectors.iter().zip(&loads) {
        let _ = writeln!(
            out,
            "  vehicle {}: points {{{}}}  mass {}  volume {}",
            v.vehicle,
            join(&v.points()),
            to_decimal(mass),
            to_decimal(volume)
        );
    }
    let _ = writeln!(
        out,
        "  assignment objective {} ({})",
        to_decimal(&plan.assignment.objective),
        plan.assignment.objective
    );
    let _ = writeln!(out, "routes:");
    for t in &plan.tours {
        let _ = writeln!(
            out,
            "  vehicle {}: {}  cost {} ({})",
            t.vehicle,
            t.render(),
            to_decimal(&t.cost),
            t.cost
        );
    }
    let b = &plan.breakdown;
    let _ = writeln!(
        out,
        "objective: total {} = L* {} + L0 {}",
        to_decimal(&b.total),
        to_decimal(&b.l_star),
        to_decimal(&b.l_zero)
    );
}

fn to_text(report: &Report) -> String {
    let plan = &report.plan;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {}  m-source {}",
        plan.scenario,
        plan.m_source.as_str()
    );
    plan_text(&mut out, plan);
    if let Some(joint) = &report.oracle {
        let _ = writeln!(out, "\njoint exhaustive optimum:");
        plan_text(&mut out, joint);
        let _ = writeln!(
            out,
            "gap (decomposition − optimum): {}",
            to_decimal(&report.oracle_gap().expect("oracle present"))
        );
    }
    if !report.stage_checks.is_empty() {
        let _ = writeln!(out, "\nstage checks:");
        for c in &report.stage_checks {
            let verdict = match c.matches {
                Some(true) => "match",
                Some(false) => "MISMATCH",
                None => "skipped",
            };
            let _ = writeln!(
                out,
                "  {} {}: solver {} oracle {} {}",
                c.stage,
                c.subject,
                to_decimal(&c.solver),
                c.oracle.as_ref().map_or("-".into(), to_decimal),
                verdict
            );
        }
    }
    if report.dump_partition {
        let part = &plan.partition;
        let _ = writeln!(
            out,
            "\npartition: A = {:?}",
            part.a_ids.iter().map(|i| i.0).collect::<Vec<_>>()
        );
        for m in &plan.derived_m {
            let values = m
                .values
                .iter()
                .map(to_decimal)
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "  M_{} = [{}]", m.vehicle, values);
        }
    }
    if !report.ledger.is_empty() {
        let _ = writeln!(out, "\ncomparison with published results:");
        for e in &report.ledger {
            let delta = e
                .delta
                .as_ref()
                .map_or(String::new(), |d| format!("  delta {}", to_decimal(d)));
            let _ = writeln!(out, "  {}: computed {}{}", e.claim, e.computed, delta);
        }
    }
    out
}

/// Renders the report; identical inputs give byte-identical output.
pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut text =
                serde_json::to_string_pretty(&to_json(report)).expect("report values serialize");
            text.push('\n');
            text
        }
        Format::Text => to_text(report),
    }
}
