//! Machine-readable reports: everything numeric is a `"a/b"` string, output
//! is byte-identical across runs on the same input.

use crate::evolution::{CheckRow, ReplicationOutcome, StabilityReport, VerdictRecord};
use crate::game::{MaterialGame, MixedStrategy, StrategyPair};
use crate::incomplete::{InternalCheckI, StabilityVerdictI, UnstableReasonI};
use crate::matching::{
    BlockingWitness, InternalCheck, StabilityVerdict, StableClass, UnstableReason,
};
use crate::rational::{format_rational, Rational};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level report envelope.
pub fn envelope(command: &str, inputs: Value, results: Value, warnings: Vec<String>) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "warnings": warnings,
    })
}

pub fn rational(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn strategy(game: &MaterialGame, s: &MixedStrategy) -> Value {
    match s.as_pure() {
        Some(i) => Value::String(game.labels()[i].clone()),
        None => Value::Array(s.weights().iter().map(rational).collect()),
    }
}

pub fn pair(game: &MaterialGame, p: &StrategyPair) -> Value {
    json!([strategy(game, &p.first), strategy(game, &p.second)])
}

pub fn witness(game: &MaterialGame, w: &BlockingWitness) -> Value {
    let participants: Vec<Value> = w
        .participants
        .iter()
        .map(|p| {
            json!({
                "agent": p.agent.to_string(),
                "current_utility": rational(&p.current_utility),
                "origin": p.origin.to_string(),
            })
        })
        .collect();
    let mut m = Map::new();
    m.insert("case".into(), json!(w.case.to_string()));
    m.insert("participants".into(), Value::Array(participants));
    m.insert("agreed".into(), pair(game, &w.agreed));
    if let Some((first, second)) = &w.plans {
        let plan = |p: &crate::matching::DeviationPlan| {
            let entries: Vec<Value> = p
                .participants
                .iter()
                .zip(&p.strategies)
                .map(|(role, s)| json!({"type": role.to_string(), "play": strategy(game, s)}))
                .collect();
            Value::Array(entries)
        };
        m.insert("plan".into(), plan(first));
        if let Some(second) = second {
            m.insert("opposite_plan".into(), plan(second));
        }
    }
    Value::Object(m)
}

pub fn verdict_c(game: &MaterialGame, v: &StabilityVerdict) -> Value {
    match v {
        StabilityVerdict::Stable => json!({"verdict": "stable"}),
        StabilityVerdict::Unstable(UnstableReason::Internal(ic)) => {
            let detail = match ic {
                InternalCheck::Violation {
                    class,
                    side,
                    better_response,
                    current_value,
                    better_value,
                } => json!({
                    "class": class.to_string(),
                    "side": side,
                    "better_response": game.labels()[*better_response],
                    "current_value": rational(current_value),
                    "better_value": rational(better_value),
                }),
                InternalCheck::Ok => json!(null),
            };
            json!({"verdict": "unstable", "reason": "internal", "violation": detail})
        }
        StabilityVerdict::Unstable(UnstableReason::Blocking(w)) => {
            json!({"verdict": "unstable", "reason": "blocking", "witness": witness(game, w)})
        }
    }
}

pub fn verdict_i(game: &MaterialGame, v: &StabilityVerdictI) -> Value {
    match v {
        StabilityVerdictI::Stable => json!({"verdict": "stable"}),
        StabilityVerdictI::Unstable(UnstableReasonI::Internal(ic)) => {
            let detail = match ic {
                InternalCheckI::Violation {
                    class,
                    side,
                    hidden_type,
                    better_response,
                    current_value,
                    better_value,
                } => json!({
                    "class": format!("{},{}", class.0, class.1),
                    "side": side,
                    "hidden_type": hidden_type.to_string(),
                    "better_response": game.labels()[*better_response],
                    "current_value": rational(current_value),
                    "better_value": rational(better_value),
                }),
                InternalCheckI::Ok => json!(null),
            };
            json!({"verdict": "unstable", "reason": "internal", "violation": detail})
        }
        StabilityVerdictI::Unstable(UnstableReasonI::Blocking(w)) => {
            json!({"verdict": "unstable", "reason": "blocking", "witness": witness(game, w)})
        }
    }
}

pub fn stable_class(game: &MaterialGame, class: &StableClass) -> Value {
    let entries: Vec<Value> = class
        .profile
        .classes()
        .map(|(c, p)| json!({"class": c.to_string(), "play": pair(game, p)}))
        .collect();
    let fitness: Vec<Value> = class
        .vertex_fitness
        .iter()
        .map(|v| {
            json!({
                "mu_theta_tau": rational(&v.mu_theta_tau),
                "g_theta": rational(&v.g_theta),
                "g_tau": rational(&v.g_tau),
            })
        })
        .collect();
    json!({
        "pattern": class.pattern.to_string(),
        "entries": entries,
        "mu_interval": [rational(&class.mu_lo), rational(&class.mu_hi)],
        "vertex_fitness": fitness,
    })
}

pub fn record(r: &VerdictRecord) -> Value {
    json!({
        "mode": r.mode.to_string(),
        "epsilon": rational(&r.epsilon),
        "profile": r.profile_id,
        "g_theta": rational(&r.g_theta),
        "g_tau": rational(&r.g_tau),
        "comparison": r.comparison.to_string(),
    })
}

pub fn stability_report(report: &StabilityReport) -> Value {
    json!({
        "records": report.records.iter().map(record).collect::<Vec<_>>(),
        "aggregate": report.aggregate.to_string(),
        "skipped_candidates": report.skipped_candidates,
    })
}

pub fn check_row(c: &CheckRow) -> Value {
    json!({
        "name": c.name,
        "expected": c.expected,
        "computed": c.computed,
        "pass": c.pass,
    })
}

pub fn replication(outcome: &ReplicationOutcome) -> Value {
    json!({
        "case": outcome.case.to_string(),
        "checks": outcome.checks.iter().map(check_row).collect::<Vec<_>>(),
        "pass": outcome.pass,
    })
}
