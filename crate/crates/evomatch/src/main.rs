//! Command-line front end: scenario-driven solving, checking, enumeration,
//! and replication of the bundled case studies.
//!
//! Exit codes: 0 success, 1 replication mismatch, 2 input error.

use clap::{Parser, Subcommand, ValueEnum};
use evomatch::equilibrium::{enumerate_nash, SupportCap};
use evomatch::evolution::{
    compare_over_stable, default_epsilon_grid, replicate, Mode, NamedCandidate, ReplicationCase,
};
use evomatch::incomplete::{average_fitness_ii, find_blocking_ii, is_bayes_nash_stable, ALL_CASES};
use evomatch::matching::{
    average_fitness, construct_stable, enumerate_stable, is_nash_stable, BlockingCase,
    ConstructionCase,
};
use evomatch::preference::Role;
use evomatch::rational::{format_rational, parse_rational, Rational};
use evomatch::report;
use evomatch::scenario::{parse_scenario_opts, BuiltProfile, Scenario};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "evomatch",
    version,
    about = "Exact stable-matching solver for preference evolution"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include wall-clock timing in the report (breaks byte-identical output)
    #[arg(long, global = true)]
    timing: bool,
    /// Support-enumeration cap for two-player games
    #[arg(long, global = true)]
    support_cap: Option<usize>,
    /// Accept zero or negative material payoffs regardless of the file flag
    #[arg(long, global = true)]
    allow_nonpositive: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the Nash equilibria of one role-pair game
    SolveNe {
        scenario: PathBuf,
        /// Row side: theta or tau
        #[arg(long, default_value = "theta")]
        row: String,
        /// Column side: theta or tau
        #[arg(long, default_value = "theta")]
        col: String,
        #[arg(long)]
        state: Option<String>,
    },
    /// Verify Nash stability of a complete-information profile
    StableCheck {
        scenario: PathBuf,
        #[arg(long)]
        profile: String,
    },
    /// Enumerate every stable profile class over an epsilon grid
    StableEnum {
        scenario: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// Comma-separated rationals, e.g. 1/10,1/2,9/10
        #[arg(long)]
        epsilon_grid: Option<String>,
    },
    /// Verify Bayes-Nash stability of an incomplete-information profile
    BnCheck {
        scenario: PathBuf,
        #[arg(long)]
        profile: String,
        /// Blocking-case order/subset, e.g. I,II,III,III*
        #[arg(long)]
        case_order: Option<String>,
    },
    /// Average material payoffs of a profile
    Fitness {
        scenario: PathBuf,
        #[arg(long)]
        profile: String,
    },
    /// Evolutionary-stability verdict for the scenario's type pair
    Verdict {
        scenario: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value = "complete")]
        mode: String,
        #[arg(long)]
        epsilon_grid: Option<String>,
    },
    /// Build a stable profile by the constructive existence routine
    Construct {
        scenario: PathBuf,
        #[arg(long)]
        state: Option<String>,
    },
    /// Re-run a bundled case study and compare against pinned values
    Replicate { case: String },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn load(path: &PathBuf, allow_nonpositive: bool) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_scenario_opts(&text, allow_nonpositive).map_err(|e| e.to_string())
}

/// A command-line cap wins over a scenario [params] cap over the default.
fn effective_cap(cli_cap: Option<usize>, scenario_cap: Option<usize>) -> SupportCap {
    let mut cap = SupportCap::default();
    if let Some(c) = cli_cap.or(scenario_cap) {
        cap.two_player = c;
    }
    cap
}

fn pick_state<'a>(s: &'a Scenario, name: &Option<String>) -> Result<&'a str, String> {
    match name {
        Some(n) => s
            .state_decl(n)
            .map(|d| d.name.as_str())
            .ok_or_else(|| format!("unknown state `{n}`")),
        None => s
            .states
            .first()
            .map(|d| d.name.as_str())
            .ok_or_else(|| "scenario has no states".to_string()),
    }
}

fn parse_grid(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',')
        .map(|t| parse_rational(t.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn parse_role(s: &str) -> Result<Role, String> {
    match s {
        "theta" => Ok(Role::Theta),
        "tau" => Ok(Role::Tau),
        other => Err(format!("role must be theta or tau, got `{other}`")),
    }
}

fn parse_cases(s: &str) -> Result<Vec<BlockingCase>, String> {
    s.split(',')
        .map(|t| match t.trim() {
            "I" => Ok(BlockingCase::Complete),
            "II" => Ok(BlockingCase::OneSided),
            "III" => Ok(BlockingCase::TwoSidedConditional),
            "III*" | "IIIstar" => Ok(BlockingCase::TwoSidedStrong),
            other => Err(format!("unknown blocking case `{other}`")),
        })
        .collect()
}

fn emit(format: Format, value: &Value, text_lines: &[String]) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(value).expect("valid json")
        ),
        Format::Text => {
            for line in text_lines {
                println!("{line}");
            }
        }
    }
}

fn with_timing(timing: bool, started: std::time::Instant, mut value: Value) -> Value {
    if timing {
        if let Value::Object(m) = &mut value {
            m.insert(
                "timing_ms".into(),
                json!(started.elapsed().as_millis() as u64),
            );
        }
    }
    value
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();

    let result: Result<(Value, Vec<String>, ExitCode), String> = match &cli.command {
        Command::SolveNe {
            scenario,
            row,
            col,
            state,
        } => (|| {
            let s = load(scenario, cli.allow_nonpositive)?;
            let cap = effective_cap(cli.support_cap, s.params.support_cap);
            let state_name = pick_state(&s, state)?;
            let pop = s.build_state(state_name).map_err(|e| e.to_string())?;
            let (r, c) = (parse_role(row)?, parse_role(col)?);
            let set = enumerate_nash(&pop.typed_game(r, c), &cap).map_err(|e| e.to_string())?;
            let eqs: Vec<Value> = set
                .equilibria
                .iter()
                .map(|p| report::pair(&s.game, p))
                .collect();
            let mut lines = vec![format!(
                "{} equilibria of the ({row}, {col}) game{}",
                eqs.len(),
                if set.degenerate { " [degenerate]" } else { "" }
            )];
            for p in &set.equilibria {
                lines.push(format!("  {}", report::pair(&s.game, p)));
            }
            let warnings = if set.degenerate {
                vec!["equilibrium components present; extreme points listed".to_string()]
            } else {
                vec![]
            };
            let value = report::envelope(
                "solve-ne",
                json!({"scenario": scenario.display().to_string(), "state": state_name, "row": row, "col": col}),
                json!({"count": eqs.len(), "degenerate": set.degenerate, "equilibria": eqs}),
                warnings,
            );
            Ok((value, lines, ExitCode::SUCCESS))
        })(),
        Command::StableCheck { scenario, profile } => (|| {
            let s = load(scenario, cli.allow_nonpositive)?;
            let cap = effective_cap(cli.support_cap, s.params.support_cap);
            let built = s.build_profile(profile).map_err(|e| e.to_string())?;
            let BuiltProfile::Complete(mp) = built else {
                return Err(
                    "stable-check expects a complete-information profile (use bn-check)".into(),
                );
            };
            let (verdict, degenerate) = is_nash_stable(&mp, &cap).map_err(|e| e.to_string())?;
            // multiple blocking opportunities can coexist; report how many
            let witness_count = match &verdict {
                evomatch::matching::StabilityVerdict::Stable => 0,
                _ => {
                    let (all, _) = evomatch::matching::blocking_witnesses(&mp, &cap, None)
                        .map_err(|e| e.to_string())?;
                    all.len()
                }
            };
            use evomatch::matching::{StabilityVerdict, UnstableReason};
            let lines = vec![format!(
                "profile {profile}: {}",
                match &verdict {
                    StabilityVerdict::Stable => "stable".to_string(),
                    StabilityVerdict::Unstable(UnstableReason::Blocking(w)) =>
                        format!("unstable: {}", w.describe()),
                    StabilityVerdict::Unstable(UnstableReason::Internal(_)) =>
                        "unstable: internal best-response violation".to_string(),
                }
            )];
            let warnings = degenerate
                .then(|| {
                    "equilibrium components present; blocking scanned extreme points".to_string()
                })
                .into_iter()
                .collect();
            let mut results = report::verdict_c(&s.game, &verdict);
            if let Value::Object(m) = &mut results {
                m.insert("blocking_opportunities".into(), json!(witness_count));
            }
            let value = report::envelope(
                "stable-check",
                json!({"scenario": scenario.display().to_string(), "profile": profile}),
                results,
                warnings,
            );
            Ok((value, lines, ExitCode::SUCCESS))
        })(),
        Command::StableEnum {
            scenario,
            state,
            epsilon_grid,
        } => (|| {
            let s = load(scenario, cli.allow_nonpositive)?;
            let cap = effective_cap(cli.support_cap, s.params.support_cap);
            let state_name = pick_state(&s, state)?;
            let decl = s.state_decl(state_name).expect("picked state exists");
            let grid = match epsilon_grid {
                Some(g) => parse_grid(g)?,
                None => s
                    .params
                    .epsilon_grid
                    .clone()
                    .unwrap_or_else(|| vec![decl.epsilon.clone()]),
            };
            let base = s.build_state(state_name).map_err(|e| e.to_string())?;
            let mut per_eps = Vec::new();
            let mut lines = Vec::new();
            let mut warnings = Vec::new();
            for eps in &grid {
                let pop = evomatch::matching::PopulationState::new(
                    base.theta.clone(),
                    base.tau.clone(),
                    eps.clone(),
                )
                .map_err(|e| e.to_string())?;
                let out = enumerate_stable(&s.game, &pop, &cap).map_err(|e| e.to_string())?;
                if out.degenerate {
                    warnings.push(format!(
                        "eps={}: components present; classes computed over extreme equilibria",
                        format_rational(eps)
                    ));
                }
                lines.push(format!(
                    "eps={}: {} stable class(es)",
                    format_rational(eps),
                    out.classes.len()
                ));
                for class in &out.classes {
                    lines.push(format!("  {}", class.pattern));
                }
                per_eps.push(json!({
                    "epsilon": report::rational(eps),
                    "classes": out.classes.iter().map(|c| report::stable_class(&s.game, c)).collect::<Vec<_>>(),
                }));
            }
            let value = report::envelope(
                "stable-enum",
                json!({"scenario": scenario.display().to_string(), "state": state_name}),
                json!(per_eps),
                warnings,
            );
            Ok((value, lines, ExitCode::SUCCESS))
        })(),
        Command::BnCheck {
            scenario,
            profile,
            case_order,
        } => (|| {
            let s = load(scenario, cli.allow_nonpositive)?;
            let cap = effective_cap(cli.support_cap, s.params.support_cap);
            let built = s.build_profile(profile).map_err(|e| e.to_string())?;
            let BuiltProfile::Incomplete(mp) = built else {
                return Err("bn-check expects an incomplete-information profile".into());
            };
            let cases = match case_order {
                Some(c) => parse_cases(c)?,
                None => ALL_CASES.to_vec(),
            };
            let (value, lines) = if cases.len() == ALL_CASES.len() {
                let (verdict, degenerate) =
                    is_bayes_nash_stable(&mp, &cap).map_err(|e| e.to_string())?;
                let lines = vec![format!(
                    "profile {profile}: {}",
                    if verdict.is_stable() {
                        "stable"
                    } else {
                        "unstable"
                    }
                )];
                let warnings = degenerate
                    .then(|| "equilibrium components present in the blocking search".to_string())
                    .into_iter()
                    .collect();
                (
                    report::envelope(
                        "bn-check",
                        json!({"scenario": scenario.display().to_string(), "profile": profile}),
                        report::verdict_i(&s.game, &verdict),
                        warnings,
                    ),
                    lines,
                )
            } else {
                let (witness, degenerate) =
                    find_blocking_ii(&mp, &cases, &cap).map_err(|e| e.to_string())?;
                let lines = vec![format!(
                    "profile {profile}: blocking witness {}",
                    if witness.is_some() { "found" } else { "absent" }
                )];
                let results = match &witness {
                    Some(w) => json!({"witness": report::witness(&s.game, w)}),
                    None => json!({"witness": null}),
                };
                let warnings = degenerate
                    .then(|| "equilibrium components present in the blocking search".to_string())
                    .into_iter()
                    .collect();
                (
                    report::envelope(
                        "bn-check",
                        json!({"scenario": scenario.display().to_string(), "profile": profile,
                               "case_order": case_order.clone().unwrap_or_default()}),
                        results,
                        warnings,
                    ),
                    lines,
                )
            };
            Ok((value, lines, ExitCode::SUCCESS))
        })(),
        Command::Fitness { scenario, profile } => (|| {
            let s = load(scenario, cli.allow_nonpositive)?;
            let built = s.build_profile(profile).map_err(|e| e.to_string())?;
            let (g_theta, g_tau) = match &built {
                BuiltProfile::Complete(mp) => average_fitness(&s.game, mp),
                BuiltProfile::Incomplete(mp) => average_fitness_ii(&s.game, mp),
            };
            let lines = vec![format!(
                "G_theta = {}, G_tau = {}",
                format_rational(&g_theta),
                format_rational(&g_tau)
            )];
            let value = report::envelope(
                "fitness",
                json!({"scenario": scenario.display().to_string(), "profile": profile}),
                json!({"g_theta": report::rational(&g_theta), "g_tau": report::rational(&g_tau)}),
                vec![],
            );
            Ok((value, lines, ExitCode::SUCCESS))
        })(),
        Command::Verdict {
            scenario,
            state,
            mode,
            epsilon_grid,
        } => (|| {
            let s = load(scenario, cli.allow_nonpositive)?;
            let cap = effective_cap(cli.support_cap, s.params.support_cap);
            let state_name = pick_state(&s, state)?;
            let pop = s.build_state(state_name).map_err(|e| e.to_string())?;
            let mode = match mode.as_str() {
                "complete" => Mode::Complete,
                "incomplete" => Mode::Incomplete,
                other => {
                    return Err(format!(
                        "mode must be complete or incomplete, got `{other}`"
                    ))
                }
            };
            let grid = match epsilon_grid {
                Some(g) => parse_grid(g)?,
                None => s
                    .params
                    .epsilon_grid
                    .clone()
                    .unwrap_or_else(default_epsilon_grid),
            };
            let mut candidates = Vec::new();
            if mode == Mode::Incomplete {
                for decl in &s.profiles {
                    if let BuiltProfile::Incomplete(mp) =
                        s.build_profile(&decl.name).map_err(|e| e.to_string())?
                    {
                        candidates.push(NamedCandidate {
                            id: decl.name.clone(),
                            profile: mp,
                        });
                    }
                }
            }
            let rep = compare_over_stable(
                &s.game,
                &pop.theta,
                &pop.tau,
                mode,
                &grid,
                &candidates,
                &cap,
            )
            .map_err(|e| e.to_string())?;
            let lines = vec![format!("aggregate: {}", rep.aggregate)];
            let value = report::envelope(
                "verdict",
                json!({"scenario": scenario.display().to_string(), "state": state_name, "mode": mode.to_string()}),
                report::stability_report(&rep),
                rep.warnings.clone(),
            );
            Ok((value, lines, ExitCode::SUCCESS))
        })(),
        Command::Construct { scenario, state } => (|| {
            let s = load(scenario, cli.allow_nonpositive)?;
            let cap = effective_cap(cli.support_cap, s.params.support_cap);
            let state_name = pick_state(&s, state)?;
            let pop = s.build_state(state_name).map_err(|e| e.to_string())?;
            let (mp, case, degenerate) = construct_stable(&pop, &cap).map_err(|e| e.to_string())?;
            let (verdict, _) = is_nash_stable(&mp, &cap).map_err(|e| e.to_string())?;
            let case_name = match case {
                ConstructionCase::Assortative => "assortative",
                ConstructionCase::CrossMatched => "cross_matched",
            };
            let entries: Vec<Value> = mp
                .profile
                .classes()
                .map(|(c, p)| json!({"class": c.to_string(), "play": report::pair(&s.game, p)}))
                .collect();
            let lines = vec![
                format!("construction case: {case_name}"),
                format!(
                    "verified: {}",
                    if verdict.is_stable() {
                        "stable"
                    } else {
                        "NOT STABLE"
                    }
                ),
            ];
            let warnings = degenerate
                .then(|| "components present; construction used extreme equilibria".to_string())
                .into_iter()
                .collect();
            let value = report::envelope(
                "construct",
                json!({"scenario": scenario.display().to_string(), "state": state_name}),
                json!({
                    "case": case_name,
                    "mu": {
                        "theta,theta": report::rational(&mp.config.theta_theta),
                        "theta,tau": report::rational(&mp.config.theta_tau),
                        "tau,theta": report::rational(&mp.config.tau_theta),
                        "tau,tau": report::rational(&mp.config.tau_tau),
                    },
                    "entries": entries,
                    "verified_stable": verdict.is_stable(),
                }),
                warnings,
            );
            Ok((value, lines, ExitCode::SUCCESS))
        })(),
        Command::Replicate { case } => (|| {
            let case = ReplicationCase::parse(case).map_err(|e| e.to_string())?;
            let cap = effective_cap(cli.support_cap, None);
            let outcome = replicate(case, &cap).map_err(|e| e.to_string())?;
            let mut lines = Vec::new();
            for c in &outcome.checks {
                lines.push(format!(
                    "[{}] {}: expected {}, computed {}",
                    if c.pass { "ok" } else { "FAIL" },
                    c.name,
                    c.expected,
                    c.computed
                ));
            }
            lines.push(format!(
                "case {}: {}",
                outcome.case,
                if outcome.pass { "PASS" } else { "FAIL" }
            ));
            let code = if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            let value = report::envelope(
                "replicate",
                json!({"case": outcome.case.to_string()}),
                report::replication(&outcome),
                vec![],
            );
            Ok((value, lines, code))
        })(),
    };

    match result {
        Ok((value, lines, code)) => {
            let value = with_timing(cli.timing, started, value);
            emit(cli.format, &value, &lines);
            code
        }
        Err(msg) => fail(msg),
    }
}
