//! Evolutionary verdicts: fitness comparisons across stable profiles and
//! replication of the bundled case studies.

use crate::cases;
use crate::equilibrium::SupportCap;
use crate::game::{MaterialGame, StrategyPair};
use crate::incomplete::{
    average_fitness_ii, check_bayes_nash, find_blocking_ii, is_bayes_nash_stable, IncompleteError,
    InternalCheckI, MatchingProfileI, StabilityVerdictI, UnstableReasonI,
};
use crate::matching::{
    average_fitness, construct_stable, enumerate_stable, is_nash_stable, BlockingCase, ClassC,
    ConstructionCase, MatchingConfiguration, MatchingError, MatchingProfileC, PopulationState,
    StabilityVerdict, StrategyProfileC, UnstableReason,
};
use crate::preference::{
    build_adversary_type, build_type, AdversaryParams, AdversaryRecipe, FamilyTag, PreferenceType,
    Role,
};
use crate::rational::{format_rational, frac, rat, Rational};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvolutionError {
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Incomplete(#[from] IncompleteError),
    #[error("incomplete mode needs a nonempty candidate family")]
    NoCandidates,
    #[error("unknown replication case `{0}`")]
    UnknownCase(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Complete,
    Incomplete,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Complete => write!(f, "complete"),
            Mode::Incomplete => write!(f, "incomplete"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Gt,
    Eq,
    Lt,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparison::Gt => write!(f, "gt"),
            Comparison::Eq => write!(f, "eq"),
            Comparison::Lt => write!(f, "lt"),
        }
    }
}

/// Fitness comparison at one stable profile instance.
#[derive(Debug, Clone)]
pub struct VerdictRecord {
    pub mode: Mode,
    pub epsilon: Rational,
    pub profile_id: String,
    pub g_theta: Rational,
    pub g_tau: Rational,
    pub comparison: Comparison,
}

impl VerdictRecord {
    fn new(
        mode: Mode,
        epsilon: Rational,
        profile_id: String,
        g_theta: Rational,
        g_tau: Rational,
    ) -> Self {
        let comparison = match g_theta.cmp(&g_tau) {
            std::cmp::Ordering::Greater => Comparison::Gt,
            std::cmp::Ordering::Equal => Comparison::Eq,
            std::cmp::Ordering::Less => Comparison::Lt,
        };
        VerdictRecord {
            mode,
            epsilon,
            profile_id,
            g_theta,
            g_tau,
            comparison,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    ThetaEsAgainstTau,
    TauEsAgainstTheta,
    NeutralTie,
    Mixed,
    Inconclusive,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Aggregate::ThetaEsAgainstTau => "theta_ES_against_tau",
            Aggregate::TauEsAgainstTheta => "tau_ES_against_theta",
            Aggregate::NeutralTie => "neutral_tie",
            Aggregate::Mixed => "mixed",
            Aggregate::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

/// Derive the aggregate verdict from the records alone.
pub fn aggregate_records(records: &[VerdictRecord]) -> Aggregate {
    if records.is_empty() {
        return Aggregate::Inconclusive;
    }
    let any_gt = records.iter().any(|r| r.comparison == Comparison::Gt);
    let any_lt = records.iter().any(|r| r.comparison == Comparison::Lt);
    match (any_gt, any_lt) {
        (false, false) => Aggregate::NeutralTie,
        (true, false) => Aggregate::ThetaEsAgainstTau,
        (false, true) => Aggregate::TauEsAgainstTheta,
        (true, true) => Aggregate::Mixed,
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub records: Vec<VerdictRecord>,
    pub aggregate: Aggregate,
    pub warnings: Vec<String>,
    /// Incomplete-mode candidates that were supplied but not stable.
    pub skipped_candidates: Vec<String>,
}

/// True when some loser-best equilibrium of the type's self-game is
/// materially inefficient.
pub fn same_type_inefficiency(
    ptype: &PreferenceType,
    game: &MaterialGame,
    cap: &SupportCap,
) -> Result<(bool, bool), EvolutionError> {
    let lb = crate::equilibrium::loser_best_set(ptype, cap).map_err(MatchingError::from)?;
    let (s_bar, _) = crate::game::efficient_pairs(game);
    let inefficient = lb
        .pairs
        .iter()
        .any(|p| crate::game::total_payoff(game, p) < s_bar);
    Ok((inefficient, lb.degenerate))
}

/// A named incomplete-information candidate profile.
#[derive(Debug, Clone)]
pub struct NamedCandidate {
    pub id: String,
    pub profile: MatchingProfileI,
}

/// Record fitness comparisons over every stable profile instance.
///
/// Complete mode enumerates stable classes per epsilon and evaluates fitness
/// at the feasible-interval endpoints. Incomplete mode verifies the supplied
/// candidates and records the stable ones; its aggregate is therefore a
/// statement over the supplied family only.
pub fn compare_over_stable(
    game: &MaterialGame,
    theta: &PreferenceType,
    tau: &PreferenceType,
    mode: Mode,
    epsilons: &[Rational],
    candidates: &[NamedCandidate],
    cap: &SupportCap,
) -> Result<StabilityReport, EvolutionError> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut skipped = Vec::new();
    match mode {
        Mode::Complete => {
            for eps in epsilons {
                let state = PopulationState::new(theta.clone(), tau.clone(), eps.clone())?;
                let out = enumerate_stable(game, &state, cap)?;
                if out.degenerate {
                    warnings.push(format!(
                        "eps={}: equilibrium components encountered; stable classes computed over extreme equilibria",
                        format_rational(eps)
                    ));
                }
                for (ci, class) in out.classes.iter().enumerate() {
                    for v in &class.vertex_fitness {
                        records.push(VerdictRecord::new(
                            Mode::Complete,
                            eps.clone(),
                            format!(
                                "eps={} class#{} {} mu_theta_tau={}",
                                format_rational(eps),
                                ci,
                                class.pattern,
                                format_rational(&v.mu_theta_tau)
                            ),
                            v.g_theta.clone(),
                            v.g_tau.clone(),
                        ));
                    }
                }
            }
        }
        Mode::Incomplete => {
            if candidates.is_empty() {
                return Err(EvolutionError::NoCandidates);
            }
            for c in candidates {
                let (verdict, degenerate) = is_bayes_nash_stable(&c.profile, cap)?;
                if degenerate {
                    warnings.push(format!(
                        "candidate {}: equilibrium components encountered in the blocking search",
                        c.id
                    ));
                }
                if verdict.is_stable() {
                    let (g_theta, g_tau) = average_fitness_ii(game, &c.profile);
                    records.push(VerdictRecord::new(
                        Mode::Incomplete,
                        c.profile.state.epsilon.clone(),
                        c.id.clone(),
                        g_theta,
                        g_tau,
                    ));
                } else {
                    skipped.push(c.id.clone());
                }
            }
            warnings
                .push("incomplete-mode aggregate ranges over the supplied candidates only".into());
        }
    }
    let aggregate = aggregate_records(&records);
    Ok(StabilityReport {
        records,
        aggregate,
        warnings,
        skipped_candidates: skipped,
    })
}

/// Evolutionary-stability verdict for the pair, reporting which direction (if
/// either) dominates over the examined stable profiles.
pub fn evo_verdict(
    game: &MaterialGame,
    theta: &PreferenceType,
    tau: &PreferenceType,
    mode: Mode,
    epsilons: &[Rational],
    candidates: &[NamedCandidate],
    cap: &SupportCap,
) -> Result<StabilityReport, EvolutionError> {
    compare_over_stable(game, theta, tau, mode, epsilons, candidates, cap)
}

/// The default epsilon grid 1/10 .. 9/10.
pub fn default_epsilon_grid() -> Vec<Rational> {
    (1..=9).map(|k| frac(k, 10)).collect()
}

/// One expected-vs-computed comparison row of a replication run.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

fn row(
    name: impl Into<String>,
    expected: impl fmt::Display,
    computed: impl fmt::Display,
) -> CheckRow {
    let expected = expected.to_string();
    let computed = computed.to_string();
    CheckRow {
        name: name.into(),
        pass: expected == computed,
        expected,
        computed,
    }
}

#[derive(Debug, Clone)]
pub struct ReplicationOutcome {
    pub case: ReplicationCase,
    pub checks: Vec<CheckRow>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplicationCase {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    B2,
    B4,
    PdTable2,
    Prop2Demo,
    Prop5Demo,
    B3Demo,
    B1Construct,
}

impl ReplicationCase {
    pub const ALL: [ReplicationCase; 11] = [
        ReplicationCase::Ex1,
        ReplicationCase::Ex2,
        ReplicationCase::Ex3,
        ReplicationCase::Ex4,
        ReplicationCase::B2,
        ReplicationCase::B4,
        ReplicationCase::PdTable2,
        ReplicationCase::Prop2Demo,
        ReplicationCase::Prop5Demo,
        ReplicationCase::B3Demo,
        ReplicationCase::B1Construct,
    ];

    pub fn parse(s: &str) -> Result<Self, EvolutionError> {
        Ok(match s {
            "ex1" => ReplicationCase::Ex1,
            "ex2" => ReplicationCase::Ex2,
            "ex3" => ReplicationCase::Ex3,
            "ex4" => ReplicationCase::Ex4,
            "b2" => ReplicationCase::B2,
            "b4" => ReplicationCase::B4,
            "pd_table2" => ReplicationCase::PdTable2,
            "prop2_demo" => ReplicationCase::Prop2Demo,
            "prop5_demo" => ReplicationCase::Prop5Demo,
            "b3_demo" => ReplicationCase::B3Demo,
            "b1_construct" => ReplicationCase::B1Construct,
            other => return Err(EvolutionError::UnknownCase(other.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ReplicationCase::Ex1 => "ex1",
            ReplicationCase::Ex2 => "ex2",
            ReplicationCase::Ex3 => "ex3",
            ReplicationCase::Ex4 => "ex4",
            ReplicationCase::B2 => "b2",
            ReplicationCase::B4 => "b4",
            ReplicationCase::PdTable2 => "pd_table2",
            ReplicationCase::Prop2Demo => "prop2_demo",
            ReplicationCase::Prop5Demo => "prop5_demo",
            ReplicationCase::B3Demo => "b3_demo",
            ReplicationCase::B1Construct => "b1_construct",
        }
    }
}

impl fmt::Display for ReplicationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Run one bundled replication case, comparing every computed quantity
/// against its pinned expected value.
pub fn replicate(
    case: ReplicationCase,
    cap: &SupportCap,
) -> Result<ReplicationOutcome, EvolutionError> {
    let checks = match case {
        ReplicationCase::Ex1 => replicate_ex1(cap)?,
        ReplicationCase::Ex2 => replicate_ex2(cap)?,
        ReplicationCase::Ex3 => replicate_ex3(cap)?,
        ReplicationCase::Ex4 => replicate_ex4(cap)?,
        ReplicationCase::B2 => replicate_b2(cap)?,
        ReplicationCase::B4 => replicate_b4(cap)?,
        ReplicationCase::PdTable2 => replicate_pd(cap)?,
        ReplicationCase::Prop2Demo => replicate_prop2(cap)?,
        ReplicationCase::Prop5Demo => replicate_prop5(cap)?,
        ReplicationCase::B3Demo => replicate_b3(cap)?,
        ReplicationCase::B1Construct => replicate_b1(cap)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(ReplicationOutcome { case, checks, pass })
}

fn verdict_name_c(v: &StabilityVerdict) -> &'static str {
    match v {
        StabilityVerdict::Stable => "stable",
        StabilityVerdict::Unstable(UnstableReason::Internal(_)) => "unstable(internal)",
        StabilityVerdict::Unstable(UnstableReason::Blocking(_)) => "unstable(blocking)",
    }
}

fn verdict_name_i(v: &StabilityVerdictI) -> &'static str {
    match v {
        StabilityVerdictI::Stable => "stable",
        StabilityVerdictI::Unstable(UnstableReasonI::Internal(_)) => "unstable(internal)",
        StabilityVerdictI::Unstable(UnstableReasonI::Blocking(_)) => "unstable(blocking)",
    }
}

fn replicate_ex1(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::bos_game();
    let (theta, tau) = cases::illustrative_types(&g);
    let mut checks = Vec::new();

    let self_theta =
        crate::equilibrium::enumerate_nash(&crate::equilibrium::TypedGame::self_game(&theta), cap)
            .map_err(MatchingError::from)?;
    checks.push(row(
        "theta self-game equilibrium count",
        3,
        self_theta.equilibria.len(),
    ));

    for eps in default_epsilon_grid() {
        let state = PopulationState::new(theta.clone(), tau.clone(), eps.clone())?;
        let out = enumerate_stable(&g, &state, cap)?;
        checks.push(row(
            format!("stable classes at eps={}", format_rational(&eps)),
            1,
            out.classes.len(),
        ));
        if let Some(class) = out.classes.first() {
            checks.push(row(
                format!("pattern at eps={}", format_rational(&eps)),
                "{theta,theta tau,tau}",
                class.pattern.to_string(),
            ));
            let tt_ok =
                class.profile.entry(ClassC::ThetaTheta) == Some(&StrategyPair::pure(2, 0, 1));
            let cc_ok = class.profile.entry(ClassC::TauTau) == Some(&StrategyPair::pure(2, 0, 0));
            checks.push(row(
                format!("entries at eps={}", format_rational(&eps)),
                "(A,B)/(A,A)",
                if tt_ok && cc_ok {
                    "(A,B)/(A,A)"
                } else {
                    "other"
                },
            ));
        }
    }

    // the mixed same-type profile is rejected by a pair that reaches 2 > 6/5
    let state = PopulationState::new(theta.clone(), tau.clone(), frac(1, 2))?;
    let m = crate::game::MixedStrategy::new(vec![frac(2, 5), frac(3, 5)]).unwrap();
    let mp = MatchingProfileC::new(
        state,
        MatchingConfiguration::assortative(),
        StrategyProfileC::new(vec![
            (ClassC::ThetaTheta, StrategyPair::new(m.clone(), m)),
            (ClassC::TauTau, StrategyPair::pure(2, 0, 0)),
        ]),
    )?;
    let (verdict, _) = is_nash_stable(&mp, cap)?;
    match &verdict {
        StabilityVerdict::Unstable(UnstableReason::Blocking(w)) => {
            checks.push(row(
                "mixed profile verdict",
                "unstable(blocking)",
                verdict_name_c(&verdict),
            ));
            checks.push(row(
                "blocking pair agreement",
                "(A,B)",
                if w.agreed == StrategyPair::pure(2, 0, 1) {
                    "(A,B)"
                } else {
                    "other"
                },
            ));
            checks.push(row(
                "blocked utility",
                "6/5",
                format_rational(&w.participants[0].current_utility),
            ));
            let new_utility =
                mp.state
                    .utility(Role::Theta, &w.agreed.first, Role::Theta, &w.agreed.second);
            checks.push(row("achieved utility", 2, format_rational(&new_utility)));
        }
        other => checks.push(row(
            "mixed profile verdict",
            "unstable(blocking)",
            verdict_name_c(other),
        )),
    }
    Ok(checks)
}

fn ex2_cross_profile(lambda: i64) -> Result<MatchingProfileC, EvolutionError> {
    let g = cases::homophily_threshold_game();
    let theta = build_type(
        &g,
        "theta",
        FamilyTag::HomophilicSelfish {
            lambda: rat(lambda),
        },
        None,
    )
    .expect("family");
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::Ex2Mutant,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    let state = PopulationState::new(theta, tau, frac(1, 2))?;
    let config = MatchingConfiguration::from_cross_share(&frac(1, 2), rat(1))?;
    let profile = StrategyProfileC::new(vec![(ClassC::ThetaTau, StrategyPair::pure(3, 0, 1))]);
    Ok(MatchingProfileC::new(state, config, profile)?)
}

fn replicate_ex2(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::homophily_threshold_game();
    let mut checks = Vec::new();

    // lambda = 1: the fully cross-matched profile on (A,B) is stable and
    // leaves the incumbents behind.
    let mp = ex2_cross_profile(1)?;
    let (verdict, _) = is_nash_stable(&mp, cap)?;
    checks.push(row(
        "lambda=1 cross profile",
        "stable",
        verdict_name_c(&verdict),
    ));
    let (g_theta, g_tau) = average_fitness(&g, &mp);
    checks.push(row("lambda=1 cross G_tau", 5, format_rational(&g_tau)));
    checks.push(row("lambda=1 cross G_theta", 3, format_rational(&g_theta)));

    let state = &mp.state;
    let out = enumerate_stable(&g, state, cap)?;
    let mut cross_vertex_ok = true;
    let mut saw_cross = false;
    for class in &out.classes {
        if !class.pattern.theta_tau {
            continue;
        }
        if class.profile.entry(ClassC::ThetaTau) != Some(&StrategyPair::pure(3, 0, 1)) {
            continue;
        }
        saw_cross = true;
        for v in &class.vertex_fitness {
            if v.mu_theta_tau > rat(0) && !(v.g_tau == rat(5) && v.g_theta < v.g_tau) {
                cross_vertex_ok = false;
            }
        }
    }
    checks.push(row("lambda=1 stable cross class found", true, saw_cross));
    checks.push(row(
        "lambda=1 G_tau=5 > G_theta at cross vertices",
        true,
        cross_vertex_ok,
    ));
    let saw_assortative = out
        .classes
        .iter()
        .any(|c| c.pattern.theta_theta && c.pattern.tau_tau && !c.pattern.theta_tau);
    checks.push(row(
        "lambda=1 assortative class present",
        true,
        saw_assortative,
    ));
    let theta1 = build_type(
        &g,
        "theta",
        FamilyTag::HomophilicSelfish { lambda: rat(1) },
        None,
    )
    .expect("family");
    let tau1 = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::Ex2Mutant,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    let report1 = evo_verdict(
        &g,
        &theta1,
        &tau1,
        Mode::Complete,
        &default_epsilon_grid(),
        &[],
        cap,
    )?;
    checks.push(row(
        "lambda=1 aggregate",
        Aggregate::TauEsAgainstTheta,
        report1.aggregate,
    ));

    // lambda = 9: the same profile is blocked; the incumbents' own-type
    // rematch pays 2 + 9 > 3.
    let mp9 = ex2_cross_profile(9)?;
    let (verdict9, _) = is_nash_stable(&mp9, cap)?;
    match &verdict9 {
        StabilityVerdict::Unstable(UnstableReason::Blocking(w)) => {
            checks.push(row(
                "lambda=9 cross profile",
                "unstable(blocking)",
                verdict_name_c(&verdict9),
            ));
            checks.push(row(
                "lambda=9 blocked current utility",
                3,
                format_rational(&w.participants[0].current_utility),
            ));
            let loser = mp9
                .state
                .utility(Role::Theta, &w.agreed.first, Role::Theta, &w.agreed.second)
                .min(mp9.state.utility(
                    Role::Theta,
                    &w.agreed.second,
                    Role::Theta,
                    &w.agreed.first,
                ));
            checks.push(row(
                "lambda=9 rematch loser utility",
                11,
                format_rational(&loser),
            ));
        }
        other => checks.push(row(
            "lambda=9 cross profile",
            "unstable(blocking)",
            verdict_name_c(other),
        )),
    }

    // lambda = 9 verdict over the grid: a neutral tie, both sides assortative
    // on the efficient pair.
    let theta9 = build_type(
        &g,
        "theta",
        FamilyTag::HomophilicSelfish { lambda: rat(9) },
        None,
    )
    .expect("family");
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::Ex2Mutant,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    let report = evo_verdict(
        &g,
        &theta9,
        &tau,
        Mode::Complete,
        &default_epsilon_grid(),
        &[],
        cap,
    )?;
    checks.push(row(
        "lambda=9 aggregate",
        Aggregate::NeutralTie,
        report.aggregate,
    ));
    Ok(checks)
}

fn replicate_ex3(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::not_loser_best_game();
    let mut checks = Vec::new();
    for (label, fam) in [
        (
            "homophilic selfish",
            FamilyTag::HomophilicSelfish { lambda: rat(1) },
        ),
        ("parochial selfish", FamilyTag::ParochialSelfish),
    ] {
        let theta = build_type(&g, "theta", fam, None).expect("family");
        let tau = build_adversary_type(
            &g,
            "tau",
            AdversaryRecipe::Ex3Mutant,
            &AdversaryParams::default(),
        )
        .expect("recipe");
        for eps in [frac(1, 4), frac(1, 2), frac(3, 4)] {
            let state = PopulationState::new(theta.clone(), tau.clone(), eps.clone())?;
            let out = enumerate_stable(&g, &state, cap)?;
            checks.push(row(
                format!("{label}: stable classes at eps={}", format_rational(&eps)),
                1,
                out.classes.len(),
            ));
            if let Some(class) = out.classes.first() {
                let entries_ok = class.profile.entry(ClassC::ThetaTheta)
                    == Some(&StrategyPair::pure(3, 1, 1))
                    && class.profile.entry(ClassC::TauTau) == Some(&StrategyPair::pure(3, 0, 2));
                checks.push(row(
                    format!("{label}: entries at eps={}", format_rational(&eps)),
                    "(B,B)/(A,C)",
                    if entries_ok { "(B,B)/(A,C)" } else { "other" },
                ));
                let v = &class.vertex_fitness[0];
                checks.push(row(
                    format!("{label}: G at eps={}", format_rational(&eps)),
                    "(3, 5)",
                    format!(
                        "({}, {})",
                        format_rational(&v.g_theta),
                        format_rational(&v.g_tau)
                    ),
                ));
            }
        }
        let report = evo_verdict(
            &g,
            &theta,
            &tau,
            Mode::Complete,
            &default_epsilon_grid(),
            &[],
            cap,
        )?;
        checks.push(row(
            format!("{label}: aggregate"),
            Aggregate::TauEsAgainstTheta,
            report.aggregate,
        ));
    }
    Ok(checks)
}

fn replicate_ex4(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::bos_game();
    let mut checks = Vec::new();
    let mp = cases::coordination_seeker_profile(rat(1), frac(1, 4), frac(1, 100))?;
    let (verdict, _) = is_bayes_nash_stable(&mp, cap)?;
    checks.push(row(
        "profile at delta=1/100",
        "stable",
        verdict_name_i(&verdict),
    ));
    let (g_theta, g_tau) = average_fitness_ii(&g, &mp);
    checks.push(row("G_theta", "1193/597", format_rational(&g_theta)));
    checks.push(row("G_tau", "399/199", format_rational(&g_tau)));
    checks.push(row(
        "G_theta < 2 < G_tau",
        true,
        g_theta < rat(2) && rat(2) < g_tau,
    ));

    let mp_big = cases::coordination_seeker_profile(rat(1), frac(1, 4), frac(1, 2))?;
    let internal = check_bayes_nash(&mp_big);
    checks.push(row(
        "internal check at delta=1/2",
        "violation",
        if matches!(internal, InternalCheckI::Ok) {
            "ok"
        } else {
            "violation"
        },
    ));
    Ok(checks)
}

fn replicate_b2(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let mut checks = Vec::new();
    let mp = cases::pooled_coordination_profile()?;
    let conditional_only = [
        BlockingCase::Complete,
        BlockingCase::OneSided,
        BlockingCase::TwoSidedConditional,
    ];
    let (none_found, _) = find_blocking_ii(&mp, &conditional_only, cap)?;
    checks.push(row(
        "cases I-III find a witness",
        false,
        none_found.is_some(),
    ));
    let (strong, _) = find_blocking_ii(&mp, &[BlockingCase::TwoSidedStrong], cap)?;
    match strong {
        Some(w) => {
            checks.push(row("case III* witness", "present", "present"));
            checks.push(row(
                "witness agreement",
                "(A,A)",
                if w.agreed == StrategyPair::pure(2, 0, 0) {
                    "(A,A)"
                } else {
                    "other"
                },
            ));
            checks.push(row(
                "witness participants",
                "utheta/utheta",
                format!("{}/{}", w.participants[0].agent, w.participants[1].agent),
            ));
        }
        None => checks.push(row("case III* witness", "present", "absent")),
    }
    Ok(checks)
}

fn replicate_b4(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::inefficient_nash_game();
    let mut checks = Vec::new();
    let mp = cases::antiparochial_profile()?;
    checks.push(row(
        "q_utheta",
        "4/5",
        format_rational(&mp.q().expect("p_u > 0").q_utheta),
    ));
    let (verdict, _) = is_bayes_nash_stable(&mp, cap)?;
    checks.push(row("verdict", "stable", verdict_name_i(&verdict)));
    let (g_theta, g_tau) = average_fitness_ii(&g, &mp);
    checks.push(row("G_theta == 78/9", true, g_theta == frac(78, 9)));
    checks.push(row("G_tau == 79/9", true, g_tau == frac(79, 9)));
    checks.push(row("G_theta < G_tau", true, g_theta < g_tau));
    Ok(checks)
}

fn replicate_pd(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::prisoners_dilemma(3, 1, 4, 2);
    let mut checks = Vec::new();
    let selfish = build_type(&g, "selfish", FamilyTag::Selfish, None).expect("family");
    let (inefficient, _) = same_type_inefficiency(&selfish, &g, cap)?;
    checks.push(row(
        "selfish exhibits same-type inefficiency",
        true,
        inefficient,
    ));

    let pe = build_type(&g, "theta", FamilyTag::ParochialEfficient, None).expect("family");
    let report = evo_verdict(
        &g,
        &pe,
        &selfish,
        Mode::Complete,
        &default_epsilon_grid(),
        &[],
        cap,
    )?;
    checks.push(row(
        "aggregate",
        Aggregate::ThetaEsAgainstTau,
        report.aggregate,
    ));
    let fitness_ok = report
        .records
        .iter()
        .all(|r| r.g_theta == rat(3) && r.g_tau == rat(2));
    checks.push(row("records all (3, 2)", true, fitness_ok));
    Ok(checks)
}

fn replicate_prop2(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::bos_game();
    let mut checks = Vec::new();
    let selfish = build_type(&g, "theta", FamilyTag::Selfish, None).expect("family");
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::Prop2AdvantageEfficient,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    let report = evo_verdict(
        &g,
        &selfish,
        &tau,
        Mode::Complete,
        &default_epsilon_grid(),
        &[],
        cap,
    )?;
    checks.push(row(
        "aggregate",
        Aggregate::TauEsAgainstTheta,
        report.aggregate,
    ));
    let strict_exists = report
        .records
        .iter()
        .any(|r| r.comparison == Comparison::Lt);
    checks.push(row("a strict record exists", true, strict_exists));
    Ok(checks)
}

fn replicate_prop5(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::bos_game();
    let mut checks = Vec::new();
    let mp = cases::anticoordinator_profile(rat(1), frac(1, 4))?;
    let (verdict, _) = is_bayes_nash_stable(&mp, cap)?;
    checks.push(row(
        "strict-profile verdict",
        "stable",
        verdict_name_i(&verdict),
    ));
    let (g_theta, g_tau) = average_fitness_ii(&g, &mp);
    checks.push(row("G_theta", "17/9", format_rational(&g_theta)));
    checks.push(row("G_tau", "15/7", format_rational(&g_tau)));
    checks.push(row("G_tau > G_theta", true, g_tau > g_theta));
    Ok(checks)
}

fn replicate_b3(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let g = cases::bos_game();
    let mut checks = Vec::new();
    let selfish = build_type(&g, "theta", FamilyTag::Selfish, None).expect("family");
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::Prop6AdvantageOnlyEfficient,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    let report = evo_verdict(
        &g,
        &selfish,
        &tau,
        Mode::Complete,
        &default_epsilon_grid(),
        &[],
        cap,
    )?;
    checks.push(row(
        "aggregate",
        Aggregate::TauEsAgainstTheta,
        report.aggregate,
    ));
    // the advantaged cross records pin G = (1, 3)
    let has_one_three = report
        .records
        .iter()
        .any(|r| r.g_theta == rat(1) && r.g_tau == rat(3));
    checks.push(row(
        "cross vertex records (1, 3) present",
        true,
        has_one_three,
    ));
    Ok(checks)
}

fn replicate_b1(cap: &SupportCap) -> Result<Vec<CheckRow>, EvolutionError> {
    let mut checks = Vec::new();

    let g1 = cases::bos_game();
    let (theta1, tau1) = cases::illustrative_types(&g1);
    let state1 = PopulationState::new(theta1, tau1, frac(1, 4))?;
    let (mp1, case1, _) = construct_stable(&state1, cap)?;
    checks.push(row(
        "illustrative pair: case",
        "assortative",
        match case1 {
            ConstructionCase::Assortative => "assortative",
            ConstructionCase::CrossMatched => "cross",
        },
    ));
    let (v1, _) = is_nash_stable(&mp1, cap)?;
    checks.push(row(
        "illustrative pair: verdict",
        "stable",
        verdict_name_c(&v1),
    ));
    let entries_ok = mp1.profile.entry(ClassC::ThetaTheta) == Some(&StrategyPair::pure(2, 0, 1))
        && mp1.profile.entry(ClassC::TauTau) == Some(&StrategyPair::pure(2, 0, 0));
    checks.push(row(
        "illustrative pair: entries",
        "(A,B)/(A,A)",
        if entries_ok { "(A,B)/(A,A)" } else { "other" },
    ));

    let g3 = cases::not_loser_best_game();
    let theta3 = build_type(
        &g3,
        "theta",
        FamilyTag::HomophilicSelfish { lambda: rat(1) },
        None,
    )
    .expect("family");
    let tau3 = build_adversary_type(
        &g3,
        "tau",
        AdversaryRecipe::Ex3Mutant,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    let state3 = PopulationState::new(theta3, tau3, frac(1, 3))?;
    let (mp3, case3, _) = construct_stable(&state3, cap)?;
    checks.push(row(
        "mutant pair: case",
        "assortative",
        match case3 {
            ConstructionCase::Assortative => "assortative",
            ConstructionCase::CrossMatched => "cross",
        },
    ));
    let (v3, _) = is_nash_stable(&mp3, cap)?;
    checks.push(row("mutant pair: verdict", "stable", verdict_name_c(&v3)));

    let gpd = cases::prisoners_dilemma(3, 1, 4, 2);
    let selfish = build_type(&gpd, "s", FamilyTag::Selfish, None).expect("family");
    let statepd = PopulationState::new(selfish.clone(), selfish, frac(1, 4))?;
    let (mppd, casepd, _) = construct_stable(&statepd, cap)?;
    checks.push(row(
        "selfish pair: case",
        "cross",
        match casepd {
            ConstructionCase::Assortative => "assortative",
            ConstructionCase::CrossMatched => "cross",
        },
    ));
    let (vpd, _) = is_nash_stable(&mppd, cap)?;
    checks.push(row("selfish pair: verdict", "stable", verdict_name_c(&vpd)));
    let dd = StrategyPair::pure(2, 1, 1);
    checks.push(row(
        "selfish pair: cross entry",
        "(D,D)",
        if mppd.profile.entry(ClassC::ThetaTau) == Some(&dd) {
            "(D,D)"
        } else {
            "other"
        },
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_is_order_free() {
        let mk = |g_theta: i64, g_tau: i64| {
            VerdictRecord::new(
                Mode::Complete,
                frac(1, 2),
                "r".into(),
                rat(g_theta),
                rat(g_tau),
            )
        };
        let mut records = vec![mk(3, 2), mk(2, 2), mk(5, 1)];
        let fwd = aggregate_records(&records);
        records.reverse();
        assert_eq!(fwd, aggregate_records(&records));
        assert_eq!(fwd, Aggregate::ThetaEsAgainstTau);
        assert_eq!(aggregate_records(&[]), Aggregate::Inconclusive);
        assert_eq!(aggregate_records(&[mk(2, 2)]), Aggregate::NeutralTie);
        assert_eq!(aggregate_records(&[mk(1, 2), mk(2, 1)]), Aggregate::Mixed);
    }

    #[test]
    fn same_type_inefficiency_cases() {
        let cap = SupportCap::default();
        let g = cases::not_loser_best_game();
        let selfish = build_type(&g, "s", FamilyTag::Selfish, None).unwrap();
        let (bad, _) = same_type_inefficiency(&selfish, &g, &cap).unwrap();
        assert!(bad); // loser-best (B,B) totals 6 < 10

        let pe = build_type(&g, "pe", FamilyTag::ParochialEfficient, None).unwrap();
        let (bad, _) = same_type_inefficiency(&pe, &g, &cap).unwrap();
        assert!(!bad);

        let pd = cases::prisoners_dilemma(3, 1, 4, 2);
        let selfish_pd = build_type(&pd, "s", FamilyTag::Selfish, None).unwrap();
        let (bad, _) = same_type_inefficiency(&selfish_pd, &pd, &cap).unwrap();
        assert!(bad); // (D,D) totals 4 < 6
    }

    #[test]
    fn identical_types_tie() {
        let cap = SupportCap::default();
        let pd = cases::prisoners_dilemma(3, 1, 4, 2);
        let t = build_type(&pd, "t", FamilyTag::Selfish, None).unwrap();
        let report = evo_verdict(
            &pd,
            &t,
            &t.clone(),
            Mode::Complete,
            &default_epsilon_grid(),
            &[],
            &cap,
        )
        .unwrap();
        assert_eq!(report.aggregate, Aggregate::NeutralTie);
    }

    #[test]
    fn identical_types_can_split_asymmetrically() {
        // On a game whose efficient pairs are asymmetric, identical selfish
        // types sustain stable cross-matched profiles favoring either side,
        // so the record set is symmetric but not a tie.
        let cap = SupportCap::default();
        let g = cases::bos_game();
        let t = build_type(&g, "t", FamilyTag::Selfish, None).unwrap();
        let report =
            evo_verdict(&g, &t, &t.clone(), Mode::Complete, &[frac(1, 2)], &[], &cap).unwrap();
        assert_eq!(report.aggregate, Aggregate::Mixed);
        let gts = report
            .records
            .iter()
            .filter(|r| r.comparison == Comparison::Gt)
            .count();
        let lts = report
            .records
            .iter()
            .filter(|r| r.comparison == Comparison::Lt)
            .count();
        assert_eq!(gts, lts);
    }

    #[test]
    fn assortative_records_epsilon_free() {
        let cap = SupportCap::default();
        let g = cases::not_loser_best_game();
        let theta = build_type(&g, "theta", FamilyTag::ParochialSelfish, None).unwrap();
        let tau = build_adversary_type(&g, "tau", AdversaryRecipe::Ex3Mutant, &Default::default())
            .unwrap();
        let report = evo_verdict(
            &g,
            &theta,
            &tau,
            Mode::Complete,
            &default_epsilon_grid(),
            &[],
            &cap,
        )
        .unwrap();
        // every record here is assortative, so fitness never varies with eps
        for r in &report.records {
            assert_eq!(r.g_theta, rat(3));
            assert_eq!(r.g_tau, rat(5));
        }
        assert_eq!(report.aggregate, Aggregate::TauEsAgainstTheta);
    }

    #[test]
    fn incomplete_mode_requires_candidates() {
        let cap = SupportCap::default();
        let g = cases::bos_game();
        let t = build_type(&g, "t", FamilyTag::Selfish, None).unwrap();
        let err = compare_over_stable(&g, &t, &t.clone(), Mode::Incomplete, &[], &[], &cap);
        assert!(matches!(err, Err(EvolutionError::NoCandidates)));
    }

    #[test]
    fn all_replication_cases_pass() {
        let cap = SupportCap::default();
        for case in ReplicationCase::ALL {
            let outcome = replicate(case, &cap).unwrap();
            for check in &outcome.checks {
                assert!(
                    check.pass,
                    "case {} check `{}`: expected {}, computed {}",
                    case, check.name, check.expected, check.computed
                );
            }
        }
    }
}
