//! Bundled case studies: the games, preference types, and matching profiles
//! behind the `replicate` command and the regression suite.

use crate::game::{MaterialGame, StrategyPair};
use crate::incomplete::{
    IncompleteError, InfoStructure, MatchingConfigurationI, MatchingProfileI, StrategyProfileI,
};
use crate::matching::{Label, PopulationState};
use crate::preference::{
    build_adversary_type, build_type, AdversaryParams, AdversaryRecipe, FamilyTag, PreferenceType,
};
use crate::rational::{frac, rat, Rational};

fn game(labels: &[&str], rows: &[&[i64]]) -> MaterialGame {
    let payoff = rows
        .iter()
        .map(|r| r.iter().map(|&v| rat(v)).collect())
        .collect();
    MaterialGame::new(labels.to_vec(), payoff, true).expect("well-formed table")
}

fn custom(g: &MaterialGame, name: &str, same: &[&[i64]], cross: &[&[i64]]) -> PreferenceType {
    let conv = |rows: &[&[i64]]| -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect())
            .collect()
    };
    build_type(g, name, FamilyTag::Custom, Some((conv(same), conv(cross)))).expect("valid tables")
}

/// 2x2 battle-of-the-sexes-like game: rows (0,1) and (3,0).
pub fn bos_game() -> MaterialGame {
    game(&["A", "B"], &[&[0, 1], &[3, 0]])
}

/// The illustrative 2x2 stability example: theta's utilities 0/2/3/0, tau has
/// A dominant; no plasticity on either side.
pub fn illustrative_types(g: &MaterialGame) -> (PreferenceType, PreferenceType) {
    let theta = custom(g, "theta", &[&[0, 2], &[3, 0]], &[&[0, 2], &[3, 0]]);
    let tau = custom(g, "tau", &[&[4, 2], &[3, 0]], &[&[4, 2], &[3, 0]]);
    (theta, tau)
}

/// 3x3 game whose efficient pair (A,C) is also loser best in the material game.
pub fn homophily_threshold_game() -> MaterialGame {
    game(&["A", "B", "C"], &[&[0, 3, 2], &[5, 0, 0], &[8, 0, 0]])
}

/// 3x3 game whose efficient pair (A,C) is not loser best ((B,B) is).
pub fn not_loser_best_game() -> MaterialGame {
    game(&["A", "B", "C"], &[&[0, 0, 2], &[0, 3, 0], &[8, 0, 0]])
}

/// 2x2 pure-coordination game used by the strong-incentive blocking example.
pub fn coordination_game() -> MaterialGame {
    game(&["A", "B"], &[&[3, 0], &[0, 0]])
}

/// 3x3 game with an inefficient Nash equilibrium alongside efficient ones.
pub fn inefficient_nash_game() -> MaterialGame {
    game(&["A", "B", "C"], &[&[0, 8, 7], &[10, 0, 0], &[10, 0, 0]])
}

/// Prisoner's dilemma over labels C, D with payoffs (a, b, c, d).
pub fn prisoners_dilemma(a: i64, b: i64, c: i64, d: i64) -> MaterialGame {
    game(&["C", "D"], &[&[a, b], &[c, d]])
}

fn pure(g: &MaterialGame, x: &str, y: &str) -> StrategyPair {
    StrategyPair::pure(
        g.size(),
        g.label_index(x).expect("known label"),
        g.label_index(y).expect("known label"),
    )
}

/// The constructed profile of the coordination-seeker example: observable
/// theta agents pair among themselves on (A,B) and all label-u agents are
/// matched with observable tau agents on (A,B).
pub fn coordination_seeker_profile(
    lambda: Rational,
    epsilon: Rational,
    delta: Rational,
) -> Result<MatchingProfileI, IncompleteError> {
    let g = bos_game();
    let theta = build_type(&g, "theta", FamilyTag::HomophilicEfficient { lambda }, None)
        .expect("valid family");
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::Ex4CoordinationSeeker,
        &AdversaryParams::default(),
    )
    .expect("valid recipe");
    let state = PopulationState::new(theta, tau, epsilon.clone()).expect("valid state");
    let p_tau = &epsilon / (rat(2) - &delta);
    let p_theta = rat(1) - rat(2) * &p_tau;
    let info = InfoStructure::new(&epsilon, p_theta, p_tau.clone(), p_tau)?;
    let config = MatchingConfigurationI::new(vec![
        ((Label::Theta, Label::Theta), rat(1)),
        ((Label::Theta, Label::Tau), rat(0)),
        ((Label::Theta, Label::U), rat(0)),
        ((Label::Tau, Label::Theta), rat(0)),
        ((Label::Tau, Label::Tau), rat(0)),
        ((Label::Tau, Label::U), rat(1)),
        ((Label::U, Label::Theta), rat(0)),
        ((Label::U, Label::Tau), rat(1)),
        ((Label::U, Label::U), rat(0)),
    ]);
    let profile = StrategyProfileI::new(vec![
        ((Label::Theta, Label::Theta), pure(&g, "A", "B")),
        // u plays A, tau plays B
        ((Label::U, Label::Tau), pure(&g, "A", "B")),
    ]);
    MatchingProfileI::new(state, info, config, profile)
}

/// The fully pooled profile showing strong-incentive blocking without
/// conditional-incentive blocking: everyone is unobservable and plays (B,B).
pub fn pooled_coordination_profile() -> Result<MatchingProfileI, IncompleteError> {
    let g = coordination_game();
    let theta = build_type(&g, "theta", FamilyTag::ParochialEfficient, None).expect("family");
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::B2MixedMotive,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    let state = PopulationState::new(theta, tau, frac(1, 2)).expect("state");
    let info = InfoStructure::new(&frac(1, 2), rat(0), rat(0), rat(1))?;
    let config = MatchingConfigurationI::new(vec![
        ((Label::U, Label::Theta), rat(0)),
        ((Label::U, Label::Tau), rat(0)),
        ((Label::U, Label::U), rat(1)),
    ]);
    let profile = StrategyProfileI::new(vec![((Label::U, Label::U), pure(&g, "B", "B"))]);
    MatchingProfileI::new(state, info, config, profile)
}

/// The parochial-selfish counterexample profile: observable theta agents are
/// matched with label-u agents on (C,A); observable tau agents pair among
/// themselves on (B,A).
pub fn antiparochial_profile() -> Result<MatchingProfileI, IncompleteError> {
    let g = inefficient_nash_game();
    let theta = build_type(&g, "theta", FamilyTag::ParochialSelfish, None).expect("family");
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::B4AntiparochialEfficient,
        &AdversaryParams::default(),
    )
    .expect("recipe");
    antiparochial_profile_with_theta(theta, tau)
}

/// Same matching data as `antiparochial_profile` with a caller-chosen theta.
pub fn antiparochial_profile_with_theta(
    theta: PreferenceType,
    tau: PreferenceType,
) -> Result<MatchingProfileI, IncompleteError> {
    let g = inefficient_nash_game();
    let state = PopulationState::new(theta, tau, frac(1, 2)).expect("state");
    let info = InfoStructure::new(&frac(1, 2), frac(5, 18), frac(4, 9), frac(5, 18))?;
    let config = MatchingConfigurationI::new(vec![
        ((Label::Theta, Label::Theta), rat(0)),
        ((Label::Theta, Label::Tau), rat(0)),
        ((Label::Theta, Label::U), rat(1)),
        ((Label::Tau, Label::Theta), rat(0)),
        ((Label::Tau, Label::Tau), rat(1)),
        ((Label::Tau, Label::U), rat(0)),
        ((Label::U, Label::Theta), rat(1)),
        ((Label::U, Label::Tau), rat(0)),
        ((Label::U, Label::U), rat(0)),
    ]);
    let profile = StrategyProfileI::new(vec![
        // theta plays C, u plays A
        ((Label::Theta, Label::U), pure(&g, "C", "A")),
        ((Label::Tau, Label::Tau), pure(&g, "B", "A")),
    ]);
    MatchingProfileI::new(state, info, config, profile)
}

/// The strict-fitness profile of the anti-coordinator construction on the
/// 2x2 game: observable theta agents pair on the efficient (B,A), label-u
/// agents are matched with observable tau agents on (A,B).
pub fn anticoordinator_profile(
    lambda: Rational,
    q_utheta: Rational,
) -> Result<MatchingProfileI, IncompleteError> {
    let g = bos_game();
    let theta = build_type(
        &g,
        "theta",
        FamilyTag::HomophilicEfficient {
            lambda: lambda.clone(),
        },
        None,
    )
    .expect("family");
    // The incumbent self-game on this table has one inefficient equilibrium,
    // the even mix, with total payoff 2.
    let tau = build_adversary_type(
        &g,
        "tau",
        AdversaryRecipe::Prop5Anticoordinator,
        &AdversaryParams {
            lambda: Some(lambda),
            m: None,
            ne_inefficient_totals: vec![rat(2)],
        },
    )
    .expect("recipe");
    // With mu_{u,tau} = mu_{tau,u} = 1 the masses force p_u = p_tau; choosing
    // p_u fixes epsilon via q_utheta = 2 - eps / p_u.
    let p_u = frac(1, 4);
    let epsilon = (rat(2) - &q_utheta) * &p_u;
    let p_theta = rat(1) - rat(2) * &p_u;
    let state = PopulationState::new(theta, tau, epsilon.clone()).expect("state");
    let info = InfoStructure::new(&epsilon, p_theta, p_u.clone(), p_u)?;
    let config = MatchingConfigurationI::new(vec![
        ((Label::Theta, Label::Theta), rat(1)),
        ((Label::Theta, Label::Tau), rat(0)),
        ((Label::Theta, Label::U), rat(0)),
        ((Label::Tau, Label::Theta), rat(0)),
        ((Label::Tau, Label::Tau), rat(0)),
        ((Label::Tau, Label::U), rat(1)),
        ((Label::U, Label::Theta), rat(0)),
        ((Label::U, Label::Tau), rat(1)),
        ((Label::U, Label::U), rat(0)),
    ]);
    let profile = StrategyProfileI::new(vec![
        ((Label::Theta, Label::Theta), pure(&g, "B", "A")),
        // u plays A (the disadvantaged side), tau plays B
        ((Label::U, Label::Tau), pure(&g, "A", "B")),
    ]);
    MatchingProfileI::new(state, info, config, profile)
}
