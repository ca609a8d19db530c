//! The scenario file format: a line-oriented, diff-friendly description of a
//! game, its preference types, population states, and matching profiles.
//! All numbers are exact rationals (`a/b` or integers); `#` starts a comment.

use crate::equilibrium::SupportCap;
use crate::game::{MaterialGame, MixedStrategy, StrategyPair};
use crate::incomplete::{
    InfoStructure, MatchingConfigurationI, MatchingProfileI, StrategyProfileI,
};
use crate::matching::{
    ClassC, Label, MatchingConfiguration, MatchingProfileC, PopulationState, StrategyProfileC,
};
use crate::preference::{
    build_adversary_type, build_type, AdversaryParams, AdversaryRecipe, FamilyTag, PreferenceType,
};
use crate::rational::{format_rational, parse_rational, Rational};
use num_traits::Zero;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scenario: {0}")]
    Semantic(String),
}

fn perr(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamedFamily {
    Selfish,
    Efficient,
    HomophilicEfficient,
    ParochialEfficient,
    HomophilicSelfish,
    ParochialSelfish,
}

impl NamedFamily {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "selfish" => Some(NamedFamily::Selfish),
            "efficient" => Some(NamedFamily::Efficient),
            "homophilic_efficient" => Some(NamedFamily::HomophilicEfficient),
            "parochial_efficient" => Some(NamedFamily::ParochialEfficient),
            "homophilic_selfish" => Some(NamedFamily::HomophilicSelfish),
            "parochial_selfish" => Some(NamedFamily::ParochialSelfish),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            NamedFamily::Selfish => "selfish",
            NamedFamily::Efficient => "efficient",
            NamedFamily::HomophilicEfficient => "homophilic_efficient",
            NamedFamily::ParochialEfficient => "parochial_efficient",
            NamedFamily::HomophilicSelfish => "homophilic_selfish",
            NamedFamily::ParochialSelfish => "parochial_selfish",
        }
    }
}

/// A preference type as declared in the file.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeSpec {
    Named {
        family: NamedFamily,
        lambda: Option<Rational>,
    },
    Adversary {
        recipe: AdversaryRecipe,
        lambda: Option<Rational>,
        m: Option<Rational>,
    },
    Custom {
        u_same: Vec<Vec<Rational>>,
        u_cross: Vec<Vec<Rational>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub spec: TypeSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDecl {
    pub name: String,
    pub theta: String,
    pub tau: String,
    pub epsilon: Rational,
    /// `(p_theta, p_tau, p_u)` when the state carries incomplete information.
    pub info: Option<(Rational, Rational, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDecl {
    pub name: String,
    pub state: String,
    pub mu: Vec<(Label, Label, Rational)>,
    pub plays: Vec<(Label, Label, MixedStrategy, MixedStrategy)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamsDecl {
    pub epsilon_grid: Option<Vec<Rational>>,
    pub support_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub game: MaterialGame,
    pub types: Vec<TypeDecl>,
    pub states: Vec<StateDecl>,
    pub profiles: Vec<ProfileDecl>,
    pub params: ParamsDecl,
}

fn parse_label(s: &str) -> Option<Label> {
    match s {
        "theta" => Some(Label::Theta),
        "tau" => Some(Label::Tau),
        "u" => Some(Label::U),
        _ => None,
    }
}

/// Parse a strategy token stream: either a bare strategy label or a
/// parenthesized weight vector `( w1 w2 ... )`.
fn parse_strategy(
    game: &MaterialGame,
    tokens: &[&str],
    pos: &mut usize,
    line: usize,
) -> Result<MixedStrategy, ScenarioError> {
    let n = game.size();
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| perr(line, "expected a strategy"))?;
    if *tok == "(" {
        let mut weights = Vec::new();
        *pos += 1;
        while let Some(t) = tokens.get(*pos) {
            if *t == ")" {
                *pos += 1;
                let strat = MixedStrategy::new(weights)
                    .map_err(|e| perr(line, format!("bad weight vector: {e}")))?;
                if strat.len() != n {
                    return Err(perr(line, format!("weight vector needs {n} entries")));
                }
                return Ok(strat);
            }
            weights.push(parse_rational(t).map_err(|e| perr(line, e.to_string()))?);
            *pos += 1;
        }
        Err(perr(line, "unclosed weight vector"))
    } else {
        let idx = game
            .label_index(tok)
            .ok_or_else(|| perr(line, format!("unknown strategy label `{tok}`")))?;
        *pos += 1;
        Ok(MixedStrategy::pure(n, idx))
    }
}

enum Section {
    None,
    Game,
    Type(usize),
    State(usize),
    Profile(usize),
    Params,
}

/// What a matrix block currently being read belongs to.
enum MatrixTarget {
    Payoff,
    USame(usize),
    UCross(usize),
}

type RawTables = (Option<Vec<Vec<Rational>>>, Option<Vec<Vec<Rational>>>);

struct RawGame {
    labels: Vec<String>,
    allow_nonpositive: bool,
    payoff: Vec<Vec<Rational>>,
}

/// Parse a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario_opts(text, false)
}

/// Parse with the positivity check suppressed regardless of the file's flag.
pub fn parse_scenario_opts(
    text: &str,
    force_allow_nonpositive: bool,
) -> Result<Scenario, ScenarioError> {
    let mut raw_game: Option<RawGame> = None;
    let mut types: Vec<TypeDecl> = Vec::new();
    let mut raw_tables: Vec<RawTables> = Vec::new();
    let mut states: Vec<StateDecl> = Vec::new();
    let mut raw_info: Vec<[Option<Rational>; 3]> = Vec::new();
    let mut profiles: Vec<ProfileDecl> = Vec::new();
    let mut params = ParamsDecl::default();

    let mut section = Section::None;
    let mut matrix: Option<(MatrixTarget, usize)> = None; // target, rows still expected

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }

        if let Some((target, remaining)) = matrix.take() {
            let row: Result<Vec<Rational>, _> = content
                .split_whitespace()
                .map(|t| parse_rational(t).map_err(|e| perr(line, e.to_string())))
                .collect();
            let row = row?;
            let expected = raw_game.as_ref().map(|g| g.labels.len()).unwrap_or(0);
            if row.len() != expected {
                return Err(perr(line, format!("matrix row needs {expected} entries")));
            }
            match &target {
                MatrixTarget::Payoff => raw_game.as_mut().unwrap().payoff.push(row),
                MatrixTarget::USame(i) => raw_tables[*i].0.get_or_insert_with(Vec::new).push(row),
                MatrixTarget::UCross(i) => raw_tables[*i].1.get_or_insert_with(Vec::new).push(row),
            }
            if remaining > 1 {
                matrix = Some((target, remaining - 1));
            }
            continue;
        }

        if let Some(rest) = content.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| perr(line, "unterminated section header"))?
                .trim();
            let mut parts = inner.split_whitespace();
            let kind = parts
                .next()
                .ok_or_else(|| perr(line, "empty section header"))?;
            let name = parts.next().map(str::to_string);
            section = match kind {
                "game" => {
                    if raw_game.is_some() {
                        return Err(perr(line, "duplicate [game] section"));
                    }
                    raw_game = Some(RawGame {
                        labels: Vec::new(),
                        allow_nonpositive: false,
                        payoff: Vec::new(),
                    });
                    Section::Game
                }
                "type" => {
                    let name = name.ok_or_else(|| perr(line, "[type] needs a name"))?;
                    if types.iter().any(|t| t.name == name) {
                        return Err(perr(line, format!("duplicate type `{name}`")));
                    }
                    types.push(TypeDecl {
                        name,
                        spec: TypeSpec::Custom {
                            u_same: Vec::new(),
                            u_cross: Vec::new(),
                        },
                    });
                    raw_tables.push((None, None));
                    // spec is rewritten by the body lines; start undetermined
                    types.last_mut().unwrap().spec = TypeSpec::Named {
                        family: NamedFamily::Selfish,
                        lambda: None,
                    };
                    raw_tables.last_mut().unwrap().0 = None;
                    Section::Type(types.len() - 1)
                }
                "state" => {
                    let name = name.unwrap_or_else(|| "default".to_string());
                    if states.iter().any(|s| s.name == name) {
                        return Err(perr(line, format!("duplicate state `{name}`")));
                    }
                    states.push(StateDecl {
                        name,
                        theta: String::new(),
                        tau: String::new(),
                        epsilon: Rational::zero(),
                        info: None,
                    });
                    raw_info.push([None, None, None]);
                    Section::State(states.len() - 1)
                }
                "profile" => {
                    let name = name.ok_or_else(|| perr(line, "[profile] needs a name"))?;
                    if profiles.iter().any(|p| p.name == name) {
                        return Err(perr(line, format!("duplicate profile `{name}`")));
                    }
                    profiles.push(ProfileDecl {
                        name,
                        state: String::new(),
                        mu: Vec::new(),
                        plays: Vec::new(),
                    });
                    Section::Profile(profiles.len() - 1)
                }
                "params" => Section::Params,
                other => return Err(perr(line, format!("unknown section `{other}`"))),
            };
            continue;
        }

        let spaced = content.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let key = tokens[0];

        match section {
            Section::None => return Err(perr(line, "content before any section header")),
            Section::Game => {
                let g = raw_game.as_mut().unwrap();
                match key {
                    "labels" => {
                        g.labels = tokens[1..].iter().map(|s| s.to_string()).collect();
                        if g.labels.is_empty() {
                            return Err(perr(line, "labels line needs at least one name"));
                        }
                    }
                    "allow_nonpositive" => {
                        g.allow_nonpositive = matches!(tokens.get(1), Some(&"true"));
                    }
                    "payoff" => {
                        if g.labels.is_empty() {
                            return Err(perr(line, "labels must come before payoff"));
                        }
                        matrix = Some((MatrixTarget::Payoff, g.labels.len()));
                    }
                    other => return Err(perr(line, format!("unknown game field `{other}`"))),
                }
            }
            Section::Type(i) => {
                let n = raw_game
                    .as_ref()
                    .map(|g| g.labels.len())
                    .ok_or_else(|| perr(line, "[game] must precede [type] sections"))?;
                match key {
                    "family" => {
                        let fam = tokens
                            .get(1)
                            .ok_or_else(|| perr(line, "family needs a value"))?;
                        types[i].spec = match *fam {
                            "custom" => TypeSpec::Custom {
                                u_same: Vec::new(),
                                u_cross: Vec::new(),
                            },
                            "adversary" => TypeSpec::Adversary {
                                recipe: AdversaryRecipe::Ex3Mutant, // rewritten by `recipe`
                                lambda: None,
                                m: None,
                            },
                            other => TypeSpec::Named {
                                family: NamedFamily::parse(other).ok_or_else(|| {
                                    perr(line, format!("unknown family `{other}`"))
                                })?,
                                lambda: None,
                            },
                        };
                    }
                    "lambda" => {
                        let v = parse_rational(
                            tokens
                                .get(1)
                                .ok_or_else(|| perr(line, "lambda needs a value"))?,
                        )
                        .map_err(|e| perr(line, e.to_string()))?;
                        match &mut types[i].spec {
                            TypeSpec::Named { lambda, .. } | TypeSpec::Adversary { lambda, .. } => {
                                *lambda = Some(v)
                            }
                            TypeSpec::Custom { .. } => {
                                return Err(perr(line, "custom types take no lambda"))
                            }
                        }
                    }
                    "m" => {
                        let v = parse_rational(
                            tokens.get(1).ok_or_else(|| perr(line, "m needs a value"))?,
                        )
                        .map_err(|e| perr(line, e.to_string()))?;
                        match &mut types[i].spec {
                            TypeSpec::Adversary { m, .. } => *m = Some(v),
                            _ => return Err(perr(line, "only adversary recipes take m")),
                        }
                    }
                    "recipe" => {
                        let r = AdversaryRecipe::parse(
                            tokens
                                .get(1)
                                .ok_or_else(|| perr(line, "recipe needs a value"))?,
                        )
                        .map_err(|e| perr(line, e.to_string()))?;
                        match &mut types[i].spec {
                            TypeSpec::Adversary { recipe, .. } => *recipe = r,
                            _ => return Err(perr(line, "recipe requires `family adversary`")),
                        }
                    }
                    "u_same" => matrix = Some((MatrixTarget::USame(i), n)),
                    "u_cross" => matrix = Some((MatrixTarget::UCross(i), n)),
                    other => return Err(perr(line, format!("unknown type field `{other}`"))),
                }
            }
            Section::State(i) => match key {
                "theta" => {
                    states[i].theta = tokens
                        .get(1)
                        .ok_or_else(|| perr(line, "theta needs a type name"))?
                        .to_string()
                }
                "tau" => {
                    states[i].tau = tokens
                        .get(1)
                        .ok_or_else(|| perr(line, "tau needs a type name"))?
                        .to_string()
                }
                "epsilon" => {
                    states[i].epsilon = parse_rational(
                        tokens
                            .get(1)
                            .ok_or_else(|| perr(line, "epsilon needs a value"))?,
                    )
                    .map_err(|e| perr(line, e.to_string()))?;
                }
                "p_theta" | "p_tau" | "p_u" => {
                    let v =
                        parse_rational(tokens.get(1).ok_or_else(|| perr(line, "p needs a value"))?)
                            .map_err(|e| perr(line, e.to_string()))?;
                    let slot = match key {
                        "p_theta" => 0,
                        "p_tau" => 1,
                        _ => 2,
                    };
                    raw_info[i][slot] = Some(v);
                }
                other => return Err(perr(line, format!("unknown state field `{other}`"))),
            },
            Section::Profile(i) => match key {
                "state" => {
                    profiles[i].state = tokens
                        .get(1)
                        .ok_or_else(|| perr(line, "state needs a name"))?
                        .to_string()
                }
                "mu" => {
                    let a = parse_label(tokens.get(1).copied().unwrap_or(""))
                        .ok_or_else(|| perr(line, "mu needs labels theta|tau|u"))?;
                    let b = parse_label(tokens.get(2).copied().unwrap_or(""))
                        .ok_or_else(|| perr(line, "mu needs labels theta|tau|u"))?;
                    let v = parse_rational(
                        tokens
                            .get(3)
                            .ok_or_else(|| perr(line, "mu needs a value"))?,
                    )
                    .map_err(|e| perr(line, e.to_string()))?;
                    profiles[i].mu.push((a, b, v));
                }
                "play" => {
                    let game = raw_game
                        .as_ref()
                        .ok_or_else(|| perr(line, "[game] must precede profiles"))?;
                    let built = MaterialGame::new(game.labels.clone(), game.payoff.clone(), true)
                        .map_err(|e| perr(line, e.to_string()))?;
                    let a = parse_label(tokens.get(1).copied().unwrap_or(""))
                        .ok_or_else(|| perr(line, "play needs labels theta|tau|u"))?;
                    let b = parse_label(tokens.get(2).copied().unwrap_or(""))
                        .ok_or_else(|| perr(line, "play needs labels theta|tau|u"))?;
                    let mut pos = 3usize;
                    let x = parse_strategy(&built, &tokens, &mut pos, line)?;
                    let y = parse_strategy(&built, &tokens, &mut pos, line)?;
                    if pos != tokens.len() {
                        return Err(perr(line, "trailing tokens after play entry"));
                    }
                    profiles[i].plays.push((a, b, x, y));
                }
                other => return Err(perr(line, format!("unknown profile field `{other}`"))),
            },
            Section::Params => match key {
                "epsilon_grid" => {
                    let grid: Result<Vec<Rational>, _> = tokens[1..]
                        .iter()
                        .map(|t| parse_rational(t).map_err(|e| perr(line, e.to_string())))
                        .collect();
                    params.epsilon_grid = Some(grid?);
                }
                "support_cap" => {
                    params.support_cap = Some(
                        tokens
                            .get(1)
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| perr(line, "support_cap needs an integer"))?,
                    );
                }
                other => return Err(perr(line, format!("unknown params field `{other}`"))),
            },
        }
    }

    let raw = raw_game.ok_or_else(|| ScenarioError::Semantic("missing [game] section".into()))?;
    let game = MaterialGame::new(
        raw.labels,
        raw.payoff,
        raw.allow_nonpositive || force_allow_nonpositive,
    )
    .map_err(|e| ScenarioError::Semantic(e.to_string()))?;

    // attach custom tables
    for (decl, (same, cross)) in types.iter_mut().zip(raw_tables) {
        if let TypeSpec::Custom { u_same, u_cross } = &mut decl.spec {
            *u_same = same.ok_or_else(|| {
                ScenarioError::Semantic(format!("type `{}`: custom needs u_same", decl.name))
            })?;
            *u_cross = cross.ok_or_else(|| {
                ScenarioError::Semantic(format!("type `{}`: custom needs u_cross", decl.name))
            })?;
        } else if same.is_some() || cross.is_some() {
            return Err(ScenarioError::Semantic(format!(
                "type `{}`: tables are only allowed with family custom",
                decl.name
            )));
        }
    }

    // attach info vectors
    for (state, info) in states.iter_mut().zip(raw_info) {
        match info {
            [None, None, None] => {}
            [Some(pt), Some(pc), Some(pu)] => state.info = Some((pt, pc, pu)),
            _ => {
                return Err(ScenarioError::Semantic(format!(
                    "state `{}`: p_theta, p_tau, p_u must be given together",
                    state.name
                )))
            }
        }
    }

    let scenario = Scenario {
        game,
        types,
        states,
        profiles,
        params,
    };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    fn validate(&self) -> Result<(), ScenarioError> {
        for s in &self.states {
            if !self.types.iter().any(|t| t.name == s.theta) {
                return Err(ScenarioError::Semantic(format!(
                    "state `{}` references unknown type `{}`",
                    s.name, s.theta
                )));
            }
            if !self.types.iter().any(|t| t.name == s.tau) {
                return Err(ScenarioError::Semantic(format!(
                    "state `{}` references unknown type `{}`",
                    s.name, s.tau
                )));
            }
        }
        for p in &self.profiles {
            if !self.states.iter().any(|s| s.name == p.state) {
                return Err(ScenarioError::Semantic(format!(
                    "profile `{}` references unknown state `{}`",
                    p.name, p.state
                )));
            }
        }
        // building everything exercises every module-level invariant
        for s in &self.states {
            self.build_state(&s.name)?;
        }
        for p in &self.profiles {
            self.build_profile(&p.name)?;
        }
        Ok(())
    }

    pub fn support_cap(&self) -> SupportCap {
        let mut cap = SupportCap::default();
        if let Some(c) = self.params.support_cap {
            cap.two_player = c;
        }
        cap
    }

    pub fn type_decl(&self, name: &str) -> Option<&TypeDecl> {
        self.types.iter().find(|t| t.name == name)
    }

    pub fn state_decl(&self, name: &str) -> Option<&StateDecl> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn profile_decl(&self, name: &str) -> Option<&ProfileDecl> {
        self.profiles.iter().find(|p| p.name == name)
    }

    /// Build the preference type declared under `name`.
    pub fn build_type(&self, name: &str) -> Result<PreferenceType, ScenarioError> {
        let decl = self
            .type_decl(name)
            .ok_or_else(|| ScenarioError::Semantic(format!("unknown type `{name}`")))?;
        let sem =
            |e: &dyn std::fmt::Display| ScenarioError::Semantic(format!("type `{name}`: {e}"));
        match &decl.spec {
            TypeSpec::Custom { u_same, u_cross } => build_type(
                &self.game,
                name,
                FamilyTag::Custom,
                Some((u_same.clone(), u_cross.clone())),
            )
            .map_err(|e| sem(&e)),
            TypeSpec::Named { family, lambda } => {
                let tag = match family {
                    NamedFamily::Selfish => FamilyTag::Selfish,
                    NamedFamily::Efficient => FamilyTag::Efficient,
                    NamedFamily::ParochialEfficient => FamilyTag::ParochialEfficient,
                    NamedFamily::ParochialSelfish => FamilyTag::ParochialSelfish,
                    NamedFamily::HomophilicEfficient => FamilyTag::HomophilicEfficient {
                        lambda: lambda
                            .clone()
                            .ok_or_else(|| sem(&"homophilic families need lambda"))?,
                    },
                    NamedFamily::HomophilicSelfish => FamilyTag::HomophilicSelfish {
                        lambda: lambda
                            .clone()
                            .ok_or_else(|| sem(&"homophilic families need lambda"))?,
                    },
                };
                build_type(&self.game, name, tag, None).map_err(|e| sem(&e))
            }
            TypeSpec::Adversary { recipe, lambda, m } => {
                let mut params = AdversaryParams {
                    lambda: lambda.clone(),
                    m: m.clone(),
                    ne_inefficient_totals: Vec::new(),
                };
                if *recipe == AdversaryRecipe::Prop5Anticoordinator {
                    let lam = lambda
                        .clone()
                        .ok_or_else(|| sem(&"prop5_anticoordinator needs lambda"))?;
                    params.ne_inefficient_totals =
                        incumbent_inefficient_totals(&self.game, &lam, &self.support_cap())
                            .map_err(|e| sem(&e))?;
                }
                build_adversary_type(&self.game, name, *recipe, &params).map_err(|e| sem(&e))
            }
        }
    }

    /// Build the population state declared under `name`.
    pub fn build_state(&self, name: &str) -> Result<PopulationState, ScenarioError> {
        let decl = self
            .state_decl(name)
            .ok_or_else(|| ScenarioError::Semantic(format!("unknown state `{name}`")))?;
        let theta = self.build_type(&decl.theta)?;
        let tau = self.build_type(&decl.tau)?;
        PopulationState::new(theta, tau, decl.epsilon.clone())
            .map_err(|e| ScenarioError::Semantic(format!("state `{name}`: {e}")))
    }

    /// Build and validate the profile declared under `name`.
    pub fn build_profile(&self, name: &str) -> Result<BuiltProfile, ScenarioError> {
        let decl = self
            .profile_decl(name)
            .ok_or_else(|| ScenarioError::Semantic(format!("unknown profile `{name}`")))?;
        let state_decl = self
            .state_decl(&decl.state)
            .ok_or_else(|| ScenarioError::Semantic(format!("unknown state `{}`", decl.state)))?;
        let state = self.build_state(&decl.state)?;
        let sem =
            |e: &dyn std::fmt::Display| ScenarioError::Semantic(format!("profile `{name}`: {e}"));

        match &state_decl.info {
            None => {
                let find = |a: Label, b: Label| {
                    decl.mu
                        .iter()
                        .find(|(x, y, _)| (*x, *y) == (a, b))
                        .map(|(_, _, v)| v.clone())
                        .unwrap_or_else(Rational::zero)
                };
                let config = MatchingConfiguration::new(
                    &state.epsilon,
                    find(Label::Theta, Label::Theta),
                    find(Label::Theta, Label::Tau),
                    find(Label::Tau, Label::Theta),
                    find(Label::Tau, Label::Tau),
                )
                .map_err(|e| sem(&e))?;
                let mut entries = Vec::new();
                for (a, b, x, y) in &decl.plays {
                    let class = match (a, b) {
                        (Label::Theta, Label::Theta) => ClassC::ThetaTheta,
                        (Label::Tau, Label::Tau) => ClassC::TauTau,
                        (Label::Theta, Label::Tau) => ClassC::ThetaTau,
                        (Label::Tau, Label::Theta) => ClassC::ThetaTau,
                        _ => return Err(sem(&"label u in a complete-information profile")),
                    };
                    let pair = if (*a, *b) == (Label::Tau, Label::Theta) {
                        StrategyPair::new(y.clone(), x.clone())
                    } else {
                        StrategyPair::new(x.clone(), y.clone())
                    };
                    entries.push((class, pair));
                }
                let profile = StrategyProfileC::new(entries);
                MatchingProfileC::new(state, config, profile)
                    .map(BuiltProfile::Complete)
                    .map_err(|e| sem(&e))
            }
            Some((pt, pc, pu)) => {
                let info = InfoStructure::new(&state.epsilon, pt.clone(), pc.clone(), pu.clone())
                    .map_err(|e| sem(&e))?;
                let config = MatchingConfigurationI::new(
                    decl.mu
                        .iter()
                        .map(|(a, b, v)| ((*a, *b), v.clone()))
                        .collect(),
                );
                let entries = decl
                    .plays
                    .iter()
                    .map(|(a, b, x, y)| ((*a, *b), StrategyPair::new(x.clone(), y.clone())))
                    .collect();
                let profile = StrategyProfileI::new(entries);
                MatchingProfileI::new(state, info, config, profile)
                    .map(BuiltProfile::Incomplete)
                    .map_err(|e| sem(&e))
            }
        }
    }
}

/// Totals of the inefficient equilibria of the homophilic-efficient incumbent
/// self-game, as the anti-coordinating recipe requires.
pub fn incumbent_inefficient_totals(
    game: &MaterialGame,
    lambda: &Rational,
    cap: &SupportCap,
) -> Result<Vec<Rational>, ScenarioError> {
    let incumbent = build_type(
        game,
        "incumbent",
        FamilyTag::HomophilicEfficient {
            lambda: lambda.clone(),
        },
        None,
    )
    .map_err(|e| ScenarioError::Semantic(e.to_string()))?;
    let set = crate::equilibrium::enumerate_nash(
        &crate::equilibrium::TypedGame::self_game(&incumbent),
        cap,
    )
    .map_err(|e| ScenarioError::Semantic(e.to_string()))?;
    let (s_bar, _) = crate::game::efficient_pairs(game);
    Ok(set
        .equilibria
        .iter()
        .map(|p| crate::game::total_payoff(game, p))
        .filter(|t| *t < s_bar)
        .collect())
}

#[derive(Debug, Clone)]
pub enum BuiltProfile {
    Complete(MatchingProfileC),
    Incomplete(MatchingProfileI),
}

fn write_matrix(out: &mut String, table: &[Vec<Rational>]) {
    for row in table {
        let cells: Vec<String> = row.iter().map(format_rational).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
}

fn strategy_token(game: &MaterialGame, s: &MixedStrategy) -> String {
    match s.as_pure() {
        Some(i) => game.labels()[i].clone(),
        None => {
            let cells: Vec<String> = s.weights().iter().map(format_rational).collect();
            format!("( {} )", cells.join(" "))
        }
    }
}

/// Write the scenario back in canonical form; `parse_scenario` inverts this.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[game]");
    let _ = writeln!(out, "labels {}", s.game.labels().join(" "));
    if s.game.allow_nonpositive() {
        let _ = writeln!(out, "allow_nonpositive true");
    }
    let _ = writeln!(out, "payoff");
    write_matrix(&mut out, s.game.payoff_table());

    for t in &s.types {
        let _ = writeln!(out, "\n[type {}]", t.name);
        match &t.spec {
            TypeSpec::Named { family, lambda } => {
                let _ = writeln!(out, "family {}", family.name());
                if let Some(l) = lambda {
                    let _ = writeln!(out, "lambda {}", format_rational(l));
                }
            }
            TypeSpec::Adversary { recipe, lambda, m } => {
                let _ = writeln!(out, "family adversary");
                let _ = writeln!(out, "recipe {}", recipe.name());
                if let Some(l) = lambda {
                    let _ = writeln!(out, "lambda {}", format_rational(l));
                }
                if let Some(m) = m {
                    let _ = writeln!(out, "m {}", format_rational(m));
                }
            }
            TypeSpec::Custom { u_same, u_cross } => {
                let _ = writeln!(out, "family custom");
                let _ = writeln!(out, "u_same");
                write_matrix(&mut out, u_same);
                let _ = writeln!(out, "u_cross");
                write_matrix(&mut out, u_cross);
            }
        }
    }

    for st in &s.states {
        let _ = writeln!(out, "\n[state {}]", st.name);
        let _ = writeln!(out, "theta {}", st.theta);
        let _ = writeln!(out, "tau {}", st.tau);
        let _ = writeln!(out, "epsilon {}", format_rational(&st.epsilon));
        if let Some((pt, pc, pu)) = &st.info {
            let _ = writeln!(out, "p_theta {}", format_rational(pt));
            let _ = writeln!(out, "p_tau {}", format_rational(pc));
            let _ = writeln!(out, "p_u {}", format_rational(pu));
        }
    }

    for p in &s.profiles {
        let _ = writeln!(out, "\n[profile {}]", p.name);
        let _ = writeln!(out, "state {}", p.state);
        for (a, b, v) in &p.mu {
            let _ = writeln!(out, "mu {a} {b} {}", format_rational(v));
        }
        for (a, b, x, y) in &p.plays {
            let _ = writeln!(
                out,
                "play {a} {b} {} {}",
                strategy_token(&s.game, x),
                strategy_token(&s.game, y)
            );
        }
    }

    if s.params != ParamsDecl::default() {
        let _ = writeln!(out, "\n[params]");
        if let Some(grid) = &s.params.epsilon_grid {
            let cells: Vec<String> = grid.iter().map(format_rational).collect();
            let _ = writeln!(out, "epsilon_grid {}", cells.join(" "));
        }
        if let Some(c) = s.params.support_cap {
            let _ = writeln!(out, "support_cap {c}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, rat};

    fn shipped(name: &str) -> String {
        let path = format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(path).expect("shipped scenario")
    }

    #[test]
    fn parses_shipped_files() {
        for name in [
            "ex1.scn", "ex2.scn", "ex3.scn", "ex4.scn", "b2.scn", "b4.scn", "pd.scn",
        ] {
            let s = parse_scenario(&shipped(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!s.states.is_empty(), "{name} has no states");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for name in ["ex1.scn", "ex2.scn", "ex4.scn", "b4.scn", "pd.scn"] {
            let s = parse_scenario(&shipped(name)).unwrap();
            let text = serialize_scenario(&s);
            let back = parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s, back, "{name} round trip");
            // canonical form is a fixed point
            assert_eq!(text, serialize_scenario(&back));
        }
    }

    #[test]
    fn ex1_scenario_matches_builtin_case() {
        let s = parse_scenario(&shipped("ex1.scn")).unwrap();
        let g = crate::cases::bos_game();
        let (theta, tau) = crate::cases::illustrative_types(&g);
        assert_eq!(
            s.build_type("theta")
                .unwrap()
                .table(crate::preference::Opponent::Same),
            theta.table(crate::preference::Opponent::Same)
        );
        assert_eq!(
            s.build_type("tau")
                .unwrap()
                .table(crate::preference::Opponent::Same),
            tau.table(crate::preference::Opponent::Same)
        );
        let state = s.build_state("main").unwrap();
        assert_eq!(state.epsilon, frac(1, 2));
    }

    #[test]
    fn b4_scenario_derives_belief() {
        let s = parse_scenario(&shipped("b4.scn")).unwrap();
        match s.build_profile("pooled-split").unwrap() {
            BuiltProfile::Incomplete(mp) => {
                assert_eq!(mp.q().unwrap().q_utheta, frac(4, 5));
            }
            _ => panic!("expected incomplete profile"),
        }
    }

    #[test]
    fn row_sum_violation_is_named() {
        let text = "\
[game]
labels A B
allow_nonpositive true
payoff
0 2
3 0

[type t]
family selfish

[state main]
theta t
tau t
epsilon 1/2

[profile bad]
state main
mu theta theta 1
mu theta tau 1
mu tau theta 1
mu tau tau 0
play theta theta A A
play theta tau A A
play tau theta A A
";
        let err = parse_scenario(text).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("mu_{theta,theta} + mu_{theta,tau} = 1"),
            "unexpected message: {msg}"
        );
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "[game]\nlabels A B\npayoff\n0 2\n3 zebra\n";
        match parse_scenario(text) {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn prop5_type_built_from_scenario() {
        let text = "\
[game]
labels A B
allow_nonpositive true
payoff
0 1
3 0

[type theta]
family homophilic_efficient
lambda 1

[type anti]
family adversary
recipe prop5_anticoordinator
lambda 1

[state main]
theta theta
tau anti
epsilon 1/2
";
        let s = parse_scenario(text).unwrap();
        let anti = s.build_type("anti").unwrap();
        // M defaults to 49 for this table; the inefficient diagonal pays -M.
        assert_eq!(
            anti.table(crate::preference::Opponent::Same)[0][0],
            rat(-49)
        );
        assert_eq!(
            anti.table(crate::preference::Opponent::Cross)[0][1],
            rat(-1)
        );
    }

    #[test]
    fn epsilon_grid_parsed() {
        let s = parse_scenario(&shipped("pd.scn")).unwrap();
        let grid = s.params.epsilon_grid.unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0], frac(1, 10));
    }
}
