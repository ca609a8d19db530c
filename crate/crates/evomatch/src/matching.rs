//! Complete-information matching profiles: internal/external stability,
//! fitness, stable-class enumeration, and the constructive existence routine.

use crate::equilibrium::{
    enumerate_nash, loser_best_set, ne_frontier, EquilibriumError, SupportCap, TypedGame,
};
use crate::game::{bilinear, material_payoff, MaterialGame, MixedStrategy, StrategyPair};
use crate::preference::{Opponent, PreferenceType, Role};
use crate::rational::{format_rational, rat, Rational};
use num_traits::Zero;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("epsilon must lie strictly between 0 and 1")]
    BadEpsilon,
    #[error("the two preference types are defined over different strategy sets")]
    TypeSizeMismatch,
    #[error("matching configuration violates {equation}")]
    BadConfiguration { equation: String },
    #[error("profile entry for class {class} is {problem}")]
    BadProfileEntry { class: ClassC, problem: String },
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

/// Which label an unobservable or observable agent carries. Used by the
/// incomplete-information layer; declared here so blocking witnesses can
/// reference either vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Theta,
    Tau,
    U,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Theta => write!(f, "theta"),
            Label::Tau => write!(f, "tau"),
            Label::U => write!(f, "u"),
        }
    }
}

impl Label {
    pub fn observable(role: Role) -> Label {
        match role {
            Role::Theta => Label::Theta,
            Role::Tau => Label::Tau,
        }
    }
}

/// The tuple (theta, tau, epsilon): two co-resident preference types and the
/// mutant share.
#[derive(Debug, Clone)]
pub struct PopulationState {
    pub theta: PreferenceType,
    pub tau: PreferenceType,
    pub epsilon: Rational,
}

impl PopulationState {
    pub fn new(
        theta: PreferenceType,
        tau: PreferenceType,
        epsilon: Rational,
    ) -> Result<Self, MatchingError> {
        if epsilon <= Rational::zero() || epsilon >= rat(1) {
            return Err(MatchingError::BadEpsilon);
        }
        if theta.size() != tau.size() {
            return Err(MatchingError::TypeSizeMismatch);
        }
        Ok(PopulationState {
            theta,
            tau,
            epsilon,
        })
    }

    pub fn strategy_count(&self) -> usize {
        self.theta.size()
    }

    pub fn type_of(&self, role: Role) -> &PreferenceType {
        match role {
            Role::Theta => &self.theta,
            Role::Tau => &self.tau,
        }
    }

    /// The game two matched agents of roles `(a, b)` actually play.
    pub fn typed_game(&self, a: Role, b: Role) -> TypedGame {
        if a == b {
            TypedGame::self_game(self.type_of(a))
        } else {
            TypedGame::cross_game(self.type_of(a), self.type_of(b))
        }
    }

    /// Utility of a role-`a` agent playing `x` against a role-`b` agent playing `y`.
    pub fn utility(&self, a: Role, x: &MixedStrategy, b: Role, y: &MixedStrategy) -> Rational {
        let opp = if a == b {
            Opponent::Same
        } else {
            Opponent::Cross
        };
        self.type_of(a).utility(x, y, opp)
    }
}

/// Unordered match classes under complete information, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassC {
    ThetaTheta,
    ThetaTau,
    TauTau,
}

impl ClassC {
    pub const ALL: [ClassC; 3] = [ClassC::ThetaTheta, ClassC::ThetaTau, ClassC::TauTau];

    pub fn roles(self) -> (Role, Role) {
        match self {
            ClassC::ThetaTheta => (Role::Theta, Role::Theta),
            ClassC::ThetaTau => (Role::Theta, Role::Tau),
            ClassC::TauTau => (Role::Tau, Role::Tau),
        }
    }

    pub fn of(a: Role, b: Role) -> ClassC {
        match (a, b) {
            (Role::Theta, Role::Theta) => ClassC::ThetaTheta,
            (Role::Tau, Role::Tau) => ClassC::TauTau,
            _ => ClassC::ThetaTau,
        }
    }
}

impl fmt::Display for ClassC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.roles();
        write!(f, "{a},{b}")
    }
}

/// Mass-balanced match proportions for the four ordered role pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingConfiguration {
    pub theta_theta: Rational,
    pub theta_tau: Rational,
    pub tau_theta: Rational,
    pub tau_tau: Rational,
}

impl MatchingConfiguration {
    pub fn new(
        epsilon: &Rational,
        theta_theta: Rational,
        theta_tau: Rational,
        tau_theta: Rational,
        tau_tau: Rational,
    ) -> Result<Self, MatchingError> {
        let cfg = MatchingConfiguration {
            theta_theta,
            theta_tau,
            tau_theta,
            tau_tau,
        };
        cfg.validate(epsilon)?;
        Ok(cfg)
    }

    /// The configuration with cross share `theta_tau` pinned; the rest follows
    /// from the row sums and the balance condition.
    pub fn from_cross_share(
        epsilon: &Rational,
        theta_tau: Rational,
    ) -> Result<Self, MatchingError> {
        let tau_theta = (rat(1) - epsilon) / epsilon * &theta_tau;
        MatchingConfiguration::new(
            epsilon,
            rat(1) - &theta_tau,
            theta_tau,
            tau_theta.clone(),
            rat(1) - tau_theta,
        )
    }

    pub fn assortative() -> Self {
        MatchingConfiguration {
            theta_theta: rat(1),
            theta_tau: rat(0),
            tau_theta: rat(0),
            tau_tau: rat(1),
        }
    }

    fn validate(&self, epsilon: &Rational) -> Result<(), MatchingError> {
        let one = rat(1);
        let in_range = |v: &Rational| *v >= Rational::zero() && *v <= one;
        if !(in_range(&self.theta_theta)
            && in_range(&self.theta_tau)
            && in_range(&self.tau_theta)
            && in_range(&self.tau_tau))
        {
            return Err(MatchingError::BadConfiguration {
                equation: "0 <= mu_{a,b} <= 1".into(),
            });
        }
        if &self.theta_theta + &self.theta_tau != one {
            return Err(MatchingError::BadConfiguration {
                equation: "mu_{theta,theta} + mu_{theta,tau} = 1".into(),
            });
        }
        if &self.tau_theta + &self.tau_tau != one {
            return Err(MatchingError::BadConfiguration {
                equation: "mu_{tau,theta} + mu_{tau,tau} = 1".into(),
            });
        }
        if (rat(1) - epsilon) * &self.theta_tau != epsilon * &self.tau_theta {
            return Err(MatchingError::BadConfiguration {
                equation: "(1 - eps) mu_{theta,tau} = eps mu_{tau,theta}".into(),
            });
        }
        Ok(())
    }

    pub fn mass(&self, class: ClassC) -> &Rational {
        match class {
            ClassC::ThetaTheta => &self.theta_theta,
            ClassC::ThetaTau => &self.theta_tau,
            ClassC::TauTau => &self.tau_tau,
        }
    }

    pub fn active(&self, class: ClassC) -> bool {
        !self.mass(class).is_zero()
    }
}

/// Strategy entries per active class. Same-type entries are stored in swap
/// canonical form; the cross entry is ordered (theta's strategy first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfileC {
    entries: std::collections::BTreeMap<ClassC, StrategyPair>,
}

impl StrategyProfileC {
    pub fn new(entries: Vec<(ClassC, StrategyPair)>) -> Self {
        let entries = entries
            .into_iter()
            .map(|(c, p)| match c {
                ClassC::ThetaTau => (c, p),
                _ => (c, p.canonical_unordered()),
            })
            .collect();
        StrategyProfileC { entries }
    }

    pub fn entry(&self, class: ClassC) -> Option<&StrategyPair> {
        self.entries.get(&class)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&ClassC, &StrategyPair)> {
        self.entries.iter()
    }
}

/// A complete-information matching profile.
#[derive(Debug, Clone)]
pub struct MatchingProfileC {
    pub state: PopulationState,
    pub config: MatchingConfiguration,
    pub profile: StrategyProfileC,
}

impl MatchingProfileC {
    pub fn new(
        state: PopulationState,
        config: MatchingConfiguration,
        profile: StrategyProfileC,
    ) -> Result<Self, MatchingError> {
        config.validate(&state.epsilon)?;
        for class in ClassC::ALL {
            match (config.active(class), profile.entry(class)) {
                (true, None) => {
                    return Err(MatchingError::BadProfileEntry {
                        class,
                        problem: "missing although the class has positive mass".into(),
                    })
                }
                (false, Some(_)) => {
                    return Err(MatchingError::BadProfileEntry {
                        class,
                        problem: "present although the class has zero mass".into(),
                    })
                }
                (true, Some(p)) => {
                    if p.first.len() != state.strategy_count()
                        || p.second.len() != state.strategy_count()
                    {
                        return Err(MatchingError::BadProfileEntry {
                            class,
                            problem: "defined over the wrong strategy set".into(),
                        });
                    }
                }
                (false, None) => {}
            }
        }
        Ok(MatchingProfileC {
            state,
            config,
            profile,
        })
    }
}

/// Outcome of the internal-stability check.
#[derive(Debug, Clone, PartialEq)]
pub enum InternalCheck {
    Ok,
    Violation {
        class: ClassC,
        /// 0 for the first listed side of the entry, 1 for the second.
        side: usize,
        better_response: usize,
        current_value: Rational,
        better_value: Rational,
    },
}

/// Every active class must play a Nash equilibrium of its game.
pub fn check_internal(mp: &MatchingProfileC) -> InternalCheck {
    for class in ClassC::ALL {
        if !mp.config.active(class) {
            continue;
        }
        let (a, b) = class.roles();
        let pair = mp.profile.entry(class).expect("validated profile");
        let checks = [
            (a, &pair.first, b, &pair.second, 0usize),
            (b, &pair.second, a, &pair.first, 1usize),
        ];
        for (me, mine, other, theirs, side) in checks {
            let table = if me == other {
                mp.state.type_of(me).table(Opponent::Same)
            } else {
                mp.state.type_of(me).table(Opponent::Cross)
            };
            let current = bilinear(table, mine, theirs);
            let (best, brs) = crate::equilibrium::best_responses(table, theirs);
            if best > current {
                return InternalCheck::Violation {
                    class,
                    side,
                    better_response: brs[0],
                    current_value: current,
                    better_value: best,
                };
            }
        }
    }
    InternalCheck::Ok
}

/// Case tag of a blocking witness across both information regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockingCase {
    Complete,
    OneSided,
    TwoSidedConditional,
    TwoSidedStrong,
}

impl fmt::Display for BlockingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockingCase::Complete => write!(f, "I"),
            BlockingCase::OneSided => write!(f, "II"),
            BlockingCase::TwoSidedConditional => write!(f, "III"),
            BlockingCase::TwoSidedStrong => write!(f, "III*"),
        }
    }
}

/// Who takes part in a pairwise deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Agent {
    /// An observable-type agent.
    Observable(Role),
    /// A label-u agent of the given hidden type.
    Hidden(Role),
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agent::Observable(r) => write!(f, "{r}"),
            Agent::Hidden(r) => write!(f, "u{r}"),
        }
    }
}

/// Where a deviating agent currently sits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OriginClass {
    Complete { class: ClassC, side: usize },
    Labeled { class: (Label, Label), side: usize },
}

impl fmt::Display for OriginClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OriginClass::Complete { class, side } => write!(f, "({class})#{side}"),
            OriginClass::Labeled { class, side } => {
                write!(f, "({},{})#{}", class.0, class.1, side)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participant {
    pub agent: Agent,
    pub current_utility: Rational,
    pub origin: OriginClass,
}

/// A strategy plan for each hidden type willing to join a deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationPlan {
    pub participants: Vec<Role>,
    pub strategies: Vec<MixedStrategy>,
}

impl DeviationPlan {
    pub fn strategy_of(&self, role: Role) -> Option<&MixedStrategy> {
        self.participants
            .iter()
            .position(|&r| r == role)
            .map(|i| &self.strategies[i])
    }
}

/// A certificate that external stability fails.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockingWitness {
    pub case: BlockingCase,
    pub participants: [Participant; 2],
    /// The strategies the two named deviators agree on (first participant's
    /// strategy first).
    pub agreed: StrategyPair,
    /// Deviation plans for the u-side(s) in the incomplete-information cases:
    /// the first component belongs to the second participant's side in case
    /// II, and to the first/second side respectively in case III.
    pub plans: Option<(DeviationPlan, Option<DeviationPlan>)>,
}

impl BlockingWitness {
    pub fn describe(&self) -> String {
        format!(
            "case {} blocking pair: {} (now {}) and {} (now {})",
            self.case,
            self.participants[0].agent,
            format_rational(&self.participants[0].current_utility),
            self.participants[1].agent,
            format_rational(&self.participants[1].current_utility),
        )
    }
}

/// One side of a matched pair with positive mass: its role, current utility,
/// and where it sits.
#[derive(Debug, Clone)]
struct PositionC {
    role: Role,
    utility: Rational,
    class: ClassC,
    side: usize,
}

fn positions(mp: &MatchingProfileC) -> Vec<PositionC> {
    let mut out = Vec::new();
    for class in ClassC::ALL {
        if !mp.config.active(class) {
            continue;
        }
        let (a, b) = class.roles();
        let pair = mp.profile.entry(class).expect("validated profile");
        out.push(PositionC {
            role: a,
            utility: mp.state.utility(a, &pair.first, b, &pair.second),
            class,
            side: 0,
        });
        out.push(PositionC {
            role: b,
            utility: mp.state.utility(b, &pair.second, a, &pair.first),
            class,
            side: 1,
        });
    }
    out
}

const ORDERED_ROLE_PAIRS: [(Role, Role); 4] = [
    (Role::Theta, Role::Theta),
    (Role::Theta, Role::Tau),
    (Role::Tau, Role::Theta),
    (Role::Tau, Role::Tau),
];

/// Rematch equilibria of the four ordered role pairs, computed once per state
/// and shared across the candidate profiles of an enumeration.
pub struct BlockingContext {
    sets: Vec<((Role, Role), crate::equilibrium::EquilibriumSet)>,
    pub degenerate: bool,
}

impl BlockingContext {
    pub fn new(state: &PopulationState, cap: &SupportCap) -> Result<Self, MatchingError> {
        let mut sets = Vec::with_capacity(4);
        let mut degenerate = false;
        for (a, b) in ORDERED_ROLE_PAIRS {
            let set = enumerate_nash(&state.typed_game(a, b), cap)?;
            degenerate |= set.degenerate;
            sets.push(((a, b), set));
        }
        Ok(BlockingContext { sets, degenerate })
    }
}

/// All complete-information blocking witnesses, in canonical scan order
/// (role-pair, then equilibrium, then positions). `limit` bounds the search.
pub fn blocking_witnesses(
    mp: &MatchingProfileC,
    cap: &SupportCap,
    limit: Option<usize>,
) -> Result<(Vec<BlockingWitness>, bool), MatchingError> {
    let ctx = BlockingContext::new(&mp.state, cap)?;
    Ok((blocking_witnesses_with(&ctx, mp, limit), ctx.degenerate))
}

fn blocking_witnesses_with(
    ctx: &BlockingContext,
    mp: &MatchingProfileC,
    limit: Option<usize>,
) -> Vec<BlockingWitness> {
    let pos = positions(mp);
    let mut out = Vec::new();
    for ((a, b), set) in &ctx.sets {
        let (a, b) = (*a, *b);
        for eq in &set.equilibria {
            let ua = mp.state.utility(a, &eq.first, b, &eq.second);
            let ub = mp.state.utility(b, &eq.second, a, &eq.first);
            for pa in pos.iter().filter(|p| p.role == a) {
                if ua <= pa.utility {
                    continue;
                }
                for pb in pos.iter().filter(|p| p.role == b) {
                    if ub <= pb.utility {
                        continue;
                    }
                    out.push(BlockingWitness {
                        case: BlockingCase::Complete,
                        participants: [
                            Participant {
                                agent: Agent::Observable(a),
                                current_utility: pa.utility.clone(),
                                origin: OriginClass::Complete {
                                    class: pa.class,
                                    side: pa.side,
                                },
                            },
                            Participant {
                                agent: Agent::Observable(b),
                                current_utility: pb.utility.clone(),
                                origin: OriginClass::Complete {
                                    class: pb.class,
                                    side: pb.side,
                                },
                            },
                        ],
                        agreed: eq.clone(),
                        plans: None,
                    });
                    if limit.is_some_and(|l| out.len() >= l) {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// The lexicographically first blocking pair, if any.
pub fn find_blocking(
    mp: &MatchingProfileC,
    cap: &SupportCap,
) -> Result<(Option<BlockingWitness>, bool), MatchingError> {
    let (witnesses, degenerate) = blocking_witnesses(mp, cap, Some(1))?;
    Ok((witnesses.into_iter().next(), degenerate))
}

/// Re-verify a complete-information witness against the definition.
pub fn verify_blocking(mp: &MatchingProfileC, w: &BlockingWitness) -> bool {
    if w.case != BlockingCase::Complete {
        return false;
    }
    let roles: Vec<Role> = w
        .participants
        .iter()
        .map(|p| match p.agent {
            Agent::Observable(r) => r,
            Agent::Hidden(_) => Role::Theta, // not valid here
        })
        .collect();
    if w.participants
        .iter()
        .any(|p| !matches!(p.agent, Agent::Observable(_)))
    {
        return false;
    }
    let (a, b) = (roles[0], roles[1]);
    // positive mass and matching current utilities at the cited origins
    for p in &w.participants {
        let OriginClass::Complete { class, side } = &p.origin else {
            return false;
        };
        if !mp.config.active(*class) {
            return false;
        }
        let pair = mp.profile.entry(*class).expect("validated profile");
        let (ra, rb) = class.roles();
        let (role, mine, other, theirs) = if *side == 0 {
            (ra, &pair.first, rb, &pair.second)
        } else {
            (rb, &pair.second, ra, &pair.first)
        };
        if mp.state.utility(role, mine, other, theirs) != p.current_utility {
            return false;
        }
    }
    // mutual best responses
    let ga = mp.state.typed_game(a, b);
    let (best_a, _) = crate::equilibrium::best_responses(&ga.row, &w.agreed.second);
    let (best_b, _) = crate::equilibrium::best_responses(&ga.col, &w.agreed.first);
    let ua = mp.state.utility(a, &w.agreed.first, b, &w.agreed.second);
    let ub = mp.state.utility(b, &w.agreed.second, a, &w.agreed.first);
    ua == best_a
        && ub == best_b
        && ua > w.participants[0].current_utility
        && ub > w.participants[1].current_utility
}

#[derive(Debug, Clone, PartialEq)]
pub enum StabilityVerdict {
    Stable,
    Unstable(UnstableReason),
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnstableReason {
    Internal(InternalCheck),
    Blocking(Box<BlockingWitness>),
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::Stable)
    }
}

/// Internal stability plus absence of blocking pairs.
pub fn is_nash_stable(
    mp: &MatchingProfileC,
    cap: &SupportCap,
) -> Result<(StabilityVerdict, bool), MatchingError> {
    let ctx = BlockingContext::new(&mp.state, cap)?;
    Ok((is_nash_stable_with(&ctx, mp), ctx.degenerate))
}

/// `is_nash_stable` against a precomputed rematch context.
pub fn is_nash_stable_with(ctx: &BlockingContext, mp: &MatchingProfileC) -> StabilityVerdict {
    match check_internal(mp) {
        InternalCheck::Ok => {}
        v => return StabilityVerdict::Unstable(UnstableReason::Internal(v)),
    }
    match blocking_witnesses_with(ctx, mp, Some(1)).into_iter().next() {
        Some(w) => StabilityVerdict::Unstable(UnstableReason::Blocking(Box::new(w))),
        None => StabilityVerdict::Stable,
    }
}

/// Average material payoffs per type under the profile.
pub fn average_fitness(game: &MaterialGame, mp: &MatchingProfileC) -> (Rational, Rational) {
    fitness_at(
        game,
        &mp.profile,
        &mp.config.theta_theta,
        &mp.config.theta_tau,
        &mp.config.tau_theta,
        &mp.config.tau_tau,
    )
}

fn fitness_at(
    game: &MaterialGame,
    profile: &StrategyProfileC,
    mu_tt: &Rational,
    mu_tc: &Rational,
    mu_ct: &Rational,
    mu_cc: &Rational,
) -> (Rational, Rational) {
    let half = crate::rational::frac(1, 2);
    let pay =
        |x: &MixedStrategy, y: &MixedStrategy| material_payoff(game, x, y).expect("validated");
    let mut g_theta = Rational::zero();
    let mut g_tau = Rational::zero();
    if let Some(p) = profile.entry(ClassC::ThetaTheta) {
        g_theta += mu_tt * (&half * pay(&p.first, &p.second) + &half * pay(&p.second, &p.first));
    }
    if let Some(p) = profile.entry(ClassC::TauTau) {
        g_tau += mu_cc * (&half * pay(&p.first, &p.second) + &half * pay(&p.second, &p.first));
    }
    if let Some(p) = profile.entry(ClassC::ThetaTau) {
        g_theta += mu_tc * pay(&p.first, &p.second);
        g_tau += mu_ct * pay(&p.second, &p.first);
    }
    (g_theta, g_tau)
}

/// An active-class pattern: which of the three classes carry positive mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassPattern {
    pub theta_theta: bool,
    pub theta_tau: bool,
    pub tau_tau: bool,
}

impl fmt::Display for ClassPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.theta_theta {
            parts.push("theta,theta");
        }
        if self.theta_tau {
            parts.push("theta,tau");
        }
        if self.tau_tau {
            parts.push("tau,tau");
        }
        write!(f, "{{{}}}", parts.join(" "))
    }
}

impl ClassPattern {
    /// The five feasible patterns, in canonical order.
    pub const ALL: [ClassPattern; 5] = [
        ClassPattern {
            theta_theta: true,
            theta_tau: false,
            tau_tau: true,
        },
        ClassPattern {
            theta_theta: true,
            theta_tau: true,
            tau_tau: false,
        },
        ClassPattern {
            theta_theta: false,
            theta_tau: true,
            tau_tau: true,
        },
        ClassPattern {
            theta_theta: true,
            theta_tau: true,
            tau_tau: true,
        },
        ClassPattern {
            theta_theta: false,
            theta_tau: true,
            tau_tau: false,
        },
    ];

    /// Closure `[lo, hi]` of the feasible cross-share interval and an interior
    /// representative, or `None` when the pattern is infeasible at `epsilon`.
    pub fn feasible_cross_range(
        &self,
        epsilon: &Rational,
    ) -> Option<(Rational, Rational, Rational)> {
        let one = rat(1);
        let half = crate::rational::frac(1, 2);
        let ratio = epsilon / (&one - epsilon); // mu_theta_tau when mu_tau_theta = 1
        match (self.theta_theta, self.theta_tau, self.tau_tau) {
            (true, false, true) => Some((rat(0), rat(0), rat(0))),
            (true, true, false) => {
                if *epsilon < half {
                    Some((ratio.clone(), ratio.clone(), ratio))
                } else {
                    None
                }
            }
            (false, true, true) => {
                if *epsilon > half {
                    Some((one.clone(), one.clone(), one))
                } else {
                    None
                }
            }
            (true, true, true) => {
                let hi = if ratio < one { ratio } else { one };
                let rep = &hi * &half;
                Some((rat(0), hi, rep))
            }
            (false, true, false) => {
                if *epsilon == half {
                    Some((one.clone(), one.clone(), one))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn active_classes(&self) -> Vec<ClassC> {
        let mut v = Vec::new();
        if self.theta_theta {
            v.push(ClassC::ThetaTheta);
        }
        if self.theta_tau {
            v.push(ClassC::ThetaTau);
        }
        if self.tau_tau {
            v.push(ClassC::TauTau);
        }
        v
    }
}

/// Fitness of both types at one vertex of the feasible interval.
#[derive(Debug, Clone)]
pub struct VertexFitness {
    pub mu_theta_tau: Rational,
    pub g_theta: Rational,
    pub g_tau: Rational,
}

/// A stable class found by `enumerate_stable`.
#[derive(Debug, Clone)]
pub struct StableClass {
    pub pattern: ClassPattern,
    pub profile: StrategyProfileC,
    /// Closure of the feasible cross-share interval consistent with epsilon.
    pub mu_lo: Rational,
    pub mu_hi: Rational,
    pub vertex_fitness: Vec<VertexFitness>,
}

#[derive(Debug, Clone)]
pub struct EnumerateOutcome {
    pub classes: Vec<StableClass>,
    pub degenerate: bool,
}

/// Enumerate every stable profile class at the given population state.
///
/// Stability depends on the matching configuration only through which classes
/// carry mass, so classes are reported with their feasible cross-share
/// interval; fitness (affine in the share) is evaluated at the interval
/// endpoints. Same-type candidate entries are drawn from the loser-best sets,
/// which is exhaustive for stable profiles.
pub fn enumerate_stable(
    game: &MaterialGame,
    state: &PopulationState,
    cap: &SupportCap,
) -> Result<EnumerateOutcome, MatchingError> {
    let lb_theta = loser_best_set(&state.theta, cap)?;
    let lb_tau = loser_best_set(&state.tau, cap)?;
    let cross = enumerate_nash(&state.typed_game(Role::Theta, Role::Tau), cap)?;
    let ctx = BlockingContext::new(state, cap)?;
    let degenerate = lb_theta.degenerate || lb_tau.degenerate || cross.degenerate || ctx.degenerate;

    let mut classes = Vec::new();
    for pattern in ClassPattern::ALL {
        let Some((lo, hi, rep)) = pattern.feasible_cross_range(&state.epsilon) else {
            continue;
        };
        let tt_choices: Vec<Option<&StrategyPair>> = if pattern.theta_theta {
            lb_theta.pairs.iter().map(Some).collect()
        } else {
            vec![None]
        };
        let cc_choices: Vec<Option<&StrategyPair>> = if pattern.tau_tau {
            lb_tau.pairs.iter().map(Some).collect()
        } else {
            vec![None]
        };
        let tc_choices: Vec<Option<&StrategyPair>> = if pattern.theta_tau {
            cross.equilibria.iter().map(Some).collect()
        } else {
            vec![None]
        };
        for tt in &tt_choices {
            for tc in &tc_choices {
                for cc in &cc_choices {
                    let mut entries = Vec::new();
                    if let Some(p) = tt {
                        entries.push((ClassC::ThetaTheta, (*p).clone()));
                    }
                    if let Some(p) = tc {
                        entries.push((ClassC::ThetaTau, (*p).clone()));
                    }
                    if let Some(p) = cc {
                        entries.push((ClassC::TauTau, (*p).clone()));
                    }
                    let profile = StrategyProfileC::new(entries);
                    let config =
                        MatchingConfiguration::from_cross_share(&state.epsilon, rep.clone())?;
                    let mp = MatchingProfileC::new(state.clone(), config, profile.clone())?;
                    let verdict = is_nash_stable_with(&ctx, &mp);
                    if verdict.is_stable() {
                        let mut vertex_fitness = Vec::new();
                        let mut verts = vec![lo.clone()];
                        if hi != lo {
                            verts.push(hi.clone());
                        }
                        for v in verts {
                            let ct = (rat(1) - &state.epsilon) / &state.epsilon * &v;
                            let (g_theta, g_tau) = fitness_at(
                                game,
                                &profile,
                                &(rat(1) - &v),
                                &v,
                                &ct,
                                &(rat(1) - &ct),
                            );
                            vertex_fitness.push(VertexFitness {
                                mu_theta_tau: v,
                                g_theta,
                                g_tau,
                            });
                        }
                        classes.push(StableClass {
                            pattern,
                            profile,
                            mu_lo: lo.clone(),
                            mu_hi: hi.clone(),
                            vertex_fitness,
                        });
                    }
                }
            }
        }
    }
    Ok(EnumerateOutcome {
        classes,
        degenerate,
    })
}

/// Which branch the constructive existence argument took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionCase {
    /// Assortative: both types matched among themselves at loser-best play.
    Assortative,
    /// The scarcer side is fully matched across at the frontier equilibrium
    /// that favors it most among those acceptable to the abundant side.
    CrossMatched,
}

/// Build a stable matching profile for any population state.
///
/// Follows the constructive existence argument: compare the scarcer type's
/// best acceptable cross value against its own-type loser-best value and pick
/// the assortative or cross-matched arrangement accordingly. Roles are
/// swapped internally when the mutant side is the larger one.
pub fn construct_stable(
    state: &PopulationState,
    cap: &SupportCap,
) -> Result<(MatchingProfileC, ConstructionCase, bool), MatchingError> {
    let half = crate::rational::frac(1, 2);
    if state.epsilon > half {
        let swapped = PopulationState::new(
            state.tau.clone(),
            state.theta.clone(),
            rat(1) - &state.epsilon,
        )?;
        let (mp, case, degenerate) = construct_stable(&swapped, cap)?;
        let config = MatchingConfiguration::new(
            &state.epsilon,
            mp.config.tau_tau.clone(),
            mp.config.tau_theta.clone(),
            mp.config.theta_tau.clone(),
            mp.config.theta_theta.clone(),
        )?;
        let mut entries = Vec::new();
        if let Some(p) = mp.profile.entry(ClassC::TauTau) {
            entries.push((ClassC::ThetaTheta, p.clone()));
        }
        if let Some(p) = mp.profile.entry(ClassC::ThetaTau) {
            entries.push((ClassC::ThetaTau, p.swapped()));
        }
        if let Some(p) = mp.profile.entry(ClassC::ThetaTheta) {
            entries.push((ClassC::TauTau, p.clone()));
        }
        let profile = StrategyProfileC::new(entries);
        return Ok((
            MatchingProfileC::new(state.clone(), config, profile)?,
            case,
            degenerate,
        ));
    }

    let lb_theta = loser_best_set(&state.theta, cap)?;
    let lb_tau = loser_best_set(&state.tau, cap)?;
    let frontier = ne_frontier(&state.theta, &state.tau, &lb_theta.value, cap)?;
    let degenerate = lb_theta.degenerate || lb_tau.degenerate || frontier.degenerate;

    let cross_matched = match &frontier.l_tau_theta {
        None => false,
        Some(l_tau_theta) => *l_tau_theta >= lb_tau.value,
    };

    if !cross_matched {
        let profile = StrategyProfileC::new(vec![
            (ClassC::ThetaTheta, lb_theta.pairs[0].clone()),
            (ClassC::TauTau, lb_tau.pairs[0].clone()),
        ]);
        let mp =
            MatchingProfileC::new(state.clone(), MatchingConfiguration::assortative(), profile)?;
        return Ok((mp, ConstructionCase::Assortative, degenerate));
    }

    let l_tau_theta = frontier.l_tau_theta.as_ref().expect("nonempty frontier");
    let pick = frontier
        .ne_estar
        .iter()
        .find(|e| e.u_tau == *l_tau_theta)
        .expect("maximum attained");
    let mu_theta_tau = &state.epsilon / (rat(1) - &state.epsilon);
    let config = MatchingConfiguration::from_cross_share(&state.epsilon, mu_theta_tau)?;
    let mut entries = vec![(ClassC::ThetaTau, pick.pair.clone())];
    if config.active(ClassC::ThetaTheta) {
        entries.push((ClassC::ThetaTheta, lb_theta.pairs[0].clone()));
    }
    let profile = StrategyProfileC::new(entries);
    let mp = MatchingProfileC::new(state.clone(), config, profile)?;
    Ok((mp, ConstructionCase::CrossMatched, degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preference::{build_type, FamilyTag};
    use crate::rational::frac;

    fn table(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect())
            .collect()
    }

    fn game(rows: &[&[i64]]) -> MaterialGame {
        let n = rows.len();
        let labels: Vec<String> = (0..n)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect();
        MaterialGame::new(labels, table(rows), true).unwrap()
    }

    /// The illustrative 2x2 population: theta plays a battle-of-the-sexes-like
    /// game, tau has A dominant; neither type's utility depends on the
    /// opponent's type.
    fn example1_state(epsilon: Rational) -> (MaterialGame, PopulationState) {
        let g = game(&[&[0, 2], &[3, 0]]);
        let t_theta = table(&[&[0, 2], &[3, 0]]);
        let t_tau = table(&[&[4, 2], &[3, 0]]);
        let theta = build_type(
            &g,
            "theta",
            FamilyTag::Custom,
            Some((t_theta.clone(), t_theta)),
        )
        .unwrap();
        let tau = build_type(&g, "tau", FamilyTag::Custom, Some((t_tau.clone(), t_tau))).unwrap();
        let state = PopulationState::new(theta, tau, epsilon).unwrap();
        (g, state)
    }

    fn pure(i: usize, j: usize) -> StrategyPair {
        StrategyPair::pure(2, i, j)
    }

    fn assortative_profile(
        state: &PopulationState,
        tt: StrategyPair,
        cc: StrategyPair,
    ) -> MatchingProfileC {
        MatchingProfileC::new(
            state.clone(),
            MatchingConfiguration::assortative(),
            StrategyProfileC::new(vec![(ClassC::ThetaTheta, tt), (ClassC::TauTau, cc)]),
        )
        .unwrap()
    }

    #[test]
    fn example1_stable_profile_passes_all_checks() {
        let (_, state) = example1_state(frac(1, 3));
        let mp = assortative_profile(&state, pure(0, 1), pure(0, 0));
        assert_eq!(check_internal(&mp), InternalCheck::Ok);
        let (verdict, degenerate) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable());
        assert!(!degenerate);
    }

    #[test]
    fn example1_internal_violation_detected() {
        let (_, state) = example1_state(frac(1, 3));
        let mp = assortative_profile(&state, pure(0, 1), pure(1, 1));
        match check_internal(&mp) {
            InternalCheck::Violation {
                class,
                better_response,
                ..
            } => {
                assert_eq!(class, ClassC::TauTau);
                assert_eq!(better_response, 0); // A dominates
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn example1_cross_profile_blocked_by_tau_pair() {
        let (_, state) = example1_state(frac(1, 2));
        let config = MatchingConfiguration::from_cross_share(&frac(1, 2), frac(1, 2)).unwrap();
        let profile = StrategyProfileC::new(vec![
            (ClassC::ThetaTheta, pure(0, 1)),
            (ClassC::ThetaTau, pure(1, 0)), // theta plays B, tau plays A
            (ClassC::TauTau, pure(0, 0)),
        ]);
        let mp = MatchingProfileC::new(state, config, profile).unwrap();
        let (w, _) = find_blocking(&mp, &SupportCap::default()).unwrap();
        let w = w.expect("cross profile must be blocked");
        assert_eq!(w.case, BlockingCase::Complete);
        assert_eq!(w.agreed, pure(0, 0)); // two tau agents coordinate on (A,A)
        assert_eq!(w.participants[0].agent, Agent::Observable(Role::Tau));
        assert_eq!(w.participants[0].current_utility, rat(2));
        assert!(verify_blocking(&mp, &w));
    }

    #[test]
    fn example1_mixed_profile_blocked_by_theta_pair() {
        let (_, state) = example1_state(frac(1, 3));
        let m = MixedStrategy::new(vec![frac(2, 5), frac(3, 5)]).unwrap();
        let mp = assortative_profile(&state, StrategyPair::new(m.clone(), m), pure(0, 0));
        assert_eq!(check_internal(&mp), InternalCheck::Ok);
        let (w, _) = find_blocking(&mp, &SupportCap::default()).unwrap();
        let w = w.expect("mixed same-type play must be blocked");
        assert_eq!(w.agreed, pure(0, 1));
        assert_eq!(w.participants[0].current_utility, frac(6, 5));
        assert!(verify_blocking(&mp, &w));
    }

    #[test]
    fn example1_unique_stable_class_across_epsilons() {
        for eps in [frac(1, 10), frac(1, 4), frac(1, 2), frac(3, 4), frac(9, 10)] {
            let (g, state) = example1_state(eps);
            let out = enumerate_stable(&g, &state, &SupportCap::default()).unwrap();
            assert_eq!(out.classes.len(), 1, "one stable class expected");
            let class = &out.classes[0];
            assert!(class.pattern.theta_theta && class.pattern.tau_tau && !class.pattern.theta_tau);
            assert_eq!(class.profile.entry(ClassC::ThetaTheta), Some(&pure(0, 1)));
            assert_eq!(class.profile.entry(ClassC::TauTau), Some(&pure(0, 0)));
        }
    }

    /// Second 3x3 table: selfish incumbents lock into (B,B), mutants play the
    /// efficient (A,C) among themselves.
    fn example3_state(theta_family: FamilyTag) -> (MaterialGame, PopulationState) {
        let g = game(&[&[0, 0, 2], &[0, 3, 0], &[8, 0, 0]]);
        let theta = build_type(&g, "theta", theta_family, None).unwrap();
        let tau = crate::preference::build_adversary_type(
            &g,
            "tau",
            crate::preference::AdversaryRecipe::Ex3Mutant,
            &Default::default(),
        )
        .unwrap();
        let state = PopulationState::new(theta, tau, frac(1, 2)).unwrap();
        (g, state)
    }

    #[test]
    fn example3_fitness_is_three_vs_five() {
        let (g, state) = example3_state(FamilyTag::HomophilicSelfish { lambda: rat(1) });
        let mp = MatchingProfileC::new(
            state.clone(),
            MatchingConfiguration::assortative(),
            StrategyProfileC::new(vec![
                (ClassC::ThetaTheta, StrategyPair::pure(3, 1, 1)),
                (ClassC::TauTau, StrategyPair::pure(3, 0, 2)),
            ]),
        )
        .unwrap();
        let (g_theta, g_tau) = average_fitness(&g, &mp);
        assert_eq!(g_theta, rat(3));
        assert_eq!(g_tau, rat(5));
        let (verdict, _) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable());
    }

    #[test]
    fn example3_unique_stable_class_both_families() {
        for fam in [
            FamilyTag::HomophilicSelfish { lambda: rat(1) },
            FamilyTag::ParochialSelfish,
        ] {
            let (g, state) = example3_state(fam);
            let out = enumerate_stable(&g, &state, &SupportCap::default()).unwrap();
            assert_eq!(out.classes.len(), 1);
            let class = &out.classes[0];
            assert!(!class.pattern.theta_tau);
            assert_eq!(
                class.profile.entry(ClassC::ThetaTheta),
                Some(&StrategyPair::pure(3, 1, 1))
            );
            assert_eq!(
                class.profile.entry(ClassC::TauTau),
                Some(&StrategyPair::pure(3, 0, 2))
            );
            assert_eq!(class.vertex_fitness[0].g_theta, rat(3));
            assert_eq!(class.vertex_fitness[0].g_tau, rat(5));
        }
    }

    #[test]
    fn example3_cross_matching_blocked_by_mutants() {
        let (_, state) = example3_state(FamilyTag::ParochialSelfish);
        let config = MatchingConfiguration::from_cross_share(&frac(1, 2), rat(1)).unwrap();
        // every pair is internally fine in the all-zero cross game
        let profile = StrategyProfileC::new(vec![(ClassC::ThetaTau, StrategyPair::pure(3, 1, 1))]);
        let mp = MatchingProfileC::new(state, config, profile).unwrap();
        let (verdict, _) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(matches!(
            verdict,
            StabilityVerdict::Unstable(UnstableReason::Blocking(_))
        ));
        // The mutant pair's rematch on (A,C) is among the valid witnesses.
        let (all, _) = blocking_witnesses(&mp, &SupportCap::default(), None).unwrap();
        assert!(all.iter().any(|w| w.agreed == StrategyPair::pure(3, 0, 2)
            && w.participants[0].agent == Agent::Observable(Role::Tau)
            && w.participants[1].agent == Agent::Observable(Role::Tau)));
        for w in &all {
            assert!(verify_blocking(&mp, w));
        }
    }

    #[test]
    fn fully_assortative_symmetric_fitness() {
        let (g, state) = example1_state(frac(1, 3));
        let mp = assortative_profile(&state, pure(0, 0), pure(1, 1));
        let (g_theta, g_tau) = average_fitness(&g, &mp);
        assert_eq!(g_theta, rat(0)); // pi(A,A)
        assert_eq!(g_tau, rat(0)); // pi(B,B)
    }

    /// First 3x3 table, cross profile of the homophily-threshold example:
    /// at eps = 1/3 all mutants are matched across and mu_theta_tau = 1/2.
    #[test]
    fn example2_cross_fitness_vertex() {
        let g = game(&[&[0, 3, 2], &[5, 0, 0], &[8, 0, 0]]);
        let theta = build_type(
            &g,
            "theta",
            FamilyTag::HomophilicSelfish { lambda: rat(1) },
            None,
        )
        .unwrap();
        let tau = crate::preference::build_adversary_type(
            &g,
            "tau",
            crate::preference::AdversaryRecipe::Ex2Mutant,
            &Default::default(),
        )
        .unwrap();
        let state = PopulationState::new(theta, tau, frac(1, 3)).unwrap();
        let config = MatchingConfiguration::from_cross_share(&frac(1, 3), frac(1, 2)).unwrap();
        assert_eq!(config.tau_theta, rat(1));
        let profile = StrategyProfileC::new(vec![
            (ClassC::ThetaTheta, StrategyPair::pure(3, 0, 2)),
            (ClassC::ThetaTau, StrategyPair::pure(3, 0, 1)),
        ]);
        let mp = MatchingProfileC::new(state, config, profile).unwrap();
        let (g_theta, g_tau) = average_fitness(&g, &mp);
        assert_eq!(g_theta, rat(4));
        assert_eq!(g_tau, rat(5));
    }

    #[test]
    fn construct_stable_example1_is_the_unique_profile() {
        let (_, state) = example1_state(frac(1, 4));
        let (mp, case, degenerate) = construct_stable(&state, &SupportCap::default()).unwrap();
        assert_eq!(case, ConstructionCase::Assortative);
        assert!(!degenerate);
        assert_eq!(mp.profile.entry(ClassC::ThetaTheta), Some(&pure(0, 1)));
        assert_eq!(mp.profile.entry(ClassC::TauTau), Some(&pure(0, 0)));
        let (verdict, _) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable());
    }

    #[test]
    fn construct_stable_example3_assortative() {
        let (_, state) = example3_state(FamilyTag::HomophilicSelfish { lambda: rat(1) });
        let (mp, case, _) = construct_stable(&state, &SupportCap::default()).unwrap();
        assert_eq!(case, ConstructionCase::Assortative);
        let (verdict, _) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable());
        assert_eq!(
            mp.profile.entry(ClassC::ThetaTheta),
            Some(&StrategyPair::pure(3, 1, 1))
        );
    }

    #[test]
    fn construct_stable_selfish_pair_cross_matches() {
        // Dominant-strategy game: both types selfish, the frontier value ties
        // the own-type loser-best value, so the construction cross-matches.
        let g = game(&[&[3, 1], &[4, 2]]);
        let selfish = build_type(&g, "s", FamilyTag::Selfish, None).unwrap();
        let state = PopulationState::new(selfish.clone(), selfish, frac(1, 4)).unwrap();
        let (mp, case, _) = construct_stable(&state, &SupportCap::default()).unwrap();
        assert_eq!(case, ConstructionCase::CrossMatched);
        assert_eq!(mp.config.tau_theta, rat(1));
        let (verdict, _) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable());
    }

    #[test]
    fn construct_stable_knife_edge_half() {
        // at eps = 1/2 the cross-matched branch pairs everyone across
        let g = game(&[&[3, 1], &[4, 2]]);
        let selfish = build_type(&g, "s", FamilyTag::Selfish, None).unwrap();
        let state = PopulationState::new(selfish.clone(), selfish, frac(1, 2)).unwrap();
        let (mp, case, _) = construct_stable(&state, &SupportCap::default()).unwrap();
        assert_eq!(case, ConstructionCase::CrossMatched);
        assert_eq!(mp.config.theta_tau, rat(1));
        assert_eq!(mp.config.theta_theta, rat(0));
        assert!(mp.profile.entry(ClassC::ThetaTheta).is_none());
        let (verdict, _) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable());
    }

    #[test]
    fn construct_stable_swaps_roles_above_half() {
        let (_, state) = example1_state(frac(3, 4));
        let (mp, _, _) = construct_stable(&state, &SupportCap::default()).unwrap();
        let (verdict, _) = is_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable());
    }

    #[test]
    fn configuration_invariants_enforced() {
        let eps = frac(1, 3);
        assert!(MatchingConfiguration::new(&eps, rat(1), rat(1), rat(0), rat(1)).is_err());
        assert!(MatchingConfiguration::new(&eps, rat(1), rat(0), rat(0), rat(1)).is_ok());
        // balance: (1-eps) mu_tc = eps mu_ct fails here
        assert!(
            MatchingConfiguration::new(&eps, frac(1, 2), frac(1, 2), frac(1, 2), frac(1, 2))
                .is_err()
        );
    }
}
