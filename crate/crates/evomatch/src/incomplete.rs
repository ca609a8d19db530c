//! Incomplete-information matching profiles over the labels theta, tau, u:
//! Bayes-Nash internal stability, the four blocking cases, and fitness.

use crate::equilibrium::{
    enumerate_nash, enumerate_sided, AgentPayoff, EquilibriumError, SidedGame, SupportCap,
};
use crate::game::{material_payoff, MaterialGame, MixedStrategy, StrategyPair};
use crate::matching::{
    Agent, BlockingCase, BlockingWitness, DeviationPlan, Label, MatchingProfileC, OriginClass,
    Participant, PopulationState,
};
use crate::preference::{BeliefQ, Opponent, Role};
use crate::rational::{frac, rat, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IncompleteError {
    #[error("information structure violates {constraint}")]
    BadInfo { constraint: String },
    #[error("matching configuration violates {equation}")]
    BadConfiguration { equation: String },
    #[error("profile entry for class ({0},{1}) is {2}")]
    BadProfileEntry(Label, Label, String),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Matching(#[from] crate::matching::MatchingError),
}

/// Observability masses and the derived belief about label-u agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoStructure {
    pub p_theta: Rational,
    pub p_tau: Rational,
    pub p_u: Rational,
    /// Present exactly when `p_u > 0`.
    pub q: Option<BeliefQ>,
}

impl InfoStructure {
    pub fn new(
        epsilon: &Rational,
        p_theta: Rational,
        p_tau: Rational,
        p_u: Rational,
    ) -> Result<Self, IncompleteError> {
        let zero = Rational::zero();
        let bad = |c: &str| IncompleteError::BadInfo {
            constraint: c.to_string(),
        };
        if &p_theta + &p_tau + &p_u != rat(1) {
            return Err(bad("p_theta + p_tau + p_u = 1"));
        }
        if p_theta < zero || p_theta > rat(1) - epsilon {
            return Err(bad("0 <= p_theta <= 1 - eps"));
        }
        if p_tau < zero || p_tau > epsilon.clone() {
            return Err(bad("0 <= p_tau <= eps"));
        }
        if p_u < zero {
            return Err(bad("p_u >= 0"));
        }
        let q = if p_u.is_zero() {
            None
        } else {
            let q_utheta = (rat(1) - epsilon - &p_theta) / &p_u;
            let q_utau = (epsilon - &p_tau) / &p_u;
            if q_utheta <= zero || q_utau <= zero {
                return Err(bad("q_utheta > 0 and q_utau > 0 when p_u > 0"));
            }
            Some(BeliefQ::new(q_utheta, q_utau).expect("ratios sum to one"))
        };
        Ok(InfoStructure {
            p_theta,
            p_tau,
            p_u,
            q,
        })
    }

    /// The information structure with every type observable.
    pub fn complete(epsilon: &Rational) -> Self {
        InfoStructure {
            p_theta: rat(1) - epsilon,
            p_tau: epsilon.clone(),
            p_u: rat(0),
            q: None,
        }
    }

    pub fn mass(&self, label: Label) -> &Rational {
        match label {
            Label::Theta => &self.p_theta,
            Label::Tau => &self.p_tau,
            Label::U => &self.p_u,
        }
    }

    pub fn present_labels(&self) -> Vec<Label> {
        [Label::Theta, Label::Tau, Label::U]
            .into_iter()
            .filter(|&l| !self.mass(l).is_zero())
            .collect()
    }
}

/// An unordered label class, stored with the smaller label first.
pub type ClassI = (Label, Label);

fn canonical_class(a: Label, b: Label) -> ClassI {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Match proportions over ordered label pairs; rows exist only for labels with
/// positive mass.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchingConfigurationI {
    mu: BTreeMap<(Label, Label), Rational>,
}

impl MatchingConfigurationI {
    pub fn new(entries: Vec<((Label, Label), Rational)>) -> Self {
        MatchingConfigurationI {
            mu: entries.into_iter().collect(),
        }
    }

    pub fn mu(&self, a: Label, b: Label) -> Rational {
        self.mu.get(&(a, b)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Label, Label), &Rational)> {
        self.mu.iter()
    }

    fn validate(&self, info: &InfoStructure) -> Result<(), IncompleteError> {
        let labels = [Label::Theta, Label::Tau, Label::U];
        for (&(a, b), v) in &self.mu {
            if info.mass(a).is_zero() {
                return Err(IncompleteError::BadConfiguration {
                    equation: format!("mu row for absent label {a}"),
                });
            }
            if *v < Rational::zero() || *v > rat(1) {
                return Err(IncompleteError::BadConfiguration {
                    equation: format!("0 <= mu_{{{a},{b}}} <= 1"),
                });
            }
            if !v.is_zero() && info.mass(b).is_zero() {
                return Err(IncompleteError::BadConfiguration {
                    equation: format!("mu_{{{a},{b}}} > 0 with absent label {b}"),
                });
            }
        }
        for a in info.present_labels() {
            let sum: Rational = labels.iter().map(|&b| self.mu(a, b)).sum();
            if sum != rat(1) {
                return Err(IncompleteError::BadConfiguration {
                    equation: format!("mu_{{{a},theta}} + mu_{{{a},tau}} + mu_{{{a},u}} = 1"),
                });
            }
        }
        for &a in &labels {
            for &b in &labels {
                if info.mass(a) * self.mu(a, b) != info.mass(b) * self.mu(b, a) {
                    return Err(IncompleteError::BadConfiguration {
                        equation: format!("p_{a} mu_{{{a},{b}}} = p_{b} mu_{{{b},{a}}}"),
                    });
                }
            }
        }
        Ok(())
    }

    fn class_mass(&self, info: &InfoStructure, class: ClassI) -> Rational {
        info.mass(class.0) * self.mu(class.0, class.1)
    }
}

/// Strategy entries per positive-mass label class; the first strategy belongs
/// to the class's first (smaller) label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyProfileI {
    entries: BTreeMap<ClassI, StrategyPair>,
}

impl StrategyProfileI {
    pub fn new(entries: Vec<(ClassI, StrategyPair)>) -> Self {
        let entries = entries
            .into_iter()
            .map(|((a, b), p)| {
                if a <= b {
                    ((a, b), if a == b { p.canonical_unordered() } else { p })
                } else {
                    ((b, a), p.swapped())
                }
            })
            .collect();
        StrategyProfileI { entries }
    }

    pub fn entry(&self, a: Label, b: Label) -> Option<&StrategyPair> {
        self.entries.get(&canonical_class(a, b))
    }

    pub fn classes(&self) -> impl Iterator<Item = (&ClassI, &StrategyPair)> {
        self.entries.iter()
    }
}

/// A matching profile with incomplete information.
#[derive(Debug, Clone)]
pub struct MatchingProfileI {
    pub state: PopulationState,
    pub info: InfoStructure,
    pub config: MatchingConfigurationI,
    pub profile: StrategyProfileI,
}

impl MatchingProfileI {
    pub fn new(
        state: PopulationState,
        info: InfoStructure,
        config: MatchingConfigurationI,
        profile: StrategyProfileI,
    ) -> Result<Self, IncompleteError> {
        config.validate(&info)?;
        let labels = [Label::Theta, Label::Tau, Label::U];
        for &a in &labels {
            for &b in &labels {
                if a > b {
                    continue;
                }
                let active = !config.class_mass(&info, (a, b)).is_zero();
                match (active, profile.entry(a, b)) {
                    (true, None) => {
                        return Err(IncompleteError::BadProfileEntry(
                            a,
                            b,
                            "missing although the class has positive mass".into(),
                        ))
                    }
                    (false, Some(_)) => {
                        return Err(IncompleteError::BadProfileEntry(
                            a,
                            b,
                            "present although the class has zero mass".into(),
                        ))
                    }
                    (true, Some(p)) => {
                        if p.first.len() != state.strategy_count()
                            || p.second.len() != state.strategy_count()
                        {
                            return Err(IncompleteError::BadProfileEntry(
                                a,
                                b,
                                "defined over the wrong strategy set".into(),
                            ));
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        Ok(MatchingProfileI {
            state,
            info,
            config,
            profile,
        })
    }

    /// Embed a complete-information profile as the `p_u = 0` special case.
    pub fn from_complete(mp: &MatchingProfileC) -> Self {
        let info = InfoStructure::complete(&mp.state.epsilon);
        let config = MatchingConfigurationI::new(vec![
            ((Label::Theta, Label::Theta), mp.config.theta_theta.clone()),
            ((Label::Theta, Label::Tau), mp.config.theta_tau.clone()),
            ((Label::Tau, Label::Theta), mp.config.tau_theta.clone()),
            ((Label::Tau, Label::Tau), mp.config.tau_tau.clone()),
        ]);
        let mut entries = Vec::new();
        for (class, pair) in mp.profile.classes() {
            let (a, b) = class.roles();
            entries.push(((Label::observable(a), Label::observable(b)), pair.clone()));
        }
        MatchingProfileI {
            state: mp.state.clone(),
            info,
            config,
            profile: StrategyProfileI::new(entries),
        }
    }

    pub fn class_active(&self, a: Label, b: Label) -> bool {
        !self
            .config
            .class_mass(&self.info, canonical_class(a, b))
            .is_zero()
    }

    fn belief(&self) -> &BeliefQ {
        self.q().expect("operation requires p_u > 0")
    }

    pub fn q(&self) -> Option<&BeliefQ> {
        self.info.q.as_ref()
    }

    /// Utility of an agent of hidden type `me` (with any label) playing `x`
    /// against an opponent wearing `opp_label` who plays `y`.
    pub fn agent_utility(
        &self,
        me: Role,
        x: &MixedStrategy,
        opp_label: Label,
        y: &MixedStrategy,
    ) -> Rational {
        let ptype = self.state.type_of(me);
        match opp_label {
            Label::Theta | Label::Tau => {
                let opp_role = if opp_label == Label::Theta {
                    Role::Theta
                } else {
                    Role::Tau
                };
                let opp = if me == opp_role {
                    Opponent::Same
                } else {
                    Opponent::Cross
                };
                ptype.utility(x, y, opp)
            }
            Label::U => ptype.utility_vs_u(me, x, y, self.belief()),
        }
    }

    /// The effective table of hidden type `me` against an opponent with the
    /// given label.
    fn agent_table(&self, me: Role, opp_label: Label) -> Vec<Vec<Rational>> {
        let ptype = self.state.type_of(me);
        match opp_label {
            Label::Theta | Label::Tau => {
                let opp_role = if opp_label == Label::Theta {
                    Role::Theta
                } else {
                    Role::Tau
                };
                let opp = if me == opp_role {
                    Opponent::Same
                } else {
                    Opponent::Cross
                };
                ptype.table(opp).to_vec()
            }
            Label::U => ptype.table_vs_u(me, self.belief()),
        }
    }

    /// Hidden types an agent with this label can carry.
    fn hidden_types(label: Label) -> Vec<Role> {
        match label {
            Label::Theta => vec![Role::Theta],
            Label::Tau => vec![Role::Tau],
            Label::U => vec![Role::Theta, Role::Tau],
        }
    }
}

/// Outcome of the Bayes-Nash internal check.
#[derive(Debug, Clone, PartialEq)]
pub enum InternalCheckI {
    Ok,
    Violation {
        class: ClassI,
        /// 0 for the class's first label, 1 for the second.
        side: usize,
        /// Hidden type whose optimality fails.
        hidden_type: Role,
        better_response: usize,
        current_value: Rational,
        better_value: Rational,
    },
}

/// Conditions (i)-(iii) of the Bayes-Nash equilibrium profile definition.
pub fn check_bayes_nash(mp: &MatchingProfileI) -> InternalCheckI {
    for (&(la, lb), pair) in mp.profile.classes() {
        if !mp.class_active(la, lb) {
            continue;
        }
        let sides = [
            (la, &pair.first, lb, &pair.second, 0usize),
            (lb, &pair.second, la, &pair.first, 1usize),
        ];
        for (me_label, mine, other_label, theirs, side) in sides {
            for me in MatchingProfileI::hidden_types(me_label) {
                let table = mp.agent_table(me, other_label);
                let current = crate::game::bilinear(&table, mine, theirs);
                let (best, brs) = crate::equilibrium::best_responses(&table, theirs);
                if best > current {
                    return InternalCheckI::Violation {
                        class: (la, lb),
                        side,
                        hidden_type: me,
                        better_response: brs[0],
                        current_value: current,
                        better_value: best,
                    };
                }
            }
        }
    }
    InternalCheckI::Ok
}

/// A deviating agent's current position.
#[derive(Debug, Clone)]
struct PositionI {
    label: Label,
    hidden: Role,
    utility: Rational,
    class: ClassI,
    side: usize,
}

fn positions_i(mp: &MatchingProfileI) -> Vec<PositionI> {
    let mut out = Vec::new();
    for (&(la, lb), pair) in mp.profile.classes() {
        if !mp.class_active(la, lb) {
            continue;
        }
        let sides = [
            (la, &pair.first, lb, &pair.second, 0usize),
            (lb, &pair.second, la, &pair.first, 1usize),
        ];
        for (me_label, mine, other_label, theirs, side) in sides {
            for me in MatchingProfileI::hidden_types(me_label) {
                out.push(PositionI {
                    label: me_label,
                    hidden: me,
                    utility: mp.agent_utility(me, mine, other_label, theirs),
                    class: (la, lb),
                    side,
                });
            }
        }
    }
    out
}

fn role_subsets() -> [Vec<Role>; 3] {
    [
        vec![Role::Theta],
        vec![Role::Tau],
        vec![Role::Theta, Role::Tau],
    ]
}

/// Belief conditional on the participating set.
fn conditional_q(q: &BeliefQ, d: &[Role]) -> Vec<Rational> {
    if d.len() == 1 {
        vec![rat(1)]
    } else {
        d.iter().map(|&t| q.for_role(t).clone()).collect()
    }
}

fn participant(pos: &PositionI) -> Participant {
    Participant {
        agent: if pos.label == Label::U {
            Agent::Hidden(pos.hidden)
        } else {
            Agent::Observable(pos.hidden)
        },
        current_utility: pos.utility.clone(),
        origin: OriginClass::Labeled {
            class: pos.class,
            side: pos.side,
        },
    }
}

/// Search for an incomplete-information blocking pair, trying the given cases
/// in order and scanning deterministically within each. Returns the first
/// witness along with a degeneracy flag from the equilibrium enumerations.
pub fn find_blocking_ii(
    mp: &MatchingProfileI,
    cases: &[BlockingCase],
    cap: &SupportCap,
) -> Result<(Option<BlockingWitness>, bool), IncompleteError> {
    let pos = positions_i(mp);
    let mut degenerate = false;
    for &case in cases {
        let found = match case {
            BlockingCase::Complete => case_complete(mp, &pos, cap, &mut degenerate)?,
            BlockingCase::OneSided => case_one_sided(mp, &pos, cap, &mut degenerate)?,
            BlockingCase::TwoSidedConditional => case_two_sided(mp, &pos, cap, &mut degenerate)?,
            BlockingCase::TwoSidedStrong => case_two_sided_strong(mp, &pos)?,
        };
        if found.is_some() {
            return Ok((found, degenerate));
        }
    }
    Ok((None, degenerate))
}

/// Case I: both deviators observable; identical to complete-information blocking.
fn case_complete(
    mp: &MatchingProfileI,
    pos: &[PositionI],
    cap: &SupportCap,
    degenerate: &mut bool,
) -> Result<Option<BlockingWitness>, IncompleteError> {
    for a in [Role::Theta, Role::Tau] {
        for b in [Role::Theta, Role::Tau] {
            let set = enumerate_nash(&mp.state.typed_game(a, b), cap)?;
            *degenerate |= set.degenerate;
            for eq in &set.equilibria {
                let ua = mp.state.utility(a, &eq.first, b, &eq.second);
                let ub = mp.state.utility(b, &eq.second, a, &eq.first);
                for pa in pos.iter().filter(|p| p.label == Label::observable(a)) {
                    if ua <= pa.utility {
                        continue;
                    }
                    for pb in pos.iter().filter(|p| p.label == Label::observable(b)) {
                        if ub <= pb.utility {
                            continue;
                        }
                        return Ok(Some(BlockingWitness {
                            case: BlockingCase::Complete,
                            participants: [participant(pa), participant(pb)],
                            agreed: eq.clone(),
                            plans: None,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Status quo of each hidden type sitting in the given u-class.
fn u_status_quo(mp: &MatchingProfileI, class: ClassI, side: usize) -> [(Role, Rational); 2] {
    let pair = mp.profile.entry(class.0, class.1).expect("active class");
    let (mine, other_label, theirs) = if side == 0 {
        (&pair.first, class.1, &pair.second)
    } else {
        (&pair.second, class.0, &pair.first)
    };
    [
        (
            Role::Theta,
            mp.agent_utility(Role::Theta, mine, other_label, theirs),
        ),
        (
            Role::Tau,
            mp.agent_utility(Role::Tau, mine, other_label, theirs),
        ),
    ]
}

fn u_positions(pos: &[PositionI]) -> Vec<&PositionI> {
    pos.iter().filter(|p| p.label == Label::U).collect()
}

/// Case II: an observable agent proposes to a label-u agent under a plan whose
/// participating set must be exactly the set of hidden types that gain.
fn case_one_sided(
    mp: &MatchingProfileI,
    pos: &[PositionI],
    cap: &SupportCap,
    degenerate: &mut bool,
) -> Result<Option<BlockingWitness>, IncompleteError> {
    if mp.q().is_none() {
        return Ok(None);
    }
    let q = mp.belief().clone();
    let u_pos = u_positions(pos);
    for a in [Role::Theta, Role::Tau] {
        let a_positions: Vec<&PositionI> = pos
            .iter()
            .filter(|p| p.label == Label::observable(a))
            .collect();
        if a_positions.is_empty() {
            continue;
        }
        // distinct u-side origins (class, side)
        let mut u_origins: Vec<(ClassI, usize)> = u_pos.iter().map(|p| (p.class, p.side)).collect();
        u_origins.dedup();
        for (u_class, u_side) in u_origins {
            let sq = u_status_quo(mp, u_class, u_side);
            for d in role_subsets() {
                let weights = conditional_q(&q, &d);
                // Left: the observable proposer; right: one agent per type in D.
                let left = vec![AgentPayoff {
                    vs: d
                        .iter()
                        .zip(&weights)
                        .map(|(&t, w)| scale_table(&mp.agent_table(a, Label::observable(t)), w))
                        .collect(),
                }];
                let right = d
                    .iter()
                    .map(|&t| AgentPayoff {
                        vs: vec![mp.agent_table(t, Label::observable(a))],
                    })
                    .collect();
                let game = SidedGame {
                    n: mp.state.strategy_count(),
                    left,
                    right,
                };
                let outcome = enumerate_sided(&game, cap.agent_form, cap)?;
                *degenerate |= outcome.degenerate;
                for profile in &outcome.profiles {
                    let x_hat = &profile.left[0];
                    // participation must match exactly the gainers
                    let mut participation_ok = true;
                    for (t, sq_t) in &sq {
                        let table = mp.agent_table(*t, Label::observable(a));
                        let (best, _) = crate::equilibrium::best_responses(&table, x_hat);
                        let joins = best > *sq_t;
                        if joins != d.contains(t) {
                            participation_ok = false;
                            break;
                        }
                    }
                    if !participation_ok {
                        continue;
                    }
                    let val_a: Rational = d
                        .iter()
                        .zip(&weights)
                        .zip(&profile.right)
                        .map(|((&t, w), y_t)| {
                            w * mp.agent_utility(a, x_hat, Label::observable(t), y_t)
                        })
                        .sum();
                    for pa in &a_positions {
                        if val_a <= pa.utility {
                            continue;
                        }
                        let u_part = u_pos
                            .iter()
                            .find(|p| p.class == u_class && p.side == u_side && p.hidden == d[0])
                            .expect("u position exists");
                        let plan = DeviationPlan {
                            participants: d.clone(),
                            strategies: profile.right.clone(),
                        };
                        return Ok(Some(BlockingWitness {
                            case: BlockingCase::OneSided,
                            participants: [participant(pa), participant(u_part)],
                            agreed: StrategyPair::new(x_hat.clone(), profile.right[0].clone()),
                            plans: Some((plan, None)),
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

fn scale_table(table: &[Vec<Rational>], w: &Rational) -> Vec<Vec<Rational>> {
    table
        .iter()
        .map(|row| row.iter().map(|v| v * w).collect())
        .collect()
}

/// Case III: two label-u agents deviate under plans whose participating sets
/// both satisfy the exact-participation fixed point.
fn case_two_sided(
    mp: &MatchingProfileI,
    pos: &[PositionI],
    cap: &SupportCap,
    degenerate: &mut bool,
) -> Result<Option<BlockingWitness>, IncompleteError> {
    if mp.q().is_none() {
        return Ok(None);
    }
    let q = mp.belief().clone();
    let u_pos = u_positions(pos);
    let mut u_origins: Vec<(ClassI, usize)> = u_pos.iter().map(|p| (p.class, p.side)).collect();
    u_origins.dedup();
    for &(c_class, c_side) in &u_origins {
        let sq_left = u_status_quo(mp, c_class, c_side);
        for &(d_class, d_side) in &u_origins {
            let sq_right = u_status_quo(mp, d_class, d_side);
            for d_left in role_subsets() {
                let w_left = conditional_q(&q, &d_left);
                for d_right in role_subsets() {
                    let w_right = conditional_q(&q, &d_right);
                    let left = d_left
                        .iter()
                        .map(|&t| AgentPayoff {
                            vs: d_right
                                .iter()
                                .zip(&w_right)
                                .map(|(&t2, w)| {
                                    scale_table(&mp.agent_table(t, Label::observable(t2)), w)
                                })
                                .collect(),
                        })
                        .collect();
                    let right = d_right
                        .iter()
                        .map(|&t2| AgentPayoff {
                            vs: d_left
                                .iter()
                                .zip(&w_left)
                                .map(|(&t, w)| {
                                    scale_table(&mp.agent_table(t2, Label::observable(t)), w)
                                })
                                .collect(),
                        })
                        .collect();
                    let game = SidedGame {
                        n: mp.state.strategy_count(),
                        left,
                        right,
                    };
                    let outcome = enumerate_sided(&game, cap.agent_form, cap)?;
                    *degenerate |= outcome.degenerate;
                    for profile in &outcome.profiles {
                        if !participation_exact(
                            mp,
                            &sq_left,
                            &d_left,
                            &d_right,
                            &w_right,
                            &profile.right,
                        ) || !participation_exact(
                            mp,
                            &sq_right,
                            &d_right,
                            &d_left,
                            &w_left,
                            &profile.left,
                        ) {
                            continue;
                        }
                        let left_agent = u_pos
                            .iter()
                            .find(|p| {
                                p.class == c_class && p.side == c_side && p.hidden == d_left[0]
                            })
                            .expect("u position exists");
                        let right_agent = u_pos
                            .iter()
                            .find(|p| {
                                p.class == d_class && p.side == d_side && p.hidden == d_right[0]
                            })
                            .expect("u position exists");
                        return Ok(Some(BlockingWitness {
                            case: BlockingCase::TwoSidedConditional,
                            participants: [participant(left_agent), participant(right_agent)],
                            agreed: StrategyPair::new(
                                profile.left[0].clone(),
                                profile.right[0].clone(),
                            ),
                            plans: Some((
                                DeviationPlan {
                                    participants: d_left.clone(),
                                    strategies: profile.left.clone(),
                                },
                                Some(DeviationPlan {
                                    participants: d_right.clone(),
                                    strategies: profile.right.clone(),
                                }),
                            )),
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Exact-participation condition: the types gaining strictly against the
/// opposing plan are exactly the declared participants.
fn participation_exact(
    mp: &MatchingProfileI,
    status_quo: &[(Role, Rational); 2],
    declared: &[Role],
    opp_set: &[Role],
    opp_weights: &[Rational],
    opp_strategies: &[MixedStrategy],
) -> bool {
    for (t, sq_t) in status_quo {
        let n = mp.state.strategy_count();
        let best = (0..n)
            .map(|i| {
                let x = MixedStrategy::pure(n, i);
                opp_set
                    .iter()
                    .zip(opp_weights)
                    .zip(opp_strategies)
                    .map(|((&t2, w), y)| w * mp.agent_utility(*t, &x, Label::observable(t2), y))
                    .sum::<Rational>()
            })
            .max()
            .expect("nonempty");
        if (best > *sq_t) != declared.contains(t) {
            return false;
        }
    }
    true
}

/// Case III*: two label-u agents of hidden types (a, b) agree on a pure pair
/// that must remain a strict improvement and mutual best response under every
/// deviation plan of the opposite side that honors the agreement. Affinity in
/// the other hidden type's strategy reduces the check to pure strategies and
/// the two membership cases.
fn case_two_sided_strong(
    mp: &MatchingProfileI,
    pos: &[PositionI],
) -> Result<Option<BlockingWitness>, IncompleteError> {
    if mp.q().is_none() {
        return Ok(None);
    }
    let u_pos = u_positions(pos);
    let mut u_origins: Vec<(ClassI, usize)> = u_pos.iter().map(|p| (p.class, p.side)).collect();
    u_origins.dedup();
    let n = mp.state.strategy_count();
    for &(c_class, c_side) in &u_origins {
        let sq_left = u_status_quo(mp, c_class, c_side);
        for &(d_class, d_side) in &u_origins {
            let sq_right = u_status_quo(mp, d_class, d_side);
            for a in [Role::Theta, Role::Tau] {
                let sq_a = &sq_left.iter().find(|(t, _)| *t == a).expect("both types").1;
                for b in [Role::Theta, Role::Tau] {
                    let sq_b = &sq_right
                        .iter()
                        .find(|(t, _)| *t == b)
                        .expect("both types")
                        .1;
                    for i in 0..n {
                        for j in 0..n {
                            let x_hat = MixedStrategy::pure(n, i);
                            let y_hat = MixedStrategy::pure(n, j);
                            if !strong_side_ok(mp, a, b, &x_hat, &y_hat, sq_a)
                                || !strong_side_ok(mp, b, a, &y_hat, &x_hat, sq_b)
                            {
                                continue;
                            }
                            let left_agent = u_pos
                                .iter()
                                .find(|p| p.class == c_class && p.side == c_side && p.hidden == a)
                                .expect("u position exists");
                            let right_agent = u_pos
                                .iter()
                                .find(|p| p.class == d_class && p.side == d_side && p.hidden == b)
                                .expect("u position exists");
                            return Ok(Some(BlockingWitness {
                                case: BlockingCase::TwoSidedStrong,
                                participants: [participant(left_agent), participant(right_agent)],
                                agreed: StrategyPair::new(x_hat, y_hat),
                                plans: None,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// One direction of the strong-incentive condition for deviator of hidden
/// type `me` whose named partner has hidden type `partner` and plays
/// `partner_strategy`.
fn strong_side_ok(
    mp: &MatchingProfileI,
    me: Role,
    partner: Role,
    my_strategy: &MixedStrategy,
    partner_strategy: &MixedStrategy,
    status_quo: &Rational,
) -> bool {
    let q = mp.belief();
    let n = mp.state.strategy_count();
    let partner_table = mp.agent_table(me, Label::observable(partner));
    let other = partner.other();
    let other_table = mp.agent_table(me, Label::observable(other));
    let my_vs = |table: &Vec<Vec<Rational>>, x: &MixedStrategy, y: &MixedStrategy| {
        crate::game::bilinear(table, x, y)
    };

    // Membership case 1: only the partner's type joins the other side.
    let val = my_vs(&partner_table, my_strategy, partner_strategy);
    let (best, _) = crate::equilibrium::best_responses(&partner_table, partner_strategy);
    if val != best || val <= *status_quo {
        return false;
    }

    // Membership case 2: both types join; the other type may play any
    // strategy, checked at the pure vertices.
    let w_partner = q.for_role(partner);
    let w_other = q.for_role(other);
    for z_idx in 0..n {
        let z = MixedStrategy::pure(n, z_idx);
        let value_of = |x: &MixedStrategy| {
            w_partner * my_vs(&partner_table, x, partner_strategy)
                + w_other * my_vs(&other_table, x, &z)
        };
        let mine = value_of(my_strategy);
        let best = (0..n)
            .map(|k| value_of(&MixedStrategy::pure(n, k)))
            .max()
            .expect("nonempty");
        if mine != best || mine <= *status_quo {
            return false;
        }
    }
    true
}

pub const ALL_CASES: [BlockingCase; 4] = [
    BlockingCase::Complete,
    BlockingCase::OneSided,
    BlockingCase::TwoSidedConditional,
    BlockingCase::TwoSidedStrong,
];

/// Bayes-Nash stability: internal check plus absence of blocking in all cases.
pub fn is_bayes_nash_stable(
    mp: &MatchingProfileI,
    cap: &SupportCap,
) -> Result<(StabilityVerdictI, bool), IncompleteError> {
    match check_bayes_nash(mp) {
        InternalCheckI::Ok => {}
        v => {
            return Ok((
                StabilityVerdictI::Unstable(UnstableReasonI::Internal(v)),
                false,
            ))
        }
    }
    let (witness, degenerate) = find_blocking_ii(mp, &ALL_CASES, cap)?;
    Ok(match witness {
        Some(w) => (
            StabilityVerdictI::Unstable(UnstableReasonI::Blocking(Box::new(w))),
            degenerate,
        ),
        None => (StabilityVerdictI::Stable, degenerate),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum StabilityVerdictI {
    Stable,
    Unstable(UnstableReasonI),
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnstableReasonI {
    Internal(InternalCheckI),
    Blocking(Box<BlockingWitness>),
}

impl StabilityVerdictI {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdictI::Stable)
    }
}

/// Average material payoffs per type under incomplete information.
pub fn average_fitness_ii(game: &MaterialGame, mp: &MatchingProfileI) -> (Rational, Rational) {
    let half = frac(1, 2);
    let pay =
        |x: &MixedStrategy, y: &MixedStrategy| material_payoff(game, x, y).expect("validated");
    // material payoff earned by the agent wearing `label` in class (label, other)
    let side_pay = |label: Label, other: Label| -> Rational {
        match mp.profile.entry(label, other) {
            None => Rational::zero(),
            Some(pair) => {
                if label == other {
                    &half * pay(&pair.first, &pair.second) + &half * pay(&pair.second, &pair.first)
                } else if canonical_class(label, other).0 == label {
                    pay(&pair.first, &pair.second)
                } else {
                    pay(&pair.second, &pair.first)
                }
            }
        }
    };
    let group_fitness = |label: Label| -> Rational {
        [Label::Theta, Label::Tau, Label::U]
            .into_iter()
            .map(|other| mp.config.mu(label, other) * side_pay(label, other))
            .sum()
    };
    let fitness_of = |role: Role| -> Rational {
        let (p_obs, share) = match role {
            Role::Theta => (&mp.info.p_theta, rat(1) - &mp.state.epsilon),
            Role::Tau => (&mp.info.p_tau, mp.state.epsilon.clone()),
        };
        let w_obs = p_obs / &share;
        let w_hidden = rat(1) - &w_obs;
        let mut g = Rational::zero();
        if !w_obs.is_zero() {
            g += &w_obs * group_fitness(Label::observable(role));
        }
        if !w_hidden.is_zero() {
            g += &w_hidden * group_fitness(Label::U);
        }
        g
    };
    (fitness_of(Role::Theta), fitness_of(Role::Tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::equilibrium::SupportCap;
    use crate::matching::{ClassC, MatchingConfiguration, StrategyProfileC};

    #[test]
    fn info_structure_derives_belief() {
        let info = InfoStructure::new(&frac(1, 2), frac(5, 18), frac(4, 9), frac(5, 18)).unwrap();
        let q = info.q.unwrap();
        assert_eq!(q.q_utheta, frac(4, 5));
        assert_eq!(q.q_utau, frac(1, 5));
    }

    #[test]
    fn info_structure_rejects_bad_masses() {
        // p_theta above 1 - eps
        assert!(InfoStructure::new(&frac(1, 2), frac(2, 3), rat(0), frac(1, 3)).is_err());
        // one-sided pool (q_utau would be zero)
        assert!(InfoStructure::new(&frac(1, 2), rat(0), frac(1, 2), frac(1, 2)).is_err());
    }

    #[test]
    fn coordination_seeker_profile_is_bayes_nash() {
        let mp = cases::coordination_seeker_profile(rat(1), frac(1, 4), frac(1, 100)).unwrap();
        assert_eq!(check_bayes_nash(&mp), InternalCheckI::Ok);
    }

    #[test]
    fn coordination_seeker_large_delta_breaks_internal() {
        let mp = cases::coordination_seeker_profile(rat(1), frac(1, 4), frac(1, 2)).unwrap();
        match check_bayes_nash(&mp) {
            InternalCheckI::Violation {
                class,
                hidden_type,
                better_response,
                ..
            } => {
                // label-tau's B is no longer a best response against u playing A
                assert_eq!(class, (Label::Tau, Label::U));
                assert_eq!(hidden_type, Role::Tau);
                assert_eq!(better_response, 0);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn coordination_seeker_profile_is_stable_for_small_delta() {
        let mp = cases::coordination_seeker_profile(rat(1), frac(1, 4), frac(1, 100)).unwrap();
        let (verdict, _) = is_bayes_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable(), "got {verdict:?}");
    }

    #[test]
    fn coordination_seeker_fitness_brackets_two() {
        let g = cases::bos_game();
        let mp = cases::coordination_seeker_profile(rat(1), frac(1, 4), frac(1, 100)).unwrap();
        let (g_theta, g_tau) = average_fitness_ii(&g, &mp);
        assert_eq!(g_theta, frac(1193, 597));
        assert_eq!(g_tau, frac(399, 199));
        assert!(g_theta < rat(2));
        assert!(g_tau > rat(2));
    }

    #[test]
    fn pooled_profile_blocked_only_with_strong_incentives() {
        let mp = cases::pooled_coordination_profile().unwrap();
        assert_eq!(check_bayes_nash(&mp), InternalCheckI::Ok);
        let cap = SupportCap::default();
        let conditional_only = [
            BlockingCase::Complete,
            BlockingCase::OneSided,
            BlockingCase::TwoSidedConditional,
        ];
        let (w, _) = find_blocking_ii(&mp, &conditional_only, &cap).unwrap();
        assert!(w.is_none(), "cases I-III must fail, got {w:?}");
        let (w, _) = find_blocking_ii(&mp, &[BlockingCase::TwoSidedStrong], &cap).unwrap();
        let w = w.expect("strong-incentive witness expected");
        assert_eq!(w.case, BlockingCase::TwoSidedStrong);
        assert_eq!(w.agreed, StrategyPair::pure(2, 0, 0));
        assert_eq!(w.participants[0].agent, Agent::Hidden(Role::Theta));
        assert_eq!(w.participants[1].agent, Agent::Hidden(Role::Theta));
    }

    #[test]
    fn antiparochial_profile_is_stable_with_expected_fitness() {
        let g = cases::inefficient_nash_game();
        let mp = cases::antiparochial_profile().unwrap();
        assert_eq!(check_bayes_nash(&mp), InternalCheckI::Ok);
        let (g_theta, g_tau) = average_fitness_ii(&g, &mp);
        assert_eq!(g_theta, frac(78, 9));
        assert_eq!(g_tau, frac(79, 9));
        let (verdict, _) = is_bayes_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable(), "got {verdict:?}");
    }

    #[test]
    fn antiparochial_profile_with_parochial_efficient_theta_is_blocked() {
        let g = cases::inefficient_nash_game();
        let theta = crate::preference::build_type(
            &g,
            "theta",
            crate::preference::FamilyTag::ParochialEfficient,
            None,
        )
        .unwrap();
        let tau = crate::preference::build_adversary_type(
            &g,
            "tau",
            crate::preference::AdversaryRecipe::B4AntiparochialEfficient,
            &Default::default(),
        )
        .unwrap();
        let mp = cases::antiparochial_profile_with_theta(theta, tau).unwrap();
        let (verdict, _) = is_bayes_nash_stable(&mp, &SupportCap::default()).unwrap();
        // The arrangement collapses immediately: a label-theta agent facing
        // the pool prefers the efficient-total response over C.
        match verdict {
            StabilityVerdictI::Unstable(UnstableReasonI::Internal(InternalCheckI::Violation {
                class,
                hidden_type,
                better_response,
                ..
            })) => {
                assert_eq!(class, (Label::Theta, Label::U));
                assert_eq!(hidden_type, Role::Theta);
                assert_eq!(better_response, 1);
            }
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn p_u_zero_reduces_to_complete_information() {
        let g = cases::bos_game();
        let (theta, tau) = cases::illustrative_types(&g);
        let state = PopulationState::new(theta, tau, frac(1, 3)).unwrap();
        let stable = crate::matching::MatchingProfileC::new(
            state.clone(),
            MatchingConfiguration::assortative(),
            StrategyProfileC::new(vec![
                (ClassC::ThetaTheta, StrategyPair::pure(2, 0, 1)),
                (ClassC::TauTau, StrategyPair::pure(2, 0, 0)),
            ]),
        )
        .unwrap();
        let cap = SupportCap::default();
        let embedded = MatchingProfileI::from_complete(&stable);
        let (vi, _) = is_bayes_nash_stable(&embedded, &cap).unwrap();
        let (vc, _) = crate::matching::is_nash_stable(&stable, &cap).unwrap();
        assert!(vi.is_stable() && vc.is_stable());

        // blocked profile stays blocked after embedding
        let m = crate::game::MixedStrategy::new(vec![frac(2, 5), frac(3, 5)]).unwrap();
        let blocked = crate::matching::MatchingProfileC::new(
            state,
            MatchingConfiguration::assortative(),
            StrategyProfileC::new(vec![
                (ClassC::ThetaTheta, StrategyPair::new(m.clone(), m)),
                (ClassC::TauTau, StrategyPair::pure(2, 0, 0)),
            ]),
        )
        .unwrap();
        let embedded = MatchingProfileI::from_complete(&blocked);
        let (vi, _) = is_bayes_nash_stable(&embedded, &cap).unwrap();
        match vi {
            StabilityVerdictI::Unstable(UnstableReasonI::Blocking(w)) => {
                assert_eq!(w.case, BlockingCase::Complete);
                assert_eq!(w.agreed, StrategyPair::pure(2, 0, 1));
            }
            other => panic!("expected complete-case blocking, got {other:?}"),
        }
    }

    #[test]
    fn anticoordinator_profile_is_stable_and_favors_tau() {
        let g = cases::bos_game();
        let mp = cases::anticoordinator_profile(rat(1), frac(1, 4)).unwrap();
        assert_eq!(check_bayes_nash(&mp), InternalCheckI::Ok);
        let (g_theta, g_tau) = average_fitness_ii(&g, &mp);
        assert_eq!(g_theta, frac(17, 9));
        assert_eq!(g_tau, frac(15, 7));
        assert!(g_tau > g_theta);
        let (verdict, _) = is_bayes_nash_stable(&mp, &SupportCap::default()).unwrap();
        assert!(verdict.is_stable(), "got {verdict:?}");
    }
}
