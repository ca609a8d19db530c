//! Exact Nash equilibrium enumeration by support enumeration.
//!
//! The engine works on games in *two-sided agent form*: a set of left players
//! and a set of right players, where each player's payoff is a weighted sum of
//! bilinear interactions with the players on the opposite side. Ordinary
//! bimatrix games are the one-versus-one case; the one-sided and two-sided
//! deviation games of the incomplete-information blocking search are the
//! larger cases.
//!
//! For a fixed support assignment the equilibrium conditions split into two
//! independent exact linear systems (each side's indifference conditions
//! constrain only the opposite side's weights). Underdetermined systems are
//! resolved by enumerating the vertices of the feasible polytope, so the
//! output is the set of extreme equilibria, deduplicated and in deterministic
//! order; games where ties produce positive-dimensional equilibrium
//! components are flagged degenerate.

use crate::game::{bilinear, MixedStrategy, StrategyPair};
use crate::linalg::{affine_polytope_vertices, solve_linear, Inequality, LinearSolution};
use crate::preference::{Opponent, PreferenceType};
use crate::rational::{rat, Rational};
use num_traits::Zero;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquilibriumError {
    #[error("support enumeration capped at {cap} strategies, game has {got}")]
    CapExceeded { cap: usize, got: usize },
}

/// Configurable limits for the enumeration.
#[derive(Debug, Clone)]
pub struct SupportCap {
    /// Largest strategy-set size enumerated for plain two-player games.
    pub two_player: usize,
    /// Largest strategy-set size enumerated in agent-form deviation games.
    pub agent_form: usize,
    /// Largest free dimension resolved by vertex enumeration.
    pub vertex_dim: usize,
}

impl Default for SupportCap {
    fn default() -> Self {
        SupportCap {
            two_player: 6,
            agent_form: 4,
            vertex_dim: 6,
        }
    }
}

/// One player's payoff data: a table against each opposite-side player,
/// already scaled by that opponent's probability weight.
#[derive(Debug, Clone)]
pub struct AgentPayoff {
    pub vs: Vec<Vec<Vec<Rational>>>,
}

#[derive(Debug, Clone)]
pub struct SidedGame {
    pub n: usize,
    pub left: Vec<AgentPayoff>,
    pub right: Vec<AgentPayoff>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SidedProfile {
    pub left: Vec<MixedStrategy>,
    pub right: Vec<MixedStrategy>,
}

#[derive(Debug, Clone)]
pub struct EnumerationOutcome {
    pub profiles: Vec<SidedProfile>,
    pub degenerate: bool,
}

/// Expected payoff of pure strategy `i` for player `spec` given the opposite
/// side's strategies.
fn pure_payoff(spec: &AgentPayoff, i: usize, opposite: &[MixedStrategy]) -> Rational {
    let mut acc = Rational::zero();
    for (r, opp) in opposite.iter().enumerate() {
        for (j, w) in opp.weights().iter().enumerate() {
            if !w.is_zero() {
                acc += w * &spec.vs[r][i][j];
            }
        }
    }
    acc
}

fn best_pure_value(spec: &AgentPayoff, n: usize, opposite: &[MixedStrategy]) -> Rational {
    (0..n)
        .map(|i| pure_payoff(spec, i, opposite))
        .max()
        .expect("nonempty strategy set")
}

fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for mask in 1usize..(1 << n) {
        out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
    }
    out
}

fn assignments(per_player: &[Vec<Vec<usize>>]) -> Vec<Vec<usize>> {
    // cartesian product of support choices, as index vectors
    let mut out = vec![vec![]];
    for choices in per_player {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for partial in &out {
            for c in 0..choices.len() {
                let mut p = partial.clone();
                p.push(c);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Solve one side of the fixed-support system: the `solved` side's weights
/// (restricted to its supports) together with the opposite players' value
/// variables. Returns the feasible vertex set, or `None` when the system is
/// infeasible; sets `*component` when a positive-dimensional feasible set was
/// found.
#[allow(clippy::too_many_arguments)]
fn solve_block(
    n: usize,
    solved_supports: &[&Vec<usize>],
    opposite: &[AgentPayoff],
    opposite_supports: &[&Vec<usize>],
    vertex_dim: usize,
    component: &mut bool,
    capped: &mut bool,
) -> Option<Vec<Vec<MixedStrategy>>> {
    let num_solved = solved_supports.len();
    let num_opp = opposite.len();
    // Unknowns: one weight per supported strategy of each solved-side player,
    // then one value variable per opposite player.
    let offsets: Vec<usize> = solved_supports
        .iter()
        .scan(0usize, |acc, s| {
            let out = *acc;
            *acc += s.len();
            Some(out)
        })
        .collect();
    let num_weights: usize = solved_supports.iter().map(|s| s.len()).sum();
    let unknowns = num_weights + num_opp;

    let mut a: Vec<Vec<Rational>> = Vec::new();
    let mut b: Vec<Rational> = Vec::new();
    // Opposite players' indifference equations over their supports.
    for (p, spec) in opposite.iter().enumerate() {
        for &i in opposite_supports[p] {
            let mut row = vec![Rational::zero(); unknowns];
            for (r, supp) in solved_supports.iter().enumerate() {
                for (k, &j) in supp.iter().enumerate() {
                    row[offsets[r] + k] = spec.vs[r][i][j].clone();
                }
            }
            row[num_weights + p] = rat(-1);
            a.push(row);
            b.push(Rational::zero());
        }
    }
    // Simplex constraints for the solved side.
    for (r, supp) in solved_supports.iter().enumerate() {
        let mut row = vec![Rational::zero(); unknowns];
        for k in 0..supp.len() {
            row[offsets[r] + k] = rat(1);
        }
        a.push(row);
        b.push(rat(1));
    }

    let (particular, nullspace) = match solve_linear(&a, &b) {
        LinearSolution::Inconsistent => return None,
        LinearSolution::Affine {
            particular,
            nullspace,
        } => (particular, nullspace),
    };

    let mut ineqs: Vec<Inequality> = Vec::new();
    // Weights nonnegative.
    for w in 0..num_weights {
        let mut c = vec![Rational::zero(); unknowns];
        c[w] = rat(-1);
        ineqs.push(Inequality {
            coeffs: c,
            rhs: Rational::zero(),
        });
    }
    // Off-support strategies of opposite players must not beat the value.
    for (p, spec) in opposite.iter().enumerate() {
        for i in 0..n {
            if opposite_supports[p].contains(&i) {
                continue;
            }
            let mut c = vec![Rational::zero(); unknowns];
            for (r, supp) in solved_supports.iter().enumerate() {
                for (k, &j) in supp.iter().enumerate() {
                    c[offsets[r] + k] = spec.vs[r][i][j].clone();
                }
            }
            c[num_weights + p] = rat(-1);
            ineqs.push(Inequality {
                coeffs: c,
                rhs: Rational::zero(),
            });
        }
    }

    let verts = match affine_polytope_vertices(&particular, &nullspace, &ineqs, vertex_dim) {
        Some(v) => v,
        None => {
            *capped = true;
            return None;
        }
    };
    if verts.is_empty() {
        return None;
    }
    if !nullspace.is_empty() && verts.len() > 1 {
        *component = true;
    }

    let mut out = Vec::with_capacity(verts.len());
    for z in verts {
        let mut strategies = Vec::with_capacity(num_solved);
        for (r, supp) in solved_supports.iter().enumerate() {
            let mut weights = vec![Rational::zero(); n];
            for (k, &j) in supp.iter().enumerate() {
                weights[j] = z[offsets[r] + k].clone();
            }
            match MixedStrategy::new(weights) {
                Ok(s) => strategies.push(s),
                Err(_) => break,
            }
        }
        if strategies.len() == num_solved {
            out.push(strategies);
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

/// Exact verification that a profile is an equilibrium of the sided game.
pub fn is_sided_equilibrium(game: &SidedGame, profile: &SidedProfile) -> bool {
    let check = |players: &[AgentPayoff], own: &[MixedStrategy], opp: &[MixedStrategy]| {
        players.iter().zip(own).all(|(spec, strat)| {
            let best = best_pure_value(spec, game.n, opp);
            strat
                .support()
                .iter()
                .all(|&i| pure_payoff(spec, i, opp) == best)
        })
    };
    check(&game.left, &profile.left, &profile.right)
        && check(&game.right, &profile.right, &profile.left)
}

/// Enumerate the extreme equilibria of a two-sided agent-form game.
pub fn enumerate_sided(
    game: &SidedGame,
    cap_strategies: usize,
    cap: &SupportCap,
) -> Result<EnumerationOutcome, EquilibriumError> {
    if game.n > cap_strategies {
        return Err(EquilibriumError::CapExceeded {
            cap: cap_strategies,
            got: game.n,
        });
    }
    let subsets = nonempty_subsets(game.n);
    let left_choices: Vec<Vec<Vec<usize>>> = vec![subsets.clone(); game.left.len()];
    let right_choices: Vec<Vec<Vec<usize>>> = vec![subsets.clone(); game.right.len()];

    let mut found: BTreeSet<SidedProfile> = BTreeSet::new();
    let mut degenerate = false;
    let mut capped = false;

    for left_assign in assignments(&left_choices) {
        let left_supports: Vec<&Vec<usize>> = left_assign.iter().map(|&c| &subsets[c]).collect();
        for right_assign in assignments(&right_choices) {
            let right_supports: Vec<&Vec<usize>> =
                right_assign.iter().map(|&c| &subsets[c]).collect();

            // Right-side weights are pinned by left players' indifference.
            let mut comp = false;
            let Some(right_candidates) = solve_block(
                game.n,
                &right_supports,
                &game.left,
                &left_supports,
                cap.vertex_dim,
                &mut comp,
                &mut capped,
            ) else {
                continue;
            };
            let Some(left_candidates) = solve_block(
                game.n,
                &left_supports,
                &game.right,
                &right_supports,
                cap.vertex_dim,
                &mut comp,
                &mut capped,
            ) else {
                continue;
            };

            let mut emitted = false;
            for lc in &left_candidates {
                for rc in &right_candidates {
                    let profile = SidedProfile {
                        left: lc.clone(),
                        right: rc.clone(),
                    };
                    // Support enumeration is sound only after an exact
                    // re-check of the best-response conditions.
                    if is_sided_equilibrium(game, &profile) {
                        found.insert(profile);
                        emitted = true;
                    }
                }
            }
            if comp && emitted {
                degenerate = true;
            }
        }
    }
    if capped {
        degenerate = true;
    }
    Ok(EnumerationOutcome {
        profiles: found.into_iter().collect(),
        degenerate,
    })
}

/// A two-player game between a row and a column player.
///
/// `row[i][j]` is the row player's utility for `i` against `j`; `col[j][i]`
/// is the column player's utility for `j` against `i`.
#[derive(Debug, Clone)]
pub struct TypedGame {
    pub row: Vec<Vec<Rational>>,
    pub col: Vec<Vec<Rational>>,
}

impl TypedGame {
    pub fn size(&self) -> usize {
        self.row.len()
    }

    /// The self-play game of a preference type (same-type tables both sides).
    pub fn self_game(ptype: &PreferenceType) -> Self {
        let t = ptype.table(Opponent::Same).to_vec();
        TypedGame {
            row: t.clone(),
            col: t,
        }
    }

    /// The cross-type game: `row_type` on the row side against `col_type`.
    pub fn cross_game(row_type: &PreferenceType, col_type: &PreferenceType) -> Self {
        TypedGame {
            row: row_type.table(Opponent::Cross).to_vec(),
            col: col_type.table(Opponent::Cross).to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumSet {
    pub equilibria: Vec<StrategyPair>,
    pub degenerate: bool,
}

/// Highest expected utility against `opp` and the pure strategies attaining it.
pub fn best_responses(table: &[Vec<Rational>], opp: &MixedStrategy) -> (Rational, Vec<usize>) {
    let n = table.len();
    let values: Vec<Rational> = (0..n)
        .map(|i| {
            opp.weights()
                .iter()
                .enumerate()
                .map(|(j, w)| w * &table[i][j])
                .sum()
        })
        .collect();
    let best = values.iter().max().cloned().expect("nonempty table");
    let brs = (0..n).filter(|&i| values[i] == best).collect();
    (best, brs)
}

/// All extreme Nash equilibria of the two-player game.
pub fn enumerate_nash(
    tg: &TypedGame,
    cap: &SupportCap,
) -> Result<EquilibriumSet, EquilibriumError> {
    let n = tg.size();
    // Column tables are stored from the column player's view already.
    let game = SidedGame {
        n,
        left: vec![AgentPayoff {
            vs: vec![tg.row.clone()],
        }],
        right: vec![AgentPayoff {
            vs: vec![tg.col.clone()],
        }],
    };
    let outcome = enumerate_sided(&game, cap.two_player, cap)?;
    let equilibria = outcome
        .profiles
        .into_iter()
        .map(|p| StrategyPair::new(p.left[0].clone(), p.right[0].clone()))
        .collect();
    Ok(EquilibriumSet {
        equilibria,
        degenerate: outcome.degenerate,
    })
}

/// The loser-best equilibria of a type's self-game: those maximizing the
/// minimum of the two players' utilities, reported up to swap identification.
#[derive(Debug, Clone)]
pub struct LoserBest {
    pub value: Rational,
    pub pairs: Vec<StrategyPair>,
    pub degenerate: bool,
}

pub fn loser_best_set(
    ptype: &PreferenceType,
    cap: &SupportCap,
) -> Result<LoserBest, EquilibriumError> {
    let tg = TypedGame::self_game(ptype);
    let set = enumerate_nash(&tg, cap)?;
    let table = ptype.table(Opponent::Same);
    let mut best: Option<Rational> = None;
    let mut pairs: BTreeSet<StrategyPair> = BTreeSet::new();
    for eq in &set.equilibria {
        let u1 = bilinear(table, &eq.first, &eq.second);
        let u2 = bilinear(table, &eq.second, &eq.first);
        let loser = u1.min(u2);
        match &best {
            Some(b) if loser < *b => {}
            Some(b) if loser == *b => {
                pairs.insert(eq.canonical_unordered());
            }
            _ => {
                best = Some(loser);
                pairs = BTreeSet::new();
                pairs.insert(eq.canonical_unordered());
            }
        }
    }
    Ok(LoserBest {
        value: best.expect("equilibrium existence"),
        pairs: pairs.into_iter().collect(),
        degenerate: set.degenerate,
    })
}

/// A cross-game equilibrium annotated with both sides' utilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossEquilibrium {
    /// Theta's strategy first, tau's second.
    pub pair: StrategyPair,
    pub u_theta: Rational,
    pub u_tau: Rational,
}

/// The weakly efficient frontier of the cross-game equilibrium set.
#[derive(Debug, Clone)]
pub struct Frontier {
    /// Enumerated cross equilibria not strictly Pareto-dominated within the set.
    pub ne_e: Vec<CrossEquilibrium>,
    /// Frontier members giving theta at least its same-type loser-best value.
    pub ne_estar: Vec<CrossEquilibrium>,
    /// Best tau utility over `ne_estar`, absent when that set is empty.
    pub l_tau_theta: Option<Rational>,
    pub degenerate: bool,
}

/// Compute the frontier for the game between `theta` (row) and `tau` (column).
///
/// `l_theta_theta` is theta's loser-best value in its self-game. Domination
/// and threshold comparisons are invariant under the affine normalization the
/// construction permits, so utilities are compared in their original scale.
pub fn ne_frontier(
    theta: &PreferenceType,
    tau: &PreferenceType,
    l_theta_theta: &Rational,
    cap: &SupportCap,
) -> Result<Frontier, EquilibriumError> {
    let tg = TypedGame::cross_game(theta, tau);
    let set = enumerate_nash(&tg, cap)?;
    let annotated: Vec<CrossEquilibrium> = set
        .equilibria
        .iter()
        .map(|eq| CrossEquilibrium {
            pair: eq.clone(),
            u_theta: theta.utility(&eq.first, &eq.second, Opponent::Cross),
            u_tau: tau.utility(&eq.second, &eq.first, Opponent::Cross),
        })
        .collect();
    let ne_e: Vec<CrossEquilibrium> = annotated
        .iter()
        .filter(|e| {
            !annotated
                .iter()
                .any(|d| d.u_theta > e.u_theta && d.u_tau > e.u_tau)
        })
        .cloned()
        .collect();
    let ne_estar: Vec<CrossEquilibrium> = ne_e
        .iter()
        .filter(|e| e.u_theta >= *l_theta_theta)
        .cloned()
        .collect();
    let l_tau_theta = ne_estar.iter().map(|e| e.u_tau.clone()).max();
    Ok(Frontier {
        ne_e,
        ne_estar,
        l_tau_theta,
        degenerate: set.degenerate,
    })
}
