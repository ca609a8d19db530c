//! Preference types: utility tables over strategy pairs, split by whether the
//! opponent carries the same type or the other co-resident one.
//!
//! Named families cover the selfish/efficient axis with weak (additive bonus)
//! or strong (parochial) homophily. Adversary recipes build the mutant types
//! used by the instability arguments, so those arguments are executable.

use crate::game::{
    bilinear, efficient_pairs, is_strictly_efficient, GameError, MaterialGame, MixedStrategy,
};
use crate::rational::{rat, Rational};
use num_traits::Zero;
use std::fmt;
use thiserror::Error;

/// A pair of square utility tables (same-type, cross-type).
pub type TablePair = (Vec<Vec<Rational>>, Vec<Vec<Rational>>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PreferenceError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("family `{0}` requires a strictly positive lambda")]
    MissingLambda(String),
    #[error("custom table must be {expected}x{expected}; row {row} has {got} entries")]
    BadTable {
        expected: usize,
        row: usize,
        got: usize,
    },
    #[error("recipe `{recipe}` does not fit this game: {reason}")]
    RecipeMismatch { recipe: String, reason: String },
    #[error("unknown adversary recipe `{0}`")]
    UnknownRecipe(String),
    #[error("belief weights must be in [0,1] and sum to 1")]
    BadBelief,
}

/// Which side of the two-type population a preference type occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Theta,
    Tau,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Theta => Role::Tau,
            Role::Tau => Role::Theta,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Theta => write!(f, "theta"),
            Role::Tau => write!(f, "tau"),
        }
    }
}

/// Is the opponent of the same preference type, or the co-resident other one?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opponent {
    Same,
    Cross,
}

/// Conditional type distribution of an unobservable-label opponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefQ {
    pub q_utheta: Rational,
    pub q_utau: Rational,
}

impl BeliefQ {
    pub fn new(q_utheta: Rational, q_utau: Rational) -> Result<Self, PreferenceError> {
        let zero = Rational::zero();
        if q_utheta < zero || q_utau < zero || &q_utheta + &q_utau != rat(1) {
            return Err(PreferenceError::BadBelief);
        }
        Ok(BeliefQ { q_utheta, q_utau })
    }

    pub fn for_role(&self, role: Role) -> &Rational {
        match role {
            Role::Theta => &self.q_utheta,
            Role::Tau => &self.q_utau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryRecipe {
    Prop2AdvantageEfficient,
    Prop5Anticoordinator,
    Prop6AdvantageOnlyEfficient,
    Ex2Mutant,
    Ex3Mutant,
    Ex4CoordinationSeeker,
    B2MixedMotive,
    B4AntiparochialEfficient,
}

impl AdversaryRecipe {
    pub fn parse(s: &str) -> Result<Self, PreferenceError> {
        Ok(match s {
            "prop2_advantage_efficient" => AdversaryRecipe::Prop2AdvantageEfficient,
            "prop5_anticoordinator" => AdversaryRecipe::Prop5Anticoordinator,
            "prop6_advantage_only_efficient" => AdversaryRecipe::Prop6AdvantageOnlyEfficient,
            "ex2_mutant" => AdversaryRecipe::Ex2Mutant,
            "ex3_mutant" => AdversaryRecipe::Ex3Mutant,
            "ex4_coordination_seeker" => AdversaryRecipe::Ex4CoordinationSeeker,
            "b2_mixed_motive" => AdversaryRecipe::B2MixedMotive,
            "b4_antiparochial_efficient" => AdversaryRecipe::B4AntiparochialEfficient,
            other => return Err(PreferenceError::UnknownRecipe(other.to_string())),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AdversaryRecipe::Prop2AdvantageEfficient => "prop2_advantage_efficient",
            AdversaryRecipe::Prop5Anticoordinator => "prop5_anticoordinator",
            AdversaryRecipe::Prop6AdvantageOnlyEfficient => "prop6_advantage_only_efficient",
            AdversaryRecipe::Ex2Mutant => "ex2_mutant",
            AdversaryRecipe::Ex3Mutant => "ex3_mutant",
            AdversaryRecipe::Ex4CoordinationSeeker => "ex4_coordination_seeker",
            AdversaryRecipe::B2MixedMotive => "b2_mixed_motive",
            AdversaryRecipe::B4AntiparochialEfficient => "b4_antiparochial_efficient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyTag {
    Selfish,
    Efficient,
    HomophilicEfficient { lambda: Rational },
    ParochialEfficient,
    HomophilicSelfish { lambda: Rational },
    ParochialSelfish,
    Adversary { recipe: AdversaryRecipe },
    Custom,
}

/// A preference type as a pair of exact utility tables.
///
/// `u_same[i][j]` is the utility of playing `i` against a same-type opponent
/// playing `j`; `u_cross` covers the other co-resident type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceType {
    pub name: String,
    pub family: FamilyTag,
    u_same: Vec<Vec<Rational>>,
    u_cross: Vec<Vec<Rational>>,
}

impl PreferenceType {
    pub fn size(&self) -> usize {
        self.u_same.len()
    }

    pub fn table(&self, opp: Opponent) -> &[Vec<Rational>] {
        match opp {
            Opponent::Same => &self.u_same,
            Opponent::Cross => &self.u_cross,
        }
    }

    /// Utility of the type's bearer playing `x` against a `same`/`cross`
    /// opponent playing `y`, extended bilinearly.
    pub fn utility(&self, x: &MixedStrategy, y: &MixedStrategy, opp: Opponent) -> Rational {
        bilinear(self.table(opp), x, y)
    }

    /// Expected utility against an unobservable-label opponent: the belief `q`
    /// is mapped through the bearer's own role, so the same-type weight is the
    /// probability that the hidden opponent shares that role.
    pub fn utility_vs_u(
        &self,
        role: Role,
        x: &MixedStrategy,
        y: &MixedStrategy,
        q: &BeliefQ,
    ) -> Rational {
        let w_same = q.for_role(role);
        let w_cross = q.for_role(role.other());
        w_same * self.utility(x, y, Opponent::Same) + w_cross * self.utility(x, y, Opponent::Cross)
    }

    /// The effective utility table against a hidden opponent under belief `q`.
    pub fn table_vs_u(&self, role: Role, q: &BeliefQ) -> Vec<Vec<Rational>> {
        let w_same = q.for_role(role);
        let w_cross = q.for_role(role.other());
        let n = self.size();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| w_same * &self.u_same[i][j] + w_cross * &self.u_cross[i][j])
                    .collect()
            })
            .collect()
    }
}

fn check_table(n: usize, table: &[Vec<Rational>]) -> Result<(), PreferenceError> {
    if table.len() != n {
        return Err(PreferenceError::BadTable {
            expected: n,
            row: table.len(),
            got: 0,
        });
    }
    for (r, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(PreferenceError::BadTable {
                expected: n,
                row: r,
                got: row.len(),
            });
        }
    }
    Ok(())
}

fn total_table(game: &MaterialGame) -> Vec<Vec<Rational>> {
    let n = game.size();
    (0..n)
        .map(|i| (0..n).map(|j| game.total(i, j)).collect())
        .collect()
}

fn shift_table(table: &[Vec<Rational>], c: &Rational) -> Vec<Vec<Rational>> {
    table
        .iter()
        .map(|row| row.iter().map(|v| v + c).collect())
        .collect()
}

fn zero_table(n: usize) -> Vec<Vec<Rational>> {
    vec![vec![Rational::zero(); n]; n]
}

/// Build one of the named families (or install custom tables).
pub fn build_type(
    game: &MaterialGame,
    name: impl Into<String>,
    family: FamilyTag,
    custom: Option<TablePair>,
) -> Result<PreferenceType, PreferenceError> {
    let n = game.size();
    let pi = game.payoff_table().to_vec();
    let name = name.into();
    let require_lambda = |l: &Rational, fam: &str| {
        if *l <= Rational::zero() {
            Err(PreferenceError::MissingLambda(fam.to_string()))
        } else {
            Ok(())
        }
    };
    let (u_same, u_cross) = match &family {
        FamilyTag::Selfish => (pi.clone(), pi),
        FamilyTag::Efficient => {
            let t = total_table(game);
            (t.clone(), t)
        }
        FamilyTag::HomophilicEfficient { lambda } => {
            require_lambda(lambda, "homophilic_efficient")?;
            let t = total_table(game);
            (shift_table(&t, lambda), t)
        }
        FamilyTag::ParochialEfficient => (total_table(game), zero_table(n)),
        FamilyTag::HomophilicSelfish { lambda } => {
            require_lambda(lambda, "homophilic_selfish")?;
            (shift_table(&pi, lambda), pi)
        }
        FamilyTag::ParochialSelfish => (pi, zero_table(n)),
        FamilyTag::Custom => {
            let (same, cross) = custom.ok_or(PreferenceError::BadTable {
                expected: n,
                row: 0,
                got: 0,
            })?;
            check_table(n, &same)?;
            check_table(n, &cross)?;
            (same, cross)
        }
        FamilyTag::Adversary { .. } => {
            return Err(PreferenceError::RecipeMismatch {
                recipe: "adversary".into(),
                reason: "adversary types are built through build_adversary_type".into(),
            })
        }
    };
    Ok(PreferenceType {
        name,
        family,
        u_same,
        u_cross,
    })
}

/// Parameters an adversary recipe may need beyond the game itself.
#[derive(Debug, Clone, Default)]
pub struct AdversaryParams {
    /// Incumbent homophily weight (anti-coordinator recipe).
    pub lambda: Option<Rational>,
    /// Override for the penalty constant; the smallest integer above the
    /// required bound is used when absent.
    pub m: Option<Rational>,
    /// Totals of the incumbent self-game's inefficient equilibria, supplied by
    /// the equilibrium layer.
    pub ne_inefficient_totals: Vec<Rational>,
}

/// Build one of the proof-construction mutant types.
pub fn build_adversary_type(
    game: &MaterialGame,
    name: impl Into<String>,
    recipe: AdversaryRecipe,
    params: &AdversaryParams,
) -> Result<PreferenceType, PreferenceError> {
    let n = game.size();
    let name = name.into();
    let mismatch = |reason: &str| PreferenceError::RecipeMismatch {
        recipe: recipe.name().to_string(),
        reason: reason.to_string(),
    };
    let (s_bar, _) = efficient_pairs(game);
    let is_eff = |i: usize, j: usize| game.total(i, j) == s_bar;
    let advantaged = |i: usize, j: usize| game.payoff_entry(i, j) >= game.payoff_entry(j, i);

    let (u_same, u_cross) = match recipe {
        AdversaryRecipe::Prop2AdvantageEfficient => {
            let t = total_table(game);
            let cross = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if advantaged(i, j) {
                                t[i][j].clone()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            (t, cross)
        }
        AdversaryRecipe::Prop6AdvantageOnlyEfficient => {
            let t = total_table(game);
            let cross = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if advantaged(i, j) && is_eff(i, j) {
                                t[i][j].clone()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            (t, cross)
        }
        AdversaryRecipe::Prop5Anticoordinator => {
            let lambda = params
                .lambda
                .clone()
                .ok_or_else(|| PreferenceError::MissingLambda("prop5_anticoordinator".into()))?;
            let has_asym_strict = (0..n).any(|i| {
                (0..n).any(|j| {
                    is_strictly_efficient(game, i, j)
                        && game.payoff_entry(i, j) != game.payoff_entry(j, i)
                })
            });
            if !has_asym_strict {
                return Err(mismatch(
                    "needs a strictly efficient pair with unequal payoffs",
                ));
            }
            let consts =
                crate::game::inefficiency_constants(game, &params.ne_inefficient_totals, &lambda)?;
            let m = match &params.m {
                Some(m) => m.clone(),
                None => {
                    // smallest integer strictly above 6 * delta_bar * |X| / (1 - delta_bar)
                    let bound =
                        rat(6) * &consts.delta_bar * rat(n as i64) / (rat(1) - &consts.delta_bar);
                    rat(bound.floor().to_integer().try_into().unwrap_or(i64::MAX)) + rat(1)
                }
            };
            let two_n = rat(2 * n as i64);
            // The cross table's six cases split on strict advantage.
            let strictly_adv =
                |i: usize, j: usize| game.payoff_entry(i, j) > game.payoff_entry(j, i);
            let same = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if is_eff(i, j) {
                                Rational::zero()
                            } else {
                                -m.clone()
                            }
                        })
                        .collect()
                })
                .collect();
            let cross = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| match (is_eff(i, j), strictly_adv(i, j)) {
                            (true, true) => Rational::zero(),
                            (true, false) => rat(-1),
                            (false, true) => two_n.clone(),
                            (false, false) => &two_n - rat(1),
                        })
                        .collect()
                })
                .collect();
            (same, cross)
        }
        AdversaryRecipe::Ex2Mutant => {
            let (a, b, c) =
                abc_indices(game).ok_or_else(|| mismatch("needs strategies A, B, C"))?;
            let mut same = zero_table(n);
            same[a][c] = rat(1);
            same[c][a] = rat(1);
            let mut cross = zero_table(n);
            cross[b] = vec![rat(1); n];
            (same, cross)
        }
        AdversaryRecipe::Ex3Mutant => {
            let (a, _, c) =
                abc_indices(game).ok_or_else(|| mismatch("needs strategies A, B, C"))?;
            let mut same = zero_table(n);
            same[a][c] = rat(1);
            same[c][a] = rat(1);
            (same, zero_table(n))
        }
        AdversaryRecipe::Ex4CoordinationSeeker => {
            if n != 2 {
                return Err(mismatch("needs exactly two strategies"));
            }
            let same = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
            let cross = vec![vec![rat(3), rat(1)], vec![rat(1), rat(3)]];
            (same, cross)
        }
        AdversaryRecipe::B2MixedMotive => {
            if n != 2 {
                return Err(mismatch("needs exactly two strategies"));
            }
            let same = vec![vec![rat(0), rat(-6)], vec![rat(6), rat(1)]];
            let cross = vec![vec![rat(2), rat(0)], vec![rat(0), rat(1)]];
            (same, cross)
        }
        AdversaryRecipe::B4AntiparochialEfficient => {
            let t = total_table(game);
            let cross = shift_table(&t, &rat(1));
            (t, cross)
        }
    };
    Ok(PreferenceType {
        name,
        family: FamilyTag::Adversary { recipe },
        u_same,
        u_cross,
    })
}

fn abc_indices(game: &MaterialGame) -> Option<(usize, usize, usize)> {
    Some((
        game.label_index("A")?,
        game.label_index("B")?,
        game.label_index("C")?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn game(rows: &[&[i64]]) -> MaterialGame {
        let n = rows.len();
        let labels: Vec<String> = (0..n)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect();
        let payoff = rows
            .iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect())
            .collect();
        MaterialGame::new(labels, payoff, true).unwrap()
    }

    fn bos() -> MaterialGame {
        game(&[&[0, 1], &[3, 0]])
    }

    #[test]
    fn homophilic_efficient_tables() {
        let t = build_type(
            &bos(),
            "he",
            FamilyTag::HomophilicEfficient { lambda: rat(1) },
            None,
        )
        .unwrap();
        // u_same(A,B) = pi(A,B) + pi(B,A) + lambda = 1 + 3 + 1
        assert_eq!(t.table(Opponent::Same)[0][1], rat(5));
        assert_eq!(t.table(Opponent::Cross)[0][1], rat(4));
    }

    #[test]
    fn parochial_selfish_tables() {
        let t = build_type(&bos(), "ps", FamilyTag::ParochialSelfish, None).unwrap();
        assert_eq!(t.table(Opponent::Same)[1][0], rat(3));
        assert!(t
            .table(Opponent::Cross)
            .iter()
            .flatten()
            .all(|v| v.is_zero()));
    }

    #[test]
    fn lambda_required() {
        assert!(build_type(
            &bos(),
            "bad",
            FamilyTag::HomophilicSelfish { lambda: rat(0) },
            None
        )
        .is_err());
    }

    /// The illustrative 2x2 type pair: theta's utilities are 0/2/3/0.
    fn example1_theta() -> PreferenceType {
        let tab = vec![vec![rat(0), rat(2)], vec![rat(3), rat(0)]];
        build_type(&bos(), "theta", FamilyTag::Custom, Some((tab.clone(), tab))).unwrap()
    }

    #[test]
    fn mixed_utility_from_custom_table() {
        let theta = example1_theta();
        let m = MixedStrategy::new(vec![frac(2, 5), frac(3, 5)]).unwrap();
        assert_eq!(theta.utility(&m, &m, Opponent::Same), frac(6, 5));
    }

    #[test]
    fn pure_utility_is_table_entry() {
        let tab = vec![vec![rat(4), rat(2)], vec![rat(3), rat(0)]];
        let tau = build_type(&bos(), "tau", FamilyTag::Custom, Some((tab.clone(), tab))).unwrap();
        let a = MixedStrategy::pure(2, 0);
        assert_eq!(tau.utility(&a, &a, Opponent::Same), rat(4));
    }

    #[test]
    fn belief_weighting_follows_role() {
        // Coordination-seeker facing a hidden opponent: playing A against A
        // yields 3 only when the opponent turns out to be theta.
        let tau = build_adversary_type(
            &bos(),
            "mut",
            AdversaryRecipe::Ex4CoordinationSeeker,
            &AdversaryParams::default(),
        )
        .unwrap();
        let delta = frac(1, 100);
        let q = BeliefQ::new(delta.clone(), rat(1) - &delta).unwrap();
        let a = MixedStrategy::pure(2, 0);
        let b = MixedStrategy::pure(2, 1);
        // tau playing A vs hidden A: q_utheta * 3 + q_utau * 0
        assert_eq!(tau.utility_vs_u(Role::Tau, &a, &a, &q), rat(3) * &delta);
        // tau playing B vs hidden A: 1 regardless of type
        assert_eq!(tau.utility_vs_u(Role::Tau, &b, &a, &q), rat(1));
    }

    #[test]
    fn degenerate_belief_reduces_to_one_table() {
        let t = build_type(
            &bos(),
            "hs",
            FamilyTag::HomophilicSelfish { lambda: rat(2) },
            None,
        )
        .unwrap();
        let q = BeliefQ::new(rat(1), rat(0)).unwrap();
        let a = MixedStrategy::pure(2, 0);
        let b = MixedStrategy::pure(2, 1);
        assert_eq!(
            t.utility_vs_u(Role::Theta, &a, &b, &q),
            t.utility(&a, &b, Opponent::Same)
        );
        assert_eq!(
            t.utility_vs_u(Role::Tau, &a, &b, &q),
            t.utility(&a, &b, Opponent::Cross)
        );
    }

    #[test]
    fn pool_utility_scales_by_belief() {
        // A hidden selfish-style agent playing C against A with a 4/5 chance
        // of facing its own kind keeps 4/5 of the same-type payoff.
        let g = game(&[&[0, 8, 7], &[10, 0, 0], &[10, 0, 0]]);
        let t = build_type(&g, "ps", FamilyTag::ParochialSelfish, None).unwrap();
        let q = BeliefQ::new(frac(4, 5), frac(1, 5)).unwrap();
        let c = MixedStrategy::pure(3, 2);
        let a = MixedStrategy::pure(3, 0);
        assert_eq!(t.utility_vs_u(Role::Theta, &c, &a, &q), rat(8));
    }

    #[test]
    fn b4_recipe_on_table8() {
        let g = game(&[&[0, 8, 7], &[10, 0, 0], &[10, 0, 0]]);
        let tau = build_adversary_type(
            &g,
            "anti",
            AdversaryRecipe::B4AntiparochialEfficient,
            &AdversaryParams::default(),
        )
        .unwrap();
        // u_cross = total + 1: playing A against theta's C gives 17 + 1.
        assert_eq!(tau.table(Opponent::Cross)[0][2], rat(18));
        assert_eq!(tau.table(Opponent::Same)[0][2], rat(17));
    }

    #[test]
    fn ex3_recipe_cells() {
        let g = game(&[&[0, 0, 2], &[0, 3, 0], &[8, 0, 0]]);
        let tau = build_adversary_type(
            &g,
            "mut3",
            AdversaryRecipe::Ex3Mutant,
            &AdversaryParams::default(),
        )
        .unwrap();
        let same = tau.table(Opponent::Same);
        for (i, row) in same.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let expect = if (i, j) == (0, 2) || (i, j) == (2, 0) {
                    rat(1)
                } else {
                    rat(0)
                };
                assert_eq!(*cell, expect);
            }
        }
        assert!(tau
            .table(Opponent::Cross)
            .iter()
            .flatten()
            .all(|v| v.is_zero()));
    }

    #[test]
    fn prop5_recipe_on_bos() {
        // Six-case table applied cell by cell; M defaults to the smallest
        // integer above 6 * (4/5) * 2 / (1/5) = 48.
        let tau = build_adversary_type(
            &bos(),
            "anti",
            AdversaryRecipe::Prop5Anticoordinator,
            &AdversaryParams {
                lambda: Some(rat(1)),
                m: None,
                ne_inefficient_totals: vec![rat(2)],
            },
        )
        .unwrap();
        let same = tau.table(Opponent::Same);
        let cross = tau.table(Opponent::Cross);
        assert_eq!(same[0][1], rat(0));
        assert_eq!(same[0][0], rat(-49));
        assert_eq!(cross[0][1], rat(-1)); // efficient, weakly disadvantaged (1 <= 3)
        assert_eq!(cross[1][0], rat(0)); // efficient, advantaged
        assert_eq!(cross[0][0], rat(3)); // inefficient, 2|X| - 1
        assert_eq!(cross[1][1], rat(3));
    }

    #[test]
    fn prop5_rejects_symmetric_games() {
        let g = game(&[&[3, 1], &[1, 2]]);
        let err = build_adversary_type(
            &g,
            "anti",
            AdversaryRecipe::Prop5Anticoordinator,
            &AdversaryParams {
                lambda: Some(rat(1)),
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(PreferenceError::RecipeMismatch { .. })));
    }
}
