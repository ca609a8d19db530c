//! The material game: exact bilinear payoffs and efficiency structure.

use crate::rational::{rat, Rational};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("game needs at least one strategy")]
    Empty,
    #[error("duplicate strategy label `{0}`")]
    DuplicateLabel(String),
    #[error("payoff matrix must be {expected}x{expected}; row {row} has {got} entries")]
    BadShape {
        expected: usize,
        row: usize,
        got: usize,
    },
    #[error("payoff entry ({row},{col}) is not strictly positive; pass allow_nonpositive to permit zeros")]
    NonPositiveEntry { row: usize, col: usize },
    #[error("strategy vector has {got} weights, game has {expected} strategies")]
    Dimension { expected: usize, got: usize },
    #[error("strategy weights must be nonnegative and sum to exactly 1")]
    NotAMixture,
    #[error("lambda must be strictly positive")]
    NonPositiveLambda,
    #[error("every pure strategy pair is efficient; inefficiency constants are undefined")]
    NoInefficientPair,
}

/// A finite symmetric two-player game with exact rational payoffs.
///
/// `payoff[i][j]` is the row player's material payoff when playing strategy
/// `i` against strategy `j`. Entries must be strictly positive unless the
/// game was built with `allow_nonpositive` (the illustrative tables in the
/// literature use zeros for convenience).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaterialGame {
    labels: Vec<String>,
    payoff: Vec<Vec<Rational>>,
    allow_nonpositive: bool,
}

impl MaterialGame {
    pub fn new<S: Into<String>>(
        labels: Vec<S>,
        payoff: Vec<Vec<Rational>>,
        allow_nonpositive: bool,
    ) -> Result<Self, GameError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if n == 0 {
            return Err(GameError::Empty);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(GameError::DuplicateLabel(l.clone()));
            }
        }
        if payoff.len() != n {
            return Err(GameError::BadShape {
                expected: n,
                row: payoff.len(),
                got: 0,
            });
        }
        for (r, row) in payoff.iter().enumerate() {
            if row.len() != n {
                return Err(GameError::BadShape {
                    expected: n,
                    row: r,
                    got: row.len(),
                });
            }
            if !allow_nonpositive {
                for (c, v) in row.iter().enumerate() {
                    if *v <= Rational::zero() {
                        return Err(GameError::NonPositiveEntry { row: r, col: c });
                    }
                }
            }
        }
        Ok(MaterialGame {
            labels,
            payoff,
            allow_nonpositive,
        })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn allow_nonpositive(&self) -> bool {
        self.allow_nonpositive
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    pub fn payoff_entry(&self, i: usize, j: usize) -> &Rational {
        &self.payoff[i][j]
    }

    pub fn payoff_table(&self) -> &[Vec<Rational>] {
        &self.payoff
    }

    /// Total material payoff of the pure pair: pi(i,j) + pi(j,i).
    pub fn total(&self, i: usize, j: usize) -> Rational {
        &self.payoff[i][j] + &self.payoff[j][i]
    }
}

/// A point of the mixed-strategy simplex over the game's strategy set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MixedStrategy {
    weights: Vec<Rational>,
}

impl Ord for MixedStrategy {
    /// More weight on earlier-indexed strategies sorts first, so pure `A`
    /// precedes pure `B` and canonical pair representatives follow label order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.weights.iter().zip(&other.weights) {
            match b.cmp(a) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.weights.len().cmp(&other.weights.len())
    }
}

impl PartialOrd for MixedStrategy {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl MixedStrategy {
    pub fn new(weights: Vec<Rational>) -> Result<Self, GameError> {
        if weights.is_empty() {
            return Err(GameError::Empty);
        }
        let mut sum = Rational::zero();
        for w in &weights {
            if *w < Rational::zero() {
                return Err(GameError::NotAMixture);
            }
            sum += w;
        }
        if sum != rat(1) {
            return Err(GameError::NotAMixture);
        }
        Ok(MixedStrategy { weights })
    }

    pub fn pure(n: usize, i: usize) -> Self {
        let mut weights = vec![Rational::zero(); n];
        weights[i] = rat(1);
        MixedStrategy { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    /// The strategy index when this mixture is degenerate, else `None`.
    pub fn as_pure(&self) -> Option<usize> {
        self.weights.iter().position(|w| *w == rat(1))
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&i| !self.weights[i].is_zero())
            .collect()
    }
}

/// An ordered pair of mixed strategies over the same strategy set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyPair {
    pub first: MixedStrategy,
    pub second: MixedStrategy,
}

impl StrategyPair {
    pub fn new(first: MixedStrategy, second: MixedStrategy) -> Self {
        debug_assert_eq!(first.len(), second.len());
        StrategyPair { first, second }
    }

    pub fn pure(n: usize, i: usize, j: usize) -> Self {
        StrategyPair {
            first: MixedStrategy::pure(n, i),
            second: MixedStrategy::pure(n, j),
        }
    }

    pub fn swapped(&self) -> Self {
        StrategyPair {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<(usize, usize)> {
        Some((self.first.as_pure()?, self.second.as_pure()?))
    }

    /// The swap-identified representative: the lexicographically smaller of
    /// `(x,y)` and `(y,x)`. Same-type entries are stored in this form.
    pub fn canonical_unordered(&self) -> Self {
        let sw = self.swapped();
        if *self <= sw {
            self.clone()
        } else {
            sw
        }
    }
}

/// Evaluate a bilinear form `x' T y` exactly.
pub fn bilinear(table: &[Vec<Rational>], x: &MixedStrategy, y: &MixedStrategy) -> Rational {
    let mut acc = Rational::zero();
    for (i, xi) in x.weights().iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.weights().iter().enumerate() {
            if yj.is_zero() {
                continue;
            }
            acc += xi * yj * &table[i][j];
        }
    }
    acc
}

/// Expected material payoff of mixed `x` against mixed `y`.
pub fn material_payoff(
    game: &MaterialGame,
    x: &MixedStrategy,
    y: &MixedStrategy,
) -> Result<Rational, GameError> {
    if x.len() != game.size() {
        return Err(GameError::Dimension {
            expected: game.size(),
            got: x.len(),
        });
    }
    if y.len() != game.size() {
        return Err(GameError::Dimension {
            expected: game.size(),
            got: y.len(),
        });
    }
    Ok(bilinear(game.payoff_table(), x, y))
}

/// Expected total material payoff pi(x,y) + pi(y,x) of a mixed pair.
pub fn total_payoff(game: &MaterialGame, pair: &StrategyPair) -> Rational {
    bilinear(game.payoff_table(), &pair.first, &pair.second)
        + bilinear(game.payoff_table(), &pair.second, &pair.first)
}

/// The efficient total `S-bar` and every pure pair attaining it.
///
/// Bilinearity puts the maximum over mixed product pairs at a pure pair, so
/// pure representatives exhaust the efficient total; ties generate mixed
/// efficient pairs only as mixtures within the returned set.
pub fn efficient_pairs(game: &MaterialGame) -> (Rational, Vec<(usize, usize)>) {
    let n = game.size();
    let mut best = game.total(0, 0);
    for i in 0..n {
        for j in 0..n {
            let t = game.total(i, j);
            if t > best {
                best = t;
            }
        }
    }
    let pairs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| game.total(i, j) == best)
        .collect();
    (best, pairs)
}

pub fn is_efficient_pure(game: &MaterialGame, i: usize, j: usize) -> bool {
    let (s_bar, _) = efficient_pairs(game);
    game.total(i, j) == s_bar
}

/// Efficient, and every unilateral pure replacement strictly lowers the total.
pub fn is_strictly_efficient(game: &MaterialGame, i: usize, j: usize) -> bool {
    let (s_bar, _) = efficient_pairs(game);
    if game.total(i, j) != s_bar {
        return false;
    }
    let n = game.size();
    for k in 0..n {
        if k != i && game.total(k, j) >= s_bar {
            return false;
        }
        if k != j && game.total(i, k) >= s_bar {
            return false;
        }
    }
    true
}

/// The constants controlling the anti-coordinating adversary construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InefficiencyConstants {
    pub s_bar: Rational,
    pub s_hat: Rational,
    pub s_tilde: Rational,
    pub delta_bar: Rational,
}

/// `s_hat` is the best total over inefficient pure pairs, `s_tilde` the best
/// total over the supplied inefficient equilibria (0 if none), and
/// `delta_bar = max{ S/(2S-s_hat), S/(S+lambda), s_tilde/S }`.
pub fn inefficiency_constants(
    game: &MaterialGame,
    ne_inefficient_totals: &[Rational],
    lambda: &Rational,
) -> Result<InefficiencyConstants, GameError> {
    if *lambda <= Rational::zero() {
        return Err(GameError::NonPositiveLambda);
    }
    let (s_bar, _) = efficient_pairs(game);
    let n = game.size();
    let mut s_hat: Option<Rational> = None;
    for i in 0..n {
        for j in 0..n {
            let t = game.total(i, j);
            if t < s_bar && s_hat.as_ref().is_none_or(|h| t > *h) {
                s_hat = Some(t);
            }
        }
    }
    let s_hat = s_hat.ok_or(GameError::NoInefficientPair)?;
    let s_tilde = ne_inefficient_totals
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);

    let two = rat(2);
    let c1 = &s_bar / (&two * &s_bar - &s_hat);
    let c2 = &s_bar / (&s_bar + lambda);
    let c3 = &s_tilde / &s_bar;
    let delta_bar = c1.max(c2).max(c3);
    Ok(InefficiencyConstants {
        s_bar,
        s_hat,
        s_tilde,
        delta_bar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn game_from_i64(rows: &[&[i64]]) -> MaterialGame {
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

    /// Battle-of-the-sexes table: rows A,B give (0,1),(3,0).
    fn bos() -> MaterialGame {
        game_from_i64(&[&[0, 1], &[3, 0]])
    }

    /// The 3x3 table whose efficient pair (A,C) is also loser best.
    fn three_by_three() -> MaterialGame {
        game_from_i64(&[&[0, 3, 2], &[5, 0, 0], &[8, 0, 0]])
    }

    #[test]
    fn pure_payoff_is_matrix_entry() {
        let g = bos();
        let a = MixedStrategy::pure(2, 0);
        let b = MixedStrategy::pure(2, 1);
        assert_eq!(material_payoff(&g, &a, &b).unwrap(), rat(1));
        assert_eq!(material_payoff(&g, &b, &a).unwrap(), rat(3));
    }

    #[test]
    fn uniform_mix_in_bos() {
        let g = bos();
        let half = MixedStrategy::new(vec![frac(1, 2), frac(1, 2)]).unwrap();
        // Oracle: sum of the four pure outcomes weighted by 1/4.
        let expect = (rat(0) + rat(1) + rat(3) + rat(0)) * frac(1, 4);
        assert_eq!(material_payoff(&g, &half, &half).unwrap(), expect);
        assert_eq!(expect, rat(1));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = bos();
        let bad = MixedStrategy::pure(3, 0);
        assert!(material_payoff(&g, &bad, &bad).is_err());
    }

    #[test]
    fn efficient_pairs_three_by_three() {
        let (s, pairs) = efficient_pairs(&three_by_three());
        assert_eq!(s, rat(10));
        assert_eq!(pairs, vec![(0, 2), (2, 0)]);
    }

    #[test]
    fn efficient_pairs_bos() {
        let (s, pairs) = efficient_pairs(&bos());
        assert_eq!(s, rat(4));
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn efficient_pairs_constant_game() {
        let g = game_from_i64(&[&[2, 2], &[2, 2]]);
        let (s, pairs) = efficient_pairs(&g);
        assert_eq!(s, rat(4));
        assert_eq!(pairs.len(), 4);
    }

    #[test]
    fn strict_efficiency() {
        // (A,B) in the 2x2: deviation totals are {0,0} < 4.
        assert!(is_strictly_efficient(&bos(), 0, 1));
        // (A,C) in the 3x3: deviation totals {0,8,8,0} < 10.
        assert!(is_strictly_efficient(&three_by_three(), 0, 2));
        // Constant game: ties everywhere.
        let g = game_from_i64(&[&[2, 2], &[2, 2]]);
        assert!(!is_strictly_efficient(&g, 0, 0));
    }

    #[test]
    fn constants_bos() {
        let c = inefficiency_constants(&bos(), &[], &rat(1)).unwrap();
        assert_eq!(c.s_bar, rat(4));
        assert_eq!(c.s_hat, rat(0));
        assert_eq!(c.delta_bar, frac(4, 5));
    }

    #[test]
    fn constants_three_by_three() {
        let c = inefficiency_constants(&three_by_three(), &[], &rat(1)).unwrap();
        assert_eq!(c.s_bar, rat(10));
        assert_eq!(c.s_hat, rat(8));
        // max{10/12, 10/11, 0} = 10/11
        assert_eq!(c.delta_bar, frac(10, 11));
    }

    #[test]
    fn constants_reject_all_efficient_game() {
        let g = game_from_i64(&[&[2, 2], &[2, 2]]);
        assert_eq!(
            inefficiency_constants(&g, &[], &rat(1)),
            Err(GameError::NoInefficientPair)
        );
    }

    #[test]
    fn positivity_enforced_by_default() {
        let labels = vec!["A", "B"];
        let payoff = vec![vec![rat(0), rat(1)], vec![rat(3), rat(0)]];
        assert!(MaterialGame::new(labels.clone(), payoff.clone(), false).is_err());
        assert!(MaterialGame::new(labels, payoff, true).is_ok());
    }
}
