//! Shared test support: a deterministic RNG, an independent closed-form
//! oracle for 2x2 games, and random scenario generators.

use evomatch::equilibrium::TypedGame;
use evomatch::game::{MaterialGame, MixedStrategy, StrategyPair};
use evomatch::matching::PopulationState;
use evomatch::preference::{build_type, FamilyTag, PreferenceType};
use evomatch::rational::{rat, Rational};
use num_traits::Zero;
use std::collections::BTreeSet;

/// splitmix64: tiny, deterministic, good enough for test sampling.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Uniform integer in `lo..=hi` as a rational.
    pub fn int_rational(&mut self, lo: i64, hi: i64) -> Rational {
        rat(lo + self.below((hi - lo + 1) as u64) as i64)
    }
}

pub fn random_table(rng: &mut Rng, n: usize, lo: i64, hi: i64) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|_| (0..n).map(|_| rng.int_rational(lo, hi)).collect())
        .collect()
}

pub fn random_game(rng: &mut Rng, n: usize) -> MaterialGame {
    let labels: Vec<String> = (0..n)
        .map(|i| ((b'A' + i as u8) as char).to_string())
        .collect();
    MaterialGame::new(labels, random_table(rng, n, 0, 4), true).expect("square table")
}

pub fn random_custom_type(rng: &mut Rng, game: &MaterialGame, name: &str) -> PreferenceType {
    let n = game.size();
    build_type(
        game,
        name,
        FamilyTag::Custom,
        Some((random_table(rng, n, 0, 4), random_table(rng, n, 0, 4))),
    )
    .expect("square tables")
}

/// A random population state on a random small game.
pub fn random_state(rng: &mut Rng) -> (MaterialGame, PopulationState) {
    let n = 2 + rng.below(2) as usize;
    let game = random_game(rng, n);
    let theta = random_custom_type(rng, &game, "theta");
    let tau = random_custom_type(rng, &game, "tau");
    let eps = Rational::new((1 + rng.below(7) as i64).into(), 8.into());
    let state = PopulationState::new(theta, tau, eps).expect("epsilon in (0,1)");
    (game, state)
}

fn mix(x_a: &Rational) -> MixedStrategy {
    MixedStrategy::new(vec![x_a.clone(), rat(1) - x_a]).expect("simplex point")
}

/// Feasible interval of `u * x + v >= 0` over `[0, 1]`, if nonempty.
fn linear_interval(u: &Rational, v: &Rational) -> Option<(Rational, Rational)> {
    let zero = Rational::zero();
    let one = rat(1);
    if u.is_zero() {
        return if *v >= zero { Some((zero, one)) } else { None };
    }
    let cut = -v / u;
    let (lo, hi) = if *u > zero {
        (cut.max(zero), one)
    } else {
        (zero, cut.min(one))
    };
    (lo <= hi).then_some((lo, hi))
}

/// Closed-form extreme equilibria of a 2x2 game: pure scan, tied-row/column
/// segment endpoints, and the interior indifference point. Independent of the
/// support-enumeration path.
pub fn oracle_2x2(tg: &TypedGame) -> BTreeSet<StrategyPair> {
    assert_eq!(tg.size(), 2);
    let r = &tg.row;
    let c = &tg.col;
    let mut out = BTreeSet::new();

    // pure pairs
    for i in 0..2 {
        for j in 0..2 {
            let row_ok = r[i][j] >= r[1 - i][j];
            let col_ok = c[j][i] >= c[1 - j][i];
            if row_ok && col_ok {
                out.insert(StrategyPair::pure(2, i, j));
            }
        }
    }

    // row mixes against a pure column j: requires a row tie in column j
    for j in 0..2 {
        if r[0][j] != r[1][j] {
            continue;
        }
        // column j must remain a best response to the row mix
        let d0 = &c[j][0] - &c[1 - j][0];
        let d1 = &c[j][1] - &c[1 - j][1];
        let u = &d0 - &d1;
        if let Some((lo, hi)) = linear_interval(&u, &d1) {
            let y = MixedStrategy::pure(2, j);
            out.insert(StrategyPair::new(mix(&lo), y.clone()));
            out.insert(StrategyPair::new(mix(&hi), y));
        }
    }

    // column mixes against a pure row i
    for i in 0..2 {
        if c[0][i] != c[1][i] {
            continue;
        }
        let d0 = &r[i][0] - &r[1 - i][0];
        let d1 = &r[i][1] - &r[1 - i][1];
        let u = &d0 - &d1;
        if let Some((lo, hi)) = linear_interval(&u, &d1) {
            let x = MixedStrategy::pure(2, i);
            out.insert(StrategyPair::new(x.clone(), mix(&lo)));
            out.insert(StrategyPair::new(x, mix(&hi)));
        }
    }

    // interior point: both indifference equations uniquely solvable
    let e0 = &r[0][0] - &r[1][0];
    let e1 = &r[0][1] - &r[1][1];
    let f0 = &c[0][0] - &c[1][0];
    let f1 = &c[0][1] - &c[1][1];
    let den_y = &e1 - &e0;
    let den_x = &f1 - &f0;
    if !den_y.is_zero() && !den_x.is_zero() {
        let y_a = &e1 / &den_y;
        let x_a = &f1 / &den_x;
        let zero = Rational::zero();
        let one = rat(1);
        if y_a >= zero && y_a <= one && x_a >= zero && x_a <= one {
            out.insert(StrategyPair::new(mix(&x_a), mix(&y_a)));
        }
    }

    out
}
