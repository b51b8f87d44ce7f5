//! Finite two-player games in normal form and their Nash equilibria.
//!
//! Pure equilibria come from exhaustive cell checking. Mixed equilibria of
//! nondegenerate 2x2 games use the closed-form indifference solution; every
//! other game goes through support enumeration, where each candidate support
//! is paired with an equally sized set of indifferent opponent strategies and
//! the resulting square linear system is solved. Pairing supports with
//! indifference sets (rather than only with the opponent's support) keeps the
//! enumeration complete on degenerate games: every extreme equilibrium is the
//! unique solution of one such pair of systems.

use std::cmp::Ordering;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Tolerance for the weak inequalities defining a pure equilibrium.
pub const PURE_TOL: f64 = 1e-12;
/// A profile is accepted as an equilibrium when its best-response gap is at most this.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;
/// Largest strategy count per player accepted by [`mixed_nash`].
pub const MAX_SOLVER_DIM: usize = 8;

const PROB_SUM_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("a game needs at least one strategy per player")]
    Empty,
    #[error("payoff matrix {which} is not {rows}x{cols}")]
    Shape {
        which: char,
        rows: usize,
        cols: usize,
    },
    #[error("non-finite payoff in matrix {which} at ({row}, {col})")]
    NonFinite { which: char, row: usize, col: usize },
    #[error("{got} labels given for {expected} strategies")]
    Labels { got: usize, expected: usize },
    #[error("game is {rows}x{cols}, solver cap is {cap}x{cap}")]
    DimensionTooLarge {
        rows: usize,
        cols: usize,
        cap: usize,
    },
    #[error("profile is {got_rows}x{got_cols}, game is {rows}x{cols}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("not a probability vector: {0:?}")]
    NotADistribution(Vec<f64>),
}

/// Two aligned payoff matrices: `payoff_a` for the row (pursuer-side)
/// player, `payoff_b` for the column (evader-side) player.
#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame {
    rows: usize,
    cols: usize,
    payoff_a: Vec<f64>,
    payoff_b: Vec<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl BimatrixGame {
    /// Builds a game with generic labels `r0..`, `c0..`.
    pub fn new(payoff_a: Vec<Vec<f64>>, payoff_b: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let rows = payoff_a.len();
        let cols = payoff_a.first().map_or(0, Vec::len);
        let row_labels = (0..rows).map(|i| format!("r{i}")).collect();
        let col_labels = (0..cols).map(|j| format!("c{j}")).collect();
        Self::with_labels(payoff_a, payoff_b, row_labels, col_labels)
    }

    pub fn with_labels(
        payoff_a: Vec<Vec<f64>>,
        payoff_b: Vec<Vec<f64>>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self, GameError> {
        let rows = payoff_a.len();
        let cols = payoff_a.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(GameError::Empty);
        }
        let flatten = |which: char, m: Vec<Vec<f64>>| -> Result<Vec<f64>, GameError> {
            if m.len() != rows || m.iter().any(|r| r.len() != cols) {
                return Err(GameError::Shape { which, rows, cols });
            }
            let flat: Vec<f64> = m.into_iter().flatten().collect();
            if let Some(k) = flat.iter().position(|v| !v.is_finite()) {
                return Err(GameError::NonFinite {
                    which,
                    row: k / cols,
                    col: k % cols,
                });
            }
            Ok(flat)
        };
        let payoff_a = flatten('a', payoff_a)?;
        let payoff_b = flatten('b', payoff_b)?;
        if row_labels.len() != rows {
            return Err(GameError::Labels {
                got: row_labels.len(),
                expected: rows,
            });
        }
        if col_labels.len() != cols {
            return Err(GameError::Labels {
                got: col_labels.len(),
                expected: cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            payoff_a,
            payoff_b,
            row_labels,
            col_labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.payoff_a[i * self.cols + j]
    }

    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.payoff_b[i * self.cols + j]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn payoff_a(&self) -> Vec<Vec<f64>> {
        self.payoff_a
            .chunks(self.cols)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn payoff_b(&self) -> Vec<Vec<f64>> {
        self.payoff_b
            .chunks(self.cols)
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Applies `f` to every entry of both matrices, keeping labels.
    pub fn map_payoffs(
        &self,
        fa: impl Fn(f64) -> f64,
        fb: impl Fn(f64) -> f64,
    ) -> Result<Self, GameError> {
        let a = self
            .payoff_a()
            .into_iter()
            .map(|r| r.into_iter().map(&fa).collect())
            .collect();
        let b = self
            .payoff_b()
            .into_iter()
            .map(|r| r.into_iter().map(&fb).collect())
            .collect();
        Self::with_labels(a, b, self.row_labels.clone(), self.col_labels.clone())
    }

    /// Bilinear expectations `x^T A y` and `x^T B y`.
    pub fn expected_payoffs(&self, row: &[f64], col: &[f64]) -> Result<(f64, f64), GameError> {
        self.check_dims(row, col)?;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (i, &xi) in row.iter().enumerate() {
            for (j, &yj) in col.iter().enumerate() {
                let w = xi * yj;
                va += w * self.a(i, j);
                vb += w * self.b(i, j);
            }
        }
        Ok((va, vb))
    }

    /// Row payoffs `A y` against a column distribution.
    fn row_payoffs(&self, col: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.a(i, j) * col[j]).sum())
            .collect()
    }

    /// Column payoffs `x^T B` against a row distribution.
    fn col_payoffs(&self, row: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.b(i, j) * row[i]).sum())
            .collect()
    }

    fn check_dims(&self, row: &[f64], col: &[f64]) -> Result<(), GameError> {
        if row.len() != self.rows || col.len() != self.cols {
            return Err(GameError::DimensionMismatch {
                rows: self.rows,
                cols: self.cols,
                got_rows: row.len(),
                got_cols: col.len(),
            });
        }
        Ok(())
    }
}

/// A pair of distributions over the two strategy spaces plus their expected payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    pub row_dist: Vec<f64>,
    pub col_dist: Vec<f64>,
    pub value_a: f64,
    pub value_b: f64,
}

impl MixedProfile {
    pub fn new(
        game: &BimatrixGame,
        row_dist: Vec<f64>,
        col_dist: Vec<f64>,
    ) -> Result<Self, GameError> {
        for d in [&row_dist, &col_dist] {
            let sum: f64 = d.iter().sum();
            if d.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(GameError::NotADistribution(d.clone()));
            }
        }
        let (value_a, value_b) = game.expected_payoffs(&row_dist, &col_dist)?;
        Ok(Self {
            row_dist,
            col_dist,
            value_a,
            value_b,
        })
    }

    /// Point masses on `(row, col)`.
    pub fn pure(game: &BimatrixGame, row: usize, col: usize) -> Self {
        let mut row_dist = vec![0.0; game.rows()];
        let mut col_dist = vec![0.0; game.cols()];
        row_dist[row] = 1.0;
        col_dist[col] = 1.0;
        Self {
            row_dist,
            col_dist,
            value_a: game.a(row, col),
            value_b: game.b(row, col),
        }
    }

    /// The cell this profile puts all mass on, if it is pure.
    pub fn as_pure(&self) -> Option<(usize, usize)> {
        let point = |d: &[f64]| {
            let k = d.iter().position(|&p| p == 1.0)?;
            d.iter()
                .enumerate()
                .all(|(i, &p)| i == k || p == 0.0)
                .then_some(k)
        };
        Some((point(&self.row_dist)?, point(&self.col_dist)?))
    }

    fn approx_eq(&self, other: &MixedProfile) -> bool {
        self.row_dist
            .iter()
            .chain(&self.col_dist)
            .zip(other.row_dist.iter().chain(&other.col_dist))
            .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
    }
}

/// Cells where both players are playing a weak best response.
pub fn pure_nash(game: &BimatrixGame) -> Vec<(usize, usize)> {
    let (n, m) = (game.rows(), game.cols());
    let col_max: Vec<f64> = (0..m)
        .map(|j| {
            (0..n)
                .map(|i| game.a(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let row_max: Vec<f64> = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| game.b(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (0..n)
        .cartesian_product(0..m)
        .filter(|&(i, j)| {
            game.a(i, j) >= col_max[j] - PURE_TOL && game.b(i, j) >= row_max[i] - PURE_TOL
        })
        .collect()
}

pub fn expected_payoffs(
    game: &BimatrixGame,
    profile: &MixedProfile,
) -> Result<(f64, f64), GameError> {
    game.expected_payoffs(&profile.row_dist, &profile.col_dist)
}

/// Largest unilateral gain available to either player.
pub fn best_response_gap(game: &BimatrixGame, profile: &MixedProfile) -> Result<f64, GameError> {
    let (x, y) = (&profile.row_dist, &profile.col_dist);
    let (va, vb) = game.expected_payoffs(x, y)?;
    let best_row = game
        .row_payoffs(y)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let best_col = game
        .col_payoffs(x)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((best_row - va).max(best_col - vb))
}

/// Nash equilibria of `game`: pure ones first in lexicographic order, then
/// properly mixed ones ordered by `row_dist`. Never empty for a valid game.
pub fn mixed_nash(game: &BimatrixGame) -> Result<Vec<MixedProfile>, GameError> {
    let (n, m) = (game.rows(), game.cols());
    if n > MAX_SOLVER_DIM || m > MAX_SOLVER_DIM {
        return Err(GameError::DimensionTooLarge {
            rows: n,
            cols: m,
            cap: MAX_SOLVER_DIM,
        });
    }

    let mut found: Vec<MixedProfile> = pure_nash(game)
        .into_iter()
        .map(|(i, j)| MixedProfile::pure(game, i, j))
        .collect();
    let pure_count = found.len();

    let candidates = match (n, m) {
        (2, 2) => match indifference_2x2(game) {
            Indifference::Solved(p) => p.into_iter().collect(),
            Indifference::Degenerate => support_enumeration(game),
        },
        _ => support_enumeration(game),
    };

    let mut mixed = Vec::new();
    for cand in candidates {
        if cand.as_pure().is_some() || best_response_gap(game, &cand)? > EQUILIBRIUM_TOL {
            continue;
        }
        if !found.iter().chain(&mixed).any(|p| p.approx_eq(&cand)) {
            mixed.push(cand);
        }
    }
    mixed.sort_by(|p, q| {
        lex_cmp(&p.row_dist, &q.row_dist).then_with(|| lex_cmp(&p.col_dist, &q.col_dist))
    });
    found.extend(mixed);
    debug_assert!(found.len() >= pure_count);
    Ok(found)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

enum Indifference {
    /// Solution of the two indifference equations, when it lies in the simplex.
    Solved(Option<MixedProfile>),
    /// A zero denominator in either equation.
    Degenerate,
}

/// Closed-form fully mixed equilibrium of a 2x2 game.
fn indifference_2x2(game: &BimatrixGame) -> Indifference {
    let den_a = game.a(0, 0) - game.a(0, 1) - game.a(1, 0) + game.a(1, 1);
    let den_b = game.b(0, 0) - game.b(1, 0) - game.b(0, 1) + game.b(1, 1);
    if den_a.abs() <= PURE_TOL || den_b.abs() <= PURE_TOL {
        return Indifference::Degenerate;
    }
    // Column mix q leaves the row player indifferent, row mix p the column player.
    let q = (game.a(1, 1) - game.a(0, 1)) / den_a;
    let p = (game.b(1, 1) - game.b(1, 0)) / den_b;
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Indifference::Solved(None);
    }
    Indifference::Solved(MixedProfile::new(game, vec![p, 1.0 - p], vec![q, 1.0 - q]).ok())
}

/// A strategy in the support paired with the opponent strategies it makes indifferent.
struct Vertex {
    dist: Vec<f64>,
}

/// Solves `sum(dist[support]) = 1, payoff(support, k) . dist - value = 0 for k in indifferent`
/// for one side and keeps the solution when it is a vertex of that side's
/// best-response polytope.
fn side_vertices(own: usize, other: usize, payoff: impl Fn(usize, usize) -> f64) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::new();
    for k in 1..=own.min(other) {
        for support in (0..own).combinations(k) {
            for indifferent in (0..other).combinations(k) {
                let dim = k + 1;
                let mut mat = DMatrix::<f64>::zeros(dim, dim);
                let mut rhs = DVector::<f64>::zeros(dim);
                for c in 0..k {
                    mat[(0, c)] = 1.0;
                }
                rhs[0] = 1.0;
                for (r, &opp) in indifferent.iter().enumerate() {
                    for (c, &s) in support.iter().enumerate() {
                        mat[(r + 1, c)] = payoff(s, opp);
                    }
                    mat[(r + 1, k)] = -1.0;
                }
                let Some(sol) = mat.lu().solve(&rhs) else {
                    continue;
                };
                if sol.iter().any(|v| !v.is_finite()) || sol.iter().take(k).any(|&p| p < -DEDUP_TOL)
                {
                    continue;
                }
                let value = sol[k];
                let mut dist = vec![0.0; own];
                for (c, &s) in support.iter().enumerate() {
                    dist[s] = sol[c].max(0.0);
                }
                let total: f64 = dist.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                dist.iter_mut().for_each(|p| *p /= total);
                // No opponent strategy may do better than the indifference value.
                let dominated = (0..other).any(|o| {
                    let v: f64 = (0..own).map(|s| payoff(s, o) * dist[s]).sum();
                    v > value + EQUILIBRIUM_TOL
                });
                if dominated {
                    continue;
                }
                if !out.iter().any(|v| {
                    v.dist
                        .iter()
                        .zip(&dist)
                        .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
                }) {
                    out.push(Vertex { dist });
                }
            }
        }
    }
    out
}

fn support_enumeration(game: &BimatrixGame) -> Vec<MixedProfile> {
    let (n, m) = (game.rows(), game.cols());
    // Row vertices make the column player indifferent (payoff B), and vice versa.
    let rows = side_vertices(n, m, |i, j| game.b(i, j));
    let cols = side_vertices(m, n, |j, i| game.a(i, j));
    let mut out = Vec::new();
    for x in &rows {
        for y in &cols {
            let Ok(profile) = MixedProfile::new(game, x.dist.clone(), y.dist.clone()) else {
                continue;
            };
            if best_response_gap(game, &profile).is_ok_and(|g| g <= EQUILIBRIUM_TOL) {
                out.push(profile);
            }
        }
    }
    out
}
