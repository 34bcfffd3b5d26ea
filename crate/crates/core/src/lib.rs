//! Exact and approximate no-signaling values of two-player one-round games.
//!
//! The no-signaling value of a game is the optimum of a linear program over
//! conditional distributions. [`pipeline`] rewrites that program step by step
//! into a mixed packing and covering feasibility problem, [`mpc`] solves such
//! problems approximately with a width-independent multiplicative-weights
//! method, and [`value`] turns the solver into a promise decision procedure and
//! an additive approximation. [`simplex`] is an exact rational simplex used as
//! the reference oracle.

pub mod game;
pub mod games;
pub mod lp;
pub mod mpc;
pub mod pipeline;
pub mod rational;
pub mod simplex;
pub mod text;
pub mod value;
pub mod verifier;

pub use game::{
    acceptance_probability, check_no_signaling, game_size, marginals, validate_game, Dims, Game,
    GameError, RawGame, SignalingReport, Strategy,
};
pub use rational::Rational;
