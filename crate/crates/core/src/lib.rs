//! Simulation of dependent default times.
//!
//! The crate covers three model classes for a random vector of default times
//! `(τ_1, …, τ_d)` together with the machinery needed to simulate them and to
//! check simulation output against closed-form joint survival functions:
//!
//! * **Marshall–Olkin models** ([`marshall_olkin`]): subset-indexed exponential
//!   shock rates, exact shock and compound-Poisson ("Arnold") samplers, and the
//!   bivariate Marshall–Olkin copula.
//! * **Lévy-frailty factor models** ([`subordinators`], [`levy_frailty`]):
//!   default times as first-passage times of Lévy subordinators across
//!   exponential triggers, sampled stepwise on a time grid, with closed-form
//!   survival functions in the one-factor and multi-factor cases.
//! * **Looping-default Markov chains** ([`looping`]): the survival-indicator
//!   vector as a continuous-time Markov chain on `{0,1}^d`, including the
//!   bivariate Freund/ACBVE special case with closed-form transition
//!   probabilities.
//!
//! The [`copulas`] and [`stepwise`] modules implement the copula-linked
//! exponential model and the stepwise (iterated) indicator simulation used to
//! quantify when chaining per-period survival indicators is unbiased: it is
//! exact precisely for Marshall–Olkin laws, while extreme-value copulas such as
//! Gumbel stay unbiased only for equal horizons and the Gaussian copula is
//! biased in general.
//!
//! The [`config`]/[`driver`] modules expose the JSON model-configuration
//! schema and the batch simulation engine behind the `mosim` command-line
//! tool ([`cli`]).

pub mod cli;
pub mod config;
pub mod copulas;
pub mod driver;
mod error;
pub mod expm;
pub mod levy_frailty;
pub mod looping;
pub mod marshall_olkin;
pub mod normal;
pub mod rng;
pub mod stepwise;
pub mod subordinators;
pub mod types;

pub use error::{Error, Result};
