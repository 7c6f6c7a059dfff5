//! Skill co-occurrence networks, skill domains and wage-complementarity
//! estimates from freelancer profiles.
//!
//! The pipeline reads worker profiles ([`profiles`]), links skills held by
//! the same worker ([`skillnet`]), partitions the network into skill domains
//! with Louvain ([`domains`]), estimates the wage value of target skills with
//! OLS ([`econo`]) and conditions those estimates on a worker's dominant
//! domain ([`compass`]). [`synth`] generates populations with known structure
//! and effects; [`artifact`] freezes a fitted model for the query
//! [`service`].

pub mod artifact;
pub mod compass;
pub mod domains;
pub mod econo;
pub mod pipeline;
pub mod profiles;
pub mod service;
pub mod skillnet;
pub mod synth;
mod util;
