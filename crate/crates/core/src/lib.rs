//! Exact verification engine for truncated-kernel asymptotics of PGL(2, E) relative to
//! PGL(2, F), with F the rationals under a q-adic valuation and E = F(√ε) unramified.

pub mod asymptotics;
pub mod cli;
pub mod exactalg;
pub mod geometric;
pub mod group;
pub mod kernel;
pub mod padic;
pub mod spectral;
