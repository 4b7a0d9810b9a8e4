#![allow(dead_code)]

pub mod lp_oracle;
pub mod suite;
