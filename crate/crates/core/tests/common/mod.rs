#![allow(dead_code)]

pub mod ordinal_oracle;
pub mod rank_oracle;
pub mod theory_oracle;
