//! The four example substitutions σ₁..σ₄.

use crate::substitution::Substitution;

pub const SIGMA1: &str = include_str!("../substitutions/sigma1.sub");
pub const SIGMA2: &str = include_str!("../substitutions/sigma2.sub");
pub const SIGMA3: &str = include_str!("../substitutions/sigma3.sub");
pub const SIGMA4: &str = include_str!("../substitutions/sigma4.sub");

/// Erasing but not strongly erasing.
pub fn sigma1() -> Substitution {
    Substitution::parse(SIGMA1).expect("bundled table")
}

/// Strongly erasing, not alternating.
pub fn sigma2() -> Substitution {
    Substitution::parse(SIGMA2).expect("bundled table")
}

/// Completely erasing, not boundedly erasing.
pub fn sigma3() -> Substitution {
    Substitution::parse(SIGMA3).expect("bundled table")
}

/// Boundedly erasing.
pub fn sigma4() -> Substitution {
    Substitution::parse(SIGMA4).expect("bundled table")
}

pub fn all() -> [(&'static str, Substitution); 4] {
    [
        ("sigma1", sigma1()),
        ("sigma2", sigma2()),
        ("sigma3", sigma3()),
        ("sigma4", sigma4()),
    ]
}
