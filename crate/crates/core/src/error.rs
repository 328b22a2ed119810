use thiserror::Error;

/// Errors raised by constructors and computations across the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("modulus p^n = {p}^{n} exceeds the supported range")]
    ModulusTooLarge { p: u64, n: u32 },
    #[error("group ring has too many elements ({0})")]
    GroupTooLarge(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("operation requires a trivial group part")]
    NontrivialGroup,
    #[error("d∘d is nonzero at degree {degree}")]
    NotAComplex { degree: i64 },
    #[error("map does not commute with differentials at degree {degree}")]
    NotAChainMap { degree: i64 },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("budget exceeded: need {needed} entries, budget {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("sequence is not regular at truncation {truncation}: {witness}")]
    NotRegular { truncation: u32, witness: String },
    #[error("simplicial identity fails: {0}")]
    SimplicialIdentity(String),
    #[error("degree out of range: {0}")]
    DegreeRange(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("axiom failure: {0}")]
    Axiom(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not free: {0}")]
    NotFree(String),
}

pub type Result<T> = std::result::Result<T, Error>;
