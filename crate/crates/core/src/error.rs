use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    InvalidPrime(u64),
    #[error("{a} is not a unit modulo {modulus}")]
    NotAUnit { a: i64, modulus: u64 },
    #[error("modulus {n} is not coprime to p = {p}")]
    RamifiedModulus { n: u64, p: u64 },
    #[error("extension degree {k} exceeds the bound {bound}")]
    ExtensionTooLarge { k: u64, bound: u64 },
    #[error("({c}:{d}) is not a point of P^1(Z/{n}Z)")]
    NotProjectivePoint { c: i64, d: i64, n: u64 },
    #[error("p = {p} divides the level {level}")]
    BadResidueCharacteristic { level: u64, p: u64 },
    #[error(
        "{ell} divides the level {level}: T_{ell} is undefined and no U_{ell} eigenvalue is known"
    )]
    UseAtkinLehnerPath { ell: u64, level: u64 },
    #[error("{a}/{n} is not a reduced fraction")]
    NotReducedFraction { a: i64, n: u64 },
    #[error("no Hecke eigenvector with the given eigenvalues (after cutting with {cut:?})")]
    EigensystemNotFound { cut: Vec<u64> },
    #[error("eigenspace still has dimension {dim} after cutting with {cut:?}")]
    MultiplicityFailure { dim: usize, cut: Vec<u64> },
    #[error("functional is not a T_{ell} eigenvector")]
    NotAnEigenfunctional { ell: u64 },
    #[error("curve has bad reduction at {ell}")]
    BadReductionPrime { ell: u64 },
    #[error("missing local data: {0}")]
    InsufficientLocalData(String),
    #[error("no Kolyvagin prime found below the search cap {cap} (found {found})")]
    ScanBudgetExceeded { cap: u64, found: usize },
    #[error("{ell} is not a Kolyvagin prime for this form")]
    NotKolyvagin { ell: u64 },
    #[error("modulus exceeds 2^63")]
    ModulusTooLarge,
    #[error("{ell} does not divide the modulus {n}")]
    FactorNotInModulus { ell: u64, n: u64 },
    #[error("derivative evaluation does not land in the prime field")]
    OracleViolation,
    #[error("a_p vanishes mod p; the form is not ordinary")]
    NotOrdinary,
    #[error("layer mismatch: expected modulus {expected}, found {found}")]
    LayerMismatch { expected: u64, found: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short stable identifier, printed by the CLI next to the message.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidPrime(_) => "InvalidPrime",
            Error::NotAUnit { .. } => "NotAUnit",
            Error::RamifiedModulus { .. } => "RamifiedModulus",
            Error::ExtensionTooLarge { .. } => "ExtensionTooLarge",
            Error::NotProjectivePoint { .. } => "NotProjectivePoint",
            Error::BadResidueCharacteristic { .. } => "BadResidueCharacteristic",
            Error::UseAtkinLehnerPath { .. } => "UseAtkinLehnerPath",
            Error::NotReducedFraction { .. } => "NotReducedFraction",
            Error::EigensystemNotFound { .. } => "EigensystemNotFound",
            Error::MultiplicityFailure { .. } => "MultiplicityFailure",
            Error::NotAnEigenfunctional { .. } => "NotAnEigenfunctional",
            Error::BadReductionPrime { .. } => "BadReductionPrime",
            Error::InsufficientLocalData(_) => "InsufficientLocalData",
            Error::ScanBudgetExceeded { .. } => "ScanBudgetExceeded",
            Error::NotKolyvagin { .. } => "NotKolyvagin",
            Error::ModulusTooLarge => "ModulusTooLarge",
            Error::FactorNotInModulus { .. } => "FactorNotInModulus",
            Error::OracleViolation => "OracleViolation",
            Error::NotOrdinary => "NotOrdinary",
            Error::LayerMismatch { .. } => "LayerMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }

    /// What the user can do about it, when there is something to do.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            Error::MultiplicityFailure { .. } => Some(
                "supply more cut primes, including U_q eigenvalues at primes dividing the level",
            ),
            Error::EigensystemNotFound { .. } => Some(
                "check the eigenvalues and the level; a single wrong a_ell empties the eigenspace",
            ),
            Error::ScanBudgetExceeded { .. } => Some("raise the search cap or lower --count"),
            Error::ExtensionTooLarge { .. } => Some(
                "the extension-field oracle is meant for small n; use the cyclotomic-ring route",
            ),
            Error::UseAtkinLehnerPath { .. } => Some(
                "choose a prime not dividing the level or add its U_q eigenvalue to the eigendata",
            ),
            Error::BadResidueCharacteristic { .. } => Some("p must not divide the level"),
            Error::NotOrdinary => Some("use the non-ordinary layer scan"),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
