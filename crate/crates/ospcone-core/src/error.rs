use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    NotSquare { rows: usize, cols: usize },
    ZeroDimension,
    NotNilpotent,
    NotInAlgebra,
    InfeasibleParams(String),
    InvalidDiagram(Vec<String>),
    InternalParityError(String),
    SizeGuard { m: usize, n: usize, limit: usize },
    CaseMismatch(String),
    NoGrouping,
    ComponentUnavailable,
    OddDimension,
    NotRegular(String),
    PostconditionFailure(String),
    ShapeMismatch,
    UncoveredCase,
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, not square"),
            Error::ZeroDimension => f.write_str("m and n must be at least 1"),
            Error::NotNilpotent => f.write_str("element is not nilpotent"),
            Error::NotInAlgebra => f.write_str("matrix is not in the named Lie algebra"),
            Error::InfeasibleParams(s) => write!(f, "infeasible parameters: {s}"),
            Error::InvalidDiagram(v) => write!(f, "invalid diagram: {}", v.join("; ")),
            Error::InternalParityError(s) => write!(f, "row multiset violates pairing rules: {s}"),
            Error::SizeGuard { m, n, limit } => {
                write!(f, "enumeration for m={m}, n={n} exceeds the size guard m*n <= {limit}")
            }
            Error::CaseMismatch(s) => write!(f, "flag case mismatch: {s}"),
            Error::NoGrouping => f.write_str("no admissible block grouping for this case"),
            Error::ComponentUnavailable => f.write_str("component choice requires even m"),
            Error::OddDimension => f.write_str("components exist only for even m"),
            Error::NotRegular(s) => write!(f, "element is not regular: {s}"),
            Error::PostconditionFailure(s) => write!(f, "postcondition failed: {s}"),
            Error::ShapeMismatch => f.write_str("weights have different shapes"),
            Error::UncoveredCase => f.write_str("no closed form for this case"),
            Error::Parse(s) => write!(f, "parse error: {s}"),
        }
    }
}

impl core::error::Error for Error {}
