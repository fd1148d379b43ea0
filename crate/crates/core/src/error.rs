use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("line normal is zero")]
    DegenerateLine,
    #[error("fold anchor lies on the fold line")]
    AnchorOnLine,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has no area")]
    DegenerateDomain,
    #[error("polygon is not convex")]
    NotConvex,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("point ({x}, {y}) is outside the map domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("image ({x}, {y}) escapes the map domain")]
    ImageEscapesDomain { x: f64, y: f64 },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("fold {index} is not a good fold of the folded domain")]
    BadFold { index: usize },
    #[error("linear part is not expanding (|det| = {0})")]
    NotExpanding(f64),
    #[error("region {0} is not supported here")]
    UnsupportedRegion(String),
    #[error("denominator 1 + a - ab vanishes")]
    SingularDenominator,
    #[error("({a}, {b}) is outside the renormalization neighborhood")]
    OutsideNeighborhood { a: f64, b: f64 },
    #[error("target ({a}, {b}) is not attained on the fiber")]
    Unreachable { a: f64, b: f64 },
    #[error("tree depth {0} exceeds the cap of 12")]
    DepthTooLarge(usize),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("parameters violate {0}")]
    RegionMismatch(String),
    #[error("coordinate change is singular ({0})")]
    SingularChange(&'static str),
    #[error("orbit hit a critical line")]
    DegenerateOrbit,
    #[error("attractor grid is empty")]
    EmptyAttractor,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
