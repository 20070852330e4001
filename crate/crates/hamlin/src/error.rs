use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    Hermiticity(f64),
    #[error("matrix is not unitary (defect {0:.3e})")]
    Unitarity(f64),
    #[error("matrix is not normal (commutator norm {0:.3e})")]
    Normality(f64),
    #[error("logarithm branch undefined: norm bound {0} is not below pi")]
    Branch(f64),
    #[error("operation requires form {expected}, got {got}")]
    Form { expected: &'static str, got: &'static str },
    #[error("operator is not a fermionic basis operator")]
    NotNilpotent,
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("invalid formula order {0}")]
    Order(u32),
    #[error("cost limit exceeded: {0}")]
    Cost(String),
    #[error("negative evolution time {0}; use the adjoint path")]
    Sign(f64),
    #[error("norm precondition violated: {0}")]
    Norm(String),
    #[error("singular values outside the approximation region: {0}")]
    Region(String),
    #[error("certification failed: {0}")]
    Cert(String),
    #[error("function evaluation produced a non-finite value at x = {0}")]
    Eval(f64),
    #[error("degree {0} has the wrong parity")]
    Parity(usize),
    #[error("payload is singular")]
    Singular,
    #[error("state error: {0}")]
    State(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
