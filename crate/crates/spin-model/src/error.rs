use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("spin system must contain at least one spin")]
    EmptySystem,

    #[error("spin {label:?} has isotope {isotope:?}, which is not a supported spin-1/2 nucleus")]
    UnknownIsotope { label: String, isotope: String },

    #[error("coupling {index} references spin {spin}, but only {n} spins are defined")]
    CouplingIndexOutOfRange { index: usize, spin: usize, n: usize },

    #[error("coupling {index} connects spin {spin} to itself")]
    SelfCoupling { index: usize, spin: usize },

    #[error("the pair ({i}, {j}) appears in more than one coupling")]
    DuplicateCoupling { i: usize, j: usize },

    #[error("damping_mu must be positive, got {value}")]
    NonPositiveDamping { value: f64 },

    #[error("need at least {need} spins, got {n}")]
    TooFewSpins { n: usize, need: usize },

    #[error("no spin with isotope {isotope:?}")]
    NoSpinsOfIsotope { isotope: String },

    #[error("expected a {expected}-space operator sum, got {found}")]
    SpaceMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("term {term} has no factors")]
    EmptyFactors { term: usize },

    #[error("term {term} references site {site}, but the chain has {n} sites")]
    SiteOutOfRange { term: usize, site: usize, n: usize },

    #[error("term {term}, site {site}: local matrix is {rows}x{cols}, expected {expected}x{expected}")]
    LocalDimension {
        term: usize,
        site: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("term {term}, site {site}: matrix does not match its {tag} tag")]
    TagMismatch {
        term: usize,
        site: usize,
        tag: &'static str,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
