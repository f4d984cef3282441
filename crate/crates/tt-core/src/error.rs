use thiserror::Error;

#[derive(Debug, Error)]
pub enum TTError {
    #[error("empty core list")]
    EmptyCores,
    #[error("boundary ranks must be 1: r_0={left}, r_N={right}")]
    BoundaryRank { left: usize, right: usize },
    #[error("rank mismatch at bond {bond}: {left} vs {right}")]
    RankMismatch { bond: usize, left: usize, right: usize },
    #[error("zero rank adjacent to site {site}")]
    ZeroRank { site: usize },
    #[error("zero mode size at site {site}")]
    ZeroModeSize { site: usize },
    #[error("mode size mismatch at site {site}: {left} vs {right}")]
    ModeMismatch { site: usize, left: usize, right: usize },
    #[error("site count mismatch: {left} vs {right}")]
    SiteCountMismatch { left: usize, right: usize },
    #[error("center {center} out of range for {sites} sites")]
    CenterOutOfRange { center: usize, sites: usize },
    #[error("orthogonality violated at site {site} (deviation {deviation:.3e})")]
    NotOrthogonal { site: usize, deviation: f64 },
    #[error("dense size {entries} entries exceeds cap {cap}")]
    DenseCapExceeded { entries: u128, cap: u128 },
    #[error("dense length {len} does not match mode-size product {expected}")]
    DenseShapeMismatch { len: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad container: {0}")]
    BadContainer(String),
}
