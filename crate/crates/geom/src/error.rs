use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),
    #[error("point {point:?} outside chart domain of `{chart}`")]
    OutsideDomain { chart: String, point: Vec<f64> },
    #[error("derivative order {order} exceeds the supported depth {max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("tensor is not certified parallel: {0}")]
    NotParallel(String),
    #[error("loop is not closed (gap {gap:.3e})")]
    OpenLoop { gap: f64 },
    #[error("tensor element mixes orders; a single order is required")]
    MixedOrder,
    #[error("numerical failure: {0}")]
    Numeric(String),
}
