use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("bilinear form must be a square symmetric matrix")]
    NonSymmetricForm,
}
