//! Digital self-interference cancellers: basis term catalog, basis matrix
//! assembly, least-squares learning, SI regeneration and subtraction.

mod basis;
mod ls;
mod model;
mod terms;

pub use basis::{build_basis_matrix, build_basis_matrix_with_lags, BasisMatrix, ColumnIndex};
pub use ls::{ls_estimate, ls_estimate_many, ls_estimate_with, LsOptions, LsSolution, DEFAULT_CONDITION_LIMIT};
pub use model::{cancel, fit_canceller, regenerate_si, CancellerModel, FitDiagnostics};
pub use terms::{make_term_set, Term, TermKind, TermSet, MAX_TOP_K};
