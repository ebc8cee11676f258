use crate::error::{CliError, Result};

pub const THREADS_VAR: &str = "RCC_THREADS";

/// Worker pool capped by `RCC_THREADS` when set; rayon's default otherwise.
pub fn pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                return Err(CliError::Validation(format!(
                    "{THREADS_VAR} must be a positive integer, got {v:?}"
                )))
            }
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start worker pool: {e}")))
}
