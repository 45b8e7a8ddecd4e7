use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::integrators::Trajectory;

/// Trajectory as CSV: `k,t,x,p,E`, with `x_i`/`p_i` columns for vector states.
/// Floats carry 17 significant digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let d = traj.dim();
    let mut out = String::from("k,t");
    if d == 1 {
        out.push_str(",x,p");
    } else {
        for name in ["x", "p"] {
            for i in 0..d {
                let _ = write!(out, ",{name}_{i}");
            }
        }
    }
    out.push_str(",E\n");
    for k in 0..traj.len() {
        let _ = write!(out, "{k},{:.16e}", traj.grid.t(k));
        for v in traj.x[k].iter().chain(traj.p[k].iter()) {
            let _ = write!(out, ",{v:.16e}");
        }
        let _ = writeln!(out, ",{:.16e}", traj.energy[k]);
    }
    out
}

/// Writes through a sibling temporary file so `path` never holds partial content.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
