//! On-disk cache of cell bases.
//!
//! One file per rough element under `<dir>/<key>/`: a short header, the
//! 3×3 stiffness block, the cell mesh and the three basis fields, separated
//! by `--` lines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::femcore::Field;
use crate::geometry::io::{read_mesh, write_mesh};
use crate::geometry::{BoundaryProfile, CoarseMesh};
use crate::msfem::basis::MsBasis;
use crate::msfem::flux::{FluxBranch, FluxSpec};

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Key over (profile, N, subgrid size, flux spec).
pub fn basis_cache_key(profile: &BoundaryProfile, n: usize, htilde: f64, spec: &FluxSpec) -> String {
    let text = format!(
        "basis-v1|{}|{n}|{:016x}|{}|{:016x}|{:016x}|{:?}",
        profile.cache_key(),
        htilde.to_bits(),
        spec.label,
        spec.epsilon.to_bits(),
        spec.threshold.to_bits(),
        spec.mode
    );
    sha256_hex(&text)
}

fn encode(b: &MsBasis) -> String {
    let mut s = String::new();
    let branch = match b.branch {
        FluxBranch::Geometry => "geometry",
        FluxBranch::GeometryAndFlux => "flux",
    };
    let _ = writeln!(
        s,
        "element {} r_hat {:e} mean {:e} branch {branch} iterations {}",
        b.element, b.r_hat, b.mean, b.cg_iterations
    );
    for row in &b.stiffness {
        let _ = writeln!(s, "{:e} {:e} {:e}", row[0], row[1], row[2]);
    }
    s.push_str("--\n");
    s.push_str(&write_mesh(&b.cell));
    for phi in &b.phi {
        s.push_str("--\n");
        s.push_str(&phi.to_text());
    }
    s
}

fn decode(text: &str, coarse: &CoarseMesh) -> Result<MsBasis> {
    let bad = |w: &str| Error::Parse(format!("basis cache: {w}"));
    let parts: Vec<&str> = text.split("--\n").collect();
    if parts.len() != 5 {
        return Err(bad("wrong section count"));
    }
    let mut lines = parts[0].lines();
    let head: Vec<&str> = lines.next().ok_or_else(|| bad("empty header"))?.split_whitespace().collect();
    if head.len() != 10 {
        return Err(bad("header"));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad("number"));
    let element: usize = head[1].parse().map_err(|_| bad("element"))?;
    let branch = match head[7] {
        "geometry" => FluxBranch::Geometry,
        "flux" => FluxBranch::GeometryAndFlux,
        _ => return Err(bad("branch")),
    };
    let mut stiffness = [[0.0; 3]; 3];
    for row in stiffness.iter_mut() {
        let vals: Vec<&str> = lines.next().ok_or_else(|| bad("stiffness"))?.split_whitespace().collect();
        if vals.len() != 3 {
            return Err(bad("stiffness row"));
        }
        for k in 0..3 {
            row[k] = num(vals[k])?;
        }
    }
    let cell = read_mesh(parts[1])?;
    let phi = [Field::from_text(parts[2])?, Field::from_text(parts[3])?, Field::from_text(parts[4])?];
    for f in &phi {
        f.check(&cell)?;
    }
    Ok(MsBasis {
        element,
        frame: coarse.frame(element)?,
        cell,
        phi,
        r_hat: num(head[3])?,
        mean: num(head[5])?,
        branch,
        stiffness,
        cg_iterations: head[9].parse().map_err(|_| bad("iterations"))?,
    })
}

fn file_for(dir: &Path, key: &str, element: usize) -> PathBuf {
    dir.join(key).join(format!("{element}.basis"))
}

pub fn save_bases(dir: &Path, key: &str, bases: &[MsBasis]) -> Result<()> {
    let sub = dir.join(key);
    fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    for b in bases {
        let path = file_for(dir, key, b.element);
        fs::write(&path, encode(b)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Cached bases for every rough element of `coarse`, or `None` if any is missing.
pub fn load_bases(dir: &Path, key: &str, coarse: &CoarseMesh) -> Result<Option<Vec<MsBasis>>> {
    let mut out = Vec::new();
    for t in coarse.t1_elements() {
        let path = file_for(dir, key, t);
        match fs::read_to_string(&path) {
            Ok(text) => out.push(decode(&text, coarse)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        }
    }
    Ok(Some(out))
}
