//! Plain-text field snapshots: `#` header lines, then one CSV row per node.

use super::{GridField, GridGeometry};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Header values stored alongside a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub t: f64,
    pub gamma: f64,
    pub p: f64,
}

pub fn format_snapshot(u: &GridField, meta: SnapshotMeta) -> String {
    let g = u.geom();
    let mut s = String::with_capacity(48 * g.len() + 128);
    let _ = writeln!(s, "# grid {} {} {} {} {}", g.half_width_xy, g.half_width_tau, g.n_xy, g.n_tau, g.offset);
    let _ = writeln!(s, "# t {}\n# gamma {}\n# p {}", meta.t, meta.gamma, meta.p);
    s.push_str("ix,iy,it,x,y,tau,value\n");
    for (idx, v) in u.values().iter().enumerate() {
        let (ix, iy, it) = g.unravel(idx);
        let _ = writeln!(s, "{ix},{iy},{it},{},{},{},{v:e}", g.x(ix), g.x(iy), g.tau(it));
    }
    s
}

pub fn write_snapshot(path: &Path, u: &GridField, meta: SnapshotMeta) -> Result<()> {
    u.ensure_clean()?;
    std::fs::write(path, format_snapshot(u, meta))?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Configuration(format!("snapshot: {}", msg.into()))
}

fn num<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad(format!("cannot parse {what}")))
}

pub fn parse_snapshot(text: &str) -> Result<(GridField, SnapshotMeta)> {
    let mut geom = None;
    let mut meta = SnapshotMeta { t: 0.0, gamma: 0.0, p: 2.0 };
    let mut values = Vec::new();
    let mut filled = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("ix,") {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let mut it = h.split_whitespace();
            match it.next() {
                Some("grid") => {
                    let g = GridGeometry::new(
                        num(it.next(), "L")?,
                        num(it.next(), "L_tau")?,
                        num(it.next(), "n_xy")?,
                        num(it.next(), "n_tau")?,
                        num(it.next(), "offset")?,
                    )?;
                    values = vec![0.0; g.len()];
                    filled = vec![false; g.len()];
                    geom = Some(g);
                }
                Some("t") => meta.t = num(it.next(), "t")?,
                Some("gamma") => meta.gamma = num(it.next(), "gamma")?,
                Some("p") => meta.p = num(it.next(), "p")?,
                _ => {}
            }
            continue;
        }
        let g = geom.ok_or_else(|| bad("data row before the grid header"))?;
        let mut f = line.split(',');
        let (ix, iy, it): (usize, usize, usize) = (num(f.next(), "ix")?, num(f.next(), "iy")?, num(f.next(), "it")?);
        if ix >= g.n_xy || iy >= g.n_xy || it >= g.n_tau {
            return Err(bad(format!("node ({ix}, {iy}, {it}) outside the grid")));
        }
        let v: f64 = num(f.nth(3), "value")?;
        let idx = g.index(ix, iy, it);
        values[idx] = v;
        filled[idx] = true;
    }
    let g = geom.ok_or_else(|| bad("missing grid header"))?;
    if let Some(miss) = filled.iter().position(|&b| !b) {
        return Err(bad(format!("node {:?} has no value", g.unravel(miss))));
    }
    let u = GridField::from_values(g, values)?;
    u.ensure_clean()?;
    Ok((u, meta))
}

pub fn read_snapshot(path: &Path) -> Result<(GridField, SnapshotMeta)> {
    parse_snapshot(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample;

    #[test]
    fn roundtrip_is_exact() {
        let g = GridGeometry::new(2.0, 5.0, 4, 5, true).unwrap();
        let u = sample(|p| (p.x[0] - 0.3 * p.tau).sin() / 3.0, &g).unwrap();
        let meta = SnapshotMeta { t: 1.25, gamma: -0.5, p: 2.5 };
        let (v, m) = parse_snapshot(&format_snapshot(&u, meta)).unwrap();
        assert_eq!(u, v);
        assert_eq!(m, meta);
    }

    #[test]
    fn incomplete_snapshot_is_rejected() {
        let g = GridGeometry::new(1.0, 1.0, 2, 2, true).unwrap();
        let text = format_snapshot(&GridField::zeros(g), SnapshotMeta { t: 0.0, gamma: 0.0, p: 2.0 });
        let cut: String = text.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_snapshot(&cut), Err(Error::Configuration(_))));
        assert!(parse_snapshot("0,0,0,0,0,0,1\n").is_err());
    }
}
