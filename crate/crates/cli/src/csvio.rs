//! Observation CSV format: header `x1,...,xd,v1,...,vd`, one observation
//! per line, plain decimal floats. The domain box comes from the scenario
//! config, not the file.

use anyhow::{bail, Context};
use fieldtrack_core::field::{DomainBox, ObservationSet};
use std::io::Write;
use std::path::Path;

pub fn write_observations(obs: &ObservationSet, path: &Path) -> anyhow::Result<()> {
    let d = obs.dim();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?,
    );
    let header: Vec<String> = (1..=d)
        .map(|j| format!("x{j}"))
        .chain((1..=d).map(|j| format!("v{j}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..obs.len() {
        let row: Vec<String> = obs
            .point(i)
            .iter()
            .chain(obs.value(i).iter())
            .map(|x| format!("{x}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_observations(path: &Path, domain: DomainBox) -> anyhow::Result<ObservationSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = match lines.next() {
        Some(h) => h,
        None => bail!("{}: empty file", path.display()),
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() % 2 != 0 || cols.is_empty() {
        bail!("{}: header must be x1..xd,v1..vd", path.display());
    }
    let d = cols.len() / 2;
    for (j, col) in cols.iter().enumerate() {
        let expect = if j < d {
            format!("x{}", j + 1)
        } else {
            format!("v{}", j + 1 - d)
        };
        if *col != expect {
            bail!(
                "{}: header column {} is `{}`, expected `{}`",
                path.display(),
                j + 1,
                col,
                expect
            );
        }
    }
    if d != domain.dim() {
        bail!(
            "{}: file dimension {} does not match domain dimension {}",
            path.display(),
            d,
            domain.dim()
        );
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1; // 1-based, header is line 1
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 * d {
            bail!(
                "{}:{}: expected {} fields, found {}",
                path.display(),
                lineno,
                2 * d,
                fields.len()
            );
        }
        let mut row = Vec::with_capacity(2 * d);
        for f in &fields {
            let x: f64 = f.parse().with_context(|| {
                format!("{}:{}: `{}` is not a number", path.display(), lineno, f)
            })?;
            if !x.is_finite() {
                bail!("{}:{}: non-finite value `{}`", path.display(), lineno, f);
            }
            row.push(x);
        }
        points.extend_from_slice(&row[..d]);
        values.extend_from_slice(&row[d..]);
    }
    Ok(ObservationSet::from_flat(domain, points, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fieldtrack_core::sim::{sample_observations, FieldKind, SyntheticScenario};

    fn domain() -> DomainBox {
        DomainBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let sc = SyntheticScenario {
            field: FieldKind::Circular,
            domain: domain(),
            n: 25,
            noise_scale: 0.5,
            seed: 3,
        };
        let obs = sample_observations(&sc).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        write_observations(&obs, &path).unwrap();
        let back = read_observations(&path, domain()).unwrap();
        assert_eq!(obs.len(), back.len());
        for i in 0..obs.len() {
            assert_eq!(obs.point(i), back.point(i));
            assert_eq!(obs.value(i), back.value(i));
        }
    }

    #[test]
    fn short_row_errors_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x2,v1,v2\n0.1,0.2,0.3,0.4\n0.1,0.2,0.3\n").unwrap();
        let err = read_observations(&path, domain()).unwrap_err().to_string();
        assert!(err.contains(":3:"), "error was `{err}`");
    }

    #[test]
    fn nan_is_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.csv");
        std::fs::write(&path, "x1,x2,v1,v2\n0.1,0.2,NaN,0.4\n").unwrap();
        let err = read_observations(&path, domain()).unwrap_err().to_string();
        assert!(err.contains(":2:") && err.contains("non-finite"), "error was `{err}`");
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hdr.csv");
        std::fs::write(&path, "x1,y2,v1,v2\n0,0,0,0\n").unwrap();
        assert!(read_observations(&path, domain()).is_err());
    }
}
