use std::path::PathBuf;

use crossdrift::measures::UniformComponent;
use crossdrift::InitialDensity;

/// A density preset as given on the command line. Tables are read when the
/// command runs, so a missing file is an i/o error rather than a usage error.
#[derive(Debug, Clone)]
pub enum DensityArg {
    Ready(InitialDensity),
    CdfFile(PathBuf),
}

impl DensityArg {
    pub fn resolve(&self) -> crossdrift::Result<InitialDensity> {
        match self {
            DensityArg::Ready(d) => Ok(d.clone()),
            DensityArg::CdfFile(p) => InitialDensity::from_cdf_file(p),
        }
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `a,b`, got {s:?}"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number {v:?}"))
    };
    Ok((num(a)?, num(b)?))
}

/// `uniform:a,b`, `mix:w*uniform:a,b+w*uniform:a,b...` or `cdf:PATH`.
pub fn parse_density(s: &str) -> Result<DensityArg, String> {
    if let Some(rest) = s.strip_prefix("uniform:") {
        let (a, b) = parse_pair(rest)?;
        return InitialDensity::uniform(a, b)
            .map(DensityArg::Ready)
            .map_err(|e| e.to_string());
    }
    if let Some(rest) = s.strip_prefix("mix:") {
        let mut components = Vec::new();
        for part in rest.split('+') {
            let (w, u) = part
                .split_once('*')
                .ok_or_else(|| format!("mixture component {part:?} lacks `w*`"))?;
            let weight = w
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("bad weight {w:?}"))?;
            let pair = u
                .trim()
                .strip_prefix("uniform:")
                .ok_or_else(|| format!("mixture component {u:?} is not `uniform:a,b`"))?;
            let (a, b) = parse_pair(pair)?;
            components.push(UniformComponent { weight, a, b });
        }
        return InitialDensity::mixture(components)
            .map(DensityArg::Ready)
            .map_err(|e| e.to_string());
    }
    if let Some(path) = s.strip_prefix("cdf:") {
        if path.is_empty() {
            return Err("cdf: needs a file path".into());
        }
        return Ok(DensityArg::CdfFile(PathBuf::from(path)));
    }
    Err(format!(
        "unknown density {s:?}; use uniform:a,b, mix:w*uniform:a,b+..., or cdf:PATH"
    ))
}

pub fn parse_nonneg(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 => Ok(v),
        Ok(v) => Err(format!("{v} is negative")),
        Err(_) => Err(format!("bad number {s:?}")),
    }
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} must be positive and finite")),
        Err(_) => Err(format!("bad number {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ready(s: &str) -> InitialDensity {
        match parse_density(s).unwrap() {
            DensityArg::Ready(d) => d,
            DensityArg::CdfFile(p) => panic!("unexpected file {p:?}"),
        }
    }

    #[test]
    fn presets_round_trip() {
        assert_eq!(ready("uniform:-2,-1").to_string(), "uniform:-2,-1");
        assert_eq!(
            ready("mix:0.5*uniform:0,1+0.5*uniform:2,3").to_string(),
            "mix:0.5*uniform:0,1+0.5*uniform:2,3"
        );
        assert!(matches!(parse_density("cdf:tab.txt"), Ok(DensityArg::CdfFile(_))));
    }

    #[test]
    fn bad_presets() {
        for s in [
            "uniform:1,0",
            "uniform:1",
            "gauss:0,1",
            "mix:0.5*uniform:0,1",
            "mix:uniform:0,1",
            "cdf:",
        ] {
            assert!(parse_density(s).is_err(), "{s}");
        }
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_nonneg("inf"), Ok(f64::INFINITY));
        assert!(parse_nonneg("-1").is_err());
        assert!(parse_positive("0").is_err());
        assert!(parse_positive("inf").is_err());
    }
}
