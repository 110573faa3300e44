//! Metric sources: inline list, file, `uniform:c`, `random:seed,low,high`.

use std::fs;

use crf_core::complex::{PolyhedralMetric, TriangulatedComplex, VertexKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum MetricSource {
    Inline(Vec<f64>),
    File(String),
    Uniform(f64),
    Random { seed: u64, low: f64, high: f64 },
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return None;
    }
    parts.iter().map(|p| p.parse::<f64>().ok()).collect()
}

impl MetricSource {
    pub fn parse(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("uniform:") {
            return rest.trim().parse().map(MetricSource::Uniform).map_err(|_| format!("bad uniform metric '{s}'"));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let bad = || format!("expected random:seed,low,high, got '{s}'");
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let seed = parts[0].parse().map_err(|_| bad())?;
            let low: f64 = parts[1].parse().map_err(|_| bad())?;
            let high: f64 = parts[2].parse().map_err(|_| bad())?;
            if !(low.is_finite() && high.is_finite() && low <= high) {
                return Err(bad());
            }
            return Ok(MetricSource::Random { seed, low, high });
        }
        match parse_list(s) {
            Some(v) => Ok(MetricSource::Inline(v)),
            None => Ok(MetricSource::File(s.to_string())),
        }
    }

    /// Raw values; `n` is the number of entries wanted for generated sources.
    /// `hyper_pair[e]` marks entries joining two hyperideal vertices, which
    /// random sources shift to be positive.
    pub fn values(&self, n: usize, hyper_pair: &[bool]) -> Result<Vec<f64>, String> {
        let v = match self {
            MetricSource::Inline(v) => v.clone(),
            MetricSource::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| format!("cannot read metric file {path}: {e}"))?;
                match serde_json::from_str::<Vec<f64>>(&text) {
                    Ok(v) => v,
                    Err(_) => parse_list(&text).ok_or_else(|| format!("metric file {path} is not a list of numbers"))?,
                }
            }
            MetricSource::Uniform(x) => vec![*x; n],
            MetricSource::Random { seed, low, high } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|e| {
                        let x = if low == high { *low } else { rng.gen_range(*low..*high) };
                        if hyper_pair.get(e).copied().unwrap_or(false) {
                            x - low.min(0.0) + 1e-3
                        } else {
                            x
                        }
                    })
                    .collect()
            }
        };
        if v.len() != n {
            return Err(format!("metric has {} entries, expected {n}", v.len()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err("metric has non-finite entries".into());
        }
        Ok(v)
    }

    pub fn for_complex(&self, c: &TriangulatedComplex) -> Result<PolyhedralMetric, String> {
        let hyper: Vec<bool> = c
            .edge_classes()
            .iter()
            .map(|e| {
                c.vertex_kind(e.endpoints.0) == VertexKind::Hyperideal
                    && c.vertex_kind(e.endpoints.1) == VertexKind::Hyperideal
            })
            .collect();
        self.values(c.edge_count(), &hyper).map(PolyhedralMetric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sources() {
        assert_eq!(MetricSource::parse("0.1,-2").unwrap(), MetricSource::Inline(vec![0.1, -2.0]));
        assert_eq!(MetricSource::parse("uniform:0.5").unwrap(), MetricSource::Uniform(0.5));
        assert_eq!(
            MetricSource::parse("random:42,-0.5,0.5").unwrap(),
            MetricSource::Random { seed: 42, low: -0.5, high: 0.5 }
        );
        assert_eq!(MetricSource::parse("m.json").unwrap(), MetricSource::File("m.json".into()));
        assert!(MetricSource::parse("random:1,2").is_err());
        assert!(MetricSource::parse("random:1,2,1").is_err());
    }

    #[test]
    fn random_is_seeded_and_shifted() {
        let src = MetricSource::parse("random:7,-0.5,0.5").unwrap();
        let a = src.values(4, &[true, false, false, false]).unwrap();
        assert_eq!(a, src.values(4, &[true, false, false, false]).unwrap());
        assert!(a[0] > 0.0);
        assert!(a.iter().skip(1).all(|x| (-0.5..0.5).contains(x)));
        assert!(src.values(3, &[]).unwrap() != MetricSource::parse("random:8,-0.5,0.5").unwrap().values(3, &[]).unwrap());
    }

    #[test]
    fn length_mismatch() {
        assert!(MetricSource::Inline(vec![1.0]).values(2, &[]).is_err());
    }
}
