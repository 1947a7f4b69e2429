use std::path::Path;

use num_rational::BigRational;
use pbkit::poly::{pgf_of, RationalPoly};
use pbkit::scalar::parse_rational;
use pbkit::{LatticeDist, PbError, ProbParams, Result};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Inputs read and seeds used during one run.
#[derive(Default, Debug)]
pub struct Ctx {
    pub inputs: Vec<(String, String)>,
    pub seeds: Vec<u64>,
    pub generated_seed: Option<u64>,
}

impl Ctx {
    /// File contents when `src` names an existing file, otherwise the literal itself.
    pub fn read(&mut self, src: &str) -> Result<String> {
        let path = Path::new(src);
        let text = if path.is_file() {
            std::fs::read_to_string(path).map_err(|e| PbError::Parse(format!("{src}: {e}")))?
        } else {
            src.to_string()
        };
        self.inputs.push((src.to_string(), sha256_hex(text.as_bytes())));
        Ok(text)
    }

    pub fn seed(&mut self, given: Option<u64>) -> u64 {
        let s = given.unwrap_or_else(|| {
            use std::hash::BuildHasher;
            let nanos = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or_default();
            let s = std::collections::hash_map::RandomState::new().hash_one(nanos);
            self.generated_seed = Some(s);
            s
        });
        self.seeds.push(s);
        s
    }

    pub fn params(&mut self, src: &str) -> Result<ProbParams<BigRational>> {
        let text = self.read(src)?;
        parse_params(text.trim())
    }

    /// A lattice distribution: explicit JSON with `masses`, or the pmf of a PB law.
    pub fn dist(&mut self, src: &str) -> Result<LatticeDist<BigRational>> {
        let text = self.read(src)?;
        let t = text.trim();
        if t.starts_with('{') && t.contains("\"masses\"") {
            return LatticeDist::from_json_exact(t);
        }
        let p = parse_params(t)?;
        Ok(pbkit::pb_pmf_exact(&p, pbkit::PmfMethod::Convolution)?.pmf)
    }

    pub fn dist_f64(&mut self, src: &str) -> Result<LatticeDist<f64>> {
        let text = self.read(src)?;
        let t = text.trim();
        if t.starts_with('{') && t.contains("\"masses\"") {
            return LatticeDist::from_json(t);
        }
        let p = parse_params(t)?.to_f64();
        Ok(pbkit::pb_pmf(&p, pbkit::PmfMethod::Convolution)?.pmf)
    }

    /// Comma-separated coefficients, low to high; PB literals give their PGF.
    pub fn poly(&mut self, src: &str) -> Result<RationalPoly> {
        let text = self.read(src)?;
        let t = text.trim();
        if t.starts_with("bin:") || t.starts_with("pb:") {
            return Ok(pgf_of(&parse_params(t)?));
        }
        RationalPoly::parse(t)
    }
}

/// `bin:N:p`, `pb:[...]`, `pb:a,b,...`, or JSON (`[...]` or `{"probs": [...]}`).
pub fn parse_params(text: &str) -> Result<ProbParams<BigRational>> {
    if let Some(rest) = text.strip_prefix("bin:") {
        let (n, p) = rest
            .split_once(':')
            .ok_or_else(|| PbError::Parse(format!("expected bin:N:p, got {text:?}")))?;
        let n: usize = n.trim().parse().map_err(|_| PbError::Parse(format!("bad trial count {n:?}")))?;
        return ProbParams::binomial(n, parse_rational(p.trim())?);
    }
    if let Some(rest) = text.strip_prefix("pb:") {
        return list_params(rest.trim());
    }
    ProbParams::from_json_exact(text).or_else(|e| if text.starts_with('[') { list_params(text) } else { Err(e) })
}

/// `a,b,...` or `[a,b,...]` with bare or quoted rationals.
fn list_params(text: &str) -> Result<ProbParams<BigRational>> {
    let inner = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')).unwrap_or(text);
    let probs = inner
        .split(',')
        .map(|s| parse_rational(s.trim().trim_matches('"')))
        .collect::<Result<Vec<_>>>()?;
    ProbParams::new(probs)
}

pub fn parse_pairs(text: &str) -> Result<Vec<(u8, u8)>> {
    let mut out = Vec::new();
    for row in text.split(['\n', ';']).map(str::trim).filter(|r| !r.is_empty()) {
        let Some((a, b)) = row.split_once(',') else {
            return Err(PbError::Parse(format!("expected `treated,control`, got {row:?}")));
        };
        match (a.trim().parse::<u8>(), b.trim().parse::<u8>()) {
            (Ok(a), Ok(b)) => out.push((a, b)),
            _ if out.is_empty() && a.trim().parse::<f64>().is_err() => continue,
            _ => return Err(PbError::Parse(format!("bad pair {row:?}"))),
        }
    }
    Ok(out)
}
