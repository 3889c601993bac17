//! JSON distribution specs and the grid CSV format (`t,cdf,atom`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Distribution, GridCdf, Provenance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DistributionSpec {
    PointMass {
        c: f64,
    },
    Bernoulli {
        p: f64,
    },
    Normal {
        mean: f64,
        variance: f64,
    },
    Exponential {
        rate: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    Mixture {
        components: Vec<(f64, DistributionSpec)>,
    },
    Grid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cdf: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        atoms: Option<Vec<bool>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sum_of: Option<Vec<DistributionSpec>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        product_of: Option<Vec<DistributionSpec>>,
    },
    Affine {
        base: Box<DistributionSpec>,
        scale: f64,
        shift: f64,
    },
}

impl From<&Distribution> for DistributionSpec {
    fn from(d: &Distribution) -> Self {
        match d {
            Distribution::PointMass { c } => DistributionSpec::PointMass { c: *c },
            Distribution::Bernoulli { p } => DistributionSpec::Bernoulli { p: *p },
            Distribution::Normal { mean, variance } => DistributionSpec::Normal {
                mean: *mean,
                variance: *variance,
            },
            Distribution::Exponential { rate } => DistributionSpec::Exponential { rate: *rate },
            Distribution::Uniform { a, b } => DistributionSpec::Uniform { a: *a, b: *b },
            Distribution::Gamma { shape, rate } => DistributionSpec::Gamma {
                shape: *shape,
                rate: *rate,
            },
            Distribution::Mixture(cs) => DistributionSpec::Mixture {
                components: cs.iter().map(|(w, d)| (*w, d.into())).collect(),
            },
            Distribution::Grid(g) => {
                let (sum_of, product_of) = match g.provenance() {
                    Provenance::Tabulated => (None, None),
                    Provenance::SumOf(ps) => (Some(ps.iter().map(Into::into).collect()), None),
                    Provenance::ProductOf(ps) => (None, Some(ps.iter().map(Into::into).collect())),
                };
                DistributionSpec::Grid {
                    file: None,
                    points: Some(g.points().to_vec()),
                    cdf: Some(g.cdf_values().to_vec()),
                    atoms: Some(g.atom_flags().to_vec()),
                    density: g.density().map(<[f64]>::to_vec),
                    sum_of,
                    product_of,
                }
            }
            Distribution::Affine { base, scale, shift } => DistributionSpec::Affine {
                base: Box::new(base.as_ref().into()),
                scale: *scale,
                shift: *shift,
            },
        }
    }
}

impl DistributionSpec {
    /// Build and validate; relative grid file paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Distribution> {
        let d = match self {
            DistributionSpec::PointMass { c } => Distribution::PointMass { c: *c },
            DistributionSpec::Bernoulli { p } => Distribution::Bernoulli { p: *p },
            DistributionSpec::Normal { mean, variance } => Distribution::Normal {
                mean: *mean,
                variance: *variance,
            },
            DistributionSpec::Exponential { rate } => Distribution::Exponential { rate: *rate },
            DistributionSpec::Uniform { a, b } => Distribution::Uniform { a: *a, b: *b },
            DistributionSpec::Gamma { shape, rate } => Distribution::Gamma {
                shape: *shape,
                rate: *rate,
            },
            DistributionSpec::Mixture { components } => Distribution::Mixture(
                components
                    .iter()
                    .map(|(w, s)| Ok((*w, s.build(base_dir)?)))
                    .collect::<Result<_>>()?,
            ),
            DistributionSpec::Grid {
                file,
                points,
                cdf,
                atoms,
                density,
                sum_of,
                product_of,
            } => {
                let mut grid = match (file, points, cdf) {
                    (Some(f), None, None) => read_grid_csv(&base_dir.join(f))?,
                    (None, Some(p), Some(c)) => {
                        let flags = atoms.clone().unwrap_or_else(|| vec![false; p.len()]);
                        GridCdf::new(p.clone(), c.clone(), flags)?
                    }
                    (Some(_), _, _) => {
                        return Err(Error::param(
                            "grid.file",
                            "give either `file` or inline `points`/`cdf`, not both",
                        ))
                    }
                    (None, None, _) => return Err(Error::param("grid.points", "missing")),
                    (None, Some(_), None) => return Err(Error::param("grid.cdf", "missing")),
                };
                if let Some(dens) = density {
                    grid = grid.with_density(dens.clone())?;
                }
                let provenance = match (sum_of, product_of) {
                    (Some(_), Some(_)) => {
                        return Err(Error::param(
                            "grid.sum_of",
                            "`sum_of` and `product_of` are exclusive",
                        ))
                    }
                    (Some(ps), None) => Provenance::SumOf(build_all(ps, base_dir)?),
                    (None, Some(ps)) => Provenance::ProductOf(build_all(ps, base_dir)?),
                    (None, None) => Provenance::Tabulated,
                };
                Distribution::Grid(grid.with_provenance(provenance))
            }
            DistributionSpec::Affine { base, scale, shift } => Distribution::Affine {
                base: Box::new(base.build(base_dir)?),
                scale: *scale,
                shift: *shift,
            },
        };
        d.validate()?;
        Ok(d)
    }
}

fn build_all(specs: &[DistributionSpec], base_dir: &Path) -> Result<Vec<Distribution>> {
    specs.iter().map(|s| s.build(base_dir)).collect()
}

/// Parse one JSON distribution spec.
pub fn parse_distribution(json: &str, base_dir: &Path) -> Result<Distribution> {
    let spec: DistributionSpec =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("distribution spec: {e}")))?;
    spec.build(base_dir)
}

/// Parse a JSON array of distribution specs.
pub fn parse_distribution_list(json: &str, base_dir: &Path) -> Result<Vec<Distribution>> {
    let specs: Vec<DistributionSpec> = serde_json::from_str(json)
        .map_err(|e| Error::Parse(format!("distribution list: {e}")))?;
    build_all(&specs, base_dir)
}

pub fn to_json(d: &Distribution) -> serde_json::Value {
    serde_json::to_value(DistributionSpec::from(d)).expect("spec serializes")
}

pub fn to_json_string(d: &Distribution) -> String {
    serde_json::to_string(&DistributionSpec::from(d)).expect("spec serializes")
}

#[derive(Debug, Deserialize)]
struct GridRow {
    t: f64,
    cdf: f64,
    #[serde(deserialize_with = "flag")]
    atom: bool,
}

fn flag<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let raw = String::deserialize(d)?;
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" | "" => Ok(false),
        other => Err(serde::de::Error::custom(format!("bad atom flag `{other}`"))),
    }
}

pub fn read_grid_csv(path: &Path) -> Result<GridCdf> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != ["t", "cdf", "atom"] {
        return Err(Error::param(
            "grid.file",
            format!("expected header `t,cdf,atom`, got `{}`", names.join(",")),
        ));
    }
    let (mut points, mut cdf, mut atoms) = (Vec::new(), Vec::new(), Vec::new());
    for (i, row) in rdr.deserialize::<GridRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), i + 1)))?;
        points.push(row.t);
        cdf.push(row.cdf);
        atoms.push(row.atom);
    }
    GridCdf::new(points, cdf, atoms)
}

pub fn write_grid_csv(grid: &GridCdf, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(["t", "cdf", "atom"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for i in 0..grid.len() {
        w.write_record([
            grid.points()[i].to_string(),
            grid.cdf_values()[i].to_string(),
            u8::from(grid.atom_flags()[i]).to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn here() -> &'static Path {
        Path::new(".")
    }

    #[test]
    fn parses_documented_forms() {
        let n = parse_distribution(r#"{"type":"normal","mean":0.0,"variance":0.5}"#, here()).unwrap();
        assert_eq!(n, Distribution::Normal { mean: 0.0, variance: 0.5 });
        let m = parse_distribution(
            r#"{"type":"mixture","components":[[0.5,{"type":"pointmass","c":0}],[0.5,{"type":"exponential","rate":1}]]}"#,
            here(),
        )
        .unwrap();
        assert_eq!(m.atoms(), vec![(0.0, 0.5)]);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = parse_distribution(r#"{"type":"normal","mean":0}"#, here()).unwrap_err();
        assert!(e.to_string().contains("variance"), "{e}");
        let e = parse_distribution(r#"{"type":"exponential","rate":-2}"#, here()).unwrap_err();
        assert!(e.to_string().contains("exponential.rate"), "{e}");
        let e = parse_distribution(r#"{"type":"cauchy"}"#, here()).unwrap_err();
        assert!(e.to_string().contains("cauchy"), "{e}");
    }

    #[test]
    fn grid_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(&path, "t,cdf,atom\n0,0,0\n1,0.25,1\n2,1,0\n").unwrap();
        let d = parse_distribution(r#"{"type":"grid","file":"g.csv"}"#, dir.path()).unwrap();
        assert_eq!(d.atoms(), vec![(1.0, 0.25)]);
        let Distribution::Grid(g) = &d else { panic!() };
        let out = dir.path().join("h.csv");
        write_grid_csv(g, &out).unwrap();
        assert_eq!(&read_grid_csv(&out).unwrap(), g);
    }

    #[test]
    fn grid_csv_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(&path, "x,F\n0,1\n").unwrap();
        let e = read_grid_csv(&path).unwrap_err();
        assert!(e.to_string().contains("t,cdf,atom"));
    }

    fn leaf() -> impl Strategy<Value = Distribution> {
        prop_oneof![
            (-5.0..5.0f64).prop_map(|c| Distribution::PointMass { c }),
            (0.0..=1.0f64).prop_map(|p| Distribution::Bernoulli { p }),
            (-3.0..3.0f64, 0.01..4.0f64).prop_map(|(mean, variance)| Distribution::Normal { mean, variance }),
            (0.01..10.0f64).prop_map(|rate| Distribution::Exponential { rate }),
            (-3.0..3.0f64, 0.01..3.0f64).prop_map(|(a, w)| Distribution::Uniform { a, b: a + w }),
            (0.1..6.0f64, 0.1..4.0f64).prop_map(|(shape, rate)| Distribution::Gamma { shape, rate }),
        ]
    }

    proptest! {
        #[test]
        fn json_round_trip(d in leaf(), w in 0.0..=1.0f64, e in leaf(), scale in 0.1..3.0f64, neg in any::<bool>(), shift in -2.0..2.0f64) {
            let mix = Distribution::Mixture(vec![(w, d.clone()), (1.0 - w, e)]);
            let aff = Distribution::Affine { base: Box::new(d), scale: if neg { -scale } else { scale }, shift };
            for dist in [mix, aff] {
                let text = to_json_string(&dist);
                let back = parse_distribution(&text, here()).unwrap();
                prop_assert_eq!(back, dist);
            }
        }
    }
}
