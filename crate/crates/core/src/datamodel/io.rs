use super::{ChannelGeometry, DataError, Dataset, ExperimentPoint, FlowCondition, FluidState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

/// Required CSV columns, canonical order.
pub const COLUMNS: [&str; 12] = [
    "experiment_id",
    "x",
    "G_kg_sm2",
    "P_kPa",
    "ID_mm",
    "roughness_um",
    "rho_l",
    "rho_v",
    "mu_l",
    "mu_v",
    "sigma",
    "dpdz_Pa_m",
];

/// Optional temperature column, K.
pub const TEMPERATURE_COLUMN: &str = "T_K";

/// Headers with this prefix are read as mixture composition fractions.
pub const COMPOSITION_PREFIX: &str = "comp_";

/// Maps canonical column names to the headers used in a particular file.
/// Columns without an entry are looked up under their canonical name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnMapping(pub BTreeMap<String, String>);

impl ColumnMapping {
    pub fn header_for<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.0.get(canonical).map(String::as_str).unwrap_or(canonical)
    }
}

pub fn load_dataset(path: impl AsRef<Path>, schema: &ColumnMapping) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    read_dataset(file, schema)
}

pub fn read_dataset<R: Read>(reader: R, schema: &ColumnMapping) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let mut idx = [0usize; COLUMNS.len()];
    for (slot, canonical) in idx.iter_mut().zip(COLUMNS) {
        let header = schema.header_for(canonical);
        *slot = find(header).ok_or_else(|| DataError::MissingColumn(header.to_string()))?;
    }
    let temperature = find(schema.header_for(TEMPERATURE_COLUMN));
    let composition: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with(COMPOSITION_PREFIX))
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let num = |col: usize| -> Result<f64, DataError> {
            let raw = record.get(col).unwrap_or("");
            raw.parse::<f64>().map_err(|_| DataError::NonNumeric {
                line,
                column: headers.get(col).unwrap_or("").to_string(),
                value: raw.to_string(),
            })
        };
        let temperature = match temperature {
            Some(c) if !record.get(c).unwrap_or("").is_empty() => Some(num(c)?),
            _ => None,
        };
        let id = num(idx[4])? * 1e-3;
        let point = ExperimentPoint {
            experiment_id: record.get(idx[0]).unwrap_or("").to_string(),
            fluid: FluidState {
                x: num(idx[1])?,
                rho_l: num(idx[6])?,
                rho_v: num(idx[7])?,
                mu_l: num(idx[8])?,
                mu_v: num(idx[9])?,
                sigma: num(idx[10])?,
            },
            geometry: ChannelGeometry::circular(id, num(idx[5])? * 1e-6),
            flow: FlowCondition { g_flux: num(idx[2])?, pressure: num(idx[3])?, temperature },
            dpdz_exp: num(idx[11])?,
            composition: composition.iter().map(|(c, _)| num(*c)).collect::<Result<_, _>>()?,
        };
        point.validate().map_err(|violation| DataError::RowInvariant { line, violation })?;
        points.push(point);
    }
    Dataset::new(points, composition.into_iter().map(|(_, h)| h).collect())
}

/// Shortest decimal representation after rounding to 15 significant digits.
///
/// Unit conversions on load (mm → m, μm → m) are not exactly invertible in
/// binary floating point; rounding here makes write → load → write a fixed point.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    let mag = rounded.abs();
    if (1e-3..1e7).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Write a dataset in the canonical column order (plus `T_K` when any point
/// carries a temperature, plus composition columns).
pub fn write_dataset<W: Write>(ds: &Dataset, writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    let with_t = ds.points().iter().any(|p| p.flow.temperature.is_some());
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if with_t {
        header.push(TEMPERATURE_COLUMN);
    }
    header.extend(ds.composition_names().iter().map(String::as_str));
    w.write_record(&header)?;

    for p in ds.points() {
        let mut row = vec![
            p.experiment_id.clone(),
            fmt_num(p.fluid.x),
            fmt_num(p.flow.g_flux),
            fmt_num(p.flow.pressure),
            fmt_num(p.geometry.id * 1e3),
            fmt_num(p.geometry.roughness * 1e6),
            fmt_num(p.fluid.rho_l),
            fmt_num(p.fluid.rho_v),
            fmt_num(p.fluid.mu_l),
            fmt_num(p.fluid.mu_v),
            fmt_num(p.fluid.sigma),
            fmt_num(p.dpdz_exp),
        ];
        if with_t {
            row.push(p.flow.temperature.map(fmt_num).unwrap_or_default());
        }
        row.extend(p.composition.iter().map(|&c| fmt_num(c)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| DataError::Io { path: "<output>".into(), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
experiment_id,x,G_kg_sm2,P_kPa,ID_mm,roughness_um,rho_l,rho_v,mu_l,mu_v,sigma,dpdz_Pa_m
e1,0.10,190,500,1.0,1.2,520,18,1.4e-4,9.5e-6,0.008,12000
e1,0.20,190,500,1.0,1.2,520,18,1.4e-4,9.5e-6,0.008,18000
e1,0.30,190,500,1.0,1.2,520,18,1.4e-4,9.5e-6,0.008,23000
";

    fn load(text: &str) -> Result<Dataset, DataError> {
        read_dataset(text.as_bytes(), &ColumnMapping::default())
    }

    #[test]
    fn loads_three_rows() {
        let ds = load(SAMPLE).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.experiments(), ["e1".to_string()]);
        let p = &ds.points()[1];
        assert_eq!(p.fluid.x, 0.2);
        assert!((p.geometry.id - 1.0e-3).abs() < 1e-18);
        assert!((p.geometry.roughness - 1.2e-6).abs() < 1e-20);
        assert_eq!(p.geometry.d_h, p.geometry.id);
        assert_eq!(p.dpdz_exp, 18000.0);
    }

    #[test]
    fn quality_out_of_range_names_line_and_bound() {
        let bad = SAMPLE.replace("e1,0.20", "e1,1.2");
        let err = load(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, DataError::RowInvariant { line: 3, .. }), "{msg}");
        assert!(msg.contains("line 3") && msg.contains("0 <= x <= 1"), "{msg}");
    }

    #[test]
    fn missing_and_non_numeric_columns() {
        let no_sigma = SAMPLE.replace(",sigma,", ",tension,");
        assert!(matches!(load(&no_sigma), Err(DataError::MissingColumn(c)) if c == "sigma"));

        let text = SAMPLE.replace("e1,0.30,190", "e1,0.30,abc");
        match load(&text) {
            Err(DataError::NonNumeric { line, column, value }) => {
                assert_eq!((line, column.as_str(), value.as_str()), (4, "G_kg_sm2", "abc"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn permuted_columns_give_identical_dataset() {
        // Independent reorder: rebuild each line with a fixed column permutation.
        let perm = [11usize, 3, 0, 7, 5, 1, 10, 2, 9, 4, 8, 6];
        let permuted: String = SAMPLE
            .lines()
            .map(|l| {
                let cells: Vec<&str> = l.split(',').collect();
                perm.iter().map(|&i| cells[i]).collect::<Vec<_>>().join(",") + "\n"
            })
            .collect();
        assert_eq!(load(&permuted).unwrap(), load(SAMPLE).unwrap());
    }

    #[test]
    fn mapping_renames_headers() {
        let text = SAMPLE.replace("dpdz_Pa_m", "dpdz");
        let mut map = ColumnMapping::default();
        map.0.insert("dpdz_Pa_m".into(), "dpdz".into());
        assert_eq!(read_dataset(text.as_bytes(), &map).unwrap(), load(SAMPLE).unwrap());
    }

    #[test]
    fn optional_columns_round_trip() {
        let text = "\
experiment_id,x,G_kg_sm2,P_kPa,ID_mm,roughness_um,rho_l,rho_v,mu_l,mu_v,sigma,dpdz_Pa_m,T_K,comp_ch4,comp_c2h6
a,0.5,143,265,0.5,0.4,500,20,1.2e-4,9e-6,0.007,40000,120.5,0.4,0.6
";
        let ds = load(text).unwrap();
        assert_eq!(ds.composition_names(), ["comp_ch4".to_string(), "comp_c2h6".to_string()]);
        assert_eq!(ds.points()[0].flow.temperature, Some(120.5));
        let mut out = Vec::new();
        write_dataset(&ds, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn fmt_num_is_a_fixed_point_through_unit_conversion() {
        for v in [0.3, 1.1, 2.9, 0.7, 1.29, 2.56, 0.123456789012345678] {
            let once = fmt_num(v.to_owned() * 1e-3 * 1e3);
            let twice = fmt_num(once.parse::<f64>().unwrap() * 1e-3 * 1e3);
            assert_eq!(once, twice);
        }
    }
}
