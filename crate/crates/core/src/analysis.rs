//! Feature-relevance diagnostics: Pearson and Spearman correlation matrices
//! over measured variables and correlation-derived flow parameters.

use crate::correlations::{
    churchill_friction, churchill_friction_literal, evaluate_correlation, mixture_viscosity, CorrelationChoice,
    CorrelationError, CorrelationKind, CorrelationOptions, ViscosityModel,
};
use crate::datamodel::{Dataset, ExperimentPoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the measured-gradient column, the regression target.
pub const TARGET: &str = "dpdz_exp";

/// Measured columns, in table order (composition columns follow `roughness`).
pub const MEASURED: [&str; 5] = ["x", "G", "P", "ID", "roughness"];
/// Correlation-derived columns, in table order (the target comes last).
pub const DERIVED: [&str; 7] = ["Re_2ph", "Re_l", "Re_v", "f_l", "f_v", "sun_mishima", "awad"];

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("coefficient undefined: a column is constant")]
    Undefined,
    #[error("non-finite value in column `{0}`")]
    NonFinite(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("point {index}: {source}")]
    Correlation {
        index: usize,
        #[source]
        source: CorrelationError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self, AnalysisError> {
        if names.len() != columns.len() {
            return Err(AnalysisError::LengthMismatch(names.len(), columns.len()));
        }
        let n = columns.first().map_or(0, Vec::len);
        if n < 2 {
            return Err(AnalysisError::TooShort(n));
        }
        for (name, c) in names.iter().zip(&columns) {
            if c.len() != n {
                return Err(AnalysisError::LengthMismatch(n, c.len()));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(AnalysisError::NonFinite(name.clone()));
            }
        }
        Ok(Self { names, columns })
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// Keep only `names`, in that order.
    pub fn select(&self, names: &[String]) -> Result<Self, AnalysisError> {
        let columns = names
            .iter()
            .map(|n| self.column(n).map(<[f64]>::to_vec).ok_or_else(|| AnalysisError::UnknownFeature(n.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Self { names: names.to_vec(), columns })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub method: Method,
    pub names: Vec<String>,
    /// `None` where a coefficient is undefined (constant column).
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }

    /// Square CSV with a header row and a leading name column; undefined
    /// coefficients are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (n, row) in self.names.iter().zip(&self.values) {
            out.push_str(n);
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&format!("{v}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<(), AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(AnalysisError::TooShort(xs.len()));
    }
    Ok(())
}

/// `cov(x, y) / (σx σy)` with population normalisation throughout.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let (cov, sx, sy) = (sxy / n, (sxx / n).sqrt(), (syy / n).sqrt());
    if sx == 0.0 || sy == 0.0 {
        return Err(AnalysisError::Undefined);
    }
    Ok((cov / (sx * sy)).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Pairwise coefficients for every feature pair. A constant column makes its
/// row and column undefined instead of failing the whole matrix.
pub fn correlation_matrix(table: &FeatureTable, method: Method) -> CorrelationMatrix {
    let prepared: Vec<Vec<f64>> = match method {
        Method::Pearson => table.columns.clone(),
        Method::Spearman => table.columns.iter().map(|c| average_ranks(c)).collect(),
    };
    let k = prepared.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = pearson(&prepared[i], &prepared[j]).ok().map(|v| if i == j { 1.0 } else { v });
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    CorrelationMatrix { method, names: table.names.clone(), values }
}

/// Every column name [`build_feature_table`] emits for `ds`, target last.
pub fn feature_names(ds: &Dataset) -> Vec<String> {
    MEASURED
        .iter()
        .map(|s| s.to_string())
        .chain(ds.composition_names().iter().cloned())
        .chain(DERIVED.iter().map(|s| s.to_string()))
        .chain(std::iter::once(TARGET.to_string()))
        .collect()
}

/// Value of one named feature for one point.
pub fn point_feature(point: &ExperimentPoint, name: &str, composition_names: &[String], opts: &CorrelationOptions) -> Result<f64, FeatureError> {
    let (f, g, q) = (&point.fluid, &point.geometry, &point.flow);
    let friction = |re: f64| {
        if opts.literal_mode {
            churchill_friction_literal(re, g.roughness)
        } else {
            churchill_friction(re, g.relative_roughness())
        }
    };
    let corr = |kind| evaluate_correlation(&CorrelationChoice { kind, options: *opts }, point).map(|r| r.0.dpdz());
    let re_l = q.g_flux * (1.0 - f.x) * g.id / f.mu_l;
    let re_v = q.g_flux * f.x * g.id / f.mu_v;
    Ok(match name {
        "x" => f.x,
        "G" => q.g_flux,
        "P" => q.pressure,
        "ID" => g.id,
        "roughness" => g.roughness,
        "Re_2ph" => q.g_flux * g.id / mixture_viscosity(f, ViscosityModel::Cicchitti),
        "Re_l" => re_l,
        "Re_v" => re_v,
        "f_l" => friction(re_l)?,
        "f_v" => friction(re_v)?,
        "sun_mishima" => corr(CorrelationKind::SunMishima)?,
        "awad" => corr(CorrelationKind::AwadMuzychka)?,
        "cicchitti" => corr(CorrelationKind::Cicchitti)?,
        TARGET => point.dpdz_exp,
        other => match composition_names.iter().position(|c| c == other) {
            Some(k) => point.composition[k],
            None => return Err(FeatureError::Unknown(other.to_string())),
        },
    })
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("unknown feature `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
}

/// Measured and correlation-derived columns for every point of `ds`.
///
/// `Re_2ph` uses the quality-weighted (Cicchitti) viscosity; the phase
/// Reynolds numbers and friction factors are the Sun & Mishima liquid-alone /
/// vapor-alone quantities. `columns`, when given, selects and orders the output.
pub fn build_feature_table(ds: &Dataset, opts: &CorrelationOptions, columns: Option<&[String]>) -> Result<FeatureTable, AnalysisError> {
    let names = match columns {
        Some(c) => c.to_vec(),
        None => feature_names(ds),
    };
    let mut cols = vec![Vec::with_capacity(ds.len()); names.len()];
    for (index, p) in ds.points().iter().enumerate() {
        for (col, name) in cols.iter_mut().zip(&names) {
            let v = point_feature(p, name, ds.composition_names(), opts).map_err(|e| match e {
                FeatureError::Unknown(n) => AnalysisError::UnknownFeature(n),
                FeatureError::Correlation(source) => AnalysisError::Correlation { index, source },
            })?;
            col.push(v);
        }
    }
    FeatureTable::new(names, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::fixtures::point;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    /// Textbook two-pass formulas over explicit index loops.
    fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let mut mx = 0.0;
        let mut my = 0.0;
        for i in 0..n {
            mx += x[i];
            my += y[i];
        }
        mx /= n as f64;
        my /= n as f64;
        let mut c = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for i in 0..n {
            c += (x[i] - mx) * (y[i] - my);
            vx += (x[i] - mx).powi(2);
            vy += (y[i] - my).powi(2);
        }
        c / (vx.sqrt() * vy.sqrt())
    }

    /// O(n²) ranking: rank = 1 + #smaller + (#equal − 1) / 2.
    fn brute_ranks(x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&v| {
                let less = x.iter().filter(|&&w| w < v).count() as f64;
                let eq = x.iter().filter(|&&w| w == v).count() as f64;
                1.0 + less + (eq - 1.0) / 2.0
            })
            .collect()
    }

    #[test]
    fn pearson_hand_values() {
        let xs = [1.0, 2.0, 3.0, 4.5];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|v| -v).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        // r = 1.5 / sqrt(1 * (14/6)) by hand
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap() - 0.9819805060619657).abs() < 1e-7);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(AnalysisError::Undefined)));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(AnalysisError::TooShort(1))));
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_hand_values() {
        let xs = [0.3, -1.0, 2.0, 0.7];
        let ys: Vec<f64> = xs.iter().map(|v: &f64| v.exp()).collect();
        assert!((spearman(&xs, &ys).unwrap() - 1.0).abs() < 1e-15);
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0];
        let rev = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&sorted, &rev).unwrap() + 1.0).abs() < 1e-15);
        // ranks (1, 2.5, 2.5, 4) on both sides
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert!((spearman(&[1.0, 2.0, 2.0, 4.0], &[10.0, 20.0, 20.0, 40.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(spearman(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0]), Err(AnalysisError::Undefined)));
    }

    #[test]
    fn ranks_match_brute_force() {
        let mut r = rng::stream(8, 0, &[]);
        for _ in 0..50 {
            let n = r.gen_range(2..40);
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(0..8) as f64).collect();
            assert_eq!(average_ranks(&x), brute_ranks(&x));
        }
    }

    #[test]
    fn matrix_matches_pairwise_brute_force() {
        let mut r = rng::stream(10, 0, &[]);
        let cols: Vec<Vec<f64>> = (0..6).map(|_| (0..10).map(|_| r.gen_range(-3.0..3.0)).collect()).collect();
        let names: Vec<String> = (0..6).map(|i| format!("f{i}")).collect();
        let table = FeatureTable::new(names, cols.clone()).unwrap();
        let pm = correlation_matrix(&table, Method::Pearson);
        let sm = correlation_matrix(&table, Method::Spearman);
        for i in 0..6 {
            for j in 0..6 {
                let p = brute_pearson(&cols[i], &cols[j]);
                let s = brute_pearson(&brute_ranks(&cols[i]), &brute_ranks(&cols[j]));
                assert!((pm.values[i][j].unwrap() - p).abs() < 1e-12);
                assert!((sm.values[i][j].unwrap() - s).abs() < 1e-12);
                assert_eq!(pm.values[i][j], pm.values[j][i]);
            }
            assert_eq!(pm.values[i][i], Some(1.0));
        }
    }

    #[test]
    fn constant_columns_are_undefined_not_fatal() {
        let t = FeatureTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0], vec![1.0, 2.0, 3.0]],
        )
        .unwrap();
        let m = correlation_matrix(&t, Method::Pearson);
        assert_eq!(m.get("a", "c"), Some(1.0));
        assert_eq!(m.get("b", "b"), None);
        assert_eq!(m.get("a", "b"), None);
        let csv = m.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "feature,a,b,c");
        assert_eq!(csv.lines().nth(2).unwrap(), "b,,,");
    }

    #[test]
    fn feature_table_shape_and_purity() {
        let ds = Dataset::new(vec![point("a", 0.2, 9000.0), point("a", 0.5, 15000.0), point("b", 0.8, 21000.0)], vec![])
            .unwrap();
        let opts = CorrelationOptions::default();
        let t = build_feature_table(&ds, &opts, None).unwrap();
        assert_eq!(t.names, feature_names(&ds));
        assert_eq!(t.names.len(), MEASURED.len() + DERIVED.len() + 1);
        assert_eq!(t.len(), 3);
        let sm = CorrelationChoice::new(CorrelationKind::SunMishima);
        for (p, v) in ds.points().iter().zip(t.column("sun_mishima").unwrap()) {
            assert_eq!(*v, evaluate_correlation(&sm, p).unwrap().0.dpdz());
        }
        assert_eq!(build_feature_table(&ds, &opts, None).unwrap(), t);
        let sel = build_feature_table(&ds, &opts, Some(&["ID".into(), "x".into()])).unwrap();
        assert_eq!(sel.columns[1], vec![0.2, 0.5, 0.8]);
        assert!(matches!(
            build_feature_table(&ds, &opts, Some(&["nope".into()])),
            Err(AnalysisError::UnknownFeature(_))
        ));
    }

    proptest! {
        #[test]
        fn transform_invariance(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
            a in 0.1f64..5.0, b in -5.0f64..5.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assume!(pearson(&x, &y).is_ok());
            let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson(&xa, &y).unwrap() - pearson(&x, &y).unwrap()).abs() < 1e-9);
            let xm: Vec<f64> = x.iter().map(|v| v.powi(3) + v).collect();
            prop_assert_eq!(spearman(&xm, &y).unwrap(), spearman(&x, &y).unwrap());
            prop_assert_eq!(spearman(&x, &y).unwrap(), pearson(&brute_ranks(&x), &brute_ranks(&y)).unwrap());
        }
    }
}
