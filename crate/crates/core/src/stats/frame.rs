//! Column store that turns a [`ModelSpec`] into design matrices.
//!
//! Two-level factors are coded +0.5 / -0.5, so main effects are estimated at
//! the grand mean of the other factors.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use super::formula::{ModelSpec, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    /// `levels[0]` is coded +0.5; `positive[i]` is true for rows at that level.
    Factor {
        levels: [String; 2],
        positive: Vec<bool>,
    },
    Group {
        levels: Vec<String>,
        codes: Vec<usize>,
    },
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Factor { positive, .. } => positive.len(),
            Column::Group { codes, .. } => codes.len(),
        }
    }

    fn subset(&self, mask: &[bool]) -> Column {
        fn pick<T: Clone>(v: &[T], mask: &[bool]) -> Vec<T> {
            v.iter()
                .zip(mask)
                .filter(|(_, &keep)| keep)
                .map(|(x, _)| x.clone())
                .collect()
        }
        match self {
            Column::Numeric(v) => Column::Numeric(pick(v, mask)),
            Column::Factor { levels, positive } => Column::Factor {
                levels: levels.clone(),
                positive: pick(positive, mask),
            },
            Column::Group { levels, codes } => {
                let kept = pick(codes, mask);
                let used: BTreeSet<usize> = kept.iter().copied().collect();
                let remap: Vec<Option<usize>> = (0..levels.len())
                    .map(|c| used.iter().position(|&u| u == c))
                    .collect();
                Column::Group {
                    levels: used.iter().map(|&c| levels[c].clone()).collect(),
                    codes: kept.iter().map(|&c| remap[c].expect("used level")).collect(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelFrame {
    n: usize,
    columns: Vec<(String, Column)>,
}

/// Random-effects design for one grouping factor: `z` is `n × q` row-major.
#[derive(Debug, Clone)]
pub struct RandomDesign {
    pub names: Vec<String>,
    pub q: usize,
    pub z: Vec<f64>,
    pub codes: Vec<usize>,
    pub n_groups: usize,
}

impl ModelFrame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn push(&mut self, name: &str, column: Column) -> Result<()> {
        if self.columns.is_empty() {
            self.n = column.len();
        } else if column.len() != self.n {
            return Err(Error::Validation(format!(
                "column `{name}` has {} rows, frame has {}",
                column.len(),
                self.n
            )));
        }
        if self.columns.iter().any(|(n, _)| n == name) {
            return Err(Error::Validation(format!("duplicate column `{name}`")));
        }
        self.columns.push((name.to_string(), column));
        Ok(())
    }

    pub fn add_numeric(&mut self, name: &str, values: Vec<f64>) -> Result<&mut Self> {
        self.push(name, Column::Numeric(values))?;
        Ok(self)
    }

    pub fn add_binary(&mut self, name: &str, values: &[bool]) -> Result<&mut Self> {
        self.add_numeric(name, values.iter().map(|&b| f64::from(u8::from(b))).collect())
    }

    /// `positive_level` is coded +0.5 and `negative_level` -0.5.
    pub fn add_factor<S: AsRef<str>>(
        &mut self,
        name: &str,
        positive_level: &str,
        negative_level: &str,
        values: &[S],
    ) -> Result<&mut Self> {
        let positive = values
            .iter()
            .map(|v| match v.as_ref() {
                l if l == positive_level => Ok(true),
                l if l == negative_level => Ok(false),
                other => Err(Error::Validation(format!(
                    "factor `{name}` has unexpected level `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        self.push(
            name,
            Column::Factor {
                levels: [positive_level.to_string(), negative_level.to_string()],
                positive,
            },
        )?;
        Ok(self)
    }

    pub fn add_group<S: AsRef<str>>(&mut self, name: &str, values: &[S]) -> Result<&mut Self> {
        let levels: Vec<String> = values
            .iter()
            .map(|v| v.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let codes = values
            .iter()
            .map(|v| levels.binary_search_by(|l| l.as_str().cmp(v.as_ref())).expect("level present"))
            .collect();
        self.push(name, Column::Group { levels, codes })?;
        Ok(self)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn subset(&self, mask: &[bool]) -> Result<ModelFrame> {
        if mask.len() != self.n {
            return Err(Error::Validation("subset mask length mismatch".into()));
        }
        Ok(ModelFrame {
            n: mask.iter().filter(|&&m| m).count(),
            columns: self
                .columns
                .iter()
                .map(|(n, c)| (n.clone(), c.subset(mask)))
                .collect(),
        })
    }

    /// Rows where factor `name` sits at `level`.
    pub fn level_mask(&self, name: &str, level: &str) -> Result<Vec<bool>> {
        match self.column(name) {
            Some(Column::Factor { levels, positive }) => {
                if level == levels[0] {
                    Ok(positive.clone())
                } else if level == levels[1] {
                    Ok(positive.iter().map(|p| !p).collect())
                } else {
                    Err(Error::Validation(format!("factor `{name}` has no level `{level}`")))
                }
            }
            Some(Column::Group { levels, codes }) => {
                let code = levels.iter().position(|l| l == level);
                Ok(codes.iter().map(|&c| Some(c) == code).collect())
            }
            _ => Err(Error::Validation(format!("`{name}` is not a factor"))),
        }
    }

    /// Coded values of a numeric column or two-level factor.
    pub fn coded(&self, name: &str) -> Result<Vec<f64>> {
        match self.column(name) {
            Some(Column::Numeric(v)) => Ok(v.clone()),
            Some(Column::Factor { positive, .. }) => {
                Ok(positive.iter().map(|&p| if p { 0.5 } else { -0.5 }).collect())
            }
            Some(Column::Group { .. }) => Err(Error::Formula(format!(
                "grouping factor `{name}` cannot be a fixed-effect term"
            ))),
            None => Err(Error::Formula(format!("unknown variable `{name}`"))),
        }
    }

    fn term_values(&self, term: &Term) -> Result<Vec<f64>> {
        let mut out = vec![1.0; self.n];
        for factor in &term.0 {
            for (o, v) in out.iter_mut().zip(self.coded(factor)?) {
                *o *= v;
            }
        }
        Ok(out)
    }

    pub fn response(&self, spec: &ModelSpec) -> Result<Vec<f64>> {
        let y = match self.column(&spec.response) {
            Some(Column::Numeric(v)) => v.clone(),
            Some(Column::Factor { positive, .. }) => {
                positive.iter().map(|&p| f64::from(u8::from(p))).collect()
            }
            _ => {
                return Err(Error::Formula(format!(
                    "response `{}` is not a numeric column",
                    spec.response
                )))
            }
        };
        if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Validation(format!(
                "response `{}` must lie in [0, 1]",
                spec.response
            )));
        }
        Ok(y)
    }

    pub fn fixed_design(&self, spec: &ModelSpec) -> Result<(DMatrix<f64>, Vec<String>)> {
        let names = spec.coefficient_names();
        let mut x = DMatrix::zeros(self.n, names.len());
        let mut col = 0;
        if spec.intercept {
            x.column_mut(0).fill(1.0);
            col = 1;
        }
        for term in &spec.fixed {
            let values = self.term_values(term)?;
            x.column_mut(col).copy_from_slice(&values);
            col += 1;
        }
        Ok((x, names))
    }

    pub fn random_design(&self, spec: &ModelSpec) -> Result<Option<RandomDesign>> {
        let Some(part) = &spec.random else {
            return Ok(None);
        };
        let (n_groups, codes) = match self.column(&part.group) {
            Some(Column::Group { levels, codes }) => (levels.len(), codes.clone()),
            _ => {
                return Err(Error::Formula(format!(
                    "`{}` is not a grouping factor",
                    part.group
                )))
            }
        };
        let mut columns: Vec<Vec<f64>> = Vec::new();
        if part.intercept {
            columns.push(vec![1.0; self.n]);
        }
        for slope in &part.slopes {
            columns.push(self.term_values(slope)?);
        }
        let q = columns.len();
        let mut z = vec![0.0; self.n * q];
        for (k, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                z[i * q + k] = *v;
            }
        }
        Ok(Some(RandomDesign {
            names: part.component_names(),
            q,
            z,
            codes,
            n_groups,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> ModelFrame {
        let mut f = ModelFrame::new();
        f.add_binary("y", &[true, false, true, false])
            .unwrap()
            .add_factor("a", "hi", "lo", &["hi", "hi", "lo", "lo"])
            .unwrap()
            .add_factor("b", "p", "q", &["p", "q", "p", "q"])
            .unwrap()
            .add_group("g", &["v2", "v1", "v2", "v1"])
            .unwrap();
        f
    }

    #[test]
    fn centered_coding_and_interactions() {
        let f = frame();
        let spec = ModelSpec::parse("y ~ a*b").unwrap();
        let (x, names) = f.fixed_design(&spec).unwrap();
        assert_eq!(names, vec!["(Intercept)", "a", "b", "a:b"]);
        assert_eq!(x.column(1).as_slice(), &[0.5, 0.5, -0.5, -0.5]);
        assert_eq!(x.column(3).as_slice(), &[0.25, -0.25, -0.25, 0.25]);
        for c in 1..4 {
            assert_eq!(x.column(c).sum(), 0.0);
        }
    }

    #[test]
    fn random_design_layout() {
        let f = frame();
        let spec = ModelSpec::parse("y ~ a + (1 + b | g)").unwrap();
        let r = f.random_design(&spec).unwrap().unwrap();
        assert_eq!(r.q, 2);
        assert_eq!(r.n_groups, 2);
        assert_eq!(r.codes, vec![1, 0, 1, 0]);
        assert_eq!(&r.z[..4], &[1.0, 0.5, 1.0, -0.5]);
    }

    #[test]
    fn subsetting_drops_unused_groups() {
        let f = frame();
        let mask = f.level_mask("g", "v2").unwrap();
        let s = f.subset(&mask).unwrap();
        assert_eq!(s.len(), 2);
        match s.column("g").unwrap() {
            Column::Group { levels, codes } => {
                assert_eq!(levels, &vec!["v2".to_string()]);
                assert_eq!(codes, &vec![0, 0]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn errors() {
        let f = frame();
        assert!(f.fixed_design(&ModelSpec::parse("y ~ zz").unwrap()).is_err());
        assert!(f.fixed_design(&ModelSpec::parse("y ~ g").unwrap()).is_err());
        let mut f2 = ModelFrame::new();
        f2.add_numeric("y", vec![0.0, 1.0]).unwrap();
        assert!(f2.add_numeric("x", vec![1.0]).is_err());
        assert!(f2.add_factor("c", "a", "b", &["a", "z"]).is_err());
    }
}
