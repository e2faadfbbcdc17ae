//! A small model-formula language:
//!
//! ```text
//! subject ~ verb_class*bias_type + gender_order + (1 + gender_order*bias_type | verb)
//! ```
//!
//! `a*b` expands to `a + b + a:b`, `1`/`0` toggle the intercept, and one
//! parenthesised `(... | group)` part declares uncorrelated random effects.

use std::fmt;

use crate::error::{Error, Result};

/// A main effect or an interaction of several factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term(pub Vec<String>);

impl Term {
    pub fn name(&self) -> String {
        self.0.join(":")
    }

    pub fn is_interaction(&self) -> bool {
        self.0.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomPart {
    pub group: String,
    pub intercept: bool,
    pub slopes: Vec<Term>,
}

impl RandomPart {
    pub fn component_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.intercept {
            names.push(format!("{}:{}", self.group, super::INTERCEPT));
        }
        names.extend(self.slopes.iter().map(|t| format!("{}:{}", self.group, t.name())));
        names
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub response: String,
    pub intercept: bool,
    pub fixed: Vec<Term>,
    pub random: Option<RandomPart>,
}

impl ModelSpec {
    pub fn parse(formula: &str) -> Result<Self> {
        let (lhs, rhs) = formula
            .split_once('~')
            .ok_or_else(|| Error::Formula(format!("missing `~` in `{formula}`")))?;
        let response = lhs.trim();
        if !is_identifier(response) {
            return Err(Error::Formula(format!("bad response `{response}`")));
        }
        let mut intercept = true;
        let mut fixed = Vec::new();
        let mut random = None;
        for piece in split_top_level(rhs)? {
            if let Some(inner) = piece.strip_prefix('(').and_then(|p| p.strip_suffix(')')) {
                if random.is_some() {
                    return Err(Error::Formula("only one random-effects part is supported".into()));
                }
                let (terms, group) = inner
                    .split_once('|')
                    .ok_or_else(|| Error::Formula(format!("random part `{piece}` lacks `|`")))?;
                let group = group.trim();
                if !is_identifier(group) {
                    return Err(Error::Formula(format!("bad grouping factor `{group}`")));
                }
                let mut r_intercept = true;
                let mut slopes = Vec::new();
                for t in terms.split('+').map(str::trim) {
                    parse_piece(t, &mut r_intercept, &mut slopes)?;
                }
                check_hierarchy(&slopes)?;
                slopes.sort_by_key(|t| t.0.len());
                random = Some(RandomPart {
                    group: group.to_string(),
                    intercept: r_intercept,
                    slopes,
                });
            } else {
                parse_piece(&piece, &mut intercept, &mut fixed)?;
            }
        }
        check_hierarchy(&fixed)?;
        fixed.sort_by_key(|t| t.0.len());
        if let Some(r) = &random {
            if !r.intercept && r.slopes.is_empty() {
                return Err(Error::Formula("empty random-effects part".into()));
            }
        }
        Ok(ModelSpec {
            response: response.to_string(),
            intercept,
            fixed,
            random,
        })
    }

    /// Coefficient names in design-matrix column order.
    pub fn coefficient_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.fixed.len() + 1);
        if self.intercept {
            names.push(super::INTERCEPT.to_string());
        }
        names.extend(self.fixed.iter().map(Term::name));
        names
    }

    pub fn variance_names(&self) -> Vec<String> {
        self.random.as_ref().map(RandomPart::component_names).unwrap_or_default()
    }
}

fn render_terms(intercept: bool, terms: &[Term]) -> String {
    let mut parts = vec![if intercept { "1".to_string() } else { "0".to_string() }];
    parts.extend(terms.iter().map(Term::name));
    parts.join(" + ")
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ {}", self.response, render_terms(self.intercept, &self.fixed))?;
        if let Some(r) = &self.random {
            write!(f, " + ({} | {})", render_terms(r.intercept, &r.slopes), r.group)?;
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '.')
        && !s.chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn split_top_level(rhs: &str) -> Result<Vec<String>> {
    let mut pieces = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in rhs.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Formula("unbalanced parentheses".into()));
        }
        if c == '+' && depth == 0 {
            pieces.push(current.trim().to_string());
            current.clear();
        } else {
            current.push(c);
        }
    }
    if depth != 0 {
        return Err(Error::Formula("unbalanced parentheses".into()));
    }
    pieces.push(current.trim().to_string());
    if pieces.iter().any(String::is_empty) {
        return Err(Error::Formula(format!("empty term in `{rhs}`")));
    }
    Ok(pieces)
}

fn parse_piece(piece: &str, intercept: &mut bool, terms: &mut Vec<Term>) -> Result<()> {
    match piece {
        "1" => *intercept = true,
        "0" | "-1" => *intercept = false,
        "" => return Err(Error::Formula("empty term".into())),
        _ => {
            for term in expand_product(piece)? {
                if !terms.contains(&term) {
                    terms.push(term);
                }
            }
        }
    }
    Ok(())
}

/// `a*b:c` → every non-empty product of the `*`-separated factors, smaller
/// products first.
fn expand_product(piece: &str) -> Result<Vec<Term>> {
    let factors: Vec<Vec<String>> = piece
        .split('*')
        .map(|f| {
            f.split(':')
                .map(|s| {
                    let s = s.trim();
                    if is_identifier(s) {
                        Ok(s.to_string())
                    } else {
                        Err(Error::Formula(format!("bad term `{s}` in `{piece}`")))
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let k = factors.len();
    if k > 16 {
        return Err(Error::Formula("too many crossed factors".into()));
    }
    let mut subsets: Vec<u32> = (1..(1u32 << k)).collect();
    subsets.sort_by_key(|m| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
    Ok(subsets
        .into_iter()
        .map(|mask| {
            let mut parts = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    for p in f {
                        if !parts.contains(p) {
                            parts.push(p.clone());
                        }
                    }
                }
            }
            Term(parts)
        })
        .collect())
}

fn check_hierarchy(terms: &[Term]) -> Result<()> {
    for t in terms.iter().filter(|t| t.is_interaction()) {
        for factor in &t.0 {
            if !terms.iter().any(|m| m.0.len() == 1 && &m.0[0] == factor) {
                return Err(Error::Formula(format!(
                    "interaction `{}` uses `{factor}` without its main effect",
                    t.name()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_crossing() {
        let s = ModelSpec::parse(
            "subject ~ verb_class*bias_type + gender_order + (1 + gender_order*bias_type | verb)",
        )
        .unwrap();
        assert_eq!(
            s.coefficient_names(),
            vec!["(Intercept)", "verb_class", "bias_type", "gender_order", "verb_class:bias_type"]
        );
        assert_eq!(
            s.variance_names(),
            vec![
                "verb:(Intercept)",
                "verb:gender_order",
                "verb:bias_type",
                "verb:gender_order:bias_type"
            ]
        );
    }

    #[test]
    fn intercept_toggles() {
        let s = ModelSpec::parse("y ~ 0 + (1 | g)").unwrap();
        assert!(!s.intercept);
        assert!(s.fixed.is_empty());
        assert_eq!(s.coefficient_names(), Vec::<String>::new());
        let s = ModelSpec::parse("y ~ 1").unwrap();
        assert!(s.intercept && s.random.is_none());
    }

    #[test]
    fn roundtrips_through_display() {
        for f in [
            "y ~ a*b + c + (1 + c | g)",
            "y ~ 0 + (0 + a | g)",
            "y ~ a + b + a:b",
        ] {
            let s = ModelSpec::parse(f).unwrap();
            let again = ModelSpec::parse(&s.to_string()).unwrap();
            assert_eq!(s, again, "{f}");
        }
    }

    #[test]
    fn rejects_orphan_interactions_and_junk() {
        assert!(ModelSpec::parse("y ~ a:b").is_err());
        assert!(ModelSpec::parse("y ~ a + (1 | g) + (1 | h)").is_err());
        assert!(ModelSpec::parse("y a + b").is_err());
        assert!(ModelSpec::parse("y ~ a + ").is_err());
        assert!(ModelSpec::parse("y ~ (a | g").is_err());
    }

    #[test]
    fn triple_crossing_order() {
        let s = ModelSpec::parse("y ~ a*b*c").unwrap();
        let names: Vec<String> = s.fixed.iter().map(Term::name).collect();
        assert_eq!(names, vec!["a", "b", "c", "a:b", "a:c", "b:c", "a:b:c"]);
    }
}
