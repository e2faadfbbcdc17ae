use serde::{Deserialize, Serialize};

use super::{AnaphorForm, AnnotationRecord, ClauseType, CorefTarget, RelationLabel};
use crate::design::Experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExclusionReason {
    Unparseable,
    BothNeither,
    NoAnaphor,
    RelativeClause,
    MainNoConnective,
    ImplicitRelation,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::Unparseable => "Unparseable",
            ExclusionReason::BothNeither => "BothNeither",
            ExclusionReason::NoAnaphor => "NoAnaphor",
            ExclusionReason::RelativeClause => "RelativeClause",
            ExclusionReason::MainNoConnective => "MainNoConnective",
            ExclusionReason::ImplicitRelation => "ImplicitRelation",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub included: Vec<AnnotationRecord>,
    pub excluded: Vec<(AnnotationRecord, ExclusionReason)>,
}

impl Selection {
    pub fn excluded_fraction(&self) -> f64 {
        let n = self.included.len() + self.excluded.len();
        if n == 0 {
            0.0
        } else {
            self.excluded.len() as f64 / n as f64
        }
    }
}

/// Why `record` is left out of the analysis of `experiment`, if it is.
pub fn exclusion_reason(record: &AnnotationRecord, experiment: Experiment) -> Option<ExclusionReason> {
    if !record.parseable {
        return Some(ExclusionReason::Unparseable);
    }
    if experiment == Experiment::E2 {
        return match (record.clause_type, record.relation) {
            (ClauseType::Relative, _) => Some(ExclusionReason::RelativeClause),
            (ClauseType::Main, RelationLabel::None) => Some(ExclusionReason::MainNoConnective),
            (_, RelationLabel::None) => Some(ExclusionReason::ImplicitRelation),
            _ => None,
        };
    }
    match record.coref_target {
        CorefTarget::NoAnaphor => return Some(ExclusionReason::NoAnaphor),
        CorefTarget::Both | CorefTarget::Neither => return Some(ExclusionReason::BothNeither),
        CorefTarget::Subject | CorefTarget::Object => {}
    }
    if experiment.is_forced_reference()
        && !matches!(
            record.anaphor_form,
            AnaphorForm::PersonalPronoun | AnaphorForm::Demonstrative | AnaphorForm::ProperName
        )
    {
        return Some(ExclusionReason::BothNeither);
    }
    None
}

pub fn select_for_analysis(records: &[AnnotationRecord], experiment: Experiment) -> Selection {
    let mut out = Selection::default();
    for r in records {
        match exclusion_reason(r, experiment) {
            None => out.included.push(r.clone()),
            Some(reason) => out.excluded.push((r.clone(), reason)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::OvsReading;

    fn rec(target: CorefTarget, form: AnaphorForm, relation: RelationLabel, clause: ClauseType) -> AnnotationRecord {
        AnnotationRecord {
            prompt_id: "p".into(),
            rank: 0,
            parseable: clause != ClauseType::Fragment,
            coref_target: target,
            anaphor_form: form,
            relation,
            connective: None,
            clause_type: clause,
            ovs_reading: OvsReading::Unknown,
        }
    }

    #[test]
    fn reasons() {
        use AnaphorForm as F;
        use CorefTarget as T;
        let both = rec(T::Both, F::PersonalPronoun, RelationLabel::Explanation, ClauseType::Subordinate);
        assert_eq!(exclusion_reason(&both, Experiment::E1), Some(ExclusionReason::BothNeither));
        let rel = rec(T::Object, F::Other, RelationLabel::None, ClauseType::Relative);
        assert_eq!(exclusion_reason(&rel, Experiment::E2), Some(ExclusionReason::RelativeClause));
        let main = rec(T::Subject, F::PersonalPronoun, RelationLabel::None, ClauseType::Main);
        assert_eq!(exclusion_reason(&main, Experiment::E2), Some(ExclusionReason::MainNoConnective));
        let frag = rec(T::NoAnaphor, F::NoAnaphor, RelationLabel::None, ClauseType::Fragment);
        assert_eq!(exclusion_reason(&frag, Experiment::E3), Some(ExclusionReason::Unparseable));
        let none = rec(T::NoAnaphor, F::NoAnaphor, RelationLabel::Consequence, ClauseType::Subordinate);
        assert_eq!(exclusion_reason(&none, Experiment::E4), Some(ExclusionReason::NoAnaphor));
        let ok = rec(T::Subject, F::Demonstrative, RelationLabel::Consequence, ClauseType::Subordinate);
        assert_eq!(exclusion_reason(&ok, Experiment::E4), None);
        let other = rec(T::Subject, F::Other, RelationLabel::Consequence, ClauseType::Subordinate);
        assert_eq!(exclusion_reason(&other, Experiment::E4), Some(ExclusionReason::BothNeither));
        assert_eq!(exclusion_reason(&other, Experiment::E1), None);
        let s = select_for_analysis(&[both, ok.clone()], Experiment::E1);
        assert_eq!(s.included, vec![ok]);
        assert_eq!(s.excluded_fraction(), 0.5);
    }
}
