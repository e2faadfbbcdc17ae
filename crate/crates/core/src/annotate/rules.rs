use std::collections::HashSet;

use super::german::*;
use super::lexicon::{ConnectiveLexicon, RelationLabel};
use super::tokenize::{tokenize, Token, TokenKind};
use super::{AnaphorForm, ClauseType, CorefTarget, GenderContext};
use crate::design::{Experiment, Gender, PromptRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbOrder {
    /// Finite verb at the end of the clause (subordinate, relative).
    Final,
    /// Finite verb in second position (main clause).
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Singular,
    Plural,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseAnalysis {
    pub parseable: bool,
    pub clause_type: ClauseType,
    pub order: VerbOrder,
    /// First token after a clause-initial connective.
    pub body_start: usize,
    /// Connective surface and token length when the clause opens with one.
    pub connective: Option<(String, usize)>,
    pub verb: Option<(usize, Agreement)>,
    pub sentence_end: usize,
}

fn is_boundary(t: Option<&Token>) -> bool {
    match t {
        None => true,
        Some(t) => t.kind == TokenKind::Punct && t.surface != "\"" && t.surface != "'" && t.surface != "„" && t.surface != "“",
    }
}

fn is_sentence_end(t: &Token) -> bool {
    t.kind == TokenKind::Punct && matches!(t.surface.as_str(), "." | "!" | "?" | ";")
}

fn sentence_end(tokens: &[Token]) -> usize {
    tokens.iter().position(is_sentence_end).unwrap_or(tokens.len())
}

fn clause_final(tokens: &[Token], i: usize) -> bool {
    let next = tokens.get(i + 1);
    is_boundary(next)
        || next.is_some_and(|n| COORDINATORS.contains(n.lower.as_str()) || SUBORDINATORS.contains(n.lower.as_str()))
}

fn is_name(t: &Token, ctx: &GenderContext) -> bool {
    ctx.name_target(&t.surface).is_some()
}

fn is_auxiliary(t: Option<&Token>) -> bool {
    t.is_some_and(|t| !t.is_capitalized() && (FINITE_SG.contains(t.lower.as_str()) || FINITE_PL.contains(&t.lower)))
}

fn after_determiner(tokens: &[Token], i: usize) -> bool {
    let Some(prev) = i.checked_sub(1).map(|p| &tokens[p]) else {
        return false;
    };
    let p = prev.lower.as_str();
    if PREPOSITIONS.contains(p) || OBLIQUE_DETERMINERS.contains(p) {
        return true;
    }
    // der/die/das followed by a noun within two tokens makes this an adjective
    NOMINATIVE_DETERMINERS.contains(p)
        && tokens[i + 1..].iter().take(2).any(|t| t.is_word() && t.is_capitalized())
}

fn suffix_agreement(lower: &str) -> Option<Agreement> {
    let n = lower.chars().count();
    if n < 4 {
        return None;
    }
    if lower.ends_with("ten") {
        Some(Agreement::Plural)
    } else if lower.ends_with("te") {
        Some(Agreement::Singular)
    } else if lower.ends_with("test") || lower.ends_with("tet") {
        Some(Agreement::Unknown)
    } else if lower.ends_with("en") {
        Some(Agreement::Plural)
    } else if lower.ends_with("st") {
        Some(Agreement::Unknown)
    } else if lower.ends_with('t') {
        if lower.ends_with("ant") || lower.ends_with("ent") || (lower.starts_with("ge") && n > 5) {
            None
        } else {
            Some(Agreement::Singular)
        }
    } else {
        None
    }
}

/// Whether token `i` is a finite verb, judged from closed lists, suffixes
/// and the neighbouring tokens. Errs toward "no".
pub fn finite_verb(tokens: &[Token], i: usize, order: VerbOrder, ctx: &GenderContext) -> Option<Agreement> {
    let t = tokens.get(i)?;
    if !t.is_word() || t.is_capitalized() {
        return None;
    }
    let lower = t.lower.as_str();
    let prev = i.checked_sub(1).map(|p| &tokens[p]);
    if prev.is_some_and(|p| p.lower == "zu") {
        return None;
    }
    let followed_by_aux = is_auxiliary(tokens.get(i + 1));
    if FINITE_SG.contains(lower) {
        return Some(Agreement::Singular);
    }
    if FINITE_PL.contains(lower) {
        return (!followed_by_aux).then_some(Agreement::Plural);
    }
    if NOT_FINITE.contains(lower) || followed_by_aux || after_determiner(tokens, i) {
        return None;
    }
    let agreement = match suffix_agreement(lower) {
        Some(a) => a,
        None if is_prefixed_past(lower) => Agreement::Singular,
        None => return None,
    };
    let final_cue = clause_final(tokens, i);
    let plural_word_before = prev.is_some_and(|p| matches!(p.lower.as_str(), "sie" | "wir" | "beide" | "alle"));
    if lower.ends_with("en") && !lower.ends_with("ten") {
        return (final_cue || (order == VerbOrder::Second && plural_word_before)).then_some(agreement);
    }
    let cue = match order {
        VerbOrder::Final => final_cue,
        VerbOrder::Second => {
            final_cue
                || prev.is_some_and(|p| {
                    SUBJECT_WORDS.contains(p.lower.as_str())
                        || is_name(p, ctx)
                        || (p.is_capitalized() && p.is_word())
                        || (p.position == 0 && ADVERBS.contains(p.lower.as_str()))
                })
        }
    };
    cue.then_some(agreement)
}

fn first_finite(tokens: &[Token], from: usize, to: usize, order: VerbOrder, ctx: &GenderContext) -> Option<(usize, Agreement)> {
    (from..to).find_map(|i| finite_verb(tokens, i, order, ctx).map(|a| (i, a)))
}

/// Start and finite verb of a relative clause opening the continuation.
fn relative_clause(tokens: &[Token], end: usize, ctx: &GenderContext) -> Option<(usize, Agreement)> {
    let mut r = 0;
    if tokens.first().is_some_and(|t| PREPOSITIONS.contains(t.lower.as_str())) {
        r = 1;
    }
    let rel = tokens.get(r)?;
    if !RELATIVE_PRONOUNS.contains(rel.lower.as_str()) {
        return None;
    }
    let next = tokens.get(r + 1)?;
    if next.is_word() && next.is_capitalized() && !is_name(next, ctx) {
        return None;
    }
    if finite_verb(tokens, r + 1, VerbOrder::Second, ctx).is_some() {
        return None;
    }
    let (v, a) = first_finite(tokens, r + 1, end, VerbOrder::Final, ctx)?;
    (clause_final(tokens, v) || tokens.get(v + 1).is_some_and(|n| n.surface == ",")).then_some((v, a))
}

/// Clause structure of a continuation. Prompts with a connective govern a
/// verb-final clause; comma prompts are classified from the first tokens.
pub fn analyze_clause(experiment: Experiment, tokens: &[Token], ctx: &GenderContext, lexicon: &ConnectiveLexicon) -> ClauseAnalysis {
    let end = sentence_end(tokens);
    let build = |clause_type, order, body_start, connective, verb: Option<(usize, Agreement)>| ClauseAnalysis {
        parseable: verb.is_some(),
        clause_type: if verb.is_some() { clause_type } else { ClauseType::Fragment },
        order,
        body_start,
        connective,
        verb,
        sentence_end: end,
    };
    if experiment != Experiment::E2 {
        let verb = first_finite(tokens, 0, end, VerbOrder::Final, ctx);
        return build(ClauseType::Subordinate, VerbOrder::Final, 0, None, verb);
    }
    if let Some((entry, n)) = lexicon.longest_match(tokens, 0) {
        let adverbial_da = entry.surface == "da" && finite_verb(tokens, 1, VerbOrder::Second, ctx).is_some();
        if !adverbial_da {
            let order = if SUBORDINATORS.contains(entry.surface.as_str()) { VerbOrder::Final } else { VerbOrder::Second };
            let verb = first_finite(tokens, n, end, order, ctx);
            return build(ClauseType::Subordinate, order, n, Some((entry.surface.clone(), n)), verb);
        }
    }
    if let Some(verb) = relative_clause(tokens, end, ctx) {
        return build(ClauseType::Relative, VerbOrder::Final, 0, None, Some(verb));
    }
    let verb = first_finite(tokens, 0, end, VerbOrder::Second, ctx);
    build(ClauseType::Main, VerbOrder::Second, 0, None, verb)
}

/// Parseability and clause type of `continuation` after `prompt`.
pub fn check_parseable(prompt: &PromptRecord, continuation: &str) -> (bool, ClauseType) {
    let ctx = GenderContext::from_prompt(prompt);
    let a = analyze_clause(prompt.experiment, &tokenize(continuation), &ctx, &ConnectiveLexicon::german());
    (a.parseable, a.clause_type)
}

fn relation_after_verb(tokens: &[Token], clause: &ClauseAnalysis, lexicon: &ConnectiveLexicon) -> Option<(RelationLabel, String)> {
    let (v, _) = clause.verb?;
    let (entry, _) = lexicon.longest_match(tokens, v + 1)?;
    (!entry.clause_initial_only).then(|| (entry.relation, entry.surface.clone()))
}

pub(crate) fn relation_of(tokens: &[Token], clause: &ClauseAnalysis, lexicon: &ConnectiveLexicon) -> (RelationLabel, Option<String>) {
    match clause.clause_type {
        ClauseType::Relative | ClauseType::Fragment => (RelationLabel::None, None),
        ClauseType::Subordinate => match &clause.connective {
            Some((surface, _)) => {
                let relation = lexicon.get(surface).map_or(RelationLabel::None, |e| e.relation);
                (relation, Some(surface.clone()))
            }
            None => (RelationLabel::None, None),
        },
        ClauseType::Main => match relation_after_verb(tokens, clause, lexicon) {
            Some((r, s)) => (r, Some(s)),
            None => (RelationLabel::None, None),
        },
    }
}

/// Relation signalled by a clause-initial connective. Main clauses qualify
/// only through adverbial connectives directly after the finite verb.
pub fn classify_relation(tokens: &[Token], clause_type: ClauseType, lexicon: &ConnectiveLexicon) -> (RelationLabel, Option<String>) {
    match clause_type {
        ClauseType::Relative | ClauseType::Fragment => (RelationLabel::None, None),
        ClauseType::Subordinate => match lexicon.longest_match(tokens, 0) {
            Some((e, _)) => (e.relation, Some(e.surface.clone())),
            None => (RelationLabel::None, None),
        },
        ClauseType::Main => {
            let ctx = GenderContext {
                subject_gender: Gender::Feminine,
                object_gender: Gender::Masculine,
                subject_name: String::new(),
                object_name: String::new(),
            };
            let end = sentence_end(tokens);
            let clause = ClauseAnalysis {
                parseable: true,
                clause_type,
                order: VerbOrder::Second,
                body_start: 0,
                connective: None,
                verb: first_finite(tokens, 0, end, VerbOrder::Second, &ctx),
                sentence_end: end,
            };
            relation_of(tokens, &clause, lexicon)
        }
    }
}

/// First subject referring expression of a verb-final clause, as after
/// `weil`/`sodass`. Returns the target, form and token position.
pub fn find_first_anaphor(tokens: &[Token], ctx: &GenderContext) -> (CorefTarget, AnaphorForm, Option<usize>) {
    let lexicon = ConnectiveLexicon::german();
    let clause = analyze_clause(Experiment::E1, tokens, ctx, &lexicon);
    scan_subject(tokens, &clause, ctx, &HashSet::new())
}

fn gender_of_pronoun(lower: &str) -> Option<Gender> {
    match lower {
        "er" | "dieser" | "jener" | "der" | "welcher" => Some(Gender::Masculine),
        "sie" | "diese" | "jene" | "die" | "welche" => Some(Gender::Feminine),
        _ => None,
    }
}

/// Skips a noun phrase opened by an oblique determiner or preposition.
fn skip_phrase(tokens: &[Token], mut i: usize, end: usize, ctx: &GenderContext) -> usize {
    let start = i;
    while i < end && i < start + 5 {
        let t = &tokens[i];
        if i > start
            && (t.is_capitalized() || is_name(t, ctx) || OBLIQUE_PRONOUNS.contains(t.lower.as_str()) || t.lower == "er" || t.lower == "sie")
        {
            return i + 1;
        }
        if !t.is_word() {
            return i;
        }
        i += 1;
    }
    i
}

/// Whether a noun phrase starts at `i`, skipping intensifiers and adjectives.
fn noun_phrase_at(tokens: &[Token], mut i: usize, ctx: &GenderContext) -> bool {
    for _ in 0..4 {
        let Some(t) = tokens.get(i) else {
            return false;
        };
        if !t.is_word() {
            return false;
        }
        if t.is_capitalized() {
            return !is_name(t, ctx);
        }
        let l = t.lower.as_str();
        let function_word = PREPOSITIONS.contains(l)
            || NOMINATIVE_DETERMINERS.contains(l)
            || OBLIQUE_DETERMINERS.contains(l)
            || NON_REFERENT_SUBJECTS.contains(l)
            || OBLIQUE_PRONOUNS.contains(l);
        if function_word {
            return false;
        }
        let modifier = ADVERBS.contains(l) && !matches!(l, "nicht" | "auch" | "nur" | "schon" | "noch" | "immer" | "nie")
            || (has_adjective_ending(l) && !FINITE_SG.contains(l) && !FINITE_PL.contains(l));
        if !modifier {
            return false;
        }
        i += 1;
    }
    false
}

fn coordinated(tokens: &[Token], i: usize, ctx: &GenderContext) -> bool {
    tokens.get(i + 1).is_some_and(|t| t.lower == "und")
        && tokens
            .get(i + 2)
            .is_some_and(|t| is_name(t, ctx) || matches!(t.lower.as_str(), "er" | "sie" | "ich" | "wir"))
}

/// Subject scan over the window from the clause body to its finite verb.
/// Main-clause order also looks just past the verb for an inverted subject.
pub(crate) fn scan_subject(
    tokens: &[Token],
    clause: &ClauseAnalysis,
    ctx: &GenderContext,
    known_names: &HashSet<String>,
) -> (CorefTarget, AnaphorForm, Option<usize>) {
    let none = (CorefTarget::NoAnaphor, AnaphorForm::NoAnaphor, None);
    let (verb_at, agreement) = match clause.verb {
        Some(v) => v,
        None => (clause.sentence_end, Agreement::Unknown),
    };
    let plural = agreement == Agreement::Plural;

    if clause.clause_type == ClauseType::Relative {
        let r = usize::from(tokens.first().is_some_and(|t| PREPOSITIONS.contains(t.lower.as_str())));
        let rel = tokens[r].lower.as_str();
        if matches!(rel, "der" | "die" | "welcher" | "welche") && r == 0 {
            if plural {
                return (CorefTarget::Both, AnaphorForm::Other, Some(r));
            }
            let g = gender_of_pronoun(rel).expect("relative pronoun has gender");
            return (ctx.target_for(g), AnaphorForm::Other, Some(r));
        }
    }
    let start = match clause.clause_type {
        ClauseType::Relative => usize::from(tokens.first().is_some_and(|t| PREPOSITIONS.contains(t.lower.as_str()))) + 1,
        _ => clause.body_start,
    };

    let mut window: Vec<usize> = (start..verb_at.min(tokens.len())).collect();
    if clause.order == VerbOrder::Second && clause.verb.is_some() {
        let mut j = verb_at + 1;
        while tokens.get(j).is_some_and(|t| OBLIQUE_PRONOUNS.contains(t.lower.as_str())) && j < verb_at + 3 {
            j += 1;
        }
        if j < tokens.len() {
            window.push(j);
        }
    }

    let mut k = 0;
    while k < window.len() {
        let i = window[k];
        k += 1;
        let t = &tokens[i];
        if !t.is_word() {
            if is_sentence_end(t) {
                return none;
            }
            continue;
        }
        let l = t.lower.as_str();
        if let Some(target) = ctx.name_target(&t.surface) {
            if coordinated(tokens, i, ctx) {
                return (CorefTarget::Both, AnaphorForm::ProperName, Some(i));
            }
            return (target, AnaphorForm::ProperName, Some(i));
        }
        if t.is_capitalized() && known_names.contains(&t.surface) {
            return (CorefTarget::Neither, AnaphorForm::Other, Some(i));
        }
        let next = tokens.get(i + 1);
        match l {
            "er" | "sie" if !t.is_capitalized() || i == 0 => {
                if coordinated(tokens, i, ctx) {
                    return (CorefTarget::Both, AnaphorForm::PersonalPronoun, Some(i));
                }
                let both_follows = next.is_some_and(|n| BOTH_WORDS.contains(n.lower.as_str()));
                if l == "sie" && (plural || both_follows) {
                    return (CorefTarget::Both, AnaphorForm::PersonalPronoun, Some(i));
                }
                let g = gender_of_pronoun(l).expect("pronoun has gender");
                return (ctx.target_for(g), AnaphorForm::PersonalPronoun, Some(i));
            }
            "dieser" | "diese" | "jener" | "jene" => {
                if noun_phrase_at(tokens, i + 1, ctx) {
                    return none;
                }
                let both_follows = next.is_some_and(|n| BOTH_WORDS.contains(n.lower.as_str()));
                if matches!(l, "diese" | "jene") && (plural || both_follows) {
                    return (CorefTarget::Both, AnaphorForm::Demonstrative, Some(i));
                }
                let g = gender_of_pronoun(l).expect("demonstrative has gender");
                return (ctx.target_for(g), AnaphorForm::Demonstrative, Some(i));
            }
            "der" | "die" => {
                let demonstrative = match next {
                    None => true,
                    Some(n) => {
                        n.position == verb_at
                            || !n.is_word()
                            || SUBJECT_WORDS.contains(n.lower.as_str()) && !matches!(n.lower.as_str(), "der" | "die" | "das")
                            || OBLIQUE_PRONOUNS.contains(n.lower.as_str())
                            || INDEFINITE_PRONOUNS.contains(n.lower.as_str())
                            || ADVERBS.contains(n.lower.as_str())
                    }
                };
                if !demonstrative {
                    return none;
                }
                if l == "die" && plural {
                    return (CorefTarget::Both, AnaphorForm::Demonstrative, Some(i));
                }
                let g = gender_of_pronoun(l).expect("demonstrative has gender");
                return (ctx.target_for(g), AnaphorForm::Demonstrative, Some(i));
            }
            "ihr" => {
                // possessive before a noun, otherwise a dative pronoun
                if next.is_some_and(|n| n.is_word() && n.is_capitalized() && !is_name(n, ctx)) {
                    return none;
                }
                continue;
            }
            _ => {}
        }
        if BOTH_WORDS.contains(l) {
            return (CorefTarget::Both, AnaphorForm::Other, Some(i));
        }
        if PARTICIPANT_PRONOUNS.contains(l) {
            return (CorefTarget::Neither, AnaphorForm::Other, Some(i));
        }
        if NON_REFERENT_SUBJECTS.contains(l) || NOMINATIVE_DETERMINERS.contains(l) {
            return none;
        }
        if OBLIQUE_PRONOUNS.contains(l) {
            continue;
        }
        if OBLIQUE_DETERMINERS.contains(l) || PREPOSITIONS.contains(l) {
            let after = skip_phrase(tokens, i + 1, verb_at.min(tokens.len()), ctx);
            while k < window.len() && window[k] < after {
                k += 1;
            }
            continue;
        }
        if t.is_capitalized() {
            return none;
        }
    }
    none
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> GenderContext {
        GenderContext {
            subject_gender: Gender::Feminine,
            object_gender: Gender::Masculine,
            subject_name: "Maria".into(),
            object_name: "Peter".into(),
        }
    }

    fn anaphor(text: &str) -> (CorefTarget, AnaphorForm, Option<usize>) {
        find_first_anaphor(&tokenize(text), &ctx())
    }

    fn clause(exp: Experiment, text: &str) -> (bool, ClauseType) {
        let a = analyze_clause(exp, &tokenize(text), &ctx(), &ConnectiveLexicon::german());
        (a.parseable, a.clause_type)
    }

    #[test]
    fn anaphor_examples() {
        assert_eq!(anaphor("sie sehr klug war"), (CorefTarget::Subject, AnaphorForm::PersonalPronoun, Some(0)));
        assert_eq!(anaphor("Peter kluge Leute mochte"), (CorefTarget::Object, AnaphorForm::ProperName, Some(0)));
        assert_eq!(anaphor("diese ihn bat, einen Vortrag zu halten"), (CorefTarget::Subject, AnaphorForm::Demonstrative, Some(0)));
        assert_eq!(anaphor("er ihr leid tat"), (CorefTarget::Object, AnaphorForm::PersonalPronoun, Some(0)));
    }

    #[test]
    fn subject_only() {
        assert_eq!(anaphor("das Buch ihn langweilte").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("es ihm gefiel").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("Blumen schön sind").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("ihn niemand mochte").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("ihr Vater reich war").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("ihm das Lächeln gefiel").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("ihn sie schon lange liebte"), (CorefTarget::Subject, AnaphorForm::PersonalPronoun, Some(1)));
        assert_eq!(anaphor("mit Peter niemand reden wollte").0, CorefTarget::NoAnaphor);
    }

    #[test]
    fn plural_and_coordination() {
        assert_eq!(anaphor("sie sich schon lange kannten").0, CorefTarget::Both);
        assert_eq!(anaphor("sie beide Musik liebten").0, CorefTarget::Both);
        assert_eq!(anaphor("sie sich schon lange kannte").0, CorefTarget::Subject);
        assert_eq!(anaphor("Maria und Peter Freunde waren").0, CorefTarget::Both);
        assert_eq!(anaphor("beide sehr müde waren").0, CorefTarget::Both);
        assert_eq!(anaphor("ich ihn kenne"), (CorefTarget::Neither, AnaphorForm::Other, Some(0)));
    }

    #[test]
    fn der_die_article_vs_demonstrative() {
        assert_eq!(anaphor("der sehr nett war"), (CorefTarget::Object, AnaphorForm::Demonstrative, Some(0)));
        assert_eq!(anaphor("die Musik laut war").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("der alte Mann sie ansah").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("die ihn immer unterstützte"), (CorefTarget::Subject, AnaphorForm::Demonstrative, Some(0)));
        assert_eq!(anaphor("diese Frau schön war").0, CorefTarget::NoAnaphor);
        assert_eq!(anaphor("dieser so charmant war"), (CorefTarget::Object, AnaphorForm::Demonstrative, Some(0)));
    }

    #[test]
    fn clause_types() {
        assert_eq!(clause(Experiment::E1, "sie sehr klug war"), (true, ClauseType::Subordinate));
        assert_eq!(clause(Experiment::E1, "klug"), (false, ClauseType::Fragment));
        assert_eq!(clause(Experiment::E2, "der in ihrer Nähe wohnte"), (true, ClauseType::Relative));
        assert_eq!(clause(Experiment::E2, "die ihn seit Jahren kannte."), (true, ClauseType::Relative));
        assert_eq!(clause(Experiment::E2, "der war sehr nett"), (true, ClauseType::Main));
        assert_eq!(clause(Experiment::E2, "sie mochte ihn"), (true, ClauseType::Main));
        assert_eq!(clause(Experiment::E2, "weil er so charmant war"), (true, ClauseType::Subordinate));
        assert_eq!(clause(Experiment::E2, "da war sie noch jung"), (true, ClauseType::Main));
        assert_eq!(clause(Experiment::E2, "da er sehr gut tanzte"), (true, ClauseType::Subordinate));
        assert_eq!(clause(Experiment::E2, "der Mann mit dem Hut"), (false, ClauseType::Fragment));
        assert_eq!(clause(Experiment::E1, "er sie zum Lachen brachte"), (true, ClauseType::Subordinate));
    }

    #[test]
    fn finite_verbs_by_suffix() {
        let c = ctx();
        let t = tokenize("sie ihn bewunderte");
        assert_eq!(finite_verb(&t, 2, VerbOrder::Final, &c), Some(Agreement::Singular));
        let t = tokenize("sie nette Leute kannte");
        assert_eq!(finite_verb(&t, 1, VerbOrder::Final, &c), None);
        let t = tokenize("sie spielte gut Klavier");
        assert_eq!(finite_verb(&t, 1, VerbOrder::Second, &c), Some(Agreement::Singular));
        let t = tokenize("er sie heiraten wollte");
        assert_eq!(finite_verb(&t, 2, VerbOrder::Final, &c), None);
        assert_eq!(finite_verb(&t, 3, VerbOrder::Final, &c), Some(Agreement::Singular));
        let t = tokenize("sie ihn zu sehen");
        assert_eq!(first_finite(&t, 0, t.len(), VerbOrder::Final, &c), None);
        let t = tokenize("sie ihn liebt.");
        assert_eq!(finite_verb(&t, 2, VerbOrder::Final, &c), Some(Agreement::Singular));
    }

    #[test]
    fn relation_examples() {
        let lex = ConnectiveLexicon::german();
        let r = classify_relation(&tokenize("weil sie klug war"), ClauseType::Subordinate, &lex);
        assert_eq!(r, (RelationLabel::Explanation, Some("weil".into())));
        let r = classify_relation(&tokenize("als sie jung war"), ClauseType::Subordinate, &lex);
        assert_eq!(r, (RelationLabel::Temporal, Some("als".into())));
        let r = classify_relation(&tokenize("sie mochte ihn"), ClauseType::Main, &lex);
        assert_eq!(r, (RelationLabel::None, None));
        let r = classify_relation(&tokenize("sie war jedoch müde"), ClauseType::Main, &lex);
        assert_eq!(r, (RelationLabel::Contrast, Some("jedoch".into())));
        let r = classify_relation(&tokenize("der ihn liebte"), ClauseType::Relative, &lex);
        assert_eq!(r, (RelationLabel::None, None));
        let r = classify_relation(&tokenize("xyzzy foo"), ClauseType::Subordinate, &lex);
        assert_eq!(r, (RelationLabel::None, None));
    }
}
