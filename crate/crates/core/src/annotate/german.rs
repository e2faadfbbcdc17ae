//! Closed word classes of German used by the rules. All entries lowercase.

use std::collections::HashSet;
use std::sync::LazyLock;

fn set(words: &[&'static str]) -> HashSet<&'static str> {
    words.iter().copied().collect()
}

/// Finite auxiliaries, modals and frequent irregular verb forms (singular).
const FINITE_SINGULAR: &[&str] = &[
    "ist", "war", "wird", "wurde", "hat", "hatte", "kann", "konnte", "muss", "musste", "will",
    "wollte", "soll", "sollte", "darf", "durfte", "mag", "mochte", "möchte", "könnte", "müsste",
    "würde", "wäre", "hätte", "dürfte", "sei", "habe", "werde", "bin", "bist", "hast", "hattest",
    "warst", "wirst", "kannst", "musst", "willst", "sollst", "weiß", "wusste", "tut", "tat",
    "gibt", "nimmt", "sieht", "liest", "hilft", "spricht", "trifft", "isst", "fährt", "läuft",
    "hält", "lässt", "fällt", "schläft", "trägt", "wächst", "gefällt", "missfällt", "vergisst",
    "gilt", "stirbt", "wirft", "bricht", "vergaß", "ging", "kam", "sah", "gab", "nahm", "fand",
    "sprach", "stand", "saß", "lag", "hielt", "ließ", "fiel", "lief", "rief", "blieb", "schrieb",
    "trug", "zog", "bat", "half", "traf", "las", "aß", "trank", "sang", "schlief", "dachte",
    "brachte", "kannte", "nannte", "rannte", "verlor", "gewann", "begann", "verstand", "bekam",
    "schien", "bot", "flog", "fuhr", "wuchs", "schwieg", "litt", "stieg", "warf", "starb",
    "sprang", "erschien", "entschied", "verließ", "hing", "hieß", "schlug", "erfuhr", "vergab",
    "floh", "glich", "stahl", "verschwand", "gefiel", "missfiel", "betrog", "zwang", "befahl",
    "empfahl", "verbot", "versprach", "beschloss", "genoss", "schoss", "schloss", "lud", "wies",
    "bewies", "galt", "tat", "lachte", "weinte", "gewann", "verriet", "benahm", "unterbrach",
    "widersprach", "beschrieb", "erhielt", "behielt", "enthielt", "vertraute", "verband",
    "wirkte", "lud", "strahlte", "sang", "brach", "zerbrach", "bestand", "gestand", "entstand",
    "erkannte", "gelang", "misslang", "rang", "sank", "trat", "vertrat", "betrat", "riet",
    "verriet", "schuf", "rief", "roch", "kroch", "schwamm", "log", "sog", "wog", "verzieh",
    "lieh", "mied", "wich", "schrie", "stritt", "griff", "biss", "riss", "sah",
];

/// Strong past stems that combine with a separable or inseparable prefix
/// (`einlud`, `aufgab`, `ansprach`).
const PREFIXABLE_PAST: &[&str] = &[
    "ging", "kam", "sah", "gab", "nahm", "fand", "sprach", "stand", "hielt", "ließ", "fiel",
    "lief", "rief", "blieb", "schrieb", "trug", "zog", "bat", "half", "traf", "las", "sang",
    "brach", "trat", "lud", "wies", "schlug", "fuhr", "flog", "stieg", "warf", "sprang", "schloss",
    "schoss", "bot", "bog", "hing", "lag", "saß", "schien", "schwieg", "riet", "griff", "riss",
    "wich", "zwang", "hob", "dachte", "brachte", "tat",
];

const VERB_PREFIXES: &[&str] = &[
    "zurück", "zusammen", "heraus", "herein", "hinaus", "wieder", "durch", "unter", "über",
    "fest", "nach", "weg", "auf", "aus", "bei", "ein", "mit", "vor", "her", "hin", "los", "ab",
    "an", "um", "zu", "ver", "ent", "zer", "be", "er",
];

/// `einlud` = `ein` + `lud`.
pub fn is_prefixed_past(lower: &str) -> bool {
    VERB_PREFIXES.iter().any(|p| {
        lower
            .strip_prefix(p)
            .is_some_and(|rest| PREFIXABLE_PAST.contains(&rest))
    })
}

/// Plural finite forms not derivable by adding -(e)n to the singular.
const FINITE_PLURAL_EXTRA: &[&str] = &[
    "sind", "seien", "haben", "hatten", "werden", "wurden", "können", "müssen", "wollen",
    "sollen", "dürfen", "mögen", "möchten", "wissen", "seid", "habt", "tun", "gibt",
];

pub static FINITE_SG: LazyLock<HashSet<&'static str>> = LazyLock::new(|| set(FINITE_SINGULAR));

pub static FINITE_PL: LazyLock<HashSet<String>> = LazyLock::new(|| {
    let mut s: HashSet<String> = FINITE_PLURAL_EXTRA
        .iter()
        .filter(|w| **w != "gibt")
        .map(|w| w.to_string())
        .collect();
    for w in FINITE_SINGULAR {
        let past_like = !w.ends_with('t') || w.ends_with("te") || ["hat", "tat"].contains(w);
        if !past_like {
            continue;
        }
        if w.ends_with('e') {
            s.insert(format!("{w}n"));
        } else {
            s.insert(format!("{w}en"));
        }
    }
    for w in ["waren", "konnten", "mussten", "wollten", "sollten", "durften", "mochten", "könnten",
        "müssten", "würden", "wären", "hätten", "dürften", "wussten", "taten", "gingen", "kamen"] {
        s.insert(w.to_string());
    }
    s.remove("haten");
    s
});

/// Lowercase words with verb-like endings that are never finite verbs.
pub static NOT_FINITE: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "nicht", "jetzt", "selbst", "erst", "sonst", "meist", "meistens", "fast", "weit", "gut",
        "laut", "oft", "bereit", "bereits", "zuerst", "zuletzt", "längst", "einst", "nachts",
        "rechts", "links", "leicht", "recht", "schlecht", "sanft", "heute", "gestern", "morgen",
        "gerne", "gern", "immer", "schon", "sehr", "eben", "oben", "unten", "neben", "wegen",
        "seinen", "ihren", "einen", "keinen", "meinen", "deinen", "unseren", "euren", "diesen",
        "jenen", "allen", "vielen", "anderen", "beiden", "denen", "ihnen", "mit", "seit", "bis",
        "dort", "hier", "weiter", "mehr", "nett", "nette", "netten", "echt", "bekannt", "bunt",
        "stolz", "tot", "kalt", "alt", "breit", "hart", "zart", "spät", "satt", "glatt", "fett",
        "flott", "schnell", "erste", "ersten", "letzte", "letzten", "beste", "besten", "nächste",
        "nächsten", "gute", "guten", "große", "großen", "kleine", "kleinen", "junge", "jungen",
        "alte", "alten", "neue", "neuen", "schöne", "schönen", "kluge", "klugen", "liebe",
        "mutig", "eigenen", "eigene", "selten", "trotzdem", "zusammen", "außen", "innen",
        "vorbei", "entgegen", "zuvor", "danach", "davon", "daran", "darauf", "jemanden",
        "niemanden", "etwas", "nichts", "ganz", "total", "extrem", "besonders", "meisten",
        "wenigsten", "mindestens", "höchstens", "zumindest", "unbedingt", "intelligent",
        "elegant", "charmant", "arrogant", "interessant", "brillant", "tolerant", "kompetent",
        "talentiert", "verliebt", "beliebt", "berühmt", "verrückt", "bestimmt", "begabt",
        "besorgt", "verletzt", "erschöpft", "verheiratet", "beeindruckt", "begeistert",
        "enttäuscht", "überrascht", "verärgert", "fasziniert", "gelangweilt", "verwirrt",
        "geschockt", "irritiert", "genervt", "gekränkt", "verunsichert", "interessiert",
        "gestresst", "gereizt", "erstaunt", "entsetzt", "verblüfft", "amüsiert", "inspiriert",
        "beunruhigt", "erfreut", "erleichtert", "verzweifelt", "aufgeregt", "entspannt",
        "verwöhnt", "gebildet", "gebräunt", "gepflegt", "bekannten", "verliebten", "einzigen",
        "ebenso", "außerdem", "zwischen", "hinten", "vorne", "innerhalb", "außerhalb", "selbstbewusst",
        "bewusst", "unbewusst", "wunderbar", "modern", "offen", "trocken", "eigen", "golden",
        "wollen", "sollen", "wissen",
    ])
});

/// Nominative personal pronouns that can start a clause as its subject.
pub static SUBJECT_WORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&["er", "sie", "es", "ich", "du", "wir", "man", "jemand", "niemand", "dieser", "diese", "der", "die", "das"])
});

/// Pronouns that are never nominative subjects here; skipped during the scan.
pub static OBLIQUE_PRONOUNS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "ihn", "ihm", "ihr", "ihnen", "sich", "mich", "dich", "mir", "dir", "uns", "euch",
        "einander", "selbst", "selber",
    ])
});

/// Pronoun-like words taken as the start of a subject that refers to neither
/// prompt referent.
pub static NON_REFERENT_SUBJECTS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "es", "man", "jemand", "niemand", "das", "dies", "was", "nichts", "etwas", "alles",
        "alle", "viele", "einige", "keiner", "keine", "jeder", "jede", "jedes", "mancher",
        "einer", "eine", "eines",
    ])
});

/// Indefinite pronouns that stand alone, never as determiners.
pub static INDEFINITE_PRONOUNS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| set(&["alles", "nichts", "etwas", "was", "dies", "man", "jemand", "niemand"]));

/// First and second person pronouns: speech-act participants, never a prompt referent.
pub static PARTICIPANT_PRONOUNS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| set(&["ich", "du", "wir"]));

/// Determiners that open a noun phrase which may be the subject.
pub static NOMINATIVE_DETERMINERS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "ein", "eine", "der", "die", "das", "kein", "keine", "mein", "meine", "dein", "deine",
        "sein", "seine", "ihre", "unser", "unsere", "euer", "eure", "jeder", "jede", "jedes",
        "alle", "viele", "manche", "einige", "welche", "solche", "jener", "jene", "dieses",
    ])
});

/// Determiners that can only open an object or genitive noun phrase.
pub static OBLIQUE_DETERMINERS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "einen", "einem", "einer", "eines", "den", "dem", "des", "keinen", "keinem", "keiner",
        "meinen", "meinem", "meiner", "deinen", "deinem", "seinen", "seinem", "seiner",
        "seines", "ihren", "ihrem", "ihrer", "ihres", "unseren", "unserem", "unserer",
        "diesen", "diesem", "dieses", "jeden", "jedem", "allen", "vielen", "deren", "dessen",
    ])
});

pub static PREPOSITIONS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "mit", "von", "zu", "für", "über", "auf", "an", "in", "bei", "nach", "aus", "ohne", "um",
        "gegen", "durch", "unter", "vor", "hinter", "neben", "zwischen", "trotz", "wegen", "seit",
        "am", "im", "zum", "zur", "vom", "beim", "ins", "ans", "aufs", "fürs", "gegenüber",
        "während", "statt", "außer",
    ])
});

/// Adverbs, particles and intensifiers that may precede the subject or sit
/// between a determiner and its adjective.
pub static ADVERBS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "sehr", "so", "ganz", "wirklich", "besonders", "äußerst", "ziemlich", "recht", "total",
        "extrem", "unglaublich", "immer", "schon", "noch", "auch", "nur", "einfach", "eben",
        "gerade", "endlich", "oft", "nie", "niemals", "selten", "manchmal", "wieder", "dann",
        "da", "damals", "jetzt", "heute", "gestern", "bald", "sofort", "plötzlich", "zuerst",
        "später", "danach", "deshalb", "daher", "darum", "deswegen", "trotzdem", "also",
        "jedoch", "doch", "ja", "wohl", "halt", "eigentlich", "offenbar", "offensichtlich",
        "vielleicht", "sicher", "natürlich", "tatsächlich", "gar", "nicht", "kaum", "fast",
        "stets", "sogar", "bereits", "erst", "hier", "dort", "gern", "gerne", "lieber", "mehr",
        "weniger", "viel", "wenig", "sonst", "allerdings", "nämlich", "zudem", "außerdem",
        "ebenfalls", "gleich", "genau", "eher", "lange", "kurz", "heimlich", "insgeheim",
    ])
});

/// Coordinators after which a verb counts as clause-final.
pub static COORDINATORS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| set(&["und", "oder", "aber", "sondern", "denn", "doch"]));

/// Connectives that open a verb-final clause. Other connectives keep main
/// clause order.
pub static SUBORDINATORS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "weil", "da", "nachdem", "indem", "zumal", "sodass", "so dass", "obwohl", "obgleich",
        "als", "wenn", "bevor", "sobald", "seit", "seitdem", "bis", "während", "wobei", "ob",
        "damit", "als ob", "wie", "dass",
    ])
});

/// Words that quantify over both referents when used as a subject.
pub static BOTH_WORDS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| set(&["beide", "beiden", "alle"]));

/// Relative pronouns (masculine/feminine, all cases).
pub static RELATIVE_PRONOUNS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    set(&[
        "der", "die", "dem", "den", "deren", "dessen", "denen", "welcher", "welche", "welchem",
        "welchen",
    ])
});

/// Adjective inflection endings.
pub fn has_adjective_ending(lower: &str) -> bool {
    ["e", "en", "er", "es", "em"].iter().any(|s| lower.ends_with(s))
}

#[cfg(test)]
fn is_plural_finite(lower: &str) -> bool {
    FINITE_PL.contains(lower)
}
