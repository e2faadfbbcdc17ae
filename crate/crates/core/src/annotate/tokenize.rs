use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Punct,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub position: usize,
    pub kind: TokenKind,
    /// Byte range in the source text.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    pub fn is_capitalized(&self) -> bool {
        self.surface.chars().next().is_some_and(char::is_uppercase)
    }
}

/// Abbreviations that keep their periods.
const ABBREVIATIONS: &[&str] = &[
    "z.B.", "z.b.", "u.a.", "d.h.", "usw.", "bzw.", "etc.", "ca.", "Dr.", "Prof.", "Hr.", "Fr.",
    "Nr.", "St.", "evtl.", "ggf.", "vgl.", "u.U.", "z.T.", "o.ä.",
];

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

/// Splits on whitespace and punctuation. Token byte ranges never overlap and
/// the text between them is whitespace only, so the input can be rebuilt.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut push = |start: usize, end: usize, kind: TokenKind| {
        let surface = &text[start..end];
        tokens.push(Token {
            surface: surface.to_string(),
            lower: surface.to_lowercase(),
            position: 0,
            kind,
            start,
            end,
        });
    };
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |c| c.0);
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if let Some(len) = ABBREVIATIONS
            .iter()
            .filter(|a| text[start..].starts_with(**a))
            .map(|a| a.chars().count())
            .filter(|&len| !chars.get(i + len).is_some_and(|c| c.1.is_alphanumeric()))
            .max()
        {
            if i == 0 || !chars[i - 1].1.is_alphanumeric() {
                push(start, byte_at(i + len), TokenKind::Word);
                i += len;
                continue;
            }
        }
        if c.is_ascii_digit() {
            let mut j = i + 1;
            while j < chars.len() {
                let d = chars[j].1;
                let joins = (d == '.' || d == ',')
                    && chars.get(j + 1).is_some_and(|n| n.1.is_ascii_digit());
                if d.is_ascii_digit() || joins {
                    j += 1;
                } else {
                    break;
                }
            }
            push(start, byte_at(j), TokenKind::Number);
            i = j;
            continue;
        }
        if is_apostrophe(c) && chars.get(i + 1).is_some_and(|n| n.1.is_alphabetic()) && i > 0 && chars[i - 1].1.is_alphabetic() {
            // clitic, as in geht's
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_alphabetic() {
                j += 1;
            }
            push(start, byte_at(j), TokenKind::Word);
            i = j;
            continue;
        }
        if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < chars.len() {
                let d = chars[j].1;
                let hyphen_inside = d == '-' && chars.get(j + 1).is_some_and(|n| n.1.is_alphanumeric());
                if d.is_alphanumeric() || hyphen_inside {
                    j += 1;
                } else {
                    break;
                }
            }
            push(start, byte_at(j), TokenKind::Word);
            i = j;
            continue;
        }
        push(start, byte_at(i + 1), TokenKind::Punct);
        i += 1;
    }
    for (pos, t) in tokens.iter_mut().enumerate() {
        t.position = pos;
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn basic_split() {
        assert_eq!(surfaces("sie war klug."), vec!["sie", "war", "klug", "."]);
        assert!(tokenize("").is_empty());
        assert_eq!(surfaces("und zwar sehr"), vec!["und", "zwar", "sehr"]);
    }

    #[test]
    fn clitics_abbreviations_numbers() {
        assert_eq!(surfaces("geht's gut?"), vec!["geht", "'s", "gut", "?"]);
        assert_eq!(surfaces("z.B. Dr. Müller"), vec!["z.B.", "Dr.", "Müller"]);
        assert_eq!(surfaces("er war 3,5 Jahre"), vec!["er", "war", "3,5", "Jahre"]);
        assert_eq!(surfaces("\"Nein\", sagte sie"), vec!["\"", "Nein", "\"", ",", "sagte", "sie"]);
        assert_eq!(surfaces("E-Mail-Adresse."), vec!["E-Mail-Adresse", "."]);
        assert_eq!(surfaces("klug.Sie"), vec!["klug", ".", "Sie"]);
    }

    #[test]
    fn kinds_and_positions() {
        let t = tokenize("sie kam um 5.");
        assert_eq!(t[3].kind, TokenKind::Number);
        assert_eq!(t[4].kind, TokenKind::Punct);
        assert!(t.iter().enumerate().all(|(i, t)| t.position == i));
        assert_eq!(t[0].lower, "sie");
    }
}
