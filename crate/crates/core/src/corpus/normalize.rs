//! Text normalization shared by the corpus, query and vocabulary stages.

use std::collections::HashSet;
use std::sync::OnceLock;

use unicode_normalization::UnicodeNormalization;

/// Characters that end a sentence or clause.
pub const TERMINATORS: [char; 4] = ['.', ';', '?', '!'];

const DEFAULT_ABBREVIATIONS: &[(&str, &str)] = &[
    ("art.", "articolo"),
    ("artt.", "articoli"),
    ("d.lgs.", "decreto legislativo"),
    ("d.lg.", "decreto legislativo"),
    ("d.l.", "decreto legge"),
    ("d.p.r.", "decreto del presidente della repubblica"),
    ("g.u.", "gazzetta ufficiale"),
    ("c.c.", "codice civile"),
    ("c.p.c.", "codice di procedura civile"),
    ("cod. civ.", "codice civile"),
];

const DEFAULT_MONTHS: &[&str] = &[
    "gennaio",
    "febbraio",
    "marzo",
    "aprile",
    "maggio",
    "giugno",
    "luglio",
    "agosto",
    "settembre",
    "ottobre",
    "novembre",
    "dicembre",
];

/// Configurable text normalizer.
///
/// Output is lowercase ASCII with digits and month names removed, configured
/// abbreviations expanded, and single spaces between tokens. Sentence
/// terminators are kept so the text can still be segmented.
#[derive(Clone, Debug)]
pub struct Normalizer {
    /// `(variant, canonical)` pairs, longest variant first.
    abbreviations: Vec<(String, String)>,
    months: HashSet<String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer::new(
            DEFAULT_ABBREVIATIONS
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string())),
            DEFAULT_MONTHS.iter().map(|m| m.to_string()),
        )
    }
}

impl Normalizer {
    pub fn new(
        abbreviations: impl IntoIterator<Item = (String, String)>,
        months: impl IntoIterator<Item = String>,
    ) -> Self {
        let mut abbreviations: Vec<(String, String)> = abbreviations
            .into_iter()
            .map(|(k, v)| (k.to_lowercase(), v.to_lowercase()))
            .filter(|(k, _)| !k.is_empty())
            .collect();
        abbreviations.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Normalizer {
            abbreviations,
            months: months.into_iter().map(|m| m.to_lowercase()).collect(),
        }
    }

    pub fn normalize(&self, raw: &str) -> String {
        let lowered = raw.to_lowercase();
        let ascii: String = lowered
            .chars()
            .map(fold_punctuation)
            .collect::<String>()
            .nfd()
            .filter(|c| c.is_ascii())
            .filter(|c| !c.is_ascii_digit())
            .map(|c| if c.is_ascii_whitespace() { ' ' } else { c })
            .collect();
        let expanded = self.expand_abbreviations(&ascii);

        let mut out = String::with_capacity(expanded.len());
        for token in expanded.split_whitespace() {
            let core = token.trim_matches(|c: char| !c.is_ascii_alphabetic());
            let kept: String = if !token.chars().any(|c| c.is_ascii_alphabetic()) || self.months.contains(core) {
                // Keep clause boundaries carried by dropped tokens (e.g. "1942.").
                token.chars().filter(|c| TERMINATORS.contains(c)).collect()
            } else {
                token.to_string()
            };
            if kept.is_empty() {
                continue;
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&kept);
        }
        out
    }

    fn expand_abbreviations(&self, text: &str) -> String {
        let bytes = text.as_bytes();
        let mut out = String::with_capacity(text.len() + 16);
        let mut i = 0;
        'scan: while i < bytes.len() {
            let at_boundary = i == 0 || !bytes[i - 1].is_ascii_alphanumeric();
            if at_boundary {
                for (variant, canonical) in &self.abbreviations {
                    let end = i + variant.len();
                    if !text[i..].starts_with(variant.as_str()) {
                        continue;
                    }
                    let needs_right_boundary = variant.as_bytes()[variant.len() - 1].is_ascii_alphanumeric();
                    if needs_right_boundary && end < bytes.len() && bytes[end].is_ascii_alphanumeric() {
                        continue;
                    }
                    out.push_str(canonical);
                    out.push(' ');
                    i = end;
                    continue 'scan;
                }
            }
            out.push(bytes[i] as char);
            i += 1;
        }
        out
    }
}

fn fold_punctuation(c: char) -> char {
    match c {
        '\u{2018}' | '\u{2019}' | '\u{02BC}' | '\u{00B4}' | '`' => '\'',
        '\u{201C}' | '\u{201D}' | '\u{00AB}' | '\u{00BB}' => '"',
        '\u{2013}' | '\u{2014}' => '-',
        '\u{2026}' => '.',
        c if c.is_whitespace() => ' ',
        c => c,
    }
}

fn default_normalizer() -> &'static Normalizer {
    static DEFAULT: OnceLock<Normalizer> = OnceLock::new();
    DEFAULT.get_or_init(Normalizer::default)
}

/// Normalizes text with the default abbreviation map and month list.
pub fn normalize_text(raw: &str) -> String {
    default_normalizer().normalize(raw)
}

/// Word tokens of normalized text: maximal runs of ASCII letters and digits.
/// Apostrophes and punctuation separate tokens, so `"dell'eredita"` yields
/// `["dell", "eredita"]`.
pub fn word_tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn abbreviation_and_number() {
        assert_eq!(normalize_text("Art. 5"), "articolo");
        assert_eq!(
            normalize_text("ai sensi del d.lgs. 196/2003"),
            "ai sensi del decreto legislativo"
        );
        assert_eq!(
            normalize_text("pubblicato in G.U. n. 12"),
            "pubblicato in gazzetta ufficiale n."
        );
        assert_eq!(normalize_text("dell\u{2019}art. 2"), "dell'articolo");
    }

    #[test]
    fn lowercase_and_accents() {
        assert_eq!(normalize_text("ABC"), "abc");
        assert_eq!(normalize_text("proprietà"), "proprieta");
        assert_eq!(normalize_text("PERCHÉ così è"), "perche cosi e");
    }

    #[test]
    fn transliteration_matches_base_letter_table() {
        // Hand-written table of accented letters and their base letters.
        let table = [
            ("àáâãäå", "a"),
            ("èéêë", "e"),
            ("ìíîï", "i"),
            ("òóôõö", "o"),
            ("ùúûü", "u"),
            ("ýÿ", "y"),
            ("ñ", "n"),
            ("ç", "c"),
            ("ÀÁÂÃÄÅ", "a"),
            ("ÈÉÊË", "e"),
            ("ÌÍÎÏ", "i"),
            ("ÒÓÔÕÖ", "o"),
            ("ÙÚÛÜ", "u"),
        ];
        for (accented, base) in table {
            for c in accented.chars() {
                assert_eq!(normalize_text(&c.to_string()), base, "codepoint {c:?}");
            }
        }
    }

    #[test]
    fn dates_removed_terminators_kept() {
        assert_eq!(
            normalize_text("entrato in vigore il 16 marzo 1942. Poi"),
            "entrato in vigore il . poi"
        );
        assert_eq!(normalize_text("  molti   spazi\t\n qui "), "molti spazi qui");
        assert_eq!(normalize_text("€ 100 ©"), "");
        assert_eq!(normalize_text(""), "");
    }

    #[test]
    fn non_boundary_abbreviation_is_left_alone() {
        assert_eq!(normalize_text("part. prima"), "part. prima");
    }

    #[test]
    fn custom_abbreviations() {
        let n = Normalizer::new(
            vec![("cfr.".to_string(), "confronta".to_string())],
            Vec::<String>::new(),
        );
        assert_eq!(n.normalize("Cfr. marzo"), "confronta marzo");
    }

    #[test]
    fn tokens_split_on_apostrophes() {
        let toks: Vec<&str> = word_tokens("dell'eredita, la casa; (nuda) proprieta.").collect();
        assert_eq!(toks, ["dell", "eredita", "la", "casa", "nuda", "proprieta"]);
    }

    proptest! {
        #[test]
        fn idempotent(raw in "[a-zA-Z0-9 .;,?!'àèéìòùÀÉ\u{2019}()/-]{0,60}") {
            let once = normalize_text(&raw);
            prop_assert_eq!(normalize_text(&once), once.clone());
            prop_assert!(once.is_ascii());
            prop_assert!(!once.chars().any(|c| c.is_ascii_digit() || c.is_ascii_uppercase()));
        }

        #[test]
        fn idempotent_with_abbreviations(parts in proptest::collection::vec(
            prop_oneof!["art\\.", "d\\.lgs\\.", "g\\.u\\.", "[a-z]{1,6}", "[0-9]{1,4}", "marzo", "[.;]", " "], 0..12)) {
            let raw = parts.concat();
            let once = normalize_text(&raw);
            prop_assert_eq!(normalize_text(&once), once);
        }
    }
}
