//! Text normalization shared by lexicon de-duplication and entity matching.

use unicode_normalization::UnicodeNormalization;

/// NFKC, full case folding, whitespace runs collapsed to one space, trimmed.
pub fn normalize(s: &str) -> String {
    let nfkc: String = s.nfkc().collect();
    let folded = caseless::default_case_fold_str(&nfkc);
    let mut out = String::with_capacity(folded.len());
    for word in folded.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::normalize;

    #[test]
    fn folds_and_collapses() {
        assert_eq!(normalize("  Straße \t in\nBERLIN "), "strasse in berlin");
        // full-width latin and ideographic space
        assert_eq!(normalize("ＲＯＭＡ\u{3000}Ｃｉｔｙ"), "roma city");
        assert_eq!(normalize("ﬁle"), "file");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize(" \n "), "");
    }

    #[test]
    fn idempotent_on_samples() {
        for s in ["Ǆemal", "İstanbul", "東京タワー", "ΣΊΣΥΦΟΣ", "Ａ  b"] {
            let once = normalize(s);
            assert_eq!(normalize(&once), once, "{s}");
        }
    }
}
