/// Splits question text into lowercase alphanumeric tokens.
///
/// Markup of the form `<...>` is removed first (a `<` only opens a tag when
/// followed by a letter, `/` or `!` and closed by a later `>`), then the text
/// is lowercased and split on every run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    strip_markup(text)
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn strip_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        let after = &rest[open + 1..];
        let opens_tag = after
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '/' || c == '!');
        match after.find('>') {
            Some(close) if opens_tag => {
                out.push_str(&rest[..open]);
                out.push(' ');
                rest = &after[close + 1..];
            }
            _ => {
                out.push_str(&rest[..=open]);
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn punctuation_and_case() {
        assert_eq!(tokenize("Hello, World"), vec!["hello", "world"]);
    }

    #[test]
    fn html_is_stripped() {
        assert_eq!(tokenize("<p>C++ error</p>"), vec!["c", "error"]);
    }

    #[test]
    fn adjacent_tags_separate_words() {
        assert_eq!(tokenize("<b>foo</b><i>bar</i>"), vec!["foo", "bar"]);
    }

    #[test]
    fn comparison_is_not_markup() {
        assert_eq!(
            tokenize("if a < b and c > d"),
            vec!["if", "a", "b", "and", "c", "d"]
        );
    }

    #[test]
    fn attributes_removed() {
        assert_eq!(
            tokenize(r#"<a href="http://x.y/z">link</a> text"#),
            vec!["link", "text"]
        );
    }
}
