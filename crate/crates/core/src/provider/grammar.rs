//! The line grammar shared by every provider:
//!
//! ```text
//! BOOST <symbol>
//! SUPPRESS <symbol>
//! SUPPORT <class> <symbol> <weight>
//! REFUTE <class> <symbol> <weight>
//! ```
//!
//! Keywords are case-insensitive and a leading list marker (`-`, `*`, `1.`)
//! is tolerated. A weight of `0` removes the assertion. Anything else,
//! including references to unknown symbols or classes, is rejected line by
//! line and never aborts the parse.

use super::{Directive, DirectiveKind};
use crate::belief::{HypothesisEdit, Polarity};

/// Edits, directives and rejected lines of one completion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Parsed {
    pub edits: Vec<HypothesisEdit>,
    pub directives: Vec<Directive>,
    pub rejected: Vec<String>,
}

fn strip_marker(line: &str) -> &str {
    let line = line.trim();
    if let Some(rest) = line.strip_prefix(['-', '*', '•']) {
        return rest.trim_start();
    }
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 {
        if let Some(rest) = line[digits..].strip_prefix(['.', ')']) {
            return rest.trim_start();
        }
    }
    line
}

fn parse_line(line: &str, symbols: &[String], classes: &[String]) -> Option<Result<Item, ()>> {
    let body = strip_marker(line);
    if body.is_empty() {
        return None;
    }
    let known_symbol = |s: &str| symbols.iter().any(|x| x == s);
    let known_class = |c: &str| classes.iter().any(|x| x == c);
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let keyword = tokens[0].to_ascii_uppercase();
    let item = match (keyword.as_str(), &tokens[1..]) {
        ("BOOST", [s]) if known_symbol(s) => Item::Directive(Directive {
            symbol: s.to_string(),
            kind: DirectiveKind::Boost,
        }),
        ("SUPPRESS", [s]) if known_symbol(s) => Item::Directive(Directive {
            symbol: s.to_string(),
            kind: DirectiveKind::Suppress,
        }),
        (kw @ ("SUPPORT" | "REFUTE"), [c, s, w]) if known_class(c) && known_symbol(s) => {
            let weight: f64 = match w.parse() {
                Ok(w) if (0.0..=1.0).contains(&w) => w,
                _ => return Some(Err(())),
            };
            let polarity = if kw == "SUPPORT" {
                Polarity::Supports
            } else {
                Polarity::Refutes
            };
            let (class, symbol) = (c.to_string(), s.to_string());
            Item::Edit(if weight == 0.0 {
                HypothesisEdit::Remove {
                    class,
                    symbol,
                    polarity,
                }
            } else {
                HypothesisEdit::Set {
                    class,
                    symbol,
                    polarity,
                    weight,
                }
            })
        }
        _ => return Some(Err(())),
    };
    Some(Ok(item))
}

enum Item {
    Edit(HypothesisEdit),
    Directive(Directive),
}

/// Parses a completion against the allowed vocabulary. Total: every input
/// yields a (possibly empty) result.
pub fn parse(text: &str, symbols: &[String], classes: &[String]) -> Parsed {
    let mut out = Parsed::default();
    for line in text.lines() {
        match parse_line(line, symbols, classes) {
            None => {}
            Some(Ok(Item::Edit(e))) => out.edits.push(e),
            Some(Ok(Item::Directive(d))) => out.directives.push(d),
            Some(Err(())) => out.rejected.push(line.to_string()),
        }
    }
    out
}

/// Grammar lines for edits and directives; `parse` inverts this exactly.
pub fn render(edits: &[HypothesisEdit], directives: &[Directive]) -> String {
    let mut out = String::new();
    for e in edits {
        let line = match e {
            HypothesisEdit::Set {
                class,
                symbol,
                polarity,
                weight,
            } => format!("{} {class} {symbol} {weight}", polarity.keyword()),
            HypothesisEdit::Remove {
                class,
                symbol,
                polarity,
            } => format!("{} {class} {symbol} 0", polarity.keyword()),
        };
        out.push_str(&line);
        out.push('\n');
    }
    for d in directives {
        let kw = match d.kind {
            DirectiveKind::Boost => "BOOST",
            DirectiveKind::Suppress => "SUPPRESS",
        };
        out.push_str(&format!("{kw} {}\n", d.symbol));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab() -> (Vec<String>, Vec<String>) {
        (
            ["cabinet", "drawer", "sink"].map(String::from).to_vec(),
            ["mug", "apple"].map(String::from).to_vec(),
        )
    }

    #[test]
    fn boost_and_suppress_lines() {
        let (s, c) = vocab();
        let p = parse("BOOST cabinet\nSUPPRESS sink", &s, &c);
        assert_eq!(
            p.directives,
            vec![
                Directive {
                    symbol: "cabinet".into(),
                    kind: DirectiveKind::Boost
                },
                Directive {
                    symbol: "sink".into(),
                    kind: DirectiveKind::Suppress
                },
            ]
        );
        assert!(p.rejected.is_empty());
    }

    #[test]
    fn prose_is_rejected_not_fatal() {
        let (s, c) = vocab();
        let p = parse("I think the mug is gone.", &s, &c);
        assert!(p.edits.is_empty() && p.directives.is_empty());
        assert_eq!(p.rejected, vec!["I think the mug is gone.".to_string()]);
    }

    #[test]
    fn markers_case_and_unknowns() {
        let (s, c) = vocab();
        let text = "- boost drawer\n2. refute mug sink 0.5\nBOOST garage\nSUPPORT mug sink 1.5\n\nSUPPORT mug sink 0";
        let p = parse(text, &s, &c);
        assert_eq!(p.directives.len(), 1);
        assert_eq!(p.edits.len(), 2);
        assert!(matches!(p.edits[1], HypothesisEdit::Remove { .. }));
        assert_eq!(p.rejected.len(), 2);
    }

    fn edit_strategy() -> impl Strategy<Value = HypothesisEdit> {
        let class = prop::sample::select(vec!["mug", "apple"]);
        let symbol = prop::sample::select(vec!["cabinet", "drawer", "sink"]);
        let polarity = prop::bool::ANY.prop_map(|b| {
            if b {
                Polarity::Supports
            } else {
                Polarity::Refutes
            }
        });
        (class, symbol, polarity, prop::option::of(1e-9f64..=1.0)).prop_map(
            |(c, s, p, w)| match w {
                Some(weight) => HypothesisEdit::Set {
                    class: c.into(),
                    symbol: s.into(),
                    polarity: p,
                    weight,
                },
                None => HypothesisEdit::Remove {
                    class: c.into(),
                    symbol: s.into(),
                    polarity: p,
                },
            },
        )
    }

    fn directive_strategy() -> impl Strategy<Value = Directive> {
        (
            prop::sample::select(vec!["cabinet", "drawer", "sink"]),
            prop::bool::ANY,
        )
            .prop_map(|(s, b)| Directive {
                symbol: s.into(),
                kind: if b {
                    DirectiveKind::Boost
                } else {
                    DirectiveKind::Suppress
                },
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(
            edits in prop::collection::vec(edit_strategy(), 0..8),
            directives in prop::collection::vec(directive_strategy(), 0..8),
        ) {
            let (s, c) = vocab();
            let p = parse(&render(&edits, &directives), &s, &c);
            prop_assert_eq!(p.edits, edits);
            prop_assert_eq!(p.directives, directives);
            prop_assert!(p.rejected.is_empty());
        }

        #[test]
        fn parse_is_total(text in ".*") {
            let (s, c) = vocab();
            let p = parse(&text, &s, &c);
            for e in &p.edits {
                prop_assert!(s.iter().any(|x| x == e.symbol()));
            }
        }
    }
}
