use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    /// Starts with a digit; may continue with letters (`3a`).
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Arrow,
    /// Placeholder for a region the lexer already reported.
    Invalid,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::LBrace => "`{`".to_string(),
            TokenKind::RBrace => "`}`".to_string(),
            TokenKind::LBracket => "`[`".to_string(),
            TokenKind::RBracket => "`]`".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::Colon => "`:`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
            TokenKind::Arrow => "`->`".to_string(),
            TokenKind::Invalid => "invalid input".to_string(),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

/// Strips a BOM and folds CRLF / CR line endings to LF.
pub(crate) fn normalize(source: &str) -> String {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    source.replace("\r\n", "\n").replace('\r', "\n")
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
    tokens: Vec<Token>,
    errors: Vec<ParseError>,
}

pub(crate) fn tokenize(src: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut lexer = Lexer {
        chars: src.char_indices().peekable(),
        src,
        line: 1,
        column: 1,
        tokens: Vec::new(),
        errors: Vec::new(),
    };
    lexer.run();
    let eof = eof_span(src);
    lexer.tokens.push(Token {
        kind: TokenKind::Eof,
        span: eof,
    });
    (lexer.tokens, lexer.errors)
}

/// Position just past the last character of the last line, so error spans at
/// end of input stay within the source's line count.
fn eof_span(src: &str) -> SourceSpan {
    let trimmed = src.trim_end_matches('\n');
    let line = trimmed.matches('\n').count() + 1;
    let last = trimmed.rsplit('\n').next().unwrap_or("");
    SourceSpan {
        line,
        column: last.chars().count() + 1,
        length: 0,
    }
}

fn word_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn word_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

/// True when `text` lexes as exactly one bare word (identifier or number).
pub(crate) fn is_word(text: &str) -> bool {
    let (tokens, errors) = tokenize(text);
    errors.is_empty()
        && tokens.len() == 2
        && matches!(&tokens[0].kind, TokenKind::Ident(s) | TokenKind::Number(s) if s == text)
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn rest_starts_with(&mut self, pat: &str) -> bool {
        let off = self.offset();
        self.src[off..].starts_with(pat)
    }

    fn push(&mut self, kind: TokenKind, line: usize, column: usize, length: usize) {
        self.tokens.push(Token {
            kind,
            span: SourceSpan { line, column, length },
        });
    }

    fn error(&mut self, line: usize, column: usize, length: usize, message: String, expected: &[&str]) {
        self.errors.push(ParseError {
            span: SourceSpan { line, column, length },
            message,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            code: "syntax.lex".to_string(),
        });
        self.push(TokenKind::Invalid, line, column, length);
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            let (line, column) = (self.line, self.column);
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '{' | '}' | '[' | ']' | '(' | ')' | ':' | ',' => {
                    self.bump();
                    let kind = match c {
                        '{' => TokenKind::LBrace,
                        '}' => TokenKind::RBrace,
                        '[' => TokenKind::LBracket,
                        ']' => TokenKind::RBracket,
                        '(' => TokenKind::LParen,
                        ')' => TokenKind::RParen,
                        ':' => TokenKind::Colon,
                        _ => TokenKind::Comma,
                    };
                    self.push(kind, line, column, 1);
                }
                '-' if self.rest_starts_with("->") => {
                    self.bump();
                    self.bump();
                    self.push(TokenKind::Arrow, line, column, 2);
                }
                '"' if self.rest_starts_with("\"\"\"") => self.triple_string(line, column),
                '"' => self.string(line, column),
                c if word_start(c) || (c == '-' && !self.rest_starts_with("->")) => {
                    let text = self.word();
                    let len = text.chars().count();
                    let kind = if c.is_ascii_digit() {
                        TokenKind::Number(text)
                    } else {
                        TokenKind::Ident(text)
                    };
                    self.push(kind, line, column, len);
                }
                other => {
                    self.bump();
                    self.error(line, column, 1, format!("unexpected character `{other}`"), &[]);
                }
            }
        }
    }

    fn word(&mut self) -> String {
        let mut text = String::new();
        while let Some(c) = self.peek() {
            let ok = word_continue(c) || (c == '-' && !self.rest_starts_with("->"));
            if !ok {
                break;
            }
            text.push(c);
            self.bump();
        }
        text
    }

    fn string(&mut self, line: usize, column: usize) {
        self.bump();
        let mut value = String::new();
        let mut length = 1;
        loop {
            let Some(c) = self.peek() else {
                self.error(line, column, length, "unterminated string".into(), &["\""]);
                return;
            };
            if c == '\n' {
                self.error(line, column, length, "unterminated string".into(), &["\""]);
                return;
            }
            self.bump();
            length += 1;
            match c {
                '"' => break,
                '\\' => {
                    let (eline, ecol) = (self.line, self.column - 1);
                    let escaped = self.bump();
                    length += 1;
                    match escaped {
                        Some('n') => value.push('\n'),
                        Some('t') => value.push('\t'),
                        Some('r') => value.push('\r'),
                        Some('"') => value.push('"'),
                        Some('\\') => value.push('\\'),
                        Some('u') => match self.unicode_escape() {
                            Some((ch, used)) => {
                                value.push(ch);
                                length += used;
                            }
                            None => {
                                self.error(eline, ecol, 2, "invalid unicode escape".into(), &["\\u{XXXX}"]);
                                self.skip_string_rest();
                                return;
                            }
                        },
                        other => {
                            let shown = other.map(String::from).unwrap_or_default();
                            self.error(eline, ecol, 2, format!("invalid escape `\\{shown}`"), &[]);
                            self.skip_string_rest();
                            return;
                        }
                    }
                }
                c => value.push(c),
            }
        }
        self.push(TokenKind::Str(value), line, column, length);
    }

    fn unicode_escape(&mut self) -> Option<(char, usize)> {
        if self.peek() != Some('{') {
            return None;
        }
        self.bump();
        let mut hex = String::new();
        while let Some(c) = self.peek() {
            if c == '}' {
                break;
            }
            if !c.is_ascii_hexdigit() || hex.len() >= 6 {
                return None;
            }
            hex.push(c);
            self.bump();
        }
        if self.bump() != Some('}') {
            return None;
        }
        let ch = char::from_u32(u32::from_str_radix(&hex, 16).ok()?)?;
        Some((ch, hex.len() + 2))
    }

    fn skip_string_rest(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                return;
            }
            self.bump();
            if c == '"' {
                return;
            }
        }
    }

    fn triple_string(&mut self, line: usize, column: usize) {
        for _ in 0..3 {
            self.bump();
        }
        let start = self.offset();
        let Some(rel) = self.src[start..].find("\"\"\"") else {
            while self.bump().is_some() {}
            self.error(line, column, 3, "unterminated triple-quoted string".into(), &["\"\"\""]);
            return;
        };
        let raw = &self.src[start..start + rel];
        let length = raw.chars().count() + 6;
        for _ in 0..raw.chars().count() + 3 {
            self.bump();
        }
        self.push(TokenKind::Str(dedent_block(raw)), line, column, length);
    }
}

/// Body of a `"""` string: a leading newline and a trailing whitespace-only
/// line are dropped, then the common indentation of non-blank lines is
/// removed.
pub(crate) fn dedent_block(raw: &str) -> String {
    let body = raw.strip_prefix('\n').unwrap_or(raw);
    let body = match body.rfind('\n') {
        Some(pos) if body[pos + 1..].chars().all(|c| c == ' ' || c == '\t') => &body[..pos],
        None if !body.is_empty() && body.chars().all(|c| c == ' ' || c == '\t') => "",
        _ => body,
    };
    let indent = body
        .split('\n')
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start_matches([' ', '\t']).len())
        .min()
        .unwrap_or(0);
    body.split('\n')
        .map(|l| {
            let ws = l.len() - l.trim_start_matches([' ', '\t']).len();
            &l[ws.min(indent)..]
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        let (tokens, errors) = tokenize(src);
        assert!(errors.is_empty(), "{errors:?}");
        tokens.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn words() {
        assert!(is_word("uc-1"));
        assert!(is_word("3d_printer"));
        assert!(is_word("-x"));
        assert!(is_word("café"));
        assert!(!is_word("a b"));
        assert!(!is_word("a->b"));
        assert!(!is_word(""));
    }

    #[test]
    fn idents_numbers_and_arrows() {
        use TokenKind::*;
        assert_eq!(
            kinds("3a uc-1 a->b law.x # note\n"),
            [
                Number("3a".into()),
                Ident("uc-1".into()),
                Ident("a".into()),
                Arrow,
                Ident("b".into()),
                Ident("law.x".into()),
                Eof
            ]
        );
    }

    #[test]
    fn escapes() {
        assert_eq!(
            kinds(r#""a\"b\\c\n\u{e9}""#)[0],
            TokenKind::Str("a\"b\\c\né".into())
        );
    }

    #[test]
    fn triple_quoted_dedent() {
        let src = "\"\"\"\n    first\n      second\n\n    third\n  \"\"\"";
        assert_eq!(kinds(src)[0], TokenKind::Str("first\n  second\n\nthird".into()));
        assert_eq!(kinds("\"\"\"inline\"\"\"")[0], TokenKind::Str("inline".into()));
    }

    #[test]
    fn unterminated_string_reports_position() {
        let (tokens, errors) = tokenize("x: \"abc\ny");
        assert_eq!(errors.len(), 1);
        assert_eq!((errors[0].span.line, errors[0].span.column), (1, 4));
        assert!(tokens.iter().any(|t| t.kind == TokenKind::Invalid));
    }

    #[test]
    fn eof_span_stays_on_last_line() {
        let (tokens, _) = tokenize("a\nbc\n\n");
        let eof = tokens.last().unwrap().span;
        assert_eq!((eof.line, eof.column), (2, 3));
        let (tokens, _) = tokenize("");
        assert_eq!(tokens[0].span.line, 1);
    }
}
