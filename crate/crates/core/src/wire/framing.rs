//! Splitting a byte stream into YAML documents delimited by `---` and `...`.

/// Incremental document splitter. Feed arbitrary chunks; complete documents
/// come out in order regardless of how the stream was split.
#[derive(Debug, Default)]
pub struct FrameSplitter {
    partial_line: Vec<u8>,
    doc: Vec<u8>,
}

/// A complete document, or one that was not valid UTF-8.
pub type Frame = Result<String, std::string::FromUtf8Error>;

impl FrameSplitter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, chunk: &[u8]) -> Vec<Frame> {
        let mut out = Vec::new();
        let mut rest = chunk;
        while let Some(i) = memchr::memchr(b'\n', rest) {
            self.partial_line.extend_from_slice(&rest[..=i]);
            rest = &rest[i + 1..];
            let line = std::mem::take(&mut self.partial_line);
            self.line(line, &mut out);
        }
        self.partial_line.extend_from_slice(rest);
        out
    }

    /// End of stream: an unterminated document is discarded.
    pub fn finish(&mut self) -> bool {
        let dropped = has_content(&self.doc) || has_content(&self.partial_line);
        self.doc.clear();
        self.partial_line.clear();
        dropped
    }

    fn line(&mut self, line: Vec<u8>, out: &mut Vec<Frame>) {
        let trimmed = trim_end(&line);
        if is_marker(trimmed, b"---") || is_marker(trimmed, b"...") {
            self.emit(out);
        } else {
            self.doc.extend_from_slice(&line);
        }
    }

    fn emit(&mut self, out: &mut Vec<Frame>) {
        let doc = std::mem::take(&mut self.doc);
        if has_content(&doc) {
            out.push(String::from_utf8(doc));
        }
    }
}

fn is_marker(line: &[u8], marker: &[u8]) -> bool {
    line.starts_with(marker) && (line.len() == 3 || line[3] == b' ' || line[3] == b'\t')
}

fn trim_end(line: &[u8]) -> &[u8] {
    let end = line
        .iter()
        .rposition(|b| !b.is_ascii_whitespace())
        .map_or(0, |i| i + 1);
    &line[..end]
}

fn has_content(doc: &[u8]) -> bool {
    doc.split(|&b| b == b'\n').any(|l| {
        let l = trim_end(l);
        let start = l.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(l.len());
        let l = &l[start..];
        !l.is_empty() && !l.starts_with(b"#")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all(stream: &[u8], cuts: &[usize]) -> Vec<String> {
        let mut s = FrameSplitter::new();
        let mut out = Vec::new();
        let mut last = 0;
        for &c in cuts {
            out.extend(s.push(&stream[last..c]));
            last = c;
        }
        out.extend(s.push(&stream[last..]));
        out.into_iter().map(Result::unwrap).collect()
    }

    const STREAM: &str = "---\nevent: graph\ncontext: {}\n...\n---\nevent: message\ntopic: /t\n...\n";

    #[test]
    fn two_documents() {
        let docs = all(STREAM.as_bytes(), &[]);
        assert_eq!(docs, vec!["event: graph\ncontext: {}\n", "event: message\ntopic: /t\n"]);
    }

    #[test]
    fn separator_without_end_marker() {
        let docs = all(b"---\na: 1\n---\nb: 2\n---\n", &[]);
        assert_eq!(docs, vec!["a: 1\n", "b: 2\n"]);
    }

    #[test]
    fn partial_document_is_discarded() {
        let mut s = FrameSplitter::new();
        assert!(s.push(b"---\nevent: gra").is_empty());
        assert!(s.finish());
        assert!(s.push(b"---\na: 1\n...\n").len() == 1);
    }

    #[test]
    fn markers_inside_values_are_not_split() {
        let docs = all(b"---\ntext: '--- not a marker'\nx: ----\n...\n", &[]);
        assert_eq!(docs.len(), 1);
    }

    proptest! {
        #[test]
        fn any_split_yields_same_documents(mut cuts in proptest::collection::vec(0usize..STREAM.len(), 0..8)) {
            cuts.sort_unstable();
            prop_assert_eq!(all(STREAM.as_bytes(), &cuts), all(STREAM.as_bytes(), &[]));
        }
    }
}
