//! Project Gutenberg header/footer removal.

const START: &str = "*** START OF";
const END: &str = "*** END OF";
const CLOSE: &str = "***";

/// Returns the text between the `*** START OF ... ***` and `*** END OF`
/// markers, or the input unchanged when either marker is missing.
pub fn strip_boilerplate(raw: &str) -> &str {
    let Some(start) = raw.find(START) else {
        return raw;
    };
    let after_start = start + START.len();
    let Some(close) = raw[after_start..].find(CLOSE) else {
        return raw;
    };
    let body_start = after_start + close + CLOSE.len();
    match raw[body_start..].find(END) {
        Some(end) => &raw[body_start..body_start + end],
        None => raw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_markers_is_identity() {
        let t = "Call me Ishmael.";
        assert_eq!(strip_boilerplate(t), t);
    }

    #[test]
    fn both_markers() {
        let t = "HEADER *** START OF ... *** body *** END OF ... *** FOOTER";
        assert_eq!(strip_boilerplate(t), " body ");
    }

    #[test]
    fn start_marker_only() {
        let t = "HEADER *** START OF THE BOOK *** body";
        assert_eq!(strip_boilerplate(t), t);
    }

    #[test]
    fn realistic_header() {
        let t = "The Project Gutenberg eBook\n*** START OF THE PROJECT GUTENBERG EBOOK EMMA ***\nChapter I\n*** END OF THE PROJECT GUTENBERG EBOOK EMMA ***\nlicense";
        assert_eq!(strip_boilerplate(t), "\nChapter I\n");
    }
}
