//! Pattern sources shared by the tokenizer and the regex detectors.

pub const URL: &str = concat!(
    r"(?i)(?:(?:https?://|www\.)",
    r"|(?:t\.co|bit\.ly|goo\.gl|ow\.ly|tinyurl\.com|buff\.ly|youtu\.be|fb\.me|dlvr\.it|ift\.tt|lnkd\.in)/)",
    r#"[^\s<>"]*[^\s<>".,;:!?)\]}'…]"#,
);

pub const EMAIL: &str = concat!(
    r"[A-Za-z0-9][A-Za-z0-9._%+-]*@",
    r"[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?",
    r"(?:\.[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?)*\.[A-Za-z]{2,}",
);

pub const USERNAME: &str = r"@[A-Za-z0-9_]{1,15}";

pub const PHONE: &str = concat!(
    r"\+\d{1,3}(?:[ .-]?\(?\d{1,4}\)?){2,5}",
    r"|(?:1[ .-]?)?(?:\(\d{3}\) ?|\d{3}[ .-]?)\d{3}[ .-]?\d{4}",
    r"|\d{3}[.-]\d{4}",
    r"|\d{7,15}",
);

pub const HASHTAG: &str = r"#[\p{L}\p{N}_]+";

pub const ALNUM_RUN: &str = r"[\p{L}\p{N}\p{M}_]+";

pub const ZIP: &str = r"\d{5}(?:-\d{4})?";

pub const ZIP_PLUS_FOUR: &str = r"^\d{5}-\d{4}$";

/// Two-letter US state and territory codes, used as ZIP cues.
pub const STATE_CODES: &[&str] = &[
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL", "IN", "IA", "KS",
    "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY",
    "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV",
    "WI", "WY", "DC", "PR",
];

pub const STATE_NAMES: &[&str] = &[
    "Alabama", "Alaska", "Arizona", "Arkansas", "California", "Colorado", "Connecticut", "Delaware",
    "Florida", "Georgia", "Hawaii", "Idaho", "Illinois", "Indiana", "Iowa", "Kansas", "Kentucky",
    "Louisiana", "Maine", "Maryland", "Massachusetts", "Michigan", "Minnesota", "Mississippi",
    "Missouri", "Montana", "Nebraska", "Nevada", "New Hampshire", "New Jersey", "New Mexico",
    "New York", "North Carolina", "North Dakota", "Ohio", "Oklahoma", "Oregon", "Pennsylvania",
    "Rhode Island", "South Carolina", "South Dakota", "Tennessee", "Texas", "Utah", "Vermont",
    "Virginia", "Washington", "West Virginia", "Wisconsin", "Wyoming",
];

pub const ZIP_CUE_WORDS: &[&str] = &["zip", "zipcode", "zip code", "postal code", "postcode"];

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || ('\u{300}'..='\u{36f}').contains(&c)
}

pub(crate) fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}
