use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Entity classes replaced by placeholders, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Url,
    Email,
    User,
    Money,
    Percent,
    Phone,
    Time,
    Date,
    Number,
}

impl EntityKind {
    pub const ALL: [EntityKind; 9] = [
        EntityKind::Url,
        EntityKind::Email,
        EntityKind::User,
        EntityKind::Money,
        EntityKind::Percent,
        EntityKind::Phone,
        EntityKind::Time,
        EntityKind::Date,
        EntityKind::Number,
    ];

    pub fn placeholder(self) -> &'static str {
        match self {
            EntityKind::Url => "<url>",
            EntityKind::Email => "<email>",
            EntityKind::User => "<user>",
            EntityKind::Money => "<money>",
            EntityKind::Percent => "<percent>",
            EntityKind::Phone => "<phone>",
            EntityKind::Time => "<time>",
            EntityKind::Date => "<date>",
            EntityKind::Number => "<number>",
        }
    }

    fn regex(self) -> &'static Regex {
        static RES: LazyLock<Vec<Regex>> = LazyLock::new(|| {
            [
                r"(?i)(?:https?://|www\.)[^\s<>]+",
                r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}",
                r"@\w+",
                r"(?i)[$€£₹]\s?\d+(?:[.,]\d+)*|\b\d+(?:[.,]\d+)*\s?(?:dollars|usd|rupees|rs|inr|euros?|pounds)\b",
                r"\d+(?:[.,]\d+)?\s?%",
                r"(?:\+\d{1,3}[ -]?)?(?:\(\d{3}\)|\b\d{3})[ .-]\d{3}[ .-]\d{4}\b|\+\d{1,3}[ -]?\d{5}[ -]?\d{5}\b",
                r"(?i)\b\d{1,2}:\d{2}(?::\d{2})?(?:\s?[ap]\.?m\b\.?)?|\b\d{1,2}\s?[ap]m\b",
                r"\b\d{1,4}[/.-]\d{1,2}[/.-]\d{1,4}\b",
                r"\b\d+(?:[.,]\d+)*\b",
            ]
            .iter()
            .map(|p| Regex::new(p).expect("entity regex"))
            .collect()
        });
        &RES[self as usize]
    }
}

/// Per-class switches for entity normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityToggles {
    pub url: bool,
    pub email: bool,
    pub user: bool,
    pub money: bool,
    pub percent: bool,
    pub phone: bool,
    pub time: bool,
    pub date: bool,
    pub number: bool,
}

impl EntityToggles {
    pub const ALL_ON: EntityToggles = EntityToggles {
        url: true,
        email: true,
        user: true,
        money: true,
        percent: true,
        phone: true,
        time: true,
        date: true,
        number: true,
    };

    pub fn enabled(&self, kind: EntityKind) -> bool {
        match kind {
            EntityKind::Url => self.url,
            EntityKind::Email => self.email,
            EntityKind::User => self.user,
            EntityKind::Money => self.money,
            EntityKind::Percent => self.percent,
            EntityKind::Phone => self.phone,
            EntityKind::Time => self.time,
            EntityKind::Date => self.date,
            EntityKind::Number => self.number,
        }
    }
}

impl Default for EntityToggles {
    fn default() -> Self {
        Self::ALL_ON
    }
}

/// Replaces every entity span with its placeholder, all classes enabled.
pub fn normalize_entities(text: &str) -> String {
    normalize_entities_with(text, &EntityToggles::ALL_ON)
}

pub fn normalize_entities_with(text: &str, toggles: &EntityToggles) -> String {
    let mut out = text.to_string();
    for kind in EntityKind::ALL {
        if toggles.enabled(kind) {
            let re = kind.regex();
            if re.is_match(&out) {
                out = re.replace_all(&out, kind.placeholder()).into_owned();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(normalize_entities("see http://x.co now"), "see <url> now");
        assert_eq!(normalize_entities("@john hi"), "<user> hi");
        assert_eq!(normalize_entities(""), "");
        assert_eq!(normalize_entities("mail me at a.b@c.org"), "mail me at <email>");
        assert_eq!(normalize_entities("up 50% today"), "up <percent> today");
        assert_eq!(normalize_entities("costs $100 or 500 rupees"), "costs <money> or <money>");
        assert_eq!(normalize_entities("call 555-123-4567"), "call <phone>");
        assert_eq!(normalize_entities("at 10:30pm on 12/05/2020"), "at <time> on <date>");
        assert_eq!(normalize_entities("I have 3 cats"), "I have <number> cats");
        assert_eq!(normalize_entities("abc123"), "abc123");
    }

    #[test]
    fn toggles_disable_classes() {
        let t = EntityToggles {
            user: false,
            ..EntityToggles::ALL_ON
        };
        assert_eq!(normalize_entities_with("@john has 2", &t), "@john has <number>");
    }

    proptest! {
        #[test]
        fn idempotent(s in "[a-zA-Z0-9@.:/%$€₹<>_ +()-]{0,40}") {
            let once = normalize_entities(&s);
            prop_assert_eq!(normalize_entities(&once), once);
        }

        #[test]
        fn idempotent_on_realistic_text(
            parts in proptest::collection::vec(
                prop_oneof![
                    Just("http://a.b/c".to_string()),
                    Just("@user_1".to_string()),
                    Just("x@y.com".to_string()),
                    Just("$5".to_string()),
                    Just("10%".to_string()),
                    Just("12:30".to_string()),
                    Just("1/2/2020".to_string()),
                    "[0-9]{1,6}",
                    "[a-z]{1,6}",
                ],
                0..10,
            )
        ) {
            let s = parts.join(" ");
            let once = normalize_entities(&s);
            prop_assert_eq!(normalize_entities(&once), once);
        }
    }
}
