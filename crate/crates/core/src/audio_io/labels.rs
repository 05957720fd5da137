use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Label of the extra noise / non-command class.
pub const NULL_LABEL: &str = "NULL";

/// The 40 commands as (romanized alias, Arabic display form).
pub const COMMANDS: [(&str, &str); 40] = [
    ("zero", "صفر"),
    ("one", "واحد"),
    ("two", "اثنان"),
    ("three", "ثلاثة"),
    ("four", "أربعة"),
    ("five", "خمسة"),
    ("six", "ستة"),
    ("seven", "سبعة"),
    ("eight", "ثمانية"),
    ("nine", "تسعة"),
    ("right", "يمين"),
    ("left", "يسار"),
    ("up", "أعلى"),
    ("down", "أسفل"),
    ("front", "أمام"),
    ("back", "خلف"),
    ("yes", "نعم"),
    ("no", "لا"),
    ("start", "ابدأ"),
    ("stop", "توقف"),
    ("enable", "تفعيل"),
    ("disable", "تعطيل"),
    ("ok", "موافق"),
    ("cancel", "إلغاء"),
    ("open", "فتح"),
    ("close", "إغلاق"),
    ("zoom_in", "تكبير"),
    ("zoom_out", "تصغير"),
    ("previous", "السابق"),
    ("next", "التالي"),
    ("send", "إرسال"),
    ("receive", "استقبال"),
    ("move", "تحريك"),
    ("rotate", "تدوير"),
    ("record", "تسجيل"),
    ("enter", "إدخال"),
    ("digit", "رقم"),
    ("direction", "اتجاه"),
    ("options", "خيارات"),
    ("undo", "تراجع"),
];

/// Ordered label set: the 40 commands followed by `NULL`, indices 0..=40.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelMap {
    labels: Vec<String>,
}

impl LabelMap {
    pub const SIZE: usize = 41;

    pub fn standard() -> Self {
        let labels = COMMANDS
            .iter()
            .map(|(alias, _)| alias.to_string())
            .chain(std::iter::once(NULL_LABEL.to_string()))
            .collect();
        Self { labels }
    }

    /// Validates an externally supplied ordering (e.g. from a checkpoint).
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        if labels.len() != Self::SIZE {
            return Err(Error::Config(format!(
                "label map needs {} entries, got {}",
                Self::SIZE,
                labels.len()
            )));
        }
        if labels.iter().filter(|l| *l == NULL_LABEL).count() != 1 {
            return Err(Error::Config("label map must contain NULL exactly once".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l != NULL_LABEL && !COMMANDS.iter().any(|(alias, _)| alias == l) {
                return Err(Error::Label(l.clone()));
            }
            if labels[..i].contains(l) {
                return Err(Error::Config(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::Label(label.to_string()))
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn null_index(&self) -> usize {
        self.index_of(NULL_LABEL).expect("validated on construction")
    }

    /// Arabic form for a command alias; `NULL` displays as itself.
    pub fn display(&self, index: usize) -> Option<&'static str> {
        let label = self.label(index)?;
        if label == NULL_LABEL {
            return Some(NULL_LABEL);
        }
        COMMANDS
            .iter()
            .find(|(alias, _)| *alias == label)
            .map(|(_, arabic)| *arabic)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_command(&self, label: &str) -> bool {
        label != NULL_LABEL && self.index_of(label).is_some()
    }
}

impl Default for LabelMap {
    fn default() -> Self {
        Self::standard()
    }
}

impl TryFrom<Vec<String>> for LabelMap {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        Self::from_labels(labels)
    }
}

impl From<LabelMap> for Vec<String> {
    fn from(map: LabelMap) -> Self {
        map.labels
    }
}
