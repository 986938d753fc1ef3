//! What a wallet shows: text lines laid out on a monospaced grid.

use serde::{Deserialize, Serialize};

/// Words that mark an alert, matched case-insensitively.
pub const ALERT_KEYWORDS: [&str; 2] = ["warning", "risk"];

pub fn has_alert_keyword(text: &str) -> bool {
    let lower = text.to_lowercase();
    ALERT_KEYWORDS.iter().any(|k| lower.contains(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenLine {
    pub text: String,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Button {
    pub label: String,
    pub node_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderedScreen {
    pub screen_id: String,
    pub lines: Vec<ScreenLine>,
    pub buttons: Vec<Button>,
    /// False when the wallet ignored the request and kept its last screen.
    pub changed_from_previous: bool,
}

/// Left margin of the grid, in cells.
const MARGIN: u32 = 2;

impl RenderedScreen {
    pub fn new(screen_id: impl Into<String>) -> Self {
        RenderedScreen {
            screen_id: screen_id.into(),
            lines: Vec::new(),
            buttons: Vec::new(),
            changed_from_previous: true,
        }
    }

    /// The screen a wallet leaves in place when it refuses a request.
    pub fn unchanged(screen_id: impl Into<String>) -> Self {
        RenderedScreen { changed_from_previous: false, ..Self::new(screen_id) }
    }

    /// Appends a line one row below the previous one.
    pub fn line(&mut self, text: impl Into<String>) -> &mut Self {
        let text = text.into();
        let y = self.lines.last().map(|l| l.region.y + l.region.h).unwrap_or(1);
        let w = text.chars().count() as u32;
        self.lines.push(ScreenLine { text, region: Region { x: MARGIN, y, w, h: 1 } });
        self
    }

    pub fn lines<I, S>(&mut self, texts: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for t in texts {
            self.line(t);
        }
        self
    }

    pub fn button(&mut self, label: &str, node_id: &str) -> &mut Self {
        self.buttons.push(Button { label: label.into(), node_id: node_id.into() });
        self
    }

    pub fn build(&mut self) -> RenderedScreen {
        std::mem::replace(self, RenderedScreen::new(""))
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().map(|l| l.text.as_str())
    }
}
