//! Standalone HTML attention heatmap: headline shaded by headline-level
//! weights, sentences ranked by sentence weight with word cells shaded by
//! sqrt(sentence weight) * word weight. Inline styles only, no scripts;
//! the raw trace is embedded as a machine-readable comment block.

use serde::{Deserialize, Serialize};
use threehan::model::AttentionTrace;

/// Exact numbers behind the rendered page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceExport {
    pub probability: f64,
    pub word_weights: Vec<Vec<f64>>,
    pub sentence_weights: Vec<f64>,
    pub headline_weights: Vec<f64>,
}

pub struct HeatmapInput<'a> {
    pub probability: f64,
    pub trace: &'a AttentionTrace,
    /// Headline tokens as encoded (post-truncation).
    pub headline_tokens: &'a [String],
    /// Real sentences as encoded (post-truncation), padding rows excluded.
    pub sentence_tokens: &'a [Vec<String>],
    pub top_sentences: usize,
    pub words_per_sentence: usize,
}

const TRACE_BEGIN: &str = "<!--TRACE\n";
const TRACE_END: &str = "\n-->";

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn shade_cell(word: &str, weight: f64, family_max: f64) -> String {
    let alpha = if family_max > 0.0 { (weight / family_max).clamp(0.0, 1.0) } else { 0.0 };
    format!(
        "<span data-weight=\"{weight}\" title=\"{weight}\" style=\"background:rgba(214,39,40,{alpha:.4});\
         padding:0.15em 0.35em;margin:0 0.1em;border-radius:3px;display:inline-block\">{}</span>",
        escape(word)
    )
}

pub fn render(input: &HeatmapInput) -> String {
    let trace = input.trace;
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>attention heatmap</title>\n</head>\n");
    html.push_str("<body style=\"font-family:Georgia,'Times New Roman',serif;max-width:62em;margin:2em auto;color:#222\">\n");
    html.push_str(&format!(
        "<h2 style=\"font-weight:normal\">fake probability: {:.4}</h2>\n",
        input.probability
    ));

    // headline row: per-word weights plus the body-vector position
    if !trace.headline_weights.is_empty() {
        let shown = input.headline_tokens.len().min(trace.headline_weights.len());
        let family_max = trace
            .headline_weights
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        html.push_str("<div style=\"margin:1em 0\">\n<b>headline</b><br>\n");
        for (j, word) in input.headline_tokens.iter().take(shown).enumerate() {
            html.push_str(&shade_cell(word, trace.headline_weights[j], family_max));
        }
        if let Some(&body_w) = trace.headline_weights.last() {
            html.push_str(&shade_cell("(body)", body_w, family_max));
        }
        html.push_str("\n</div>\n");
    }

    // sentences ranked by sentence weight, weight shown at the left edge
    let mut order: Vec<usize> = (0..input.sentence_tokens.len()).collect();
    order.sort_by(|&a, &b| {
        trace.sentence_weights[b]
            .partial_cmp(&trace.sentence_weights[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(input.top_sentences);

    let displayed_max = order
        .iter()
        .flat_map(|&i| {
            let alpha_s = trace.sentence_weights[i];
            let n = input.sentence_tokens[i].len().min(input.words_per_sentence);
            trace.word_weights[i][..n.min(trace.word_weights[i].len())]
                .iter()
                .map(move |w| alpha_s.sqrt() * w)
        })
        .fold(0.0_f64, f64::max);

    html.push_str("<table style=\"border-collapse:collapse\">\n");
    for &i in &order {
        let alpha_s = trace.sentence_weights[i];
        html.push_str("<tr>\n");
        html.push_str(&format!(
            "<td data-sentence-weight=\"{alpha_s}\" style=\"padding:0.3em 0.8em 0.3em 0;\
             color:#555;white-space:nowrap\">{alpha_s:.3}</td>\n<td style=\"padding:0.3em 0\">",
        ));
        let n = input.sentence_tokens[i].len().min(input.words_per_sentence);
        for (j, word) in input.sentence_tokens[i].iter().take(n).enumerate() {
            let normalized = alpha_s.sqrt() * trace.word_weights[i][j];
            html.push_str(&shade_cell(word, normalized, displayed_max));
        }
        html.push_str("</td>\n</tr>\n");
    }
    html.push_str("</table>\n");

    let export = TraceExport {
        probability: input.probability,
        word_weights: trace.word_weights.clone(),
        sentence_weights: trace.sentence_weights.clone(),
        headline_weights: trace.headline_weights.clone(),
    };
    html.push_str(TRACE_BEGIN);
    html.push_str(&serde_json::to_string(&export).expect("serializable trace"));
    html.push_str(TRACE_END);
    html.push_str("\n</body>\n</html>\n");
    html
}

/// Pull the machine-readable trace back out of a rendered page.
pub fn extract_trace(html: &str) -> Option<TraceExport> {
    let start = html.find(TRACE_BEGIN)? + TRACE_BEGIN.len();
    let end = html[start..].find(TRACE_END)? + start;
    serde_json::from_str(&html[start..end]).ok()
}

/// Every data-weight attribute value, in document order.
pub fn extract_word_weights(html: &str) -> Vec<f64> {
    let mut out = Vec::new();
    let mut rest = html;
    while let Some(pos) = rest.find("data-weight=\"") {
        let tail = &rest[pos + "data-weight=\"".len()..];
        if let Some(end) = tail.find('"') {
            if let Ok(v) = tail[..end].parse() {
                out.push(v);
            }
            rest = &tail[end..];
        } else {
            break;
        }
    }
    out
}
