#include "texhtml/html_emitter.hpp"

#include <algorithm>

#include "texhtml/math_render.hpp"

namespace texhtml {

std::string_view stylesheet() {
  static constexpr std::string_view css = R"CSS(
:root {
  --bg: #ffffff;
  --fg: #1b1b1b;
  --muted: #5a5a5a;
  --accent: #1f5fa8;
  --rule: #d0d0d0;
  --code-bg: #f3f3f3;
  --banner-bg: #fff4ce;
  --banner-fg: #4a3b00;
  --unknown-bg: #fde7e9;
  --unknown-fg: #8a1c27;
  --font-scale: 1;
  color-scheme: light dark;
}
@media (prefers-color-scheme: dark) {
  :root:not([data-theme="light"]) {
    --bg: #15171a;
    --fg: #e4e4e4;
    --muted: #a8a8a8;
    --accent: #8ab4f8;
    --rule: #3a3d42;
    --code-bg: #23262b;
    --banner-bg: #3d3300;
    --banner-fg: #ffe99a;
    --unknown-bg: #4a1f24;
    --unknown-fg: #ffb3ba;
  }
}
:root[data-theme="dark"] {
  --bg: #15171a;
  --fg: #e4e4e4;
  --muted: #a8a8a8;
  --accent: #8ab4f8;
  --rule: #3a3d42;
  --code-bg: #23262b;
  --banner-bg: #3d3300;
  --banner-fg: #ffe99a;
  --unknown-bg: #4a1f24;
  --unknown-fg: #ffb3ba;
}
* { box-sizing: border-box; }
body {
  margin: 0;
  background: var(--bg);
  color: var(--fg);
  font-family: Georgia, "Times New Roman", serif;
  line-height: 1.6;
  overflow-wrap: break-word;
}
main {
  max-width: 48rem;
  margin: 0 auto;
  padding: 0 1rem 3rem;
  font-size: calc(1rem * var(--font-scale));
}
a { color: var(--accent); }
img, svg, video { max-width: 100%; height: auto; }
pre {
  background: var(--code-bg);
  padding: 0.75rem;
  overflow-x: auto;
  white-space: pre-wrap;
}
code { background: var(--code-bg); font-family: Menlo, Consolas, monospace; font-size: 0.92em; }
math[display="block"], .math-display { display: block; overflow-x: auto; margin: 1em 0; }
.math-display { display: flex; align-items: center; justify-content: space-between; gap: 1rem; }
.equation-number { color: var(--muted); white-space: nowrap; }
.math-fallback code { border: 1px dashed var(--unknown-fg); }
.unsupported-banner {
  background: var(--banner-bg);
  color: var(--banner-fg);
  padding: 0.6rem 1rem;
  border-bottom: 1px solid var(--rule);
}
.reader-chrome {
  display: flex;
  flex-wrap: wrap;
  gap: 0.75rem;
  align-items: center;
  justify-content: space-between;
  padding: 0.5rem 1rem;
  border-bottom: 1px solid var(--rule);
  font-family: system-ui, sans-serif;
}
.experimental-label {
  font-size: 0.8rem;
  text-transform: uppercase;
  letter-spacing: 0.05em;
  border: 1px solid var(--muted);
  border-radius: 0.25rem;
  padding: 0.1rem 0.4rem;
}
.report-issue { font: inherit; padding: 0.3rem 0.8rem; }
.unknown-command, .unknown-environment {
  background: var(--unknown-bg);
  color: var(--unknown-fg);
  font-family: Menlo, Consolas, monospace;
}
.authors { color: var(--muted); }
.abstract { margin: 1.5rem 0; padding: 0 1rem; border-left: 3px solid var(--rule); }
.abstract-title { font-weight: bold; margin-bottom: 0; }
figure { margin: 1.5rem 0; }
figcaption { color: var(--muted); font-size: 0.95em; }
.table-wrap { overflow-x: auto; }
table { border-collapse: collapse; margin: 0.5rem 0; }
td { border-top: 1px solid var(--rule); padding: 0.25rem 0.6rem; vertical-align: top; }
.align-l { text-align: left; }
.align-c { text-align: center; }
.align-r { text-align: right; }
.small-caps { font-variant: small-caps; }
.sans-serif { font-family: system-ui, sans-serif; }
.roman { font-style: normal; font-weight: normal; }
.slanted { font-style: oblique; }
.underline { text-decoration: underline; }
.section-number { margin-right: 0.5em; }
.ref.unresolved, .cite.unresolved { color: var(--unknown-fg); }
.footnotes { border-top: 1px solid var(--rule); margin-top: 2rem; font-size: 0.9em; }
)CSS";
  return css;
}

std::string anchor_id(std::string_view prefix, std::string_view key) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out(prefix);
  out += '-';
  for (const unsigned char c : key) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-') {
      out += static_cast<char>(c);
    } else {
      out += '_';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

namespace {

bool safe_url(std::string_view url) {
  std::string lowered;
  for (const char c : url) {
    if (c == ' ' || c == '\t' || c == '\n') continue;
    lowered += static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c);
    if (lowered.size() > 16) break;
  }
  return lowered.rfind("javascript:", 0) != 0 && lowered.rfind("vbscript:", 0) != 0 &&
         lowered.rfind("data:", 0) != 0;
}

class Emitter {
 public:
  Emitter(const Document& doc, const EmitOptions& options) : doc_(doc), options_(options) {}

  HtmlArtifact run() {
    HtmlArtifact artifact;
    artifact.includes_banner = !doc_.unknown_packages.empty();

    std::string body;
    if (doc_.metadata.title) {
      body += "<h1 class=\"title\">";
      inlines(*doc_.metadata.title, body);
      body += "</h1>\n";
    }
    if (!doc_.metadata.authors.empty()) {
      body += "<p class=\"authors\">";
      for (std::size_t i = 0; i < doc_.metadata.authors.size(); ++i) {
        if (i > 0) body += ", ";
        body += "<span class=\"author\">";
        inlines(doc_.metadata.authors[i], body);
        body += "</span>";
      }
      body += "</p>\n";
    }
    if (doc_.metadata.abstract) {
      body += "<section class=\"abstract\" aria-label=\"Abstract\">\n<p class=\"abstract-title\">Abstract</p>\n";
      blocks(*doc_.metadata.abstract, body);
      body += "</section>\n";
    }
    blocks(doc_.body, body);
    footnotes(body);

    if (body.empty() && options_.require_content) {
      throw EmitterFailure("document produced no content");
    }

    std::string& out = artifact.html;
    out.reserve(body.size() + stylesheet().size() + 1024);
    out += "<!DOCTYPE html>\n<html lang=\"";
    out += escape_html(options_.language);
    out += "\" data-paper-id=\"";
    out += escape_html(options_.paper_id);
    out += "\">\n<head>\n<meta charset=\"utf-8\"/>\n";
    out += "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\"/>\n";
    out += "<meta name=\"generator\" content=\"texhtml\"/>\n";
    if (options_.report_endpoint) {
      out += "<meta name=\"report-endpoint\" content=\"" + escape_html(*options_.report_endpoint) + "\"/>\n";
    }
    out += "<title>";
    const std::string title = doc_.metadata.title ? plain_text(*doc_.metadata.title) : std::string{};
    out += escape_html(title.empty() ? options_.paper_id : title);
    out += "</title>\n<style>";
    out += stylesheet();
    out += "</style>\n";
    if (options_.chrome_script) {
      out += "<script src=\"" + escape_html(*options_.chrome_script) + "\" defer=\"defer\"></script>\n";
    }
    out += "</head>\n<body>\n";
    if (artifact.includes_banner) {
      out += "<div class=\"unsupported-banner\" role=\"note\">";
      out += escape_html(banner_text);
      out += " Unsupported: ";
      bool first = true;
      for (const std::string& name : doc_.unknown_packages) {
        if (!first) out += ", ";
        first = false;
        out += "<code class=\"package-name\">" + escape_html(name) + "</code>";
      }
      out += ".</div>\n";
    }
    out += "<header class=\"reader-chrome\">\n<span class=\"experimental-label\">";
    out += experimental_label;
    out += "</span>\n<button type=\"button\" class=\"report-issue\" data-action=\"report-issue\" "
           "aria-haspopup=\"dialog\">Report Issue</button>\n</header>\n";
    out += "<main id=\"main\">";
    if (!body.empty()) {
      out += "\n<article class=\"paper\">\n";
      out += body;
      out += "</article>\n";
    }
    out += "</main>\n</body>\n</html>\n";

    artifact.warnings = std::move(warnings_);
    artifact.assets = std::move(assets_);
    return artifact;
  }

 private:
  void warn(std::string code, std::string message) {
    report(warnings_, Severity::warning, Stage::emitter, std::move(code), std::move(message));
  }

  static std::string label_attr(const std::vector<std::string>& labels, std::string_view fallback = {}) {
    if (!labels.empty()) return " id=\"" + anchor_id("label", labels.front()) + "\"";
    if (!fallback.empty()) return " id=\"" + std::string(fallback) + "\"";
    return {};
  }

  // Extra labels become empty anchors so every label has a target.
  static void extra_anchors(const std::vector<std::string>& labels, std::string& out) {
    for (std::size_t i = 1; i < labels.size(); ++i) {
      out += "<span id=\"" + anchor_id("label", labels[i]) + "\"></span>";
    }
  }

  void blocks(const Blocks& list, std::string& out) {
    for (const Block& b : list) {
      std::visit([&](const auto& node) { block(node, out); }, b.node);
    }
  }

  void block(const Section& s, std::string& out) {
    const int h = std::clamp(s.level + 1, 2, 6);
    const std::string tag = "h" + std::to_string(h);
    out += "<section" + label_attr(s.labels) + " class=\"level-" + std::to_string(s.level) + "\">\n";
    out += "<" + tag + ">";
    extra_anchors(s.labels, out);
    if (!s.number.empty()) out += "<span class=\"section-number\">" + escape_html(s.number) + "</span>";
    inlines(s.title, out);
    out += "</" + tag + ">\n";
    blocks(s.children, out);
    out += "</section>\n";
  }

  void block(const Paragraph& p, std::string& out) {
    out += "<p>";
    inlines(p.content, out);
    out += "</p>\n";
  }

  void block(const List& list, std::string& out) {
    if (list.kind == ListKind::description) {
      out += "<dl>\n";
      for (const ListItem& item : list.items) {
        out += "<dt>";
        if (item.label) inlines(*item.label, out);
        out += "</dt>\n<dd>";
        blocks(item.content, out);
        out += "</dd>\n";
      }
      out += "</dl>\n";
      return;
    }
    const bool bibliography = list.kind == ListKind::bibliography;
    const bool ordered = list.kind == ListKind::ordered || bibliography;
    if (bibliography) out += "<div class=\"bibliography\" role=\"doc-bibliography\" aria-label=\"References\">\n";
    out += ordered ? "<ol" : "<ul";
    if (bibliography) out += " class=\"bibliography-list\"";
    out += ">\n";
    for (const ListItem& item : list.items) {
      out += "<li";
      if (bibliography && !item.key.empty()) {
        out += " id=\"" + anchor_id("bib", item.key) + "\"";
      } else {
        out += label_attr(item.labels);
      }
      out += ">";
      if (!bibliography) extra_anchors(item.labels, out);
      if (item.label) {
        out += "<span class=\"item-label\">";
        inlines(*item.label, out);
        out += "</span> ";
      }
      blocks(item.content, out);
      out += "</li>\n";
    }
    out += ordered ? "</ol>\n" : "</ul>\n";
    if (bibliography) out += "</div>\n";
  }

  template <typename Float>
  void float_block(const Float& f, std::string_view kind, std::string_view word, std::string& out) {
    out += "<figure class=\"" + std::string(kind) + "\"" + label_attr(f.labels) + ">\n";
    extra_anchors(f.labels, out);
    auto caption = [&] {
      if (!f.caption) return;
      out += "<figcaption><span class=\"float-label\">" + std::string(word) + " " + escape_html(f.number) +
             ":</span> ";
      inlines(*f.caption, out);
      out += "</figcaption>\n";
    };
    // Tables put their caption first, as in print.
    if (kind == "table") caption();
    in_figure_ = true;
    blocks(f.content, out);
    in_figure_ = false;
    if (kind != "table") caption();
    out += "</figure>\n";
  }

  void block(const Figure& f, std::string& out) { float_block(f, "figure", "Figure", out); }
  void block(const Table& t, std::string& out) { float_block(t, "table", "Table", out); }

  void block(const Tabular& t, std::string& out) {
    out += "<div class=\"table-wrap\"><table>\n<tbody>\n";
    for (const auto& row : t.rows) {
      out += "<tr>";
      for (std::size_t c = 0; c < row.size(); ++c) {
        const char align = c < t.alignments.size() ? t.alignments[c] : 'l';
        out += "<td class=\"align-";
        out += align;
        out += "\">";
        inlines(row[c], out);
        out += "</td>";
      }
      out += "</tr>\n";
    }
    out += "</tbody>\n</table></div>\n";
  }

  void block(const MathDisplay& m, std::string& out) {
    out += "<div class=\"math-display\" data-tex=\"" + escape_html(m.tex) + "\"" + label_attr(m.labels) + ">";
    extra_anchors(m.labels, out);
    math(m.tex, true, out);
    if (!m.number.empty()) out += "<span class=\"equation-number\">(" + escape_html(m.number) + ")</span>";
    out += "</div>\n";
  }

  void block(const Quote& q, std::string& out) {
    out += "<blockquote>\n";
    blocks(q.children, out);
    out += "</blockquote>\n";
  }

  void block(const Verbatim& v, std::string& out) {
    out += "<pre class=\"verbatim\"><code>" + escape_html(v.text) + "</code></pre>\n";
  }

  void block(const UnknownEnvironment& u, std::string& out) {
    out += "<pre class=\"unknown-environment\" data-environment=\"" + escape_html(u.name) +
           "\" title=\"Unsupported environment shown as source\">" + escape_html(u.raw) + "</pre>\n";
  }

  void math(const std::string& tex, bool display, std::string& out) {
    if (tex.empty()) {
      out += display ? "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"block\"></math>"
                     : "<math xmlns=\"http://www.w3.org/1998/Math/MathML\"></math>";
      return;
    }
    const MathRender r = render_math(tex, display);
    if (r.mathml) {
      out += *r.mathml;
      return;
    }
    warn("math-fallback", "math shown as TeX source (" + r.unsupported + "): " + tex.substr(0, 80));
    out += "<span class=\"math-fallback\" title=\"Math shown as TeX source\"><code>" + escape_html(tex) +
           "</code></span>";
  }

  void inlines(const Inlines& list, std::string& out) {
    for (const Inline& i : list) {
      std::visit([&](const auto& node) { inline_node(node, out); }, i.node);
    }
  }

  void inline_node(const Text& t, std::string& out) { out += escape_html(t.text); }

  void inline_node(const Styled& s, std::string& out) {
    std::string open;
    std::string close;
    switch (s.style) {
      case InlineStyle::emphasis: open = "<em>"; close = "</em>"; break;
      case InlineStyle::bold: open = "<strong>"; close = "</strong>"; break;
      case InlineStyle::italic: open = "<i>"; close = "</i>"; break;
      case InlineStyle::monospace: open = "<code>"; close = "</code>"; break;
      case InlineStyle::superscript: open = "<sup>"; close = "</sup>"; break;
      case InlineStyle::subscript: open = "<sub>"; close = "</sub>"; break;
      default:
        open = "<span class=\"" + std::string(to_string(s.style)) + "\">";
        close = "</span>";
        break;
    }
    out += open;
    inlines(s.children, out);
    out += close;
  }

  void inline_node(const MathInline& m, std::string& out) {
    out += "<span class=\"math\" data-tex=\"" + escape_html(m.tex) + "\">";
    math(m.tex, false, out);
    out += "</span>";
  }

  void inline_node(const Ref& r, std::string& out) {
    const std::string shown = r.resolved.value_or("??");
    if (shown == "??") {
      out += "<span class=\"ref unresolved\" data-label=\"" + escape_html(r.key) + "\">?\?</span>";
      return;
    }
    out += "<a class=\"ref\" href=\"#" + anchor_id("label", r.key) + "\">" + escape_html(shown) + "</a>";
  }

  void inline_node(const Cite& c, std::string& out) {
    const bool resolved = !c.resolved.empty();
    out += resolved ? "<span class=\"cite\">[" : "<span class=\"cite unresolved\">[";
    for (std::size_t i = 0; i < c.keys.size(); ++i) {
      if (i > 0) out += ", ";
      if (resolved && i < c.resolved.size() && !c.resolved[i].empty()) {
        out += "<a href=\"#" + anchor_id("bib", c.keys[i]) + "\">" + escape_html(c.resolved[i]) + "</a>";
      } else {
        out += escape_html(c.keys[i]);
      }
    }
    if (!c.note.empty()) out += ", " + escape_html(c.note);
    out += "]</span>";
  }

  void inline_node(const Link& l, std::string& out) {
    if (!safe_url(l.url)) {
      warn("unsafe-link", "link with a script or data URL rendered as text");
      inlines(l.text, out);
      return;
    }
    out += "<a href=\"" + escape_html(l.url) + "\">";
    inlines(l.text, out);
    out += "</a>";
  }

  void inline_node(const Image& img, std::string& out) {
    if (!img.alt) {
      warn("missing-alt-text", "image '" + img.path + "' has no alt text");
    }
    assets_.push_back(Asset{img.path, in_figure_ ? "figure" : "inline-image"});
    out += "<img src=\"" + escape_html(img.path) + "\" alt=\"" + escape_html(img.alt.value_or("")) + "\"/>";
  }

  void inline_node(const UnknownCommand& u, std::string& out) {
    out += "<span class=\"unknown-command\" title=\"Unsupported command shown as source\">" +
           escape_html(u.raw) + "</span>";
  }

  void inline_node(const Footnote& f, std::string& out) {
    pending_footnotes_.push_back(&f);
    const std::string n = std::to_string(pending_footnotes_.size());
    out += "<sup class=\"footnote-ref\"><a href=\"#fn-" + n + "\" id=\"fnref-" + n + "\" role=\"doc-noteref\">" + n +
           "</a></sup>";
  }

  void inline_node(const Code& c, std::string& out) { out += "<code>" + escape_html(c.raw) + "</code>"; }

  void inline_node(const LineBreak&, std::string& out) { out += "<br/>"; }

  void footnotes(std::string& out) {
    if (pending_footnotes_.empty()) return;
    out += "<aside class=\"footnotes\" role=\"doc-endnotes\" aria-label=\"Footnotes\">\n<ol>\n";
    // Footnotes may nest; the list grows while it is being rendered.
    for (std::size_t i = 0; i < pending_footnotes_.size(); ++i) {
      const std::string n = std::to_string(i + 1);
      out += "<li id=\"fn-" + n + "\">";
      blocks(pending_footnotes_[i]->content, out);
      out += "<a href=\"#fnref-" + n + "\" class=\"footnote-back\" aria-label=\"Back to text\">↩</a></li>\n";
    }
    out += "</ol>\n</aside>\n";
  }

  const Document& doc_;
  const EmitOptions& options_;
  Diagnostics warnings_;
  std::vector<Asset> assets_;
  std::vector<const Footnote*> pending_footnotes_;
  bool in_figure_ = false;
};

}  // namespace

HtmlArtifact emit(const Document& doc, const EmitOptions& options) { return Emitter(doc, options).run(); }

}  // namespace texhtml
