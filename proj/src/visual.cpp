#include "typostrike/visual.hpp"

#include <algorithm>
#include <cmath>

#include "bitmap_font_data.hpp"
#include "typostrike/digest.hpp"
#include "typostrike/error.hpp"

namespace typostrike {

namespace {

constexpr std::string_view kAnchorNames[] = {
    "top_left",    "top_center",    "top_right",    "middle_left", "middle_center",
    "middle_right", "bottom_left", "bottom_center", "bottom_right",
};

const std::array<std::uint8_t, detail::kGlyphHeight>& glyph(char c) {
  if (c < detail::kFirstGlyph || c > detail::kLastGlyph) c = '?';
  return detail::kGlyphRows[static_cast<std::size_t>(c - detail::kFirstGlyph)];
}

std::uint8_t blend(std::uint8_t under, std::uint8_t over, std::uint8_t alpha) {
  return static_cast<std::uint8_t>((under * (255 - alpha) + over * alpha + 127) / 255);
}

Rgb blend(Rgb under, Rgba over) {
  return {blend(under.r, over.r, over.a), blend(under.g, over.g, over.a), blend(under.b, over.b, over.a)};
}

nlohmann::ordered_json rgba_json(const Rgba& c) { return {c.r, c.g, c.b, c.a}; }

Rgba rgba_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_array() || j.size() != 4) throw DataError("colour must be an [r, g, b, a] array");
  return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>(), j[3].get<std::uint8_t>()};
}

std::vector<std::string> split_on_spaces(const std::string& text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

}  // namespace

std::string_view to_string(Anchor anchor) { return kAnchorNames[static_cast<int>(anchor)]; }

Anchor parse_anchor(std::string_view name) {
  for (int i = 0; i < 9; ++i) {
    if (kAnchorNames[i] == name) return static_cast<Anchor>(i);
  }
  throw DataError("unknown anchor '" + std::string(name) + "'");
}

void OverlaySpec::validate() const {
  if (text.empty()) throw DataError("overlay text must be non-empty");
  if (!(relative_height > 0.0 && relative_height <= 0.5)) throw DataError("relative height must lie in (0, 0.5]");
  if (!(range.begin >= 0.0 && range.end <= 1.0 && range.begin <= range.end)) {
    throw DataError("frame range must be an interval within [0, 1]");
  }
}

nlohmann::ordered_json OverlaySpec::to_json() const {
  nlohmann::ordered_json j;
  j["text"] = text;
  j["anchor"] = std::string(to_string(anchor));
  j["relative_height"] = relative_height;
  j["foreground"] = rgba_json(foreground);
  j["background"] = rgba_json(background);
  j["frame_range"] = {range.begin, range.end};
  return j;
}

OverlaySpec OverlaySpec::from_json(const nlohmann::ordered_json& j) {
  OverlaySpec spec;
  try {
    spec.text = j.value("text", std::string{});
    if (j.contains("anchor")) spec.anchor = parse_anchor(j.at("anchor").get<std::string>());
    spec.relative_height = j.value("relative_height", spec.relative_height);
    if (j.contains("foreground")) spec.foreground = rgba_from_json(j.at("foreground"));
    if (j.contains("background")) spec.background = rgba_from_json(j.at("background"));
    if (j.contains("frame_range")) {
      const auto& r = j.at("frame_range");
      spec.range = {r.at(0).get<double>(), r.at(1).get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("overlay spec: ") + e.what());
  }
  return spec;
}

OverlayLayout layout_overlay(int frame_width, int frame_height, const OverlaySpec& spec) {
  spec.validate();
  OverlayLayout layout;
  const double target_px = spec.relative_height * frame_height;
  layout.scale = std::max(1, static_cast<int>(std::lround(target_px / detail::kGlyphHeight)));
  const int s = layout.scale;
  const int pad = 2 * s;
  const int char_w = detail::kGlyphWidth * s;
  const int max_chars = (frame_width - 2 * pad) / char_w;
  if (max_chars < 1) throw DataError("overlay overflow");

  if (static_cast<int>(spec.text.size()) <= max_chars) {
    layout.lines = {spec.text};
  } else {
    std::string line;
    for (const auto& word : split_on_spaces(spec.text)) {
      if (static_cast<int>(word.size()) > max_chars) throw DataError("overlay overflow");
      if (line.empty()) {
        line = word;
      } else if (static_cast<int>(line.size() + 1 + word.size()) <= max_chars) {
        line += " " + word;
      } else {
        layout.lines.push_back(line);
        line = word;
      }
    }
    if (!line.empty()) layout.lines.push_back(line);
    if (layout.lines.size() > 2) throw DataError("overlay overflow");
  }

  std::size_t widest = 0;
  for (const auto& l : layout.lines) widest = std::max(widest, l.size());
  const int n_lines = static_cast<int>(layout.lines.size());
  layout.band.width = static_cast<int>(widest) * char_w + 2 * pad;
  layout.band.height = n_lines * detail::kGlyphHeight * s + (n_lines - 1) * s + 2 * pad;
  if (layout.band.height > frame_height) throw DataError("overlay overflow");

  const int column = static_cast<int>(spec.anchor) % 3;
  const int row = static_cast<int>(spec.anchor) / 3;
  const int free_x = frame_width - layout.band.width;
  const int free_y = frame_height - layout.band.height;
  const int margin_x = std::min(pad, free_x / 2);
  const int margin_y = std::min(pad, free_y / 2);
  layout.band.x = column == 0 ? margin_x : column == 1 ? free_x / 2 : free_x - margin_x;
  layout.band.y = row == 0 ? margin_y : row == 1 ? free_y / 2 : free_y - margin_y;
  return layout;
}

FrameSet overlay_text(const FrameSet& frames, const OverlaySpec& spec) {
  spec.validate();
  frames.validate();
  FrameSet out = frames;
  if (frames.frames.empty() || spec.range.begin == spec.range.end) return out;

  const OverlayLayout layout = layout_overlay(frames.frames[0].width(), frames.frames[0].height(), spec);
  const int s = layout.scale;
  const int pad = 2 * s;
  const auto n = static_cast<double>(frames.frames.size());

  for (std::size_t i = 0; i < out.frames.size(); ++i) {
    const double pos = static_cast<double>(i) / n;
    if (pos < spec.range.begin || pos >= spec.range.end) continue;
    Image& img = out.frames[i];
    const Rect& band = layout.band;
    for (int y = band.y; y < band.y + band.height; ++y) {
      for (int x = band.x; x < band.x + band.width; ++x) img.set(x, y, blend(img.at(x, y), spec.background));
    }
    for (std::size_t li = 0; li < layout.lines.size(); ++li) {
      const std::string& line = layout.lines[li];
      const int line_w = static_cast<int>(line.size()) * detail::kGlyphWidth * s;
      const int x0 = band.x + pad + (band.width - 2 * pad - line_w) / 2;
      const int y0 = band.y + pad + static_cast<int>(li) * (detail::kGlyphHeight + 1) * s;
      for (std::size_t ci = 0; ci < line.size(); ++ci) {
        const auto& rows = glyph(line[ci]);
        const int gx = x0 + static_cast<int>(ci) * detail::kGlyphWidth * s;
        for (int gy = 0; gy < detail::kGlyphHeight; ++gy) {
          for (int col = 0; col < detail::kGlyphWidth; ++col) {
            if (!(rows[gy] & (1u << (detail::kGlyphWidth - 1 - col)))) continue;
            for (int dy = 0; dy < s; ++dy) {
              for (int dx = 0; dx < s; ++dx) {
                const int px = gx + col * s + dx;
                const int py = y0 + gy * s + dy;
                img.set(px, py, blend(img.at(px, py), spec.foreground));
              }
            }
          }
        }
      }
    }
  }
  return out;
}

VisualAttack apply_visual_attack(const FrameSet& frames, const MultiModalPlan& plan, std::string_view template_id,
                                 const OverlaySpec& style, const TemplateRegistry& registry) {
  if (plan.mode == AttackMode::audio_only || plan.mode == AttackMode::text_only) {
    return VisualAttack{frames, nullptr};
  }
  if (!plan.visual_target || plan.visual_target->empty()) {
    throw DataError(std::string(to_string(plan.mode)) + " plan has no visual target");
  }
  OverlaySpec spec = style;
  spec.text = build_phrase(template_id, *plan.visual_target, registry);
  FrameSet rendered = overlay_text(frames, spec);

  nlohmann::ordered_json m;
  m["template_id"] = std::string(template_id);
  m["target"] = *plan.visual_target;
  m["overlay"] = spec.to_json();
  m["font"] = "embedded:dejavu-sans-mono-bold-12px-1bit";
  m["frames_digest"] = frames_digest(rendered);
  return VisualAttack{std::move(rendered), std::move(m)};
}

}  // namespace typostrike
