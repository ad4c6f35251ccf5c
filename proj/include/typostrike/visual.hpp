#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "typostrike/image.hpp"
#include "typostrike/injection.hpp"
#include "typostrike/templates.hpp"

namespace typostrike {

enum class Anchor {
  top_left, top_center, top_right,
  middle_left, middle_center, middle_right,
  bottom_left, bottom_center, bottom_right,
};

std::string_view to_string(Anchor anchor);
Anchor parse_anchor(std::string_view name);

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  bool operator==(const Rgba&) const = default;
};

// Fractional interval [begin, end) over frame positions i / frame_count.
struct FrameRange {
  double begin = 0.0;
  double end = 1.0;
  bool operator==(const FrameRange&) const = default;
};

struct OverlaySpec {
  std::string text;
  Anchor anchor = Anchor::bottom_center;
  double relative_height = 0.08;
  Rgba foreground{255, 255, 255, 255};
  Rgba background{0, 0, 0, 160};
  FrameRange range;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static OverlaySpec from_json(const nlohmann::ordered_json& j);

  bool operator==(const OverlaySpec&) const = default;
};

struct Rect {
  int x = 0, y = 0, width = 0, height = 0;
  bool contains(int px, int py) const { return px >= x && px < x + width && py >= y && py < y + height; }
  bool operator==(const Rect&) const = default;
};

// Where and how big the text lands on a frame of the given size.
struct OverlayLayout {
  Rect band;
  int scale = 1;  // integer glyph magnification
  std::vector<std::string> lines;
};

// Throws DataError("overlay overflow") when the text does not fit on two
// lines.
OverlayLayout layout_overlay(int frame_width, int frame_height, const OverlaySpec& spec);

// Draws the text with the embedded bitmap font. Only pixels inside the band
// change, and only on frames inside spec.range.
FrameSet overlay_text(const FrameSet& frames, const OverlaySpec& spec);

struct VisualAttack {
  FrameSet frames;
  nlohmann::ordered_json manifest;  // null when the plan has no visual carrier
};

// Renders the carrier phrase for plan.visual_target on every frame. Plans
// without a visual carrier (audio_only, text_only) return the input frames.
VisualAttack apply_visual_attack(const FrameSet& frames, const MultiModalPlan& plan, std::string_view template_id,
                                 const OverlaySpec& style = {},
                                 const TemplateRegistry& registry = TemplateRegistry::builtin());

}  // namespace typostrike
