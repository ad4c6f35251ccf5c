#!/usr/bin/env python3
"""Regenerates src/bitmap_font_data.hpp from DejaVu Sans Mono Bold.

The glyphs are rasterized once at 12 px and thresholded to one bit per
pixel, so the rendered overlay never depends on the host font stack.
"""
import sys

import numpy as np
from PIL import Image, ImageDraw, ImageFont

FONT = "/usr/share/fonts/truetype/dejavu/DejaVuSansMono-Bold.ttf"
CELL_W = 7
THRESHOLD = 110


def main(out_path: str) -> None:
    font = ImageFont.truetype(FONT, 12)
    ascent, descent = font.getmetrics()
    full_h = ascent + descent
    bitmaps = []
    for code in range(32, 127):
        im = Image.new("L", (CELL_W, full_h), 0)
        ImageDraw.Draw(im).text((0, 0), chr(code), font=font, fill=255)
        bitmaps.append(np.array(im) >= THRESHOLD)
    inked = [r for b in bitmaps for r in range(full_h) if b[r].any()]
    top, bottom = min(inked), max(inked)
    rows = bottom - top + 1
    with open(out_path, "w") as f:
        f.write("// Generated by tools/gen_font.py from DejaVu Sans Mono Bold (12 px).\n")
        f.write("// DejaVu fonts are distributed under the Bitstream Vera license.\n")
        f.write("#pragma once\n\n#include <array>\n#include <cstdint>\n\n")
        f.write("namespace typostrike::detail {\n\n")
        f.write(f"inline constexpr int kGlyphWidth = {CELL_W};\n")
        f.write(f"inline constexpr int kGlyphHeight = {rows};\n")
        f.write("inline constexpr char kFirstGlyph = ' ';\n")
        f.write("inline constexpr char kLastGlyph = '~';\n\n")
        f.write("// One row per byte, bit 6 is the leftmost column.\n")
        f.write(f"inline constexpr std::array<std::array<std::uint8_t, {rows}>, 95> kGlyphRows = {{{{\n")
        for code, b in zip(range(32, 127), bitmaps):
            vals = []
            for r in range(top, bottom + 1):
                v = 0
                for c in range(CELL_W):
                    if b[r][c]:
                        v |= 1 << (CELL_W - 1 - c)
                vals.append(f"0x{v:02x}")
            ch = chr(code)
            label = ch if ch not in "\\" else "backslash"
            f.write(f"    {{{{{', '.join(vals)}}}}},  // {label}\n")
        f.write("}};\n\n}  // namespace typostrike::detail\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/bitmap_font_data.hpp")
