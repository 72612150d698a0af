"""Regenerate the bundled bitmap assets in src/cmolsim/data/.

Renders DejaVu Sans (shipped with matplotlib) and box-downsamples to binary
images. Only needed when changing the assets; the package never imports this.

    python tools/make_assets.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib
import numpy as np
from PIL import Image, ImageDraw, ImageFont

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from cmolsim.encoding import write_image_set  # noqa: E402

FONT_DIR = Path(matplotlib.__file__).parent / "mpl-data" / "fonts" / "ttf"
OUT = Path(__file__).resolve().parents[1] / "src" / "cmolsim" / "data"

# 25 capitals, 25 lower case, 10 digits and 4 symbols = 64 glyphs
GLYPHS = list("ABCDEFGHIJKLMNOPQRSTUVWXY") + list("abcdefghijklmnopqrstuvwxy") \
    + list("0123456789") + ["+", "-", "/", "\\"]


def render_native(ch, size=8, font_file="DejaVuSans.ttf", thresh=0.45):
    """Largest hinted rendering whose ink box fits ``size`` x ``size``, centered."""
    best = None
    for fs in range(4, 8 * size):
        font = ImageFont.truetype(str(FONT_DIR / font_file), fs)
        canvas = Image.new("L", (8 * size, 8 * size), 0)
        ImageDraw.Draw(canvas).text((2 * size, size), ch, fill=255, font=font)
        bbox = canvas.getbbox()
        if bbox is None:
            continue
        if max(bbox[2] - bbox[0], bbox[3] - bbox[1]) > size:
            break
        best = canvas.crop(bbox)
    arr = np.asarray(best, dtype=float) / 255.0
    out = np.zeros((size, size), np.uint8)
    h, w = arr.shape
    r0, c0 = (size - h) // 2, (size - w) // 2
    out[r0:r0 + h, c0:c0 + w] = arr >= thresh
    return out


def render_fitted(ch, size, font_file, margin=0, thresh=0.35, scale=16):
    """Fit the glyph's ink box into a ``size`` x ``size`` cell and box-downsample."""
    font = ImageFont.truetype(str(FONT_DIR / font_file), 200)
    canvas = Image.new("L", (400, 400), 0)
    ImageDraw.Draw(canvas).text((100, 50), ch, fill=255, font=font)
    glyph = canvas.crop(canvas.getbbox())
    inner = (size - 2 * margin) * scale
    k = inner / max(glyph.size)
    gw, gh = max(1, round(glyph.size[0] * k)), max(1, round(glyph.size[1] * k))
    glyph = glyph.resize((gw, gh), Image.LANCZOS)
    cell = Image.new("L", (size * scale, size * scale), 0)
    cell.paste(glyph, ((size * scale - gw) // 2, (size * scale - gh) // 2))
    arr = np.asarray(cell, dtype=float) / 255.0
    blocks = arr.reshape(size, scale, size, scale).mean(axis=(1, 3))
    return (blocks >= thresh).astype(np.uint8)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    glyphs = [render_native(c) for c in GLYPHS]
    labels = [{"+": "plus", "-": "minus", "/": "slash", "\\": "backslash"}.get(c, c) for c in GLYPHS]
    write_image_set(OUT / "glyphs64.txt", labels, glyphs,
                    header="64 8x8 glyphs rendered from DejaVu Sans")
    letters = [render_fitted(c, 32, "DejaVuSans.ttf", margin=2, thresh=0.5) for c in "ABCD"]
    write_image_set(OUT / "letters_abcd.txt", list("ABCD"), letters,
                    header="32x32 letters rendered from DejaVu Sans")


if __name__ == "__main__":
    main()
