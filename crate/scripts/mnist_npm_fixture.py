#!/usr/bin/env python3
"""Pack the digits shipped by the `mnist` npm package (v1.1.0) into the
compact fixture used by the glyph-cli acceptance tests.

Usage: npm pack mnist && tar xzf mnist-1.1.0.tgz
       python3 scripts/mnist_npm_fixture.py package/src/digits out.bin.gz

Output (gzip-compressed):
    magic  b"GLYPHDIGITS1"
    for digit 0..=9:
        count: u32 little-endian
        count * 28 * 28 bytes, row-major 8-bit grayscale,
        white background (255) and dark ink (0).
"""
import gzip
import json
import struct
import sys

SIDE = 28


def main(src: str, dst: str) -> None:
    out = bytearray(b"GLYPHDIGITS1")
    for digit in range(10):
        with open(f"{src}/{digit}.json") as fh:
            data = json.load(fh)["data"]
        assert len(data) % (SIDE * SIDE) == 0
        out += struct.pack("<I", len(data) // (SIDE * SIDE))
        out += bytes(255 - round(255 * v) for v in data)
    with gzip.GzipFile(dst, "wb", compresslevel=9, mtime=0) as fh:
        fh.write(out)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
