#!/usr/bin/env python3
"""Regenerate crates/core/data/emoji_table.tsv.

Scalars are taken from every fully-qualified emoji sequence known to the
`emoji` package; names come from the Unicode Character Database bundled
with the running Python. ASCII scalars, joiners, variation selectors,
the combining keycap and tag characters are left out.

    pip install emoji
    python3 scripts/gen_emoji_table.py > crates/core/data/emoji_table.tsv
"""
import re
import sys
import unicodedata

import emoji

SKIP = {0x200D, 0xFE0E, 0xFE0F, 0x20E3}
NAME_OK = re.compile(r"^[A-Z0-9][A-Z0-9 \-]*$")

scalars = set()
for seq in emoji.EMOJI_DATA:
    for ch in seq:
        cp = ord(ch)
        if cp < 0x80 or cp in SKIP or 0xE0000 <= cp <= 0xE007F:
            continue
        scalars.add(cp)

rows = []
for cp in sorted(scalars):
    name = unicodedata.name(chr(cp), None)
    if name is None or not NAME_OK.match(name):
        continue
    rows.append((cp, name))

out = sys.stdout
out.write("# emoji scalar -> Unicode character name\n")
out.write(f"# version: ucd-{unicodedata.unidata_version}/emoji-{emoji.__version__}\n")
out.write(f"# entries: {len(rows)}\n")
for cp, name in rows:
    out.write(f"{cp:X}\t{name}\n")
