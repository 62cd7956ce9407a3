"""Parser for the transcribed process timeline figure in tests/data."""

from __future__ import annotations

import re

from conftest import DATA

LINE = re.compile(r"^(?P<stamp>.{30})  \| +(?P<root>\d*) (?P<marker>-->| ->|go>) +(?P<now>\d+),(?P<delta>\d+) +(?P<text>.*)$")
DETAIL = re.compile(r"^\[(?P<cls>[^:]+): (?:: )?(?P<text>.*)\]$")
KINDS = {"-->": "SIGNPOST", " ->": "DETAIL", "go>": "FORK"}


def figure_rows() -> list[dict]:
    rows = []
    for raw in (DATA / "map1_transcription.txt").read_text().splitlines():
        m = LINE.match(raw)
        assert m, raw
        kind = KINDS[m["marker"]]
        cls, text = None, m["text"]
        if kind == "DETAIL":
            d = DETAIL.match(text)
            cls, text = d["cls"], d["text"]
        rows.append(
            dict(
                kind=kind,
                root=int(m["root"]) if m["root"] else None,
                now=int(m["now"]),
                delta=int(m["delta"]),
                cls=cls,
                text=text,
            )
        )
    return rows


def repaired_deltas(rows: list[dict]) -> list[int]:
    """Subtimes as a strictly increasing per-signpost counter would give
    them; the figure repeats a few values where several details share an
    indentation level."""
    last: dict[int, int] = {}
    out = []
    for r in rows:
        d = 1 if r["kind"] != "DETAIL" else last[r["now"]] + 1
        last[r["now"]] = d
        out.append(d)
    return out
