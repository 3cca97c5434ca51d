"""Published full-scale figures shipped as reference values, and rendering of
the official shared-task BLEU table.

None of these numbers can be reproduced at desk scale; they are kept so
reports can be put side by side with them.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path

from biomt.errors import FixtureError
from biomt.pipeline import render_columns

DIRECTIONS = ("EN/ES", "EN/PT", "ES/EN", "PT/EN")

# Original corpus sizes, as printed (some rounded to millions).
CORPUS_SIZES = {
    "EN/ES": {
        "Books": "93,471",
        "UFAL": "286,779",
        "Full-text Scielo": "425,631",
        "JRC-Acquis": "805,757",
        "BVS": "737,818",
    },
    "EN/PT": {
        "Full-text Scielo": "2.86M",
        "JRC-Acquis": "1.64M",
        "EMEA": "1.08M",
        "CAPES-BDTD": "950,252",
        "BVS": "631,946",
    },
}
CORPUS_TOTALS = {"EN/ES": "2.37M", "EN/PT": "7.19M"}

UMLS_CONCEPTS = {"EN/ES": 14_399, "EN/PT": 26_194}

FINAL_SPLITS = {"EN/ES": ("2.35M", 22_670), "EN/PT": ("7.17M", 24_206)}


@dataclass(frozen=True)
class OfficialScore:
    team: str
    direction: str
    score: Decimal


def _fixture_path() -> Path:
    return Path(str(resources.files("biomt") / "data" / "official_bleu.tsv"))


def load_official_scores(path=None) -> list[OfficialScore]:
    path = Path(path) if path is not None else _fixture_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FixtureError(path, exc.strerror or "unreadable") from None
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != ["team", "direction", "score"]:
        raise FixtureError(path, "expected header team/direction/score")
    scores = []
    for line_no, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3 or cols[1] not in DIRECTIONS:
            raise FixtureError(path, f"line {line_no}: bad row {line!r}")
        try:
            value = Decimal(cols[2])
        except InvalidOperation:
            raise FixtureError(path, f"line {line_no}: bad score {cols[2]!r}") from None
        scores.append(OfficialScore(cols[0], cols[1], value))
    if not scores:
        raise FixtureError(path, "no rows")
    return scores


def best_by_direction(scores: list[OfficialScore]) -> dict[str, Decimal]:
    best: dict[str, Decimal] = {}
    for s in scores:
        if s.direction not in best or s.score > best[s.direction]:
            best[s.direction] = s.score
    return best


def report_official_scores(direction: str | None = None, path=None) -> str:
    """Render the official BLEU table (team x direction); the best score in
    each direction is starred, ties included."""
    scores = load_official_scores(path)
    if direction is not None:
        direction = direction.upper()
        if direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {direction!r}; choose from {', '.join(DIRECTIONS)}")
    columns = [direction] if direction else [d for d in DIRECTIONS if any(s.direction == d for s in scores)]
    best = best_by_direction(scores)

    teams: dict[str, dict[str, Decimal]] = {}
    for s in scores:
        teams.setdefault(s.team, {})[s.direction] = s.score
    body = []
    for team, by_dir in teams.items():
        if direction and direction not in by_dir:
            continue
        cells = []
        for d in columns:
            v = by_dir.get(d)
            cells.append("-" if v is None else f"{v}{'*' if v == best[d] else ' '}")
        body.append([team] + cells)
    return render_columns(["Team, Runs"] + columns, body) + "* best score for the direction\n"
