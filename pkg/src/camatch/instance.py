"""Course-allocation instances: applicants with tied preference lists over
courses, per-side quotas, plus the line-oriented text formats for instances,
priority orderings, and matchings."""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    InstanceSemanticError,
    InstanceSyntaxError,
    OrderingError,
)

MAX_QUOTA = 2**31 - 1

# Characters with syntactic meaning in the file formats; ids may not use them.
_ID_FORBIDDEN = set("()=#")

PreferenceList = tuple[frozenset[str], ...]
PriorityOrdering = tuple[str, ...]


def _check_id(token: str, role: str) -> None:
    if not token or any(ch.isspace() or ch in _ID_FORBIDDEN for ch in token):
        raise InstanceSemanticError(f"invalid {role} id {token!r}")


@dataclass(frozen=True)
class Instance:
    """An immutable allocation instance.

    ``applicants`` and ``courses`` fix the display order; ``quota`` maps each
    applicant to the number of courses she may take, ``capacity`` each course
    to the number of seats. ``prefs[a]`` is the tuple of indifference classes
    of ``a``, most preferred first; only nonempty classes are stored.
    """

    applicants: tuple[str, ...]
    courses: tuple[str, ...]
    quota: dict[str, int]
    capacity: dict[str, int]
    prefs: dict[str, PreferenceList]

    @staticmethod
    def build(
        courses: Sequence[tuple[str, int]],
        applicants: Sequence[tuple[str, int, Sequence[Iterable[str]]]],
    ) -> "Instance":
        """Validate and construct an instance.

        ``courses`` holds (id, capacity) pairs, ``applicants`` holds
        (id, quota, ties) triples where ``ties`` is a sequence of course-id
        groups, most preferred first. Raises InstanceSemanticError on
        duplicate ids, dangling course references, out-of-range quotas,
        empty ties, or a course appearing twice in a preference list.
        """
        course_ids: list[str] = []
        capacity: dict[str, int] = {}
        for cid, cap in courses:
            _check_id(cid, "course")
            if cid in capacity:
                raise InstanceSemanticError(f"duplicate course id {cid!r}")
            if not 1 <= cap <= MAX_QUOTA:
                raise InstanceSemanticError(
                    f"course {cid!r} quota {cap} out of range [1, {MAX_QUOTA}]")
            course_ids.append(cid)
            capacity[cid] = cap

        applicant_ids: list[str] = []
        quota: dict[str, int] = {}
        prefs: dict[str, PreferenceList] = {}
        for aid, b, ties in applicants:
            _check_id(aid, "applicant")
            if aid in quota or aid in capacity:
                raise InstanceSemanticError(f"duplicate id {aid!r}")
            if not 1 <= b <= MAX_QUOTA:
                raise InstanceSemanticError(
                    f"applicant {aid!r} quota {b} out of range [1, {MAX_QUOTA}]")
            seen: set[str] = set()
            tie_sets: list[frozenset[str]] = []
            for group in ties:
                group = list(group)
                if not group:
                    raise InstanceSemanticError(
                        f"applicant {aid!r} has an empty tie group")
                for cid in group:
                    if cid not in capacity:
                        raise InstanceSemanticError(
                            f"applicant {aid!r} ranks unknown course {cid!r}")
                    if cid in seen:
                        raise InstanceSemanticError(
                            f"course {cid!r} appears twice in {aid!r}'s preference list")
                    seen.add(cid)
                tie_sets.append(frozenset(group))
            applicant_ids.append(aid)
            quota[aid] = b
            prefs[aid] = tuple(tie_sets)

        return Instance(tuple(applicant_ids), tuple(course_ids),
                        quota, capacity, prefs)

    @cached_property
    def _tie_index(self) -> dict[str, dict[str, int]]:
        return {
            a: {c: t for t, tie in enumerate(ties) for c in tie}
            for a, ties in self.prefs.items()
        }

    def acceptable(self, applicant: str) -> frozenset[str]:
        """All courses appearing in the applicant's preference list."""
        return frozenset(self._tie_index[applicant])

    def tie_of(self, applicant: str, course: str) -> int:
        """0-based indifference-class index of ``course`` for ``applicant``."""
        try:
            return self._tie_index[applicant][course]
        except KeyError:
            raise ValueError(
                f"course {course!r} is not acceptable to {applicant!r}") from None

    def total_quota(self) -> int:
        return sum(self.quota[a] for a in self.applicants)

    def fingerprint(self) -> str:
        return hashlib.sha256(serialize_instance(self).encode()).hexdigest()


# ----------------------------------------------------------------------
# Text formats.
#
# Instance file: first content line `courses: c1=2 c2=1 ...`, then one
# line per applicant `applicant a1 quota=2 prefs: ( c1 c2 ) ( c3 )`.
# `#` starts a comment anywhere. Ordering file: applicant ids separated
# by whitespace. Matching file: one `applicant course` pair per line.
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[list[_Token]]:
    lines: list[list[_Token]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        toks = [
            _Token(m.group(), lineno, m.start() + 1)
            for m in re.finditer(r"\S+", content)
        ]
        if toks:
            lines.append(toks)
    return lines


def _syntax(tok: _Token, message: str) -> InstanceSyntaxError:
    return InstanceSyntaxError(message, tok.line, tok.column)


def _parse_int(tok: _Token, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise _syntax(tok, f"{what} must be an integer, got {text!r}") from None


def parse_instance(text: str) -> Instance:
    """Parse an instance file.

    Raises InstanceSyntaxError (with line/column) for malformed text and
    InstanceSemanticError for rule violations such as duplicate ids or
    unknown courses.
    """
    lines = _tokenize(text)
    if not lines:
        raise InstanceSyntaxError("missing 'courses:' line", 1, 1)

    header = lines[0]
    if header[0].text != "courses:":
        raise _syntax(header[0], "expected 'courses:'")
    courses: list[tuple[str, int]] = []
    for tok in header[1:]:
        if "=" not in tok.text:
            raise _syntax(tok, f"expected <id>=<quota>, got {tok.text!r}")
        cid, _, qtext = tok.text.partition("=")
        cap = _parse_int(tok, qtext, f"quota of course {cid!r}")
        courses.append((cid, cap))

    applicants: list[tuple[str, int, list[list[str]]]] = []
    for line in lines[1:]:
        toks = iter(line)
        kw = next(toks)
        if kw.text != "applicant":
            raise _syntax(kw, "expected 'applicant'")
        def take(expect: str) -> _Token:
            try:
                return next(toks)
            except StopIteration:
                raise _syntax(line[-1], f"expected {expect}") from None

        aid = take("an applicant id")
        quota_tok = take("quota=<n>")
        if not quota_tok.text.startswith("quota="):
            raise _syntax(quota_tok, "expected quota=<n>")
        b = _parse_int(quota_tok, quota_tok.text[len("quota="):],
                       f"quota of applicant {aid.text!r}")
        prefs_kw = take("'prefs:'")
        if prefs_kw.text != "prefs:":
            raise _syntax(prefs_kw, "expected 'prefs:'")

        ties: list[list[str]] = []
        group: list[str] | None = None
        for tok in toks:
            if tok.text == "(":
                if group is not None:
                    raise _syntax(tok, "nested '(' in tie group")
                group = []
            elif tok.text == ")":
                if group is None:
                    raise _syntax(tok, "')' without matching '('")
                ties.append(group)
                group = None
            elif group is None:
                raise _syntax(tok, f"expected '(', got {tok.text!r}")
            else:
                group.append(tok.text)
        if group is not None:
            raise _syntax(line[-1], "unclosed tie group")
        applicants.append((aid.text, b, ties))

    return Instance.build(courses, applicants)


def format_preference_list(ties: Sequence[Iterable[str]]) -> str:
    """Render tie groups as `( c1 c2 ) ( c3 )`; courses sorted within a tie."""
    return " ".join("( " + " ".join(sorted(tie)) + " )" for tie in ties)


def serialize_instance(instance: Instance) -> str:
    """Canonical text for an instance; courses within a tie are sorted."""
    out = [" ".join(
        ["courses:"] + [f"{c}={instance.capacity[c]}" for c in instance.courses])]
    for a in instance.applicants:
        groups = format_preference_list(instance.prefs[a])
        line = f"applicant {a} quota={instance.quota[a]} prefs:"
        out.append(line + " " + groups if groups else line)
    return "\n".join(out) + "\n"


def parse_ordering(text: str) -> PriorityOrdering:
    return tuple(tok.text for line in _tokenize(text) for tok in line)


def serialize_ordering(ordering: PriorityOrdering) -> str:
    return " ".join(ordering) + "\n"


def check_ordering(instance: Instance, ordering: Sequence[str]) -> str | None:
    """Return an error message unless each applicant a occurs exactly
    quota(a) times in the ordering, else None."""
    for x in ordering:
        if x not in instance.quota:
            return f"unknown applicant {x!r} in ordering"
    counts = {a: 0 for a in instance.applicants}
    for x in ordering:
        counts[x] += 1
    for a in instance.applicants:
        if counts[a] != instance.quota[a]:
            return (f"{a} appears {counts[a]} time(s) in the ordering, "
                    f"needs {instance.quota[a]}")
    return None


def validate_ordering(instance: Instance, ordering: Sequence[str]) -> None:
    error = check_ordering(instance, ordering)
    if error is not None:
        raise OrderingError(error)


def parse_matching_pairs(text: str, instance: Instance) -> tuple[tuple[str, str], ...]:
    """Parse a matching file into (applicant, course) pairs.

    Ids must exist in the instance and no pair may repeat; pairs keep file
    order (matchings themselves are order-insensitive).
    """
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for line in _tokenize(text):
        if len(line) != 2:
            raise _syntax(line[0], "expected '<applicant-id> <course-id>'")
        a, c = line[0].text, line[1].text
        if a not in instance.quota:
            raise InstanceSemanticError(f"unknown applicant {a!r} in matching")
        if c not in instance.capacity:
            raise InstanceSemanticError(f"unknown course {c!r} in matching")
        if (a, c) in seen:
            raise InstanceSemanticError(f"duplicate pair ({a}, {c}) in matching")
        seen.add((a, c))
        pairs.append((a, c))
    return tuple(pairs)


def serialize_matching_pairs(pairs: Iterable[tuple[str, str]]) -> str:
    lines = [f"{a} {c}" for a, c in sorted(pairs)]
    return "\n".join(lines) + ("\n" if lines else "")


# ----------------------------------------------------------------------
# Random instances.
# ----------------------------------------------------------------------

def generate_random_instance(
    n1: int,
    n2: int,
    max_b: int,
    max_q: int,
    tie_density: float,
    seed: int,
) -> Instance:
    """Generate a random valid instance, deterministically for a fixed seed.

    Each course is acceptable to each applicant with probability 1/2; the
    acceptable set is shuffled and split into ties, where each course joins
    the previous tie with probability ``tie_density`` (0 gives strict
    preferences, values near 1 give long ties).
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("n1 and n2 must be nonnegative")
    if max_b < 1 or max_q < 1:
        raise ValueError("max_b and max_q must be at least 1")
    if not 0.0 <= tie_density <= 1.0:
        raise ValueError("tie_density must lie in [0, 1]")

    rng = random.Random(seed)
    course_ids = [f"c{j}" for j in range(1, n2 + 1)]
    courses = [(c, 1 + rng.randrange(max_q)) for c in course_ids]

    applicants: list[tuple[str, int, list[list[str]]]] = []
    for i in range(1, n1 + 1):
        b = 1 + rng.randrange(max_b)
        acceptable = [c for c in course_ids if rng.random() < 0.5]
        # Fisher-Yates, explicit so the draw sequence stays pinned.
        for k in range(len(acceptable) - 1, 0, -1):
            j = rng.randrange(k + 1)
            acceptable[k], acceptable[j] = acceptable[j], acceptable[k]
        ties: list[list[str]] = []
        for c in acceptable:
            if ties and rng.random() < tie_density:
                ties[-1].append(c)
            else:
                ties.append([c])
        applicants.append((f"a{i}", b, ties))

    return Instance.build(courses, applicants)
