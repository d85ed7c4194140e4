"""Strongest-path (Schulze) fusion of ranked ballots.

A ballot is a sequence of method names, best first; a tie is expressed by
nesting tied names in a sub-list. The fused result is a list of rank
groups, best first, where each group holds mutually tied methods.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def _as_groups(ballot) -> list[list[str]]:
    groups = []
    for entry in ballot:
        if isinstance(entry, str):
            groups.append([entry])
        else:
            groups.append([str(x) for x in entry])
    return groups


def schulze_rank(
    ballots: Iterable[Sequence], candidates: Sequence[str] | None = None
) -> list[list[str]]:
    """Fuse ballots into one order via pairwise majorities and widest paths."""
    normalized = [_as_groups(b) for b in ballots]
    if not normalized:
        raise ValueError("need at least one ballot")

    names: list[str] = []
    if candidates is not None:
        names = list(candidates)
        known = set(names)
        if len(known) != len(names):
            raise ValueError("duplicate candidate name")
        for groups in normalized:
            for group in groups:
                for name in group:
                    if name not in known:
                        raise ValueError(f"unknown method in ballot: {name!r}")
    else:
        seen = set()
        for groups in normalized:
            for group in groups:
                for name in group:
                    if name not in seen:
                        seen.add(name)
                        names.append(name)
        names.sort()

    index = {name: i for i, name in enumerate(names)}
    k = len(names)
    prefer = np.zeros((k, k), dtype=np.int64)
    for groups in normalized:
        flat = [name for group in groups for name in group]
        if len(set(flat)) != len(flat):
            raise ValueError("a method appears more than once in a ballot")
        for gi, group in enumerate(groups):
            above = [index[n] for later in groups[gi + 1 :] for n in later]
            for name in group:
                prefer[index[name], above] += 1

    strength = np.where(prefer > prefer.T, prefer, 0)
    for i in range(k):
        strength = np.maximum(strength, np.minimum(strength[:, i : i + 1], strength[i : i + 1, :]))
    beats = strength > strength.T
    wins = beats.sum(axis=1)

    order = sorted(range(k), key=lambda i: (-wins[i], names[i]))
    ranked: list[list[str]] = []
    last_wins = None
    for i in order:
        if ranked and wins[i] == last_wins:
            ranked[-1].append(names[i])
        else:
            ranked.append([names[i]])
            last_wins = wins[i]
    return ranked


def parse_ballots(text: str) -> list[list[str]]:
    """One ballot per line, comma-separated method names, best first."""
    ballots = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        ballots.append([part.strip() for part in line.split(",") if part.strip()])
    if not ballots:
        raise ValueError("ballot file holds no ballots")
    return ballots
