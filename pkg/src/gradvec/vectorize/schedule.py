"""How many paths each epoch appends."""

from __future__ import annotations

from dataclasses import dataclass


def schedule_clamp(i: int, cap: int) -> int:
    """``clamp(2**(i-2), 1, cap)`` for epoch index ``i >= 1``."""
    if i < 1 or cap < 1:
        raise ValueError("epoch index and cap must be >= 1")
    grow = 1 if i < 2 else 1 << (i - 2)
    return max(1, min(grow, cap))


def expand_clamp(cap: int, total: int) -> list[int]:
    """Clamp schedule truncated so the counts sum to exactly ``total``."""
    if total < 1:
        raise ValueError("schedule total must be >= 1")
    out: list[int] = []
    remaining = total
    i = 1
    while remaining > 0:
        n = min(schedule_clamp(i, cap), remaining)
        out.append(n)
        remaining -= n
        i += 1
    return out


def parse_schedule(spec: str) -> list[int]:
    """Parse ``"1,1,2,4"`` or ``"clamp:cap=32,total=256"``."""
    spec = spec.strip()
    if spec.startswith("clamp:"):
        opts = {}
        for item in spec[len("clamp:"):].split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"bad schedule option {item!r}")
            opts[key.strip()] = int(value)
        unknown = set(opts) - {"cap", "total"}
        if unknown or "total" not in opts:
            raise ValueError(f"clamp schedule needs total= and optional cap=, got {spec!r}")
        return expand_clamp(opts.get("cap", 32), opts["total"])
    counts = [int(x) for x in spec.split(",") if x.strip()]
    if not counts or any(n < 1 for n in counts):
        raise ValueError(f"schedule entries must be positive integers, got {spec!r}")
    return counts


@dataclass(frozen=True)
class EpochSchedule:
    counts: tuple[int, ...]
    iterations_per_epoch: int = 500

    def __post_init__(self):
        if not self.counts or any(n < 1 for n in self.counts):
            raise ValueError("every epoch must add at least one path")
        if self.iterations_per_epoch < 1:
            raise ValueError("iterations_per_epoch must be positive")

    @classmethod
    def parse(cls, spec: str, iterations_per_epoch: int = 500) -> "EpochSchedule":
        return cls(tuple(parse_schedule(spec)), iterations_per_epoch)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def checkpoints(self) -> list[int]:
        """Cumulative path count after each epoch."""
        out, acc = [], 0
        for n in self.counts:
            acc += n
            out.append(acc)
        return out
