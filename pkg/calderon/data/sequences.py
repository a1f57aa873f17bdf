import numpy as np
from typing import Iterable
from calderon.utils.errors import DomainError


class Seq:
    """Finitely supported sequence on the integers, stored as a window ``a(offset), ..., a(offset + len - 1)``.

    Entries outside the window are zero. Entries may be real or complex.
    """

    __slots__ = ("offset", "entries")

    def __init__(self, entries: Iterable, offset: int = 0):
        entries = np.asarray(entries)
        if entries.ndim != 1 or entries.size == 0:
            raise DomainError("a sequence window must be a nonempty 1-d array")
        if np.iscomplexobj(entries):
            entries = entries.astype(complex)
        else:
            entries = entries.astype(float)
        if not np.all(np.isfinite(entries)):
            raise DomainError("sequence entries must be finite")
        if int(offset) != offset:
            raise DomainError(f"offset must be an integer, got {offset}")
        entries.flags.writeable = False
        object.__setattr__(self, "offset", int(offset))
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("Seq is immutable")

    def __len__(self):
        return self.entries.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.entries.size)

    @property
    def last(self) -> int:
        return self.offset + self.entries.size - 1

    def is_complex(self) -> bool:
        return np.iscomplexobj(self.entries)

    def __getitem__(self, n):
        n = np.asarray(n)
        local = n - self.offset
        inside = (local >= 0) & (local < self.entries.size)
        out = np.where(inside, self.entries[np.clip(local, 0, self.entries.size - 1)], 0)
        return out if out.ndim else out.item()

    def values_on(self, start: int, stop: int) -> np.ndarray:
        """Entries for n in [start, stop)."""
        return np.asarray(self[np.arange(start, stop)])

    def __abs__(self):
        return Seq(np.abs(self.entries), self.offset)

    def __eq__(self, other):
        if not isinstance(other, Seq):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.offset, self.entries.tobytes()))

    def __repr__(self):
        return f"Seq(offset={self.offset}, entries={np.array2string(self.entries, threshold=8)})"

    def to_dict(self) -> dict:
        if self.is_complex():
            return {
                "offset": self.offset,
                "entries": self.entries.real.tolist(),
                "entries_imag": self.entries.imag.tolist(),
            }
        return {"offset": self.offset, "entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, data: dict):
        unknown = set(data) - {"offset", "entries", "entries_imag"}
        if unknown:
            raise DomainError(f"unexpected keys in sequence: {sorted(unknown)}")
        entries = np.asarray(data["entries"], dtype=float)
        if "entries_imag" in data:
            entries = entries + 1j * np.asarray(data["entries_imag"], dtype=float)
        return cls(entries, data.get("offset", 0))


def harmonic(n: int, start: int = 0) -> Seq:
    """1/(k+1) for k = start, ..., start + n - 1, placed at offset ``start``."""
    k = np.arange(start, start + n)
    return Seq(1.0 / (k + 1.0), start)


def geometric(n: int, ratio: float = 0.5) -> Seq:
    return Seq(ratio ** np.arange(n), 0)


def flat(n: int, value: float = 1.0) -> Seq:
    return Seq(np.full(n, float(value)), 0)


def delta(n: int = 0) -> Seq:
    return Seq([1.0], n)


def random_sequence(rng: np.random.Generator, n: int, complex_entries: bool = False, offset: int = 0) -> Seq:
    entries = rng.standard_normal(n)
    if complex_entries:
        entries = entries + 1j * rng.standard_normal(n)
    return Seq(entries, offset)
