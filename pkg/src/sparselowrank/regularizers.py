"""Concave rank surrogates g(sigma) and their supergradients.

Every value returned here already carries the global penalty ``lam``, i.e.
``eval_g`` gives ``lam * g(sigma)`` and ``supergradient`` gives
``lam * dg(sigma)``.  For SCAD and MCP ``lam`` also sets the knot positions,
as in their usual definitions.

The piecewise family has a linear supergradient through the knots
``(0, 2), (p1, a1 + a2), (p2, a2), (p3, 0)`` and is zero beyond ``p3``.  Its
value is the running integral of that supergradient.
"""
from dataclasses import dataclass, fields

import numpy as np

FAMILIES = ("nuclear", "lp", "capped_l1", "etp", "scad", "mcp", "piecewise")

# L_p has an unbounded derivative at 0; evaluate it no closer than this.
LP_FLOOR = 1e-8


@dataclass(frozen=True)
class RegularizerSpec:
    family: str = "nuclear"
    lam: float = 1.0
    theta: float = None
    p: float = None
    a1: float = 0.1
    a2: float = 0.2
    p1: float = 5.0
    p2: float = 50.0
    p3: float = 60.0

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ValueError(f"unknown regularizer family {self.family!r}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if fam == "lp" and not (self.p is not None and 0 < self.p < 1):
            raise ValueError("lp needs 0 < p < 1")
        if fam in ("capped_l1", "etp", "mcp") and not (self.theta is not None and self.theta > 0):
            raise ValueError(f"{fam} needs theta > 0")
        if fam == "scad" and not (self.theta is not None and self.theta > 2):
            raise ValueError("scad needs theta > 2")
        if fam == "piecewise":
            if not 0 < self.p1 < self.p2 < self.p3:
                raise ValueError("piecewise needs 0 < p1 < p2 < p3")
            if self.a1 < 0 or self.a2 < 0 or self.a1 + self.a2 > 2:
                raise ValueError("piecewise needs a1, a2 >= 0 and a1 + a2 <= 2")

    @classmethod
    def nuclear(cls, lam=1.0):
        return cls("nuclear", lam)

    @classmethod
    def piecewise(cls, a=(0.1, 0.2), p=(5.0, 50.0, 60.0), lam=1.0):
        return cls("piecewise", lam, a1=a[0], a2=a[1], p1=p[0], p2=p[1], p3=p[2])

    def to_text(self):
        """Serialize as newline-separated ``key=value`` pairs."""
        lines = [f"family={self.family}", f"lambda={self.lam!r}"]
        for key in ("theta", "p"):
            val = getattr(self, key)
            if val is not None:
                lines.append(f"{key}={val!r}")
        if self.family == "piecewise":
            for key in ("a1", "a2", "p1", "p2", "p3"):
                lines.append(f"{key}={getattr(self, key)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_mapping(cls, mapping):
        """Build a spec from string ``key -> value`` pairs (``lambda`` or ``lam``)."""
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, val in mapping.items():
            key = key.strip().lower()
            if key == "lambda":
                key = "lam"
            if key not in known:
                raise ValueError(f"unknown regularizer key {key!r}")
            kwargs[key] = val.strip() if key == "family" else float(val)
        return cls(**kwargs)

    @classmethod
    def from_text(cls, text):
        pairs = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {line!r}")
            pairs[key] = val
        return cls.from_mapping(pairs)


def _piecewise_knots(spec):
    xs = np.array([0.0, spec.p1, spec.p2, spec.p3])
    ys = np.array([2.0, spec.a1 + spec.a2, spec.a2, 0.0])
    return xs, ys


def _check_sigma(sigma):
    s = np.asarray(sigma, dtype=np.float64)
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise ValueError("sigma must be nonnegative")
    return s


def _dg(spec, s):
    lam, th = spec.lam, spec.theta
    fam = spec.family
    if fam == "nuclear":
        return np.full_like(s, lam)
    if fam == "lp":
        return lam * spec.p * np.maximum(s, LP_FLOOR) ** (spec.p - 1.0)
    if fam == "capped_l1":
        # at sigma == theta the right limit (0) is selected
        return np.where(s < th, lam, 0.0)
    if fam == "etp":
        return lam * th / (1.0 - np.exp(-th)) * np.exp(-th * s)
    if fam == "scad":
        return np.where(s <= lam, lam, np.where(s <= th * lam, (th * lam - s) / (th - 1.0), 0.0))
    if fam == "mcp":
        return np.where(s < th * lam, lam - s / th, 0.0)
    xs, ys = _piecewise_knots(spec)
    return lam * np.interp(s, xs, ys, right=0.0)


def _g(spec, s):
    lam, th = spec.lam, spec.theta
    fam = spec.family
    if fam == "nuclear":
        return lam * s
    if fam == "lp":
        return lam * s**spec.p
    if fam == "capped_l1":
        return lam * np.minimum(s, th)
    if fam == "etp":
        return lam / (1.0 - np.exp(-th)) * (1.0 - np.exp(-th * s))
    if fam == "scad":
        mid = (-(s**2) + 2 * th * lam * s - lam**2) / (2 * (th - 1.0))
        return np.where(s <= lam, lam * s, np.where(s <= th * lam, mid, lam**2 * (th + 1) / 2))
    if fam == "mcp":
        return np.where(s < th * lam, lam * s - s**2 / (2 * th), th * lam**2 / 2)
    # piecewise: trapezoid areas of the linear supergradient
    xs, ys = _piecewise_knots(spec)
    cum = np.concatenate([[0.0], np.cumsum(np.diff(xs) * (ys[:-1] + ys[1:]) / 2)])
    seg = np.clip(np.searchsorted(xs, s, side="right") - 1, 0, 3)
    x0 = xs[seg]
    y_at = np.interp(s, xs, ys, right=0.0)
    inside = cum[seg] + (np.minimum(s, xs[3]) - x0) * (ys[seg] + np.where(s < xs[3], y_at, 0.0)) / 2
    return lam * np.where(s >= xs[3], cum[3], inside)


def supergradient(spec, sigma):
    """``lam * dg(sigma)``; scalar in, float out, array in, array out."""
    s = _check_sigma(sigma)
    out = _dg(spec, s)
    return float(out) if out.ndim == 0 else out


def eval_g(spec, sigma):
    """``lam * g(sigma)`` with ``g(0) = 0``."""
    s = _check_sigma(sigma)
    out = _g(spec, s)
    return float(out) if out.ndim == 0 else out


def penalty(spec, sigmas):
    """Sum of ``eval_g`` over a spectrum."""
    return float(np.sum(_g(spec, _check_sigma(sigmas))))


def weight_vector(spec, sigmas):
    """Supergradient weights for a nonincreasing spectrum (result is nondecreasing)."""
    s = _check_sigma(sigmas).ravel()
    if np.any(np.diff(s) > 0):
        raise ValueError("sigmas must be sorted nonincreasing")
    return _dg(spec, s)


def auto_thresholds(sigma_sample):
    """Pick ``(p1, p2, p3)`` as nearest-rank 95th/98th/99th percentiles.

    Only the top 5%, 2% and 1% of the sample then exceed ``p1``, ``p2`` and
    ``p3``.  At least 100 values are required to resolve the 1% level.
    """
    s = np.sort(_check_sigma(sigma_sample).ravel())
    n = s.size
    if n < 100:
        raise ValueError(f"need at least 100 singular values, got {n}")
    top = s[-1]
    if top == 0.0 or s[0] == top:
        raise ValueError("degenerate spectrum: thresholds cannot be separated")
    out = []
    for q in (95, 98, 99):
        rank = int(np.ceil(q / 100.0 * n))
        out.append(float(s[rank - 1]))
    if out[0] == 0.0:
        raise ValueError("degenerate spectrum: 95th percentile is zero")
    nudge = 1e-9 * top
    for i in (1, 2):
        if out[i] <= out[i - 1]:
            out[i] = out[i - 1] + nudge
    return tuple(out)
