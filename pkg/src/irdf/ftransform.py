"""Strictly increasing transforms of per-letter distortion and their inverses.

Block distortion in this package is always a transform-domain mean mapped
back to raw units, so every transform must come with a genuine inverse.
Parametric kinds invert in closed form; tabulated transforms interpolate
piecewise-linearly and invert by bisection.

A transform may take negative values (the shifted cubic does at 0); nothing
here clamps, only strict monotonicity is enforced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MonotonicityError, OutOfRange

KINDS = ("identity", "power", "sqrt", "shifted_cubic", "exponential", "tabulated")

MONOTONE_SAMPLES = 1024
_TAB_INVERT_TOL = 1e-12
_RANGE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class FTransform:
    """One member of the supported transform families.

    kind/parameter pairs: power needs p > 0, shifted_cubic needs a,
    exponential needs rho > 0, tabulated needs a strictly increasing
    (xi, f(xi)) table. identity and sqrt take no parameters.
    """

    kind: str
    p: float | None = None
    a: float | None = None
    rho: float | None = None
    points: np.ndarray | None = None
    _checked_dmax: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "power":
            if self.p is None or self.p <= 0:
                raise ValueError("power transform needs p > 0")
        if self.kind == "shifted_cubic" and self.a is None:
            raise ValueError("shifted_cubic transform needs a shift a")
        if self.kind == "exponential":
            if self.rho is None or self.rho <= 0:
                raise ValueError("exponential transform needs rho > 0")
        if self.kind == "tabulated":
            pts = np.array(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
                raise ValueError("tabulated transform needs at least two (xi, y) rows")
            if np.any(np.diff(pts[:, 0]) <= 0) or np.any(np.diff(pts[:, 1]) <= 0):
                raise MonotonicityError("tabulated transform must be strictly increasing")
            pts.setflags(write=False)
            object.__setattr__(self, "points", pts)

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls) -> "FTransform":
        return cls("identity")

    @classmethod
    def power(cls, p: float) -> "FTransform":
        return cls("power", p=float(p))

    @classmethod
    def sqrt(cls) -> "FTransform":
        return cls("sqrt")

    @classmethod
    def shifted_cubic(cls, a: float) -> "FTransform":
        return cls("shifted_cubic", a=float(a))

    @classmethod
    def exponential(cls, rho: float) -> "FTransform":
        return cls("exponential", rho=float(rho))

    @classmethod
    def tabulated(cls, points) -> "FTransform":
        return cls("tabulated", points=points)

    @classmethod
    def from_spec(cls, spec) -> "FTransform":
        """Parse {"kind": ...} JSON fragments (dict or JSON text)."""
        if isinstance(spec, str):
            stripped = spec.strip()
            if stripped.startswith("{"):
                spec = json.loads(stripped)
            else:
                spec = {"kind": stripped}
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ValueError(f"transform spec needs a 'kind': {spec!r}")
        kind = spec["kind"]
        if kind == "identity":
            return cls.identity()
        if kind == "power":
            return cls.power(spec["p"])
        if kind == "sqrt":
            return cls.sqrt()
        if kind == "shifted_cubic":
            return cls.shifted_cubic(spec["a"])
        if kind == "exponential":
            return cls.exponential(spec["rho"])
        if kind == "tabulated":
            return cls.tabulated(spec["points"])
        raise ValueError(f"unknown transform kind {kind!r}")

    def to_spec(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "p": self.p}
        if self.kind == "shifted_cubic":
            return {"kind": "shifted_cubic", "a": self.a}
        if self.kind == "exponential":
            return {"kind": "exponential", "rho": self.rho}
        if self.kind == "tabulated":
            return {"kind": "tabulated", "points": self.points.tolist()}
        return {"kind": self.kind}

    # -- application -------------------------------------------------------

    def apply(self, xi):
        """f(xi) for scalars or arrays of nonnegative raw distortion values."""
        arr = np.asarray(xi, dtype=float)
        if self.kind == "identity":
            out = arr + 0.0
        elif self.kind == "power":
            out = arr ** self.p
        elif self.kind == "sqrt":
            out = np.sqrt(arr)
        elif self.kind == "shifted_cubic":
            out = (arr - self.a) ** 3
        elif self.kind == "exponential":
            out = np.exp(self.rho * arr)
        else:
            xs, ys = self.points[:, 0], self.points[:, 1]
            if np.any(arr < xs[0] - _RANGE_SLACK) or np.any(arr > xs[-1] + _RANGE_SLACK):
                raise OutOfRange(
                    f"tabulated transform queried outside [{xs[0]:g}, {xs[-1]:g}]"
                )
            out = np.interp(np.clip(arr, xs[0], xs[-1]), xs, ys)
        return float(out) if arr.ndim == 0 else out

    def invert(self, y):
        """f^{-1}(y); raises OutOfRange when y cannot be a transform value."""
        arr = np.asarray(y, dtype=float)
        if self.kind == "identity":
            out = arr + 0.0
        elif self.kind == "power":
            if np.any(arr < -_RANGE_SLACK):
                raise OutOfRange("power transform values are nonnegative")
            out = np.clip(arr, 0.0, None) ** (1.0 / self.p)
        elif self.kind == "sqrt":
            if np.any(arr < -_RANGE_SLACK):
                raise OutOfRange("sqrt transform values are nonnegative")
            out = np.clip(arr, 0.0, None) ** 2
        elif self.kind == "shifted_cubic":
            out = np.cbrt(arr) + self.a
        elif self.kind == "exponential":
            if np.any(arr <= 0.0):
                raise OutOfRange("exponential transform values are positive")
            out = np.log(arr) / self.rho
        else:
            out = self._invert_tabulated(arr)
        return float(out) if arr.ndim == 0 else out

    def _invert_tabulated(self, arr: np.ndarray) -> np.ndarray:
        xs, ys = self.points[:, 0], self.points[:, 1]
        if np.any(arr < ys[0] - _RANGE_SLACK) or np.any(arr > ys[-1] + _RANGE_SLACK):
            raise OutOfRange(f"value outside tabulated range [{ys[0]:g}, {ys[-1]:g}]")
        flat = np.clip(np.atleast_1d(arr), ys[0], ys[-1]).ravel()
        out = np.empty_like(flat)
        for i, target in enumerate(flat):
            lo, hi = xs[0], xs[-1]
            while hi - lo > _TAB_INVERT_TOL:
                mid = 0.5 * (lo + hi)
                if np.interp(mid, xs, ys) < target:
                    lo = mid
                else:
                    hi = mid
            out[i] = 0.5 * (lo + hi)
        return out.reshape(np.shape(arr))

    # -- admissibility -----------------------------------------------------

    def check_strictly_increasing(self, d_max: float) -> None:
        """Verify strict monotonicity by sampling [0, d_max].

        Cached per d_max value; a failure is a hard construction error.
        """
        key = float(d_max)
        if key in self._checked_dmax:
            return
        if key > 0.0:
            ys = self.apply(np.linspace(0.0, key, MONOTONE_SAMPLES))
            if np.any(np.diff(ys) <= 0.0):
                raise MonotonicityError(
                    f"{self.kind} transform is not strictly increasing on [0, {key:g}]"
                )
        self._checked_dmax.add(key)

    def name(self) -> str:
        if self.kind == "power":
            return f"power(p={self.p:g})"
        if self.kind == "shifted_cubic":
            return f"shifted_cubic(a={self.a:g})"
        if self.kind == "exponential":
            return f"exponential(rho={self.rho:g})"
        return self.kind
