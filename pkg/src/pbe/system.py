"""The polynomial instance shared by the witness builder and the pipelines."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exactnum import LogBound, ln_enclosure
from .mpoly import MPoly, height_arg, parse_poly, poly_coefficient_pool


@dataclass
class Parametrization:
    """Rational map ``t -> (num_i(t) / den_i(t))`` onto X (test oracle only)."""

    params: tuple[str, ...]
    nums: list[MPoly]
    dens: list[MPoly]

    def evaluate(self, t: Sequence[Fraction]) -> Optional[list[Fraction]]:
        out = []
        for a, b in zip(self.nums, self.dens):
            den = b.eval_exact(t)
            if den == 0:
                return None
            out.append(a.eval_exact(t) / den)
        return out

    def to_json(self) -> dict:
        return {"params": list(self.params), "coords": [[str(a), str(b)] for a, b in zip(self.nums, self.dens)]}

    @classmethod
    def from_json(cls, obj: dict) -> "Parametrization":
        params = tuple(obj["params"])
        nums, dens = [], []
        for c in obj["coords"]:
            if isinstance(c, str):
                c = [c, "1"]
            nums.append(parse_poly(c[0], params))
            dens.append(parse_poly(c[1], params))
        return cls(params, nums, dens)


@dataclass
class PolySystem:
    """``X = V(f_1..f_m)`` with goal ``g``, asserted dimension and irreducibility.

    ``g_height_bound`` optionally records an integer ``M`` with ``h(g) <= ln M``
    obtained from how ``g`` was built; it is checked against the exact height
    and, when present, used in place of pooling ``g`` with the other data.
    """

    vars: tuple[str, ...]
    f: list[MPoly]
    g: MPoly
    dim: int
    irreducible: bool = False
    parametrization: Optional[Parametrization] = None
    recipe: Optional[list] = None
    g_height_bound: Optional[int] = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.vars = tuple(self.vars)
        for p in list(self.f) + [self.g]:
            if p.vars != self.vars:
                raise ValueError("all polynomials must share the system's variable order")
        if not 0 <= self.dim <= len(self.vars):
            raise ValueError("need 0 <= dim <= n")
        if self.g_height_bound is not None and height_arg(poly_coefficient_pool([self.g])) > self.g_height_bound:
            raise ValueError("declared height bound for g is below its exact height")

    @property
    def n(self) -> int:
        return len(self.vars)

    @property
    def m(self) -> int:
        return len(self.f)

    def height_arg_with(self, coords: Sequence[Fraction], include_g: bool = True) -> int:
        """Integer ``M`` with ``ln M`` an upper bound for ``h(f, [g,] coords)``."""
        pool = poly_coefficient_pool(self.f) if self.f else []
        pool = [c for c in pool] + [Fraction(c) for c in coords]
        if not include_g:
            return height_arg(pool or [Fraction(0)])
        if self.g_height_bound is not None:
            return height_arg(pool or [Fraction(0)]) * self.g_height_bound
        return height_arg(pool + self.g.coefficients() or [Fraction(0)])

    def height_with(self, coords: Sequence[Fraction], include_g: bool = True, bits: int = 128) -> LogBound:
        return ln_enclosure(self.height_arg_with(coords, include_g), bits)

    def g_height_arg(self) -> int:
        if self.g_height_bound is not None:
            return self.g_height_bound
        return height_arg(self.g.coefficients() or [Fraction(0)])

    def to_json(self) -> dict:
        out = {
            "vars": list(self.vars),
            "f": [str(p) for p in self.f],
            "g": str(self.g),
            "dim": self.dim,
            "irreducible": self.irreducible,
        }
        if self.parametrization is not None:
            out["parametrization"] = self.parametrization.to_json()
        if self.recipe is not None:
            out["recipe"] = [s.to_json() for s in self.recipe]
        if self.g_height_bound is not None:
            out["g_height_bound"] = str(self.g_height_bound)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PolySystem":
        from .witness import step_from_json

        vars = tuple(obj["vars"])
        par = obj.get("parametrization")
        recipe = obj.get("recipe")
        ghb = obj.get("g_height_bound")
        return cls(
            vars=vars,
            f=[parse_poly(s, vars) for s in obj.get("f", [])],
            g=parse_poly(obj.get("g", "0"), vars),
            dim=int(obj["dim"]),
            irreducible=bool(obj.get("irreducible", False)),
            parametrization=Parametrization.from_json(par) if par else None,
            recipe=[step_from_json(s, vars) for s in recipe] if recipe is not None else None,
            g_height_bound=int(ghb) if ghb is not None else None,
        )

    @classmethod
    def load(cls, path: str) -> "PolySystem":
        with open(path) as fh:
            return cls.from_json(json.load(fh))
