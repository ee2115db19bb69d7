"""Monomial enumeration and most-general (optionally GH) templates."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import List, Mapping, Optional, Sequence, Tuple

from .gdeg import GDeg, gdeg_of_monomial
from .poly import Monomial, ParamId, ParamPool, Template, grlex_key


class EmptyTemplate(ValueError):
    """GH filtering left no monomial of the requested g-degree."""


def enumerate_monomials(
    variables: Sequence[str],
    degree: int,
    gamma: Optional[Mapping[str, GDeg]] = None,
    tau: Optional[GDeg] = None,
) -> List[Monomial]:
    """All monomials of total degree <= ``degree``, ascending graded-lex.

    With ``gamma`` and ``tau`` only monomials of g-degree ``tau`` are kept.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    variables = list(dict.fromkeys(variables))
    out: List[Monomial] = []
    for k in range(degree + 1):
        for combo in combinations_with_replacement(variables, k):
            m = Monomial((v, 1) for v in combo)
            if gamma is not None and gdeg_of_monomial(gamma, m) != tau:
                continue
            out.append(m)
    out.sort(key=grlex_key(variables))
    return out


@dataclass(frozen=True)
class TemplateSpec:
    variables: Tuple[str, ...]
    degree: int
    gamma: Optional[Mapping[str, GDeg]] = None
    tau: Optional[GDeg] = None
    param_prefix: str = "a"

    @property
    def is_gh(self) -> bool:
        return self.gamma is not None

    def __post_init__(self):
        if self.gamma is not None:
            missing = [v for v in self.variables if v not in self.gamma]
            if missing or self.tau is None:
                raise ValueError(f"GH template needs tau and a total assignment (missing {missing})")


def build_template(spec: TemplateSpec, pool: ParamPool) -> Tuple[Template, List[ParamId]]:
    """Template with one fresh parameter per enumerated monomial.

    Parameters are labelled after their monomial (``a_x*v``) and listed in
    monomial order.
    """
    monos = enumerate_monomials(spec.variables, spec.degree, spec.gamma, spec.tau)
    if not monos:
        raise EmptyTemplate(f"no monomial of g-degree {spec.tau} and degree <= {spec.degree}")
    params = [pool.fresh(f"{spec.param_prefix}_{m.to_str(spec.variables)}") for m in monos]
    return Template.general(monos, params), params


def realizable_taus(variables: Sequence[str], degree: int, gamma: Mapping[str, GDeg]) -> List[GDeg]:
    """Distinct g-degrees of monomials of degree <= ``degree``, in first-seen order."""
    seen = {}
    for m in enumerate_monomials(variables, degree):
        seen.setdefault(gdeg_of_monomial(gamma, m), None)
    return list(seen)
