# src/wallcrossing/automorphism.py
"""
截斷的 torus 自同構 (DT wall-crossing automorphisms)

S(ℓ)*(X_β) = X_β · Π_γ (1 + σ(γ)X_γ)^{Ω(γ)⟨γ,β⟩}

Series live in the polynomial ring QQ[y_1..y_k] with y_j = X_{c_j} for the generators c_j of a
simplicial positive cone, truncated at total degree N. An automorphism is stored by the
correction factors F_i with aut*(X_{e_i}) = X_{e_i}·F_i(y) for the lattice basis e_i; every
coefficient is an exact rational and every identity check is exact.
"""

import json
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import jsonschema
import sympy
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing, ring

from src.config.config_loader import load_json_config
from src.core.errors import ConeViolation, IncompatibleTruncation, InputError, TruncationTooSmall
from src.wallcrossing.lattice import Charge, ChargeLattice, QuadraticRefinement, as_charge, make_refinement

logger = logging.getLogger(__name__)

RayContent = Sequence[Tuple[Sequence[int], int]]


# ---------------------------------------------------------------------------
# positive cone
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositiveCone:
    generators: Tuple[Charge, ...]

    def __post_init__(self) -> None:
        if not self.generators:
            raise InputError("a positive cone needs at least one generator")
        m = sympy.Matrix([list(g) for g in self.generators]).T
        if m.rank() != len(self.generators):
            raise InputError(f"cone generators {self.generators} are linearly dependent")

    @classmethod
    def standard(cls, lattice: ChargeLattice) -> "PositiveCone":
        return cls(tuple(lattice.basis(i) for i in range(lattice.rank)))

    @property
    def size(self) -> int:
        return len(self.generators)

    def coordinates(self, gamma: Charge) -> Tuple[int, ...]:
        """γ = Σ m_j c_j with m_j ≥ 0 integers, not all zero."""
        A = sympy.Matrix([list(g) for g in self.generators]).T
        target = sympy.Matrix(list(gamma))
        m = (A.T * A).inv() * A.T * target
        if A * m != target or any(not v.is_integer or v < 0 for v in m) or all(v == 0 for v in m):
            raise ConeViolation(f"charge {gamma} is not a nonzero lattice point of the cone {self.generators}")
        return tuple(int(v) for v in m)

    def charge(self, monomial: Sequence[int]) -> Charge:
        rank = len(self.generators[0])
        return tuple(sum(monomial[j] * self.generators[j][k] for j in range(self.size)) for k in range(rank))

    def ring(self) -> PolyRing:
        return ring(sympy.symbols(f"y1:{self.size + 1}"), QQ)[0]


# ---------------------------------------------------------------------------
# truncated series arithmetic
# ---------------------------------------------------------------------------

def truncate(p: PolyElement, order: int) -> PolyElement:
    return p.ring.from_dict({m: c for m, c in p.items() if sum(m) <= order})


def series_mul(p: PolyElement, q: PolyElement, order: int) -> PolyElement:
    return truncate(p * q, order)


def series_inverse(p: PolyElement, order: int) -> PolyElement:
    """1/p for p with constant term 1: Σ (−u)^r, u = p − 1."""
    R = p.ring
    if p.get(R.zero_monom, QQ(0)) != 1:
        raise InputError("series inverse needs constant term 1")
    u = p - R.one
    result = R.one
    term = R.one
    for _ in range(order):
        term = series_mul(term, -u, order)
        if not term:
            break
        result += term
    return result


def series_power(p: PolyElement, k: int, order: int) -> PolyElement:
    if k < 0:
        p, k = series_inverse(p, order), -k
    result = p.ring.one
    base = truncate(p, order)
    while k:
        if k & 1:
            result = series_mul(result, base, order)
        k >>= 1
        if k:
            base = series_mul(base, base, order)
    return result


def substitute(p: PolyElement, factors: Sequence[PolyElement], order: int) -> PolyElement:
    """p(y_1·G_1, …, y_k·G_k) with factors[j] = y_j·G_j of degree ≥ 1."""
    R = p.ring
    powers: List[Dict[int, PolyElement]] = [{0: R.one} for _ in factors]

    def power(j: int, e: int) -> PolyElement:
        cache = powers[j]
        if e not in cache:
            cache[e] = series_mul(power(j, e - 1), factors[j], order)
        return cache[e]

    result = R.zero
    for m, c in p.items():
        if sum(m) > order:
            continue
        term = R.one * c
        for j, e in enumerate(m):
            if e:
                term = series_mul(term, power(j, e), order)
        result += term
    return result


def to_fraction(c: Any) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _qq(value: Fraction) -> Any:
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


# ---------------------------------------------------------------------------
# automorphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusAutomorphism:
    lattice: ChargeLattice
    sigma: QuadraticRefinement
    cone: PositiveCone
    order: int
    images: Tuple[PolyElement, ...]

    @property
    def ring(self) -> PolyRing:
        return self.images[0].ring

    def factor(self, beta: Sequence[int]) -> PolyElement:
        """F_β with aut*(X_β) = X_β·F_β."""
        beta = as_charge(beta, self.lattice.rank)
        result = self.ring.one
        for i, b in enumerate(beta):
            if b:
                result = series_mul(result, series_power(self.images[i], b, self.order), self.order)
        return result

    def generator_images(self) -> List[PolyElement]:
        """y_j·F_{c_j}, the image of each cone variable."""
        gens = self.ring.gens
        return [series_mul(gens[j], self.factor(c), self.order) for j, c in enumerate(self.cone.generators)]

    def coefficients(self, i: int) -> Dict[Tuple[int, ...], Fraction]:
        return {m: to_fraction(c) for m, c in sorted(self.images[i].items())}

    def with_image(self, i: int, image: PolyElement) -> "TorusAutomorphism":
        images = list(self.images)
        images[i] = truncate(image, self.order)
        return replace(self, images=tuple(images))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "cone": [list(c) for c in self.cone.generators],
            "images": [
                {
                    "basis": i,
                    "terms": [
                        {"monomial": list(m), "coefficient": str(c)}
                        for m, c in self.coefficients(i).items()
                    ],
                }
                for i in range(self.lattice.rank)
            ],
        }


def _check_order(order: int) -> None:
    if not isinstance(order, int) or order < 1:
        raise TruncationTooSmall(f"truncation order must be at least 1, got {order!r}")


def identity(
    lattice: ChargeLattice,
    sigma: QuadraticRefinement,
    order: int,
    cone: Optional[PositiveCone] = None,
) -> TorusAutomorphism:
    _check_order(order)
    cone = cone or PositiveCone.standard(lattice)
    R = cone.ring()
    return TorusAutomorphism(lattice, sigma, cone, order, tuple(R.one for _ in range(lattice.rank)))


def _on_one_ray(charges: Sequence[Charge]) -> bool:
    ref = charges[0]
    for g in charges[1:]:
        for a in range(len(ref)):
            for b in range(a + 1, len(ref)):
                if ref[a] * g[b] - ref[b] * g[a] != 0:
                    return False
    return True


def wall_automorphism(
    lattice: ChargeLattice,
    sigma: QuadraticRefinement,
    ray_content: RayContent,
    order: int,
    *,
    cone: Optional[PositiveCone] = None,
    weights: Optional[Sequence[Fraction]] = None,
) -> TorusAutomorphism:
    """X_β ↦ X_β·Π_γ (1 + σ(γ)·λ^γ·X_γ)^{Ω(γ)⟨γ,β⟩}, λ ≡ 1 unless weights are given."""
    _check_order(order)
    cone = cone or PositiveCone.standard(lattice)
    R = cone.ring()
    content = [(as_charge(g, lattice.rank), int(om)) for g, om in ray_content]
    located = [(g, om, cone.coordinates(g)) for g, om in content]
    active = [g for g, om, _ in located if om != 0]
    if active and not _on_one_ray(active):
        raise ConeViolation(f"charges {active} do not lie on one ray")

    images = []
    for i in range(lattice.rank):
        e_i = lattice.basis(i)
        F = R.one
        for gamma, om, m in located:
            k = om * lattice.pair(gamma, e_i)
            if k == 0:
                continue
            coeff = Fraction(sigma(gamma)) * character_weight(weights, gamma)
            u = R.from_dict({m: _qq(coeff)})
            F = series_mul(F, series_power(R.one + u, k, order), order)
        images.append(F)
    aut = TorusAutomorphism(lattice, sigma, cone, order, tuple(images))
    logger.debug(f"[WALL] wall automorphism for {content} at order {order}")
    return aut


def character_weight(weights: Optional[Sequence[Fraction]], gamma: Sequence[int]) -> Fraction:
    if weights is None:
        return Fraction(1)
    w = Fraction(1)
    for lam, g in zip(weights, gamma):
        w *= Fraction(lam) ** g
    return w


def _compatible(a: TorusAutomorphism, b: TorusAutomorphism) -> None:
    if a.order != b.order:
        raise IncompatibleTruncation(f"truncation orders differ: {a.order} != {b.order}")
    if a.lattice != b.lattice or a.cone != b.cone or a.sigma != b.sigma:
        raise IncompatibleTruncation("automorphisms live on different lattices, cones or refinements")


def compose(a: TorusAutomorphism, b: TorusAutomorphism) -> TorusAutomorphism:
    """a∘b, pulled back as b*∘a*: F_β = F^b_β · F^a_β(y_j·F^b_{c_j})."""
    _compatible(a, b)
    N = a.order
    subs = b.generator_images()
    images = tuple(
        series_mul(b.images[i], substitute(a.images[i], subs, N), N) for i in range(a.lattice.rank)
    )
    return replace(a, images=images)


def inverse(a: TorusAutomorphism) -> TorusAutomorphism:
    """b with a∘b = id, by fixed-point iteration (one correct order per pass)."""
    b = identity(a.lattice, a.sigma, a.order, a.cone)
    for _ in range(a.order + 1):
        subs = b.generator_images()
        images = tuple(series_inverse(substitute(F, subs, a.order), a.order) for F in a.images)
        b = replace(b, images=images)
    return b


def rescale(a: TorusAutomorphism, weights: Sequence[Fraction]) -> TorusAutomorphism:
    """Conjugate by the character rescaling X_γ ↦ λ^γ X_γ (y_j ↦ λ^{c_j} y_j)."""
    if len(weights) != a.lattice.rank:
        raise InputError(f"need {a.lattice.rank} weights, got {len(weights)}")
    scale = [character_weight(weights, c) for c in a.cone.generators]
    R = a.ring
    images = []
    for F in a.images:
        terms = {}
        for m, c in F.items():
            w = Fraction(1)
            for j, e in enumerate(m):
                w *= scale[j] ** e
            terms[m] = c * _qq(w)
        images.append(R.from_dict(terms))
    return replace(a, images=tuple(images))


def automorphism_defect(a: TorusAutomorphism, b: TorusAutomorphism) -> Fraction:
    """max |coefficient difference| over all generator images."""
    _compatible(a, b)
    worst = Fraction(0)
    for Fa, Fb in zip(a.images, b.images):
        for c in (Fa - Fb).values():
            worst = max(worst, abs(to_fraction(c)))
    return worst


def commutator_defect(a: TorusAutomorphism, b: TorusAutomorphism) -> Fraction:
    return automorphism_defect(compose(a, b), compose(b, a))


def poisson_defect(aut: TorusAutomorphism, order: Optional[int] = None) -> Fraction:
    """{aut X_α, aut X_β} − aut{X_α, X_β} with {X_α, X_β} = ⟨α,β⟩X_{α+β}, over basis pairs, up to degree `order`."""
    N = aut.order if order is None else order
    if not 0 <= N <= aut.order:
        raise InputError(f"order must be in 0..{aut.order} for an automorphism truncated at {aut.order}, got {N}")
    lat = aut.lattice
    worst = Fraction(0)
    for a in range(lat.rank):
        for b in range(a + 1, lat.rank):
            alpha, beta = lat.basis(a), lat.basis(b)
            lhs: Dict[Tuple[int, ...], Fraction] = {}
            for m, c in aut.images[a].items():
                ga = tuple(x + y for x, y in zip(alpha, aut.cone.charge(m)))
                for k, d in aut.images[b].items():
                    if sum(m) + sum(k) > N:
                        continue
                    gb = tuple(x + y for x, y in zip(beta, aut.cone.charge(k)))
                    key = tuple(x + y for x, y in zip(m, k))
                    lhs[key] = lhs.get(key, Fraction(0)) + to_fraction(c) * to_fraction(d) * lat.pair(ga, gb)
            rhs = series_mul(aut.images[a], aut.images[b], N) * lat.pair(alpha, beta)
            keys = set(lhs) | set(rhs.keys())
            for key in keys:
                diff = lhs.get(key, Fraction(0)) - to_fraction(rhs.get(key, QQ(0)))
                worst = max(worst, abs(diff))
    return worst


# ---------------------------------------------------------------------------
# pentagon identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PentagonResult:
    order: int
    defect_forward: Fraction  # S1∘S2 against S2∘S12∘S1
    defect_reverse: Fraction  # S2∘S1 against S1∘S12∘S2
    bracketing: str

    @property
    def defect(self) -> Fraction:
        return min(self.defect_forward, self.defect_reverse)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "defect": str(self.defect),
            "defect_forward": str(self.defect_forward),
            "defect_reverse": str(self.defect_reverse),
            "bracketing": self.bracketing,
        }


def pentagon_check(order: int, omegas: Tuple[int, int, int] = (1, 1, 1)) -> PentagonResult:
    """Rank-2 lattice with ⟨γ₁,γ₂⟩ = 1, σ(γ₁) = σ(γ₂) = −1; Ω on γ₁, γ₂, γ₁+γ₂."""
    if order < 2:
        raise TruncationTooSmall(f"the pentagon check needs order ≥ 2, got {order}")
    lattice = ChargeLattice.standard(2)
    sigma = make_refinement(lattice, (-1, -1))
    s1 = wall_automorphism(lattice, sigma, [((1, 0), omegas[0])], order)
    s2 = wall_automorphism(lattice, sigma, [((0, 1), omegas[1])], order)
    s12 = wall_automorphism(lattice, sigma, [((1, 1), omegas[2])], order)
    forward = automorphism_defect(compose(s1, s2), compose(compose(s2, s12), s1))
    reverse = automorphism_defect(compose(s2, s1), compose(compose(s1, s12), s2))
    if forward == 0 and reverse == 0:
        bracketing = "both"
    elif forward == 0:
        bracketing = "S1∘S2 = S2∘S12∘S1"
    elif reverse == 0:
        bracketing = "S2∘S1 = S1∘S12∘S2"
    else:
        bracketing = "none"
        logger.warning(f"[WALL] pentagon fails in both bracketings at order {order}")
    logger.info(f"[WALL] pentagon at order {order}: forward {forward}, reverse {reverse}")
    return PentagonResult(order, forward, reverse, bracketing)


def pentagon_defect(order: int, omegas: Tuple[int, int, int] = (1, 1, 1)) -> Fraction:
    return pentagon_check(order, omegas).defect


# ---------------------------------------------------------------------------
# ray-content files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RaySetup:
    lattice: ChargeLattice
    sigma: QuadraticRefinement
    cone: PositiveCone
    rays: Tuple[Tuple[Tuple[Charge, int], ...], ...]
    order: Optional[int] = None

    def automorphisms(self, order: int) -> List[TorusAutomorphism]:
        return [wall_automorphism(self.lattice, self.sigma, content, order, cone=self.cone) for content in self.rays]

    def product(self, order: int) -> TorusAutomorphism:
        """Ray automorphisms composed in file order, the first one leftmost."""
        auts = self.automorphisms(order)
        total = identity(self.lattice, self.sigma, order, self.cone)
        for a in auts:
            total = compose(total, a)
        return total


def parse_ray_data(data: Dict[str, Any]) -> RaySetup:
    try:
        jsonschema.validate(instance=data, schema=load_json_config("ray_schema.json"))
    except jsonschema.ValidationError as e:
        raise InputError(f"ray file does not match the schema: {e.message}") from e
    lattice = ChargeLattice.of(data["pairing"])
    sigma = make_refinement(lattice, data.get("sigma"))
    cone = PositiveCone(tuple(as_charge(c, lattice.rank) for c in data["cone"])) if "cone" in data else PositiveCone.standard(lattice)
    rays = tuple(
        tuple((as_charge(entry["gamma"], lattice.rank), int(entry["omega"])) for entry in ray)
        for ray in data["rays"]
    )
    return RaySetup(lattice, sigma, cone, rays, data.get("order"))


def load_ray_file(path: str) -> RaySetup:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8-sig"))
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read ray file {p}") from e
    setup = parse_ray_data(data)
    logger.info(f"[WALL] loaded {len(setup.rays)} rays from {p}")
    return setup
