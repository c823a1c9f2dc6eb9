"""Linear non-Gaussian pair models with one latent confounder.

The generative structure is

    X = lambda1 * L + E_X              (+ eta * Y when Y -> X)
    Y = lambda2 * L + E_Y              (+ eta * X when X -> Y)

with L, E_X, E_Y independent.  Writing (X, Y) as a mixture of the
independent components (L, E_X, E_Y) gives a 2 x 3 mixing matrix whose
entries drive every population cumulant:

    C_{i,j}(X, Y) = a1^i a2^j k_{i+j}(L) + b1^i b2^j k_{i+j}(E_X)
                    + g1^i g2^j k_{i+j}(E_Y)
"""

from __future__ import annotations

import enum
import math
import zlib
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from cumpair.cumulants import CumulantProfile, Key, PairedSample, _check_key
from cumpair.errors import EmptySample, InvalidModel, OrderOutOfRange

EULER_GAMMA = 0.577215664901532861
# Riemann zeta at 2..5, used for Gumbel cumulants.
ZETA = {
    2: 1.64493406684822644,
    3: 1.20205690315959429,
    4: 1.08232323371113819,
    5: 1.03692775514336993,
}

COEFFICIENT_RANGE = (0.8, 1.2)
NONLINEAR_RANGE = (0.01, 0.03)


def make_rng(*keys: int) -> np.random.Generator:
    """Generator seeded from a tuple of non-negative integers.

    Distinct key tuples give independent streams, so replicate ``r`` of a run
    can be regenerated without touching replicates ``0..r-1``.
    """
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def stable_id(name: str) -> int:
    """Process-independent integer for a label (``hash`` is salted per process)."""
    return zlib.crc32(name.encode())


@dataclass(frozen=True)
class NoiseSpec:
    """A noise distribution with closed-form cumulants.

    ``family`` is one of ``exponential`` (``rate``), ``gamma`` (``shape``,
    ``scale``), ``gumbel`` (``loc``, ``scale``) or ``normal``.
    """

    family: str
    rate: float = 1.0
    shape: float = 1.0
    scale: float = 1.0
    loc: float = 0.0

    def __post_init__(self):
        if self.family not in ("exponential", "gamma", "gumbel", "normal"):
            raise InvalidModel(f"unknown noise family {self.family!r}")
        if self.rate <= 0 or self.shape <= 0 or self.scale <= 0:
            raise InvalidModel("rate, shape and scale must be strictly positive")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> NoiseSpec:
        return cls("exponential", rate=rate)

    @classmethod
    def gamma(cls, shape: float = 3.0, scale: float = 1.0) -> NoiseSpec:
        return cls("gamma", shape=shape, scale=scale)

    @classmethod
    def gumbel(cls, loc: float = 0.0, scale: float = 1.0) -> NoiseSpec:
        return cls("gumbel", loc=loc, scale=scale)

    @classmethod
    def normal(cls) -> NoiseSpec:
        return cls("normal")

    @property
    def mean(self) -> float:
        if self.family == "exponential":
            return 1.0 / self.rate
        if self.family == "gamma":
            return self.shape * self.scale
        if self.family == "gumbel":
            return self.loc + EULER_GAMMA * self.scale
        return 0.0

    @property
    def is_gaussian(self) -> bool:
        return self.family == "normal"

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` draws shifted to zero population mean."""
        if self.family == "exponential":
            v = rng.exponential(1.0 / self.rate, size=n)
        elif self.family == "gamma":
            v = rng.gamma(self.shape, self.scale, size=n)
        elif self.family == "gumbel":
            v = rng.gumbel(self.loc, self.scale, size=n)
        else:
            v = rng.standard_normal(size=n)
        return v - self.mean


# Families used by the simulation study, keyed by their CLI names.
FAMILIES = {
    "exp": NoiseSpec.exponential(1.0),
    "gamma3": NoiseSpec.gamma(3.0, 1.0),
    "gumbel": NoiseSpec.gumbel(0.0, 1.0),
    "gaussian": NoiseSpec.normal(),
}
FAMILY_ALIASES = {"exponential": "exp", "gamma": "gamma3", "normal": "gaussian"}


def family_spec(name: str) -> NoiseSpec:
    key = FAMILY_ALIASES.get(name.lower(), name.lower())
    try:
        return FAMILIES[key]
    except KeyError:
        raise InvalidModel(
            f"unknown noise family {name!r}; choose from {sorted(FAMILIES)}"
        ) from None


def noise_cumulant(spec: NoiseSpec, order: int) -> float:
    """Population cumulant of the given order (2..5) of ``spec``."""
    if order not in (2, 3, 4, 5):
        raise OrderOutOfRange(f"noise cumulant order must be in 2..5, got {order}")
    f = math.factorial(order - 1)
    if spec.family == "exponential":
        return f / spec.rate**order
    if spec.family == "gamma":
        return f * spec.shape * spec.scale**order
    if spec.family == "gumbel":
        return f * ZETA[order] * spec.scale**order
    return 1.0 if order == 2 else 0.0


class Structure(str, enum.Enum):
    CONFOUNDER_ONLY = "confounder-only"
    X_TO_Y = "x-to-y"
    Y_TO_X = "y-to-x"


@dataclass(frozen=True)
class PairModel:
    structure: Structure
    lambda1: float
    lambda2: float
    eta: float | None = None
    noise_L: NoiseSpec = NoiseSpec.exponential()
    noise_EX: NoiseSpec = NoiseSpec.exponential()
    noise_EY: NoiseSpec = NoiseSpec.exponential()

    def __post_init__(self):
        object.__setattr__(self, "structure", Structure(self.structure))
        if self.lambda1 == 0 or self.lambda2 == 0:
            raise InvalidModel("lambda1 and lambda2 must be non-zero")
        if self.structure is Structure.CONFOUNDER_ONLY:
            if self.eta not in (None, 0):
                raise InvalidModel("confounder-only model cannot carry an edge strength")
            object.__setattr__(self, "eta", None)
        elif self.eta is None or self.eta == 0:
            raise InvalidModel(f"{self.structure.value} model needs a non-zero eta")

    @property
    def noises(self) -> tuple[NoiseSpec, NoiseSpec, NoiseSpec]:
        return (self.noise_L, self.noise_EX, self.noise_EY)

    def mirrored(self) -> PairModel:
        """Same model with the names X and Y exchanged."""
        flip = {
            Structure.X_TO_Y: Structure.Y_TO_X,
            Structure.Y_TO_X: Structure.X_TO_Y,
            Structure.CONFOUNDER_ONLY: Structure.CONFOUNDER_ONLY,
        }
        return PairModel(flip[self.structure], self.lambda2, self.lambda1, self.eta,
                         self.noise_L, self.noise_EY, self.noise_EX)


@dataclass(frozen=True)
class MixingMatrix:
    """Coefficients of (L, E_X, E_Y) on X (index 1) and on Y (index 2)."""

    alpha1: float
    beta1: float
    gamma1: float
    alpha2: float
    beta2: float
    gamma2: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.alpha1, self.beta1, self.gamma1],
                         [self.alpha2, self.beta2, self.gamma2]])


def to_mixing(model: PairModel) -> MixingMatrix:
    l1, l2, eta = model.lambda1, model.lambda2, model.eta
    if model.structure is Structure.X_TO_Y:
        return MixingMatrix(l1, 1.0, 0.0, eta * l1 + l2, eta, 1.0)
    if model.structure is Structure.Y_TO_X:
        return MixingMatrix(l1 + eta * l2, 1.0, eta, l2, 0.0, 1.0)
    return MixingMatrix(l1, 1.0, 0.0, l2, 0.0, 1.0)


def exact_joint_cumulant(
    mix: MixingMatrix,
    noises: tuple[NoiseSpec, NoiseSpec, NoiseSpec],
    key: Key,
) -> float:
    """Population C_{i,j}(X, Y) of the mixture."""
    i, j = _check_key(key)
    k = i + j
    noise_L, noise_EX, noise_EY = noises
    return (
        mix.alpha1**i * mix.alpha2**j * noise_cumulant(noise_L, k)
        + mix.beta1**i * mix.beta2**j * noise_cumulant(noise_EX, k)
        + mix.gamma1**i * mix.gamma2**j * noise_cumulant(noise_EY, k)
    )


def exact_profile(model: PairModel, keys: Iterable[Key]) -> CumulantProfile:
    mix = to_mixing(model)
    return CumulantProfile({tuple(k): exact_joint_cumulant(mix, model.noises, k) for k in keys})


def random_model(case: str, noise_family: str | NoiseSpec, rng_seed) -> PairModel:
    """Draw causal strengths i.i.d. Uniform[0.8, 1.2].

    ``case`` is ``case1`` (confounder only) or ``case2`` (confounder plus
    X -> Y).  ``rng_seed`` is an int or a tuple of ints.
    """
    seed = rng_seed if isinstance(rng_seed, tuple) else (rng_seed,)
    rng = make_rng(*seed)
    spec = noise_family if isinstance(noise_family, NoiseSpec) else family_spec(noise_family)
    lo, hi = COEFFICIENT_RANGE
    case = case.lower().replace("_", "").replace("-", "")
    if case.startswith("case1"):
        l1, l2 = rng.uniform(lo, hi, size=2)
        return PairModel(Structure.CONFOUNDER_ONLY, float(l1), float(l2), None, spec, spec, spec)
    if case.startswith("case2"):
        l1, l2, eta = rng.uniform(lo, hi, size=3)
        return PairModel(Structure.X_TO_Y, float(l1), float(l2), float(eta), spec, spec, spec)
    raise InvalidModel(f"unknown case {case!r}; expected case1 or case2")


@dataclass(frozen=True)
class NonlinearSpec:
    """Cubic coefficients added on each structural edge.

    ``d_lx`` and ``d_ly`` act on L -> X and L -> Y, ``d_edge`` on the directed
    edge between the observed variables.  With ``latent_edges=False`` only
    the observed edge is cubic.
    """

    d_lx: float = 0.0
    d_ly: float = 0.0
    d_edge: float = 0.0
    latent_edges: bool = True

    @classmethod
    def random(cls, rng_seed, latent_edges: bool = True) -> NonlinearSpec:
        seed = rng_seed if isinstance(rng_seed, tuple) else (rng_seed,)
        d = make_rng(*seed).uniform(*NONLINEAR_RANGE, size=3)
        return cls(float(d[0]), float(d[1]), float(d[2]), latent_edges)


def _draw_components(model: PairModel, n: int, rng_seed):
    if n < 2:
        raise EmptySample(f"need at least 2 observations, got {n}")
    seed = rng_seed if isinstance(rng_seed, tuple) else (rng_seed,)
    rng = make_rng(*seed)
    latent = model.noise_L.draw(rng, n)
    e_x = model.noise_EX.draw(rng, n)
    e_y = model.noise_EY.draw(rng, n)
    return latent, e_x, e_y


def sample(model: PairModel, n: int, rng_seed) -> PairedSample:
    """Draw ``n`` observations from the linear model."""
    return sample_nonlinear(model, NonlinearSpec(), n, rng_seed)


def sample_nonlinear(model: PairModel, nl: NonlinearSpec, n: int, rng_seed) -> PairedSample:
    """Draw ``n`` observations where each edge adds ``D * parent**3``."""
    latent, e_x, e_y = _draw_components(model, n, rng_seed)
    d_lx = nl.d_lx if nl.latent_edges else 0.0
    d_ly = nl.d_ly if nl.latent_edges else 0.0
    from_l_x = model.lambda1 * latent
    from_l_y = model.lambda2 * latent
    if d_lx:
        from_l_x = from_l_x + d_lx * latent**3
    if d_ly:
        from_l_y = from_l_y + d_ly * latent**3

    if model.structure is Structure.Y_TO_X:
        y = from_l_y + e_y
        x = from_l_x + model.eta * y + e_x
        if nl.d_edge:
            x = x + nl.d_edge * y**3
    else:
        x = from_l_x + e_x
        y = from_l_y + e_y
        if model.structure is Structure.X_TO_Y:
            y = y + model.eta * x
            if nl.d_edge:
                y = y + nl.d_edge * x**3
    return PairedSample(x, y)
