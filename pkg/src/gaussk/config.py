"""Centralized numerical tolerances."""

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    symplectic_tol: float = 1e-10
    recon_tol: float = 1e-9
    det_tol: float = 1e-8
    hermitian_tol: float = 1e-10
    unitarity_tol: float = 1e-10
    tail_tol: float = 1e-8
    hull_margin: float = 1e-9
    # eigenvalues this close to 1 are treated as one degenerate cluster
    degeneracy_tol: float = 1e-10

    def to_dict(self):
        return asdict(self)


DEFAULT = Tolerances()


@dataclass
class RunConfig:
    """Everything needed to reproduce a run; embedded in every report."""

    seed: int = 0
    tolerances: dict = None
    cutoffs: dict = None
    paths: dict = None
    threads: int = None
    restarts: int = 2000

    def __post_init__(self):
        if self.tolerances is None:
            self.tolerances = DEFAULT.to_dict()
        if self.cutoffs is None:
            self.cutoffs = {"displacement": 40, "pair": 60, "variance": 60, "speed": 200}
        if self.paths is None:
            self.paths = {}

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, obj):
        known = {k: obj[k] for k in ("seed", "tolerances", "cutoffs", "paths", "threads", "restarts") if k in obj}
        cfg = cls(**known)
        if obj.get("tolerances"):
            cfg.tolerances = {**DEFAULT.to_dict(), **obj["tolerances"]}
        return cfg
