from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConfigError
from .seeds import make_rball, make_star_hub

UNIFORM = 'ua'
PREFERENTIAL = 'pa'
DIFFUSION = 'diffusion'

SINGLE = 'single'
STAR = 'star'
BALL = 'ball'


@dataclass(frozen=True)
class SeedGraph:
    """Initial tree: a single vertex, a star hub of k leaves or an r-ball."""
    kind: str = SINGLE
    size: int = 0

    def __post_init__(self):
        if self.kind not in (SINGLE, STAR, BALL):
            raise ConfigError(f"[!] Unknown seed graph: {self.kind}")
        if self.kind == STAR and self.size < 1:
            raise ConfigError("[!] star hub needs k >= 1")
        if self.kind == BALL and self.size < 0:
            raise ConfigError("[!] r-ball needs r >= 0")

    @classmethod
    def star(cls, k):
        return cls(STAR, k)

    @classmethod
    def ball(cls, r):
        return cls(BALL, r)

    def __str__(self):
        if self.kind == SINGLE:
            return 'single'
        return f"{self.kind}:{self.size}"


@dataclass(frozen=True)
class ModelSpec:
    """Which growth process to run and what it starts from."""
    kind: str
    d: Optional[int] = None
    seed_graph: SeedGraph = field(default_factory=SeedGraph)

    def __post_init__(self):
        if self.kind not in _models:
            raise ConfigError(f"[!] Model not found: {self.kind}")
        if self.kind == DIFFUSION:
            if self.d is None or self.d < 2:
                raise ConfigError("[!] diffusion needs a degree d >= 2")
        elif self.d is not None:
            raise ConfigError(f"[!] {self.kind} takes no degree")
        if self.seed_graph.kind == BALL and self.kind != DIFFUSION:
            raise ConfigError("[!] r-ball seeds only exist for diffusion")
        if self.seed_graph.kind == STAR and self.kind == DIFFUSION:
            raise ConfigError("[!] star hubs only exist for UA/PA")

    @classmethod
    def parse(cls, text, hub=None, ball=None):
        """'ua', 'pa' or 'diff:<d>', optionally with a hub size or ball radius."""
        text = text.strip().lower()
        if hub is not None and ball is not None:
            raise ConfigError("[!] give either a hub or a ball, not both")
        if hub is not None:
            seed = SeedGraph.star(hub)
        elif ball is not None:
            seed = SeedGraph.ball(ball)
        else:
            seed = SeedGraph()

        if text in (UNIFORM, PREFERENTIAL):
            return cls(text, None, seed)
        if text.startswith('diff'):
            _, _, d = text.partition(':')
            try:
                return cls(DIFFUSION, int(d), seed)
            except ValueError:
                raise ConfigError(f"[!] bad diffusion degree in '{text}'")
        raise ConfigError(f"[!] Model not found: {text}")

    @property
    def name(self):
        if self.kind == DIFFUSION:
            return f"diff:{self.d}"
        return self.kind

    def with_seed(self, seed_graph):
        return ModelSpec(self.kind, self.d, seed_graph)

    def seed_edges(self):
        seed = self.seed_graph
        if seed.kind == STAR:
            return make_star_hub(seed.size)
        if seed.kind == BALL:
            return make_rball(self.d, seed.size)
        return []

    def __str__(self):
        if self.seed_graph.kind == SINGLE:
            return self.name
        return f"{self.name}+{self.seed_graph}"


# Fill all available models, change here to add new growth processes.
# Values are the human readable names used in logs and summaries.
_models = {
    UNIFORM: 'uniform attachment',
    PREFERENTIAL: 'preferential attachment',
    DIFFUSION: 'd-regular diffusion',
}


def describe(spec):
    if spec.kind == DIFFUSION:
        return f"{spec.d}-regular diffusion"
    return _models[spec.kind]
