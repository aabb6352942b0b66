from .factory import ModelSpec, SeedGraph, describe
from .growth import GrowingLine, GrowthEvent, choose_parent, grow, grow_line, make_sampler
from .rng import RngStream, make_rng
from .seeds import make_rball, make_star_hub, rball_size
