"""Numerical tolerances shared by the reduction and recovery routines."""

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # eigenvalues below null_rel * max(1, lambda_max) count as zero in face updates
    null_rel: float = 1e-8
    # a certificate whose compressions have total trace below this is trivial
    zero_trace: float = 1e-7
    # nonnegative coordinates with s_i > support (after normalization) leave the face
    support: float = 1e-8
    # relative tolerance for certificate orthogonality checks
    orthogonality: float = 1e-7
    # relative singular-value cutoff for ranks and row compression
    rank_rel: float = 1e-10

    def as_dict(self):
        return asdict(self)

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    @classmethod
    def from_dict(cls, data):
        known = {k: float(v) for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


DEFAULT_TOLERANCES = Tolerances()
