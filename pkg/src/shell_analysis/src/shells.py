from dataclasses import dataclass

import numpy as np

# kappas computed from independently rounded dot products may sit a few ulps below tau
SHELL_TOL = 1e-12


class InvalidShellError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ShellVector:
    """Inner products kappa_i = <v_i, w> of link vertices with the link center w."""
    kappas: np.ndarray
    tau: float
    d: int

    def __post_init__(self):
        kappas = np.asarray(self.kappas, dtype=float)
        if kappas.ndim != 1:
            raise InvalidShellError("kappas must be a 1-d array")
        if kappas.size and (kappas.min() < self.tau - SHELL_TOL or kappas.max() > 1.0 + SHELL_TOL):
            raise InvalidShellError(
                f"kappas must lie in [tau, 1] = [{self.tau}, 1]; got [{kappas.min()}, {kappas.max()}]"
            )
        object.__setattr__(self, "kappas", np.clip(kappas, self.tau, 1.0))

    @property
    def m(self) -> int:
        return int(self.kappas.shape[0])
