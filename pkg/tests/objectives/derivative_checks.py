import numpy as np

from sasshalab.numkit.rng import RngStream


def check_derivatives(objective, points, rng: RngStream, batch=None, h: float = 1e-5, rtol: float = 1e-5):
    """
    Central-difference checks of ``grad`` and ``hvp`` plus HVP symmetry
    ``uᵀ(Hv) = vᵀ(Hu)`` at every point.
    """
    for x in points:
        g = objective.grad(x, batch)
        fd_g = np.array([
            (objective.value(x + h * e, batch) - objective.value(x - h * e, batch)) / (2 * h)
            for e in np.eye(objective.dim)])
        scale = max(np.linalg.norm(g), 1.0)
        assert np.linalg.norm(g - fd_g) <= rtol * scale

        u, v = rng.normal(objective.dim), rng.normal(objective.dim)
        hv, hu = objective.hvp(x, v, batch), objective.hvp(x, u, batch)
        fd_hv = (objective.grad(x + h * v, batch) - objective.grad(x - h * v, batch)) / (2 * h)
        scale = max(np.linalg.norm(hv), 1.0)
        assert np.linalg.norm(hv - fd_hv) <= rtol * scale
        assert abs(u @ hv - v @ hu) <= 1e-10 * max(abs(u @ hv), 1.0)
