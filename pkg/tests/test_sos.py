import numpy as np
import pytest

from vertex_bethe.errors import PreconditionError, SingularGaugeError
from vertex_bethe.sklyanin import ModelParams
from vertex_bethe.sos import (
    DEFAULT_GAUGE,
    GaugeParams,
    admissible,
    gauge_matrix,
    intertwining_prefactor,
    sos_weight,
    vertex_face_residuals,
)

SIGMA1 = np.array([[0, 1], [1, 0]])


def _height_pairs(p, rng, count):
    diffs = [d for d in range(-p.two_ell, p.two_ell + 1) if admissible(p, d, 0)]
    for _ in range(count):
        k = int(rng.integers(-p.r, p.r))
        yield k, k - int(rng.choice(diffs))


class TestVertexFace:
    @pytest.mark.parametrize("two_ell", [1, 2])
    def test_all_four_relations(self, reps, two_ell):
        p, basis, S = reps[two_ell]
        rng = np.random.default_rng(2024 + two_ell)
        worst = 0.0
        for k, kp in _height_pairs(p, rng, 10):
            for lam in rng.uniform(-0.5, 0.5, 5) + 1j * rng.uniform(-0.4, 0.4, 5) / p.t:
                worst = max(worst, max(vertex_face_residuals(p, basis, S, DEFAULT_GAUGE, k, kp, lam).values()))
        assert worst < 1e-9

    def test_spin_three_halves(self, reps):
        p, basis, S = reps[3]
        res = vertex_face_residuals(p, basis, S, DEFAULT_GAUGE, 2, -1, 0.13 + 0.04j)
        assert max(res.values()) < 1e-9

    def test_other_gauge(self, reps):
        p, basis, S = reps[2]
        gauge = GaugeParams(0.12 + 0.3j, 0.4 - 0.05j)
        res = vertex_face_residuals(p, basis, S, gauge, 3, 1, -0.21 + 0.02j)
        assert max(res.values()) < 1e-9

    def test_wrong_weight_is_detected(self, reps, monkeypatch):
        import vertex_bethe.sos as sos

        p, basis, S = reps[1]
        original = sos.sos_weight
        monkeypatch.setattr(sos, "sos_weight", lambda *a: 1.1 * original(*a))
        res = sos.vertex_face_residuals(p, basis, S, DEFAULT_GAUGE, 1, 0, 0.1 + 0.05j)
        assert max(res.values()) > 1e-3

    def test_printed_base_off_by_constant(self):
        p = ModelParams.default(1)
        ratio = intertwining_prefactor(p, DEFAULT_GAUGE, 1, 0, "printed") / intertwining_prefactor(
            p, DEFAULT_GAUGE, 1, 0
        )
        # B_printed / B_consistent = -i t^{-1/2}, entering as its square root
        assert abs(ratio) == pytest.approx(p.t**-0.25, rel=1e-12)


class TestGauge:
    @pytest.mark.parametrize("k", [0, 1, 5])
    def test_periodicity(self, k):
        p = ModelParams.default(1)
        lam = 0.17 + 0.03j
        assert np.allclose(gauge_matrix(p, DEFAULT_GAUGE, k + p.r, lam), gauge_matrix(p, DEFAULT_GAUGE, k, lam))
        shifted = gauge_matrix(p, DEFAULT_GAUGE, k, lam + 1)
        assert np.allclose(shifted, -SIGMA1 @ gauge_matrix(p, DEFAULT_GAUGE, k, lam), atol=1e-12)

    def test_singular_gauge(self):
        p = ModelParams.default(1)
        # w_0 = (s_+ + s_-)/2 - tau/2 = 0 puts theta_11 at its zero
        bad = GaugeParams(p.tau / 2, p.tau / 2)
        with pytest.raises(SingularGaugeError):
            bad.validate(p)

    def test_admissible(self):
        p = ModelParams.default(2)
        assert admissible(p, 3, 1) and admissible(p, 1, 1) and not admissible(p, 2, 1)
        assert not admissible(p, 5, 1)

    def test_bad_eps(self):
        with pytest.raises(PreconditionError):
            sos_weight(ModelParams.default(1), DEFAULT_GAUGE, 1, 0, 0, 1, 0.1)
