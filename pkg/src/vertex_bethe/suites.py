"""Verification suites: one per module, each a list of tagged residual checks.

A :class:`Check` carries the equation tag it exercises, the measured number,
the threshold and how the two are compared.  Checks marked ``gating=False``
are informational: they document a known discrepancy and never fail a run.
Every suite is deterministic for a fixed :class:`SuiteSettings`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import thermo as th
from .bethe import (
    conjecture_congruences,
    parity_measure,
    solve_bethe,
    sum_rule_check,
    t_r_closed_form_fit,
)
from .elliptic import (
    phi,
    phi_fourier,
    positivity_kernel,
    positivity_kernel_poisson,
    psi,
    psi_fourier,
    q_gamma_identity_residual,
    theta,
)
from .sklyanin import (
    ModelParams,
    build_basis,
    pauli_residual,
    r_eigenvalues_closed,
    r_eigenvalues_direct,
    rll_residual,
    sklyanin_residuals,
    spin_rep,
)
from .sos import DEFAULT_GAUGE, GaugeParams, admissible, vertex_face_residuals
from .transfer import (
    ModelContext,
    bethe_vector_algebraic,
    bethe_vector_coordinate,
    eigenvalue_t,
    q_automorphy_residuals,
    transfer_matrix,
)

SUITES = ("elliptic", "sklyanin", "sos", "bethe", "thermo")

DEFAULT_TOLERANCES: dict[str, float] = {
    # elliptic
    "theta_periodicity": 1e-12,
    "fourier": 1e-9,
    "positivity": 0.0,
    "q_gamma": 1e-10,
    # sklyanin
    "rll": 1e-9,
    "comm_rel": 1e-9,
    "pauli": 1e-9,
    "spec_r": 1e-10,
    # sos
    "vertex_face": 1e-9,
    # bethe
    "bethe_eqs": 1e-10,
    "bethe_vectors": 1e-7,
    "eigenvector": 1e-7,
    "eigenvalue": 1e-7,
    "q_automorphy": 1e-9,
    "sum_rule": 1e-6,
    "sum_rule_control": 1e-3,
    "t_r_fit": 1e-6,
    # thermo
    "densities": 1e-6,
    "constants": 1e-14,
    "sign": 0.0,
    "uniqueness_oracle": 1e-10,
    "free_energy": 1e-6,
    "excited": 1e-7,
    "table": 1e-12,
    "polarization": 1e-8,
    "s_series": 1e-7,
    "s_normalization": 1e-12,
    "sbb": 1e-8,
    "s_vs_r": 1e-6,
}

_RELATIONS: dict[str, Callable[[float, float], bool]] = {
    "<": lambda v, t: v < t,
    "<=": lambda v, t: v <= t,
    ">": lambda v, t: v > t,
}


@dataclass(frozen=True)
class Check:
    name: str
    tag: str
    residual: float
    threshold: float
    relation: str = "<"
    gating: bool = True

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and _RELATIONS[self.relation](self.residual, self.threshold)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    notes: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.gating and not c.passed]

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "notes": self.notes,
        }


@dataclass(frozen=True)
class SuiteSettings:
    """What a suite run depends on.

    When ``model`` is None each suite sweeps its standard parameter sets
    (spin 1/2 and 1, plus 3/2 for the algebra relations); otherwise it runs
    at the single given model.
    """

    model: ModelParams | None = None
    t: float = 2.0
    seed: int = 20240601
    gauge: GaugeParams = DEFAULT_GAUGE
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    quad_nodes: int = th.DEFAULT_NODES

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def models(self, two_ells: tuple[int, ...]) -> list[ModelParams]:
        if self.model is not None:
            return [self.model]
        return [ModelParams.default(k, t=self.t) for k in two_ells]

    def bethe_models(self) -> list[ModelParams]:
        if self.model is not None:
            return [self.model]
        return [ModelParams.default(k, N=n, t=self.t) for k, n in ((1, 2), (1, 4), (2, 2))]

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


def _label(p: ModelParams) -> str:
    return f"2l={p.two_ell},r={p.r},r'={p.r_prime},t={p.t:g},N={p.N}"


def _add(report: SuiteReport, settings: SuiteSettings, name: str, tag: str, value: float, key: str,
         relation: str = "<", gating: bool = True) -> None:
    report.checks.append(Check(name, tag, float(value), settings.tol(key), relation, gating))


# ---------------------------------------------------------------------------
# elliptic


def suite_elliptic(settings: SuiteSettings) -> SuiteReport:
    rep = SuiteReport("elliptic")
    t = settings.model.t if settings.model is not None else settings.t
    tau = 1j / t
    rng = settings.rng(1)
    z = rng.uniform(-0.5, 0.5, 8) + 1j * rng.uniform(-0.4, 0.4, 8) / t
    # theta_11(z + tau) = -exp(-pi i tau - 2 pi i z) theta_11(z)
    lhs = theta((1, 1), z + tau, tau)
    rhs = -np.exp(-1j * np.pi * tau - 2j * np.pi * z) * theta((1, 1), z, tau)
    _add(rep, settings, "theta_11 quasi-periodicity", "theta", np.max(np.abs(lhs - rhs) / np.abs(rhs)),
         "theta_periodicity")

    x = np.linspace(-0.5, 0.5, 41)
    for mu in (0.1, 0.25, 0.4):
        d = np.max(np.abs(phi(x, mu, t) - phi_fourier(x, mu, t)))
        _add(rep, settings, f"Phi direct vs series mu={mu}", "Fourier-Phi", d, "fourier")
        d = np.max(np.abs(psi(x, mu, t) - psi_fourier(x, mu, t)))
        _add(rep, settings, f"Psi direct vs series mu={mu}", "Fourier-Psi", d, "fourier")

    xg = np.linspace(-0.5, 0.5, 201)
    for a, b in ((0.2, 1.0), (0.9, 1.0), (1.5, 4.0)):
        vals = positivity_kernel(a * t, b * t, xg)
        _add(rep, settings, f"positivity kernel min a={a}t b={b}t", "positivity", np.min(vals),
             "positivity", relation=">")
        d = np.max(np.abs(vals - positivity_kernel_poisson(a * t, b * t, xg)))
        _add(rep, settings, f"positivity kernel series vs Poisson a={a}t b={b}t", "positivity", d, "fourier")

    for args in ((0.3, 0.9, 0.5, 0.7, 1.3, 0.4), (0.25, 1.1, 0.6, 0.75, 0.7, 0.2)):
        _add(rep, settings, f"q-Gamma product identity {args}", "inf-prod-q-gamma",
             q_gamma_identity_residual(*args), "q_gamma")
    return rep


# ---------------------------------------------------------------------------
# sklyanin


def suite_sklyanin(settings: SuiteSettings) -> SuiteReport:
    rep = SuiteReport("sklyanin")
    rng = settings.rng(2)
    for p in settings.models((1, 2, 3)):
        basis = build_basis(p.two_ell, p.tau, seed=settings.seed)
        S = spin_rep(p, basis)
        res = sklyanin_residuals(S, p.eta, p.tau)
        _add(rep, settings, f"comm_rel {_label(p)}", "comm_rel", max(res.values()), "comm_rel")
        printed = sklyanin_residuals(S, p.eta, p.tau, index="printed")
        _add(rep, settings, f"comm_rel printed index {_label(p)}", "comm_rel", max(printed.values()),
             "comm_rel", gating=False)
        if p.two_ell == 1:
            _add(rep, settings, f"Pauli proportionality {_label(p)}", "rep:pauli",
                 pauli_residual(S, p.eta, p.tau), "pauli")
        if p.two_ell <= 2:
            worst = 0.0
            for _ in range(20):
                lam, mu = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.4, 0.4, 2) / p.t
                worst = max(worst, rll_residual(p, S, lam, mu))
            _add(rep, settings, f"RLL 20 random pairs {_label(p)}", "RLL", worst, "rll")
    p = settings.models((1,))[0]
    worst = 0.0
    for lam in rng.uniform(-0.5, 0.5, 5) + 1j * rng.uniform(-0.4, 0.4, 5) / p.t:
        closed, direct = r_eigenvalues_closed(lam, p.eta, p.t), r_eigenvalues_direct(lam, p.eta, p.t)
        scale = max(abs(v) for v in direct.values())
        worst = max(worst, max(abs(closed[k] - direct[k]) for k in direct) / scale)
    _add(rep, settings, f"spec(R) closed vs matrix {_label(p)}", "spec(R)", worst, "spec_r")
    return rep


# ---------------------------------------------------------------------------
# sos


def suite_sos(settings: SuiteSettings) -> SuiteReport:
    rep = SuiteReport("sos")
    rng = settings.rng(3)
    for p in settings.models((1, 2)):
        settings.gauge.validate(p)
        basis = build_basis(p.two_ell, p.tau, seed=settings.seed)
        S = spin_rep(p, basis)
        diffs = [d for d in range(-p.two_ell, p.two_ell + 1) if admissible(p, d, 0)]
        worst = 0.0
        for _ in range(10):
            k = int(rng.integers(0, p.r))
            kp = k - int(rng.choice(diffs))
            for lam in rng.uniform(-0.5, 0.5, 5) + 1j * rng.uniform(-0.4, 0.4, 5) / p.t:
                res = vertex_face_residuals(p, basis, S, settings.gauge, k, kp, lam)
                worst = max(worst, max(res.values()))
        _add(rep, settings, f"vertex-face 10 heights x 5 lambda {_label(p)}", "vertex-face", worst,
             "vertex_face")
    return rep


# ---------------------------------------------------------------------------
# bethe


def _root_list(roots) -> list[list[float]]:
    return [[float(np.real(z)), float(np.imag(z))] for z in roots]


def suite_bethe(settings: SuiteSettings) -> SuiteReport:
    rep = SuiteReport("bethe")
    for idx, p in enumerate(settings.bethe_models()):
        rng = settings.rng(40 + idx)
        lab = _label(p)
        sol = solve_bethe(p, 0, "string", seed=0)
        _add(rep, settings, f"Bethe equations {lab}", "Bethe eqs", sol.residual, "bethe_eqs")
        ctx = ModelContext(p, settings.gauge, seed=settings.seed)
        psi_a = bethe_vector_algebraic(ctx, sol.nu, sol.lambdas)
        psi_c = bethe_vector_coordinate(ctx, sol.nu, sol.lambdas)
        nrm = np.linalg.norm(psi_a)
        _add(rep, settings, f"algebraic vs coordinate vector {lab}", "Bethe-vec / coord-expr",
             np.linalg.norm(psi_a - psi_c) / nrm, "bethe_vectors")

        lams = rng.uniform(-0.5, 0.5, 5) + 1j * rng.uniform(-0.4, 0.4, 5) * p.tau.imag
        vec_res, val_res = 0.0, 0.0
        for lam in lams:
            T = transfer_matrix(ctx, lam)
            tv = eigenvalue_t(p, sol.nu, sol.lambdas, lam)
            vec_res = max(vec_res, np.linalg.norm(T @ psi_a - tv * psi_a) / nrm)
            ev = np.linalg.eigvals(T)
            val_res = max(val_res, np.min(np.abs(ev - tv)) / abs(tv))
        _add(rep, settings, f"T(lam) Psi = t(lam) Psi, 5 lambda {lab}", "t eigenvalue", vec_res, "eigenvector")
        _add(rep, settings, f"t(lam) in dense spectrum, 5 lambda {lab}", "t eigenvalue", val_res, "eigenvalue")

        z = complex(rng.uniform(-0.5, 0.5) + 0.2j * p.tau.imag)
        _add(rep, settings, f"Q automorphy {lab}", "Q automorphy",
             max(q_automorphy_residuals(p, sol.nu, sol.lambdas, z)), "q_automorphy")

        n0, n1, dev = sum_rule_check(p, sol.lambdas)
        _add(rep, settings, f"sum rule {lab}", "sumrule:thm", dev, "sum_rule")
        shifted = [lj + 0.01 + 0.005j for lj in sol.lambdas]
        _add(rep, settings, f"sum rule negative control {lab}", "sumrule:thm",
             sum_rule_check(p, shifted)[2], "sum_rule_control", relation=">")

        grid = rng.uniform(-0.5, 0.5, 16) + 1j * rng.uniform(-0.4, 0.4, 16) * p.tau.imag
        n_fit, c_fit, fit_dev = t_r_closed_form_fit(p, sol.nu, sol.lambdas, grid)
        _add(rep, settings, f"t^r closed form, 16 points {lab}", "t^r closed", fit_dev, "t_r_fit")

        parity = conjecture_congruences(p, sol.nu, sol.lambdas, parity_measure(ctx, psi_a))
        note = {
            "params": lab,
            "nu": sol.nu,
            "roots": _root_list(sol.lambdas),
            "sum_rule_lattice_point": [n0, n1],
            "t_r_fit": {"n": n_fit, "const": [c_fit.real, c_fit.imag]},
            "parities": {
                "nu_doubleprime": parity.nu_doubleprime,
                "nu_prime": parity.nu_prime,
                "congruence_1": parity.congruence_1,
                "congruence_2": parity.congruence_2,
            },
        }
        if p.N == 2 and p.two_ell == 1:
            note["exact_solution"] = {"lambda_1": 0.0, "distance": float(abs(sol.lambdas[0]))}
        rep.notes.append(note)
    return rep


# ---------------------------------------------------------------------------
# thermo


def suite_thermo(settings: SuiteSettings) -> SuiteReport:
    rep = SuiteReport("thermo")
    nodes = settings.quad_nodes
    for p in settings.models((1, 2)):
        lab = _label(p)
        l, e = p.ell, p.eta
        rho = th.ground_density(p)
        _add(rep, settings, f"rho constant term = 1/2 {lab}", "rho", abs(rho.constant_term - 0.5), "constants",
             relation="<=")
        _add(rep, settings, f"rho integral equation {lab}", "int-eq:rho", th.ground_residual(p, nodes), "densities")
        dens = th.excitation_densities(p)
        for name, val in th.excitation_residuals(p, nodes).items():
            tag = {"sigma": "int-eq:sigma", "omega_minus": "int-eq:omega-", "omega_plus": "int-eq:omega+",
                   "omega_zero": "int-eq:omega0"}[name]
            _add(rep, settings, f"{name} integral equation {lab}", tag, val, "densities")
        expected = {"sigma": -1 / (4 * l), "omega_minus": -(2 * l - 1) / (2 * l), "omega_plus": -1.0,
                    "omega_zero": 0.0}
        for name, d in dens.as_dict().items():
            _add(rep, settings, f"{name} constant term {lab}", f"def:{name}",
                 abs(d.constant_term - expected[name]), "constants", relation="<=")

        xg = np.linspace(-0.5, 0.5, 201)
        if p.two_ell > 1:
            _add(rep, settings, f"omega_minus < 0 on grid {lab}", "def:omega-", -np.max(dens.omega_minus(xg)),
                 "sign", relation=">")
        _add(rep, settings, f"rho > 0 on grid {lab}", "rho", np.min(rho(xg)), "sign", relation=">")
        for which in ("plus", "zero"):
            vals = th.uniqueness_integrand(p, which, xg)
            sign = 1.0 if which == "zero" else -1.0
            _add(rep, settings, f"omega_{which} + 2eta/(1-4l eta) has fixed sign {lab}", "positivity",
                 np.min(sign * vals), "sign", relation=">")
            _add(rep, settings, f"omega_{which} uniqueness integrand vs kernel {lab}", "positivity",
                 np.max(np.abs(vals - th.uniqueness_kernel_oracle(p, which, xg))), "uniqueness_oracle")

        lams = e * np.array([0.2, 0.6, 1.0, 1.4, 1.8])
        _add(rep, settings, f"free energy series vs quadrature {lab}", "free energy",
             th.free_energy_spread(p, lams, nodes=nodes), "free_energy")
        _add(rep, settings, f"free energy printed series vs quadrature {lab}", "free energy",
             th.free_energy_spread(p, lams, form="printed", nodes=nodes), "free_energy", gating=False)

        _thermo_excited(rep, settings, p, lab)

        xs = np.linspace(-0.5, 0.5, 11)
        for v in th.VARIANTS:
            _add(rep, settings, f"log S series vs theta quotient {v} {lab}", "log-S / spec(S)",
                 th.s_series_vs_closed(p, v, xs), "s_series")
            target = -1.0 if v == "I0" else 1.0
            _add(rep, settings, f"S(0) permutation normalization {v} {lab}", "spec(S)",
                 abs(th.s_matrix_eigenvalue(p, v, 0.0) - target), "s_normalization")
        for mu in (1 - 4 * l * e, 4 * l * e):
            _add(rep, settings, f"S-factor three ways mu={mu:.6g} {lab}", "S-factor",
                 th.sbb_three_way(p, 0.2, mu), "sbb")
        _add(rep, settings, f"S proportional to R, 9 points {lab}", "spec(S) / spec(R)",
             th.s_vs_r_check(p, np.linspace(-0.4, 0.4, 9)), "s_vs_r")
        rep.notes.append({"params": lab, "s_normalization": th.S_NORMALIZATION,
                          "truncations": density_truncations(p)})
    return rep


def _thermo_excited(rep: SuiteReport, settings: SuiteSettings, p: ModelParams, lab: str) -> None:
    x1, x2 = 0.1, -0.3
    for v in th.VARIANTS:
        st = th.solve_excited_state(p, v, x1, x2)
        _add(rep, settings, f"x+/x0 equation {v} {lab}", "x+:2 / x0", st.residual, "excited")
        _add(rep, settings, f"x- = (x1+x2)/2 {v} {lab}", "sumrule:x-", abs(st.x_minus - (x1 + x2) / 2), "table",
             relation="<=")
        _add(rep, settings, f"x- equation {v} {lab}", "sumrule:x-", th.x_minus_residual(p, st), "excited")
        want = (x1 + x2) / 2 if v.endswith("0") else (x1 + x2 + 1) / 2
        got = st.x_plus if st.kind == "I" else st.x_zero
        _add(rep, settings, f"two-particle table abscissa {v} {lab}", "two-particle table", abs(got - want), "table", relation="<=")
        if v in ("I0", "II0"):
            _add(rep, settings, f"two-particle table nu {v} {lab}", "two-particle table", abs(st.nu), "table", relation="<=")
        if v == "II1":
            _add(rep, settings, f"two-particle table nu {v} {lab}", "two-particle table", abs(st.nu - 1), "table", relation="<=")

        pol = th.polarization_checks(p, st, settings.quad_nodes)
        _add(rep, settings, f"polarization sum rule {v} {lab}", "I:J-0:sum" if st.kind == "I" else "II:J-0:pol",
             pol["sum_rule"], "polarization")
        if st.kind == "I":
            _add(rep, settings, f"polarization quadrature {v} {lab}", "I:J-0:sum", pol["quadrature"], "polarization")
            _add(rep, settings, f"polarization J_n closed form {v} {lab}", "def:pol", pol["printed_vs_generic"],
                 "polarization")
            _add(rep, settings, f"polarization J_0 closed form {v} {lab}", "I:J-0:pol",
                 pol["j0_printed_vs_generic"], "polarization")
        else:
            _add(rep, settings, f"polarization J_n printed vs generic {v} {lab}", "def:pol",
                 pol["printed_vs_generic"], "polarization", gating=False)
            _add(rep, settings, f"polarization J_0 printed vs generic {v} {lab}", "II:J-0:pol",
                 pol["j0_printed_vs_generic"], "polarization", gating=False)


def density_truncations(p: ModelParams) -> dict[str, int]:
    out = {"rho": th.ground_density(p).truncation}
    out.update({k: d.truncation for k, d in th.excitation_densities(p).as_dict().items()})
    return out


_RUNNERS: dict[str, Callable[[SuiteSettings], SuiteReport]] = {
    "elliptic": suite_elliptic,
    "sklyanin": suite_sklyanin,
    "sos": suite_sos,
    "bethe": suite_bethe,
    "thermo": suite_thermo,
}


def run_suite(name: str, settings: SuiteSettings) -> list[SuiteReport]:
    """Run one suite, or every suite for ``name == "all"``."""
    if name == "all":
        return [_RUNNERS[s](settings) for s in SUITES]
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    return [_RUNNERS[name](settings)]
